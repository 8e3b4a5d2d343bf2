#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 licensekit contributors
"""Regenerates fixtures/ from scratch.

Prompt rendering, request fingerprints and reference answers are computed
here without the C++ library, so the replay stores double as an oracle: if
the library drifts from the documented formats, replays miss and the
acceptance suite fails.

    python3 tools/gen_fixtures.py [--out fixtures]
"""

import argparse
import hashlib
import json
import random
import re
from pathlib import Path

ALLOWS, DENIES, UNCLEAR = "allows", "denies", "unclear"
LABELS = [ALLOWS, DENIES, UNCLEAR]
PHRASE = {
    ALLOWS: "Can be used commercially.",
    DENIES: "Can't be used commercially.",
    UNCLEAR: "It is not clear whether it is authorized for commercial use.",
}
CATEGORIES = ["general", "customized", "official_terms"]
NONSPECIFIC = "The document describes how the data was collected."

SYSTEMS = [
    ("sys_v1", "custom", "You are a legal assistant who reviews dataset licenses."),
    ("sys_v2", "custom", "You help engineers check whether data may be used in commercial products."),
    ("sys_v3", "custom",
     "You are an expert in data licensing. Give a verdict on commercial use, then explain it in two sentences."),
    ("sys_v4", "model_generated", "Act as a compliance reviewer. Read the terms and summarise the obligations."),
    ("sys_v5", "model_generated", "You are a careful reader of legal text who answers questions about reuse rights."),
    ("sys_v6", "tool_generated",
     "Role: license analyst. Task: classify commercial-use permission. Output: verdict, then reason."),
]
USERS = [
    ("user_v1", "custom", "Here is a {license_kind}:\n{license_text}\nCan this data be used commercially?"),
    ("user_v2", "custom",
     "Read the following {license_kind} and state whether commercial use is allowed.\n\n{license_text}"),
    ("user_v3", "custom",
     "{license_text}\n\nBased on the {license_kind} above, answer with one of {{allowed, denied, unclear}} "
     "and a short reason."),
]

RULES_EN = {
    "pattern_syntax": "substring",
    "deny": ["can't be used commercially", "cannot be used commercially", "cannot use", "prohibits commercial",
             "noncommercial", "non-commercial", "not permitted for commercial"],
    "unclear": ["not clear whether", "unclear", "ambiguous"],
    "allow": ["can be used commercially", "commercial use is permitted", "permits commercial"],
}
RULES_ZH = {
    "pattern_syntax": "substring",
    "deny": ["不可商用", "禁止商业", "不能用于商业"],
    "unclear": ["不清楚", "不明确"],
    "allow": ["可以商用", "允许商业"],
}

# Cell counts of correct answers on the 600-record grid corpus (pa = c / 6).
GRID_CORRECT = {
    "sys_v1": [290, 305, 319],
    "sys_v2": [280, 300, 320],
    "sys_v3": [290, 310, 386],
    "sys_v4": [160, 182, 29],
    "sys_v5": [240, 250, 268],
    "sys_v6": [270, 280, 292],
}
# Correct answers per training size on the 1200-record corpus (pa = c / 12).
ABLATION_CORRECT = {100: 472, 150: 512, 200: 533, 250: 634, 300: 673, 350: 728, 400: 745, 450: 772}
MONOTONE_CORRECT = {12: 20, 24: 30, 36: 40}

# Per-model summary values, one row per model: pa, dr, nrr, ars, ss.
FIVE_MODELS = [
    ("ChatGPT4-175B", 18.06, 0.0, 3.40, 1.3, 94.80),
    ("LLaMA2-70B", 40.28, 1.87, 5.17, 1.0, 92.00),
    ("Qwen1.5-110B", 59.72, 0.0, 0.79, 3.8, 83.10),
    ("LawGPT-7B", 43.75, 0.0, 0.0, 1.7, 50.25),
    ("LicenseGPT", 64.30, 5.71, 3.4, 2.40, 85.80),
]
ELEVEN_MODELS = [
    ("LawGPT_zh", 35.71, 16.67, 23.81, 5, 31.78),
    ("fuzi.mingcha", 30.95, 7.14, 21.43, 65, 44.39),
    ("LexiLaw", 40.71, 0, 20.12, 10, 39.06),
    ("HanFei", 22.05, 9.52, 11.9, 37, 37.01),
    ("WisdomInterrogatory", 43.02, 35.71, 9.52, 20, 34.36),
    ("LawGPT", 43.75, 0, 0, 1.7, 50.25),
    ("Lawyer-LLaMA", 19.05, 83.33, 4.76, 13, 65.45),
    ("ChatLaw", 19.05, 35.71, 21.43, 9, 63.38),
    ("ChatGPT-4", 18.06, 0, 3.40, 1.3, 94.80),
    ("LLaMA-2", 40.28, 1.87, 5.17, 1.0, 92.00),
    ("Qwen-1.5", 59.72, 0, 0.79, 3.8, 83.10),
]
OFFSETS = [-2, -1.5, -1, -0.5, 0, 0, 0.5, 1, 1.5, 2]

EMBED_DIM = 8
EMBEDDER = "mini-embed"


# --- independent re-implementations of the documented formats -------------

def render(body, record):
    kind = "website usage agreement" if record["category"] == "official_terms" else "dataset license"
    out = []
    i = 0
    while i < len(body):
        if body.startswith("{{", i):
            out.append("{")
            i += 2
        elif body.startswith("}}", i):
            out.append("}")
            i += 2
        elif body[i] == "{":
            j = body.index("}", i)
            name = body[i + 1:j]
            out.append(record["text"] if name == "license_text" else kind)
            i = j + 1
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


def field(s):
    return f"{len(s.encode('utf-8'))}:{s}"


def complete_fp(model_id, system_text, user_text, temperature=0.0, max_tokens=512):
    payload = (f"lk1|complete|{field(model_id)}|{field(system_text)}|{field(user_text)}"
               f"|t={round(temperature * 1000)}|m={max_tokens}")
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def embed_fp(embedder_id, text):
    payload = f"lk1|embed|{field(embedder_id)}|{field(text)}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def reference_answer(record):
    out = PHRASE[record["label"]]
    if record.get("rationale"):
        out += " " + record["rationale"]
    return out


def toy_embedding(text):
    # Class axis from the verdict phrase, plus small hash noise.
    vec = [0.0] * EMBED_DIM
    if PHRASE[DENIES] in text:
        vec[1] = 1.0
    elif PHRASE[UNCLEAR] in text:
        vec[2] = 1.0
    elif PHRASE[ALLOWS] in text:
        vec[0] = 1.0
    else:
        vec[3] = 1.0
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    for i in range(EMBED_DIM):
        vec[i] += round((digest[i] / 255.0 - 0.5) * 0.3, 6)
    return [round(v, 6) for v in vec]


# --- corpus construction ----------------------------------------------------

SUBJECTS = ["street images", "speech clips", "clinical notes", "product reviews", "satellite tiles",
            "news articles", "code snippets", "bird songs", "legal opinions", "recipe texts"]
ALLOW_CLAUSES = ["Any use, including in paid products, is granted provided the source is credited.",
                 "You may copy, modify and sell derived works without further permission.",
                 "Use for any purpose is granted royalty-free."]
DENY_CLAUSES = ["Use is limited to academic research; revenue-generating activity needs a separate agreement.",
                "The material may not be used to build products offered for sale.",
                "Redistribution and any for-profit exploitation are forbidden."]
UNCLEAR_CLAUSES = ["Users should contact the maintainers about their intended purpose.",
                   "Terms for uses outside the original study are to be decided case by case.",
                   "Rights are reserved by the publisher; no further detail is given."]
CLAUSES = {ALLOWS: ALLOW_CLAUSES, DENIES: DENY_CLAUSES, UNCLEAR: UNCLEAR_CLAUSES}
RATIONALES = {
    ALLOWS: ["The grant covers paid products as long as credit is given.",
             "Nothing in the terms restricts revenue-generating use."],
    DENIES: ["The terms restrict use to research settings.",
             "Selling products built on the data is excluded."],
    UNCLEAR: ["The terms leave the purpose question open.",
              "The document defers the decision to the maintainers."],
}


def make_record(i, label, category, prefix, rng):
    subject = rng.choice(SUBJECTS)
    clause = rng.choice(CLAUSES[label])
    return {
        "id": f"{prefix}-{i:04d}",
        "name": f"{subject.title()} Set {i}",
        "platform": rng.choice(["huggingface", "kaggle", "zenodo", "github"]),
        "category": category,
        "text": f"Dataset {i} of {subject}. {clause} Version {1 + i % 4}.",
        "url": f"https://data.example.org/{prefix}/{i}",
        "label": label,
        "rationale": rng.choice(RATIONALES[label]),
        "status": "valid",
    }


def balanced_corpus(n_per_label, prefix, seed):
    rng = random.Random(seed)
    out = []
    i = 0
    for _ in range(n_per_label):
        for label in LABELS:
            out.append(make_record(i, label, CATEGORIES[i % 3], prefix, rng))
            i += 1
    return out


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, ensure_ascii=False)
        f.write("\n")


def other_label(label, shift=1):
    return LABELS[(LABELS.index(label) + shift) % 3]


def pick_correct(records, count, rng):
    ids = [r["id"] for r in records]
    rng.shuffle(ids)
    return set(ids[:count])


def replay_entry(fp, text, latency):
    return {"fp": fp, "text": text, "latency_s": latency}


def cell_entries(records, model_id, system_body, user_body, correct, rng, wrong_text=None):
    out = []
    for r in records:
        if r["id"] in correct:
            text = PHRASE[r["label"]]
        else:
            text = wrong_text(r) if wrong_text else PHRASE[other_label(r["label"])]
        latency = round(0.5 + rng.random(), 3)
        out.append(replay_entry(complete_fp(model_id, system_body, render(user_body, r)), text, latency))
    return out


# --- fixture groups ----------------------------------------------------------

def pack_doc():
    tpls = [{"id": i, "kind": "system", "origin": o, "body": b} for i, o, b in SYSTEMS]
    tpls += [{"id": i, "kind": "user", "origin": o, "body": b} for i, o, b in USERS]
    return {"templates": tpls}


def sample_run(out):
    """48 records, three replay models, one embedder."""
    records = balanced_corpus(16, "lic", 7)
    write_jsonl(out / "corpus_sample.jsonl", records)
    sys_body = dict((i, b) for i, _, b in SYSTEMS)["sys_v1"]
    user_body = dict((i, b) for i, _, b in USERS)["user_v1"]
    rng = random.Random(48)
    entries = []
    emitted_texts = set()

    def add_embed(text):
        if text and text not in emitted_texts:
            emitted_texts.add(text)
            e = {"fp": embed_fp(EMBEDDER, text), "embedding": toy_embedding(text)}
            entries.append(e)

    plans = {
        "model-a": (44, 0, 0),  # correct, nonspecific, empty
        "model-b": (30, 6, 0),
        "model-c": (18, 9, 1),
    }
    for model_id, (n_correct, n_nonspecific, n_empty) in plans.items():
        order = [r["id"] for r in records]
        rng.shuffle(order)
        correct = set(order[:n_correct])
        nonspecific = set(order[n_correct:n_correct + n_nonspecific])
        empty = set(order[n_correct + n_nonspecific:n_correct + n_nonspecific + n_empty])
        for r in records:
            if r["id"] in correct:
                # model-c answers with the bare phrase, which repeats a lot
                text = PHRASE[r["label"]] if model_id == "model-c" else reference_answer(r)
            elif r["id"] in nonspecific:
                text = NONSPECIFIC
            elif r["id"] in empty:
                text = ""
            else:
                text = PHRASE[other_label(r["label"])]
            latency = round({"model-a": 2.0, "model-b": 1.0, "model-c": 0.5}[model_id] + rng.random(), 3)
            entries.append(replay_entry(complete_fp(model_id, sys_body, render(user_body, r)), text, latency))
            add_embed(text)
    for r in records:
        add_embed(reference_answer(r))
    write_jsonl(out / "replay" / "sample.jsonl", entries)
    write_json(out / "run.json", {
        "run_id": "sample-run",
        "corpus_path": "corpus_sample.jsonl",
        "corpus_format": "jsonl",
        "fraction": 1.0,
        "k": 4,
        "seed": 20240601,
        "model_ids": ["model-a", "model-b", "model-c"],
        "system_id": "sys_v1",
        "user_id": "user_v1",
        "pack_path": "default_pack.json",
        "ruleset_path": "rulesets/en.json",
        "embedder_id": EMBEDDER,
        "backend": "replay",
        "replay_path": "replay/sample.jsonl",
        "concurrency_limit": 4,
    })
    return records


def grid_run(out):
    records = balanced_corpus(200, "grid", 11)
    write_jsonl(out / "corpus_grid.jsonl", records)
    rng = random.Random(600)
    entries = []
    sys_bodies = {i: b for i, _, b in SYSTEMS}
    for (user_id, _, user_body), col in zip(USERS, range(3)):
        for sys_id, counts in GRID_CORRECT.items():
            correct = pick_correct(records, counts[col], rng)
            entries += cell_entries(records, "licensegpt", sys_bodies[sys_id], user_body, correct, rng)
    write_jsonl(out / "replay" / "grid.jsonl", entries)
    write_json(out / "grid.json", {
        "run_id": "grid",
        "corpus_path": "corpus_grid.jsonl",
        "k": 10,
        "seed": 3,
        "model_ids": ["licensegpt"],
        "system_id": "sys_v1",
        "user_id": "user_v1",
        "pack_path": "default_pack.json",
        "ruleset_path": "rulesets/en.json",
        "backend": "replay",
        "replay_path": "replay/grid.jsonl",
    })
    # Expected heatmap, computed from the counts alone.
    lines = ["model_id,system_id," + ",".join(u for u, _, _ in USERS) + ",row_mean"]
    for sys_id, counts in GRID_CORRECT.items():
        pa = [c / 6 for c in counts]
        cells = [f"{v:.1f}" for v in pa] + [f"{sum(counts) / 18:.1f}"]
        lines.append("licensegpt," + sys_id + "," + ",".join(cells))
    (out / "expected").mkdir(exist_ok=True)
    (out / "expected" / "grid_pa.csv").write_text("\n".join(lines) + "\n")


def ablation_run(out, sample_records):
    records = balanced_corpus(400, "abl", 13)
    write_jsonl(out / "corpus_ablation.jsonl", records)
    sys_body = dict((i, b) for i, _, b in SYSTEMS)["sys_v3"]
    user_body = dict((i, b) for i, _, b in USERS)["user_v3"]
    rng = random.Random(1200)
    entries = []
    for size, count in ABLATION_CORRECT.items():
        correct = pick_correct(records, count, rng)
        entries += cell_entries(records, f"licensegpt-n{size}", sys_body, user_body, correct, rng)
    write_jsonl(out / "replay" / "ablation.jsonl", entries)
    write_json(out / "ablation.json", {
        "run_id": "ablation",
        "corpus_path": "corpus_ablation.jsonl",
        "k": 10,
        "seed": 5,
        "model_ids": ["licensegpt"],
        "system_id": "sys_v3",
        "user_id": "user_v3",
        "pack_path": "default_pack.json",
        "ruleset_path": "rulesets/en.json",
        "backend": "replay",
        "replay_path": "replay/ablation.jsonl",
    })
    lines = ["size,pa_pct"] + [f"{s},{c / 12:.1f}" for s, c in ABLATION_CORRECT.items()]
    (out / "expected" / "ablation.csv").write_text("\n".join(lines) + "\n")

    # Monotone variant on the 48-record corpus.
    sys_body = dict((i, b) for i, _, b in SYSTEMS)["sys_v1"]
    user_body = dict((i, b) for i, _, b in USERS)["user_v1"]
    entries = []
    for size, count in MONOTONE_CORRECT.items():
        correct = pick_correct(sample_records, count, rng)
        wrong = lambda r: NONSPECIFIC  # noqa: E731
        entries += cell_entries(sample_records, f"mono-{size}", sys_body, user_body, correct, rng, wrong)
    write_jsonl(out / "replay" / "monotone.jsonl", entries)
    write_json(out / "monotone.json", {
        "run_id": "monotone",
        "corpus_path": "corpus_sample.jsonl",
        "k": 4,
        "seed": 9,
        "model_ids": ["mono-12"],
        "system_id": "sys_v1",
        "user_id": "user_v1",
        "pack_path": "default_pack.json",
        "ruleset_path": "rulesets/en.json",
        "backend": "replay",
        "replay_path": "replay/monotone.jsonl",
    })


def filter_fixture(out):
    rng = random.Random(10)
    rows = [make_record(i, LABELS[i % 3], CATEGORIES[i % 3], "flt", rng) for i in range(10)]
    for i, r in enumerate(rows):
        r["text"] = f"Terms for collection {i}: see clause {i + 1}. " + CLAUSES[r["label"]][i % 3]
    rows[1]["text"] = "   "
    rows[3]["status"] = "expired"
    # rows[5] repeats rows[4] up to case and spacing
    rows[5]["text"] = "  " + rows[4]["text"].upper().replace(" ", "   ") + " "
    lines = [json.dumps(r, ensure_ascii=False).encode("utf-8") for r in rows]
    # rows[7]: invalid UTF-8 inside the text value
    marker = b"Terms for collection 7"
    lines[7] = lines[7].replace(marker, marker + b" \xff\xfe")
    (out / "filter_fixture.jsonl").write_bytes(b"\n".join(lines) + b"\n")


def metadata_fixture(out):
    rng = random.Random(500)
    counts = {"general": 146, "customized": 186, "official_terms": 168}
    rows = []
    i = 0
    for category, n in counts.items():
        for _ in range(n):
            rows.append(make_record(i, LABELS[i % 3], category, "meta", rng))
            i += 1
    rng.shuffle(rows)
    write_jsonl(out / "category_metadata.jsonl", rows)


def summary_fixture(path, table):
    lines = ["run_hash,model_id,fold,n,pa_pct,dr_pct,nrr_pct,ss_pct,consistency_pct,ars_s"]

    def spread(v, i):
        s = 1.0 if v >= 10 else (0.1 if v > 0 else 0.0)
        return v + OFFSETS[i] * s

    for model, pa, dr, nrr, ars, ss in table:
        for i in range(10):
            vals = [spread(pa, i), spread(dr, i), spread(nrr, i), spread(ss, i)]
            lines.append(f"fixture,{model},{i},50," + ",".join(f"{v:.4f}" for v in vals) +
                         f",,{spread(ars, i):.4f}")
    path.parent.mkdir(exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def review_fixtures(out):
    rows = [
        {"id": "rev-nc", "name": "Street Scenes NC", "platform": "zenodo", "category": "general",
         "text": "Licensed under CC BY-NC 4.0 (Creative Commons Attribution-NonCommercial 4.0 International). "
                 "Credit the authors; no commercial purposes.",
         "label": DENIES, "rationale": "The NC clause excludes commercial purposes.", "status": "valid"},
        {"id": "rev-by", "name": "Bird Calls", "platform": "kaggle", "category": "general",
         "text": "Licensed under CC BY 4.0. Credit the authors.",
         "label": ALLOWS, "rationale": "Attribution is the only condition.", "status": "valid"},
        {"id": "rev-tos", "name": "Forum Posts", "platform": "github", "category": "official_terms",
         "text": "Content belongs to the site operator. Contact us regarding other uses.",
         "label": UNCLEAR, "rationale": "The terms defer to the operator.", "status": "valid"},
        {"id": "rev-mit", "name": "Parser Traces", "platform": "github", "category": "customized",
         "text": "Permission is hereby granted, free of charge, to deal in the data without restriction.",
         "label": ALLOWS, "rationale": "The grant is unrestricted.", "status": "valid"},
        {"id": "rev-raw", "name": "Unreviewed Dump", "platform": "github", "category": "customized",
         "text": "No license file was found.", "label": "unlabeled", "status": "valid"},
    ]
    write_jsonl(out / "review_corpus.jsonl", rows)
    sys_body = dict((i, b) for i, _, b in SYSTEMS)["sys_v1"]
    user_body = dict((i, b) for i, _, b in USERS)["user_v1"]
    answers = {
        "rev-nc": "This dataset cannot be used commercially. The NC element of CC BY-NC 4.0 limits reuse to "
                  "noncommercial settings such as research or teaching, and every reuse must credit the "
                  "creators. A separate license from the rights holder would be needed for a product.",
        "rev-by": "Can be used commercially. CC BY 4.0 only asks for attribution.",
    }
    entries = [replay_entry(complete_fp("licensegpt", sys_body, render(user_body, r)), answers[r["id"]], 1.5)
               for r in rows if r["id"] in answers]
    write_jsonl(out / "replay" / "review_assist.jsonl", entries)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = ap.parse_args()
    out = Path(args.out)
    (out / "replay").mkdir(parents=True, exist_ok=True)
    (out / "rulesets").mkdir(exist_ok=True)
    (out / "expected").mkdir(exist_ok=True)

    write_json(out / "default_pack.json", pack_doc())
    write_json(out / "rulesets" / "en.json", RULES_EN)
    write_json(out / "rulesets" / "zh.json", RULES_ZH)
    write_json(out / "models.json", {
        "models": [
            {"model_id": "licensegpt", "base_url": "http://127.0.0.1:8081/v1", "auth_env": "LICENSEKIT_LICENSEGPT_KEY",
             "params": {"temperature": 0.0, "max_tokens": 512, "timeout_s": 60, "max_retries": 2, "backoff_s": 0.5},
             "parameter_count_b": 7},
            {"model_id": "model-a", "base_url": "http://127.0.0.1:8082/v1"},
            {"model_id": "model-b", "base_url": "http://127.0.0.1:8083/v1"},
            {"model_id": "model-c", "base_url": "http://127.0.0.1:8084/v1"},
        ],
        "embedders": [{"embedder_id": EMBEDDER, "base_url": "http://127.0.0.1:8090/v1"}],
    })

    sample = sample_run(out)
    grid_run(out)
    ablation_run(out, sample)
    filter_fixture(out)
    metadata_fixture(out)
    summary_fixture(out / "five_model_run" / "summary.csv", FIVE_MODELS)
    summary_fixture(out / "eleven_model_run" / "summary.csv", ELEVEN_MODELS)
    review_fixtures(out)


if __name__ == "__main__":
    main()
