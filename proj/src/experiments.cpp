// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/experiments.hpp"

#include "licensekit/csv.hpp"
#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/parallel.hpp"
#include "licensekit/random.hpp"
#include "licensekit/reports.hpp"
#include "licensekit/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace licensekit::experiments {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(BackendMode m) {
    switch (m) {
    case BackendMode::Live:
        return "live";
    case BackendMode::Record:
        return "record";
    case BackendMode::Replay:
        return "replay";
    }
    return "replay";
}

BackendMode backend_mode_from_string(std::string_view s) {
    const auto f = text::casefold(s);
    if (f == "live") return BackendMode::Live;
    if (f == "record") return BackendMode::Record;
    if (f == "replay") return BackendMode::Replay;
    throw ParseError("backend must be live, record or replay (got '" + std::string(s) + "')");
}

// ---------------------------------------------------------------------------
// manifest

RunManifest RunManifest::load(const fs::path& path) {
    const auto data = read_file(path);
    json j;
    try {
        j = json::parse(data);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        return from_json(j, path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

RunManifest RunManifest::from_json(const json& j, fs::path base_dir) {
    if (!j.is_object()) {
        throw ParseError("manifest must be a json object");
    }
    RunManifest m;
    m.base_dir = std::move(base_dir);
    try {
        m.run_id = j.at("run_id").get<std::string>();
        m.corpus_path = j.at("corpus_path").get<std::string>();
        if (j.contains("corpus_format")) {
            m.corpus_format = corpus::format_from_string(j["corpus_format"].get<std::string>());
        }
        m.fraction = j.value("fraction", 1.0);
        m.k = j.value("k", std::size_t{10});
        m.seed = j.value("seed", std::uint64_t{0});
        m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
        m.system_id = j.at("system_id").get<std::string>();
        m.user_id = j.at("user_id").get<std::string>();
        m.pack_path = j.at("pack_path").get<std::string>();
        m.ruleset_path = j.at("ruleset_path").get<std::string>();
        if (j.contains("registry_path") && !j["registry_path"].is_null()) {
            m.registry_path = j["registry_path"].get<std::string>();
        }
        if (j.contains("embedder_id") && !j["embedder_id"].is_null()) {
            m.embedder_id = j["embedder_id"].get<std::string>();
        }
        if (j.contains("backend")) {
            m.backend = backend_mode_from_string(j["backend"].get<std::string>());
        }
        if (j.contains("replay_path") && !j["replay_path"].is_null()) {
            m.replay_path = j["replay_path"].get<std::string>();
        }
        m.concurrency_limit = j.value("concurrency_limit", std::size_t{4});
        m.allow_shrink = j.value("allow_shrink", false);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
}

void RunManifest::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) {
            throw ValidationError("manifest: " + msg);
        }
    };
    require(!run_id.empty(), "run_id is empty");
    require(!corpus_path.empty(), "corpus_path is empty");
    require(!pack_path.empty(), "pack_path is empty");
    require(!ruleset_path.empty(), "ruleset_path is empty");
    require(fraction > 0.0 && fraction <= 1.0, "fraction must be in (0, 1]");
    require(k >= 2, "k must be at least 2");
    require(!model_ids.empty(), "model_ids is empty");
    require(std::set<std::string>(model_ids.begin(), model_ids.end()).size() == model_ids.size(),
            "model_ids contains duplicates");
    for (const auto& id : model_ids) {
        require(!id.empty(), "model_ids contains an empty id");
    }
    require(!system_id.empty(), "system_id is empty");
    require(!user_id.empty(), "user_id is empty");
    require(concurrency_limit >= 1, "concurrency_limit must be positive");
    if (backend != BackendMode::Live) {
        require(replay_path.has_value() && !replay_path->empty(),
                std::string(to_string(backend)) + " backend requires replay_path");
    }
    if (backend != BackendMode::Replay) {
        require(registry_path.has_value(), std::string(to_string(backend)) + " backend requires registry_path");
    }
}

fs::path RunManifest::resolve(const std::string& p) const {
    const fs::path path(p);
    if (path.is_absolute() || base_dir.empty()) {
        return path;
    }
    return base_dir / path;
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["run_id"] = run_id;
    j["corpus_path"] = corpus_path;
    j["corpus_format"] = corpus_format == corpus::Format::Csv ? "csv" : "jsonl";
    j["fraction"] = fraction;
    j["k"] = k;
    j["seed"] = seed;
    j["model_ids"] = model_ids;
    j["system_id"] = system_id;
    j["user_id"] = user_id;
    j["pack_path"] = pack_path;
    j["ruleset_path"] = ruleset_path;
    if (registry_path) {
        j["registry_path"] = *registry_path;
    }
    if (embedder_id) {
        j["embedder_id"] = *embedder_id;
    }
    j["backend"] = to_string(backend);
    if (replay_path) {
        j["replay_path"] = *replay_path;
    }
    j["concurrency_limit"] = concurrency_limit;
    j["allow_shrink"] = allow_shrink;
    return j;
}

std::string RunManifest::hash() const { return sha256_hex(to_json().dump()); }

// ---------------------------------------------------------------------------
// results

double RunResult::mean_pa(const std::string& model_id) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& c : cells) {
        if (c.model_id == model_id) {
            sum += c.summary.pa_pct;
            ++n;
        }
    }
    if (n == 0) {
        throw NotFoundError("run '" + run_id + "' has no results for model '" + model_id + "'");
    }
    return sum / static_cast<double>(n);
}

std::string path_component(std::string_view id) {
    std::string out;
    for (const char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") {
        out = "_" + out;
    }
    return out;
}

namespace {

std::string folds_hash(const corpus::FoldAssignment& f) {
    ordered_json j;
    j["k"] = f.k;
    j["seed"] = f.seed;
    j["assignments"] = ordered_json::object();
    for (const auto& [id, fold] : f.assignments) {
        j["assignments"][id] = fold;
    }
    return sha256_hex(j.dump());
}

std::shared_ptr<modelgate::Backend> make_backend(const RunManifest& m) {
    switch (m.backend) {
    case BackendMode::Live:
        return std::make_shared<modelgate::HttpBackend>(modelgate::make_http_transport());
    case BackendMode::Record:
        return modelgate::record_session(
            std::make_shared<modelgate::HttpBackend>(modelgate::make_http_transport()), m.resolve(*m.replay_path));
    case BackendMode::Replay:
        return modelgate::replay_session(m.resolve(*m.replay_path));
    }
    throw ConfigError("unknown backend mode");
}

struct Inputs {
    corpus::Corpus subset;
    corpus::FoldAssignment folds;
    prompts::TemplatePack pack;
    std::optional<metrics::Ruleset> ruleset;
    std::optional<modelgate::ModelRegistry> registry;
    Provenance provenance;
};

Inputs load_inputs(const RunManifest& m) {
    Inputs in;
    const auto corpus_file = m.resolve(m.corpus_path);
    const auto pack_file = m.resolve(m.pack_path);
    const auto ruleset_file = m.resolve(m.ruleset_path);

    in.pack = prompts::TemplatePack::load(pack_file);
    in.pack.get(m.system_id);
    in.pack.get(m.user_id);
    in.ruleset = metrics::Ruleset::load(ruleset_file);
    if (m.registry_path) {
        in.registry = modelgate::ModelRegistry::load(m.resolve(*m.registry_path));
        for (const auto& id : m.model_ids) {
            in.registry->model(id);
        }
    }

    const auto loaded = corpus::load_corpus(corpus_file, m.corpus_format);
    const auto filtered = corpus::filter_invalid(loaded);
    in.subset = corpus::balanced_subset(filtered.corpus, m.fraction, derive_seed(m.seed, "subset"), m.allow_shrink);
    in.folds = corpus::stratified_folds(in.subset, m.k, derive_seed(m.seed, "folds"));

    in.provenance.manifest_hash = m.hash();
    in.provenance.pack_hash = in.pack.hash();
    in.provenance.ruleset_hash = in.ruleset->hash();
    in.provenance.corpus_hash = sha256_file(corpus_file);
    in.provenance.folds_hash = folds_hash(in.folds);
    return in;
}

modelgate::ModelEndpointConfig model_config(const Inputs& in, const std::string& id) {
    if (in.registry) {
        return in.registry->model(id);
    }
    modelgate::ModelEndpointConfig c;
    c.model_id = id;
    return c;
}

modelgate::EmbedderConfig embedder_config(const Inputs& in, const RunManifest& m) {
    if (in.registry && in.registry->has_embedder(*m.embedder_id)) {
        return in.registry->embedder(*m.embedder_id);
    }
    if (m.backend != BackendMode::Replay) {
        throw ConfigError("embedder '" + *m.embedder_id + "' is not in the registry");
    }
    modelgate::EmbedderConfig c;
    c.embedder_id = *m.embedder_id;
    return c;
}

void check_directory(const RunManifest& m, const fs::path& out_dir) {
    const auto lock = out_dir / "MANIFEST.lock";
    if (!fs::exists(lock)) {
        return;
    }
    std::string existing;
    try {
        existing = json::parse(read_file(lock)).at("run_id").get<std::string>();
    } catch (const json::exception&) {
        throw ConflictError(out_dir.string() + " holds an unreadable MANIFEST.lock");
    }
    if (existing != m.run_id) {
        throw ConflictError(out_dir.string() + " already holds run '" + existing + "'");
    }
}

void write_outputs(const RunManifest& m, const RunResult& r, const fs::path& out_dir) {
    std::vector<reports::SummaryRow> rows;
    for (const auto& cell : r.cells) {
        std::string lines;
        for (const auto& o : cell.outcomes) {
            ordered_json j;
            j["run_hash"] = r.provenance.manifest_hash;
            j["fold"] = cell.fold;
            const auto body = metrics::to_json(o);
            for (const auto& [key, value] : body.items()) {
                j[key] = value;
            }
            lines += j.dump();
            lines += '\n';
        }
        write_file(out_dir / "outcomes" / path_component(cell.model_id) / ("fold_" + std::to_string(cell.fold) + ".jsonl"),
                   lines);
        rows.push_back({r.provenance.manifest_hash, cell.model_id, cell.fold, cell.summary});
    }
    write_file(out_dir / "summary.csv", reports::render_summary_csv(rows));

    ordered_json lock;
    lock["run_id"] = r.run_id;
    lock["run_hash"] = r.provenance.manifest_hash;
    lock["pack_hash"] = r.provenance.pack_hash;
    lock["ruleset_hash"] = r.provenance.ruleset_hash;
    lock["corpus_hash"] = r.provenance.corpus_hash;
    lock["folds_hash"] = r.provenance.folds_hash;
    lock["subset_size"] = r.subset_size;
    lock["fold_sizes"] = r.folds.fold_sizes();
    lock["manifest"] = m.to_json();
    write_file(out_dir / "MANIFEST.lock", lock.dump(2) + "\n");
}

RunResult evaluate(const RunManifest& m, const Inputs& in, modelgate::Backend& backend,
                   metrics::DuplicationMode mode) {
    RunResult r;
    r.run_id = m.run_id;
    r.provenance = in.provenance;
    r.subset_size = in.subset.size();
    r.folds = in.folds;

    std::optional<modelgate::EmbedderConfig> ecfg;
    metrics::Embedder embed;
    if (m.embedder_id) {
        ecfg = embedder_config(in, m);
        embed = [&backend, &ecfg](std::string_view t) { return backend.embed(*ecfg, t); };
    }

    std::vector<std::string> models = m.model_ids;
    std::sort(models.begin(), models.end());
    for (const auto& model_id : models) {
        const auto cfg = model_config(in, model_id);
        for (std::size_t fold = 0; fold < m.k; ++fold) {
            const auto members = corpus::fold_members(in.subset, in.folds, fold);
            std::vector<metrics::ResponseItem> responses(members.size());
            bounded_for(members.size(), m.concurrency_limit, [&](std::size_t i) {
                const auto prompt = prompts::render(in.pack, m.system_id, m.user_id, members[i]);
                const auto reply = backend.complete(cfg, prompt);
                responses[i] = {members[i].id, model_id, m.system_id, m.user_id, reply.text, reply.latency_s};
            });
            std::map<std::string, metrics::GroundTruth> truth;
            for (const auto& rec : members) {
                truth[rec.id] = {rec.label, corpus::reference_answer(rec)};
            }
            auto eval = metrics::evaluate_fold(std::move(responses), truth, *in.ruleset, embed ? &embed : nullptr,
                                               m.concurrency_limit, mode);
            r.cells.push_back({model_id, fold, std::move(eval.outcomes), eval.summary});
        }
    }
    return r;
}

} // namespace

RunResult run_cv_eval(const RunManifest& manifest, const fs::path& out_dir, const RunOptions& options) {
    manifest.validate();
    check_directory(manifest, out_dir);
    fs::create_directories(out_dir);
    fs::remove_all(out_dir / "outcomes");
    fs::remove(out_dir / "summary.csv");
    fs::remove(out_dir / "PARTIAL");
    try {
        const auto inputs = load_inputs(manifest);
        auto backend = options.backend ? options.backend : make_backend(manifest);
        auto result = evaluate(manifest, inputs, *backend, options.duplication_mode);
        write_outputs(manifest, result, out_dir);
        return result;
    } catch (const std::exception& e) {
        write_file(out_dir / "PARTIAL", std::string("run '") + manifest.run_id + "' failed: " + e.what() + "\n");
        throw;
    }
}

// ---------------------------------------------------------------------------
// prompt grid

double GridResult::row_mean(const std::string& model_id, std::size_t system_index) const {
    const auto& row = pa.at(model_id).at(system_index);
    if (row.empty()) {
        throw ValidationError("grid row has no cells");
    }
    double s = 0.0;
    for (const double v : row) {
        s += v;
    }
    return s / static_cast<double>(row.size());
}

std::string render_grid_csv(const GridResult& grid) {
    std::vector<std::string> header{"model_id", "system_id"};
    header.insert(header.end(), grid.user_ids.begin(), grid.user_ids.end());
    header.emplace_back("row_mean");
    std::string out = csv::format_row(header);
    for (const auto& model : grid.model_ids) {
        for (std::size_t s = 0; s < grid.system_ids.size(); ++s) {
            std::vector<std::string> row{model, grid.system_ids[s]};
            for (const double v : grid.pa.at(model)[s]) {
                row.push_back(text::fixed(v, 1));
            }
            row.push_back(text::fixed(grid.row_mean(model, s), 1));
            out += csv::format_row(row);
        }
    }
    return out;
}

GridResult run_prompt_grid(const RunManifest& manifest, const std::vector<std::string>& system_ids,
                           const std::vector<std::string>& user_ids, const fs::path& out_dir,
                           const RunOptions& options) {
    manifest.validate();
    if (system_ids.empty() || user_ids.empty()) {
        throw ValidationError("prompt grid needs at least one system and one user template");
    }
    const auto pack = prompts::TemplatePack::load(manifest.resolve(manifest.pack_path));
    prompts::grid(pack, system_ids, user_ids); // throws on unknown ids

    RunOptions opts = options;
    if (!opts.backend) {
        opts.backend = make_backend(manifest);
    }

    GridResult g;
    g.system_ids = system_ids;
    g.user_ids = user_ids;
    g.model_ids = manifest.model_ids;
    std::sort(g.model_ids.begin(), g.model_ids.end());
    for (const auto& model : g.model_ids) {
        g.pa[model].assign(system_ids.size(), std::vector<double>(user_ids.size(), 0.0));
    }
    for (std::size_t s = 0; s < system_ids.size(); ++s) {
        for (std::size_t u = 0; u < user_ids.size(); ++u) {
            RunManifest cell = manifest;
            cell.system_id = system_ids[s];
            cell.user_id = user_ids[u];
            cell.run_id = manifest.run_id + ":" + system_ids[s] + "__" + user_ids[u];
            const auto dir = out_dir / "grid" / (path_component(system_ids[s]) + "__" + path_component(user_ids[u]));
            const auto result = run_cv_eval(cell, dir, opts);
            for (const auto& model : g.model_ids) {
                g.pa[model][s][u] = result.mean_pa(model);
            }
        }
    }
    write_file(out_dir / "grid_pa.csv", render_grid_csv(g));
    return g;
}

// ---------------------------------------------------------------------------
// data-size ablation

std::string render_ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = csv::format_row({"size", "pa_pct"});
    for (const auto& r : rows) {
        out += csv::format_row({std::to_string(r.size), text::fixed(r.pa_pct, 1)});
    }
    return out;
}

std::vector<AblationRow> run_data_size_ablation(const RunManifest& manifest, const std::vector<std::size_t>& sizes,
                                                const std::map<std::size_t, std::string>& endpoints,
                                                const fs::path& out_dir, const RunOptions& options) {
    manifest.validate();
    if (sizes.empty()) {
        throw ValidationError("ablation needs at least one size");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
            throw ValidationError("ablation sizes must be positive and strictly increasing");
        }
        if (!endpoints.count(sizes[i])) {
            throw ConfigError("no evaluation endpoint registered for size " + std::to_string(sizes[i]));
        }
    }

    // Nested training subsets drawn from the labeled, valid corpus.
    const auto pack = prompts::TemplatePack::load(manifest.resolve(manifest.pack_path));
    const auto loaded = corpus::load_corpus(manifest.resolve(manifest.corpus_path), manifest.corpus_format);
    corpus::Corpus pool;
    for (auto& rec : corpus::filter_invalid(loaded).corpus) {
        if (rec.label != corpus::Label::Unlabeled) {
            pool.push_back(std::move(rec));
        }
    }
    const auto subsets = corpus::subsample_for_ablation(pool, sizes, derive_seed(manifest.seed, "ablation"));
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        std::ostringstream os;
        corpus::write_instruction_jsonl(
            os, corpus::instruction_examples(subsets[i], pack, manifest.system_id, manifest.user_id));
        write_file(out_dir / "ablation" / ("train_" + std::to_string(sizes[i]) + ".jsonl"), os.str());
    }

    RunOptions opts = options;
    if (!opts.backend) {
        opts.backend = make_backend(manifest);
    }
    std::vector<AblationRow> rows;
    for (const auto size : sizes) {
        RunManifest cell = manifest;
        cell.model_ids = {endpoints.at(size)};
        cell.run_id = manifest.run_id + ":size_" + std::to_string(size);
        const auto result = run_cv_eval(cell, out_dir / "ablation" / ("size_" + std::to_string(size)), opts);
        rows.push_back({size, cell.model_ids.front(), result.mean_pa(cell.model_ids.front())});
    }
    write_file(out_dir / "ablation.csv", render_ablation_csv(rows));
    return rows;
}

} // namespace licensekit::experiments
