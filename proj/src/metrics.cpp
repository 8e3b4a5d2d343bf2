// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/metrics.hpp"

#include "licensekit/error.hpp"
#include "licensekit/hash.hpp"
#include "licensekit/parallel.hpp"
#include "licensekit/stats_kernels.hpp"
#include "licensekit/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace licensekit::metrics {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::AllowsCommercial:
        return "allows";
    case Verdict::DeniesCommercial:
        return "denies";
    case Verdict::Unclear:
        return "unclear";
    case Verdict::NonSpecific:
        return "nonspecific";
    }
    return "nonspecific";
}

Verdict verdict_from_string(std::string_view s) {
    if (s == "allows") return Verdict::AllowsCommercial;
    if (s == "denies") return Verdict::DeniesCommercial;
    if (s == "unclear") return Verdict::Unclear;
    if (s == "nonspecific") return Verdict::NonSpecific;
    throw ParseError("unknown verdict '" + std::string(s) + "'");
}

Verdict verdict_for(corpus::Label label) {
    switch (label) {
    case corpus::Label::AllowsCommercial:
        return Verdict::AllowsCommercial;
    case corpus::Label::DeniesCommercial:
        return Verdict::DeniesCommercial;
    case corpus::Label::Unclear:
        return Verdict::Unclear;
    case corpus::Label::Unlabeled:
        break;
    }
    throw ValidationError("unlabeled record cannot serve as ground truth");
}

// ---------------------------------------------------------------------------
// rulesets

Ruleset::Ruleset(std::vector<std::string> deny, std::vector<std::string> unclear, std::vector<std::string> allow,
                 PatternSyntax syntax)
    : syntax_(syntax) {
    if (deny.empty() && unclear.empty() && allow.empty()) {
        throw ValidationError("ruleset has no patterns");
    }
    auto build = [&](Group& g, std::vector<std::string> patterns, const char* name) {
        for (auto& p : patterns) {
            if (p.empty()) {
                throw ValidationError(std::string("ruleset group '") + name + "' contains an empty pattern");
            }
            if (syntax_ == PatternSyntax::Regex) {
                try {
                    g.compiled.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
                } catch (const std::regex_error& e) {
                    throw ValidationError(std::string("ruleset group '") + name + "': invalid regex '" + p +
                                          "': " + e.what());
                }
                g.patterns.push_back(std::move(p));
            } else {
                g.patterns.push_back(text::normalize(p));
            }
        }
    };
    build(deny_, std::move(deny), "deny");
    build(unclear_, std::move(unclear), "unclear");
    build(allow_, std::move(allow), "allow");
}

Ruleset Ruleset::from_json_text(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        const auto syntax_name = doc.value("pattern_syntax", std::string("substring"));
        PatternSyntax syntax;
        if (syntax_name == "substring") {
            syntax = PatternSyntax::Substring;
        } else if (syntax_name == "regex") {
            syntax = PatternSyntax::Regex;
        } else {
            throw ParseError("ruleset: unknown pattern_syntax '" + syntax_name + "'");
        }
        auto list = [&](const char* key) {
            return doc.contains(key) ? doc[key].get<std::vector<std::string>>() : std::vector<std::string>{};
        };
        return Ruleset(list("deny"), list("unclear"), list("allow"), syntax);
    } catch (const json::exception& e) {
        throw ParseError(std::string("ruleset: ") + e.what());
    }
}

Ruleset Ruleset::load(const std::filesystem::path& path) { return from_json_text(read_file(path)); }

bool Ruleset::matches(const Group& g, const std::string& folded) const {
    if (syntax_ == PatternSyntax::Regex) {
        return std::any_of(g.compiled.begin(), g.compiled.end(),
                           [&](const std::regex& re) { return std::regex_search(folded, re); });
    }
    return std::any_of(g.patterns.begin(), g.patterns.end(),
                       [&](const std::string& p) { return folded.find(p) != std::string::npos; });
}

Verdict Ruleset::extract(std::string_view response_text) const {
    // whitespace runs collapse so wrapped answers still match
    const auto folded = text::normalize(response_text);
    if (matches(deny_, folded)) return Verdict::DeniesCommercial;
    if (matches(unclear_, folded)) return Verdict::Unclear;
    if (matches(allow_, folded)) return Verdict::AllowsCommercial;
    return Verdict::NonSpecific;
}

std::string Ruleset::hash() const {
    ordered_json j;
    j["pattern_syntax"] = syntax_ == PatternSyntax::Regex ? "regex" : "substring";
    j["deny"] = deny_.patterns;
    j["unclear"] = unclear_.patterns;
    j["allow"] = allow_.patterns;
    return sha256_hex(j.dump());
}

Verdict extract_verdict(std::string_view response_text, const Ruleset& ruleset) {
    return ruleset.extract(response_text);
}

// ---------------------------------------------------------------------------
// outcomes

EvalOutcome grade(std::string license_id, std::string model_id, std::string system_id, std::string user_id,
                  std::string response_text, corpus::Label ground_truth, double latency_s, const Ruleset& ruleset) {
    EvalOutcome o;
    o.license_id = std::move(license_id);
    o.model_id = std::move(model_id);
    o.system_id = std::move(system_id);
    o.user_id = std::move(user_id);
    o.extracted = ruleset.extract(response_text);
    o.ground_truth = ground_truth;
    o.correct = o.extracted != Verdict::NonSpecific && o.extracted == verdict_for(ground_truth);
    o.normalized_response = text::normalize(response_text);
    o.response_text = std::move(response_text);
    o.latency_s = latency_s;
    return o;
}

ordered_json to_json(const EvalOutcome& o) {
    ordered_json j;
    j["license_id"] = o.license_id;
    j["model_id"] = o.model_id;
    j["system_id"] = o.system_id;
    j["user_id"] = o.user_id;
    j["response_text"] = o.response_text;
    j["extracted"] = to_string(o.extracted);
    j["ground_truth"] = corpus::to_string(o.ground_truth);
    j["correct"] = o.correct;
    j["normalized_response"] = o.normalized_response;
    if (o.ss) {
        j["ss"] = *o.ss;
    } else {
        j["ss"] = nullptr;
    }
    j["latency_s"] = o.latency_s;
    return j;
}

EvalOutcome outcome_from_json(const json& j) {
    EvalOutcome o;
    o.license_id = j.at("license_id").get<std::string>();
    o.model_id = j.value("model_id", std::string{});
    o.system_id = j.value("system_id", std::string{});
    o.user_id = j.value("user_id", std::string{});
    o.response_text = j.at("response_text").get<std::string>();
    o.extracted = verdict_from_string(j.value("extracted", std::string("nonspecific")));
    o.ground_truth = corpus::label_from_string(j.at("ground_truth").get<std::string>());
    if (o.ground_truth == corpus::Label::Unlabeled) {
        throw ParseError("outcome '" + o.license_id + "' has no ground truth");
    }
    o.correct = j.value("correct", false);
    o.normalized_response = j.value("normalized_response", text::normalize(o.response_text));
    if (j.contains("ss") && !j["ss"].is_null()) {
        o.ss = j["ss"].get<double>();
    }
    o.latency_s = j.value("latency_s", 0.0);
    if (o.correct && o.extracted == Verdict::NonSpecific) {
        throw ParseError("outcome '" + o.license_id + "' is marked correct but non-specific");
    }
    return o;
}

std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& path) {
    const auto data = read_file(path);
    std::vector<EvalOutcome> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split(data, '\n')) {
        ++line_no;
        if (text::is_blank(line)) {
            continue;
        }
        try {
            out.push_back(outcome_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// metrics

namespace {

void require_nonempty(std::span<const EvalOutcome> outcomes, const char* metric) {
    if (outcomes.empty()) {
        throw ValidationError(std::string(metric) + ": no outcomes");
    }
}

double percent(std::size_t count, std::size_t n) {
    return 100.0 * static_cast<double>(count) / static_cast<double>(n);
}

} // namespace

DuplicationMode duplication_mode_from_string(std::string_view s) {
    if (s == "extras") return DuplicationMode::Extras;
    if (s == "max-class" || s == "max_class") return DuplicationMode::MaxClass;
    throw ParseError("unknown duplication mode '" + std::string(s) + "'");
}

double prediction_agreement(std::span<const EvalOutcome> outcomes) {
    require_nonempty(outcomes, "prediction_agreement");
    const auto correct = std::count_if(outcomes.begin(), outcomes.end(), [](const EvalOutcome& o) {
        return o.correct && o.extracted != Verdict::NonSpecific;
    });
    return percent(static_cast<std::size_t>(correct), outcomes.size());
}

double duplication_rate(std::span<const EvalOutcome> outcomes, DuplicationMode mode) {
    require_nonempty(outcomes, "duplication_rate");
    std::unordered_map<std::string_view, std::size_t> groups;
    for (const auto& o : outcomes) {
        ++groups[o.normalized_response];
    }
    if (mode == DuplicationMode::Extras) {
        return percent(outcomes.size() - groups.size(), outcomes.size());
    }
    std::size_t largest = 0;
    for (const auto& [text, count] : groups) {
        largest = std::max(largest, count);
    }
    return largest < 2 ? 0.0 : percent(largest, outcomes.size());
}

double nonspecific_rate(std::span<const EvalOutcome> outcomes) {
    require_nonempty(outcomes, "nonspecific_rate");
    const auto count = std::count_if(outcomes.begin(), outcomes.end(),
                                     [](const EvalOutcome& o) { return o.extracted == Verdict::NonSpecific; });
    return percent(static_cast<std::size_t>(count), outcomes.size());
}

double average_response_speed(std::span<const EvalOutcome> outcomes) {
    require_nonempty(outcomes, "average_response_speed");
    double sum = 0.0;
    for (const auto& o : outcomes) {
        if (!(o.latency_s >= 0.0)) {
            throw ValidationError("negative latency for '" + o.license_id + "'");
        }
        sum += o.latency_s;
    }
    return sum / static_cast<double>(outcomes.size());
}

SsAggregate mean_ss(std::span<const EvalOutcome> outcomes) {
    require_nonempty(outcomes, "mean_ss");
    double sum = 0.0;
    std::size_t consistent = 0;
    for (const auto& o : outcomes) {
        if (!o.ss) {
            throw ValidationError("mean_ss: outcome '" + o.license_id + "' has no similarity score");
        }
        sum += *o.ss;
        consistent += *o.ss > kConsistencyThreshold;
    }
    const double mean_pct = 100.0 * sum / static_cast<double>(outcomes.size());
    return {std::max(0.0, mean_pct), percent(consistent, outcomes.size())};
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("cosine_similarity: vectors must share a positive dimension");
    }
    double out = 0.0;
    stats::kernels::serial::cosine_rows(a, b, a.size(), std::span<double>(&out, 1));
    if (std::isnan(out)) {
        throw DegenerateError("cosine_similarity: zero-norm embedding");
    }
    return std::clamp(out, -1.0, 1.0);
}

double semantic_similarity(std::string_view outcome_text, std::string_view reference_text, const Embedder& embedder) {
    if (outcome_text.empty() || reference_text.empty()) {
        throw ValidationError("semantic_similarity: texts must be non-empty");
    }
    const auto a = embedder(outcome_text);
    const auto b = embedder(reference_text);
    return cosine_similarity(a, b);
}

MetricSummary summarize(std::span<const EvalOutcome> outcomes, DuplicationMode mode) {
    require_nonempty(outcomes, "summarize");
    MetricSummary s;
    s.n = outcomes.size();
    s.pa_pct = prediction_agreement(outcomes);
    s.dr_pct = duplication_rate(outcomes, mode);
    s.nrr_pct = nonspecific_rate(outcomes);
    s.ars_s = average_response_speed(outcomes);
    const auto with_ss = std::count_if(outcomes.begin(), outcomes.end(), [](const EvalOutcome& o) { return o.ss; });
    if (with_ss == static_cast<std::ptrdiff_t>(outcomes.size())) {
        const auto agg = mean_ss(outcomes);
        s.ss_pct = agg.ss_pct;
        s.consistency_pct = agg.consistency_pct;
    } else if (with_ss != 0) {
        throw ValidationError("summarize: similarity present on only some outcomes");
    }
    return s;
}

FoldEvaluation evaluate_fold(std::vector<ResponseItem> responses, const std::map<std::string, GroundTruth>& truth,
                             const Ruleset& ruleset, const Embedder* embedder, std::size_t concurrency,
                             DuplicationMode mode) {
    std::sort(responses.begin(), responses.end(),
              [](const ResponseItem& a, const ResponseItem& b) { return a.license_id < b.license_id; });

    std::set<std::string> unmatched;
    std::set<std::string> seen;
    for (const auto& r : responses) {
        if (!seen.insert(r.license_id).second) {
            throw ValidationError("evaluate_fold: duplicate response for '" + r.license_id + "'");
        }
        if (!truth.count(r.license_id)) {
            unmatched.insert(r.license_id);
        }
    }
    for (const auto& [id, gt] : truth) {
        if (!seen.count(id)) {
            unmatched.insert(id);
        }
    }
    if (!unmatched.empty()) {
        throw ValidationError("evaluate_fold: responses and ground truth disagree on ids: " +
                              text::join(std::vector<std::string>(unmatched.begin(), unmatched.end()), ", "));
    }

    FoldEvaluation result;
    result.outcomes.reserve(responses.size());
    for (auto& r : responses) {
        const auto label = truth.at(r.license_id).label;
        result.outcomes.push_back(grade(std::move(r.license_id), std::move(r.model_id), std::move(r.system_id),
                                        std::move(r.user_id), std::move(r.text), label, r.latency_s, ruleset));
    }

    if (embedder != nullptr && !result.outcomes.empty()) {
        const auto n = result.outcomes.size();
        std::vector<std::vector<double>> resp_vecs(n), ref_vecs(n);
        bounded_for(n, concurrency, [&](std::size_t i) {
            const auto& o = result.outcomes[i];
            if (!o.response_text.empty()) {
                resp_vecs[i] = (*embedder)(o.response_text);
                ref_vecs[i] = (*embedder)(truth.at(o.license_id).reference);
            }
        });

        std::size_t dim = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (resp_vecs[i].empty()) {
                continue;
            }
            if (dim == 0) {
                dim = resp_vecs[i].size();
            }
            if (resp_vecs[i].size() != dim || ref_vecs[i].size() != dim) {
                throw ProtocolError("evaluate_fold: embedding dimensions disagree");
            }
        }
        std::vector<double> a, b;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (!resp_vecs[i].empty()) {
                a.insert(a.end(), resp_vecs[i].begin(), resp_vecs[i].end());
                b.insert(b.end(), ref_vecs[i].begin(), ref_vecs[i].end());
                rows.push_back(i);
            }
        }
        std::vector<double> cos(rows.size());
        if (!rows.empty()) {
            stats::kernels::parallel::cosine_rows(a, b, dim, cos);
        }
        for (auto& o : result.outcomes) {
            o.ss = 0.0;
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (std::isnan(cos[r])) {
                throw DegenerateError("semantic similarity undefined for '" + result.outcomes[rows[r]].license_id +
                                      "': zero-norm embedding");
            }
            result.outcomes[rows[r]].ss = std::clamp(cos[r], -1.0, 1.0);
        }
    }

    if (!result.outcomes.empty()) {
        result.summary = summarize(result.outcomes, mode);
    }
    return result;
}

} // namespace licensekit::metrics
