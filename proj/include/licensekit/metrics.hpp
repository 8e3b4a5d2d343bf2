// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/corpus.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace licensekit::metrics {

enum class Verdict { AllowsCommercial, DeniesCommercial, Unclear, NonSpecific };

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);
/// The verdict that agrees with a ground-truth label.
Verdict verdict_for(corpus::Label label);

enum class PatternSyntax { Substring, Regex };

/// Ordered verdict patterns: deny, then unclear, then allow. First group with
/// a match wins. Matching is casefolded; regex patterns are ECMAScript.
class Ruleset {
public:
    Ruleset(std::vector<std::string> deny, std::vector<std::string> unclear, std::vector<std::string> allow,
            PatternSyntax syntax = PatternSyntax::Substring);

    static Ruleset load(const std::filesystem::path& path);
    static Ruleset from_json_text(std::string_view text);

    /// Matches against text::normalize(response_text); deny wins over unclear,
    /// unclear over allow.
    Verdict extract(std::string_view response_text) const;
    PatternSyntax syntax() const { return syntax_; }
    std::string hash() const;

private:
    struct Group {
        std::vector<std::string> patterns; // casefolded when substring syntax
        std::vector<std::regex> compiled;
    };

    bool matches(const Group& g, const std::string& folded) const;

    Group deny_, unclear_, allow_;
    PatternSyntax syntax_;
};

Verdict extract_verdict(std::string_view response_text, const Ruleset& ruleset);

struct EvalOutcome {
    std::string license_id;
    std::string model_id;
    std::string system_id;
    std::string user_id;
    std::string response_text;
    Verdict extracted = Verdict::NonSpecific;
    corpus::Label ground_truth = corpus::Label::Unclear;
    bool correct = false;
    std::string normalized_response;
    std::optional<double> ss;
    double latency_s = 0.0;
};

/// Builds an outcome from raw parts, filling extracted/correct/normalized.
EvalOutcome grade(std::string license_id, std::string model_id, std::string system_id, std::string user_id,
                  std::string response_text, corpus::Label ground_truth, double latency_s, const Ruleset& ruleset);

nlohmann::ordered_json to_json(const EvalOutcome& o);
EvalOutcome outcome_from_json(const nlohmann::json& j);
std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& path);

struct MetricSummary {
    double pa_pct = 0.0;
    double dr_pct = 0.0;
    double nrr_pct = 0.0;
    std::optional<double> ss_pct;
    std::optional<double> consistency_pct; // share of items with ss > 0.80
    double ars_s = 0.0;
    std::size_t n = 0;
};

enum class DuplicationMode {
    Extras,  // n - distinct normalized responses
    MaxClass // size of the largest repeated group
};

DuplicationMode duplication_mode_from_string(std::string_view s);

double prediction_agreement(std::span<const EvalOutcome> outcomes);
double duplication_rate(std::span<const EvalOutcome> outcomes, DuplicationMode mode = DuplicationMode::Extras);
double nonspecific_rate(std::span<const EvalOutcome> outcomes);
double average_response_speed(std::span<const EvalOutcome> outcomes);

inline constexpr double kConsistencyThreshold = 0.80;

struct SsAggregate {
    double ss_pct = 0.0;          // 100 * mean cosine, clamped below at 0
    double consistency_pct = 0.0; // 100 * share with cosine > 0.80
};

SsAggregate mean_ss(std::span<const EvalOutcome> outcomes);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

using Embedder = std::function<std::vector<double>(std::string_view)>;

double semantic_similarity(std::string_view outcome_text, std::string_view reference_text, const Embedder& embedder);

/// All five metrics. SS is reported only when every outcome carries one.
MetricSummary summarize(std::span<const EvalOutcome> outcomes, DuplicationMode mode = DuplicationMode::Extras);

struct ResponseItem {
    std::string license_id;
    std::string model_id;
    std::string system_id;
    std::string user_id;
    std::string text;
    double latency_s = 0.0;
};

struct GroundTruth {
    corpus::Label label = corpus::Label::Unclear;
    std::string reference; // expert reference answer for SS
};

struct FoldEvaluation {
    std::vector<EvalOutcome> outcomes; // sorted by license_id
    MetricSummary summary;
};

/// Grades one fold of responses against ground truth.
///
/// Responses and truth must cover the same license ids. When an embedder is
/// given, each response is scored against its reference; embedding calls fan
/// out over at most `concurrency` threads. An empty response scores ss = 0.
FoldEvaluation evaluate_fold(std::vector<ResponseItem> responses, const std::map<std::string, GroundTruth>& truth,
                             const Ruleset& ruleset, const Embedder* embedder = nullptr,
                             std::size_t concurrency = 1, DuplicationMode mode = DuplicationMode::Extras);

} // namespace licensekit::metrics
