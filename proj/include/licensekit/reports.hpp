// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include "licensekit/metrics.hpp"
#include "licensekit/stats.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace licensekit::reports {

enum class Metric { PA, DR, NRR, SS, Consistency, ARS };

std::string_view to_string(Metric m);
/// Accepts pa, dr, nrr, ss, consistency, ars (any case).
Metric metric_from_string(std::string_view s);
/// PA, SS and consistency are higher-better; DR, NRR and ARS lower-better.
stats::Direction default_direction(Metric m);
/// Display name used in report tables ("PA", "SS", ...).
std::string_view display_name(Metric m);

struct SummaryRow {
    std::string run_hash;
    std::string model_id;
    std::size_t fold = 0;
    metrics::MetricSummary summary;
};

/// Value of `m` in a summary; nullopt when SS or consistency is absent.
std::optional<double> metric_value(const metrics::MetricSummary& s, Metric m);

inline constexpr std::string_view kSummaryHeader =
    "run_hash,model_id,fold,n,pa_pct,dr_pct,nrr_pct,ss_pct,consistency_pct,ars_s";

/// Header plus one row per entry, numbers at four decimals, absent SS empty.
std::string render_summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(std::string_view data, std::string_view source = "<memory>");

/// A persisted run as read back for reporting.
struct LoadedRun {
    std::filesystem::path dir;
    std::string run_id;
    std::string run_hash;
    std::string corpus_hash;
    std::string folds_hash;
    std::vector<SummaryRow> rows;

    std::vector<std::string> model_ids() const; // first-appearance order
    /// Fold-indexed values of one model, sorted by fold.
    std::vector<std::pair<std::size_t, double>> fold_values(const std::string& model_id, Metric m) const;
};

/// Reads summary.csv and, when present, MANIFEST.lock from a run directory.
/// A path to a summary csv file is also accepted (hashes are then empty).
LoadedRun load_run(const std::filesystem::path& path);

/// SK-ESD over the per-fold values of every model in `runs`. Runs must agree
/// on corpus and folds hashes, and a model id may appear in only one run.
stats::RankTable rank_report(const std::vector<LoadedRun>& runs, Metric metric,
                             std::optional<stats::Direction> direction = std::nullopt,
                             double d_threshold = stats::kDefaultDThreshold);

/// Rank and Value columns, rows ordered by rank then model id.
std::string render_rank_markdown(const stats::RankTable& table);
std::string render_rank_csv(const stats::RankTable& table);

struct CompareOptions {
    double alpha = 0.05;
    std::vector<Metric> metrics; // empty: PA, SS (if present), DR, NRR, ARS
    std::optional<std::size_t> family_size; // default |metrics| x |pairs|
    stats::WilcoxonMode mode = stats::WilcoxonMode::Auto;
};

/// Pairs every model of run_a with every model of run_b by fold index and
/// tests each metric. Cliff's delta is computed as delta(b, a), so a positive
/// value means b tends to score higher.
std::vector<stats::ComparisonResult> compare_report(const LoadedRun& run_a, const LoadedRun& run_b,
                                                    const CompareOptions& options = {});

std::string render_compare_markdown(const std::vector<stats::ComparisonResult>& results);
std::string render_compare_csv(const std::vector<stats::ComparisonResult>& results);

} // namespace licensekit::reports
