// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace licensekit::stats {

enum class Direction { HigherBetter, LowerBetter };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

struct SampleGroup {
    std::string group_id;
    std::vector<double> values; // one value per fold
};

struct RankEntry {
    std::string group_id;
    int rank = 0;
    double mean = 0.0;
};

/// Entries are in best-first mean order; ranks run 1..R without gaps.
struct RankTable {
    std::string metric_name;
    Direction direction = Direction::HigherBetter;
    std::vector<RankEntry> entries;

    int rank_of(const std::string& group_id) const;
    int max_rank() const;
};

double mean(std::span<const double> v);
/// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> v);

/// (mean(a) - mean(b)) / pooled sample sd. Needs |a|, |b| >= 2 and a positive
/// pooled variance; zero spread throws DegenerateError.
double cohens_d(std::span<const double> a, std::span<const double> b);

inline constexpr double kDefaultDThreshold = 0.2;

/// Scott-Knott ranking with an effect-size acceptance rule.
///
/// Groups are sorted by mean (best first, ties by group_id). The sequence is
/// split recursively at the boundary maximizing the between-group sum of
/// squares over the pooled fold values; a split stands only if
/// |cohens_d(left, right)| >= d_threshold, otherwise the segment shares a rank.
/// Zero pooled spread counts as infinite effect when the means differ.
RankTable sk_esd_rank(std::vector<SampleGroup> groups, Direction direction, double d_threshold = kDefaultDThreshold,
                      std::string metric_name = {});

enum class WilcoxonMode {
    Auto,  // exact when n <= 12, normal approximation above
    Exact, // 2^n sign enumeration
    Approx // tie-corrected normal approximation with 0.5 continuity correction
};

WilcoxonMode wilcoxon_mode_from_string(std::string_view s);
std::string_view to_string(WilcoxonMode m);

struct WilcoxonResult {
    double w = 0.0; // min(W+, W-)
    double w_plus = 0.0;
    double w_minus = 0.0;
    double p_value = 1.0; // two-sided
    std::size_t n_used = 0;
    std::size_t n_zero_dropped = 0;
    WilcoxonMode mode_used = WilcoxonMode::Exact;
};

inline constexpr std::size_t kAutoExactMaxN = 12;

/// Paired signed-rank test. Zero differences are dropped and counted; ties in
/// |d| get average ranks. All-zero differences throw DegenerateError.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    WilcoxonMode mode = WilcoxonMode::Auto);

enum class Magnitude { Small, Medium, Large };

std::string_view to_string(Magnitude m);

/// |d| <= 0.33 small, <= 0.66 medium, above that large. Zero reads as small.
Magnitude cliffs_magnitude(double delta);

struct CliffsDelta {
    double delta = 0.0;
    Magnitude magnitude = Magnitude::Small;
    bool zero = false;
};

CliffsDelta cliffs_delta(std::span<const double> x, std::span<const double> y);

struct BonferroniEntry {
    double p_value = 1.0;
    double alpha_adjusted = 0.0;
    bool significant = false;
};

std::vector<BonferroniEntry> bonferroni(std::span<const double> p_values, double alpha);

struct ComparisonResult {
    std::string metric;
    std::pair<std::string, std::string> pair; // (a, b)
    double statistic_w = 0.0;
    double p_value = 1.0;
    double alpha_adjusted = 0.0;
    bool significant = false;
    double cliffs_delta = 0.0; // positive when b tends to exceed a
    Magnitude magnitude = Magnitude::Small;
    bool degenerate = false;   // all paired differences were zero
    std::size_t n_zero_dropped = 0;
};

} // namespace licensekit::stats
