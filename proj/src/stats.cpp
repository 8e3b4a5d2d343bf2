// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/stats.hpp"

#include "licensekit/error.hpp"
#include "licensekit/stats_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>

namespace licensekit::stats {

std::string_view to_string(Direction d) { return d == Direction::HigherBetter ? "higher" : "lower"; }

Direction direction_from_string(std::string_view s) {
    if (s == "higher") return Direction::HigherBetter;
    if (s == "lower") return Direction::LowerBetter;
    throw ParseError("direction must be 'higher' or 'lower' (got '" + std::string(s) + "')");
}

int RankTable::rank_of(const std::string& group_id) const {
    for (const auto& e : entries) {
        if (e.group_id == group_id) {
            return e.rank;
        }
    }
    throw NotFoundError("group '" + group_id + "' is not in the rank table");
}

int RankTable::max_rank() const {
    int r = 0;
    for (const auto& e : entries) {
        r = std::max(r, e.rank);
    }
    return r;
}

double mean(std::span<const double> v) {
    if (v.empty()) {
        throw ValidationError("mean of an empty sample");
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) {
        throw ValidationError("sample variance needs at least two values");
    }
    const double m = mean(v);
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(v.size() - 1);
}

namespace {

struct Moments {
    double n = 0;
    double mean = 0;
    double ss = 0; // sum of squared deviations from the mean
};

Moments moments(std::span<const double> v) {
    Moments m;
    m.n = static_cast<double>(v.size());
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / m.n;
    for (const double x : v) {
        m.ss += (x - m.mean) * (x - m.mean);
    }
    return m;
}

// Cohen's d from moments; zero pooled spread gives +-inf (or 0 if means match).
double effect_size(const Moments& a, const Moments& b) {
    const double pooled_var = (a.ss + b.ss) / (a.n + b.n - 2.0);
    const double diff = a.mean - b.mean;
    if (pooled_var <= 0.0) {
        if (diff == 0.0) {
            return 0.0;
        }
        return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return diff / std::sqrt(pooled_var);
}

void check_finite(const SampleGroup& g) {
    for (const double v : g.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("group '" + g.group_id + "' contains a non-finite value");
        }
    }
}

} // namespace

double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw ValidationError("cohens_d needs at least two values per sample");
    }
    const auto ma = moments(a);
    const auto mb = moments(b);
    const double pooled_var = (ma.ss + mb.ss) / (ma.n + mb.n - 2.0);
    if (!(pooled_var > 0.0)) {
        throw DegenerateError("cohens_d: pooled variance is zero");
    }
    return (ma.mean - mb.mean) / std::sqrt(pooled_var);
}

RankTable sk_esd_rank(std::vector<SampleGroup> groups, Direction direction, double d_threshold,
                      std::string metric_name) {
    if (groups.empty()) {
        throw ValidationError("sk_esd_rank needs at least one group");
    }
    if (!(d_threshold >= 0.0)) {
        throw ValidationError("d_threshold must be non-negative");
    }
    std::set<std::string> ids;
    for (const auto& g : groups) {
        if (g.values.size() < 2) {
            throw ValidationError("group '" + g.group_id + "' has fewer than two values");
        }
        check_finite(g);
        if (!ids.insert(g.group_id).second) {
            throw ValidationError("duplicate group id '" + g.group_id + "'");
        }
    }

    std::vector<double> means(groups.size());
    std::vector<std::size_t> order(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        means[i] = mean(groups[i].values);
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (means[a] != means[b]) {
            return direction == Direction::HigherBetter ? means[a] > means[b] : means[a] < means[b];
        }
        return groups[a].group_id < groups[b].group_id;
    });

    // Prefix sums over the ordered groups' values: count, sum.
    const std::size_t g = order.size();
    std::vector<double> cnt(g + 1, 0.0), sum(g + 1, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
        const auto& vals = groups[order[i]].values;
        cnt[i + 1] = cnt[i] + static_cast<double>(vals.size());
        sum[i + 1] = sum[i] + std::accumulate(vals.begin(), vals.end(), 0.0);
    }
    auto pooled = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> v;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& vals = groups[order[i]].values;
            v.insert(v.end(), vals.begin(), vals.end());
        }
        return v;
    };

    // Segment [lo, hi) boundaries that survive; a rank ends after each.
    std::vector<bool> cut_after(g, false);
    auto recurse = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi - lo < 2) {
            return;
        }
        const double n = cnt[hi] - cnt[lo];
        const double m = (sum[hi] - sum[lo]) / n;
        std::size_t best = 0;
        double best_b = -1.0;
        for (std::size_t s = lo + 1; s < hi; ++s) {
            const double nl = cnt[s] - cnt[lo];
            const double nr = cnt[hi] - cnt[s];
            const double ml = (sum[s] - sum[lo]) / nl;
            const double mr = (sum[hi] - sum[s]) / nr;
            const double b = nl * (ml - m) * (ml - m) + nr * (mr - m) * (mr - m);
            if (b > best_b * (1.0 + 1e-12) + 1e-300) {
                best_b = b;
                best = s;
            }
        }
        const auto left = pooled(lo, best);
        const auto right = pooled(best, hi);
        const double d = effect_size(moments(left), moments(right));
        if (std::abs(d) < d_threshold) {
            return;
        }
        cut_after[best - 1] = true;
        self(self, lo, best);
        self(self, best, hi);
    };
    recurse(recurse, 0, g);

    RankTable table;
    table.metric_name = std::move(metric_name);
    table.direction = direction;
    int rank = 1;
    for (std::size_t i = 0; i < g; ++i) {
        table.entries.push_back({groups[order[i]].group_id, rank, means[order[i]]});
        if (cut_after[i]) {
            ++rank;
        }
    }
    return table;
}

WilcoxonMode wilcoxon_mode_from_string(std::string_view s) {
    if (s == "auto") return WilcoxonMode::Auto;
    if (s == "exact") return WilcoxonMode::Exact;
    if (s == "approx" || s == "approximate") return WilcoxonMode::Approx;
    throw ParseError("wilcoxon mode must be auto, exact or approx (got '" + std::string(s) + "')");
}

std::string_view to_string(WilcoxonMode m) {
    switch (m) {
    case WilcoxonMode::Auto:
        return "auto";
    case WilcoxonMode::Exact:
        return "exact";
    case WilcoxonMode::Approx:
        return "approx";
    }
    return "auto";
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, WilcoxonMode mode) {
    if (x.size() != y.size() || x.empty()) {
        throw ValidationError("wilcoxon_signed_rank needs equal-length non-empty paired samples");
    }
    WilcoxonResult r;
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (!std::isfinite(d)) {
            throw ValidationError("wilcoxon_signed_rank: non-finite difference at index " + std::to_string(i));
        }
        if (d == 0.0) {
            ++r.n_zero_dropped;
        } else {
            diffs.push_back(d);
        }
    }
    if (diffs.empty()) {
        throw DegenerateError("wilcoxon_signed_rank: all paired differences are zero");
    }
    const std::size_t n = diffs.size();
    r.n_used = n;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

    // Doubled average ranks keep ties integral: positions i..j (1-based) -> i + j.
    std::vector<std::int64_t> ranks2(n);
    double tie_term = 0.0; // sum of t^3 - t over tie groups
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(diffs[idx[j + 1]]) == std::abs(diffs[idx[i]])) {
            ++j;
        }
        const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            ranks2[idx[k]] = r2;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }

    std::int64_t wp2 = 0, wm2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        (diffs[i] > 0 ? wp2 : wm2) += ranks2[i];
    }
    r.w_plus = static_cast<double>(wp2) / 2.0;
    r.w_minus = static_cast<double>(wm2) / 2.0;
    r.w = std::min(r.w_plus, r.w_minus);

    if (mode == WilcoxonMode::Auto) {
        mode = n <= kAutoExactMaxN ? WilcoxonMode::Exact : WilcoxonMode::Approx;
    }
    r.mode_used = mode;

    if (mode == WilcoxonMode::Exact) {
        const auto count = kernels::parallel::signed_rank_tail_count(ranks2, std::min(wp2, wm2));
        r.p_value = std::ldexp(static_cast<double>(count), -static_cast<int>(n));
    } else {
        const double nn = static_cast<double>(n);
        const double mu = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double num = std::max(0.0, std::abs(r.w - mu) - 0.5);
        const double z = var > 0.0 ? num / std::sqrt(var) : 0.0;
        r.p_value = std::erfc(z / std::sqrt(2.0));
    }
    r.p_value = std::clamp(r.p_value, std::numeric_limits<double>::min(), 1.0);
    return r;
}

std::string_view to_string(Magnitude m) {
    switch (m) {
    case Magnitude::Small:
        return "small";
    case Magnitude::Medium:
        return "medium";
    case Magnitude::Large:
        return "large";
    }
    return "small";
}

Magnitude cliffs_magnitude(double delta) {
    const double a = std::abs(delta);
    if (a <= 0.33) return Magnitude::Small;
    if (a <= 0.66) return Magnitude::Medium;
    return Magnitude::Large;
}

CliffsDelta cliffs_delta(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) {
        throw ValidationError("cliffs_delta needs two non-empty samples");
    }
    const auto c = kernels::parallel::dominance(x, y);
    const double pairs = static_cast<double>(x.size()) * static_cast<double>(y.size());
    CliffsDelta out;
    out.delta = (static_cast<double>(c.greater) - static_cast<double>(c.less)) / pairs;
    out.magnitude = cliffs_magnitude(out.delta);
    out.zero = c.greater == c.less;
    return out;
}

std::vector<BonferroniEntry> bonferroni(std::span<const double> p_values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must be in (0, 1)");
    }
    if (p_values.empty()) {
        throw ValidationError("bonferroni needs at least one p-value");
    }
    const double adjusted = alpha / static_cast<double>(p_values.size());
    std::vector<BonferroniEntry> out;
    out.reserve(p_values.size());
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("p-value outside [0, 1]");
        }
        out.push_back({p, adjusted, p < adjusted});
    }
    return out;
}

} // namespace licensekit::stats
