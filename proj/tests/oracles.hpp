// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

// Brute-force reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's statistics or metrics code.

#pragma once

#include "licensekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Average ranks of |d| (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double below = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++below;
            if (v[j] == v[i]) ++equal;
        }
        r[i] = below + (equal + 1) / 2.0;
    }
    return r;
}

struct Wilcoxon {
    double w_plus = 0, w_minus = 0, w = 0, p = 1;
    std::size_t n = 0;
};

// Two-sided exact p: share of the 2^n sign flips whose min(W+, W-) is at most
// the observed one. Recursive walk over sign choices.
inline Wilcoxon wilcoxon_exact(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> d, mag;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double di = x[i] - y[i];
        if (di != 0) {
            d.push_back(di);
            mag.push_back(std::abs(di));
        }
    }
    Wilcoxon out;
    out.n = d.size();
    const auto ranks = average_ranks(mag);
    double total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        (d[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];
        total += ranks[i];
    }
    out.w = std::min(out.w_plus, out.w_minus);
    std::uint64_t hits = 0;
    auto walk = [&](auto&& self, std::size_t i, double plus) -> void {
        if (i == ranks.size()) {
            hits += std::min(plus, total - plus) <= out.w + 1e-9;
            return;
        }
        self(self, i + 1, plus + ranks[i]);
        self(self, i + 1, plus);
    };
    walk(walk, 0, 0.0);
    out.p = static_cast<double>(hits) / std::pow(2.0, static_cast<double>(d.size()));
    return out;
}

inline double cliffs_delta(const std::vector<double>& x, const std::vector<double>& y) {
    long long gt = 0, lt = 0;
    for (double a : x) {
        for (double b : y) {
            gt += a > b;
            lt += a < b;
        }
    }
    return static_cast<double>(gt - lt) / static_cast<double>(x.size() * y.size());
}

// Cohen's d written straight from its textbook definition.
inline double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    auto avg = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto var = [&](const std::vector<double>& v) {
        const double m = avg(v);
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sp = std::sqrt(((na - 1) * var(a) + (nb - 1) * var(b)) / (na + nb - 2));
    return (avg(a) - avg(b)) / sp;
}

struct Group {
    std::string id;
    std::vector<double> values;
};

// Scott-Knott with the negligible-effect stop rule, recomputed from raw values
// at every level: try every contiguous cut of the ordered range, keep the one
// with the largest between-group sum of squares (earliest on ties), accept it
// when |d| of the pooled sides reaches the threshold. Returns id -> rank.
inline std::map<std::string, int> sk_esd(std::vector<Group> groups, bool higher_better, double threshold) {
    auto avg = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    std::stable_sort(groups.begin(), groups.end(), [&](const Group& a, const Group& b) {
        const double ma = avg(a.values), mb = avg(b.values);
        if (ma != mb) return higher_better ? ma > mb : ma < mb;
        return a.id < b.id;
    });
    auto pool = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> v;
        for (std::size_t i = lo; i < hi; ++i) v.insert(v.end(), groups[i].values.begin(), groups[i].values.end());
        return v;
    };
    std::set<std::size_t> cuts; // rank boundary after index
    auto split = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi - lo < 2) return;
        const auto all = pool(lo, hi);
        const double m = avg(all);
        std::size_t best = 0;
        double best_b = -1;
        for (std::size_t s = lo + 1; s < hi; ++s) {
            const auto l = pool(lo, s), r = pool(s, hi);
            const double b = static_cast<double>(l.size()) * std::pow(avg(l) - m, 2) +
                             static_cast<double>(r.size()) * std::pow(avg(r) - m, 2);
            if (b > best_b * (1 + 1e-9)) {
                best_b = b;
                best = s;
            }
        }
        const auto l = pool(lo, best), r = pool(best, hi);
        double ss = 0;
        const double ml = avg(l), mr = avg(r);
        for (double x : l) ss += (x - ml) * (x - ml);
        for (double x : r) ss += (x - mr) * (x - mr);
        const double sp = std::sqrt(ss / static_cast<double>(l.size() + r.size() - 2));
        const bool separate = sp == 0 ? ml != mr : std::abs(ml - mr) / sp >= threshold;
        if (!separate) return;
        cuts.insert(best - 1);
        self(self, lo, best);
        self(self, best, hi);
    };
    split(split, 0, groups.size());
    std::map<std::string, int> out;
    int rank = 1;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        out[groups[i].id] = rank;
        if (cuts.count(i)) ++rank;
    }
    return out;
}

struct Metrics {
    long correct = 0, nonspecific = 0, duplicate_extras = 0;
    std::size_t n = 0;
    double pa = 0, dr = 0, nrr = 0, ars = 0;
    double ss = 0, consistency = 0;
};

// Counts by direct loops over the outcomes; correctness is re-derived from the
// extracted verdict and the label, not read from `correct`. A response is a duplicate extra
// when an earlier outcome has the same normalized text.
inline Metrics metrics(const std::vector<licensekit::metrics::EvalOutcome>& outcomes) {
    using licensekit::metrics::Verdict;
    Metrics m;
    m.n = outcomes.size();
    double latency = 0, ss = 0;
    long consistent = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        using licensekit::corpus::Label;
        m.correct += (o.ground_truth == Label::AllowsCommercial && o.extracted == Verdict::AllowsCommercial) ||
                     (o.ground_truth == Label::DeniesCommercial && o.extracted == Verdict::DeniesCommercial) ||
                     (o.ground_truth == Label::Unclear && o.extracted == Verdict::Unclear);
        m.nonspecific += o.extracted == Verdict::NonSpecific;
        for (std::size_t j = 0; j < i; ++j) {
            if (outcomes[j].normalized_response == o.normalized_response) {
                ++m.duplicate_extras;
                break;
            }
        }
        latency += o.latency_s;
        const double s = o.ss.value_or(0.0);
        ss += s;
        consistent += s > 0.80;
    }
    const double n = static_cast<double>(m.n);
    m.pa = 100.0 * static_cast<double>(m.correct) / n;
    m.dr = 100.0 * static_cast<double>(m.duplicate_extras) / n;
    m.nrr = 100.0 * static_cast<double>(m.nonspecific) / n;
    m.ars = latency / n;
    m.ss = std::max(0.0, 100.0 * ss / n);
    m.consistency = 100.0 * static_cast<double>(consistent) / n;
    return m;
}

} // namespace oracle
