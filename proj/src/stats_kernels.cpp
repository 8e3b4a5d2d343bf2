// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#include "licensekit/stats_kernels.hpp"

#include "licensekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace licensekit::stats::kernels {

namespace {

void check_signed_rank_n(std::size_t n) {
    if (n == 0 || n > kMaxExactSignedRankN) {
        throw ValidationError("exact signed-rank enumeration supports 1 <= n <= " +
                              std::to_string(kMaxExactSignedRankN) + " (got " + std::to_string(n) + ")");
    }
}

void check_cosine_shapes(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::span<double> out) {
    if (dim == 0 || a.size() != b.size() || a.size() != dim * out.size()) {
        throw ValidationError("cosine_rows: inconsistent matrix shapes");
    }
}

inline double cosine_row(const double* a, const double* b, std::size_t dim) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < dim; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0.0 || nb == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::int64_t plus_sum(std::uint64_t mask, const std::int64_t* ranks2) {
    std::int64_t s = 0;
    while (mask) {
        const int bit = __builtin_ctzll(mask);
        s += ranks2[bit];
        mask &= mask - 1;
    }
    return s;
}

} // namespace

namespace serial {

DominanceCounts dominance(std::span<const double> x, std::span<const double> y) {
    DominanceCounts c;
    for (const double xi : x) {
        for (const double yj : y) {
            c.greater += xi > yj;
            c.less += xi < yj;
        }
    }
    return c;
}

std::uint64_t signed_rank_tail_count(std::span<const std::int64_t> ranks2, std::int64_t observed_w2) {
    check_signed_rank_n(ranks2.size());
    const std::int64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
    const std::uint64_t masks = std::uint64_t{1} << ranks2.size();
    std::uint64_t count = 0;
    for (std::uint64_t m = 0; m < masks; ++m) {
        const auto wp = plus_sum(m, ranks2.data());
        count += std::min(wp, total - wp) <= observed_w2;
    }
    return count;
}

void cosine_rows(std::span<const double> a, std::span<const double> b, std::size_t dim, std::span<double> out) {
    check_cosine_shapes(a, b, dim, out);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = cosine_row(a.data() + i * dim, b.data() + i * dim, dim);
    }
}

} // namespace serial

namespace parallel {

DominanceCounts dominance(std::span<const double> x, std::span<const double> y) {
    std::uint64_t greater = 0, less = 0;
    const auto nx = static_cast<std::int64_t>(x.size());
    const double* xd = x.data();
    const double* yd = y.data();
    const std::size_t ny = y.size();
#pragma omp parallel for reduction(+ : greater, less) schedule(static) if (x.size() * ny > 16384)
    for (std::int64_t i = 0; i < nx; ++i) {
        const double xi = xd[i];
        for (std::size_t j = 0; j < ny; ++j) {
            greater += xi > yd[j];
            less += xi < yd[j];
        }
    }
    return {greater, less};
}

std::uint64_t signed_rank_tail_count(std::span<const std::int64_t> ranks2, std::int64_t observed_w2) {
    check_signed_rank_n(ranks2.size());
    const std::int64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
    const auto masks = static_cast<std::int64_t>(std::uint64_t{1} << ranks2.size());
    const std::int64_t* r = ranks2.data();
    std::uint64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static) if (masks > 4096)
    for (std::int64_t m = 0; m < masks; ++m) {
        const auto wp = plus_sum(static_cast<std::uint64_t>(m), r);
        count += std::min(wp, total - wp) <= observed_w2;
    }
    return count;
}

void cosine_rows(std::span<const double> a, std::span<const double> b, std::size_t dim, std::span<double> out) {
    check_cosine_shapes(a, b, dim, out);
    const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() * dim > 65536)
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            cosine_row(a.data() + static_cast<std::size_t>(i) * dim, b.data() + static_cast<std::size_t>(i) * dim, dim);
    }
}

} // namespace parallel

} // namespace licensekit::stats::kernels
