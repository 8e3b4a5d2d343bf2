// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <cstdint>
#include <span>

// Hot loops of the statistics code, each in two builds: `serial` is the plain
// reference kept for testing, `parallel` is the OpenMP version the library
// calls. Both return bit-identical results (integer reductions, or per-item
// outputs with no cross-item accumulation).

namespace licensekit::stats::kernels {

struct DominanceCounts {
    std::uint64_t greater = 0; // #{(i,j): x_i > y_j}
    std::uint64_t less = 0;    // #{(i,j): x_i < y_j}
};

/// Largest n accepted by signed_rank_tail_count (2^n sign assignments).
inline constexpr std::size_t kMaxExactSignedRankN = 26;

namespace serial {

DominanceCounts dominance(std::span<const double> x, std::span<const double> y);

/// Counts sign assignments whose min(W+, W-) is <= observed_w2.
/// Ranks and the observed statistic are doubled so tied (x.5) ranks stay integral.
std::uint64_t signed_rank_tail_count(std::span<const std::int64_t> ranks2, std::int64_t observed_w2);

/// out[i] = cosine(a_i, b_i) for row-major `count x dim` matrices. A zero-norm
/// row yields NaN.
void cosine_rows(std::span<const double> a, std::span<const double> b, std::size_t dim, std::span<double> out);

} // namespace serial

namespace parallel {

DominanceCounts dominance(std::span<const double> x, std::span<const double> y);
std::uint64_t signed_rank_tail_count(std::span<const std::int64_t> ranks2, std::int64_t observed_w2);
void cosine_rows(std::span<const double> a, std::span<const double> b, std::size_t dim, std::span<double> out);

} // namespace parallel

} // namespace licensekit::stats::kernels
