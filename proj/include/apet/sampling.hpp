#pragma once

#include <cstdint>

#include "apet/types.hpp"

namespace apet {

inline constexpr double kDefaultDcPercentile = 2.0;

/// Farthest point sampling: greedy max-min over squared distances.
/// The first index is the token farthest from the centroid (mean row);
/// each following index maximizes the minimum squared distance to the
/// selected set. All ties break toward the smaller index. Deterministic,
/// no seed, and nested: a budget-m selection is a prefix of any larger one.
/// Runs on incremental min-distance updates, O(n·m·d), no full distance
/// matrix.
BasisSelection sample_fps(const TokenMatrix& x, Index m);

/// Density-peaks selection. Works entirely in squared distances: the cutoff
/// d_c is the dc_percentile-th percentile (linear interpolation between
/// closest ranks) of the off-diagonal squared distances, density is the
/// Gaussian kernel ρ_i = Σ_{j≠i} exp(−dist²(i,j)/d_c), δ_i is the smallest
/// squared distance to a strictly denser point (the densest points take the
/// maximum distance instead), and the m largest γ = ρ·δ win, ties toward
/// the smaller index, output ordered by descending γ. Materializes the full
/// n×n distance matrix. If every pairwise distance is zero the selection
/// degenerates to the first m indices with the degenerate flag set.
BasisSelection sample_dpc(const TokenMatrix& x, Index m,
                          double dc_percentile = kDefaultDcPercentile);

/// m distinct indices without replacement from a seeded portable generator
/// (std::mt19937_64 through apet::rng), sorted ascending. Identical output
/// for identical (n, m, seed) on every platform.
BasisSelection sample_random(const TokenMatrix& x, Index m, std::uint64_t seed);

} // namespace apet
