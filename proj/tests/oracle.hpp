#pragma once

// Brute-force reference implementations used to cross-check the library.
// Deliberately independent of the implementation under test: plain loops
// over std::vector, Gram-Schmidt projection instead of normal equations,
// exhaustive scans instead of incremental updates. Small-n only.

#include <cstddef>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b);
std::vector<std::vector<double>> pairwise_sq_dist(const Rows& rows);

/// Exact (λ=0) least-squares residual norm of every target against the span
/// of the basis rows, via modified Gram-Schmidt projection.
std::vector<double> lstsq_residuals(const Rows& basis, const Rows& targets);

/// Numerical rank of the row set (Gram-Schmidt with a relative tolerance).
std::size_t rank(const Rows& rows, double tol = 1e-10);

/// Greedy max-min farthest point sampling; first pick farthest from the
/// centroid, ties toward the smaller index.
std::vector<std::size_t> fps(const Rows& rows, std::size_t m);

/// The max-min value attained at each FPS step (step 0: distance to centroid).
std::vector<double> fps_step_values(const Rows& rows, std::size_t m);

struct DpcScores {
    std::vector<double> rho, delta, gamma;
    double dc = 0.0;
};
DpcScores dpc_scores(const Rows& rows, double dc_percentile);
std::vector<std::size_t> dpc(const Rows& rows, std::size_t m, double dc_percentile);

std::vector<std::size_t> rank_by_error(const std::vector<double>& residuals);

/// Basis indices plus the best-ranked non-basis tokens, ascending.
std::vector<std::size_t> retained_set(const std::vector<double>& residuals,
                                      const std::vector<std::size_t>& basis,
                                      std::size_t keep);

/// Exhaustive cosine argmax assignment of dropped tokens to retained ones.
std::vector<std::vector<std::size_t>> merge_groups(const Rows& rows,
                                                   const std::vector<std::size_t>& retained);

struct Plan {
    std::vector<std::size_t> basis;
    std::vector<double> residuals;
    std::vector<std::size_t> retained;
    std::vector<std::vector<std::size_t>> groups;
};

/// Full pipeline: FPS basis of size m, exact least-squares residuals,
/// retention, merge assignment.
Plan plan(const Rows& rows, std::size_t m, std::size_t keep);

} // namespace oracle
