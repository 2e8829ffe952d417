#pragma once

#include <span>
#include <vector>

#include "apet/types.hpp"

namespace apet {

// Norms below this are treated as zero when normalizing for cosine.
inline constexpr double kNormEps = 1e-12;

/// All pairwise squared Euclidean distances between rows of x. The upper
/// triangle is computed directly from row differences (never via the Gram
/// expansion, which can go negative) and mirrored for exact symmetry.
DistanceMatrix pairwise_sq_dist(const TokenMatrix& x);

/// Cosine similarity of q against every row of x. An element is 0 whenever
/// either norm falls below kNormEps, so zero tokens attract nothing.
std::vector<double> cosine_to_rows(const TokenMatrix& x, std::span<const double> q);

/// Ridge-stabilized least squares: returns C minimizing
///   ‖targets − C·basis‖_F² + λ‖C‖_F²,  λ = ridge_rel · trace(G)/m,
/// where G = basis·basisᵀ is the m×m Gram matrix. Solved through the normal
/// equations with a Cholesky factorization of (G + λI); the trace-scaled λ
/// keeps residual rankings invariant under uniform scaling of the input.
/// When the factorization fails the jitter escalates,
/// λ ← max(λ, 1e-10·trace(G)/m)·10, at most five times before SingularGram.
Coefficients lstsq_fit(const TokenMatrix& basis, const TokenMatrix& targets,
                       double ridge_rel);

} // namespace apet
