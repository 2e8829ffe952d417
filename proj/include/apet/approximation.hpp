#pragma once

#include <optional>
#include <vector>

#include "apet/types.hpp"

namespace apet {

/// Outcome of reconstructing every token from the basis.
struct ApproximationResult {
    Coefficients coefficients;      // n×m
    std::vector<double> residuals;  // residuals[i] = ‖v_i − v′_i‖₂
    BasisSelection basis;
    double ridge_rel = 0.0;
    // Populated only when requested; residuals alone cover the pipeline.
    std::optional<RowMatrix> reconstruction;
};

/// Gathers the basis rows, fits all n tokens (basis tokens included) via
/// lstsq_fit, and records per-token residual norms. Reconstructed rows are
/// only kept when keep_reconstruction is set; residuals are always kept.
ApproximationResult fit_basis(const TokenMatrix& x, const BasisSelection& basis,
                              double ridge_rel, bool keep_reconstruction = false);

/// Token indices sorted by descending residual, ties toward the smaller
/// original index. Basis membership is not consulted here; forced retention
/// happens during selection.
std::vector<Index> rank_by_error(const ApproximationResult& result);

} // namespace apet
