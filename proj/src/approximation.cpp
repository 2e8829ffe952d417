#include "apet/approximation.hpp"

#include <algorithm>
#include <numeric>

#include "apet/linalg.hpp"

namespace apet {

namespace {

void check_basis(const TokenMatrix& x, const BasisSelection& basis) {
    if (basis.indices.empty())
        throw InvalidBudget("basis selection is empty");
    std::vector<char> seen(x.n(), 0);
    for (Index idx : basis.indices) {
        if (idx >= x.n())
            throw DimensionMismatch("basis index " + std::to_string(idx) +
                                    " out of range for n=" + std::to_string(x.n()));
        if (seen[idx])
            throw UsageError("basis index " + std::to_string(idx) + " repeated");
        seen[idx] = 1;
    }
}

RowMatrix gather_rows(const TokenMatrix& x, const std::vector<Index>& indices) {
    RowMatrix out(static_cast<Eigen::Index>(indices.size()),
                  static_cast<Eigen::Index>(x.d()));
    for (Index i = 0; i < indices.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = x.row(indices[i]);
    return out;
}

} // namespace

ApproximationResult fit_basis(const TokenMatrix& x, const BasisSelection& basis,
                              double ridge_rel, bool keep_reconstruction) {
    check_basis(x, basis);

    const TokenMatrix basis_rows(gather_rows(x, basis.indices));
    ApproximationResult result;
    result.coefficients = lstsq_fit(basis_rows, x, ridge_rel);
    result.basis = basis;
    result.ridge_rel = ridge_rel;
    result.residuals.resize(x.n());

    const auto n = static_cast<Eigen::Index>(x.n());
    if (keep_reconstruction) {
        result.reconstruction = result.coefficients.values * basis_rows.values();
        result.residuals.resize(x.n());
        for (Eigen::Index i = 0; i < n; ++i)
            result.residuals[static_cast<Index>(i)] =
                (x.values().row(i) - result.reconstruction->row(i)).norm();
        return result;
    }

    // Blockwise so the full n×d reconstruction never materializes.
    constexpr Eigen::Index kBlock = 512;
    for (Eigen::Index i0 = 0; i0 < n; i0 += kBlock) {
        const Eigen::Index rows = std::min(kBlock, n - i0);
        const RowMatrix rec =
            result.coefficients.values.middleRows(i0, rows) * basis_rows.values();
        for (Eigen::Index r = 0; r < rows; ++r)
            result.residuals[static_cast<Index>(i0 + r)] =
                (x.values().row(i0 + r) - rec.row(r)).norm();
    }
    return result;
}

std::vector<Index> rank_by_error(const ApproximationResult& result) {
    std::vector<Index> order(result.residuals.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (result.residuals[a] != result.residuals[b])
            return result.residuals[a] > result.residuals[b];
        return a < b;
    });
    return order;
}

} // namespace apet
