#include "apet/linalg.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace apet {

TokenMatrix::TokenMatrix(RowMatrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw EmptyMatrix("token matrix must have at least one row and one column");
    if (!values_.allFinite())
        throw NonFiniteValue("token matrix contains NaN or Inf");
}

const char* to_string(Sampler s) {
    switch (s) {
        case Sampler::fps: return "fps";
        case Sampler::dpc: return "dpc";
        case Sampler::random: return "random";
    }
    return "fps";
}

Sampler sampler_from_string(const std::string& s) {
    if (s == "fps") return Sampler::fps;
    if (s == "dpc") return Sampler::dpc;
    if (s == "random") return Sampler::random;
    throw UsageError("unknown sampler '" + s + "' (expected fps|dpc|random)");
}

const char* to_string(MergeMode m) {
    return m == MergeMode::mean ? "mean" : "drop";
}

MergeMode merge_mode_from_string(const std::string& s) {
    if (s == "mean") return MergeMode::mean;
    if (s == "drop") return MergeMode::drop;
    throw UsageError("unknown merge mode '" + s + "' (expected mean|drop)");
}

DistanceMatrix pairwise_sq_dist(const TokenMatrix& x) {
    const auto n = static_cast<Eigen::Index>(x.n());
    Eigen::MatrixXd sq(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sq(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (x.values().row(i) - x.values().row(j)).squaredNorm();
            sq(i, j) = d2;
            sq(j, i) = d2;
        }
    }
    return DistanceMatrix{std::move(sq)};
}

std::vector<double> cosine_to_rows(const TokenMatrix& x, std::span<const double> q) {
    if (q.size() != x.d())
        throw DimensionMismatch("query vector has dimension " + std::to_string(q.size()) +
                                ", expected " + std::to_string(x.d()));
    const Eigen::Map<const Eigen::RowVectorXd> qv(q.data(),
                                                  static_cast<Eigen::Index>(q.size()));
    const double qn = qv.norm();
    std::vector<double> out(x.n(), 0.0);
    if (qn < kNormEps) return out;
    for (Index i = 0; i < x.n(); ++i) {
        const double rn = x.row(i).norm();
        if (rn < kNormEps) continue;
        out[i] = x.row(i).dot(qv) / (rn * qn);
    }
    return out;
}

Coefficients lstsq_fit(const TokenMatrix& basis, const TokenMatrix& targets,
                       double ridge_rel) {
    if (basis.d() != targets.d())
        throw DimensionMismatch("basis and targets disagree on feature dimension");
    if (!(ridge_rel >= 0.0))
        throw UsageError("ridge_rel must be nonnegative");

    const auto m = static_cast<Eigen::Index>(basis.n());
    const Eigen::MatrixXd gram = basis.values() * basis.values().transpose();
    const double trace_over_m = gram.trace() / static_cast<double>(m);
    const double jitter_floor = 1e-10 * trace_over_m;

    double lambda = ridge_rel * trace_over_m;
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ok = false;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        Eigen::MatrixXd sys = gram;
        sys.diagonal().array() += lambda;
        llt.compute(sys);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
        lambda = std::max(lambda, jitter_floor) * 10.0;
    }
    if (!ok)
        throw SingularGram("Gram matrix factorization failed after jitter escalation");

    // Normal equations: (G + λI) Cᵀ = B·Tᵀ, one independent solve per target.
    const Eigen::MatrixXd rhs = basis.values() * targets.values().transpose(); // m×n
    Coefficients coeff;
    coeff.values = llt.solve(rhs).transpose();

    // One corrected semi-normal-equations refinement step: the stationarity
    // residual (T − CB)Bᵀ − λC is formed from B directly, which recovers the
    // accuracy the squared conditioning of G costs on near-singular bases.
    const RowMatrix defect = targets.values() - coeff.values * basis.values();
    Eigen::MatrixXd grad = basis.values() * defect.transpose(); // m×n
    if (lambda > 0.0) grad.noalias() -= lambda * coeff.values.transpose();
    coeff.values += llt.solve(grad).transpose();
    return coeff;
}

} // namespace apet
