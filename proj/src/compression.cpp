#include "apet/compression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "apet/approximation.hpp"
#include "apet/linalg.hpp"

namespace apet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

BasisSelection run_sampler(const TokenMatrix& x, const ApetConfig& cfg) {
    switch (cfg.sampler) {
        case Sampler::fps: return sample_fps(x, cfg.basis_m);
        case Sampler::dpc: return sample_dpc(x, cfg.basis_m, cfg.dc_percentile);
        case Sampler::random: return sample_random(x, cfg.basis_m, cfg.seed);
    }
    throw UsageError("unknown sampler");
}

// Retained set: basis forced, then the best-ranked non-basis tokens.
std::vector<Index> select_retained(const std::vector<Index>& ranking,
                                   const BasisSelection& basis, Index n, Index keep) {
    std::vector<char> is_retained(n, 0);
    for (Index b : basis.indices) is_retained[b] = 1;
    Index count = basis.indices.size();
    for (Index idx : ranking) {
        if (count == keep) break;
        if (is_retained[idx]) continue;
        is_retained[idx] = 1;
        ++count;
    }
    std::vector<Index> retained;
    retained.reserve(keep);
    for (Index i = 0; i < n; ++i)
        if (is_retained[i]) retained.push_back(i);
    return retained;
}

// Each dropped token goes to the retained token of maximal cosine
// similarity. Row-normalize both sides (zero rows stay zero) and take one
// matrix product; the ascending argmax scan keeps the smallest retained
// index on ties, which also catches all-zero similarity rows.
std::vector<std::vector<Index>> assign_groups(const TokenMatrix& x,
                                              const std::vector<Index>& retained) {
    const Index n = x.n();
    std::vector<char> is_retained(n, 0);
    for (Index r : retained) is_retained[r] = 1;
    std::vector<Index> dropped;
    dropped.reserve(n - retained.size());
    for (Index i = 0; i < n; ++i)
        if (!is_retained[i]) dropped.push_back(i);

    std::vector<std::vector<Index>> groups(retained.size());
    if (dropped.empty()) return groups;

    const auto d = static_cast<Eigen::Index>(x.d());
    RowMatrix ret_unit(static_cast<Eigen::Index>(retained.size()), d);
    for (Index i = 0; i < retained.size(); ++i) {
        const double norm = x.row(retained[i]).norm();
        ret_unit.row(static_cast<Eigen::Index>(i)) =
            norm < kNormEps ? Eigen::RowVectorXd::Zero(d) : (x.row(retained[i]) / norm).eval();
    }
    RowMatrix drop_unit(static_cast<Eigen::Index>(dropped.size()), d);
    for (Index i = 0; i < dropped.size(); ++i) {
        const double norm = x.row(dropped[i]).norm();
        drop_unit.row(static_cast<Eigen::Index>(i)) =
            norm < kNormEps ? Eigen::RowVectorXd::Zero(d) : (x.row(dropped[i]) / norm).eval();
    }

    const RowMatrix sim = drop_unit * ret_unit.transpose(); // |dropped| × K
    for (Index i = 0; i < dropped.size(); ++i) {
        Index best = 0;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < retained.size(); ++j) {
            const double s = sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (s > best_sim) {
                best_sim = s;
                best = j;
            }
        }
        groups[best].push_back(dropped[i]);
    }
    return groups;
}

void check_partition(const CompressionPlan& plan, Index n) {
    std::vector<char> seen(n, 0);
    auto mark = [&](Index i) {
        if (i >= n || seen[i])
            throw Error("compression plan does not partition the token set");
        seen[i] = 1;
    };
    for (Index r : plan.retained) mark(r);
    for (const auto& g : plan.groups)
        for (Index idx : g) mark(idx);
    for (Index i = 0; i < n; ++i)
        if (!seen[i]) throw Error("compression plan does not partition the token set");
}

CompressionPlan build_plan(const TokenMatrix& x, const BasisSelection& basis, Index keep,
                           double ridge_rel, StageTimings* timings) {
    const Index n = x.n();
    if (basis.indices.size() > keep)
        throw InvalidBudget("basis size M=" + std::to_string(basis.indices.size()) +
                            " exceeds keep K=" + std::to_string(keep) +
                            " (basis tokens are always retained)");

    auto t0 = Clock::now();
    ApproximationResult approx = fit_basis(x, basis, ridge_rel);
    if (timings) timings->fit_ms = ms_since(t0);

    t0 = Clock::now();
    const std::vector<Index> ranking = rank_by_error(approx);

    CompressionPlan plan;
    plan.basis = basis;
    plan.residuals = std::move(approx.residuals);
    plan.retained = select_retained(ranking, basis, n, keep);
    plan.groups = assign_groups(x, plan.retained);
    if (timings) timings->select_ms = ms_since(t0);

    check_partition(plan, n);
    return plan;
}

} // namespace

Index ApetConfig::resolve_keep(Index n) const {
    if (keep.has_value() == keep_ratio.has_value())
        throw UsageError("exactly one of keep / keep_ratio must be set");
    Index k;
    if (keep) {
        k = *keep;
    } else {
        if (!(*keep_ratio > 0.0))
            throw InvalidBudget("keep_ratio must be positive");
        k = static_cast<Index>(
            std::max<long>(1, std::lround(*keep_ratio * static_cast<double>(n))));
    }
    if (k < 1 || k > n)
        throw InvalidBudget("keep K must satisfy 1 <= K <= n (K=" + std::to_string(k) +
                            ", n=" + std::to_string(n) + ")");
    if (basis_m < 1 || basis_m > k)
        throw InvalidBudget("basis size M must satisfy 1 <= M <= K (M=" +
                            std::to_string(basis_m) + ", K=" + std::to_string(k) + ")");
    return k;
}

CompressionPlan plan_compression(const TokenMatrix& x, const ApetConfig& cfg,
                                 StageTimings* timings) {
    const Index keep = cfg.resolve_keep(x.n());
    auto t0 = Clock::now();
    BasisSelection basis = run_sampler(x, cfg);
    if (timings) timings->sample_ms = ms_since(t0);
    return build_plan(x, basis, keep, cfg.ridge_rel, timings);
}

CompressionPlan plan_compression(const TokenMatrix& x, const BasisSelection& basis,
                                 Index keep, double ridge_rel) {
    if (keep < 1 || keep > x.n())
        throw InvalidBudget("keep K must satisfy 1 <= K <= n");
    return build_plan(x, basis, keep, ridge_rel, nullptr);
}

TokenMatrix apply_merge(const TokenMatrix& x, const CompressionPlan& plan, MergeMode mode) {
    const Index n = x.n();
    if (plan.groups.size() != plan.retained.size())
        throw DimensionMismatch("plan groups and retained lists disagree");
    if (!std::is_sorted(plan.retained.begin(), plan.retained.end()) ||
        std::adjacent_find(plan.retained.begin(), plan.retained.end()) != plan.retained.end())
        throw DimensionMismatch("retained indices must be strictly ascending");
    check_partition(plan, n);

    const auto d = static_cast<Eigen::Index>(x.d());
    RowMatrix out(static_cast<Eigen::Index>(plan.retained.size()), d);
    for (Index i = 0; i < plan.retained.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (mode == MergeMode::drop || plan.groups[i].empty()) {
            out.row(row) = x.row(plan.retained[i]);
            continue;
        }
        Eigen::RowVectorXd acc = x.row(plan.retained[i]);
        for (Index idx : plan.groups[i]) acc += x.row(idx);
        out.row(row) = acc / static_cast<double>(1 + plan.groups[i].size());
    }
    return TokenMatrix(std::move(out));
}

std::pair<TokenMatrix, CompressionReport> compress(const TokenMatrix& x,
                                                   const ApetConfig& cfg) {
    const auto total0 = Clock::now();
    StageTimings timings;
    CompressionPlan plan = plan_compression(x, cfg, &timings);

    const auto merge0 = Clock::now();
    TokenMatrix merged = apply_merge(x, plan, cfg.merge);
    timings.merge_ms = ms_since(merge0);
    timings.total_ms = ms_since(total0);

    CompressionReport report;
    report.config = cfg;
    report.config.keep = plan.retained.size();
    report.config.keep_ratio.reset();
    report.n = x.n();
    report.d = x.d();
    report.k = plan.retained.size();
    report.m = plan.basis.indices.size();
    report.degenerate_geometry = plan.basis.degenerate;
    report.basis_indices = plan.basis.indices;
    report.retained = plan.retained;
    report.groups = plan.groups;
    report.timings = timings;

    const auto [mn, mx] = std::minmax_element(plan.residuals.begin(), plan.residuals.end());
    report.residual_min = *mn;
    report.residual_max = *mx;
    double sum = 0.0;
    for (double r : plan.residuals) sum += r;
    report.residual_mean = sum / static_cast<double>(plan.residuals.size());

    return {std::move(merged), std::move(report)};
}

} // namespace apet
