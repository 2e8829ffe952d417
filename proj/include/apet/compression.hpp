#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "apet/sampling.hpp"
#include "apet/types.hpp"

namespace apet {

/// Full configuration of one compression pass. Exactly one of keep /
/// keep_ratio must be set; a ratio resolves to K = max(1, round(ratio·n)).
/// After resolution 1 ≤ basis_m ≤ K ≤ n must hold — asking for fewer
/// retained tokens than basis tokens is an error, not a clamp, because the
/// basis is always retained.
struct ApetConfig {
    std::optional<Index> keep;
    std::optional<double> keep_ratio;
    Index basis_m = 10;
    Sampler sampler = Sampler::fps;
    double dc_percentile = kDefaultDcPercentile;
    double ridge_rel = 1e-6;
    MergeMode merge = MergeMode::mean;
    std::uint64_t seed = 0;

    /// Resolves the target count K for an n-token input and validates the
    /// budget. Throws InvalidBudget / UsageError on violations.
    Index resolve_keep(Index n) const;
};

/// Which tokens survive and where the dropped ones go. Partition invariant:
/// every index in [0, n) is either retained or in exactly one group.
struct CompressionPlan {
    std::vector<Index> retained;            // strictly ascending, size K
    BasisSelection basis;                   // basis.indices ⊆ retained
    std::vector<std::vector<Index>> groups; // groups[i] merges into retained[i]
    std::vector<double> residuals;          // all n residuals used for ranking
};

struct StageTimings {
    double sample_ms = 0.0;
    double fit_ms = 0.0;
    double select_ms = 0.0;
    double merge_ms = 0.0;
    double total_ms = 0.0;
};

/// Diagnostics for one compress run. Wall times live here for callers and
/// stderr diagnostics; the canonical JSON report omits them by default so
/// identical runs serialize byte-identically.
struct CompressionReport {
    ApetConfig config; // echoed with keep resolved
    Index n = 0;
    Index d = 0;
    Index k = 0;
    Index m = 0;
    double residual_min = 0.0;
    double residual_max = 0.0;
    double residual_mean = 0.0;
    bool degenerate_geometry = false;
    std::vector<Index> basis_indices;
    std::vector<Index> retained;
    std::vector<std::vector<Index>> groups;
    StageTimings timings;
};

/// Sample a basis per cfg, fit, rank by residual, retain the basis plus the
/// top (K − M) non-basis tokens, and assign every dropped token to the
/// retained token of maximal cosine similarity (ties toward the smaller
/// retained index).
CompressionPlan plan_compression(const TokenMatrix& x, const ApetConfig& cfg,
                                 StageTimings* timings = nullptr);

/// Same pipeline with a caller-supplied basis instead of a sampled one.
CompressionPlan plan_compression(const TokenMatrix& x, const BasisSelection& basis,
                                 Index keep, double ridge_rel);

/// Materialize the plan: K×d output in ascending retained-index order.
/// mean: each output row is the unweighted average of the retained token and
/// its group. drop: the retained token unchanged.
TokenMatrix apply_merge(const TokenMatrix& x, const CompressionPlan& plan, MergeMode mode);

/// plan_compression + apply_merge + a populated report. Deterministic:
/// identical (x, cfg) gives bit-identical output.
std::pair<TokenMatrix, CompressionReport> compress(const TokenMatrix& x,
                                                   const ApetConfig& cfg);

} // namespace apet
