#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "apet/compression.hpp"
#include "apet/types.hpp"

namespace apet {

// --- synthetic data ------------------------------------------------------

enum class SyntheticKind { lowrank, outliers, clusters };

const char* to_string(SyntheticKind k);
SyntheticKind synthetic_kind_from_string(const std::string& s);

/// Seeded synthetic token sets standing in for real embeddings.
///   lowrank  — L·Rᵀ + sigma·noise with Gaussian factors L (n×r), R (d×r).
///   outliers — the lowrank base with `outliers` rows replaced by
///              outlier_scale · (unit vectors orthogonal to the base row
///              space); those row indices are the ground truth.
///   clusters — Gaussian mixture: `rank` centers, row i belongs to center
///              i mod rank, spread sigma.
struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::lowrank;
    Index n = 0;
    Index d = 0;
    Index rank = 1;
    Index outliers = 0;
    double sigma = 0.0;
    double outlier_scale = 10.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    TokenMatrix tokens;
    // Present (possibly empty) for the outliers kind; absent otherwise.
    std::optional<std::vector<Index>> truth;
};

SyntheticData gen_synthetic(const SyntheticSpec& spec);

// --- baselines and metrics ------------------------------------------------

enum class BaselineStrategy { random, norm, stride };

const char* to_string(BaselineStrategy s);
BaselineStrategy baseline_from_string(const std::string& s);

/// Comparison selectors. random: seeded without replacement; norm: top-k by
/// row norm (ties toward the smaller index); stride: round(i·n/k),
/// deduplicated then padded with the smallest unused indices. All return
/// ascending indices.
std::vector<Index> baseline_select(const TokenMatrix& x, Index k, BaselineStrategy strategy,
                                   std::uint64_t seed = 0);

/// Information retention as reconstructability: least-squares fit of all n
/// tokens on the retained rows, returning ‖x − x′‖_F / ‖x‖_F.
double reconstruction_quality(const TokenMatrix& x, std::span<const Index> retained,
                              double ridge_rel);

/// |retained ∩ truth| / |truth|. Truth must be nonempty.
double outlier_recall(std::span<const Index> retained, std::span<const Index> truth);

// --- entropy bound --------------------------------------------------------

/// Conditional entropy (nats) and dimension for the reconstruction bound.
struct EntropyBoundInput {
    double h_cond = 0.0;
    Index d = 1;
};

/// Lower bound on achievable per-dimension reconstruction MSE given the
/// conditional entropy: (1/(2πe)) · exp(2·h_cond/d). A Gaussian source with
/// h_cond = (d/2)·ln(2πeσ²) attains it with equality at σ².
double mse_entropy_bound(const EntropyBoundInput& input);

// --- evaluation harness ----------------------------------------------------

struct EvalOptions {
    Index keep = 0;
    Index basis_m = 10;
    Sampler sampler = Sampler::fps;
    double dc_percentile = kDefaultDcPercentile;
    double ridge_rel = 1e-6;
    std::vector<BaselineStrategy> baselines = {BaselineStrategy::random,
                                               BaselineStrategy::norm,
                                               BaselineStrategy::stride};
    std::uint64_t seed_begin = 0;
    std::uint64_t seed_end = 0; // inclusive
};

struct EvalMethodResult {
    std::string name;
    std::vector<Index> retained; // from the first seed
    double mean_rel_error = 0.0;
    std::optional<double> mean_recall;
    double mean_wall_ms = 0.0;
};

struct EvalResult {
    EvalOptions options;
    Index n = 0;
    Index d = 0;
    std::optional<Index> truth_size;
    std::vector<EvalMethodResult> methods; // "apet" first, then baselines
};

/// Runs the error-guided pipeline plus the requested baselines over the seed
/// range and averages reconstruction error (and recall, when truth exists).
EvalResult run_eval(const TokenMatrix& x, const std::optional<std::vector<Index>>& truth,
                    const EvalOptions& options);

nlohmann::ordered_json eval_to_json(const EvalResult& result, bool include_timings = false);

// --- ablation grid ----------------------------------------------------------

inline const std::vector<Index> kDefaultMGrid = {6, 8, 10, 12, 14};

struct AblationGrid {
    std::vector<Sampler> samplers = {Sampler::fps};
    std::vector<Index> m_values = kDefaultMGrid;
    std::vector<Index> k_values;
};

struct AblationCell {
    Sampler sampler = Sampler::fps;
    Index m = 0;
    Index k = 0;
    double mean_rel_error = 0.0;
    std::optional<double> mean_recall;
    double mean_wall_ms = 0.0;
};

struct AblationTable {
    AblationGrid grid;
    std::vector<std::uint64_t> seeds;
    Index n = 0;
    Index d = 0;
    std::vector<AblationCell> cells; // samplers × m × k, in grid order
};

/// Fixed input: seeds reseed the sampler only (deterministic samplers repeat
/// their selection; metrics still average across seeds).
AblationTable run_ablation(const TokenMatrix& x,
                           const std::optional<std::vector<Index>>& truth,
                           const AblationGrid& grid, const std::vector<std::uint64_t>& seeds,
                           double ridge_rel = 1e-6);

/// Synthetic input: regenerates the dataset for every seed (spec.seed is
/// replaced by each grid seed), so means cover data variability.
AblationTable run_ablation(const SyntheticSpec& spec, const AblationGrid& grid,
                           const std::vector<std::uint64_t>& seeds, double ridge_rel = 1e-6);

nlohmann::ordered_json ablation_to_json(const AblationTable& table,
                                        bool include_timings = false);
std::string ablation_to_csv(const AblationTable& table);

} // namespace apet
