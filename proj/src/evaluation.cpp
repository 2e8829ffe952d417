#include "apet/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_set>

#include "apet/approximation.hpp"
#include "apet/linalg.hpp"
#include "apet/rng.hpp"

namespace apet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1)
        throw UsageError("synthetic spec: n and d must be positive");
    if (spec.rank < 1 || spec.rank > std::min(spec.n, spec.d))
        throw UsageError("synthetic spec: rank must satisfy 1 <= r <= min(n, d)");
    if (spec.outliers >= spec.n)
        throw UsageError("synthetic spec: outlier count must be below n");
    if (!(spec.sigma >= 0.0))
        throw UsageError("synthetic spec: sigma must be nonnegative");
    if (spec.kind == SyntheticKind::outliers && spec.outliers > 0 && spec.rank >= spec.d)
        throw UsageError("synthetic spec: outliers need rank < d (empty orthogonal complement)");
}

RowMatrix gaussian_matrix(Index rows, Index cols, rng::Engine& eng,
                          rng::GaussianSampler& gauss) {
    RowMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = gauss.next(eng);
    return out;
}

// Orthonormal basis of the column span, modified Gram-Schmidt.
std::vector<Eigen::VectorXd> orthonormal_columns(const RowMatrix& m) {
    std::vector<Eigen::VectorXd> q;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::VectorXd v = m.col(c);
        for (const auto& u : q) v -= u.dot(v) * u;
        const double norm = v.norm();
        if (norm > 1e-12) q.push_back(v / norm);
    }
    return q;
}

std::vector<Index> gather_sorted(std::span<const Index> v) {
    std::vector<Index> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

const char* to_string(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::lowrank: return "lowrank";
        case SyntheticKind::outliers: return "outliers";
        case SyntheticKind::clusters: return "clusters";
    }
    return "lowrank";
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
    if (s == "lowrank") return SyntheticKind::lowrank;
    if (s == "outliers") return SyntheticKind::outliers;
    if (s == "clusters") return SyntheticKind::clusters;
    throw UsageError("unknown synthetic kind '" + s + "' (expected lowrank|outliers|clusters)");
}

const char* to_string(BaselineStrategy s) {
    switch (s) {
        case BaselineStrategy::random: return "random";
        case BaselineStrategy::norm: return "norm";
        case BaselineStrategy::stride: return "stride";
    }
    return "random";
}

BaselineStrategy baseline_from_string(const std::string& s) {
    if (s == "random") return BaselineStrategy::random;
    if (s == "norm") return BaselineStrategy::norm;
    if (s == "stride") return BaselineStrategy::stride;
    throw UsageError("unknown baseline '" + s + "' (expected random|norm|stride)");
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    validate_spec(spec);
    auto eng = rng::make_engine(spec.seed);
    rng::GaussianSampler gauss;

    if (spec.kind == SyntheticKind::clusters) {
        const RowMatrix centers = gaussian_matrix(spec.rank, spec.d, eng, gauss);
        RowMatrix x(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.d));
        for (Index i = 0; i < spec.n; ++i) {
            const auto c = static_cast<Eigen::Index>(i % spec.rank);
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                x(static_cast<Eigen::Index>(i), j) =
                    centers(c, j) + spec.sigma * gauss.next(eng);
        }
        return SyntheticData{TokenMatrix(std::move(x)), std::nullopt};
    }

    // Draw order is fixed: L rows, R rows, noise rows, then (outliers only)
    // placement and directions. Changing it would change every seeded set.
    const RowMatrix left = gaussian_matrix(spec.n, spec.rank, eng, gauss);
    const RowMatrix right = gaussian_matrix(spec.d, spec.rank, eng, gauss);
    RowMatrix x = left * right.transpose();
    if (spec.sigma > 0.0)
        x += spec.sigma * gaussian_matrix(spec.n, spec.d, eng, gauss);

    if (spec.kind == SyntheticKind::lowrank)
        return SyntheticData{TokenMatrix(std::move(x)), std::nullopt};

    std::vector<Index> truth;
    if (spec.outliers > 0) {
        truth = rng::sample_without_replacement(spec.n, spec.outliers, eng);
        const auto basis = orthonormal_columns(right);
        for (Index idx : truth) {
            Eigen::VectorXd dir(static_cast<Eigen::Index>(spec.d));
            double norm = 0.0;
            do {
                for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = gauss.next(eng);
                for (const auto& u : basis) dir -= u.dot(dir) * u;
                norm = dir.norm();
            } while (norm < 1e-8);
            x.row(static_cast<Eigen::Index>(idx)) =
                (spec.outlier_scale / norm) * dir.transpose();
        }
    }
    return SyntheticData{TokenMatrix(std::move(x)), std::move(truth)};
}

std::vector<Index> baseline_select(const TokenMatrix& x, Index k, BaselineStrategy strategy,
                                   std::uint64_t seed) {
    const Index n = x.n();
    if (k < 1 || k > n)
        throw InvalidBudget("baseline budget must satisfy 1 <= k <= n");

    switch (strategy) {
        case BaselineStrategy::random: {
            auto eng = rng::make_engine(seed);
            return rng::sample_without_replacement(n, k, eng);
        }
        case BaselineStrategy::norm: {
            std::vector<Index> order(n);
            std::iota(order.begin(), order.end(), Index{0});
            std::vector<double> norms(n);
            for (Index i = 0; i < n; ++i) norms[i] = x.row(i).norm();
            std::sort(order.begin(), order.end(), [&](Index a, Index b) {
                if (norms[a] != norms[b]) return norms[a] > norms[b];
                return a < b;
            });
            order.resize(k);
            std::sort(order.begin(), order.end());
            return order;
        }
        case BaselineStrategy::stride: {
            std::vector<char> taken(n, 0);
            std::vector<Index> out;
            out.reserve(k);
            for (Index i = 0; i < k; ++i) {
                auto idx = static_cast<Index>(std::lround(
                    static_cast<double>(i) * static_cast<double>(n) / static_cast<double>(k)));
                idx = std::min(idx, n - 1);
                if (!taken[idx]) {
                    taken[idx] = 1;
                    out.push_back(idx);
                }
            }
            for (Index i = 0; out.size() < k && i < n; ++i) { // pad from the front
                if (!taken[i]) {
                    taken[i] = 1;
                    out.push_back(i);
                }
            }
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    throw UsageError("unknown baseline strategy");
}

double reconstruction_quality(const TokenMatrix& x, std::span<const Index> retained,
                              double ridge_rel) {
    if (retained.empty()) throw InvalidBudget("retained set is empty");
    const double total = x.values().norm();
    if (total == 0.0) throw ZeroMatrix("relative error undefined on an all-zero matrix");

    RowMatrix rows(static_cast<Eigen::Index>(retained.size()),
                   static_cast<Eigen::Index>(x.d()));
    for (Index i = 0; i < retained.size(); ++i) {
        if (retained[i] >= x.n())
            throw DimensionMismatch("retained index out of range");
        rows.row(static_cast<Eigen::Index>(i)) = x.row(retained[i]);
    }
    const TokenMatrix basis(std::move(rows));
    const Coefficients coeff = lstsq_fit(basis, x, ridge_rel);
    const double err = (x.values() - coeff.values * basis.values()).norm();
    return err / total;
}

double outlier_recall(std::span<const Index> retained, std::span<const Index> truth) {
    if (truth.empty()) throw UsageError("recall undefined for empty truth");
    const std::unordered_set<Index> kept(retained.begin(), retained.end());
    Index hits = 0;
    for (Index t : truth) hits += kept.count(t);
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mse_entropy_bound(const EntropyBoundInput& input) {
    if (input.d < 1) throw UsageError("bound dimension must be positive");
    if (!std::isfinite(input.h_cond)) throw UsageError("conditional entropy must be finite");
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    return std::exp(2.0 * input.h_cond / static_cast<double>(input.d)) / two_pi_e;
}

EvalResult run_eval(const TokenMatrix& x, const std::optional<std::vector<Index>>& truth,
                    const EvalOptions& options) {
    if (options.seed_end < options.seed_begin)
        throw UsageError("seed range end must be >= begin");
    const bool has_truth = truth.has_value() && !truth->empty();
    std::vector<Index> truth_sorted;
    if (has_truth) truth_sorted = gather_sorted(*truth);

    EvalResult result;
    result.options = options;
    result.n = x.n();
    result.d = x.d();
    if (truth.has_value()) result.truth_size = truth->size();

    const auto n_seeds =
        static_cast<double>(options.seed_end - options.seed_begin + 1);

    auto evaluate = [&](const std::string& name, auto&& select) {
        EvalMethodResult method;
        method.name = name;
        double err_sum = 0.0, recall_sum = 0.0, ms_sum = 0.0;
        for (std::uint64_t s = options.seed_begin;; ++s) {
            const auto t0 = Clock::now();
            const std::vector<Index> retained = select(s);
            ms_sum += ms_since(t0);
            err_sum += reconstruction_quality(x, retained, options.ridge_rel);
            if (has_truth) recall_sum += outlier_recall(retained, truth_sorted);
            if (s == options.seed_begin) method.retained = retained;
            if (s == options.seed_end) break;
        }
        method.mean_rel_error = err_sum / n_seeds;
        if (has_truth) method.mean_recall = recall_sum / n_seeds;
        method.mean_wall_ms = ms_sum / n_seeds;
        result.methods.push_back(std::move(method));
    };

    evaluate("apet", [&](std::uint64_t seed) {
        ApetConfig cfg;
        cfg.keep = options.keep;
        cfg.basis_m = options.basis_m;
        cfg.sampler = options.sampler;
        cfg.dc_percentile = options.dc_percentile;
        cfg.ridge_rel = options.ridge_rel;
        cfg.seed = seed;
        return plan_compression(x, cfg).retained;
    });
    for (BaselineStrategy b : options.baselines) {
        evaluate(to_string(b), [&, b](std::uint64_t seed) {
            return baseline_select(x, options.keep, b, seed);
        });
    }
    return result;
}

nlohmann::ordered_json eval_to_json(const EvalResult& result, bool include_timings) {
    nlohmann::ordered_json j;
    j["schema"] = "1";
    nlohmann::ordered_json cfg;
    cfg["keep"] = result.options.keep;
    cfg["basis_m"] = result.options.basis_m;
    cfg["sampler"] = to_string(result.options.sampler);
    cfg["dc_percentile"] = result.options.dc_percentile;
    cfg["ridge_rel"] = result.options.ridge_rel;
    nlohmann::ordered_json baselines = nlohmann::ordered_json::array();
    for (BaselineStrategy b : result.options.baselines) baselines.push_back(to_string(b));
    cfg["baselines"] = std::move(baselines);
    cfg["seed_begin"] = result.options.seed_begin;
    cfg["seed_end"] = result.options.seed_end;
    j["config"] = std::move(cfg);
    j["n"] = result.n;
    j["d"] = result.d;
    if (result.truth_size)
        j["truth_size"] = *result.truth_size;
    else
        j["truth_size"] = nullptr;
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (const auto& m : result.methods) {
        nlohmann::ordered_json jm;
        jm["name"] = m.name;
        jm["mean_rel_error"] = m.mean_rel_error;
        if (m.mean_recall)
            jm["mean_recall"] = *m.mean_recall;
        else
            jm["mean_recall"] = nullptr;
        jm["retained"] = m.retained;
        if (include_timings) jm["mean_wall_ms"] = m.mean_wall_ms;
        methods.push_back(std::move(jm));
    }
    j["methods"] = std::move(methods);
    return j;
}

namespace {

AblationTable run_ablation_impl(
    const AblationGrid& grid, const std::vector<std::uint64_t>& seeds, double ridge_rel,
    Index n, Index d,
    const std::function<std::pair<const TokenMatrix*, const std::vector<Index>*>(
        std::uint64_t)>& dataset_for_seed) {
    if (grid.samplers.empty() || grid.m_values.empty() || grid.k_values.empty())
        throw UsageError("ablation grid must not be empty");
    if (seeds.empty()) throw UsageError("ablation needs at least one seed");

    AblationTable table;
    table.grid = grid;
    table.seeds = seeds;
    table.n = n;
    table.d = d;

    for (Sampler sampler : grid.samplers) {
        for (Index m : grid.m_values) {
            for (Index k : grid.k_values) {
                AblationCell cell;
                cell.sampler = sampler;
                cell.m = m;
                cell.k = k;
                double err_sum = 0.0, recall_sum = 0.0, ms_sum = 0.0;
                bool any_truth = false;
                for (std::uint64_t seed : seeds) {
                    const auto [x, truth] = dataset_for_seed(seed);
                    ApetConfig cfg;
                    cfg.keep = k;
                    cfg.basis_m = m;
                    cfg.sampler = sampler;
                    cfg.ridge_rel = ridge_rel;
                    cfg.seed = seed;
                    const auto t0 = Clock::now();
                    const auto [merged, report] = compress(*x, cfg);
                    ms_sum += ms_since(t0);
                    err_sum += reconstruction_quality(*x, report.retained, ridge_rel);
                    if (truth && !truth->empty()) {
                        recall_sum += outlier_recall(report.retained, *truth);
                        any_truth = true;
                    }
                }
                const auto count = static_cast<double>(seeds.size());
                cell.mean_rel_error = err_sum / count;
                if (any_truth) cell.mean_recall = recall_sum / count;
                cell.mean_wall_ms = ms_sum / count;
                table.cells.push_back(std::move(cell));
            }
        }
    }
    return table;
}

} // namespace

AblationTable run_ablation(const TokenMatrix& x,
                           const std::optional<std::vector<Index>>& truth,
                           const AblationGrid& grid, const std::vector<std::uint64_t>& seeds,
                           double ridge_rel) {
    const std::vector<Index>* truth_ptr = truth ? &*truth : nullptr;
    return run_ablation_impl(
        grid, seeds, ridge_rel, x.n(), x.d(),
        [&x, truth_ptr](std::uint64_t) { return std::make_pair(&x, truth_ptr); });
}

AblationTable run_ablation(const SyntheticSpec& spec, const AblationGrid& grid,
                           const std::vector<std::uint64_t>& seeds, double ridge_rel) {
    // One dataset per seed, reused across grid cells.
    std::map<std::uint64_t, SyntheticData> cache;
    for (std::uint64_t seed : seeds) {
        SyntheticSpec per_seed = spec;
        per_seed.seed = seed;
        cache.emplace(seed, gen_synthetic(per_seed));
    }
    return run_ablation_impl(grid, seeds, ridge_rel, spec.n, spec.d,
                             [&cache](std::uint64_t seed) {
                                 const auto& data = cache.at(seed);
                                 const std::vector<Index>* truth =
                                     data.truth ? &*data.truth : nullptr;
                                 return std::make_pair(&data.tokens, truth);
                             });
}

nlohmann::ordered_json ablation_to_json(const AblationTable& table, bool include_timings) {
    nlohmann::ordered_json j;
    j["schema"] = "1";
    nlohmann::ordered_json grid;
    nlohmann::ordered_json samplers = nlohmann::ordered_json::array();
    for (Sampler s : table.grid.samplers) samplers.push_back(to_string(s));
    grid["samplers"] = std::move(samplers);
    grid["m_values"] = table.grid.m_values;
    grid["k_values"] = table.grid.k_values;
    j["grid"] = std::move(grid);
    j["seeds"] = table.seeds;
    j["n"] = table.n;
    j["d"] = table.d;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : table.cells) {
        nlohmann::ordered_json jc;
        jc["sampler"] = to_string(c.sampler);
        jc["m"] = c.m;
        jc["k"] = c.k;
        jc["mean_rel_error"] = c.mean_rel_error;
        if (c.mean_recall)
            jc["mean_recall"] = *c.mean_recall;
        else
            jc["mean_recall"] = nullptr;
        if (include_timings) jc["mean_wall_ms"] = c.mean_wall_ms;
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j;
}

std::string ablation_to_csv(const AblationTable& table) {
    std::string out = "sampler,m,k,mean_rel_error,mean_recall\n";
    for (const auto& c : table.cells) {
        out += to_string(c.sampler);
        out += ',';
        out += std::to_string(c.m);
        out += ',';
        out += std::to_string(c.k);
        out += ',';
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, c.mean_rel_error);
        out.append(buf, res.ptr);
        out += ',';
        if (c.mean_recall) {
            res = std::to_chars(buf, buf + sizeof buf, *c.mean_recall);
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

} // namespace apet
