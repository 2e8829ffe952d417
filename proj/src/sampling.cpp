#include "apet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apet/linalg.hpp"
#include "apet/rng.hpp"

namespace apet {

namespace {

void check_budget(Index m, Index n) {
    if (m < 1 || m > n)
        throw InvalidBudget("basis size must satisfy 1 <= m <= n (m=" + std::to_string(m) +
                            ", n=" + std::to_string(n) + ")");
}

// Ascending scan with strict > keeps the smallest index on ties.
Index argmax_unselected(const std::vector<double>& score, const std::vector<char>& selected) {
    Index best = 0;
    double best_score = -1.0;
    for (Index i = 0; i < score.size(); ++i) {
        if (selected[i]) continue;
        if (score[i] > best_score) {
            best_score = score[i];
            best = i;
        }
    }
    return best;
}

// Percentile with linear interpolation between closest ranks
// (rank = p/100·(L−1) over the ascending-sorted values).
double percentile_linear(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const auto last = values.size() - 1;
    const double rank = p / 100.0 * static_cast<double>(last);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, last);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

} // namespace

BasisSelection sample_fps(const TokenMatrix& x, Index m) {
    const Index n = x.n();
    check_budget(m, n);

    const Eigen::RowVectorXd centroid = x.values().colwise().mean();
    std::vector<double> minsq(n);
    for (Index i = 0; i < n; ++i)
        minsq[i] = (x.row(i) - centroid).squaredNorm();

    std::vector<char> selected(n, 0);
    BasisSelection sel;
    sel.strategy = Sampler::fps;
    sel.indices.reserve(m);

    Index cur = argmax_unselected(minsq, selected);
    selected[cur] = 1;
    sel.indices.push_back(cur);

    // From here minsq[i] tracks the min squared distance to the selected set.
    for (Index i = 0; i < n; ++i)
        minsq[i] = (x.row(i) - x.row(cur)).squaredNorm();

    while (sel.indices.size() < m) {
        cur = argmax_unselected(minsq, selected);
        selected[cur] = 1;
        sel.indices.push_back(cur);
        for (Index i = 0; i < n; ++i) {
            if (selected[i]) continue;
            const double d2 = (x.row(i) - x.row(cur)).squaredNorm();
            if (d2 < minsq[i]) minsq[i] = d2;
        }
    }
    return sel;
}

BasisSelection sample_dpc(const TokenMatrix& x, Index m, double dc_percentile) {
    const Index n = x.n();
    check_budget(m, n);
    if (!(dc_percentile > 0.0 && dc_percentile < 100.0))
        throw UsageError("dc_percentile must lie in (0, 100)");

    BasisSelection sel;
    sel.strategy = Sampler::dpc;

    if (n == 1) {
        sel.indices = {0};
        return sel;
    }

    const DistanceMatrix dist = pairwise_sq_dist(x);
    std::vector<double> offdiag;
    offdiag.reserve(n * (n - 1) / 2);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) offdiag.push_back(dist(i, j));

    const double max_off = *std::max_element(offdiag.begin(), offdiag.end());
    if (max_off == 0.0) {
        // All tokens identical: no geometry to cluster.
        sel.degenerate = true;
        sel.indices.resize(m);
        std::iota(sel.indices.begin(), sel.indices.end(), Index{0});
        return sel;
    }

    double dc = percentile_linear(offdiag, dc_percentile);
    if (dc <= 0.0) {
        // Duplicate tokens pushed the percentile to zero; fall back to the
        // smallest positive distance so the kernel stays finite.
        dc = max_off;
        for (double v : offdiag)
            if (v > 0.0 && v < dc) dc = v;
    }

    std::vector<double> rho(n, 0.0);
    for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            acc += std::exp(-dist(i, j) / dc);
        }
        rho[i] = acc;
    }

    std::vector<double> delta(n, 0.0);
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        double far = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            far = std::max(far, dist(i, j));
            if (rho[j] > rho[i] && dist(i, j) < best) {
                best = dist(i, j);
                found = true;
            }
        }
        delta[i] = found ? best : far; // density peaks take the max distance
    }

    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ga = rho[a] * delta[a];
        const double gb = rho[b] * delta[b];
        if (ga != gb) return ga > gb;
        return a < b;
    });
    sel.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    return sel;
}

BasisSelection sample_random(const TokenMatrix& x, Index m, std::uint64_t seed) {
    check_budget(m, x.n());
    auto eng = rng::make_engine(seed);
    BasisSelection sel;
    sel.strategy = Sampler::random;
    sel.seed = seed;
    sel.indices = rng::sample_without_replacement(x.n(), m, eng);
    return sel;
}

} // namespace apet
