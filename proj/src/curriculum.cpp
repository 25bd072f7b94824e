#include "scclg/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scclg/errors.hpp"

namespace scclg {

LocalMode parse_local_mode(const std::string& s) {
    if (s == "literal") return LocalMode::Literal;
    if (s == "dissimilarity") return LocalMode::Dissimilarity;
    throw RangeError("unknown local_mode '" + s + "' (expected literal or dissimilarity)");
}

std::string to_string(LocalMode m) { return m == LocalMode::Literal ? "literal" : "dissimilarity"; }

PruneStrategy parse_prune_strategy(const std::string& s) {
    if (s == "hard") return PruneStrategy::Hard;
    if (s == "easy") return PruneStrategy::Easy;
    if (s == "random") return PruneStrategy::Random;
    throw RangeError("unknown prune strategy '" + s + "' (expected hard, easy or random)");
}

std::string to_string(PruneStrategy s) {
    switch (s) {
        case PruneStrategy::Hard: return "hard";
        case PruneStrategy::Easy: return "easy";
        case PruneStrategy::Random: return "random";
    }
    return "hard";
}

std::vector<double> local_difficulty(const Matrix& z, const CellGraph& graph, LocalMode mode) {
    if (z.rows() != graph.n)
        throw ShapeError("local_difficulty: embedding has " + std::to_string(z.rows()) + " rows, graph has " +
                         std::to_string(graph.n) + " nodes");
    std::vector<double> norms(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double s = 0.0;
        for (double v : z.row(i)) s += v * v;
        norms[i] = std::sqrt(s);
    }
    std::vector<double> out(graph.n, 0.0);
    const long n = static_cast<long>(graph.n);
#pragma omp parallel for schedule(static) if (n > 256)
    for (long uu = 0; uu < n; ++uu) {
        const auto u = static_cast<std::size_t>(uu);
        double acc = 0.0;
        for (std::size_t v : graph.neighbors[u]) {
            double sim = 0.0;
            if (norms[u] > 0.0 && norms[v] > 0.0) {
                double dot = 0.0;
                for (std::size_t c = 0; c < z.cols(); ++c) dot += z(u, c) * z(v, c);
                sim = dot / (norms[u] * norms[v]);
            }
            acc += mode == LocalMode::Literal ? sim : 1.0 - sim;
        }
        out[u] = acc;
    }
    return out;
}

double entropy_from_degrees(std::span<const std::size_t> degrees) {
    double total = 0.0;
    for (std::size_t d : degrees) total += static_cast<double>(d);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (std::size_t d : degrees) {
        if (d == 0) continue;
        const double p = static_cast<double>(d) / total;
        h -= p * std::log(p);
    }
    return h;
}

double graph_entropy(const CellGraph& graph) { return entropy_from_degrees(graph.degrees); }

double entropy_without_node(const CellGraph& graph, std::size_t v) {
    std::vector<std::size_t> deg;
    deg.reserve(graph.n - 1);
    std::vector<std::size_t> adjusted = graph.degrees;
    for (std::size_t u : graph.neighbors[v]) --adjusted[u];
    for (std::size_t u = 0; u < graph.n; ++u)
        if (u != v) deg.push_back(adjusted[u]);
    return entropy_from_degrees(deg);
}

namespace {

std::vector<double> difficulty_from_variation(const std::vector<double>& variation) {
    double total = 0.0;
    for (double e : variation) total += e;
    std::vector<double> out(variation.size(), 0.0);
    if (total == 0.0) return out;
    for (std::size_t i = 0; i < variation.size(); ++i) out[i] = 1.0 - variation[i] / total;
    return out;
}

void check_size(const CellGraph& graph) {
    if (graph.n < 2) throw RangeError("global_difficulty: need at least 2 nodes");
}

}  // namespace

std::vector<double> global_difficulty(const CellGraph& graph) {
    check_size(graph);
    const double full = graph_entropy(graph);
    std::vector<double> variation(graph.n);
    const long n = static_cast<long>(graph.n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long vv = 0; vv < n; ++vv) {
        const auto v = static_cast<std::size_t>(vv);
        variation[v] = full - entropy_without_node(graph, v);
    }
    return difficulty_from_variation(variation);
}

namespace serial {

std::vector<double> global_difficulty(const CellGraph& graph) {
    check_size(graph);
    const double full = graph_entropy(graph);
    std::vector<double> variation(graph.n);
    for (std::size_t v = 0; v < graph.n; ++v) variation[v] = full - entropy_without_node(graph, v);
    return difficulty_from_variation(variation);
}

}  // namespace serial

DifficultyReport combine_and_rank(std::span<const double> local, std::span<const double> global_, double beta) {
    if (local.size() != global_.size())
        throw ShapeError("combine_and_rank: " + std::to_string(local.size()) + " local scores vs " +
                         std::to_string(global_.size()) + " global scores");
    if (!(beta >= 0.0 && beta <= 1.0)) throw RangeError("combine_and_rank: beta must be in [0, 1]");

    auto minmax = [](std::span<const double> v) {
        std::vector<double> out(v.size(), 0.0);
        if (v.empty()) return out;
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double range = *hi - *lo;
        if (range > 0.0)
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
        return out;
    };
    const auto ln = minmax(local);
    const auto gn = minmax(global_);

    DifficultyReport r;
    r.local.assign(local.begin(), local.end());
    r.global_.assign(global_.begin(), global_.end());
    r.beta = beta;
    r.combined.resize(local.size());
    for (std::size_t i = 0; i < local.size(); ++i) r.combined[i] = beta * ln[i] + (1.0 - beta) * gn[i];
    r.order.resize(local.size());
    std::iota(r.order.begin(), r.order.end(), 0);
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.combined[a] < r.combined[b]; });
    return r;
}

std::size_t prune_count(double alpha, std::size_t n) {
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

PruneResult prune(const DifficultyReport& report, double alpha, PruneStrategy strategy, std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw RangeError("prune: alpha must be in [0, 1)");
    const std::size_t n = report.order.size();
    const std::size_t m = prune_count(alpha, n);
    PruneResult res;
    res.alpha = alpha;
    std::vector<bool> drop(n, false);
    switch (strategy) {
        case PruneStrategy::Hard:
            for (std::size_t i = n - m; i < n; ++i) drop[i] = true;
            break;
        case PruneStrategy::Easy:
            for (std::size_t i = 0; i < m; ++i) drop[i] = true;
            break;
        case PruneStrategy::Random: {
            std::vector<std::size_t> pos(n);
            std::iota(pos.begin(), pos.end(), 0);
            std::mt19937_64 rng(seed);
            std::shuffle(pos.begin(), pos.end(), rng);
            for (std::size_t i = 0; i < m; ++i) drop[pos[i]] = true;
            break;
        }
    }
    // `drop` is indexed by rank position.
    for (std::size_t i = 0; i < n; ++i) (drop[i] ? res.dropped : res.kept).push_back(report.order[i]);
    return res;
}

double pacing_fraction(double t, const PacingConfig& cfg, double alpha) {
    if (!(cfg.lambda0 > 0.0 && cfg.lambda0 <= 1.0)) throw RangeError("pacing: lambda0 must be in (0, 1]");
    if (!(cfg.t_hat >= 1.0)) throw RangeError("pacing: t_hat must be >= 1");
    if (t < 0.0) throw RangeError("pacing: t must be >= 0");
    // 2^(log2(l0) - log2(l0) t / T) == l0^(1 - t / T)
    const double g = std::min(1.0, std::pow(cfg.lambda0, 1.0 - t / cfg.t_hat));
    return std::min(g, 1.0 - alpha);
}

std::size_t training_subset_size(double fraction, std::size_t n_original, std::size_t n_kept) {
    const auto want = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n_original) + 1e-9));
    return std::max<std::size_t>(1, std::min(want, n_kept));
}

}  // namespace scclg
