#include "scclg/cellgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "scclg/errors.hpp"
#include "scclg/kernels.hpp"

namespace scclg {

LaplacianKind parse_laplacian_kind(const std::string& s) {
    if (s == "combinatorial") return LaplacianKind::Combinatorial;
    if (s == "sym_normalized") return LaplacianKind::SymNormalized;
    throw RangeError("unknown laplacian kind '" + s + "' (expected combinatorial or sym_normalized)");
}

std::string to_string(LaplacianKind k) {
    return k == LaplacianKind::Combinatorial ? "combinatorial" : "sym_normalized";
}

std::size_t CellGraph::edge_count() const {
    return std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}) / 2;
}

bool CellGraph::has_edge(std::size_t u, std::size_t v) const {
    return std::binary_search(neighbors[u].begin(), neighbors[u].end(), v);
}

Matrix CellGraph::dense_adjacency() const {
    Matrix a(n, n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v : neighbors[u]) a(u, v) = 1.0;
    return a;
}

std::vector<std::pair<std::size_t, std::size_t>> CellGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v : neighbors[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

CellGraph graph_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    CellGraph g;
    g.n = n;
    g.neighbors.assign(n, {});
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw RangeError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range");
        if (u == v) throw RangeError("self-loop at node " + std::to_string(u));
        g.neighbors[u].push_back(v);
        g.neighbors[v].push_back(u);
    }
    g.degrees.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        auto& nb = g.neighbors[u];
        std::sort(nb.begin(), nb.end());
        if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
            throw RangeError("duplicate edge at node " + std::to_string(u));
        g.degrees[u] = nb.size();
    }
    return g;
}

CellGraph knn_graph(const Matrix& features, std::size_t k, LaplacianKind kind) {
    const std::size_t n = features.rows();
    if (features.cols() < 1) throw RangeError("knn_graph: features need at least one column");
    if (k < 1 || k >= n)
        throw RangeError("knn_graph: k = " + std::to_string(k) + " must satisfy 1 <= k < " + std::to_string(n));

    const Matrix dist = kernels::pairwise_sq_distances(features);
    std::vector<std::vector<std::size_t>> nb(n);
    std::vector<std::size_t> cand(n - 1);
    for (std::size_t u = 0; u < n; ++u) {
        std::size_t c = 0;
        for (std::size_t v = 0; v < n; ++v)
            if (v != u) cand[c++] = v;
        auto closer = [&](std::size_t a, std::size_t b) {
            return dist(u, a) < dist(u, b) || (dist(u, a) == dist(u, b) && a < b);
        };
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end(), closer);
        for (std::size_t i = 0; i < k; ++i) {
            nb[u].push_back(cand[i]);
            nb[cand[i]].push_back(u);
        }
    }
    CellGraph g;
    g.n = n;
    g.neighbors = std::move(nb);
    g.degrees.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        auto& l = g.neighbors[u];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        g.degrees[u] = l.size();
    }
    return build_operators(std::move(g), kind);
}

namespace {

// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal a and
// off-diagonal b, by Sturm-count bisection.
double tridiagonal_max_eigenvalue(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t m = a.size();
    double lo = a[0], hi = a[0];
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < m ? std::abs(b[i]) : 0.0);
        lo = std::min(lo, a[i] - r);
        hi = std::max(hi, a[i] + r);
    }
    // Number of eigenvalues below x.
    auto below = [&](double x) {
        std::size_t count = 0;
        double d = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            d = a[i] - x - (i > 0 ? b[i - 1] * b[i - 1] / d : 0.0);
            if (d == 0.0) d = -1e-300;
            if (d < 0.0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) == m) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Last component of the unit eigenvector for theta, by inverse iteration with a
// shift just above the spectrum (the shifted matrix is definite, so the
// unpivoted tridiagonal solve is stable).
double last_eigenvector_component(const std::vector<double>& a, const std::vector<double>& b, double theta) {
    const std::size_t m = a.size();
    const double sigma = theta + 1e-10 * std::max(1.0, std::abs(theta));
    std::vector<double> y(m, 1.0), c(m), d(m);
    for (int pass = 0; pass < 3; ++pass) {
        // Thomas algorithm on (T - sigma I) x = y.
        double denom = a[0] - sigma;
        c[0] = m > 1 ? b[0] / denom : 0.0;
        d[0] = y[0] / denom;
        for (std::size_t i = 1; i < m; ++i) {
            denom = a[i] - sigma - b[i - 1] * c[i - 1];
            c[i] = i + 1 < m ? b[i] / denom : 0.0;
            d[i] = (y[i] - b[i - 1] * d[i - 1]) / denom;
        }
        y[m - 1] = d[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) y[i] = d[i] - c[i] * y[i + 1];
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : y) v /= norm;
    }
    return y[m - 1];
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace

double largest_eigenvalue(const CsrMatrix& op, PowerIterationOptions opts) {
    const std::size_t n = op.rows;
    if (n == 0) return 0.0;
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    std::vector<double> q(n);
    for (double& x : q) x = unif(rng);
    const double q_norm = std::sqrt(dot(q, q));
    for (double& x : q) x /= q_norm;

    // The power sequence q, Aq, A^2 q, ... spans a Krylov space; the largest
    // Ritz value over that span (Lanczos, fully reorthogonalized) converges far
    // faster than the last iterate alone when the top eigenvalues cluster.
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    double residual = 0.0;
    Matrix v(n, 1);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        std::copy(q.begin(), q.end(), v.data());
        const Matrix av = kernels::spmm(op, v);
        std::vector<double> w(av.data(), av.data() + n);
        alpha.push_back(dot(q, w));
        basis.push_back(q);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double c = dot(b, w);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * b[i];
            }
        const double b_next = std::sqrt(dot(w, w));
        const double theta = tridiagonal_max_eigenvalue(alpha, beta);
        residual = std::abs(b_next * last_eigenvector_component(alpha, beta, theta));
        const double scale = std::max(1.0, std::abs(theta));
        if (residual <= opts.tolerance * scale || b_next <= 1e-14 * scale || basis.size() == n) return theta;
        beta.push_back(b_next);
        for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / b_next;
    }
    throw ConvergenceError("power iteration did not converge in " + std::to_string(opts.max_iterations) +
                               " iterations",
                           residual);
}

CellGraph build_operators(CellGraph g, LaplacianKind kind, PowerIterationOptions opts) {
    const std::size_t n = g.n;
    g.laplacian_kind = kind;
    CsrMatrix lap;
    lap.rows = lap.cols = n;
    lap.row_ptr.assign(1, 0);
    for (std::size_t u = 0; u < n; ++u) {
        const double du = static_cast<double>(g.degrees[u]);
        bool diag_done = false;
        auto emit_diag = [&]() {
            lap.col_idx.push_back(u);
            if (kind == LaplacianKind::Combinatorial)
                lap.values.push_back(du);
            else
                lap.values.push_back(1.0);  // identity row also for isolated nodes
            diag_done = true;
        };
        for (std::size_t v : g.neighbors[u]) {
            if (!diag_done && v > u) emit_diag();
            lap.col_idx.push_back(v);
            if (kind == LaplacianKind::Combinatorial)
                lap.values.push_back(-1.0);
            else
                lap.values.push_back(-1.0 / std::sqrt(du * static_cast<double>(g.degrees[v])));
        }
        if (!diag_done) emit_diag();
        lap.row_ptr.push_back(lap.values.size());
    }

    g.lambda_max = g.edge_count() == 0 ? 2.0 : largest_eigenvalue(lap, opts);

    CsrMatrix scaled = lap;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t p = scaled.row_ptr[u]; p < scaled.row_ptr[u + 1]; ++p) {
            scaled.values[p] *= 2.0 / g.lambda_max;
            if (scaled.col_idx[p] == u) scaled.values[p] -= 1.0;
        }
    g.laplacian = std::move(lap);
    g.scaled_laplacian = std::move(scaled);
    return g;
}

CellGraph induced_subgraph(const CellGraph& g, std::span<const std::size_t> keep) {
    std::vector<std::size_t> remap(g.n, g.n);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= g.n) throw RangeError("induced_subgraph: node " + std::to_string(keep[i]) + " out of range");
        if (remap[keep[i]] != g.n) throw RangeError("induced_subgraph: node " + std::to_string(keep[i]) + " repeated");
        remap[keep[i]] = i;
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (auto [u, v] : g.edges())
        if (remap[u] != g.n && remap[v] != g.n) edges.emplace_back(remap[u], remap[v]);
    return build_operators(graph_from_edges(keep.size(), edges), g.laplacian_kind);
}

void write_edge_list(const CellGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace scclg
