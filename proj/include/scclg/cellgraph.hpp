#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scclg/matrix.hpp"
#include "scclg/sparse.hpp"

namespace scclg {

enum class LaplacianKind { Combinatorial, SymNormalized };

LaplacianKind parse_laplacian_kind(const std::string& s);
std::string to_string(LaplacianKind k);

/// Undirected, unweighted cell graph plus the spectral operators the
/// Chebyshev encoder consumes.
struct CellGraph {
    std::size_t n = 0;
    /// Sorted neighbor lists; symmetric, no self-loops.
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<std::size_t> degrees;

    LaplacianKind laplacian_kind = LaplacianKind::SymNormalized;
    double lambda_max = 2.0;
    CsrMatrix laplacian;
    /// 2 L / lambda_max - I
    CsrMatrix scaled_laplacian;

    std::size_t edge_count() const;
    bool has_edge(std::size_t u, std::size_t v) const;
    Matrix dense_adjacency() const;
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

/// Graph from an undirected edge list; operators are not built.
/// Self-loops and duplicates are rejected.
CellGraph graph_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Directed kNN under Euclidean distance (ties to the lower index),
/// symmetrized by OR, with operators built for `kind`.
CellGraph knn_graph(const Matrix& features, std::size_t k, LaplacianKind kind = LaplacianKind::SymNormalized);

struct PowerIterationOptions {
    double tolerance = 1e-6;
    std::size_t max_iterations = 1000;
};

/// Largest eigenvalue of a symmetric PSD operator. Builds a Krylov basis from
/// the power sequence (fully reorthogonalized Lanczos) and stops once the
/// residual of the top Ritz pair falls below tol * max(1, |lambda|). Throws
/// ConvergenceError carrying the final residual after max_iterations steps.
double largest_eigenvalue(const CsrMatrix& op, PowerIterationOptions opts = {});

/// Computes L (combinatorial D - A, or I - D^-1/2 A D^-1/2 with identity rows
/// for isolated nodes), lambda_max, and the scaled Laplacian. An edgeless
/// graph gets lambda_max = 2.
CellGraph build_operators(CellGraph graph, LaplacianKind kind, PowerIterationOptions opts = {});

/// Induced subgraph on `keep` (relabelled in the given order), operators rebuilt.
CellGraph induced_subgraph(const CellGraph& g, std::span<const std::size_t> keep);

/// "u v" per line, 0-indexed, u < v.
void write_edge_list(const CellGraph& g, const std::filesystem::path& path);

}  // namespace scclg
