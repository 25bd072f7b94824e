#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scclg/cellgraph.hpp"
#include "scclg/matrix.hpp"

namespace scclg {

/// How neighbor similarity is turned into local difficulty.
/// `literal` sums cosine similarities; `dissimilarity` sums 1 - similarity.
enum class LocalMode { Literal, Dissimilarity };

enum class PruneStrategy { Hard, Easy, Random };

LocalMode parse_local_mode(const std::string& s);
std::string to_string(LocalMode m);
PruneStrategy parse_prune_strategy(const std::string& s);
std::string to_string(PruneStrategy s);

struct DifficultyReport {
    std::vector<double> local;
    std::vector<double> global_;
    std::vector<double> combined;
    /// Node indices, easiest first.
    std::vector<std::size_t> order;
    double beta = 0.5;
};

struct PruneResult {
    /// Surviving nodes, easiest first.
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
    double alpha = 0.0;
};

struct PacingConfig {
    double lambda0 = 0.25;
    double t_hat = 1.0;
};

/// Sum over neighbors of the cosine similarity between embedding rows.
std::vector<double> local_difficulty(const Matrix& z, const CellGraph& graph, LocalMode mode = LocalMode::Literal);

/// Natural-log entropy of p(v) = D(v) / sum D; zero-degree nodes contribute 0
/// and a degree sum of 0 gives 0.
double entropy_from_degrees(std::span<const std::size_t> degrees);
double graph_entropy(const CellGraph& graph);

/// Entropy of the graph with node v and its edges removed, computed from the
/// degree sequence (v skipped, its neighbors decremented).
double entropy_without_node(const CellGraph& graph, std::size_t v);

/// D_global(v) = 1 - Ent(v) / sum_u Ent(u), Ent(v) = Ent(G) - Ent(G - v).
/// Evaluated per node in parallel.
std::vector<double> global_difficulty(const CellGraph& graph);

namespace serial {
std::vector<double> global_difficulty(const CellGraph& graph);
}

/// Min-max normalizes both components (constants map to 0), mixes them with
/// beta and orders ascending with ties to the lower index.
DifficultyReport combine_and_rank(std::span<const double> local, std::span<const double> global_, double beta);

/// floor(alpha * n), guarded against representation error just below an integer.
std::size_t prune_count(double alpha, std::size_t n);

PruneResult prune(const DifficultyReport& report, double alpha, PruneStrategy strategy = PruneStrategy::Hard,
                  std::uint64_t seed = 0);

/// min(1, lambda0^(1 - t / t_hat)) capped at 1 - alpha.
double pacing_fraction(double t, const PacingConfig& cfg, double alpha);

/// min(n_kept, floor(fraction * n_original)), at least 1.
std::size_t training_subset_size(double fraction, std::size_t n_original, std::size_t n_kept);

}  // namespace scclg
