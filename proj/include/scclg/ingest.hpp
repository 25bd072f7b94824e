#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scclg/matrix.hpp"

namespace scclg {

/// Raw cell x gene transcript counts.
struct ExpressionMatrix {
    std::size_t n_cells = 0;
    std::size_t n_genes = 0;
    std::vector<std::int64_t> counts;  // row-major, n_cells x n_genes
    std::vector<std::string> cell_ids;
    std::vector<std::string> gene_ids;
    std::optional<std::vector<int>> labels;

    std::int64_t count(std::size_t cell, std::size_t gene) const { return counts[cell * n_genes + gene]; }
    Matrix to_matrix() const;
    /// Number of distinct label values, 0 without labels.
    std::size_t n_classes() const;

    /// Throws on any violated invariant (shape, negative counts, duplicate ids, labels).
    void validate() const;

    bool operator==(const ExpressionMatrix&) const = default;
};

enum class MatrixFormat { Csv, MtxTriplet };

MatrixFormat parse_matrix_format(const std::string& s);
std::string to_string(MatrixFormat f);

/// CSV: header row "<corner>,gene...", then "cell,count..." rows.
/// mtx-triplet: "rows cols nnz" header then 1-indexed "row col value" lines;
/// '%' lines are comments. The triplet format carries no identifiers, so
/// cells and genes are named cell_<i> / gene_<j> (0-based).
ExpressionMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const ExpressionMatrix& m, const std::filesystem::path& path, MatrixFormat format);

/// Sidecar "cell_id,label" file (optional header line). Every cell must be
/// labelled; labels are remapped to nothing, they must already be 0..C-1.
void attach_labels(ExpressionMatrix& m, const std::filesystem::path& path);
void save_labels(const ExpressionMatrix& m, const std::filesystem::path& path);

struct SynthesisSpec {
    std::size_t n_cells = 300;
    std::size_t n_genes = 200;
    std::size_t n_clusters = 3;
    double dropout_rate = 0.2;
    double dispersion = 2.0;
    double mean_scale = 2.0;
    std::uint64_t seed = 0;
};

/// Counts drawn entrywise from ZINB(pi = dropout_rate, mu = cluster mean,
/// theta = dispersion). Cluster gene means are mean_scale * LogNormal(0, 1).
/// Cluster sizes are balanced; membership is shuffled.
ExpressionMatrix synthesize(const SynthesisSpec& spec);

/// Per-gene means used by synthesize() for `spec` (n_clusters x n_genes).
Matrix synthetic_cluster_means(const SynthesisSpec& spec);

}  // namespace scclg
