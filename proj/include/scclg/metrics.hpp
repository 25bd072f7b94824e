#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scclg {

/// Cross-tabulation of two labelings. Labels are compacted to 0..C-1 in order
/// of first appearance, so arbitrary (even negative) ids are accepted.
struct ContingencyTable {
    std::size_t n_true = 0;
    std::size_t n_pred = 0;
    std::vector<std::size_t> counts;  // n_true x n_pred, row-major
    std::vector<std::size_t> row_sums;
    std::vector<std::size_t> col_sums;
    std::size_t total = 0;

    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * n_pred + j]; }
};

ContingencyTable contingency(std::span<const int> truth, std::span<const int> pred);

/// Adjusted Rand index; 1.0 when both partitions are a single cluster.
double ari(std::span<const int> truth, std::span<const int> pred);

/// Mutual information over the arithmetic mean of the two entropies (natural
/// log); 1.0 when both partitions are a single cluster.
double nmi(std::span<const int> truth, std::span<const int> pred);

std::size_t count_clusters(std::span<const int> labels);

}  // namespace scclg
