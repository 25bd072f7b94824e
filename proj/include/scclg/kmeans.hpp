#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scclg/matrix.hpp"

namespace scclg {

struct KMeansOptions {
    std::size_t restarts = 20;
    std::size_t max_iterations = 300;
    double tolerance = 1e-6;
    /// Re-seeding attempts when a run ends with an empty cluster.
    std::size_t max_attempts = 10;
};

struct KMeansResult {
    Matrix centers;
    std::vector<int> labels;
    double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, KMeansOptions opts = {});

/// Cluster centers for the DEC head: k-means on the given embeddings.
Matrix init_centers(const Matrix& z, std::size_t n_clusters, std::uint64_t seed, KMeansOptions opts = {});

}  // namespace scclg
