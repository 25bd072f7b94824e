#include "scclg/kmeans.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "scclg/errors.hpp"

namespace scclg {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

Matrix plus_plus_seed(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = x.rows();
    Matrix centers(k, x.cols());
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t pick = first(rng);
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(0).begin());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(x.row(i), centers.row(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                r -= d2[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x.row(i), centers.row(c)));
    }
    return centers;
}

// One Lloyd run. Returns false if a cluster ended up empty.
bool lloyd(const Matrix& x, Matrix& centers, std::vector<int>& labels, double& inertia, const KMeansOptions& opts) {
    const std::size_t n = x.rows(), k = centers.rows(), d = x.cols();
    labels.assign(n, 0);
    std::vector<std::size_t> sizes(k);
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = sq_dist(x.row(i), centers.row(c));
                if (dist < best) {
                    best = dist;
                    labels[i] = static_cast<int>(c);
                }
            }
        }
        Matrix next(k, d);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            ++sizes[c];
            for (std::size_t j = 0; j < d; ++j) next(c, j) += x(i, j);
        }
        bool empty = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                empty = true;
                // keep the old center for this pass
                for (std::size_t j = 0; j < d; ++j) next(c, j) = centers(c, j);
            } else {
                for (std::size_t j = 0; j < d; ++j) next(c, j) /= static_cast<double>(sizes[c]);
            }
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, sq_dist(next.row(c), centers.row(c)));
        centers = std::move(next);
        if (std::sqrt(shift) <= opts.tolerance && !empty) break;
    }
    inertia = 0.0;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double dist = sq_dist(x.row(i), centers.row(c));
            if (dist < best) {
                best = dist;
                labels[i] = static_cast<int>(c);
            }
        }
        inertia += best;
        ++sizes[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t s : sizes)
        if (s == 0) return false;
    return true;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, KMeansOptions opts) {
    if (k < 1 || k > points.rows())
        throw RangeError("kmeans: k = " + std::to_string(k) + " must be in 1.." + std::to_string(points.rows()));
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < opts.restarts; ++r) {
        for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
            Matrix centers = plus_plus_seed(points, k, rng);
            std::vector<int> labels;
            double inertia = 0.0;
            if (!lloyd(points, centers, labels, inertia, opts)) continue;
            if (inertia < best.inertia) best = {std::move(centers), std::move(labels), inertia};
            break;
        }
    }
    if (best.labels.empty())
        throw ConvergenceError("kmeans: every attempt ended with an empty cluster", 0.0);
    return best;
}

Matrix init_centers(const Matrix& z, std::size_t n_clusters, std::uint64_t seed, KMeansOptions opts) {
    return kmeans(z, n_clusters, seed, opts).centers;
}

}  // namespace scclg
