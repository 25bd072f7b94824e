#include "scclg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scclg/errors.hpp"
#include "scclg/special.hpp"

namespace scclg {

using ad::Tensor;

namespace {

std::vector<std::size_t> resolve_mask(NodeMask mask, std::size_t n, const char* op) {
    std::vector<std::size_t> idx;
    if (!mask) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0);
        return idx;
    }
    idx.assign(mask->begin(), mask->end());
    std::sort(idx.begin(), idx.end());
    if (!idx.empty() && idx.back() >= n)
        throw RangeError(std::string(op) + ": mask index " + std::to_string(idx.back()) + " out of range");
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
        throw RangeError(std::string(op) + ": mask contains duplicates");
    return idx;
}

void require_same(std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2, const char* op) {
    if (r1 != r2 || c1 != c2)
        throw ShapeError(std::string(op) + ": " + shape_string(r1, c1) + " vs " + shape_string(r2, c2));
}

// log(exp(a) + exp(b))
double log_add(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct ZinbTerm {
    double nll, d_pi, d_mu, d_theta;
};

ZinbTerm zinb_term(double x, double pi, double mu, double theta) {
    // log(theta / (theta + mu)) without cancellation for theta >> mu
    const double log_ratio = -std::log1p(mu / theta);
    if (x == 0.0) {
        const double a = std::log(pi);
        const double b = std::log1p(-pi) + theta * log_ratio;
        const double lse = log_add(a, b);
        const double wa = std::exp(a - lse);
        const double wb = std::exp(b - lse);
        return {-lse, -(wa / pi - wb / (1.0 - pi)), wb * theta / (theta + mu),
                -wb * (log_ratio + mu / (theta + mu))};
    }
    const double nll = -(std::log1p(-pi) + log_gamma(x + theta) - log_gamma(x + 1.0) - log_gamma(theta) +
                         theta * log_ratio + x * (std::log(mu) - std::log(theta + mu)));
    return {nll, 1.0 / (1.0 - pi), -(x / mu - (x + theta) / (theta + mu)),
            -(digamma(x + theta) - digamma(theta) + log_ratio + (mu - x) / (theta + mu))};
}

}  // namespace

double zinb_nll(double x, double pi, double mu, double theta) { return zinb_term(x, pi, mu, theta).nll; }

Tensor loss_rec(const Matrix& adjacency, const Tensor& a_rec, NodeMask mask) {
    require_same(adjacency.rows(), adjacency.cols(), a_rec.rows(), a_rec.cols(), "loss_rec");
    auto idx = resolve_mask(mask, adjacency.rows(), "loss_rec");
    const Matrix& r = a_rec.value();
    double s = 0.0;
    for (std::size_t i : idx)
        for (std::size_t j : idx) {
            const double d = adjacency(i, j) - r(i, j);
            s += d * d;
        }
    return Tensor::from_op(
        Matrix(1, 1, s), {a_rec},
        [idx = std::move(idx), adjacency](ad::Node& self) {
            ad::Node& p = *self.parents[0];
            const double g = self.grad(0, 0);
            Matrix grad(p.value.rows(), p.value.cols());
            for (std::size_t i : idx)
                for (std::size_t j : idx) grad(i, j) = -2.0 * g * (adjacency(i, j) - p.value(i, j));
            p.accumulate(grad);
        },
        0);
}

Tensor loss_zinb(const Matrix& counts, const ZinbParams& params, NodeMask mask) {
    require_same(counts.rows(), counts.cols(), params.pi.rows(), params.pi.cols(), "loss_zinb");
    require_same(counts.rows(), counts.cols(), params.mu.rows(), params.mu.cols(), "loss_zinb");
    require_same(counts.rows(), counts.cols(), params.theta.rows(), params.theta.cols(), "loss_zinb");
    auto idx = resolve_mask(mask, counts.rows(), "loss_zinb");
    if (idx.empty() || counts.cols() == 0) throw RangeError("loss_zinb: no entries to average");

    const std::size_t g = counts.cols();
    const double denom = static_cast<double>(idx.size() * g);
    Matrix dpi(counts.rows(), g), dmu(counts.rows(), g), dth(counts.rows(), g);
    double s = 0.0;
    const Matrix& pi = params.pi.value();
    const Matrix& mu = params.mu.value();
    const Matrix& th = params.theta.value();
    for (std::size_t i : idx)
        for (std::size_t j = 0; j < g; ++j) {
            const ZinbTerm t = zinb_term(counts(i, j), pi(i, j), mu(i, j), th(i, j));
            s += t.nll;
            dpi(i, j) = t.d_pi / denom;
            dmu(i, j) = t.d_mu / denom;
            dth(i, j) = t.d_theta / denom;
        }
    const double loss = s / denom;
    if (!std::isfinite(loss)) throw NonFiniteError("ZINB loss is not finite");
    return Tensor::from_op(
        Matrix(1, 1, loss), {params.pi, params.mu, params.theta},
        [dpi = std::move(dpi), dmu = std::move(dmu), dth = std::move(dth)](ad::Node& self) {
            const double gscale = self.grad(0, 0);
            const Matrix* parts[3] = {&dpi, &dmu, &dth};
            for (std::size_t k = 0; k < 3; ++k) {
                ad::Node& p = *self.parents[k];
                if (!p.requires_grad) continue;
                Matrix gm = *parts[k];
                for (double& v : gm.values()) v *= gscale;
                p.accumulate(gm);
            }
        },
        0);
}

Matrix target_distribution(const Matrix& q) {
    const std::size_t n = q.rows(), k = q.cols();
    std::vector<double> f(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) f[j] += q(i, j);
    Matrix p(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            p(i, j) = q(i, j) * q(i, j) / f[j];
            s += p(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) p(i, j) /= s;
    }
    return p;
}

Tensor loss_cls(const Matrix& p, const Tensor& q, NodeMask mask) {
    require_same(p.rows(), p.cols(), q.rows(), q.cols(), "loss_cls");
    auto idx = resolve_mask(mask, p.rows(), "loss_cls");
    const Matrix& qv = q.value();
    double s = 0.0;
    for (std::size_t i : idx)
        for (std::size_t j = 0; j < p.cols(); ++j)
            if (p(i, j) > 0.0) s += p(i, j) * std::log(p(i, j) / qv(i, j));
    return Tensor::from_op(
        Matrix(1, 1, s), {q},
        [idx = std::move(idx), p](ad::Node& self) {
            ad::Node& pq = *self.parents[0];
            const double g = self.grad(0, 0);
            Matrix grad(pq.value.rows(), pq.value.cols());
            for (std::size_t i : idx)
                for (std::size_t j = 0; j < p.cols(); ++j) grad(i, j) = -g * p(i, j) / pq.value(i, j);
            pq.accumulate(grad);
        },
        0);
}

}  // namespace scclg
