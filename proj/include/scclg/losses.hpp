#pragma once

#include <optional>
#include <span>
#include <vector>

#include "scclg/autodiff.hpp"
#include "scclg/matrix.hpp"
#include "scclg/model.hpp"

namespace scclg {

/// Node subset a loss is restricted to; std::nullopt means every node.
/// Indices are sorted before use, so order does not matter.
using NodeMask = std::optional<std::span<const std::size_t>>;

/// Weighted terms of one objective evaluation. total = rec + zinb + cls.
struct LossBreakdown {
    double rec = 0.0;
    double zinb = 0.0;
    double cls = 0.0;
    double total = 0.0;

    bool operator==(const LossBreakdown&) const = default;
};

struct LossWeights {
    double rec = 1.0;
    double zinb = 1.0;
    double cls = 1.0;
};

/// ||A - A_rec||_F^2 over mask x mask.
ad::Tensor loss_rec(const Matrix& adjacency, const ad::Tensor& a_rec, NodeMask mask = std::nullopt);

/// Mean negative log-likelihood of the counts under ZINB(pi, mu, theta) over
/// the masked rows. Throws NonFiniteError.
ad::Tensor loss_zinb(const Matrix& counts, const ZinbParams& params, NodeMask mask = std::nullopt);

/// Pointwise ZINB negative log-likelihood.
double zinb_nll(double x, double pi, double mu, double theta);

/// p_ij proportional to q_ij^2 / f_j with f_j = sum_i q_ij, rows normalized.
Matrix target_distribution(const Matrix& q);

/// KL(P || Q) summed over the masked rows; P is a constant.
ad::Tensor loss_cls(const Matrix& p, const ad::Tensor& q, NodeMask mask = std::nullopt);

}  // namespace scclg
