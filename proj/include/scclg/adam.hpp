#pragma once

#include <cstddef>
#include <vector>

#include "scclg/autodiff.hpp"
#include "scclg/matrix.hpp"

namespace scclg {

struct AdamState {
    std::size_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;

    explicit AdamState(double lr = 1e-3) : learning_rate(lr) {}
};

/// One bias-corrected Adam update of `params` (in place) from `grads`.
/// Moments are allocated on the first call.
void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads, AdamState& state);

/// Convenience overload: reads gradients from the tensors themselves.
void adam_step(const std::vector<ad::Tensor>& params, AdamState& state);

}  // namespace scclg
