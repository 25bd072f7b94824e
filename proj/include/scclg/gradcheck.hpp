#pragma once

#include <functional>
#include <vector>

#include "scclg/autodiff.hpp"

namespace scclg {

struct GradCheckResult {
    /// max over inputs of  max|analytic - numeric| / max(max|analytic|, max|numeric|, floor)
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
};

/// Compares backward() against central differences of `loss` with step h,
/// perturbing every entry of every input tensor in place.
GradCheckResult check_gradients(const std::function<ad::Tensor()>& loss, std::vector<ad::Tensor> inputs,
                                double h = 1e-5, double floor = 1e-8);

}  // namespace scclg
