#include "scclg/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace scclg {

GradCheckResult check_gradients(const std::function<ad::Tensor()>& loss, std::vector<ad::Tensor> inputs,
                                double h, double floor) {
    for (auto& in : inputs) in.zero_grad();
    loss().backward();
    std::vector<Matrix> analytic;
    for (const auto& in : inputs) analytic.push_back(in.grad());

    GradCheckResult res;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        Matrix& x = inputs[t].mutable_value();
        double worst = 0.0;
        double scale = floor;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double orig = x.data()[i];
            x.data()[i] = orig + h;
            const double fp = loss().item();
            x.data()[i] = orig - h;
            const double fm = loss().item();
            x.data()[i] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[t].data()[i];
            worst = std::max(worst, std::abs(a - numeric));
            scale = std::max({scale, std::abs(a), std::abs(numeric)});
        }
        res.max_abs_error = std::max(res.max_abs_error, worst);
        res.max_rel_error = std::max(res.max_rel_error, worst / scale);
    }
    return res;
}

}  // namespace scclg
