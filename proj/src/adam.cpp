#include "scclg/adam.hpp"

#include <cmath>

#include "scclg/errors.hpp"

namespace scclg {

void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads, AdamState& state) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    if (!(state.beta1 >= 0 && state.beta1 < 1 && state.beta2 >= 0 && state.beta2 < 1 && state.epsilon > 0))
        throw RangeError("adam_step: invalid hyperparameters");
    if (state.first_moment.empty()) {
        for (const Matrix* p : params) {
            state.first_moment.emplace_back(p->rows(), p->cols());
            state.second_moment.emplace_back(p->rows(), p->cols());
        }
    }
    if (state.first_moment.size() != params.size())
        throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, got " + std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = grads[i];
        if (g.rows() != params[i]->rows() || g.cols() != params[i]->cols() ||
            state.first_moment[i].rows() != g.rows() || state.first_moment[i].cols() != g.cols())
            throw ShapeError("adam_step: parameter " + std::to_string(i) + " has shape " +
                             shape_string(params[i]->rows(), params[i]->cols()) + ", gradient " +
                             shape_string(g.rows(), g.cols()));
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i]->data();
        const double* g = grads[i].data();
        double* m = state.first_moment[i].data();
        double* v = state.second_moment[i].data();
        for (std::size_t k = 0; k < params[i]->size(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

void adam_step(const std::vector<ad::Tensor>& params, AdamState& state) {
    std::vector<Matrix*> values;
    std::vector<Matrix> grads;
    values.reserve(params.size());
    grads.reserve(params.size());
    for (auto p : params) {
        grads.push_back(p.grad());
        values.push_back(&p.mutable_value());
    }
    adam_step(std::move(values), grads, state);
}

}  // namespace scclg
