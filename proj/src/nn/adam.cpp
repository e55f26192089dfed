#include "tnar/nn/adam.hpp"

#include <cmath>

#include "tnar/errors.hpp"

namespace tnar::nn {

void adam_update(numkit::Vector& params, const numkit::Vector& grads, AdamState& state, double lr,
                 const AdamHyper& hyper) {
    if (params.size() != grads.size() || state.m.size() != params.size()) {
        throw DimensionMismatch("adam_update: parameter, gradient and state sizes differ");
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(hyper.beta1, t);
    const double c2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

}  // namespace tnar::nn
