#include "pmcast/nn/optimizers.hpp"

#include <cmath>

#include "pmcast/errors.hpp"

namespace pmcast {

std::string to_string(Optimizer o) {
    return o == Optimizer::adam ? "adam" : "rmsprop";
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "adam") return Optimizer::adam;
    if (s == "rmsprop") return Optimizer::rmsprop;
    throw ConfigError("unknown optimizer '" + s + "'");
}

void OptimizerState::init(Optimizer k, const std::vector<Tensor*>& params) {
    kind = k;
    step_count = 0;
    m.clear();
    v.clear();
    for (const Tensor* p : params) {
        v.push_back(Tensor::zeros_like(*p));
        if (kind == Optimizer::adam) m.push_back(Tensor::zeros_like(*p));
    }
}

void optimizer_step(OptimizerState& state, const std::vector<Tensor*>& params,
                    const std::vector<Tensor*>& grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.v.size())
        throw ShapeError("optimizer_step: parameter/gradient/state count mismatch");
    ++state.step_count;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g))
            throw ShapeError("optimizer_step: grad shape " + g.shape_str() +
                             " does not match param " + p.shape_str());
        double* pd = p.data();
        const double* gd = g.data();
        double* vd = state.v[i].data();
        if (state.kind == Optimizer::adam) {
            double* md = state.m[i].data();
            const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
            const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
            for (std::size_t j = 0; j < p.size(); ++j) {
                md[j] = state.beta1 * md[j] + (1.0 - state.beta1) * gd[j];
                vd[j] = state.beta2 * vd[j] + (1.0 - state.beta2) * gd[j] * gd[j];
                const double m_hat = md[j] / bc1;
                const double v_hat = vd[j] / bc2;
                pd[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
            }
        } else {
            for (std::size_t j = 0; j < p.size(); ++j) {
                vd[j] = state.rho * vd[j] + (1.0 - state.rho) * gd[j] * gd[j];
                pd[j] -= lr * gd[j] / std::sqrt(vd[j] + state.epsilon);
            }
        }
    }
}

} // namespace pmcast
