#pragma once

#include <string>
#include <vector>

#include "pmcast/tensor.hpp"

namespace pmcast {

enum class Optimizer { adam, rmsprop };

std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

// Moment buffers aligned with the parameter list. Adam uses m and v,
// RMSprop only v (the squared-gradient accumulator).
struct OptimizerState {
    Optimizer kind = Optimizer::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double rho = 0.9;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    void init(Optimizer k, const std::vector<Tensor*>& params);
};

// One in-place update. Adam: p -= lr * m_hat / (sqrt(v_hat) + eps).
// RMSprop: p -= lr * g / sqrt(acc + eps).
void optimizer_step(OptimizerState& state, const std::vector<Tensor*>& params,
                    const std::vector<Tensor*>& grads, double lr);

} // namespace pmcast
