#pragma once

#include <string>

#include "pmcast/tensor.hpp"

namespace pmcast {

enum class Loss { mse, mae };

std::string to_string(Loss l);
Loss loss_from_string(const std::string& s);

struct LossResult {
    double value = 0.0;
    Tensor grad; // dvalue/dpred, same shape as pred
};

// mse: mean((p-t)^2), grad 2(p-t)/n.  mae: mean|p-t|, grad sign(p-t)/n with
// sign(0) = 0.  n is the total element count.
LossResult loss(Loss kind, const Tensor& pred, const Tensor& target);

} // namespace pmcast
