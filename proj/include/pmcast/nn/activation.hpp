#pragma once

#include <span>
#include <string>

namespace pmcast {

enum class Activation { linear, sigmoid, relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// In-place y = f(u). sigmoid/tanh are vectorized via exp and agree with
// std::tanh / 1/(1+exp(-x)) to ~1 ulp.
void apply_activation(Activation a, std::span<double> values);

// In-place grad *= f'(u), with f'(u) reconstructed from the activation
// *output* y (valid for all four activations here).
void scale_by_activation_grad(Activation a, std::span<const double> output,
                              std::span<double> grad);

void vec_sigmoid(std::span<double> values);
void vec_tanh(std::span<double> values);

} // namespace pmcast
