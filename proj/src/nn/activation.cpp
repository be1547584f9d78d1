#include "pmcast/nn/activation.hpp"

#include <Eigen/Core>

#include "pmcast/errors.hpp"

namespace pmcast {

namespace {
using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrayMap = Eigen::Map<const Eigen::ArrayXd>;
} // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::linear;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation '" + s + "'");
}

void vec_sigmoid(std::span<double> values) {
    ArrayMap x(values.data(), static_cast<Eigen::Index>(values.size()));
    // exp under/overflow saturates to the correct limits 0 and 1.
    x = 1.0 / (1.0 + (-x).exp());
}

void vec_tanh(std::span<double> values) {
    // tanh(x) = sign(x) * (1 - e) / (1 + e), e = exp(-2|x|). Uses the
    // vectorized exp; Eigen's double tanh falls back to scalar libm.
    ArrayMap x(values.data(), static_cast<Eigen::Index>(values.size()));
    Eigen::ArrayXd ax = x.abs();
    Eigen::ArrayXd e = (-2.0 * ax).exp();
    x = x.sign() * (1.0 - e) / (1.0 + e);
}

void apply_activation(Activation a, std::span<double> values) {
    switch (a) {
        case Activation::linear:
            return;
        case Activation::sigmoid:
            vec_sigmoid(values);
            return;
        case Activation::relu: {
            ArrayMap x(values.data(), static_cast<Eigen::Index>(values.size()));
            x = x.max(0.0);
            return;
        }
        case Activation::tanh:
            vec_tanh(values);
            return;
    }
}

void scale_by_activation_grad(Activation a, std::span<const double> output,
                              std::span<double> grad) {
    if (output.size() != grad.size())
        throw ShapeError("activation grad size mismatch");
    ConstArrayMap y(output.data(), static_cast<Eigen::Index>(output.size()));
    ArrayMap g(grad.data(), static_cast<Eigen::Index>(grad.size()));
    switch (a) {
        case Activation::linear:
            return;
        case Activation::sigmoid:
            g *= y * (1.0 - y);
            return;
        case Activation::relu:
            g *= (y > 0.0).cast<double>();
            return;
        case Activation::tanh:
            g *= 1.0 - y.square();
            return;
    }
}

} // namespace pmcast
