#include "pmcast/nn/losses.hpp"

#include <cmath>

#include "pmcast/errors.hpp"

namespace pmcast {

std::string to_string(Loss l) {
    return l == Loss::mse ? "mse" : "mae";
}

Loss loss_from_string(const std::string& s) {
    if (s == "mse") return Loss::mse;
    if (s == "mae") return Loss::mae;
    throw ConfigError("unknown loss '" + s + "'");
}

LossResult loss(Loss kind, const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target))
        throw ShapeError("loss: pred " + pred.shape_str() + " vs target " + target.shape_str());
    if (pred.size() == 0) throw ShapeError("loss: empty tensors");

    LossResult res;
    res.grad = Tensor::zeros_like(pred);
    const double n = static_cast<double>(pred.size());
    const double* p = pred.data();
    const double* t = target.data();
    double* g = res.grad.data();
    double acc = 0.0;
    if (kind == Loss::mse) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = p[i] - t[i];
            acc += d * d;
            g[i] = 2.0 * d / n;
        }
    } else {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = p[i] - t[i];
            acc += std::fabs(d);
            g[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
        }
    }
    res.value = acc / n;
    return res;
}

} // namespace pmcast
