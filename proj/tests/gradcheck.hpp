#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pmcast/nn/layers.hpp"
#include "pmcast/nn/losses.hpp"
#include "testutil.hpp"

// Analytic-vs-central-difference checks for every differentiable piece:
// dense (all four activations), the LSTM layer unrolled over three steps,
// conv1d, and both losses. Shared between the unit tests and the
// acceptance suite.
namespace gradcheck {

struct CaseResult {
    std::string name;
    double max_err = 0.0;
    int instances = 0;
};

namespace detail {

inline double weighted_sum(const pmcast::Tensor& y, const pmcast::Tensor& mask) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y.data()[i] * mask.data()[i];
    return acc;
}

} // namespace detail

inline double dense_once(pmcast::Activation act, pmcast::Rng& rng) {
    using namespace pmcast;
    const int in = 3 + static_cast<int>(uniform_index(rng, 4));
    const int out = 2 + static_cast<int>(uniform_index(rng, 4));
    const int b = 1 + static_cast<int>(uniform_index(rng, 3));
    DenseLayer layer(in, out, act);
    layer.init_params(rng);
    testutil::fill_uniform(layer.bias, rng, -0.4, 0.4);
    Tensor x(b, in);
    testutil::fill_uniform(x, rng);
    Tensor mask(b, out);
    testutil::fill_uniform(mask, rng);

    auto value = [&] { return detail::weighted_sum(layer.infer(x), mask); };

    Rng dummy(0);
    layer.zero_grad();
    layer.forward_train(x, dummy);
    Tensor dx = layer.backward(mask);

    double worst = testutil::max_fd_error(value, layer.weights, layer.grad_weights);
    worst = std::max(worst, testutil::max_fd_error(value, layer.bias, layer.grad_bias));
    worst = std::max(worst, testutil::max_fd_error(value, x, dx));
    return worst;
}

inline double lstm_once(pmcast::Activation squash, pmcast::Rng& rng) {
    using namespace pmcast;
    const int in = 2 + static_cast<int>(uniform_index(rng, 3));
    const int h = 2 + static_cast<int>(uniform_index(rng, 3));
    const int b = 1 + static_cast<int>(uniform_index(rng, 2));
    const int t = 3; // three-step unroll
    LstmLayer layer(in, h, squash);
    layer.init_params(rng);
    testutil::fill_uniform(layer.bias, rng, -0.4, 0.4);
    Tensor x(b, t, in);
    testutil::fill_uniform(x, rng);
    Tensor mask(b, t, h);
    testutil::fill_uniform(mask, rng);

    auto value = [&] { return detail::weighted_sum(layer.infer(x), mask); };

    Rng dummy(0);
    layer.zero_grad();
    layer.forward_train(x, dummy);
    Tensor dx = layer.backward(mask);

    double worst = testutil::max_fd_error(value, layer.w_x, layer.grad_w_x);
    worst = std::max(worst, testutil::max_fd_error(value, layer.w_s, layer.grad_w_s));
    worst = std::max(worst, testutil::max_fd_error(value, layer.bias, layer.grad_bias));
    worst = std::max(worst, testutil::max_fd_error(value, x, dx));
    return worst;
}

inline double conv_once(pmcast::Activation act, pmcast::Rng& rng) {
    using namespace pmcast;
    const int c = 1 + static_cast<int>(uniform_index(rng, 3));
    const int f = 2 + static_cast<int>(uniform_index(rng, 3));
    const int t = 3 + static_cast<int>(uniform_index(rng, 4));
    const int b = 1 + static_cast<int>(uniform_index(rng, 2));
    Conv1dLayer layer(c, f, act);
    layer.init_params(rng);
    testutil::fill_uniform(layer.bias, rng, -0.4, 0.4);
    Tensor x(b, t, c);
    testutil::fill_uniform(x, rng);
    Tensor mask(b, t - 1, f);
    testutil::fill_uniform(mask, rng);

    auto value = [&] { return detail::weighted_sum(layer.infer(x), mask); };

    Rng dummy(0);
    layer.zero_grad();
    layer.forward_train(x, dummy);
    Tensor dx = layer.backward(mask);

    double worst = testutil::max_fd_error(value, layer.kernels, layer.grad_kernels);
    worst = std::max(worst, testutil::max_fd_error(value, layer.bias, layer.grad_bias));
    worst = std::max(worst, testutil::max_fd_error(value, x, dx));
    return worst;
}

inline double loss_once(pmcast::Loss kind, pmcast::Rng& rng) {
    using namespace pmcast;
    const int n = 3 + static_cast<int>(uniform_index(rng, 6));
    Tensor pred(n), target(n);
    testutil::fill_uniform(pred, rng);
    // keep |pred - target| well away from the mae kink
    for (int i = 0; i < n; ++i) {
        const double off = uniform(rng, 0.1, 1.0);
        target(i) = pred(i) + (uniform01(rng) < 0.5 ? off : -off);
    }
    LossResult lr = loss(kind, pred, target);
    auto value = [&] { return loss(kind, pred, target).value; };
    return testutil::max_fd_error(value, pred, lr.grad);
}

inline std::vector<CaseResult> run_all(int instances, std::uint64_t seed) {
    using namespace pmcast;
    std::vector<CaseResult> results;

    for (Activation act : {Activation::linear, Activation::sigmoid, Activation::relu,
                           Activation::tanh}) {
        Rng rng(derive_seed(seed, {"dense", to_string(act)}));
        CaseResult r{"dense/" + to_string(act), 0.0, instances};
        for (int i = 0; i < instances; ++i) r.max_err = std::max(r.max_err, dense_once(act, rng));
        results.push_back(r);
    }
    {
        Rng rng(derive_seed(seed, {"lstm"}));
        CaseResult r{"lstm/3-step", 0.0, instances};
        for (int i = 0; i < instances; ++i)
            r.max_err = std::max(r.max_err, lstm_once(Activation::tanh, rng));
        results.push_back(r);
    }
    {
        Rng rng(derive_seed(seed, {"lstm-sigmoid"}));
        CaseResult r{"lstm/3-step-sigmoid-squash", 0.0, instances};
        for (int i = 0; i < instances; ++i)
            r.max_err = std::max(r.max_err, lstm_once(Activation::sigmoid, rng));
        results.push_back(r);
    }
    for (Activation act : {Activation::relu, Activation::linear}) {
        Rng rng(derive_seed(seed, {"conv", to_string(act)}));
        CaseResult r{"conv1d/" + to_string(act), 0.0, instances};
        for (int i = 0; i < instances; ++i) r.max_err = std::max(r.max_err, conv_once(act, rng));
        results.push_back(r);
    }
    for (Loss kind : {Loss::mse, Loss::mae}) {
        Rng rng(derive_seed(seed, {"loss", to_string(kind)}));
        CaseResult r{"loss/" + to_string(kind), 0.0, instances};
        for (int i = 0; i < instances; ++i) r.max_err = std::max(r.max_err, loss_once(kind, rng));
        results.push_back(r);
    }
    return results;
}

} // namespace gradcheck
