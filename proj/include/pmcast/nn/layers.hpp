#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pmcast/nn/activation.hpp"
#include "pmcast/rng.hpp"
#include "pmcast/tensor.hpp"

namespace pmcast {

// Batch convention: leading dimension is the batch. Sequence layers take
// [B x T x C], flat layers [B x D].
class Layer {
public:
    virtual ~Layer() = default;

    // Training-mode forward; caches whatever backward() needs.
    virtual Tensor forward_train(const Tensor& in, Rng& rng) = 0;
    // Inference forward; stateless and safe to call concurrently.
    virtual Tensor infer(const Tensor& in) const = 0;
    // Gradient wrt input; accumulates parameter gradients.
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual void collect_params(std::vector<Tensor*>& params,
                                std::vector<Tensor*>& grads,
                                std::vector<std::string>& names,
                                const std::string& prefix) {
        (void)params; (void)grads; (void)names; (void)prefix;
    }
    virtual void zero_grad() {}
    virtual void init_params(Rng& rng) { (void)rng; }
    virtual std::string kind() const = 0;
};

// Fully connected layer, out_j = act(sum_k W[k][j] x_k + b_j).
class DenseLayer : public Layer {
public:
    DenseLayer(int in, int out, Activation act);

    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Tensor*>&, std::vector<Tensor*>&,
                        std::vector<std::string>&, const std::string&) override;
    void zero_grad() override;
    void init_params(Rng& rng) override;
    std::string kind() const override { return "dense"; }

    int in_size() const { return weights.dim(0); }
    int out_size() const { return weights.dim(1); }

    Tensor weights; // [in x out]
    Tensor bias;    // [out]
    Activation activation = Activation::linear;
    Tensor grad_weights;
    Tensor grad_bias;

private:
    Tensor apply(const Tensor& in) const;
    Tensor input_;  // cache
    Tensor output_; // cache (post-activation)
};

// Single-vector convenience matching the spec shape of the operation.
Tensor dense_forward(const DenseLayer& layer, const Tensor& x);

// One LSTM memory cell with per-gate weights acting on [s_prev, x_t].
// squash is the nonlinearity of the candidate (Eq. form: tanh(W_c z + b_c))
// and of the cell output; the gate nonlinearity is always the sigmoid.
struct LstmCell {
    Tensor w_i, w_f, w_o, w_c; // each [(hidden+input) x hidden]
    Tensor b_i, b_f, b_o, b_c; // each [hidden]
    Activation squash = Activation::tanh;

    int hidden() const { return w_i.dim(1); }
    int input() const { return w_i.dim(0) - w_i.dim(1); }
};

// One recurrence step: returns (s_t, c_t).
std::pair<Tensor, Tensor> lstm_step(const LstmCell& cell, const Tensor& x_t,
                                    const Tensor& s_prev, const Tensor& c_prev);

// Trainable stacked-sequence LSTM layer, [B x T x I] -> [B x T x H].
// Gate pre-activations are packed column-wise as [i | f | o | c]; the input
// contribution X·w_x is lifted out of the time loop as one gemm.
class LstmLayer : public Layer {
public:
    LstmLayer(int input, int hidden, Activation squash = Activation::tanh);

    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Tensor*>&, std::vector<Tensor*>&,
                        std::vector<std::string>&, const std::string&) override;
    void zero_grad() override;
    void init_params(Rng& rng) override;
    std::string kind() const override { return "lstm"; }

    int input_size() const { return w_x.dim(0); }
    int hidden_size() const { return w_s.dim(0); }

    // Exposes the packed weights as the per-gate cell view so the
    // single-step contract can be checked against the batched path.
    LstmCell to_cell() const;

    Tensor w_x;  // [I x 4H]
    Tensor w_s;  // [H x 4H]
    Tensor bias; // [4H]
    Activation squash = Activation::tanh;
    Tensor grad_w_x, grad_w_s, grad_bias;

private:
    // caches (t-major)
    Tensor x_tm_;      // [T x B x I]
    Tensor gates_;     // [T x B x 4H], post-nonlinearity
    Tensor s_seq_;     // [(T+1) x B x H]
    Tensor c_seq_;     // [(T+1) x B x H]
    Tensor squash_c_;  // [T x B x H]
    // backward workspaces, reused across steps and batches
    Tensor ws_ds_, ws_dc_, ws_sqg_, ws_ds_rec_, ws_dc_rec_;
};

// 1D convolution over time with kernel width 2, valid padding:
// y[t][f] = act(sum_{k in {0,1}} sum_c K[f][k][c] x[t+k][c] + b_f).
class Conv1dLayer : public Layer {
public:
    static constexpr int kKernelWidth = 2;

    Conv1dLayer(int in_channels, int filters, Activation act = Activation::relu);

    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(std::vector<Tensor*>&, std::vector<Tensor*>&,
                        std::vector<std::string>&, const std::string&) override;
    void zero_grad() override;
    void init_params(Rng& rng) override;
    std::string kind() const override { return "conv1d"; }

    int channels() const { return kernels.dim(0) / kKernelWidth; }
    int filters() const { return kernels.dim(1); }

    Tensor kernels; // [2C x F], rows ordered [x_t channels.., x_{t+1} channels..]
    Tensor bias;    // [F]
    Activation activation = Activation::relu;
    Tensor grad_kernels, grad_bias;

private:
    Tensor apply(const Tensor& in, Tensor* im2col_out) const;
    Tensor im2col_; // cache [B*(T-1) x 2C]
    Tensor output_; // cache
    int batch_ = 0, t_in_ = 0;
};

// Single-window convenience, x: [T x C] -> [(T-1) x F].
Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x);

// Max pooling over time, [B x T x C] -> [B x floor(T/size) x C]. The
// paper's setting is size 1, which makes this the identity.
class MaxPool1dLayer : public Layer {
public:
    explicit MaxPool1dLayer(int size);

    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "maxpool1d"; }

    int size() const { return size_; }

private:
    int size_ = 1;
    std::vector<int> argmax_;
    int in_t_ = 0, batch_ = 0, channels_ = 0;
};

// Inverted dropout: units zeroed with probability rate during training,
// survivors scaled by 1/(1-rate); identity at inference.
class DropoutLayer : public Layer {
public:
    explicit DropoutLayer(double rate);

    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "dropout"; }

    double rate() const { return rate_; }

private:
    double rate_ = 0.0;
    Tensor mask_;
};

// Free-standing dropout op (training semantics as above).
Tensor dropout_apply(const Tensor& x, double rate, bool training, Rng& rng);

// [B x T x C] -> [B x T*C]; row-major layout makes this a reshape.
class FlattenLayer : public Layer {
public:
    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "flatten"; }

private:
    int batch_ = 0, t_ = 0, c_ = 0;
};

// Selects the last timestep: [B x T x H] -> [B x H].
class LastStepLayer : public Layer {
public:
    Tensor forward_train(const Tensor& in, Rng& rng) override;
    Tensor infer(const Tensor& in) const override;
    Tensor backward(const Tensor& grad_out) override;
    std::string kind() const override { return "last_step"; }

private:
    int batch_ = 0, t_ = 0, h_ = 0;
};

} // namespace pmcast
