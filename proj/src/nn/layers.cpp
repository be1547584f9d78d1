#include "pmcast/nn/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "pmcast/errors.hpp"

namespace pmcast {

namespace {

using RowArr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ArrMap = Eigen::Map<RowArr>;
using ConstArrMap = Eigen::Map<const RowArr>;
using StridedArrMap = Eigen::Map<RowArr, 0, Eigen::OuterStride<>>;
using ConstStridedArrMap = Eigen::Map<const RowArr, 0, Eigen::OuterStride<>>;

void glorot_fill(Tensor& w, int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w.flat()) v = uniform(rng, -limit, limit);
}

// [B x T x C] -> [T x B x C]
Tensor bt_to_tb(const Tensor& x) {
    const int b = x.dim(0), t = x.dim(1), c = x.dim(2);
    Tensor out(t, b, c);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < t; ++j) {
            const double* src = x.data() + (static_cast<std::size_t>(i) * t + j) * c;
            std::copy(src, src + c, out.data() + (static_cast<std::size_t>(j) * b + i) * c);
        }
    return out;
}

// [T x B x C] -> [B x T x C]
Tensor tb_to_bt(const Tensor& x) {
    const int t = x.dim(0), b = x.dim(1), c = x.dim(2);
    Tensor out(b, t, c);
    for (int j = 0; j < t; ++j)
        for (int i = 0; i < b; ++i) {
            const double* src = x.data() + (static_cast<std::size_t>(j) * b + i) * c;
            std::copy(src, src + c, out.data() + (static_cast<std::size_t>(i) * t + j) * c);
        }
    return out;
}


// [B x cols] slice at index t of a [T x B x cols] tensor.
MatView slice_mat(Tensor& x, int t) {
    const int b = x.dim(1), c = x.dim(2);
    return {x.data() + static_cast<std::size_t>(t) * b * c, b, c};
}

ConstMatView slice_mat(const Tensor& x, int t) {
    const int b = x.dim(1), c = x.dim(2);
    return {x.data() + static_cast<std::size_t>(t) * b * c, b, c};
}

ArrMap arr(MatView m) { return ArrMap(m.data, m.rows, m.cols); }
ConstArrMap arr(ConstMatView m) { return ConstArrMap(m.data, m.rows, m.cols); }

// Column block [rows x n] starting at column c0 of a row-major matrix.
StridedArrMap col_block(MatView m, int c0, int n) {
    return StridedArrMap(m.data + c0, m.rows, n, Eigen::OuterStride<>(m.cols));
}
ConstStridedArrMap col_block(ConstMatView m, int c0, int n) {
    return ConstStridedArrMap(m.data + c0, m.rows, n, Eigen::OuterStride<>(m.cols));
}

void ensure_mat(Tensor& t, int rows, int cols) {
    if (t.ndim() != 2 || t.dim(0) != rows || t.dim(1) != cols) t = Tensor(rows, cols);
}

// out = f'(y) with the derivative reconstructed from the output y
void squash_grad_into(ConstMatView y, MatView out, Activation a) {
    auto yv = arr(y);
    auto ov = arr(out);
    switch (a) {
        case Activation::linear: ov.setOnes(); return;
        case Activation::sigmoid: ov = yv * (1.0 - yv); return;
        case Activation::relu: ov = (yv > 0.0).cast<double>(); return;
        case Activation::tanh: ov = 1.0 - yv.square(); return;
    }
}

template <typename Derived>
void sigmoid_eigen(Eigen::ArrayBase<Derived>& x) {
    x = 1.0 / (1.0 + (-x).exp());
}

template <typename Derived>
void squash_eigen(Eigen::ArrayBase<Derived>& x, Activation a) {
    switch (a) {
        case Activation::linear:
            return;
        case Activation::sigmoid:
            sigmoid_eigen(x);
            return;
        case Activation::relu:
            x = x.max(0.0);
            return;
        case Activation::tanh: {
            RowArr ax = x.abs();
            RowArr e = (-2.0 * ax).exp();
            x = x.sign() * (1.0 - e) / (1.0 + e);
            return;
        }
    }
}

void expect_ndim(const Tensor& t, int ndim, const char* who) {
    if (t.ndim() != ndim) {
        std::ostringstream os;
        os << who << ": expected " << ndim << "D input, got " << t.shape_str();
        throw ShapeError(os.str());
    }
}

} // namespace

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(int in, int out, Activation act)
    : weights(in, out), bias(out), activation(act),
      grad_weights(in, out), grad_bias(out) {}

Tensor DenseLayer::apply(const Tensor& in) const {
    expect_ndim(in, 2, "dense");
    if (in.dim(1) != in_size()) {
        std::ostringstream os;
        os << "dense: input width " << in.dim(1) << " does not match layer input " << in_size();
        throw ShapeError(os.str());
    }
    Tensor out(in.dim(0), out_size());
    gemm(1.0, as_mat(in), false, as_mat(weights), false, 0.0, as_mat(out));
    add_row_vector(as_mat(out), bias.flat());
    apply_activation(activation, out.flat());
    return out;
}

Tensor DenseLayer::forward_train(const Tensor& in, Rng&) {
    input_ = in;
    output_ = apply(in);
    return output_;
}

Tensor DenseLayer::infer(const Tensor& in) const { return apply(in); }

Tensor DenseLayer::backward(const Tensor& grad_out) {
    if (!grad_out.same_shape(output_))
        throw ShapeError("dense backward: gradient shape " + grad_out.shape_str() +
                         " does not match output " + output_.shape_str());
    Tensor du = grad_out;
    scale_by_activation_grad(activation, output_.flat(), du.flat());
    gemm(1.0, as_mat(input_), true, as_mat(du), false, 1.0, as_mat(grad_weights));
    col_sum_acc(as_mat(du), grad_bias.flat());
    Tensor dx(input_.dim(0), in_size());
    gemm(1.0, as_mat(du), false, as_mat(weights), true, 0.0, as_mat(dx));
    return dx;
}

void DenseLayer::collect_params(std::vector<Tensor*>& params, std::vector<Tensor*>& grads,
                                std::vector<std::string>& names, const std::string& prefix) {
    params.push_back(&weights);
    grads.push_back(&grad_weights);
    names.push_back(prefix + ".W");
    params.push_back(&bias);
    grads.push_back(&grad_bias);
    names.push_back(prefix + ".b");
}

void DenseLayer::zero_grad() {
    grad_weights.zero();
    grad_bias.zero();
}

void DenseLayer::init_params(Rng& rng) {
    glorot_fill(weights, in_size(), out_size(), rng);
    bias.zero();
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x) {
    if (x.ndim() != 1)
        throw ShapeError("dense_forward expects a 1D input, got " + x.shape_str());
    if (x.dim(0) != layer.in_size()) {
        std::ostringstream os;
        os << "dense_forward: input length " << x.dim(0) << " does not match layer input "
           << layer.in_size();
        throw ShapeError(os.str());
    }
    Tensor batch(1, x.dim(0));
    std::copy(x.flat().begin(), x.flat().end(), batch.flat().begin());
    Tensor out2 = layer.infer(batch);
    Tensor out(out2.dim(1));
    std::copy(out2.flat().begin(), out2.flat().end(), out.flat().begin());
    return out;
}

// ---------------------------------------------------------------------------
// LstmCell / lstm_step

std::pair<Tensor, Tensor> lstm_step(const LstmCell& cell, const Tensor& x_t,
                                    const Tensor& s_prev, const Tensor& c_prev) {
    const int h = cell.hidden();
    const int in = cell.input();
    if (x_t.ndim() != 1 || x_t.dim(0) != in)
        throw ShapeError("lstm_step: x_t must be a vector of length " + std::to_string(in));
    if (s_prev.ndim() != 1 || s_prev.dim(0) != h || c_prev.ndim() != 1 || c_prev.dim(0) != h)
        throw ShapeError("lstm_step: state vectors must have length " + std::to_string(h));
    if (!cell.w_f.same_shape(cell.w_i) || !cell.w_o.same_shape(cell.w_i) ||
        !cell.w_c.same_shape(cell.w_i))
        throw ShapeError("lstm_step: gate weight matrices must share one shape");

    auto affine = [&](const Tensor& w, const Tensor& b, Tensor& out) {
        for (int j = 0; j < h; ++j) {
            double acc = b(j);
            for (int k = 0; k < h; ++k) acc += s_prev(k) * w(k, j);
            for (int k = 0; k < in; ++k) acc += x_t(k) * w(h + k, j);
            out(j) = acc;
        }
    };

    Tensor gi(h), gf(h), go(h), gc(h);
    affine(cell.w_i, cell.b_i, gi);
    affine(cell.w_f, cell.b_f, gf);
    affine(cell.w_o, cell.b_o, go);
    affine(cell.w_c, cell.b_c, gc);
    vec_sigmoid(gi.flat());
    vec_sigmoid(gf.flat());
    vec_sigmoid(go.flat());
    apply_activation(cell.squash, gc.flat());

    Tensor c_t(h), s_t(h);
    for (int j = 0; j < h; ++j) c_t(j) = gf(j) * c_prev(j) + gi(j) * gc(j);
    Tensor sc = c_t;
    apply_activation(cell.squash, sc.flat());
    for (int j = 0; j < h; ++j) s_t(j) = go(j) * sc(j);

    if (!c_t.all_finite() || !s_t.all_finite())
        throw NumericError("lstm_step produced a non-finite state");
    return {s_t, c_t};
}

// ---------------------------------------------------------------------------
// LstmLayer

LstmLayer::LstmLayer(int input, int hidden, Activation squash_act)
    : w_x(input, 4 * hidden), w_s(hidden, 4 * hidden), bias(4 * hidden),
      squash(squash_act), grad_w_x(input, 4 * hidden), grad_w_s(hidden, 4 * hidden),
      grad_bias(4 * hidden) {}

Tensor LstmLayer::forward_train(const Tensor& in, Rng&) {
    expect_ndim(in, 3, "lstm");
    const int b = in.dim(0), t = in.dim(1);
    const int h = hidden_size();
    if (in.dim(2) != input_size()) {
        std::ostringstream os;
        os << "lstm: input channels " << in.dim(2) << " do not match layer input "
           << input_size();
        throw ShapeError(os.str());
    }

    x_tm_ = bt_to_tb(in);
    gates_ = Tensor(t, b, 4 * h);
    gemm(1.0, seq_as_mat(x_tm_), false, as_mat(w_x), false, 0.0, seq_as_mat(gates_));

    s_seq_ = Tensor(t + 1, b, h);
    c_seq_ = Tensor(t + 1, b, h);
    squash_c_ = Tensor(t, b, h);

    for (int step = 0; step < t; ++step) {
        MatView g = slice_mat(gates_, step);
        gemm(1.0, slice_mat(s_seq_, step), false, as_mat(w_s), false, 1.0, g);
        add_row_vector(g, bias.flat());

        auto ifo = col_block(g, 0, 3 * h);
        sigmoid_eigen(ifo);
        auto cand = col_block(g, 3 * h, h);
        squash_eigen(cand, squash);

        auto gate_i = col_block(ConstMatView(g), 0, h);
        auto gate_f = col_block(ConstMatView(g), h, h);
        auto gate_o = col_block(ConstMatView(g), 2 * h, h);
        auto gate_c = col_block(ConstMatView(g), 3 * h, h);

        auto c_prev = arr(slice_mat(std::as_const(c_seq_), step));
        auto c_t = arr(slice_mat(c_seq_, step + 1));
        c_t = gate_f * c_prev + gate_i * gate_c;

        auto sc = arr(slice_mat(squash_c_, step));
        sc = c_t;
        squash_eigen(sc, squash);

        auto s_t = arr(slice_mat(s_seq_, step + 1));
        s_t = gate_o * sc;
    }

    // out[b, step, :] = s_seq_[step+1, b, :]
    Tensor out(b, t, h);
    for (int step = 0; step < t; ++step) {
        ConstMatView s = slice_mat(std::as_const(s_seq_), step + 1);
        for (int i = 0; i < b; ++i)
            std::copy(s.data + static_cast<std::size_t>(i) * h,
                      s.data + static_cast<std::size_t>(i + 1) * h,
                      out.data() + (static_cast<std::size_t>(i) * t + step) * h);
    }
    return out;
}

Tensor LstmLayer::infer(const Tensor& in) const {
    expect_ndim(in, 3, "lstm");
    const int b = in.dim(0), t = in.dim(1);
    const int h = hidden_size();
    if (in.dim(2) != input_size())
        throw ShapeError("lstm: input channel mismatch");

    Tensor x_tm = bt_to_tb(in);
    Tensor gates(t, b, 4 * h);
    gemm(1.0, seq_as_mat(x_tm), false, as_mat(w_x), false, 0.0, seq_as_mat(gates));

    Tensor s_prev(b, h), c_prev(b, h), c_t(b, h), sc(b, h);
    Tensor out(b, t, h);
    for (int step = 0; step < t; ++step) {
        MatView g = slice_mat(gates, step);
        gemm(1.0, as_mat(s_prev), false, as_mat(w_s), false, 1.0, g);
        add_row_vector(g, bias.flat());
        auto ifo = col_block(g, 0, 3 * h);
        sigmoid_eigen(ifo);
        auto cand = col_block(g, 3 * h, h);
        squash_eigen(cand, squash);

        auto gate_i = col_block(ConstMatView(g), 0, h);
        auto gate_f = col_block(ConstMatView(g), h, h);
        auto gate_o = col_block(ConstMatView(g), 2 * h, h);
        auto gate_c = col_block(ConstMatView(g), 3 * h, h);

        auto cp = arr(as_mat(std::as_const(c_prev)));
        auto ct = arr(as_mat(c_t));
        ct = gate_f * cp + gate_i * gate_c;
        auto scm = arr(as_mat(sc));
        scm = ct;
        squash_eigen(scm, squash);
        auto sp = arr(as_mat(s_prev));
        sp = gate_o * scm;
        std::swap(c_prev, c_t);

        for (int i = 0; i < b; ++i)
            std::copy(s_prev.data() + static_cast<std::size_t>(i) * h,
                      s_prev.data() + static_cast<std::size_t>(i + 1) * h,
                      out.data() + (static_cast<std::size_t>(i) * t + step) * h);
    }
    return out;
}

Tensor LstmLayer::backward(const Tensor& grad_out) {
    const int t = gates_.dim(0), b = gates_.dim(1);
    const int h = hidden_size();
    if (grad_out.ndim() != 3 || grad_out.dim(0) != b || grad_out.dim(1) != t ||
        grad_out.dim(2) != h)
        throw ShapeError("lstm backward: gradient shape " + grad_out.shape_str());

    Tensor dout_tm = bt_to_tb(grad_out);
    Tensor dgates(t, b, 4 * h);
    ensure_mat(ws_ds_, b, h);
    ensure_mat(ws_dc_, b, h);
    ensure_mat(ws_sqg_, b, h);
    ensure_mat(ws_ds_rec_, b, h);
    ensure_mat(ws_dc_rec_, b, h);
    ws_ds_rec_.zero();
    ws_dc_rec_.zero();

    for (int step = t - 1; step >= 0; --step) {
        ConstMatView g = slice_mat(std::as_const(gates_), step);
        auto gate_i = col_block(g, 0, h);
        auto gate_f = col_block(g, h, h);
        auto gate_o = col_block(g, 2 * h, h);
        auto gate_c = col_block(g, 3 * h, h);
        ConstMatView sc_view = slice_mat(std::as_const(squash_c_), step);
        auto sc = arr(sc_view);
        auto c_prev = arr(slice_mat(std::as_const(c_seq_), step));

        auto ds = arr(as_mat(ws_ds_));
        auto dc = arr(as_mat(ws_dc_));
        auto sqg = arr(as_mat(ws_sqg_));
        auto ds_rec = arr(as_mat(ws_ds_rec_));
        auto dc_rec = arr(as_mat(ws_dc_rec_));

        ds = arr(slice_mat(std::as_const(dout_tm), step)) + ds_rec;
        squash_grad_into(sc_view, as_mat(ws_sqg_), squash);
        dc = dc_rec + ds * gate_o * sqg;

        MatView da = slice_mat(dgates, step);
        col_block(da, 0, h) = (dc * gate_c) * gate_i * (1.0 - gate_i);
        col_block(da, h, h) = (dc * c_prev) * gate_f * (1.0 - gate_f);
        col_block(da, 2 * h, h) = (ds * sc) * gate_o * (1.0 - gate_o);
        switch (squash) { // squash'(candidate), from the strided gate block
            case Activation::linear: sqg.setOnes(); break;
            case Activation::sigmoid: sqg = gate_c * (1.0 - gate_c); break;
            case Activation::relu: sqg = (gate_c > 0.0).cast<double>(); break;
            case Activation::tanh: sqg = 1.0 - gate_c.square(); break;
        }
        col_block(da, 3 * h, h) = (dc * gate_i) * sqg;
        dc_rec = dc * gate_f;

        gemm(1.0, slice_mat(std::as_const(s_seq_), step), true, ConstMatView(da), false, 1.0,
             as_mat(grad_w_s));
        gemm(1.0, ConstMatView(da), false, as_mat(w_s), true, 0.0, as_mat(ws_ds_rec_));
    }

    col_sum_acc(seq_as_mat(std::as_const(dgates)), grad_bias.flat());
    gemm(1.0, seq_as_mat(std::as_const(x_tm_)), true, seq_as_mat(std::as_const(dgates)), false,
         1.0, as_mat(grad_w_x));
    Tensor dx_tm(t, b, input_size());
    gemm(1.0, seq_as_mat(std::as_const(dgates)), false, as_mat(w_x), true, 0.0,
         seq_as_mat(dx_tm));
    return tb_to_bt(dx_tm);
}

void LstmLayer::collect_params(std::vector<Tensor*>& params, std::vector<Tensor*>& grads,
                               std::vector<std::string>& names, const std::string& prefix) {
    params.push_back(&w_x);
    grads.push_back(&grad_w_x);
    names.push_back(prefix + ".w_x");
    params.push_back(&w_s);
    grads.push_back(&grad_w_s);
    names.push_back(prefix + ".w_s");
    params.push_back(&bias);
    grads.push_back(&grad_bias);
    names.push_back(prefix + ".b");
}

void LstmLayer::zero_grad() {
    grad_w_x.zero();
    grad_w_s.zero();
    grad_bias.zero();
}

void LstmLayer::init_params(Rng& rng) {
    // Glorot per gate: fan_in = H + I (the concatenated state), fan_out = H.
    const double limit = std::sqrt(6.0 / (hidden_size() + input_size() + hidden_size()));
    for (double& v : w_x.flat()) v = uniform(rng, -limit, limit);
    for (double& v : w_s.flat()) v = uniform(rng, -limit, limit);
    bias.zero();
}

LstmCell LstmLayer::to_cell() const {
    const int h = hidden_size(), in = input_size();
    LstmCell cell;
    cell.squash = squash;
    auto extract = [&](int block) {
        Tensor w(h + in, h);
        for (int k = 0; k < h; ++k)
            for (int j = 0; j < h; ++j) w(k, j) = w_s(k, block * h + j);
        for (int k = 0; k < in; ++k)
            for (int j = 0; j < h; ++j) w(h + k, j) = w_x(k, block * h + j);
        return w;
    };
    auto extract_bias = [&](int block) {
        Tensor v(h);
        for (int j = 0; j < h; ++j) v(j) = bias(block * h + j);
        return v;
    };
    cell.w_i = extract(0);
    cell.w_f = extract(1);
    cell.w_o = extract(2);
    cell.w_c = extract(3);
    cell.b_i = extract_bias(0);
    cell.b_f = extract_bias(1);
    cell.b_o = extract_bias(2);
    cell.b_c = extract_bias(3);
    return cell;
}

// ---------------------------------------------------------------------------
// Conv1dLayer

Conv1dLayer::Conv1dLayer(int in_channels, int filters, Activation act)
    : kernels(kKernelWidth * in_channels, filters), bias(filters), activation(act),
      grad_kernels(kKernelWidth * in_channels, filters), grad_bias(filters) {}

Tensor Conv1dLayer::apply(const Tensor& in, Tensor* im2col_out) const {
    expect_ndim(in, 3, "conv1d");
    const int b = in.dim(0), t = in.dim(1), c = in.dim(2);
    if (c != channels())
        throw ShapeError("conv1d: input channels " + std::to_string(c) +
                         " do not match layer channels " + std::to_string(channels()));
    if (t < kKernelWidth)
        throw SizeError("conv1d: needs at least " + std::to_string(kKernelWidth) +
                        " timesteps, got " + std::to_string(t));
    const int t_out = t - kKernelWidth + 1;

    Tensor cols(b * t_out, kKernelWidth * c);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < t_out; ++j) {
            double* row = cols.data() + (static_cast<std::size_t>(i) * t_out + j) * kKernelWidth * c;
            const double* src = in.data() + (static_cast<std::size_t>(i) * t + j) * c;
            std::copy(src, src + kKernelWidth * c, row); // two consecutive timesteps
        }
    }

    Tensor u(b * t_out, filters());
    gemm(1.0, as_mat(cols), false, as_mat(kernels), false, 0.0, as_mat(u));
    add_row_vector(as_mat(u), bias.flat());
    apply_activation(activation, u.flat());

    Tensor out(b, t_out, filters());
    std::copy(u.flat().begin(), u.flat().end(), out.flat().begin());
    if (im2col_out) *im2col_out = std::move(cols);
    return out;
}

Tensor Conv1dLayer::forward_train(const Tensor& in, Rng&) {
    batch_ = in.dim(0);
    t_in_ = in.ndim() == 3 ? in.dim(1) : 0;
    output_ = apply(in, &im2col_);
    return output_;
}

Tensor Conv1dLayer::infer(const Tensor& in) const { return apply(in, nullptr); }

Tensor Conv1dLayer::backward(const Tensor& grad_out) {
    if (!grad_out.same_shape(output_))
        throw ShapeError("conv1d backward: gradient shape " + grad_out.shape_str());
    const int b = batch_, t = t_in_, c = channels();
    const int t_out = t - kKernelWidth + 1;

    Tensor du = grad_out;
    scale_by_activation_grad(activation, output_.flat(), du.flat());
    ConstMatView du_m = seq_as_mat(std::as_const(du));

    gemm(1.0, as_mat(std::as_const(im2col_)), true, du_m, false, 1.0, as_mat(grad_kernels));
    col_sum_acc(du_m, grad_bias.flat());

    Tensor dcols(b * t_out, kKernelWidth * c);
    gemm(1.0, du_m, false, as_mat(kernels), true, 0.0, as_mat(dcols));

    Tensor dx(b, t, c);
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < t_out; ++j) {
            const double* row =
                dcols.data() + (static_cast<std::size_t>(i) * t_out + j) * kKernelWidth * c;
            double* dst = dx.data() + (static_cast<std::size_t>(i) * t + j) * c;
            for (int k = 0; k < kKernelWidth * c; ++k) dst[k] += row[k];
        }
    }
    return dx;
}

void Conv1dLayer::collect_params(std::vector<Tensor*>& params, std::vector<Tensor*>& grads,
                                 std::vector<std::string>& names, const std::string& prefix) {
    params.push_back(&kernels);
    grads.push_back(&grad_kernels);
    names.push_back(prefix + ".K");
    params.push_back(&bias);
    grads.push_back(&grad_bias);
    names.push_back(prefix + ".b");
}

void Conv1dLayer::zero_grad() {
    grad_kernels.zero();
    grad_bias.zero();
}

void Conv1dLayer::init_params(Rng& rng) {
    glorot_fill(kernels, kKernelWidth * channels(), kKernelWidth * filters(), rng);
    bias.zero();
}

Tensor conv1d_forward(const Conv1dLayer& layer, const Tensor& x) {
    if (x.ndim() != 2)
        throw ShapeError("conv1d_forward expects a 2D [T x channels] input, got " + x.shape_str());
    Tensor batch(1, x.dim(0), x.dim(1));
    std::copy(x.flat().begin(), x.flat().end(), batch.flat().begin());
    Tensor out3 = layer.infer(batch);
    Tensor out(out3.dim(1), out3.dim(2));
    std::copy(out3.flat().begin(), out3.flat().end(), out.flat().begin());
    return out;
}

// ---------------------------------------------------------------------------
// MaxPool1dLayer

MaxPool1dLayer::MaxPool1dLayer(int size) : size_(size) {
    if (size < 1) throw ConfigError("max-pool size must be >= 1");
}

Tensor MaxPool1dLayer::forward_train(const Tensor& in, Rng&) {
    expect_ndim(in, 3, "maxpool1d");
    batch_ = in.dim(0);
    in_t_ = in.dim(1);
    channels_ = in.dim(2);
    if (size_ == 1) return in; // identity; backward is a pass-through
    const int t_out = in_t_ / size_;
    if (t_out == 0) throw SizeError("maxpool1d: window larger than sequence");
    Tensor out(batch_, t_out, channels_);
    argmax_.assign(static_cast<std::size_t>(batch_) * t_out * channels_, 0);
    for (int b = 0; b < batch_; ++b)
        for (int j = 0; j < t_out; ++j)
            for (int c = 0; c < channels_; ++c) {
                int best = j * size_;
                double best_v = in(b, best, c);
                for (int k = 1; k < size_; ++k) {
                    if (in(b, j * size_ + k, c) > best_v) {
                        best = j * size_ + k;
                        best_v = in(b, best, c);
                    }
                }
                out(b, j, c) = best_v;
                argmax_[(static_cast<std::size_t>(b) * t_out + j) * channels_ + c] = best;
            }
    return out;
}

Tensor MaxPool1dLayer::infer(const Tensor& in) const {
    if (size_ == 1) return in;
    MaxPool1dLayer tmp(size_);
    Rng dummy(0);
    return tmp.forward_train(in, dummy);
}

Tensor MaxPool1dLayer::backward(const Tensor& grad_out) {
    if (size_ == 1) return grad_out;
    const int t_out = in_t_ / size_;
    Tensor dx(batch_, in_t_, channels_);
    for (int b = 0; b < batch_; ++b)
        for (int j = 0; j < t_out; ++j)
            for (int c = 0; c < channels_; ++c) {
                int src = argmax_[(static_cast<std::size_t>(b) * t_out + j) * channels_ + c];
                dx(b, src, c) += grad_out(b, j, c);
            }
    return dx;
}

// ---------------------------------------------------------------------------
// DropoutLayer

Tensor dropout_apply(const Tensor& x, double rate, bool training, Rng& rng,
                     Tensor* mask_out);

Tensor dropout_apply(const Tensor& x, double rate, bool training, Rng& rng,
                     Tensor* mask_out) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        if (mask_out) {
            *mask_out = Tensor::zeros_like(x);
            mask_out->fill(1.0);
        }
        return x;
    }
    const double scale = 1.0 / (1.0 - rate);
    Tensor mask = Tensor::zeros_like(x);
    Tensor out = Tensor::zeros_like(x);
    const double* xd = x.data();
    double* md = mask.data();
    double* od = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        md[i] = (uniform01(rng) < rate) ? 0.0 : scale;
        od[i] = xd[i] * md[i];
    }
    if (mask_out) *mask_out = std::move(mask);
    return out;
}

Tensor dropout_apply(const Tensor& x, double rate, bool training, Rng& rng) {
    return dropout_apply(x, rate, training, rng, nullptr);
}

DropoutLayer::DropoutLayer(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout rate must be in [0, 1)");
}

Tensor DropoutLayer::forward_train(const Tensor& in, Rng& rng) {
    return dropout_apply(in, rate_, true, rng, &mask_);
}

Tensor DropoutLayer::infer(const Tensor& in) const { return in; }

Tensor DropoutLayer::backward(const Tensor& grad_out) {
    if (!grad_out.same_shape(mask_))
        throw ShapeError("dropout backward: gradient shape " + grad_out.shape_str());
    Tensor dx = grad_out;
    double* d = dx.data();
    const double* m = mask_.data();
    for (std::size_t i = 0; i < dx.size(); ++i) d[i] *= m[i];
    return dx;
}

// ---------------------------------------------------------------------------
// FlattenLayer

Tensor FlattenLayer::forward_train(const Tensor& in, Rng&) {
    expect_ndim(in, 3, "flatten");
    batch_ = in.dim(0);
    t_ = in.dim(1);
    c_ = in.dim(2);
    Tensor out(batch_, t_ * c_);
    std::copy(in.flat().begin(), in.flat().end(), out.flat().begin());
    return out;
}

Tensor FlattenLayer::infer(const Tensor& in) const {
    expect_ndim(in, 3, "flatten");
    Tensor out(in.dim(0), in.dim(1) * in.dim(2));
    std::copy(in.flat().begin(), in.flat().end(), out.flat().begin());
    return out;
}

Tensor FlattenLayer::backward(const Tensor& grad_out) {
    Tensor dx(batch_, t_, c_);
    std::copy(grad_out.flat().begin(), grad_out.flat().end(), dx.flat().begin());
    return dx;
}

// ---------------------------------------------------------------------------
// LastStepLayer

Tensor LastStepLayer::forward_train(const Tensor& in, Rng&) {
    expect_ndim(in, 3, "last_step");
    batch_ = in.dim(0);
    t_ = in.dim(1);
    h_ = in.dim(2);
    return infer(in);
}

Tensor LastStepLayer::infer(const Tensor& in) const {
    expect_ndim(in, 3, "last_step");
    const int b = in.dim(0), t = in.dim(1), h = in.dim(2);
    Tensor out(b, h);
    for (int i = 0; i < b; ++i) {
        const double* src = in.data() + (static_cast<std::size_t>(i) * t + (t - 1)) * h;
        std::copy(src, src + h, out.data() + static_cast<std::size_t>(i) * h);
    }
    return out;
}

Tensor LastStepLayer::backward(const Tensor& grad_out) {
    Tensor dx(batch_, t_, h_);
    for (int i = 0; i < batch_; ++i) {
        const double* src = grad_out.data() + static_cast<std::size_t>(i) * h_;
        double* dst = dx.data() + (static_cast<std::size_t>(i) * t_ + (t_ - 1)) * h_;
        std::copy(src, src + h_, dst);
    }
    return dx;
}

} // namespace pmcast
