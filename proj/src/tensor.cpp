#include "pmcast/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmcast/errors.hpp"

namespace pmcast {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EigenRowMat>;
using ConstMap = Eigen::Map<const EigenRowMat>;

} // namespace

Tensor::Tensor(int n) : ndim_(1), dims_{static_cast<std::size_t>(n), 1, 1} {
    if (n < 0) throw ShapeError("tensor extent must be non-negative");
    data_.assign(static_cast<std::size_t>(n), 0.0);
}

Tensor::Tensor(int rows, int cols)
    : ndim_(2),
      dims_{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), 1} {
    if (rows < 0 || cols < 0) throw ShapeError("tensor extents must be non-negative");
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor::Tensor(int d0, int d1, int d2)
    : ndim_(3), dims_{static_cast<std::size_t>(d0), static_cast<std::size_t>(d1),
                      static_cast<std::size_t>(d2)} {
    if (d0 < 0 || d1 < 0 || d2 < 0)
        throw ShapeError("tensor extents must be non-negative");
    data_.assign(static_cast<std::size_t>(d0) * d1 * d2, 0.0);
}

Tensor Tensor::zeros_like(const Tensor& other) {
    Tensor t;
    t.ndim_ = other.ndim_;
    t.dims_ = other.dims_;
    t.data_.assign(other.data_.size(), 0.0);
    return t;
}

void Tensor::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < ndim_; ++i) {
        if (i) os << 'x';
        os << dims_[static_cast<std::size_t>(i)];
    }
    os << ']';
    return os.str();
}

MatView as_mat(Tensor& t) {
    if (t.ndim() != 2) throw ShapeError("expected 2D tensor, got " + t.shape_str());
    return {t.data(), t.dim(0), t.dim(1)};
}

ConstMatView as_mat(const Tensor& t) {
    if (t.ndim() != 2) throw ShapeError("expected 2D tensor, got " + t.shape_str());
    return {t.data(), t.dim(0), t.dim(1)};
}

MatView seq_as_mat(Tensor& t) {
    if (t.ndim() != 3) throw ShapeError("expected 3D tensor, got " + t.shape_str());
    return {t.data(), t.dim(0) * t.dim(1), t.dim(2)};
}

ConstMatView seq_as_mat(const Tensor& t) {
    if (t.ndim() != 3) throw ShapeError("expected 3D tensor, got " + t.shape_str());
    return {t.data(), t.dim(0) * t.dim(1), t.dim(2)};
}

void gemm(double alpha, ConstMatView a, bool trans_a, ConstMatView b,
          bool trans_b, double beta, MatView c) {
    const int m = trans_a ? a.cols : a.rows;
    const int ka = trans_a ? a.rows : a.cols;
    const int kb = trans_b ? b.cols : b.rows;
    const int n = trans_b ? b.rows : b.cols;
    if (ka != kb || c.rows != m || c.cols != n) {
        std::ostringstream os;
        os << "gemm shape mismatch: op(A)=" << m << 'x' << ka << " op(B)=" << kb
           << 'x' << n << " C=" << c.rows << 'x' << c.cols;
        throw ShapeError(os.str());
    }
    ConstMap ma(a.data, a.rows, a.cols);
    ConstMap mb(b.data, b.rows, b.cols);
    Map mc(c.data, c.rows, c.cols);
    if (beta == 0.0) {
        if (trans_a && trans_b)
            mc.noalias() = alpha * (ma.transpose() * mb.transpose());
        else if (trans_a)
            mc.noalias() = alpha * (ma.transpose() * mb);
        else if (trans_b)
            mc.noalias() = alpha * (ma * mb.transpose());
        else
            mc.noalias() = alpha * (ma * mb);
    } else {
        if (beta != 1.0) mc *= beta;
        if (trans_a && trans_b)
            mc.noalias() += alpha * (ma.transpose() * mb.transpose());
        else if (trans_a)
            mc.noalias() += alpha * (ma.transpose() * mb);
        else if (trans_b)
            mc.noalias() += alpha * (ma * mb.transpose());
        else
            mc.noalias() += alpha * (ma * mb);
    }
}

void matmul(const Tensor& a, const Tensor& b, Tensor& c) {
    gemm(1.0, as_mat(a), false, as_mat(b), false, 0.0, as_mat(c));
}

void add_row_vector(MatView m, std::span<const double> row) {
    if (static_cast<std::size_t>(m.cols) != row.size())
        throw ShapeError("add_row_vector width mismatch");
    Map mm(m.data, m.rows, m.cols);
    Eigen::Map<const Eigen::RowVectorXd> r(row.data(), m.cols);
    mm.rowwise() += r;
}

void col_sum_acc(ConstMatView m, std::span<double> out) {
    if (static_cast<std::size_t>(m.cols) != out.size())
        throw ShapeError("col_sum_acc width mismatch");
    ConstMap mm(m.data, m.rows, m.cols);
    Eigen::Map<Eigen::RowVectorXd> o(out.data(), m.cols);
    o += mm.colwise().sum();
}

} // namespace pmcast
