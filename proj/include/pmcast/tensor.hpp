#pragma once

#include <array>
#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace pmcast {

// 64-byte-aligned storage. SIMD kernels peel loops based on pointer
// alignment; a fixed alignment keeps floating-point summation order (and
// therefore results) independent of where the allocator happens to place a
// buffer, which the bit-reproducibility guarantees rely on.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t kAlign = 64;

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(kAlign)));
    }
    void deallocate(T* p, std::size_t n) {
        ::operator delete(p, n * sizeof(T), std::align_val_t(kAlign));
    }
    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const {
        return true;
    }
};

// Dense row-major array of doubles with up to three extents. Carries
// weights, activations and gradients throughout the network code.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(int n);
    Tensor(int rows, int cols);
    Tensor(int d0, int d1, int d2);

    static Tensor zeros_like(const Tensor& other);

    int ndim() const { return ndim_; }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> flat() { return {data_.data(), data_.size()}; }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    double& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
    double operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i) * dims_[1] + j];
    }
    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * dims_[1] + j];
    }
    double& operator()(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }
    double operator()(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k];
    }

    bool same_shape(const Tensor& other) const {
        return ndim_ == other.ndim_ && dims_ == other.dims_;
    }

    void fill(double value);
    void zero() { fill(0.0); }
    bool all_finite() const;
    std::string shape_str() const;

private:
    int ndim_ = 0;
    std::array<std::size_t, 3> dims_{0, 1, 1};
    std::vector<double, AlignedAllocator<double>> data_;
};

// Contiguous row-major matrix view; lets 3D [B x T x C] batches feed the
// same gemm as plain 2D tensors.
struct MatView {
    double* data = nullptr;
    int rows = 0;
    int cols = 0;
};

struct ConstMatView {
    const double* data = nullptr;
    int rows = 0;
    int cols = 0;
    ConstMatView() = default;
    ConstMatView(const MatView& m) : data(m.data), rows(m.rows), cols(m.cols) {}
    ConstMatView(const double* d, int r, int c) : data(d), rows(r), cols(c) {}
};

MatView as_mat(Tensor& t);                // 2D tensor
ConstMatView as_mat(const Tensor& t);
MatView seq_as_mat(Tensor& t);            // 3D [B x T x C] -> [B*T x C]
ConstMatView seq_as_mat(const Tensor& t);

// C = alpha * op(A) * op(B) + beta * C
void gemm(double alpha, ConstMatView a, bool trans_a, ConstMatView b,
          bool trans_b, double beta, MatView c);

// Convenience wrappers over gemm for 2D tensors.
void matmul(const Tensor& a, const Tensor& b, Tensor& c);

void add_row_vector(MatView m, std::span<const double> row);   // m[r,:] += row
void col_sum_acc(ConstMatView m, std::span<double> out);       // out += sum_r m[r,:]

} // namespace pmcast
