#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "scclg/matrix.hpp"
#include "scclg/sparse.hpp"

/// Minimal reverse-mode differentiation over dense 64-bit matrices.
///
/// A Tensor is a shared handle to a graph node. Operations on tensors that
/// require gradients record their inputs and a backward closure; calling
/// backward() on a scalar walks the recorded graph in reverse topological
/// order and accumulates gradients into every reachable tensor that requires
/// them. Rank is either 0 (scalar, stored 1x1) or 2.
namespace scclg::ad {

struct Node {
    Matrix value;
    Matrix grad;  // empty until a gradient arrives
    int rank = 2;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void accumulate(const Matrix& g);
};

class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Matrix value);
    static Tensor parameter(Matrix value);
    static Tensor scalar(double value, bool requires_grad = false);

    /// Builds a graph node from precomputed forward values. `backward` receives
    /// the finished node and must push gradients into its parents. Used by
    /// fused operations outside this header.
    static Tensor from_op(Matrix value, std::vector<Tensor> inputs, std::function<void(Node&)> backward,
                          int rank = 2);

    bool defined() const { return node_ != nullptr; }
    const Matrix& value() const;
    /// Direct access for optimizers; leaves only.
    Matrix& mutable_value();
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    std::vector<std::size_t> shape() const;
    bool is_scalar() const;
    double item() const;

    bool requires_grad() const;
    bool has_grad() const;
    /// Gradient, or a zero matrix of the value's shape if none has arrived.
    Matrix grad() const;
    void zero_grad();

    /// Reverse sweep from this scalar. Throws ShapeError on non-scalars.
    void backward() const;

    /// Same value, no history.
    Tensor detach() const;

    const std::shared_ptr<Node>& node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
    std::shared_ptr<Node> node_;
};

Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Adds a 1 x cols row vector to every row of a.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor log_gamma(const Tensor& a);
Tensor relu(const Tensor& a);
/// Elementwise clamp; gradient passes only strictly inside (lo, hi).
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor slice_rows(const Tensor& a, std::span<const std::size_t> rows);
/// Constant sparse operator applied on the left: s * a.
Tensor spmm(const CsrMatrix& s, const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

}  // namespace scclg::ad
