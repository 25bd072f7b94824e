#include "scclg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "scclg/errors.hpp"
#include "scclg/kernels.hpp"
#include "scclg/special.hpp"

namespace scclg::ad {

using kernels::Trans;

void Node::accumulate(const Matrix& g) {
    if (grad.empty() && value.size() != 0) {
        grad = g;
        return;
    }
    double* d = grad.data();
    const double* s = g.data();
    for (std::size_t i = 0; i < grad.size(); ++i) d[i] += s[i];
}

namespace {

std::shared_ptr<Node> make_leaf(Matrix v, bool requires_grad, int rank = 2) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = requires_grad;
    n->rank = rank;
    return n;
}

const std::shared_ptr<Node>& checked(const Tensor& t, const char* op) {
    if (!t.defined()) throw Error(std::string(op) + ": undefined tensor");
    return t.node();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shapes " + shape_string(a.rows(), a.cols()) + " and " +
                         shape_string(b.rows(), b.cols()) + " differ");
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

// Unary elementwise op with derivative expressed from (input, output).
template <typename F, typename D>
Tensor unary(const Tensor& a, F f, D dfdx) {
    const Matrix& x = checked(a, "unary")->value;
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = f(x.data()[i]);
    return Tensor::from_op(
        std::move(y), {a},
        [dfdx](Node& self) {
            Node& p = parent(self, 0);
            if (!p.requires_grad) return;
            Matrix g(self.value.rows(), self.value.cols());
            for (std::size_t i = 0; i < g.size(); ++i)
                g.data()[i] = self.grad.data()[i] * dfdx(p.value.data()[i], self.value.data()[i]);
            p.accumulate(g);
        },
        checked(a, "unary")->rank);
}

}  // namespace

Tensor Tensor::constant(Matrix value) { return Tensor(make_leaf(std::move(value), false)); }

Tensor Tensor::parameter(Matrix value) { return Tensor(make_leaf(std::move(value), true)); }

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(make_leaf(Matrix(1, 1, value), requires_grad, 0));
}

Tensor Tensor::from_op(Matrix value, std::vector<Tensor> inputs, std::function<void(Node&)> backward,
                       int rank) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->rank = rank;
    for (const auto& in : inputs) {
        if (!in.defined()) throw Error("from_op: undefined input");
        n->requires_grad = n->requires_grad || in.requires_grad();
    }
    if (n->requires_grad) {
        for (auto& in : inputs) n->parents.push_back(in.node());
        n->backward_fn = std::move(backward);
    }
    return Tensor(std::move(n));
}

const Matrix& Tensor::value() const { return checked(*this, "value")->value; }

Matrix& Tensor::mutable_value() {
    if (!checked(*this, "mutable_value")->parents.empty())
        throw StateError("mutable_value: only leaf tensors may be modified in place");
    return node_->value;
}

std::vector<std::size_t> Tensor::shape() const {
    if (is_scalar()) return {};
    return {rows(), cols()};
}

bool Tensor::is_scalar() const { return checked(*this, "is_scalar")->rank == 0; }

double Tensor::item() const {
    if (value().size() != 1) throw ShapeError("item: tensor has shape " + shape_string(rows(), cols()));
    return value()(0, 0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

Matrix Tensor::grad() const {
    if (has_grad()) return node_->grad;
    return Matrix(rows(), cols());
}

void Tensor::zero_grad() {
    if (node_) node_->grad = Matrix();
}

void Tensor::backward() const {
    if (!is_scalar())
        throw ShapeError("backward: called on non-scalar of shape " + shape_string(rows(), cols()));
    if (!node_->requires_grad) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->accumulate(Matrix(1, 1, 1.0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
    // Interior gradients are not needed after the sweep.
    for (Node* n : order)
        if (!n->parents.empty()) n->grad = Matrix();
}

Tensor Tensor::detach() const {
    return Tensor(make_leaf(value(), false, checked(*this, "detach")->rank));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    Matrix y = kernels::gemm(checked(a, "matmul")->value, checked(b, "matmul")->value);
    return Tensor::from_op(std::move(y), {a, b}, [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) pa.accumulate(kernels::gemm(self.grad, pb.value, Trans::No, Trans::Yes));
        if (pb.requires_grad) pb.accumulate(kernels::gemm(pa.value, self.grad, Trans::Yes, Trans::No));
    });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    Matrix y = kernels::gemm(checked(a, "matmul_nt")->value, checked(b, "matmul_nt")->value, Trans::No,
                             Trans::Yes);
    return Tensor::from_op(std::move(y), {a, b}, [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        // y = a b^T: da = g b, db = g^T a
        if (pa.requires_grad) pa.accumulate(kernels::gemm(self.grad, pb.value));
        if (pb.requires_grad) pb.accumulate(kernels::gemm(self.grad, pa.value, Trans::Yes, Trans::No));
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Matrix y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += b.value().data()[i];
    return Tensor::from_op(
        std::move(y), {a, b},
        [](Node& self) {
            for (int i = 0; i < 2; ++i)
                if (parent(self, i).requires_grad) parent(self, i).accumulate(self.grad);
        },
        a.node()->rank);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Matrix y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] -= b.value().data()[i];
    return Tensor::from_op(
        std::move(y), {a, b},
        [](Node& self) {
            if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
            if (parent(self, 1).requires_grad) {
                Matrix g = self.grad;
                for (double& v : g.values()) v = -v;
                parent(self, 1).accumulate(g);
            }
        },
        a.node()->rank);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Matrix y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.value().data()[i];
    return Tensor::from_op(
        std::move(y), {a, b},
        [](Node& self) {
            for (int i = 0; i < 2; ++i) {
                Node& p = parent(self, i);
                if (!p.requires_grad) continue;
                const Matrix& other = parent(self, 1 - i).value;
                Matrix g = self.grad;
                for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] *= other.data()[k];
                p.accumulate(g);
            }
        },
        a.node()->rank);
}

Tensor scale(const Tensor& a, double s) {
    Matrix y = checked(a, "scale")->value;
    for (double& v : y.values()) v *= s;
    return Tensor::from_op(
        std::move(y), {a},
        [s](Node& self) {
            Matrix g = self.grad;
            for (double& v : g.values()) v *= s;
            parent(self, 0).accumulate(g);
        },
        a.node()->rank);
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    if (checked(row, "add_row")->value.rows() != 1 || row.cols() != checked(a, "add_row")->value.cols())
        throw ShapeError("add_row: row " + shape_string(row.rows(), row.cols()) + " cannot broadcast over " +
                         shape_string(a.rows(), a.cols()));
    Matrix y = a.value();
    for (std::size_t r = 0; r < y.rows(); ++r)
        for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += row.value()(0, c);
    return Tensor::from_op(std::move(y), {a, row}, [](Node& self) {
        if (parent(self, 0).requires_grad) parent(self, 0).accumulate(self.grad);
        Node& pr = parent(self, 1);
        if (pr.requires_grad) {
            Matrix g(1, self.grad.cols());
            for (std::size_t r = 0; r < self.grad.rows(); ++r)
                for (std::size_t c = 0; c < self.grad.cols(); ++c) g(0, c) += self.grad(r, c);
            pr.accumulate(g);
        }
    });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return scclg::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor log_gamma(const Tensor& a) {
    return unary(a, [](double x) { return scclg::log_gamma(x); }, [](double x, double) { return digamma(x); });
}

Tensor relu(const Tensor& a) {
    // written so that NaN passes through instead of becoming 0
    return unary(a, [](double x) { return x <= 0.0 ? 0.0 : x; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary(
        a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
        [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : checked(a, "sum")->value.values()) s += v;
    return Tensor::from_op(
        Matrix(1, 1, s), {a},
        [](Node& self) {
            Node& p = parent(self, 0);
            p.accumulate(Matrix(p.value.rows(), p.value.cols(), self.grad(0, 0)));
        },
        0);
}

Tensor mean(const Tensor& a) {
    const double n = static_cast<double>(checked(a, "mean")->value.size());
    if (n == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(a), 1.0 / n);
}

Tensor transpose(const Tensor& a) {
    return Tensor::from_op(checked(a, "transpose")->value.transposed(), {a},
                           [](Node& self) { parent(self, 0).accumulate(self.grad.transposed()); });
}

Tensor slice_rows(const Tensor& a, std::span<const std::size_t> rows) {
    const Matrix& x = checked(a, "slice_rows")->value;
    Matrix y(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= x.rows())
            throw ShapeError("slice_rows: row " + std::to_string(rows[i]) + " out of range for " +
                             shape_string(x.rows(), x.cols()));
        std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), y.row(i).begin());
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return Tensor::from_op(std::move(y), {a}, [idx = std::move(idx)](Node& self) {
        Node& p = parent(self, 0);
        Matrix g(p.value.rows(), p.value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t c = 0; c < g.cols(); ++c) g(idx[i], c) += self.grad(i, c);
        p.accumulate(g);
    });
}

Tensor spmm(const CsrMatrix& s, const Tensor& a) {
    Matrix y = kernels::spmm(s, checked(a, "spmm")->value);
    // The operator is captured by value: graph nodes must not dangle if the
    // caller's CsrMatrix goes away before backward().
    return Tensor::from_op(std::move(y), {a}, [s](Node& self) {
        Node& p = parent(self, 0);
        Matrix g(p.value.rows(), p.value.cols());
        const std::size_t n = g.cols();
        for (std::size_t r = 0; r < s.rows; ++r)
            for (std::size_t q = s.row_ptr[r]; q < s.row_ptr[r + 1]; ++q) {
                const double v = s.values[q];
                double* gr = g.data() + s.col_idx[q] * n;
                const double* sg = self.grad.data() + r * n;
                for (std::size_t j = 0; j < n; ++j) gr[j] += v * sg[j];
            }
        p.accumulate(g);
    });
}

}  // namespace scclg::ad
