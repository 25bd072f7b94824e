#include "scclg/kernels.hpp"

#include <algorithm>
#include <string>

#include "scclg/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scclg::kernels {

namespace {

// Below this many multiply-adds a kernel stays on the calling thread.
constexpr std::size_t kParallelWork = 1 << 15;

struct Dims {
    std::size_t m, k, n;
};

Dims gemm_dims(const Matrix& a, const Matrix& b, Trans ta, Trans tb) {
    const std::size_t am = ta == Trans::No ? a.rows() : a.cols();
    const std::size_t ak = ta == Trans::No ? a.cols() : a.rows();
    const std::size_t bk = tb == Trans::No ? b.rows() : b.cols();
    const std::size_t bn = tb == Trans::No ? b.cols() : b.rows();
    if (ak != bk) {
        throw ShapeError("gemm: inner dimensions differ, op(a) is " + shape_string(am, ak) +
                         ", op(b) is " + shape_string(bk, bn));
    }
    return {am, ak, bn};
}

void check_spmm(const CsrMatrix& s, const Matrix& x) {
    if (s.cols != x.rows())
        throw ShapeError("spmm: sparse " + shape_string(s.rows, s.cols) + " times dense " +
                         shape_string(x.rows(), x.cols()));
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

// C[i0..i1) += op(A) B with B row-major k x n; `a_at(i, p)` reads op(A).
// Four output rows share each pass over a row of B.
template <class AAt>
void gemm_rows(AAt a_at, const double* B, std::size_t ldb, double* C, std::size_t kk, std::size_t n,
               std::size_t i0, std::size_t i1) {
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) {
        double* c0 = C + i * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (std::size_t p = 0; p < kk; ++p) {
            const double a0 = a_at(i, p), a1 = a_at(i + 1, p), a2 = a_at(i + 2, p), a3 = a_at(i + 3, p);
            const double* bp = B + p * ldb;
            for (std::size_t j = 0; j < n; ++j) {
                const double b = bp[j];
                c0[j] += a0 * b;
                c1[j] += a1 * b;
                c2[j] += a2 * b;
                c3[j] += a3 * b;
            }
        }
    }
    for (; i < i1; ++i) {
        double* ci = C + i * n;
        for (std::size_t p = 0; p < kk; ++p) {
            const double aip = a_at(i, p);
            const double* bp = B + p * ldb;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

}  // namespace

Matrix gemm(const Matrix& a, const Matrix& b, Trans ta, Trans tb) {
    // Row-major B makes the inner loop contiguous; transpose it up front.
    if (tb == Trans::Yes) {
        gemm_dims(a, b, ta, tb);
        return gemm(a, b.transposed(), ta, Trans::No);
    }
    const auto [m, kk, n] = gemm_dims(a, b, ta, tb);
    Matrix c(m, n);
    const bool par = m * kk * n >= kParallelWork;
    const double* A = a.data();
    const double* B = b.data();
    double* C = c.data();
    const std::size_t lda = a.cols();
    const std::size_t ldb = b.cols();
    const long blocks = static_cast<long>((m + 3) / 4);

#pragma omp parallel for schedule(static) if (par)
    for (long bi = 0; bi < blocks; ++bi) {
        const std::size_t i0 = static_cast<std::size_t>(bi) * 4;
        const std::size_t i1 = std::min(m, i0 + 4);
        if (ta == Trans::No)
            gemm_rows([&](std::size_t i, std::size_t p) { return A[i * lda + p]; }, B, ldb, C, kk, n, i0, i1);
        else
            gemm_rows([&](std::size_t i, std::size_t p) { return A[p * lda + i]; }, B, ldb, C, kk, n, i0, i1);
    }
    return c;
}

Matrix spmm(const CsrMatrix& s, const Matrix& x) {
    check_spmm(s, x);
    Matrix out(s.rows, x.cols());
    const std::size_t n = x.cols();
    const long rows = static_cast<long>(s.rows);
    const bool par = s.nnz() * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (long rr = 0; rr < rows; ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        double* o = out.data() + r * n;
        for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p) {
            const double v = s.values[p];
            const double* xr = x.data() + s.col_idx[p] * n;
            for (std::size_t j = 0; j < n; ++j) o[j] += v * xr[j];
        }
    }
    return out;
}

Matrix pairwise_sq_distances(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Matrix out(n, n);
    const long nn = static_cast<long>(n);
    const bool par = n * n * d >= kParallelWork;
#pragma omp parallel for schedule(dynamic, 16) if (par)
    for (long ii = 0; ii < nn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const auto xj = x.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < d; ++p) {
                const double diff = xi[p] - xj[p];
                acc += diff * diff;
            }
            out(i, j) = acc;
        }
    }
    return out;
}

namespace serial {

Matrix gemm(const Matrix& a, const Matrix& b, Trans ta, Trans tb) {
    const auto [m, kk, n] = gemm_dims(a, b, ta, tb);
    auto at = [&](std::size_t i, std::size_t p) { return ta == Trans::No ? a(i, p) : a(p, i); };
    auto bt = [&](std::size_t p, std::size_t j) { return tb == Trans::No ? b(p, j) : b(j, p); };
    Matrix c(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < kk; ++p) acc += at(i, p) * bt(p, j);
            c(i, j) = acc;
        }
    return c;
}

Matrix spmm(const CsrMatrix& s, const Matrix& x) {
    check_spmm(s, x);
    Matrix out(s.rows, x.cols());
    for (std::size_t r = 0; r < s.rows; ++r)
        for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p)
            for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) += s.values[p] * x(s.col_idx[p], j);
    return out;
}

Matrix pairwise_sq_distances(const Matrix& x) {
    Matrix out(x.rows(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < x.cols(); ++p) {
                const double diff = x(i, p) - x(j, p);
                acc += diff * diff;
            }
            out(i, j) = acc;
        }
    return out;
}

}  // namespace serial

}  // namespace scclg::kernels
