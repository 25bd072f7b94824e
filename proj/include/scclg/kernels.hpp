#pragma once

#include "scclg/matrix.hpp"
#include "scclg/sparse.hpp"

/// Data-parallel building blocks. The functions in `kernels` use OpenMP when
/// the library is built with it; `kernels::serial` holds plain reference loops
/// that the tests and benchmarks compare against.
namespace scclg::kernels {

enum class Trans { No, Yes };

/// op(a) * op(b).
Matrix gemm(const Matrix& a, const Matrix& b, Trans ta = Trans::No, Trans tb = Trans::No);

/// Sparse-times-dense product s * x.
Matrix spmm(const CsrMatrix& s, const Matrix& x);

/// Squared Euclidean distances between all pairs of rows of x.
Matrix pairwise_sq_distances(const Matrix& x);

/// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

namespace serial {
Matrix gemm(const Matrix& a, const Matrix& b, Trans ta = Trans::No, Trans tb = Trans::No);
Matrix spmm(const CsrMatrix& s, const Matrix& x);
Matrix pairwise_sq_distances(const Matrix& x);
}  // namespace serial

}  // namespace scclg::kernels
