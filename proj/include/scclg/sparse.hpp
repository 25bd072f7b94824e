#pragma once

#include <cstddef>
#include <vector>

#include "scclg/matrix.hpp"

namespace scclg {

/// Compressed sparse row matrix. Column indices are sorted within each row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }
    Matrix to_dense() const;

    /// Entries with |v| <= drop_tol are omitted.
    static CsrMatrix from_dense(const Matrix& m, double drop_tol = 0.0);
};

}  // namespace scclg
