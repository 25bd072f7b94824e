#include "scclg/sparse.hpp"

#include <cmath>

namespace scclg {

Matrix CsrMatrix::to_dense() const {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) m(r, col_idx[p]) = values[p];
    return m;
}

CsrMatrix CsrMatrix::from_dense(const Matrix& m, double drop_tol) {
    CsrMatrix s;
    s.rows = m.rows();
    s.cols = m.cols();
    s.row_ptr.assign(1, 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (std::abs(m(r, c)) > drop_tol) {
                s.col_idx.push_back(c);
                s.values.push_back(m(r, c));
            }
        }
        s.row_ptr.push_back(s.values.size());
    }
    return s;
}

}  // namespace scclg
