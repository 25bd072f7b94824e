#pragma once

#include <cstddef>
#include <vector>

#include "scclg/ingest.hpp"
#include "scclg/matrix.hpp"

namespace scclg {

/// Encoder input and ZINB target for one analysis.
///
/// `raw` keeps the untouched counts of the selected genes (the likelihood is
/// evaluated on counts), `normalized` is log1p(raw / size_factor) and feeds
/// the encoder.
struct PreprocessedData {
    ExpressionMatrix raw;
    Matrix normalized;
    std::vector<double> size_factors;
    std::vector<std::size_t> selected_gene_indices;

    Matrix raw_matrix() const { return raw.to_matrix(); }
};

/// Library size over the median library size. Throws AllZeroCellError.
std::vector<double> size_factors(const ExpressionMatrix& data);

/// Indices (ascending) of the n_genes genes with the largest variance of
/// log1p(count / size_factor). Ties prefer the lower index.
std::vector<std::size_t> select_hvg(const ExpressionMatrix& data, std::size_t n_genes);

/// Normalizes every gene.
PreprocessedData normalize(const ExpressionMatrix& data);

/// Size factors from the full matrix, then HVG selection and normalization
/// restricted to the selected genes.
PreprocessedData preprocess(const ExpressionMatrix& data, std::size_t n_genes);

/// Keeps only the listed cells (in the given order).
PreprocessedData subset_cells(const PreprocessedData& data, const std::vector<std::size_t>& cells);

}  // namespace scclg
