#include "scclg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scclg/errors.hpp"

namespace scclg {

std::vector<double> size_factors(const ExpressionMatrix& data) {
    std::vector<double> totals(data.n_cells, 0.0);
    for (std::size_t i = 0; i < data.n_cells; ++i) {
        for (std::size_t j = 0; j < data.n_genes; ++j) totals[i] += static_cast<double>(data.count(i, j));
        if (totals[i] <= 0.0) throw AllZeroCellError(data.cell_ids[i]);
    }
    if (totals.empty()) return totals;
    std::vector<double> sorted = totals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (double& t : totals) t /= median;
    return totals;
}

namespace {

Matrix log_normalized(const ExpressionMatrix& data, const std::vector<double>& sf,
                      const std::vector<std::size_t>& genes) {
    Matrix out(data.n_cells, genes.size());
    for (std::size_t i = 0; i < data.n_cells; ++i)
        for (std::size_t j = 0; j < genes.size(); ++j)
            out(i, j) = std::log1p(static_cast<double>(data.count(i, genes[j])) / sf[i]);
    return out;
}

std::vector<std::size_t> hvg_from_factors(const ExpressionMatrix& data, const std::vector<double>& sf,
                                          std::size_t n_genes) {
    if (n_genes < 1 || n_genes > data.n_genes)
        throw RangeError("select_hvg: n_genes " + std::to_string(n_genes) + " outside 1.." +
                         std::to_string(data.n_genes));
    std::vector<std::size_t> all(data.n_genes);
    std::iota(all.begin(), all.end(), 0);
    const Matrix logx = log_normalized(data, sf, all);

    std::vector<double> var(data.n_genes, 0.0);
    const double n = static_cast<double>(data.n_cells);
    for (std::size_t j = 0; j < data.n_genes; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < data.n_cells; ++i) mean += logx(i, j);
        mean /= n;
        double ss = 0.0;
        for (std::size_t i = 0; i < data.n_cells; ++i) ss += (logx(i, j) - mean) * (logx(i, j) - mean);
        var[j] = ss / n;
    }
    std::stable_sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
    all.resize(n_genes);
    std::sort(all.begin(), all.end());
    return all;
}

PreprocessedData assemble(const ExpressionMatrix& data, std::vector<double> sf, std::vector<std::size_t> genes) {
    PreprocessedData out;
    out.raw.n_cells = data.n_cells;
    out.raw.n_genes = genes.size();
    out.raw.cell_ids = data.cell_ids;
    out.raw.labels = data.labels;
    out.raw.counts.reserve(data.n_cells * genes.size());
    for (std::size_t i = 0; i < data.n_cells; ++i)
        for (std::size_t g : genes) out.raw.counts.push_back(data.count(i, g));
    for (std::size_t g : genes) out.raw.gene_ids.push_back(data.gene_ids[g]);
    out.normalized = log_normalized(data, sf, genes);
    out.size_factors = std::move(sf);
    out.selected_gene_indices = std::move(genes);
    return out;
}

}  // namespace

std::vector<std::size_t> select_hvg(const ExpressionMatrix& data, std::size_t n_genes) {
    return hvg_from_factors(data, size_factors(data), n_genes);
}

PreprocessedData normalize(const ExpressionMatrix& data) {
    std::vector<std::size_t> all(data.n_genes);
    std::iota(all.begin(), all.end(), 0);
    return assemble(data, size_factors(data), std::move(all));
}

PreprocessedData preprocess(const ExpressionMatrix& data, std::size_t n_genes) {
    auto sf = size_factors(data);
    auto genes = hvg_from_factors(data, sf, n_genes);
    return assemble(data, std::move(sf), std::move(genes));
}

PreprocessedData subset_cells(const PreprocessedData& data, const std::vector<std::size_t>& cells) {
    PreprocessedData out;
    out.raw.n_cells = cells.size();
    out.raw.n_genes = data.raw.n_genes;
    out.raw.gene_ids = data.raw.gene_ids;
    out.normalized = Matrix(cells.size(), data.normalized.cols());
    std::vector<int> labels;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const std::size_t c = cells[r];
        if (c >= data.raw.n_cells) throw RangeError("subset_cells: cell index " + std::to_string(c) + " out of range");
        out.raw.cell_ids.push_back(data.raw.cell_ids[c]);
        for (std::size_t g = 0; g < data.raw.n_genes; ++g) out.raw.counts.push_back(data.raw.count(c, g));
        std::copy(data.normalized.row(c).begin(), data.normalized.row(c).end(), out.normalized.row(r).begin());
        out.size_factors.push_back(data.size_factors[c]);
        if (data.raw.labels) labels.push_back((*data.raw.labels)[c]);
    }
    // Labels of a subset need not cover every class, so they are not revalidated.
    if (data.raw.labels) out.raw.labels = std::move(labels);
    out.selected_gene_indices = data.selected_gene_indices;
    return out;
}

}  // namespace scclg
