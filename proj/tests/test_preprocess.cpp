#include <cmath>
#include <numeric>

#include "doctest.h"
#include "scclg/errors.hpp"
#include "scclg/preprocess.hpp"
#include "test_support.hpp"

using namespace scclg;

namespace {

ExpressionMatrix make(std::size_t cells, std::size_t genes, std::vector<std::int64_t> counts) {
    ExpressionMatrix m;
    m.n_cells = cells;
    m.n_genes = genes;
    m.counts = std::move(counts);
    for (std::size_t i = 0; i < cells; ++i) m.cell_ids.push_back("c" + std::to_string(i));
    for (std::size_t j = 0; j < genes; ++j) m.gene_ids.push_back("g" + std::to_string(j));
    return m;
}

double population_variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("size factors") {
    const auto m = make(2, 2, {40, 60, 100, 200});
    const auto sf = size_factors(m);
    CHECK(sf[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sf[1] == doctest::Approx(1.5).epsilon(1e-15));
    const auto odd = size_factors(make(3, 1, {10, 30, 20}));
    CHECK(odd == std::vector<double>{0.5, 1.5, 1.0});
}

TEST_CASE("normalize") {
    const auto m = make(2, 3, {0, 40, 60, 100, 0, 200});
    const PreprocessedData d = normalize(m);
    CHECK(d.raw == m);
    CHECK(d.normalized(0, 0) == 0.0);
    CHECK(d.normalized(1, 1) == 0.0);
    CHECK(d.normalized(0, 1) == doctest::Approx(std::log1p(40 / 0.5)).epsilon(1e-15));
    CHECK(d.normalized(1, 2) == doctest::Approx(std::log1p(200 / 1.5)).epsilon(1e-15));
    CHECK(d.selected_gene_indices == std::vector<std::size_t>{0, 1, 2});

    try {
        normalize(make(2, 2, {1, 0, 0, 0}));
        FAIL("expected an all-zero cell error");
    } catch (const AllZeroCellError& e) {
        CHECK(e.cell_id() == "c1");
    }
}

TEST_CASE("size factors are invariant under scaling every count") {
    // log1p(x / s) is not scale free, but the size factors absorb c exactly.
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> d(1, 50);
    std::vector<std::int64_t> counts(5 * 7);
    for (auto& c : counts) c = d(rng);
    const auto base = make(5, 7, counts);
    for (int c : {2, 3, 10}) {
        auto scaled = base;
        for (auto& x : scaled.counts) x *= c;
        const auto a = size_factors(base), b = size_factors(scaled);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14));
    }
}

TEST_CASE("select_hvg") {
    SUBCASE("constant gene loses") {
        // equal library sizes, so the constant gene 0 stays constant after normalization
        const auto m = make(3, 3, {5, 1, 9, 5, 9, 1, 5, 5, 5});
        CHECK(select_hvg(m, 1) == std::vector<std::size_t>{1});
        CHECK(select_hvg(m, 2) == std::vector<std::size_t>{1, 2});
    }
    SUBCASE("all genes returns identity order") {
        const auto m = make(3, 4, {1, 2, 3, 4, 4, 3, 2, 1, 1, 1, 1, 1});
        CHECK(select_hvg(m, 4) == std::vector<std::size_t>{0, 1, 2, 3});
    }
    SUBCASE("top two of three by computed variance") {
        // equal totals (size factors 1) so variances are those of log1p(count)
        const auto m = make(4, 4, {0, 10, 3, 7, 20, 0, 0, 0, 0, 5, 4, 11, 20, 4, 1, 0});
        const PreprocessedData d = normalize(m);
        std::vector<std::pair<double, std::size_t>> var;
        for (std::size_t j = 0; j < 4; ++j) {
            std::vector<double> col;
            for (std::size_t i = 0; i < 4; ++i) col.push_back(d.normalized(i, j));
            var.emplace_back(-population_variance(col), j);
        }
        std::sort(var.begin(), var.end());
        std::vector<std::size_t> expect{var[0].second, var[1].second};
        std::sort(expect.begin(), expect.end());
        CHECK(select_hvg(m, 2) == expect);
    }
    SUBCASE("ties go to the lower index") {
        const auto m = make(2, 3, {3, 1, 5, 3, 5, 1});
        CHECK(select_hvg(m, 1) == std::vector<std::size_t>{1});
    }
    SUBCASE("range errors") {
        const auto m = make(2, 2, {1, 2, 3, 4});
        CHECK_THROWS_AS(select_hvg(m, 0), RangeError);
        CHECK_THROWS_AS(select_hvg(m, 3), RangeError);
    }
}

TEST_CASE("select_hvg is permutation equivariant") {
    std::mt19937_64 rng(17);
    SynthesisSpec spec;
    spec.n_cells = 30;
    spec.n_genes = 25;
    spec.seed = 4;
    const ExpressionMatrix m = synthesize(spec);
    std::vector<std::size_t> perm(m.n_genes);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ExpressionMatrix pm = m;
    for (std::size_t i = 0; i < m.n_cells; ++i)
        for (std::size_t j = 0; j < m.n_genes; ++j) pm.counts[i * m.n_genes + j] = m.count(i, perm[j]);
    for (std::size_t j = 0; j < m.n_genes; ++j) pm.gene_ids[j] = m.gene_ids[perm[j]];
    const auto a = select_hvg(m, 10);
    auto b = select_hvg(pm, 10);
    for (auto& idx : b) idx = perm[idx];
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("preprocess restricts to the selected genes") {
    SynthesisSpec spec;
    spec.n_cells = 50;
    spec.n_genes = 40;
    const ExpressionMatrix m = synthesize(spec);
    const PreprocessedData d = preprocess(m, 12);
    CHECK(d.selected_gene_indices.size() == 12);
    CHECK(std::is_sorted(d.selected_gene_indices.begin(), d.selected_gene_indices.end()));
    CHECK(d.raw.n_genes == 12);
    CHECK(d.normalized.rows() == 50);
    CHECK(d.normalized.cols() == 12);
    CHECK(d.size_factors == size_factors(m));
    for (double s : d.size_factors) CHECK(s > 0.0);
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t k = 0; k < 12; ++k) {
            const auto j = d.selected_gene_indices[k];
            CHECK(d.raw.count(i, k) == m.count(i, j));
            CHECK(d.normalized(i, k) == std::log1p(static_cast<double>(m.count(i, j)) / d.size_factors[i]));
        }
    const std::vector<std::size_t> pick{3, 0};
    const PreprocessedData s = subset_cells(d, pick);
    CHECK(s.raw.cell_ids == std::vector<std::string>{m.cell_ids[3], m.cell_ids[0]});
    CHECK(s.normalized(0, 5) == d.normalized(3, 5));
    CHECK(s.size_factors[1] == d.size_factors[0]);
}
