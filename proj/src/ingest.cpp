#include "scclg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "scclg/errors.hpp"

namespace scclg {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Parses a signed integer; negative values raise NegativeCountError.
std::int64_t parse_count(const std::string& field, std::size_t line) {
    const std::string s = trim(field);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError(line, "expected an integer count, got '" + s + "'");
    if (v < 0)
        throw NegativeCountError("line " + std::to_string(line) + ": negative count " + std::to_string(v));
    return v;
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw DuplicateIdError(std::string("duplicate ") + what + " id '" + id + "'");
}

ExpressionMatrix load_csv(std::istream& in) {
    ExpressionMatrix m;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (!header) {
            if (fields.size() < 2) throw ParseError(lineno, "header needs a corner cell and at least one gene id");
            for (std::size_t i = 1; i < fields.size(); ++i) m.gene_ids.push_back(trim(fields[i]));
            m.n_genes = m.gene_ids.size();
            header = true;
            continue;
        }
        if (fields.size() != m.n_genes + 1)
            throw ParseError(lineno, "expected " + std::to_string(m.n_genes + 1) + " fields, found " +
                                         std::to_string(fields.size()));
        m.cell_ids.push_back(trim(fields[0]));
        for (std::size_t j = 1; j < fields.size(); ++j) m.counts.push_back(parse_count(fields[j], lineno));
    }
    if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "empty matrix file");
    m.n_cells = m.cell_ids.size();
    return m;
}

ExpressionMatrix load_mtx(std::istream& in) {
    ExpressionMatrix m;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::size_t nnz = 0, seen = 0;
    std::set<std::pair<std::size_t, std::size_t>> filled;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        std::istringstream ss(t);
        std::vector<std::string> tok;
        for (std::string w; ss >> w;) tok.push_back(w);
        if (tok.size() != 3) throw ParseError(lineno, "expected three fields");
        if (!header) {
            m.n_cells = static_cast<std::size_t>(parse_count(tok[0], lineno));
            m.n_genes = static_cast<std::size_t>(parse_count(tok[1], lineno));
            nnz = static_cast<std::size_t>(parse_count(tok[2], lineno));
            m.counts.assign(m.n_cells * m.n_genes, 0);
            header = true;
            continue;
        }
        const auto r = parse_count(tok[0], lineno);
        const auto c = parse_count(tok[1], lineno);
        const auto v = parse_count(tok[2], lineno);
        if (r < 1 || c < 1 || static_cast<std::size_t>(r) > m.n_cells || static_cast<std::size_t>(c) > m.n_genes)
            throw ParseError(lineno, "entry (" + tok[0] + ", " + tok[1] + ") outside the declared shape");
        if (!filled.emplace(r, c).second) throw ParseError(lineno, "entry repeated");
        m.counts[(static_cast<std::size_t>(r) - 1) * m.n_genes + static_cast<std::size_t>(c) - 1] = v;
        ++seen;
    }
    if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "empty matrix file");
    if (seen != nnz)
        throw ParseError(lineno, "header declares " + std::to_string(nnz) + " entries, found " + std::to_string(seen));
    for (std::size_t i = 0; i < m.n_cells; ++i) m.cell_ids.push_back("cell_" + std::to_string(i));
    for (std::size_t j = 0; j < m.n_genes; ++j) m.gene_ids.push_back("gene_" + std::to_string(j));
    return m;
}

}  // namespace

Matrix ExpressionMatrix::to_matrix() const {
    Matrix out(n_cells, n_genes);
    for (std::size_t i = 0; i < counts.size(); ++i) out.data()[i] = static_cast<double>(counts[i]);
    return out;
}

std::size_t ExpressionMatrix::n_classes() const {
    if (!labels || labels->empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

void ExpressionMatrix::validate() const {
    if (counts.size() != n_cells * n_genes)
        throw ShapeError("counts hold " + std::to_string(counts.size()) + " values for " +
                         shape_string(n_cells, n_genes));
    if (cell_ids.size() != n_cells || gene_ids.size() != n_genes)
        throw ShapeError("identifier lists do not match " + shape_string(n_cells, n_genes));
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] < 0)
            throw NegativeCountError("negative count at cell " + cell_ids[i / n_genes] + ", gene " +
                                     gene_ids[i % n_genes]);
    check_unique(cell_ids, "cell");
    check_unique(gene_ids, "gene");
    if (labels) {
        if (labels->size() != n_cells)
            throw ShapeError("labels length " + std::to_string(labels->size()) + " != " + std::to_string(n_cells));
        std::vector<std::size_t> sizes(n_classes(), 0);
        for (int l : *labels) {
            if (l < 0) throw RangeError("negative label " + std::to_string(l));
            ++sizes[static_cast<std::size_t>(l)];
        }
        for (std::size_t c = 0; c < sizes.size(); ++c)
            if (sizes[c] == 0) throw RangeError("label class " + std::to_string(c) + " is empty");
    }
}

MatrixFormat parse_matrix_format(const std::string& s) {
    if (s == "csv") return MatrixFormat::Csv;
    if (s == "mtx" || s == "mtx-triplet") return MatrixFormat::MtxTriplet;
    throw RangeError("unknown matrix format '" + s + "' (expected csv or mtx-triplet)");
}

std::string to_string(MatrixFormat f) { return f == MatrixFormat::Csv ? "csv" : "mtx-triplet"; }

ExpressionMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    ExpressionMatrix m = format == MatrixFormat::Csv ? load_csv(in) : load_mtx(in);
    m.validate();
    return m;
}

void save_matrix(const ExpressionMatrix& m, const std::filesystem::path& path, MatrixFormat format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    if (format == MatrixFormat::Csv) {
        out << "cell";
        for (const auto& g : m.gene_ids) out << ',' << g;
        out << '\n';
        for (std::size_t i = 0; i < m.n_cells; ++i) {
            out << m.cell_ids[i];
            for (std::size_t j = 0; j < m.n_genes; ++j) out << ',' << m.count(i, j);
            out << '\n';
        }
    } else {
        const auto nnz = static_cast<std::size_t>(std::count_if(m.counts.begin(), m.counts.end(),
                                                                [](std::int64_t v) { return v != 0; }));
        out << "%%MatrixMarket matrix coordinate integer general\n";
        out << m.n_cells << ' ' << m.n_genes << ' ' << nnz << '\n';
        for (std::size_t i = 0; i < m.n_cells; ++i)
            for (std::size_t j = 0; j < m.n_genes; ++j)
                if (m.count(i, j) != 0) out << i + 1 << ' ' << j + 1 << ' ' << m.count(i, j) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void attach_labels(ExpressionMatrix& m, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < m.n_cells; ++i) index.emplace(m.cell_ids[i], i);
    std::vector<int> labels(m.n_cells, -1);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 2) throw ParseError(lineno, "expected 'cell_id,label'");
        int v = 0;
        const std::string lab = trim(f[1]);
        const auto [ptr, ec] = std::from_chars(lab.data(), lab.data() + lab.size(), v);
        if (ec != std::errc() || ptr != lab.data() + lab.size() || lab.empty()) {
            if (lineno == 1) continue;  // header
            throw ParseError(lineno, "label '" + lab + "' is not an integer");
        }
        const auto it = index.find(trim(f[0]));
        if (it == index.end()) throw ParseError(lineno, "unknown cell id '" + trim(f[0]) + "'");
        labels[it->second] = v;
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0) throw RangeError("cell '" + m.cell_ids[i] + "' has no label");
    m.labels = std::move(labels);
    m.validate();
}

void save_labels(const ExpressionMatrix& m, const std::filesystem::path& path) {
    if (!m.labels) throw StateError("matrix has no labels to save");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "cell_id,label\n";
    for (std::size_t i = 0; i < m.n_cells; ++i) out << m.cell_ids[i] << ',' << (*m.labels)[i] << '\n';
}

namespace {

void check_spec(const SynthesisSpec& s) {
    if (s.n_clusters < 1) throw RangeError("n_clusters must be >= 1");
    if (s.n_cells < s.n_clusters) throw RangeError("n_cells must be >= n_clusters");
    if (!(s.dropout_rate >= 0.0 && s.dropout_rate < 1.0)) throw RangeError("dropout_rate must be in [0, 1)");
    if (!(s.dispersion > 0.0)) throw RangeError("dispersion must be > 0");
    if (!(s.mean_scale > 0.0)) throw RangeError("mean_scale must be > 0");
}

Matrix draw_means(const SynthesisSpec& spec, std::mt19937_64& rng) {
    std::lognormal_distribution<double> lognormal(0.0, 1.0);
    Matrix means(spec.n_clusters, spec.n_genes);
    for (double& v : means.values()) v = spec.mean_scale * lognormal(rng);
    return means;
}

}  // namespace

Matrix synthetic_cluster_means(const SynthesisSpec& spec) {
    check_spec(spec);
    std::mt19937_64 rng(spec.seed);
    return draw_means(spec, rng);
}

ExpressionMatrix synthesize(const SynthesisSpec& spec) {
    check_spec(spec);
    std::mt19937_64 rng(spec.seed);
    const Matrix means = draw_means(spec, rng);

    std::vector<int> labels(spec.n_cells);
    for (std::size_t i = 0; i < spec.n_cells; ++i)
        labels[i] = static_cast<int>(i * spec.n_clusters / spec.n_cells);
    std::shuffle(labels.begin(), labels.end(), rng);

    ExpressionMatrix m;
    m.n_cells = spec.n_cells;
    m.n_genes = spec.n_genes;
    m.counts.resize(spec.n_cells * spec.n_genes);
    std::bernoulli_distribution dropout(spec.dropout_rate);
    const double theta = spec.dispersion;
    for (std::size_t i = 0; i < spec.n_cells; ++i) {
        for (std::size_t j = 0; j < spec.n_genes; ++j) {
            const double mu = means(static_cast<std::size_t>(labels[i]), j);
            // Gamma-Poisson mixture is NB(mu, theta).
            std::gamma_distribution<double> gamma(theta, mu / theta);
            const double rate = gamma(rng);
            std::poisson_distribution<std::int64_t> poisson(rate);
            const std::int64_t nb = rate > 0.0 ? poisson(rng) : 0;
            m.counts[i * spec.n_genes + j] = dropout(rng) ? 0 : nb;
        }
    }
    for (std::size_t i = 0; i < spec.n_cells; ++i) m.cell_ids.push_back("cell_" + std::to_string(i));
    for (std::size_t j = 0; j < spec.n_genes; ++j) m.gene_ids.push_back("gene_" + std::to_string(j));
    m.labels = std::move(labels);
    return m;
}

}  // namespace scclg
