#include "scclg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "scclg/errors.hpp"

namespace scclg {

namespace {

std::vector<std::size_t> compact(std::span<const int> labels, std::size_t& n_classes) {
    std::unordered_map<int, std::size_t> ids;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = ids.emplace(labels[i], ids.size());
        out[i] = it->second;
    }
    n_classes = ids.size();
    return out;
}

double choose2(std::size_t x) { return x < 2 ? 0.0 : static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; }

void check_lengths(std::span<const int> a, std::span<const int> b, const char* op) {
    if (a.size() != b.size())
        throw ShapeError(std::string(op) + ": label vectors have lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
}

}  // namespace

ContingencyTable contingency(std::span<const int> truth, std::span<const int> pred) {
    check_lengths(truth, pred, "contingency");
    ContingencyTable t;
    const auto tc = compact(truth, t.n_true);
    const auto pc = compact(pred, t.n_pred);
    t.counts.assign(t.n_true * t.n_pred, 0);
    t.row_sums.assign(t.n_true, 0);
    t.col_sums.assign(t.n_pred, 0);
    for (std::size_t i = 0; i < tc.size(); ++i) {
        ++t.counts[tc[i] * t.n_pred + pc[i]];
        ++t.row_sums[tc[i]];
        ++t.col_sums[pc[i]];
    }
    t.total = truth.size();
    return t;
}

double ari(std::span<const int> truth, std::span<const int> pred) {
    check_lengths(truth, pred, "ari");
    if (truth.size() < 2) throw RangeError("ari: need at least two points");
    const ContingencyTable t = contingency(truth, pred);
    double index = 0.0, a = 0.0, b = 0.0;
    for (std::size_t c : t.counts) index += choose2(c);
    for (std::size_t r : t.row_sums) a += choose2(r);
    for (std::size_t c : t.col_sums) b += choose2(c);
    // (index - a b / pairs) / ((a + b) / 2 - a b / pairs), scaled by pairs so that
    // every term stays an integer (or half of one) and exact up to 2^53
    const double pairs = choose2(t.total);
    const double num = index * pairs - a * b;
    const double den = 0.5 * (a + b) * pairs - a * b;
    if (den == 0.0) return 1.0;
    return num / den;
}

double nmi(std::span<const int> truth, std::span<const int> pred) {
    check_lengths(truth, pred, "nmi");
    if (truth.empty()) throw RangeError("nmi: empty labelings");
    const ContingencyTable t = contingency(truth, pred);
    const double n = static_cast<double>(t.total);
    auto entropy = [n](const std::vector<std::size_t>& sums) {
        double h = 0.0;
        for (std::size_t s : sums)
            if (s > 0) {
                const double p = static_cast<double>(s) / n;
                h -= p * std::log(p);
            }
        return h;
    };
    const double hu = entropy(t.row_sums);
    const double hv = entropy(t.col_sums);
    if (hu == 0.0 && hv == 0.0) return 1.0;
    double mi = 0.0;
    for (std::size_t i = 0; i < t.n_true; ++i)
        for (std::size_t j = 0; j < t.n_pred; ++j) {
            const std::size_t c = t.at(i, j);
            if (c == 0) continue;
            const double pij = static_cast<double>(c) / n;
            mi += pij * std::log(n * static_cast<double>(c) /
                                 (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
        }
    return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

std::size_t count_clusters(std::span<const int> labels) {
    std::size_t k = 0;
    compact(labels, k);
    return k;
}

}  // namespace scclg
