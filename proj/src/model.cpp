#include "scclg/model.hpp"

#include <cmath>
#include <random>

#include "scclg/errors.hpp"

namespace scclg {

using ad::Tensor;

namespace {

Matrix glorot(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> unif(-limit, limit);
    Matrix w(in, out);
    for (double& v : w.values()) v = unif(rng);
    return w;
}

DenseLayerParams dense_layer(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    return {Tensor::parameter(glorot(in, out, rng)), Tensor::parameter(Matrix(1, out))};
}

Tensor linear(const Tensor& x, const DenseLayerParams& l) { return ad::add_row(ad::matmul(x, l.weight), l.bias); }

Tensor copy_param(const Tensor& t) { return Tensor::parameter(t.value()); }

// Visits every (name, tensor) pair in canonical order.
template <typename F>
void for_each_param(const ModelParams& p, bool with_centers, F&& f) {
    for (std::size_t l = 0; l < p.encoder.size(); ++l) {
        const std::string base = "enc." + std::to_string(l) + ".";
        for (std::size_t k = 0; k < p.encoder[l].theta.size(); ++k)
            f(base + "theta." + std::to_string(k), p.encoder[l].theta[k]);
        f(base + "bias", p.encoder[l].bias);
    }
    for (std::size_t l = 0; l < p.zinb.hidden.size(); ++l) {
        const std::string base = "zinb.hidden." + std::to_string(l) + ".";
        f(base + "weight", p.zinb.hidden[l].weight);
        f(base + "bias", p.zinb.hidden[l].bias);
    }
    f("zinb.pi.weight", p.zinb.pi.weight);
    f("zinb.pi.bias", p.zinb.pi.bias);
    f("zinb.mu.weight", p.zinb.mu.weight);
    f("zinb.mu.bias", p.zinb.mu.bias);
    f("zinb.theta.weight", p.zinb.theta.weight);
    f("zinb.theta.bias", p.zinb.theta.bias);
    if (with_centers) f("centers", p.cluster_centers);
}

}  // namespace

std::vector<Tensor> ModelParams::tensors(bool with_centers) const {
    std::vector<Tensor> out;
    for_each_param(*this, with_centers, [&](const std::string&, const Tensor& t) { out.push_back(t); });
    return out;
}

std::vector<std::string> ModelParams::names(bool with_centers) const {
    std::vector<std::string> out;
    for_each_param(*this, with_centers, [&](const std::string& n, const Tensor&) { out.push_back(n); });
    return out;
}

ModelParams ModelParams::clone() const {
    ModelParams c;
    for (const auto& layer : encoder) {
        ChebLayerParams l;
        for (const auto& t : layer.theta) l.theta.push_back(copy_param(t));
        l.bias = copy_param(layer.bias);
        c.encoder.push_back(std::move(l));
    }
    auto dense = [](const DenseLayerParams& d) { return DenseLayerParams{copy_param(d.weight), copy_param(d.bias)}; };
    for (const auto& h : zinb.hidden) c.zinb.hidden.push_back(dense(h));
    c.zinb.pi = dense(zinb.pi);
    c.zinb.mu = dense(zinb.mu);
    c.zinb.theta = dense(zinb.theta);
    c.cluster_centers = copy_param(cluster_centers);
    return c;
}

void ModelParams::save_into(Checkpoint& ck, const std::string& prefix) const {
    ck.put(prefix + "layout", Matrix(1, 3, {static_cast<double>(encoder.size()),
                                             encoder.empty() ? 0.0 : static_cast<double>(encoder[0].order()),
                                             static_cast<double>(zinb.hidden.size())}));
    for_each_param(*this, true, [&](const std::string& n, const Tensor& t) { ck.put(prefix + n, t.value()); });
}

ModelParams ModelParams::load_from(const Checkpoint& ck, const std::string& prefix) {
    const Matrix& layout = ck.get(prefix + "layout");
    const auto n_layers = static_cast<std::size_t>(layout(0, 0));
    const auto order = static_cast<std::size_t>(layout(0, 1));
    const auto n_hidden = static_cast<std::size_t>(layout(0, 2));
    auto p = [&](const std::string& n) { return Tensor::parameter(ck.get(prefix + n)); };
    ModelParams m;
    for (std::size_t l = 0; l < n_layers; ++l) {
        ChebLayerParams layer;
        const std::string base = "enc." + std::to_string(l) + ".";
        for (std::size_t k = 0; k < order; ++k) layer.theta.push_back(p(base + "theta." + std::to_string(k)));
        layer.bias = p(base + "bias");
        m.encoder.push_back(std::move(layer));
    }
    for (std::size_t l = 0; l < n_hidden; ++l) {
        const std::string base = "zinb.hidden." + std::to_string(l) + ".";
        m.zinb.hidden.push_back({p(base + "weight"), p(base + "bias")});
    }
    m.zinb.pi = {p("zinb.pi.weight"), p("zinb.pi.bias")};
    m.zinb.mu = {p("zinb.mu.weight"), p("zinb.mu.bias")};
    m.zinb.theta = {p("zinb.theta.weight"), p("zinb.theta.bias")};
    m.cluster_centers = p("centers");
    return m;
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
    if (shape.n_genes == 0 || shape.latent_dim == 0 || shape.encoder_hidden == 0 || shape.cheb_order == 0)
        throw RangeError("init_params: dimensions and Chebyshev order must be positive");
    std::mt19937_64 rng(seed);
    ModelParams p;
    const std::array<std::pair<std::size_t, std::size_t>, 2> enc_dims{
        {{shape.n_genes, shape.encoder_hidden}, {shape.encoder_hidden, shape.latent_dim}}};
    for (auto [in, out] : enc_dims) {
        ChebLayerParams layer;
        for (std::size_t k = 0; k < shape.cheb_order; ++k) layer.theta.push_back(Tensor::parameter(glorot(in, out, rng)));
        layer.bias = Tensor::parameter(Matrix(1, out));
        p.encoder.push_back(std::move(layer));
    }
    std::size_t in = shape.latent_dim;
    for (std::size_t h : shape.decoder_hidden) {
        p.zinb.hidden.push_back(dense_layer(in, h, rng));
        in = h;
    }
    p.zinb.pi = dense_layer(in, shape.n_genes, rng);
    p.zinb.mu = dense_layer(in, shape.n_genes, rng);
    p.zinb.theta = dense_layer(in, shape.n_genes, rng);
    p.cluster_centers = Tensor::parameter(Matrix(0, shape.latent_dim));
    return p;
}

Tensor chebconv_forward(const Tensor& x, const CellGraph& graph, const ChebLayerParams& layer) {
    if (layer.order() == 0) throw ShapeError("chebconv: layer has no weights");
    if (x.rows() != graph.n)
        throw ShapeError("chebconv: input " + shape_string(x.rows(), x.cols()) + " for a graph of " +
                         std::to_string(graph.n) + " nodes");
    for (const auto& t : layer.theta)
        if (t.rows() != x.cols() || t.cols() != layer.theta[0].cols())
            throw ShapeError("chebconv: weight " + shape_string(t.rows(), t.cols()) + " incompatible with input " +
                             shape_string(x.rows(), x.cols()));

    const CsrMatrix& lhat = graph.scaled_laplacian;
    Tensor z_prev = x;
    Tensor out = ad::matmul(x, layer.theta[0]);
    if (layer.order() > 1) {
        Tensor z_cur = ad::spmm(lhat, x);
        out = out + ad::matmul(z_cur, layer.theta[1]);
        for (std::size_t k = 2; k < layer.order(); ++k) {
            Tensor z_next = ad::scale(ad::spmm(lhat, z_cur), 2.0) - z_prev;
            out = out + ad::matmul(z_next, layer.theta[k]);
            z_prev = z_cur;
            z_cur = z_next;
        }
    }
    if (layer.bias.defined()) out = ad::add_row(out, layer.bias);
    return out;
}

Tensor encode(const Tensor& x, const CellGraph& graph, const ModelParams& params) {
    Tensor h = x;
    for (std::size_t l = 0; l < params.encoder.size(); ++l) {
        h = chebconv_forward(h, graph, params.encoder[l]);
        if (l + 1 < params.encoder.size()) h = ad::relu(h);
    }
    return h;
}

Tensor decode_adjacency(const Tensor& z) { return ad::sigmoid(ad::matmul_nt(z, z)); }

ZinbParams decode_zinb(const Tensor& z, const ModelParams& params) {
    Tensor h = z;
    for (const auto& layer : params.zinb.hidden) h = ad::relu(linear(h, layer));
    ZinbParams out;
    out.pi = ad::clamp(ad::sigmoid(linear(h, params.zinb.pi)), kPiMin, kPiMax);
    // Clamping the exponent keeps exp() finite and gives the same output range.
    out.mu = ad::exp(ad::clamp(linear(h, params.zinb.mu), std::log(kRateMin), std::log(kRateMax)));
    out.theta = ad::exp(ad::clamp(linear(h, params.zinb.theta), std::log(kRateMin), std::log(kRateMax)));
    for (const Tensor* t : {&out.pi, &out.mu, &out.theta})
        for (double v : t->value().values())
            if (!std::isfinite(v)) throw NonFiniteError("ZINB decoder produced a non-finite value");
    return out;
}

Tensor soft_assign(const Tensor& z, const Tensor& centers) {
    const Matrix& zv = z.value();
    const Matrix& cv = centers.value();
    if (zv.cols() != cv.cols())
        throw ShapeError("soft_assign: embedding " + shape_string(zv.rows(), zv.cols()) + " vs centers " +
                         shape_string(cv.rows(), cv.cols()));
    const std::size_t n = zv.rows(), k = cv.rows(), d = zv.cols();
    Matrix kern(n, k);
    Matrix q(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double dist = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = zv(i, c) - cv(j, c);
                dist += diff * diff;
            }
            kern(i, j) = 1.0 / (1.0 + dist);
            s += kern(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) q(i, j) = kern(i, j) / s;
    }
    return Tensor::from_op(std::move(q), {z, centers}, [kern = std::move(kern)](ad::Node& self) {
        ad::Node& pz = *self.parents[0];
        ad::Node& pc = *self.parents[1];
        const Matrix& zv = pz.value;
        const Matrix& cv = pc.value;
        const Matrix& q = self.value;
        const Matrix& g = self.grad;
        const std::size_t n = zv.rows(), k = cv.rows(), d = zv.cols();
        Matrix gz(n, d), gc(k, d);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0, gq = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                s += kern(i, j);
                gq += g(i, j) * q(i, j);
            }
            for (std::size_t j = 0; j < k; ++j) {
                // dL/dkern then d kern / d dist = -kern^2, d dist / d z = 2 (z - c)
                const double dk = (g(i, j) - gq) / s;
                const double dd = -dk * kern(i, j) * kern(i, j);
                for (std::size_t c = 0; c < d; ++c) {
                    const double v = 2.0 * dd * (zv(i, c) - cv(j, c));
                    gz(i, c) += v;
                    gc(j, c) -= v;
                }
            }
        }
        if (pz.requires_grad) pz.accumulate(gz);
        if (pc.requires_grad) pc.accumulate(gc);
    });
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows(), 0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.cols(); ++j)
            if (m(i, j) > m(i, best)) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace scclg
