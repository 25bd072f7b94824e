#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scclg/autodiff.hpp"
#include "scclg/cellgraph.hpp"
#include "scclg/checkpoint.hpp"
#include "scclg/matrix.hpp"

namespace scclg {

/// One Chebyshev graph convolution: H = sum_k Z_k Theta_k + b with
/// Z_1 = X, Z_2 = L X, Z_k = 2 L Z_{k-1} - Z_{k-2} on the scaled Laplacian.
struct ChebLayerParams {
    std::vector<ad::Tensor> theta;  // K matrices, in_dim x out_dim
    ad::Tensor bias;                // 1 x out_dim

    std::size_t order() const { return theta.size(); }
};

struct DenseLayerParams {
    ad::Tensor weight;  // in x out
    ad::Tensor bias;    // 1 x out
};

struct ZinbDecoderParams {
    std::vector<DenseLayerParams> hidden;  // latent -> 128 -> 256 -> 512
    DenseLayerParams pi, mu, theta;        // 512 -> n_genes
};

struct ModelShape {
    std::size_t n_genes = 0;
    std::size_t encoder_hidden = 256;
    std::size_t latent_dim = 32;
    std::size_t cheb_order = 3;
    std::vector<std::size_t> decoder_hidden{128, 256, 512};
    std::size_t n_clusters = 0;
};

struct ModelParams {
    std::vector<ChebLayerParams> encoder;
    ZinbDecoderParams zinb;
    /// n_clusters x latent_dim; 0 rows before clustering is initialized.
    ad::Tensor cluster_centers;

    /// Every parameter tensor in a fixed order, optionally with the centers.
    std::vector<ad::Tensor> tensors(bool with_centers) const;
    std::vector<std::string> names(bool with_centers) const;

    /// Deep copy; tensor handles in the copy do not alias this one.
    ModelParams clone() const;

    void save_into(Checkpoint& ck, const std::string& prefix = "param.") const;
    static ModelParams load_from(const Checkpoint& ck, const std::string& prefix = "param.");
};

/// Glorot-uniform weights, zero biases, zero-row centers.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);

ad::Tensor chebconv_forward(const ad::Tensor& x, const CellGraph& graph, const ChebLayerParams& layer);

/// Stacked ChebConv layers, relu between them, linear output.
ad::Tensor encode(const ad::Tensor& x, const CellGraph& graph, const ModelParams& params);

/// sigmoid(Z Z^T)
ad::Tensor decode_adjacency(const ad::Tensor& z);

struct ZinbParams {
    ad::Tensor pi, mu, theta;
};

inline constexpr double kPiMin = 1e-10;
inline constexpr double kPiMax = 1.0 - 1e-10;
inline constexpr double kRateMin = 1e-10;
inline constexpr double kRateMax = 1e10;

/// Three heads on a relu MLP: sigmoid for pi, exp for mu and theta, clamped to
/// [1e-10, 1 - 1e-10] and [1e-10, 1e10]. Throws NonFiniteError on NaN.
ZinbParams decode_zinb(const ad::Tensor& z, const ModelParams& params);

/// Student-t (one degree of freedom) soft assignment of rows of z to centers.
ad::Tensor soft_assign(const ad::Tensor& z, const ad::Tensor& centers);

/// Row-wise argmax, ties to the lower column.
std::vector<int> argmax_rows(const Matrix& m);

}  // namespace scclg
