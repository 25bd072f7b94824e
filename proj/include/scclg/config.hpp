#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "scclg/cellgraph.hpp"
#include "scclg/curriculum.hpp"
#include "scclg/ingest.hpp"
#include "scclg/losses.hpp"

namespace scclg {

/// Every knob of the two-phase training procedure.
struct TrainConfig {
    std::size_t t1 = 1000;
    std::size_t t2 = 500;
    double lr_pretrain = 5e-4;
    double lr_formal = 1e-4;
    std::size_t k_neighbors = 20;
    double alpha = 0.11;
    std::size_t n_hvg = 500;
    double beta = 0.5;
    double lambda0 = 0.25;
    /// Ramp length of the pacing function; 0 means t2 / 2.
    double t_hat = 0.0;
    /// 0 means "number of label classes" (labels required then).
    std::size_t n_clusters = 0;
    std::size_t latent_dim = 32;
    std::size_t encoder_hidden = 256;
    std::size_t cheb_order = 3;
    std::size_t target_update_interval = 5;
    std::uint64_t seed = 0;
    LossWeights loss_weights{};
    double convergence_tol = 1e-3;
    LocalMode local_mode = LocalMode::Literal;
    LaplacianKind laplacian_kind = LaplacianKind::SymNormalized;
    PruneStrategy prune_strategy = PruneStrategy::Hard;
    /// Checkpoint cadence in epochs (0 disables periodic checkpoints).
    std::size_t checkpoint_interval = 100;

    double effective_t_hat() const;
    /// Throws RangeError naming the first invalid field.
    void validate() const;
};

struct RunConfig {
    TrainConfig train;
    std::filesystem::path input;
    MatrixFormat format = MatrixFormat::Csv;
    std::filesystem::path labels;
    std::filesystem::path output_dir = "scclg_out";

    // prune-study grid
    std::vector<PruneStrategy> study_strategies{PruneStrategy::Hard, PruneStrategy::Random, PruneStrategy::Easy};
    std::vector<double> study_alphas{0.06, 0.11, 0.16, 0.21};
    std::size_t study_seeds = 3;
};

/// Flat "key=value" view, every field, in a fixed order.
std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg);

/// Sets one field from text. Throws RangeError on unknown keys or bad values.
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads "key=value" lines ('#' comments, blank lines ignored) over defaults.
RunConfig load_config(const std::filesystem::path& path);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Expands "lo:hi:step" or "a,b,c" into a list; endpoints of a range are inclusive.
std::vector<double> parse_alpha_grid(const std::string& text);

std::string format_double(double v);

}  // namespace scclg
