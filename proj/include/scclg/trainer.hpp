#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scclg/adam.hpp"
#include "scclg/cellgraph.hpp"
#include "scclg/checkpoint.hpp"
#include "scclg/config.hpp"
#include "scclg/errors.hpp"
#include "scclg/curriculum.hpp"
#include "scclg/losses.hpp"
#include "scclg/model.hpp"
#include "scclg/preprocess.hpp"

namespace scclg {

enum class Phase { Pretrain, Formal, Done };

std::string to_string(Phase p);

/// Everything that evolves during training. `epoch` counts completed epochs
/// of the current phase; `loss_history` spans both phases.
struct TrainState {
    Phase phase = Phase::Pretrain;
    std::size_t epoch = 0;
    std::size_t n_clusters = 0;
    ModelParams params;
    AdamState adam;
    std::vector<LossBreakdown> loss_history;
    std::optional<DifficultyReport> report;
    std::optional<PruneResult> prune;
    /// Argmax labels of the kept nodes at the last target refresh.
    std::optional<std::vector<int>> labels_prev;
    /// Target distribution over the kept nodes (pruned-graph order).
    Matrix target;
    /// |V_t| per formal epoch.
    std::vector<std::size_t> subset_sizes;
    bool converged = false;

    /// Deep copy; parameters and moments do not alias.
    TrainState clone() const;
};

/// Non-finite loss or gradient. The state passed in by reference is left as it
/// was after the last good epoch; `last_good` is set when the state was owned
/// by the failing call.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, const std::string& what)
        : Error("non-finite loss at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }
    std::shared_ptr<TrainState> last_good;

private:
    std::size_t epoch_;
};

using EpochHook = std::function<void(const TrainState&)>;

ModelShape model_shape(const PreprocessedData& data, const TrainConfig& cfg, std::size_t n_clusters);

/// Fresh pre-training state with initialized parameters.
TrainState initial_state(const ModelShape& shape, const TrainConfig& cfg);

/// Runs cfg.t1 full-batch epochs of w_rec * L_rec + w_zinb * L_zinb.
TrainState pretrain(const PreprocessedData& data, const CellGraph& graph, const TrainConfig& cfg,
                    std::size_t n_clusters, const EpochHook& hook = {});

/// Continues pre-training from state.epoch up to cfg.t1.
void continue_pretrain(TrainState& state, const PreprocessedData& data, const CellGraph& graph,
                       const TrainConfig& cfg, const EpochHook& hook = {});

/// Node and cell data of the pruned graph, kept nodes in ascending original index.
struct PrunedView {
    std::vector<std::size_t> nodes;
    PreprocessedData data;
    CellGraph graph;
};

PrunedView pruned_view(const TrainState& state, const PreprocessedData& data, const CellGraph& graph);

/// Between the phases: difficulty of every node from the pre-trained encoder,
/// pruning, k-means centers on the kept embeddings and a fresh optimizer.
void enter_formal(TrainState& state, const PreprocessedData& data, const CellGraph& graph, const TrainConfig& cfg);

/// Paced training on the pruned graph until cfg.t2 epochs or label convergence.
void formal_train(TrainState& state, const PrunedView& view, const TrainConfig& cfg, const EpochHook& hook = {});

/// Cluster label of every original node (pruned ones included), from the
/// encoder on the full graph. Throws StateError before training is done.
std::vector<int> predict(const TrainState& state, const PreprocessedData& data, const CellGraph& graph);

/// Embedding of every node on the given graph.
Matrix embed(const ModelParams& params, const PreprocessedData& data, const CellGraph& graph);

Checkpoint to_checkpoint(const TrainState& state);
TrainState from_checkpoint(const Checkpoint& ck);

}  // namespace scclg
