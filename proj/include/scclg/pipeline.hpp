#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scclg/cellgraph.hpp"
#include "scclg/config.hpp"
#include "scclg/errors.hpp"
#include "scclg/ingest.hpp"
#include "scclg/preprocess.hpp"
#include "scclg/trainer.hpp"

namespace scclg {

/// Failure of one pipeline stage; what() reads "<stage>: <cause>".
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Preprocessed data and cell graph shared by every run on one matrix.
struct Prepared {
    ExpressionMatrix matrix;
    PreprocessedData data;
    CellGraph graph;
    std::size_t n_clusters = 0;
};

/// HVG selection (capped at the gene count), normalization, kNN graph and the
/// cluster count (cfg.n_clusters, else the number of label classes).
Prepared prepare(const ExpressionMatrix& matrix, const TrainConfig& cfg);

struct PipelineHooks {
    EpochHook on_epoch;
    /// Called with "pretrain" after pre-training, "formal" once pruning and
    /// centers are ready, "done" after formal training.
    std::function<void(const TrainState&, const std::string&)> on_boundary;
};

struct PipelineResult {
    TrainState state;
    std::vector<int> labels;
    std::vector<bool> pruned;
    std::optional<double> ari;
    std::optional<double> nmi;
};

TrainState run_pretrain(const Prepared& prep, const TrainConfig& cfg, const PipelineHooks& hooks = {});

/// Carries a state of any phase through to prediction.
PipelineResult run_from_state(const Prepared& prep, TrainState state, const TrainConfig& cfg,
                              const PipelineHooks& hooks = {});

PipelineResult run_pipeline(const ExpressionMatrix& matrix, const TrainConfig& cfg, const PipelineHooks& hooks = {});

}  // namespace scclg
