#include "scclg/pipeline.hpp"

#include <algorithm>

#include "scclg/metrics.hpp"

namespace scclg {

namespace {

template <class F>
auto staged(const std::string& stage, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace

Prepared prepare(const ExpressionMatrix& matrix, const TrainConfig& cfg) {
    staged("config", [&] {
        cfg.validate();
        return 0;
    });
    Prepared p;
    p.matrix = matrix;
    p.data = staged("preprocess", [&] { return preprocess(matrix, std::min(cfg.n_hvg, matrix.n_genes)); });
    p.graph = staged("graph", [&] { return knn_graph(p.data.normalized, cfg.k_neighbors, cfg.laplacian_kind); });
    p.n_clusters = staged("config", [&] {
        if (cfg.n_clusters > 0) return cfg.n_clusters;
        if (!matrix.labels) throw RangeError("n_clusters is 0 and no labels are available to infer it");
        return matrix.n_classes();
    });
    return p;
}

TrainState run_pretrain(const Prepared& prep, const TrainConfig& cfg, const PipelineHooks& hooks) {
    TrainState s = staged("pretrain", [&] { return pretrain(prep.data, prep.graph, cfg, prep.n_clusters, hooks.on_epoch); });
    if (hooks.on_boundary) hooks.on_boundary(s, "pretrain");
    return s;
}

PipelineResult run_from_state(const Prepared& prep, TrainState state, const TrainConfig& cfg,
                              const PipelineHooks& hooks) {
    if (state.phase == Phase::Pretrain && state.epoch < cfg.t1) {
        staged("pretrain", [&] {
            continue_pretrain(state, prep.data, prep.graph, cfg, hooks.on_epoch);
            return 0;
        });
        if (hooks.on_boundary) hooks.on_boundary(state, "pretrain");
    }
    if (state.phase == Phase::Pretrain) {
        staged("difficulty", [&] {
            enter_formal(state, prep.data, prep.graph, cfg);
            return 0;
        });
        if (hooks.on_boundary) hooks.on_boundary(state, "formal");
    }
    if (state.phase == Phase::Formal) {
        staged("formal", [&] {
            formal_train(state, pruned_view(state, prep.data, prep.graph), cfg, hooks.on_epoch);
            return 0;
        });
        if (hooks.on_boundary) hooks.on_boundary(state, "done");
    }
    PipelineResult r;
    r.labels = staged("predict", [&] { return predict(state, prep.data, prep.graph); });
    r.pruned.assign(prep.graph.n, false);
    for (std::size_t v : state.prune->dropped) r.pruned[v] = true;
    if (prep.matrix.labels) {
        staged("evaluate", [&] {
            r.ari = ari(*prep.matrix.labels, r.labels);
            r.nmi = nmi(*prep.matrix.labels, r.labels);
            return 0;
        });
    }
    r.state = std::move(state);
    return r;
}

PipelineResult run_pipeline(const ExpressionMatrix& matrix, const TrainConfig& cfg, const PipelineHooks& hooks) {
    const Prepared prep = prepare(matrix, cfg);
    return run_from_state(prep, run_pretrain(prep, cfg, hooks), cfg, hooks);
}

}  // namespace scclg
