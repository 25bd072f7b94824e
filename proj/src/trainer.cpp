#include "scclg/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "scclg/errors.hpp"
#include "scclg/kmeans.hpp"

namespace scclg {

using ad::Tensor;

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Pretrain: return "pretrain";
        case Phase::Formal: return "formal";
        case Phase::Done: return "done";
    }
    return "?";
}

TrainState TrainState::clone() const {
    TrainState c = *this;
    c.params = params.clone();
    return c;
}

ModelShape model_shape(const PreprocessedData& data, const TrainConfig& cfg, std::size_t n_clusters) {
    ModelShape s;
    s.n_genes = data.normalized.cols();
    s.encoder_hidden = cfg.encoder_hidden;
    s.latent_dim = cfg.latent_dim;
    s.cheb_order = cfg.cheb_order;
    s.n_clusters = n_clusters;
    return s;
}

TrainState initial_state(const ModelShape& shape, const TrainConfig& cfg) {
    cfg.validate();
    if (shape.n_clusters < 1) throw RangeError("n_clusters must be >= 1");
    TrainState s;
    s.n_clusters = shape.n_clusters;
    s.params = init_params(shape, cfg.seed);
    s.adam = AdamState(cfg.lr_pretrain);
    return s;
}

namespace {

bool all_finite(const Matrix& m) {
    for (double v : m.values())
        if (!std::isfinite(v)) return false;
    return true;
}

void zero_grads(const std::vector<Tensor>& ts) {
    for (Tensor t : ts) t.zero_grad();
}

// One optimizer step on `total`; the caller's state stays untouched on failure.
void step_or_throw(const Tensor& total, const std::vector<Tensor>& trainable, AdamState& adam, std::size_t epoch) {
    if (!std::isfinite(total.item())) throw DivergenceError(epoch, "objective is " + std::to_string(total.item()));
    total.backward();
    for (const Tensor& t : trainable)
        if (t.has_grad() && !all_finite(t.grad())) throw DivergenceError(epoch, "gradient is not finite");
    adam_step(trainable, adam);
}

}  // namespace

void continue_pretrain(TrainState& state, const PreprocessedData& data, const CellGraph& graph,
                       const TrainConfig& cfg, const EpochHook& hook) {
    cfg.validate();
    if (state.phase != Phase::Pretrain) throw StateError("pretrain: state is in phase " + to_string(state.phase));
    if (data.normalized.rows() != graph.n)
        throw ShapeError("pretrain: " + std::to_string(data.normalized.rows()) + " cells but graph has " +
                         std::to_string(graph.n) + " nodes");
    const Matrix adjacency = graph.dense_adjacency();
    const Matrix counts = data.raw_matrix();
    const auto trainable = state.params.tensors(false);
    while (state.epoch < cfg.t1) {
        zero_grads(trainable);
        LossBreakdown lb;
        Tensor total;
        try {
            const Tensor z = encode(Tensor::constant(data.normalized), graph, state.params);
            const Tensor rec = cfg.loss_weights.rec * loss_rec(adjacency, decode_adjacency(z));
            const Tensor zinb = cfg.loss_weights.zinb * loss_zinb(counts, decode_zinb(z, state.params));
            total = rec + zinb;
            lb = {rec.item(), zinb.item(), 0.0, total.item()};
        } catch (const NonFiniteError& e) {
            throw DivergenceError(state.epoch, e.what());
        }
        step_or_throw(total, trainable, state.adam, state.epoch);
        state.loss_history.push_back(lb);
        ++state.epoch;
        if (hook) hook(state);
    }
}

TrainState pretrain(const PreprocessedData& data, const CellGraph& graph, const TrainConfig& cfg,
                    std::size_t n_clusters, const EpochHook& hook) {
    TrainState state = initial_state(model_shape(data, cfg, n_clusters), cfg);
    try {
        continue_pretrain(state, data, graph, cfg, hook);
    } catch (DivergenceError& e) {
        e.last_good = std::make_shared<TrainState>(std::move(state));
        throw;
    }
    return state;
}

Matrix embed(const ModelParams& params, const PreprocessedData& data, const CellGraph& graph) {
    return encode(Tensor::constant(data.normalized), graph, params).value();
}

PrunedView pruned_view(const TrainState& state, const PreprocessedData& data, const CellGraph& graph) {
    if (!state.prune) throw StateError("pruned_view: no pruning result yet");
    PrunedView v;
    v.nodes = state.prune->kept;
    std::sort(v.nodes.begin(), v.nodes.end());
    v.data = subset_cells(data, v.nodes);
    v.graph = induced_subgraph(graph, v.nodes);
    return v;
}

void enter_formal(TrainState& state, const PreprocessedData& data, const CellGraph& graph, const TrainConfig& cfg) {
    cfg.validate();
    if (state.phase != Phase::Pretrain || state.epoch != cfg.t1)
        throw StateError("enter_formal: pre-training is not finished");
    const Matrix z = embed(state.params, data, graph);
    const auto local = local_difficulty(z, graph, cfg.local_mode);
    const auto global_ = global_difficulty(graph);
    state.report = combine_and_rank(local, global_, cfg.beta);
    state.prune = prune(*state.report, cfg.alpha, cfg.prune_strategy, cfg.seed);

    const PrunedView view = pruned_view(state, data, graph);
    state.phase = Phase::Formal;
    state.epoch = 0;
    state.adam = AdamState(cfg.lr_formal);
    state.labels_prev.reset();
    state.target = Matrix();
    state.subset_sizes.clear();
    state.converged = false;
    const Matrix zk = embed(state.params, view.data, view.graph);
    state.params.cluster_centers = Tensor::parameter(init_centers(zk, state.n_clusters, cfg.seed));
}

void formal_train(TrainState& state, const PrunedView& view, const TrainConfig& cfg, const EpochHook& hook) {
    cfg.validate();
    if (state.phase == Phase::Done) return;
    if (state.phase != Phase::Formal || !state.prune || state.params.cluster_centers.rows() == 0)
        throw StateError("formal_train: difficulty, pruning and centers must come first");
    const std::size_t n_kept = view.nodes.size();
    if (view.graph.n != n_kept || view.data.normalized.rows() != n_kept)
        throw ShapeError("formal_train: pruned view is inconsistent");

    // Position of each kept node (easiest first) inside the pruned graph.
    std::vector<std::size_t> position(n_kept);
    for (std::size_t r = 0; r < n_kept; ++r) {
        const auto it = std::lower_bound(view.nodes.begin(), view.nodes.end(), state.prune->kept[r]);
        position[r] = static_cast<std::size_t>(it - view.nodes.begin());
    }
    const std::size_t n_original = n_kept + state.prune->dropped.size();
    const PacingConfig pacing{cfg.lambda0, cfg.effective_t_hat()};
    const Matrix adjacency = view.graph.dense_adjacency();
    const Matrix counts = view.data.raw_matrix();
    const Matrix x = view.data.normalized;
    const auto trainable = state.params.tensors(true);

    while (state.epoch < cfg.t2 && !state.converged) {
        const double fraction = pacing_fraction(static_cast<double>(state.epoch), pacing, cfg.alpha);
        const std::size_t size = training_subset_size(fraction, n_original, n_kept);
        std::vector<std::size_t> subset(position.begin(), position.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(subset.begin(), subset.end());

        zero_grads(trainable);
        LossBreakdown lb;
        Tensor total;
        try {
            const Tensor z = encode(Tensor::constant(x), view.graph, state.params);
            const Tensor q = soft_assign(z, state.params.cluster_centers);
            if (state.epoch % cfg.target_update_interval == 0) {
                state.target = target_distribution(q.value());
                auto labels = argmax_rows(q.value());
                if (state.labels_prev) {
                    std::size_t changed = 0;
                    for (std::size_t i = 0; i < labels.size(); ++i) changed += labels[i] != (*state.labels_prev)[i];
                    const double frac = static_cast<double>(changed) / static_cast<double>(labels.size());
                    if (frac < cfg.convergence_tol) {
                        state.labels_prev = std::move(labels);
                        state.converged = true;
                        break;
                    }
                }
                state.labels_prev = std::move(labels);
            }
            const NodeMask mask{std::span<const std::size_t>(subset)};
            const Tensor rec = cfg.loss_weights.rec * loss_rec(adjacency, decode_adjacency(z), mask);
            const Tensor zinb = cfg.loss_weights.zinb * loss_zinb(counts, decode_zinb(z, state.params), mask);
            const Tensor cls = cfg.loss_weights.cls * loss_cls(state.target, q, mask);
            total = rec + zinb + cls;
            lb = {rec.item(), zinb.item(), cls.item(), total.item()};
        } catch (const NonFiniteError& e) {
            throw DivergenceError(state.epoch, e.what());
        }
        step_or_throw(total, trainable, state.adam, state.epoch);
        state.loss_history.push_back(lb);
        state.subset_sizes.push_back(size);
        ++state.epoch;
        if (hook) hook(state);
    }
    state.phase = Phase::Done;
}

std::vector<int> predict(const TrainState& state, const PreprocessedData& data, const CellGraph& graph) {
    if (state.phase != Phase::Done) throw StateError("predict: training has not finished");
    const Tensor z = encode(Tensor::constant(data.normalized), graph, state.params);
    return argmax_rows(soft_assign(z, state.params.cluster_centers).value());
}

// ---- checkpoint conversion ----

namespace {

template <class T>
Matrix row_of(const std::vector<T>& v) {
    Matrix m(1, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = static_cast<double>(v[i]);
    return m;
}

template <class T>
std::vector<T> from_row(const Matrix& m) {
    std::vector<T> v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = static_cast<T>(m.data()[i]);
    return v;
}

}  // namespace

Checkpoint to_checkpoint(const TrainState& s) {
    Checkpoint ck;
    ck.put("state", Matrix(1, 5, {static_cast<double>(s.phase), static_cast<double>(s.epoch),
                                  s.converged ? 1.0 : 0.0, static_cast<double>(s.adam.step),
                                  static_cast<double>(s.n_clusters)}));
    ck.put("adam.hyper", Matrix(1, 4, {s.adam.learning_rate, s.adam.beta1, s.adam.beta2, s.adam.epsilon}));
    ck.put("adam.count", Matrix(1, 1, static_cast<double>(s.adam.first_moment.size())));
    for (std::size_t i = 0; i < s.adam.first_moment.size(); ++i) {
        ck.put("adam.m." + std::to_string(i), s.adam.first_moment[i]);
        ck.put("adam.v." + std::to_string(i), s.adam.second_moment[i]);
    }
    s.params.save_into(ck);
    Matrix hist(s.loss_history.size(), 4);
    for (std::size_t i = 0; i < s.loss_history.size(); ++i) {
        const auto& l = s.loss_history[i];
        hist(i, 0) = l.rec;
        hist(i, 1) = l.zinb;
        hist(i, 2) = l.cls;
        hist(i, 3) = l.total;
    }
    ck.put("loss_history", hist);
    if (s.report) {
        ck.put("report.local", row_of(s.report->local));
        ck.put("report.global", row_of(s.report->global_));
        ck.put("report.combined", row_of(s.report->combined));
        ck.put("report.order", row_of(s.report->order));
        ck.put("report.beta", Matrix(1, 1, s.report->beta));
    }
    if (s.prune) {
        ck.put("prune.kept", row_of(s.prune->kept));
        ck.put("prune.dropped", row_of(s.prune->dropped));
        ck.put("prune.alpha", Matrix(1, 1, s.prune->alpha));
    }
    if (s.labels_prev) ck.put("labels_prev", row_of(*s.labels_prev));
    ck.put("target", s.target);
    ck.put("subset_sizes", row_of(s.subset_sizes));
    return ck;
}

TrainState from_checkpoint(const Checkpoint& ck) {
    TrainState s;
    const Matrix& st = ck.get("state");
    if (st.size() != 5 || st(0, 0) < 0 || st(0, 0) > 2) throw ParseError(0, "checkpoint: malformed state entry");
    s.phase = static_cast<Phase>(static_cast<int>(st(0, 0)));
    s.epoch = static_cast<std::size_t>(st(0, 1));
    s.converged = st(0, 2) != 0.0;
    s.n_clusters = static_cast<std::size_t>(st(0, 4));
    const Matrix& hyper = ck.get("adam.hyper");
    s.adam = AdamState(hyper(0, 0));
    s.adam.beta1 = hyper(0, 1);
    s.adam.beta2 = hyper(0, 2);
    s.adam.epsilon = hyper(0, 3);
    s.adam.step = static_cast<std::size_t>(st(0, 3));
    const auto n_moments = static_cast<std::size_t>(ck.get("adam.count")(0, 0));
    for (std::size_t i = 0; i < n_moments; ++i) {
        s.adam.first_moment.push_back(ck.get("adam.m." + std::to_string(i)));
        s.adam.second_moment.push_back(ck.get("adam.v." + std::to_string(i)));
    }
    s.params = ModelParams::load_from(ck);
    const Matrix& hist = ck.get("loss_history");
    for (std::size_t i = 0; i < hist.rows(); ++i)
        s.loss_history.push_back({hist(i, 0), hist(i, 1), hist(i, 2), hist(i, 3)});
    if (ck.contains("report.local")) {
        DifficultyReport r;
        r.local = from_row<double>(ck.get("report.local"));
        r.global_ = from_row<double>(ck.get("report.global"));
        r.combined = from_row<double>(ck.get("report.combined"));
        r.order = from_row<std::size_t>(ck.get("report.order"));
        r.beta = ck.get("report.beta")(0, 0);
        s.report = std::move(r);
    }
    if (ck.contains("prune.kept")) {
        PruneResult p;
        p.kept = from_row<std::size_t>(ck.get("prune.kept"));
        p.dropped = from_row<std::size_t>(ck.get("prune.dropped"));
        p.alpha = ck.get("prune.alpha")(0, 0);
        s.prune = std::move(p);
    }
    if (ck.contains("labels_prev")) s.labels_prev = from_row<int>(ck.get("labels_prev"));
    s.target = ck.get("target");
    s.subset_sizes = from_row<std::size_t>(ck.get("subset_sizes"));
    return s;
}

}  // namespace scclg
