// Command-line front end: synth, train, difficulty, evaluate, prune-study.
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scclg/config.hpp"
#include "scclg/errors.hpp"
#include "scclg/ingest.hpp"
#include "scclg/metrics.hpp"
#include "scclg/pipeline.hpp"
#include "scclg/trainer.hpp"

namespace fs = std::filesystem;
using namespace scclg;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Bad input paths and unusable arguments; reported with exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::map<std::string, std::string> kKeyHelp{
    {"t1", "pre-training epochs"},
    {"t2", "formal training epochs"},
    {"lr_pretrain", "Adam learning rate while pre-training"},
    {"lr_formal", "Adam learning rate during formal training"},
    {"k_neighbors", "neighbors per cell in the kNN graph"},
    {"alpha", "fraction of nodes pruned before formal training"},
    {"n_hvg", "highly variable genes kept (capped at the gene count)"},
    {"beta", "weight of local difficulty against global difficulty"},
    {"lambda0", "initial training fraction of the pacing schedule"},
    {"t_hat", "pacing ramp length in epochs; 0 means t2 / 2"},
    {"n_clusters", "cluster count; 0 takes the number of label classes"},
    {"latent_dim", "embedding width"},
    {"encoder_hidden", "hidden ChebConv width"},
    {"cheb_order", "Chebyshev order K of each graph convolution"},
    {"target_update_interval", "epochs between target distribution refreshes"},
    {"seed", "random seed for initialization, pruning and k-means"},
    {"loss_weights", "weights rec,zinb,cls"},
    {"convergence_tol", "stop once fewer than this fraction of labels change between refreshes"},
    {"local_mode", "literal (sum of similarities) or dissimilarity (sum of 1 - similarity)"},
    {"laplacian_kind", "sym_normalized or combinatorial"},
    {"prune_strategy", "hard, easy or random"},
    {"checkpoint_interval", "epochs between periodic checkpoints; 0 disables them"},
    {"input", "count matrix path"},
    {"format", "csv or mtx"},
    {"labels", "optional cell_id,label CSV with ground truth"},
    {"output_dir", "directory for every output file"},
    {"study_strategies", "prune-study strategies, comma separated"},
    {"study_alphas", "prune-study rates: a,b,c or lo:hi:step"},
    {"study_seeds", "prune-study seeds per cell (seed, seed + 1, ...)"},
};

/// One string option per RunConfig key, applied on top of --config.
class ConfigFlags {
public:
    void attach(CLI::App& app) {
        app.add_option("--config", config_path_, "key=value file applied before the flags below");
        const RunConfig defaults;
        for (const auto& [key, value] : to_key_values(defaults)) {
            std::string flag = "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            auto& slot = values_[key];
            app.add_option(flag, slot, kKeyHelp.at(key))->default_str(value)->type_name(key == "input" ? "PATH" : "");
        }
        app.add_option("--out", values_["output_dir"], "alias of --output-dir");
    }

    RunConfig resolve(CLI::App& app) const {
        RunConfig cfg;
        if (!config_path_.empty()) {
            if (!fs::exists(config_path_)) throw UsageError("config file not found: " + config_path_);
            apply_config_file(cfg, config_path_);
        }
        for (const auto& [key, value] : values_) {
            std::string flag = "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            const bool given = key == "output_dir" ? app.count(flag) + app.count("--out") > 0 : app.count(flag) > 0;
            if (given) apply_key_value(cfg, key, value);
        }
        cfg.train.validate();
        return cfg;
    }

private:
    std::string config_path_;
    std::map<std::string, std::string> values_;
};

ExpressionMatrix load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("no input matrix given (--input)");
    if (!fs::exists(cfg.input)) throw UsageError("input not found: " + cfg.input.string());
    if (!cfg.labels.empty() && !fs::exists(cfg.labels)) throw UsageError("labels not found: " + cfg.labels.string());
    try {
        ExpressionMatrix m = load_matrix(cfg.input, cfg.format);
        if (!cfg.labels.empty()) attach_labels(m, cfg.labels);
        return m;
    } catch (const Error& e) {
        throw StageError("ingest", e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

void write_difficulty(const fs::path& path, const TrainState& state) {
    const DifficultyReport& r = *state.report;
    std::vector<std::size_t> rank(r.order.size());
    for (std::size_t i = 0; i < r.order.size(); ++i) rank[r.order[i]] = i;
    std::vector<bool> dropped(r.order.size(), false);
    for (std::size_t v : state.prune->dropped) dropped[v] = true;
    auto out = open_out(path);
    out << "node_id,local,global,combined,rank,dropped\n";
    for (std::size_t v = 0; v < r.order.size(); ++v)
        out << v << ',' << format_double(r.local[v]) << ',' << format_double(r.global_[v]) << ','
            << format_double(r.combined[v]) << ',' << rank[v] << ',' << (dropped[v] ? 1 : 0) << '\n';
}

void write_training_log(const fs::path& path, const std::vector<LossBreakdown>& history) {
    auto out = open_out(path);
    out << "epoch,rec,zinb,cls,total\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        const auto& l = history[e];
        out << e << ',' << format_double(l.rec) << ',' << format_double(l.zinb) << ',' << format_double(l.cls) << ','
            << format_double(l.total) << '\n';
    }
}

nlohmann::ordered_json metrics_json(double ari_v, double nmi_v, std::span<const int> truth, std::span<const int> pred) {
    nlohmann::ordered_json j;
    j["ari"] = ari_v;
    j["nmi"] = nmi_v;
    j["n_cells"] = truth.size();
    j["n_clusters_true"] = count_clusters(truth);
    j["n_clusters_pred"] = count_clusters(pred);
    return j;
}

struct SynthArgs {
    SynthesisSpec spec;
    std::string out = "synthetic.csv";
    std::string labels;
    std::string format = "csv";
};

int cmd_synth(const SynthArgs& a) {
    const MatrixFormat format = parse_matrix_format(a.format);
    const ExpressionMatrix m = synthesize(a.spec);
    const fs::path out = a.out;
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const fs::path labels = a.labels.empty() ? fs::path(out).replace_extension(".labels.csv") : fs::path(a.labels);
    save_matrix(m, out, format);
    save_labels(m, labels);
    std::cout << "wrote " << m.n_cells << " cells x " << m.n_genes << " genes, " << m.n_classes() << " clusters to "
              << out.string() << " (labels: " << labels.string() << ")\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& resume) {
    const ExpressionMatrix m = load_input(cfg);
    if (!resume.empty() && !fs::exists(resume)) throw UsageError("checkpoint not found: " + resume);
    const fs::path dir = cfg.output_dir;
    const fs::path ckdir = dir / "checkpoints";
    fs::create_directories(ckdir);
    save_config(cfg, dir / "config.txt");

    const TrainConfig& t = cfg.train;
    const Prepared prep = prepare(m, t);
    PipelineHooks hooks;
    hooks.on_epoch = [&](const TrainState& s) {
        if (t.checkpoint_interval == 0 || s.epoch % t.checkpoint_interval != 0) return;
        std::ostringstream name;
        name << to_string(s.phase) << '_' << std::setw(5) << std::setfill('0') << s.epoch << ".ckpt";
        to_checkpoint(s).save(ckdir / name.str());
    };
    hooks.on_boundary = [&](const TrainState& s, const std::string& stage) {
        to_checkpoint(s).save(ckdir / (stage + ".ckpt"));
        if (stage == "formal") write_difficulty(dir / "difficulty.csv", s);
        std::cerr << "[" << stage << "] epoch " << s.epoch << '\n';
    };

    TrainState state = resume.empty() ? run_pretrain(prep, t, hooks) : from_checkpoint(Checkpoint::load(resume));
    if (state.report) write_difficulty(dir / "difficulty.csv", state);
    const PipelineResult r = run_from_state(prep, std::move(state), t, hooks);

    write_training_log(dir / "training_log.csv", r.state.loss_history);
    {
        auto out = open_out(dir / "labels.csv");
        out << "cell_id,predicted,pruned_flag\n";
        for (std::size_t i = 0; i < r.labels.size(); ++i)
            out << m.cell_ids[i] << ',' << r.labels[i] << ',' << (r.pruned[i] ? 1 : 0) << '\n';
    }
    if (r.ari) {
        write_json(dir / "metrics.json", metrics_json(*r.ari, *r.nmi, *m.labels, r.labels));
        std::cout << "ARI=" << format_double(*r.ari) << " NMI=" << format_double(*r.nmi) << '\n';
    }
    std::cout << "trained " << r.state.loss_history.size() << " epochs"
              << (r.state.converged ? " (formal phase converged)" : "") << "; outputs in " << dir.string() << '\n';
    return 0;
}

int cmd_difficulty(const RunConfig& cfg) {
    const ExpressionMatrix m = load_input(cfg);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const Prepared prep = prepare(m, cfg.train);
    TrainState state = run_pretrain(prep, cfg.train);
    try {
        enter_formal(state, prep.data, prep.graph, cfg.train);
    } catch (const Error& e) {
        throw StageError("difficulty", e.what());
    }
    write_difficulty(dir / "difficulty.csv", state);
    std::cout << "difficulty of " << prep.graph.n << " nodes, " << state.prune->dropped.size() << " dropped; wrote "
              << (dir / "difficulty.csv").string() << '\n';
    return 0;
}

/// cell id -> label from "cell_id,label[,...]" rows; a non-numeric first row is a header.
std::map<std::string, int> read_label_column(const fs::path& path) {
    if (!fs::exists(path)) throw UsageError("labels not found: " + path.string());
    std::ifstream in(path);
    std::map<std::string, int> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, value;
        std::getline(ss, id, ',');
        std::getline(ss, value, ',');
        int label = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), label);
        if (ec != std::errc() || ptr != value.data() + value.size()) {
            if (lineno == 1) continue;
            throw ParseError(lineno, "label '" + value + "' in " + path.string() + " is not an integer");
        }
        if (!out.emplace(id, label).second) throw DuplicateIdError(id);
    }
    return out;
}

int cmd_evaluate(const std::string& truth_path, const std::string& pred_path, const std::string& json_path) {
    const auto truth = read_label_column(truth_path), pred = read_label_column(pred_path);
    std::vector<int> t, p;
    for (const auto& [id, label] : truth) {
        const auto it = pred.find(id);
        if (it == pred.end()) throw UsageError("cell '" + id + "' has no prediction");
        t.push_back(label);
        p.push_back(it->second);
    }
    if (pred.size() != truth.size()) throw UsageError("prediction file has cells missing from the truth file");
    const double a = ari(t, p), n = nmi(t, p);
    std::cout << "ARI=" << format_double(a) << " NMI=" << format_double(n) << '\n';
    const fs::path out = json_path.empty() ? fs::path(pred_path).parent_path() / "evaluation.json" : fs::path(json_path);
    write_json(out, metrics_json(a, n, t, p));
    return 0;
}

int cmd_prune_study(const RunConfig& cfg) {
    const ExpressionMatrix m = load_input(cfg);
    if (!m.labels) throw UsageError("prune-study needs ground-truth labels (--labels)");
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    save_config(cfg, dir / "config.txt");
    auto out = open_out(dir / "prune_study.csv");
    out << "strategy,alpha,seed,ari,nmi\n";
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cfg.study_seeds; ++k) {
        TrainConfig base = cfg.train;
        base.seed = cfg.train.seed + k;
        // pre-training does not depend on the strategy or alpha, so every cell of this seed shares it
        Prepared prep;
        TrainState pre;
        try {
            prep = prepare(m, base);
            pre = run_pretrain(prep, base);
        } catch (const Error& e) {
            std::cerr << "seed " << base.seed << ": " << e.what() << '\n';
            failures += cfg.study_strategies.size() * cfg.study_alphas.size();
            continue;
        }
        for (PruneStrategy s : cfg.study_strategies)
            for (double alpha : cfg.study_alphas) {
                TrainConfig c = base;
                c.prune_strategy = s;
                c.alpha = alpha;
                try {
                    c.validate();
                    const PipelineResult r = run_from_state(prep, pre.clone(), c);
                    out << to_string(s) << ',' << format_double(alpha) << ',' << c.seed << ',' << format_double(*r.ari)
                        << ',' << format_double(*r.nmi) << '\n';
                    out.flush();
                    std::cerr << to_string(s) << " alpha=" << format_double(alpha) << " seed=" << c.seed
                              << " ARI=" << format_double(*r.ari) << '\n';
                } catch (const Error& e) {
                    std::cerr << to_string(s) << " alpha=" << format_double(alpha) << " seed=" << c.seed << ": "
                              << e.what() << '\n';
                    ++failures;
                }
            }
    }
    std::cout << "wrote " << (dir / "prune_study.csv").string() << '\n';
    return failures == 0 ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curriculum-learning graph-embedding clustering of single-cell RNA-seq counts"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(40);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Write a synthetic ZINB count matrix and its labels");
    s->add_option("--cells", synth.spec.n_cells, "number of cells")->capture_default_str();
    s->add_option("--genes", synth.spec.n_genes, "number of genes")->capture_default_str();
    s->add_option("--clusters", synth.spec.n_clusters, "number of clusters")->capture_default_str();
    s->add_option("--dropout", synth.spec.dropout_rate, "zero-inflation probability")->capture_default_str();
    s->add_option("--dispersion", synth.spec.dispersion, "negative binomial dispersion")->capture_default_str();
    s->add_option("--mean-scale", synth.spec.mean_scale, "scale of the cluster gene means")->capture_default_str();
    s->add_option("--seed", synth.spec.seed, "random seed")->capture_default_str();
    s->add_option("--out", synth.out, "matrix path")->capture_default_str();
    s->add_option("--labels", synth.labels, "labels path (default: <out stem>.labels.csv)");
    s->add_option("--format", synth.format, "csv or mtx")->capture_default_str();

    ConfigFlags train_flags, diff_flags, study_flags;
    std::string resume;
    auto* t = app.add_subcommand("train", "Run pre-training, difficulty, pruning, formal training and prediction");
    train_flags.attach(*t);
    t->add_option("--resume", resume, "continue from a checkpoint written by an earlier run");

    auto* d = app.add_subcommand("difficulty", "Pre-train, then write per-node difficulty and pruning");
    diff_flags.attach(*d);

    std::string truth, pred, json_out;
    auto* e = app.add_subcommand("evaluate", "Compare predicted labels with ground truth");
    e->add_option("--truth", truth, "cell_id,label CSV")->required();
    e->add_option("--pred", pred, "cell_id,predicted[,...] CSV")->required();
    e->add_option("--json", json_out, "output JSON (default: evaluation.json next to --pred)");

    auto* p = app.add_subcommand("prune-study", "Grid of pruning strategies and rates over several seeds");
    study_flags.attach(*p);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitUsage;
    }

    try {
        if (s->parsed()) return cmd_synth(synth);
        if (t->parsed()) return cmd_train(train_flags.resolve(*t), resume);
        if (d->parsed()) return cmd_difficulty(diff_flags.resolve(*d));
        if (e->parsed()) return cmd_evaluate(truth, pred, json_out);
        if (p->parsed()) return cmd_prune_study(study_flags.resolve(*p));
    } catch (const UsageError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& ex) {
        std::cerr << "error: config " << ex.what() << '\n';
        return kExitUsage;
    } catch (const RangeError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
