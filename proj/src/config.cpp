#include "scclg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "scclg/errors.hpp"

namespace scclg {

double TrainConfig::effective_t_hat() const {
    if (t_hat > 0.0) return t_hat;
    return std::max(1.0, static_cast<double>(t2) / 2.0);
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw RangeError("config: " + what); };
    if (!(lr_pretrain > 0.0 && lr_formal > 0.0)) fail("learning rates must be > 0");
    if (k_neighbors < 1) fail("k_neighbors must be >= 1");
    if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha must be in [0, 1)");
    if (n_hvg < 1) fail("n_hvg must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must be in [0, 1]");
    if (!(lambda0 > 0.0 && lambda0 <= 1.0)) fail("lambda0 must be in (0, 1]");
    if (!(t_hat == 0.0 || t_hat >= 1.0)) fail("t_hat must be 0 (t2 / 2) or >= 1");
    if (latent_dim < 1 || encoder_hidden < 1) fail("layer widths must be >= 1");
    if (cheb_order < 1) fail("cheb_order must be >= 1");
    if (target_update_interval < 1) fail("target_update_interval must be >= 1");
    if (!(loss_weights.rec >= 0 && loss_weights.zinb >= 0 && loss_weights.cls >= 0)) fail("loss weights must be >= 0");
    if (!(convergence_tol >= 0.0)) fail("convergence_tol must be >= 0");
}

std::string format_double(double v) {
    // shortest text that reads back to the same double
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string join_strategies(const std::vector<PruneStrategy>& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + to_string(s[i]);
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
        throw RangeError("config: '" + key + "' expects a number, got '" + v + "'");
    return d;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw RangeError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& cfg) {
    const TrainConfig& t = cfg.train;
    return {
        {"t1", std::to_string(t.t1)},
        {"t2", std::to_string(t.t2)},
        {"lr_pretrain", format_double(t.lr_pretrain)},
        {"lr_formal", format_double(t.lr_formal)},
        {"k_neighbors", std::to_string(t.k_neighbors)},
        {"alpha", format_double(t.alpha)},
        {"n_hvg", std::to_string(t.n_hvg)},
        {"beta", format_double(t.beta)},
        {"lambda0", format_double(t.lambda0)},
        {"t_hat", format_double(t.t_hat)},
        {"n_clusters", std::to_string(t.n_clusters)},
        {"latent_dim", std::to_string(t.latent_dim)},
        {"encoder_hidden", std::to_string(t.encoder_hidden)},
        {"cheb_order", std::to_string(t.cheb_order)},
        {"target_update_interval", std::to_string(t.target_update_interval)},
        {"seed", std::to_string(t.seed)},
        {"loss_weights", join_doubles({t.loss_weights.rec, t.loss_weights.zinb, t.loss_weights.cls})},
        {"convergence_tol", format_double(t.convergence_tol)},
        {"local_mode", to_string(t.local_mode)},
        {"laplacian_kind", to_string(t.laplacian_kind)},
        {"prune_strategy", to_string(t.prune_strategy)},
        {"checkpoint_interval", std::to_string(t.checkpoint_interval)},
        {"input", cfg.input.string()},
        {"format", to_string(cfg.format)},
        {"labels", cfg.labels.string()},
        {"output_dir", cfg.output_dir.string()},
        {"study_strategies", join_strategies(cfg.study_strategies)},
        {"study_alphas", join_doubles(cfg.study_alphas)},
        {"study_seeds", std::to_string(cfg.study_seeds)},
    };
}

std::vector<double> parse_alpha_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw RangeError("alpha grid: expected lo:hi:step, got '" + text + "'");
        const double lo = to_double("alpha grid", trim(parts[0]));
        const double hi = to_double("alpha grid", trim(parts[1]));
        const double step = to_double("alpha grid", trim(parts[2]));
        if (step <= 0.0 || hi < lo) throw RangeError("alpha grid: need step > 0 and hi >= lo");
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) {
            // Round away the accumulated binary error of lo + i * step.
            out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
        }
        return out;
    }
    for (const auto& p : split(text, ',')) out.push_back(to_double("alpha grid", trim(p)));
    return out;
}

void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    TrainConfig& t = cfg.train;
    const std::string v = trim(value);
    if (key == "t1") t.t1 = to_uint(key, v);
    else if (key == "t2") t.t2 = to_uint(key, v);
    else if (key == "lr_pretrain") t.lr_pretrain = to_double(key, v);
    else if (key == "lr_formal") t.lr_formal = to_double(key, v);
    else if (key == "k_neighbors") t.k_neighbors = to_uint(key, v);
    else if (key == "alpha") t.alpha = to_double(key, v);
    else if (key == "n_hvg") t.n_hvg = to_uint(key, v);
    else if (key == "beta") t.beta = to_double(key, v);
    else if (key == "lambda0") t.lambda0 = to_double(key, v);
    else if (key == "t_hat") t.t_hat = to_double(key, v);
    else if (key == "n_clusters") t.n_clusters = to_uint(key, v);
    else if (key == "latent_dim") t.latent_dim = to_uint(key, v);
    else if (key == "encoder_hidden") t.encoder_hidden = to_uint(key, v);
    else if (key == "cheb_order") t.cheb_order = to_uint(key, v);
    else if (key == "target_update_interval") t.target_update_interval = to_uint(key, v);
    else if (key == "seed") t.seed = to_uint(key, v);
    else if (key == "loss_weights") {
        const auto parts = split(v, ',');
        if (parts.size() != 3) throw RangeError("config: loss_weights expects 'rec,zinb,cls'");
        t.loss_weights = {to_double(key, trim(parts[0])), to_double(key, trim(parts[1])),
                          to_double(key, trim(parts[2]))};
    } else if (key == "convergence_tol") t.convergence_tol = to_double(key, v);
    else if (key == "local_mode") t.local_mode = parse_local_mode(v);
    else if (key == "laplacian_kind") t.laplacian_kind = parse_laplacian_kind(v);
    else if (key == "prune_strategy") t.prune_strategy = parse_prune_strategy(v);
    else if (key == "checkpoint_interval") t.checkpoint_interval = to_uint(key, v);
    else if (key == "input") cfg.input = v;
    else if (key == "format") cfg.format = parse_matrix_format(v);
    else if (key == "labels") cfg.labels = v;
    else if (key == "output_dir") cfg.output_dir = v;
    else if (key == "study_strategies") {
        cfg.study_strategies.clear();
        for (const auto& s : split(v, ',')) cfg.study_strategies.push_back(parse_prune_strategy(trim(s)));
    } else if (key == "study_alphas") cfg.study_alphas = parse_alpha_grid(v);
    else if (key == "study_seeds") cfg.study_seeds = to_uint(key, v);
    else throw RangeError("config: unknown key '" + key + "'");
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
        try {
            apply_key_value(cfg, trim(s.substr(0, eq)), s.substr(eq + 1));
        } catch (const RangeError& e) {
            throw ParseError(lineno, e.what());
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    RunConfig cfg;
    apply_config_file(cfg, path);
    return cfg;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& [k, v] : to_key_values(cfg)) out << k << '=' << v << '\n';
}

}  // namespace scclg
