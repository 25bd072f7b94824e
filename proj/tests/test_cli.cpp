#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "scclg/config.hpp"
#include "scclg/ingest.hpp"
#include "scclg/pipeline.hpp"
#include "test_support.hpp"

using namespace scclg;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd '" + cwd.string() + "' && '" SCCLG_CLI_PATH "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

/// Every regular file under dir, relative path -> contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

const std::string kSmall =
    " --t1 30 --t2 20 --k-neighbors 8 --latent-dim 8 --encoder-hidden 32 --checkpoint-interval 10 --n-hvg 50";

}  // namespace

TEST_CASE("help lists every flag with its default") {
    testing::TempDir dir("cli");
    const RunResult r = run("train --help", dir.path());
    CHECK(r.code == 0);
    for (const auto& [key, value] : to_key_values(RunConfig{})) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CAPTURE(flag);
        CHECK(r.output.find(flag) != std::string::npos);
        if (!value.empty()) CHECK(r.output.find("[" + value + "]") != std::string::npos);
    }
    CHECK(run("", dir.path()).code == 2);
    CHECK(run("train --no-such-flag 1", dir.path()).code == 2);
}

TEST_CASE("missing input exits with code 2 and names the path") {
    testing::TempDir dir("cli");
    const RunResult r = run("train --input does/not/exist.csv", dir.path());
    CHECK(r.code == 2);
    CHECK(r.output.find("does/not/exist.csv") != std::string::npos);
    CHECK(run("difficulty --input gone.csv", dir.path()).code == 2);
    CHECK(run("train", dir.path()).code == 2);
    CHECK(run("evaluate --truth a.csv --pred b.csv", dir.path()).code == 2);
}

TEST_CASE("synth") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --out a/m.csv", dir.path()).code == 0);
    ExpressionMatrix m = load_matrix(dir / "a/m.csv", MatrixFormat::Csv);
    attach_labels(m, dir / "a/m.labels.csv");
    m.validate();
    CHECK(m.n_cells == 300);
    CHECK(m.n_genes == 200);
    CHECK(m.n_classes() == 3);

    REQUIRE(run("synth --seed 5 --cells 120 --genes 40 --clusters 4 --out b.csv", dir.path()).code == 0);
    REQUIRE(run("synth --seed 5 --cells 120 --genes 40 --clusters 4 --out c.csv --labels c_labels.csv", dir.path()).code == 0);
    CHECK(slurp(dir / "b.csv") == slurp(dir / "c.csv"));
    CHECK(slurp(dir / "b.labels.csv") == slurp(dir / "c_labels.csv"));
    const ExpressionMatrix b = load_matrix(dir / "b.csv", MatrixFormat::Csv);
    CHECK(b.n_cells == 120);
    CHECK(b.n_genes == 40);

    REQUIRE(run("synth --format mtx --out d.mtx --cells 50 --genes 20", dir.path()).code == 0);
    CHECK(load_matrix(dir / "d.mtx", MatrixFormat::MtxTriplet).n_cells == 50);
}

TEST_CASE("train writes every artifact and is reproducible") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --cells 90 --genes 60 --seed 3 --out m.csv", dir.path()).code == 0);
    const std::string base = "train --input m.csv --labels m.labels.csv" + kSmall;
    const RunResult r = run(base + " --out run1", dir.path());
    INFO(r.output);
    REQUIRE(r.code == 0);
    CHECK(r.output.find("ARI=") != std::string::npos);

    for (const char* f : {"config.txt", "difficulty.csv", "labels.csv", "training_log.csv", "metrics.json",
                          "checkpoints/pretrain.ckpt", "checkpoints/formal.ckpt", "checkpoints/done.ckpt",
                          "checkpoints/pretrain_00010.ckpt"})
        CHECK(fs::exists(dir / "run1" / f));

    const auto labels = lines(dir / "run1/labels.csv");
    CHECK(labels.front() == "cell_id,predicted,pruned_flag");
    CHECK(labels.size() == 91);
    std::size_t pruned = 0;
    for (std::size_t i = 1; i < labels.size(); ++i) pruned += labels[i].back() == '1';
    CHECK(pruned == 9);  // floor(0.11 * 90)

    const auto log = lines(dir / "run1/training_log.csv");
    CHECK(log.front() == "epoch,rec,zinb,cls,total");
    CHECK(log.size() >= 32);

    const auto diff = lines(dir / "run1/difficulty.csv");
    CHECK(diff.front() == "node_id,local,global,combined,rank,dropped");
    CHECK(diff.size() == 91);

    const auto metrics = nlohmann::json::parse(slurp(dir / "run1/metrics.json"));
    for (const char* k : {"ari", "nmi", "n_cells", "n_clusters_true", "n_clusters_pred"}) CHECK(metrics.contains(k));
    CHECK(metrics["n_cells"] == 90);

    // same seed, same bytes
    REQUIRE(run(base + " --out run2", dir.path()).code == 0);
    auto a = snapshot(dir / "run1"), b = snapshot(dir / "run2");
    a.erase("config.txt");
    b.erase("config.txt");
    CHECK(a == b);

    // the echoed config reproduces the run
    REQUIRE(run("train --config run1/config.txt --out run3", dir.path()).code == 0);
    auto c = snapshot(dir / "run3");
    c.erase("config.txt");
    CHECK(c == a);
    const RunConfig echoed = load_config(dir / "run1/config.txt");
    CHECK(echoed.train.t1 == 30);
    CHECK(echoed.train.encoder_hidden == 32);
    CHECK(echoed.input == "m.csv");

    // resuming from a periodic checkpoint gives the same results
    REQUIRE(run(base + " --out run4 --resume run1/checkpoints/pretrain_00010.ckpt", dir.path()).code == 0);
    CHECK(slurp(dir / "run4/training_log.csv") == slurp(dir / "run1/training_log.csv"));
    CHECK(slurp(dir / "run4/labels.csv") == slurp(dir / "run1/labels.csv"));
    CHECK(slurp(dir / "run4/checkpoints/done.ckpt") == slurp(dir / "run1/checkpoints/done.ckpt"));

    const RunResult ev = run("evaluate --truth m.labels.csv --pred run1/labels.csv --json ev.json", dir.path());
    CHECK(ev.code == 0);
    const auto ej = nlohmann::json::parse(slurp(dir / "ev.json"));
    CHECK(ev.output.find("ARI=") == 0);
    CHECK(ej["ari"] == metrics["ari"]);
    CHECK(ej["nmi"] == metrics["nmi"]);
}

TEST_CASE("alpha 0 and lambda0 1 is plain training") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --cells 60 --genes 40 --seed 9 --out m.csv", dir.path()).code == 0);
    REQUIRE(run("train --input m.csv --labels m.labels.csv --alpha 0 --lambda0 1 --out r" + kSmall, dir.path()).code == 0);
    const auto labels = lines(dir / "r/labels.csv");
    for (std::size_t i = 1; i < labels.size(); ++i) CHECK(labels[i].back() == '0');

    RunConfig cfg = load_config(dir / "r/config.txt");
    ExpressionMatrix m = load_matrix(dir / "m.csv", MatrixFormat::Csv);
    attach_labels(m, dir / "m.labels.csv");
    const PipelineResult lib = run_pipeline(m, cfg.train);
    for (std::size_t s : lib.state.subset_sizes) CHECK(s == 60);
    for (std::size_t i = 0; i < lib.labels.size(); ++i)
        CHECK(labels[i + 1] == m.cell_ids[i] + "," + std::to_string(lib.labels[i]) + ",0");
}

TEST_CASE("difficulty") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --cells 50 --genes 30 --out m.csv", dir.path()).code == 0);
    REQUIRE(run("difficulty --input m.csv --t1 5 --k-neighbors 5 --alpha 0.2 --n-clusters 3 --out d", dir.path()).code == 0);
    const auto rows = lines(dir / "d/difficulty.csv");
    REQUIRE(rows.size() == 51);
    std::size_t dropped = 0;
    std::vector<bool> ranks(50, false);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        dropped += rows[i].back() == '1';
        std::vector<std::string> f;
        std::stringstream ss(rows[i]);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        REQUIRE(f.size() == 6);
        CHECK(f[0] == std::to_string(i - 1));
        ranks[std::stoul(f[4])] = true;
        const double combined = std::stod(f[3]);
        CHECK(combined >= 0.0);
        CHECK(combined <= 1.0);
    }
    CHECK(dropped == 10);
    CHECK(std::all_of(ranks.begin(), ranks.end(), [](bool b) { return b; }));
}

TEST_CASE("evaluate") {
    testing::TempDir dir("cli");
    std::ofstream(dir / "t.csv") << "cell_id,label\na,0\nb,0\nc,1\nd,1\n";
    std::ofstream(dir / "p.csv") << "cell_id,predicted,pruned_flag\nd,0,0\nc,1,0\nb,0,1\na,1,0\n";
    const RunResult r = run("evaluate --truth t.csv --pred p.csv", dir.path());
    CHECK(r.code == 0);
    CHECK(r.output == "ARI=-0.5 NMI=0\n");
    const auto j = nlohmann::json::parse(slurp(dir / "evaluation.json"));
    CHECK(j["ari"] == -0.5);
    CHECK(j["n_cells"] == 4);
    CHECK(j["n_clusters_pred"] == 2);
    std::ofstream(dir / "short.csv") << "a,0\nb,0\n";
    CHECK(run("evaluate --truth t.csv --pred short.csv", dir.path()).code == 2);
}

TEST_CASE("prune-study grid") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --cells 60 --genes 40 --out m.csv", dir.path()).code == 0);
    const std::string base = "prune-study --input m.csv --labels m.labels.csv" + kSmall;
    REQUIRE(run(base + " --study-strategies hard --study-alphas 0.11 --study-seeds 1 --out one", dir.path()).code == 0);
    const auto one = lines(dir / "one/prune_study.csv");
    REQUIRE(one.size() == 2);
    CHECK(one[0] == "strategy,alpha,seed,ari,nmi");
    CHECK(one[1].rfind("hard,0.11,0,", 0) == 0);

    REQUIRE(run(base + " --study-strategies easy,random --study-alphas 0.06:0.21:0.05 --study-seeds 2 --out grid",
                dir.path()).code == 0);
    const auto grid = lines(dir / "grid/prune_study.csv");
    CHECK(grid.size() == 1 + 2 * 4 * 2);
    for (const char* a : {",0.06,", ",0.11,", ",0.16,", ",0.21,"})
        CHECK(std::count_if(grid.begin(), grid.end(), [&](const std::string& l) { return l.find(a) != std::string::npos; }) == 4);
}

TEST_CASE("stage-tagged failures and config errors") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --cells 20 --genes 10 --out m.csv", dir.path()).code == 0);
    const RunResult graph = run("train --input m.csv --labels m.labels.csv --k-neighbors 20 --t1 1 --t2 1", dir.path());
    CHECK(graph.code == 1);
    CHECK(graph.output.find("graph:") != std::string::npos);

    std::ofstream(dir / "bad.cfg") << "t1=3\nno_such_key=1\n";
    const RunResult bad = run("train --config bad.cfg --input m.csv", dir.path());
    CHECK(bad.code == 2);
    CHECK(bad.output.find("line 2") != std::string::npos);
    CHECK(run("train --input m.csv --alpha 1.5", dir.path()).code == 2);
    CHECK(run("train --config missing.cfg", dir.path()).code == 2);

    std::ofstream(dir / "broken.csv") << "x,g1\nc1,-4\n";
    const RunResult neg = run("train --input broken.csv --n-clusters 2", dir.path());
    CHECK(neg.code == 1);
    CHECK(neg.output.find("ingest:") != std::string::npos);
}

TEST_CASE("default synthetic benchmark is recovered end to end") {
    testing::TempDir dir("cli");
    REQUIRE(run("synth --seed 0 --out m.csv", dir.path()).code == 0);
    const RunResult r = run("train --input m.csv --labels m.labels.csv --t1 200 --t2 100 --out r", dir.path());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "r/metrics.json"));
    CHECK(j["ari"].get<double>() >= 0.9);
}
