#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cascadeforge/checkpoint.hpp"
#include "cascadeforge/cli.hpp"
#include "cascadeforge/rng.hpp"

using namespace cascadeforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cforge_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int cli(std::initializer_list<std::string> args) { return run_cli(std::vector<std::string>(args)); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// gen -> train -> eval pipeline fixture shared by several cases
struct Pipeline {
    TempDir dir;
    std::string table, ckpt, report;

    explicit Pipeline(int epochs = 2) {
        table = dir.str("table.csv");
        ckpt = dir.str("model.ckpt");
        report = dir.str("eval.json");
        REQUIRE(cli({"gen", "--set", "data.synth.n_detectors=5",
                     "--set", "data.synth.n_samples=400",
                     "--set", "data.synth.det0.accuracy=0.95", "--set", "data.synth.det0.cost=0.01",
                     "--set", "data.synth.det1.accuracy=0.9", "--set", "data.synth.det1.cost=0.1",
                     "--set", "data.synth.det2.accuracy=0.85", "--set", "data.synth.det2.cost=0.2",
                     "--set", "data.synth.det3.accuracy=0.8", "--set", "data.synth.det3.cost=0.5",
                     "--set", "data.synth.det4.accuracy=0.75", "--set", "data.synth.det4.cost=1.0",
                     "--set", "seed=5", "--set", "data.out=" + table}) == 0);
        REQUIRE(cli({"train", "--set", "data.table=" + table, "--set", "reward.scheme=3",
                     "--set", "train.epochs=" + std::to_string(epochs), "--set", "train.seed=3",
                     "--set", "train.checkpoint=" + ckpt}) == 0);
    }
};

} // namespace

TEST_CASE("gen -> train -> eval end-to-end produces the full report") {
    Pipeline p;
    REQUIRE(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
                 "--set", "eval.report=" + p.report}) == 0);
    auto j = nlohmann::json::parse(slurp(p.report));
    // agent + all 62 static ensembles for n=5
    CHECK(j["rows"].size() == 63);
    CHECK(!j["pareto"].empty());
    bool has_agent = false;
    for (const auto& row : j["rows"])
        if (row["aggregation"] == "DRL") has_agent = true;
    CHECK(has_agent);
}

TEST_CASE("eval reports are byte-identical across runs") {
    Pipeline p;
    std::string second = p.dir.str("eval2.json");
    REQUIRE(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
                 "--set", "eval.report=" + p.report}) == 0);
    REQUIRE(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
                 "--set", "eval.report=" + second}) == 0);
    CHECK(slurp(p.report) == slurp(second));
}

TEST_CASE("eval rejects tables with a different detector pool") {
    Pipeline p;
    std::string other = p.dir.str("other.csv");
    REQUIRE(cli({"gen", "--set", "data.synth.n_detectors=2",
                 "--set", "data.synth.n_samples=100",
                 "--set", "data.synth.det0.accuracy=0.9",
                 "--set", "data.synth.det1.accuracy=0.9",
                 "--set", "seed=5", "--set", "data.out=" + other}) == 0);
    CHECK(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
               "--test-table", other}) != 0);
}

TEST_CASE("cross-dataset eval accepts a matching pool") {
    Pipeline p;
    std::string other = p.dir.str("other.csv");
    // same pool shape, different seed: ids still d0..d4
    REQUIRE(cli({"gen", "--set", "data.synth.n_detectors=5",
                 "--set", "data.synth.n_samples=300",
                 "--set", "data.synth.det0.accuracy=0.9", "--set", "data.synth.det1.accuracy=0.9",
                 "--set", "data.synth.det2.accuracy=0.9", "--set", "data.synth.det3.accuracy=0.9",
                 "--set", "data.synth.det4.accuracy=0.9",
                 "--set", "seed=77", "--set", "data.out=" + other}) == 0);
    CHECK(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
               "--set", "eval.report=" + p.report, "--test-table", other}) == 0);
}

TEST_CASE("train rejects out-of-range schemes with a clear message") {
    Pipeline p;
    CHECK(cli({"train", "--set", "data.table=" + p.table, "--set", "reward.scheme=9",
               "--set", "train.checkpoint=" + p.dir.str("x.ckpt")}) != 0);
}

TEST_CASE("checkpoint round trip preserves parameters and config echo") {
    Pipeline p;
    Checkpoint ckpt = load_checkpoint(p.ckpt);
    CHECK(ckpt.params.n_inputs == 5);
    CHECK(ckpt.params.n_hidden == 32);
    REQUIRE(ckpt.find("pool") != nullptr);
    CHECK(*ckpt.find("pool") == "d0,d1,d2,d3,d4");
    std::string copy = p.dir.str("copy.ckpt");
    save_checkpoint(ckpt, copy);
    Checkpoint back = load_checkpoint(copy);
    CHECK(back.params == ckpt.params);
    CHECK(back.config == ckpt.config);
}

TEST_CASE("transfer emits a curve file that train accepts unmodified") {
    Pipeline p;
    std::string curve = p.dir.str("curve.cfg");
    std::string report = p.dir.str("transfer.json");
    REQUIRE(cli({"transfer", "--set", "transfer.target.d_cap=18.0",
                 "--set", "transfer.epsilon=1e-8", "--set", "transfer.seed=4",
                 "--set", "transfer.out=" + curve, "--set", "transfer.report=" + report}) == 0);

    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["sym_kl"].get<double>() > 0.0);
    CHECK(j["sym_kl"].get<double>() < 1e-8);
    double d = j["boundaries"][1].get<double>();
    CHECK(d == doctest::Approx(0.53).epsilon(0.02));

    // the emitted file is plain config consumable by train
    std::string ckpt2 = p.dir.str("model2.ckpt");
    std::string base = p.dir.str("train.cfg");
    write_file(base, "data.table = " + p.table + "\nreward.scheme = 3\ntrain.epochs = 1\n" +
                         "train.checkpoint = " + ckpt2 + "\n");
    REQUIRE(cli({"train", "--config", base, "--config", curve}) == 0);
    Checkpoint ckpt = load_checkpoint(ckpt2);
    REQUIRE(ckpt.find("reward.d") != nullptr);
    CHECK(std::stod(*ckpt.find("reward.d")) == doctest::Approx(d));
}

TEST_CASE("attack subcommand writes a campaign report") {
    Pipeline p;
    std::string report = p.dir.str("attack.json");
    REQUIRE(cli({"attack", "--set", "data.table=" + p.table,
                 "--set", "attack.checkpoint=" + p.ckpt, "--set", "attack.epsilon=0.5",
                 "--set", "attack.samples=10", "--set", "attack.seed=2",
                 "--set", "attack.report=" + report}) == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["rounds"] == 3);
    CHECK(j["round_rates"].size() == 3);
    CHECK(j["max_budget_spent"].get<double>() <= 0.5 + 1e-9);

    // ensemble target requires the black-box attack
    CHECK(cli({"attack", "--set", "data.table=" + p.table,
               "--set", "attack.checkpoint=" + p.ckpt, "--set", "attack.target=ensemble",
               "--set", "attack.kind=whitebox", "--set", "attack.samples=5"}) != 0);
    REQUIRE(cli({"attack", "--set", "data.table=" + p.table,
                 "--set", "attack.checkpoint=" + p.ckpt, "--set", "attack.target=ensemble",
                 "--set", "attack.kind=blackbox", "--set", "attack.samples=5",
                 "--set", "attack.report=" + report}) == 0);
}

TEST_CASE("report merges prior eval outputs") {
    Pipeline p;
    REQUIRE(cli({"eval", "--set", "data.table=" + p.table, "--set", "eval.checkpoint=" + p.ckpt,
                 "--set", "eval.report=" + p.report}) == 0);
    std::string merged = p.dir.str("merged.json");
    REQUIRE(cli({"report", "--set", "report.inputs=" + p.report + "," + p.report,
                 "--set", "report.out=" + merged}) == 0);
    auto j = nlohmann::json::parse(slurp(merged));
    CHECK(j["rows"].size() == 126); // two copies merged
    // sorted by f1 descending
    double prev = 2.0;
    for (const auto& row : j["rows"]) {
        double f1 = row["f1"].is_null() ? -1.0 : row["f1"].get<double>();
        CHECK(f1 <= prev + 1e-12);
        prev = f1;
    }
}

TEST_CASE("--out prefixes relative output paths") {
    TempDir dir;
    REQUIRE(cli({"gen", "--set", "data.synth.n_detectors=2",
                 "--set", "data.synth.n_samples=50",
                 "--set", "data.synth.det0.accuracy=0.9",
                 "--set", "data.synth.det1.accuracy=0.9",
                 "--set", "data.out=t.csv", "--out", dir.path.string()}) == 0);
    CHECK(fs::exists(dir.path / "t.csv"));
}

TEST_CASE("unknown subcommands and flags fail with exit code 1") {
    CHECK(cli({"frobnicate"}) == 1);
    CHECK(cli({"gen", "--frob"}) == 1);
    CHECK(cli({}) == 1);
    CHECK(cli({"gen", "--set", "no.such.key=1"}) == 1);
}
