#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cascadeforge/config.hpp"

using namespace cascadeforge;

namespace {

std::string write_cfg(const std::string& content) {
    static int counter = 0;
    std::string path = "cfg_test_" + std::to_string(counter++) + ".cfg";
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("parses flat key = value lines with comments") {
    auto path = write_cfg("# a comment\n"
                          "reward.scheme = 3\n"
                          "train.lr = 0.001   # trailing comment\n"
                          "\n"
                          "data.table = scores.csv\n");
    RunConfig cfg = RunConfig::from_file(path);
    CHECK(cfg.get_int("reward.scheme", 0) == 3);
    CHECK(cfg.get_double("train.lr", 0) == doctest::Approx(0.001));
    CHECK(cfg.get_string("data.table", "") == "scores.csv");
    CHECK(!cfg.has("goal.metric"));
    std::remove(path.c_str());
}

TEST_CASE("unknown keys are rejected") {
    auto path = write_cfg("reward.shceme = 3\n");
    CHECK_THROWS_WITH(RunConfig::from_file(path), doctest::Contains("unknown config key"));
    std::remove(path.c_str());

    RunConfig cfg = RunConfig::empty();
    CHECK_THROWS_AS(cfg.apply_override("nonsense.key=1"), std::runtime_error);
}

TEST_CASE("detector keys allow any index but only known fields") {
    RunConfig cfg = RunConfig::empty();
    CHECK_NOTHROW(cfg.apply_override("data.synth.det0.accuracy=0.9"));
    CHECK_NOTHROW(cfg.apply_override("data.synth.det12.cost=1.5"));
    CHECK_THROWS_AS(cfg.apply_override("data.synth.det0.speed=3"), std::runtime_error);
    CHECK_THROWS_AS(cfg.apply_override("data.synth.detx.accuracy=0.9"), std::runtime_error);
}

TEST_CASE("overrides beat file values; later files beat earlier ones") {
    auto base = write_cfg("train.seed = 1\nreward.scheme = 2\n");
    auto extra = write_cfg("train.seed = 7\n");
    RunConfig cfg = RunConfig::from_file(base);
    cfg.merge_file(extra);
    CHECK(cfg.get_seed("train.seed", 0) == 7);
    cfg.apply_override("train.seed=42");
    CHECK(cfg.get_seed("train.seed", 0) == 42);
    CHECK(cfg.get_int("reward.scheme", 0) == 2);
    std::remove(base.c_str());
    std::remove(extra.c_str());
}

TEST_CASE("the environment seed override wins when set") {
    RunConfig cfg = RunConfig::empty();
    cfg.apply_override("train.seed=1");
    setenv("CASCADEFORGE_SEED", "99", 1);
    cfg.apply_environment();
    CHECK(cfg.get_seed("train.seed", 0) == 99);
    unsetenv("CASCADEFORGE_SEED");
    cfg.apply_override("train.seed=1");
    cfg.apply_environment();
    CHECK(cfg.get_seed("train.seed", 0) == 1);
}

TEST_CASE("typed getters validate their values") {
    RunConfig cfg = RunConfig::empty();
    cfg.apply_override("train.epochs=abc");
    CHECK_THROWS_WITH(cfg.get_int("train.epochs", 0), doctest::Contains("not an integer"));
    cfg.apply_override("train.lr=fast");
    CHECK_THROWS_AS(cfg.get_double("train.lr", 0), std::runtime_error);
    cfg.apply_override("eval.baselines=yes");
    CHECK(cfg.get_bool("eval.baselines", false));
    cfg.apply_override("eval.baselines=off");
    CHECK(!cfg.get_bool("eval.baselines", true));
    CHECK_THROWS_WITH(cfg.require_string("data.table"), doctest::Contains("missing required"));
}

TEST_CASE("malformed lines report the location") {
    auto path = write_cfg("reward.scheme 3\n");
    CHECK_THROWS_WITH(RunConfig::from_file(path), doctest::Contains(":1:"));
    std::remove(path.c_str());
}
