#include <string>

#include <gtest/gtest.h>

#include "ineqlab/cli/config.hpp"
#include "ineqlab/cli/runner.hpp"

namespace {

using namespace ineqlab::cli;
using nlohmann::json;

ExperimentConfig from_toml(const std::string& text) { return parse_config(parse_toml(text, "test.toml")); }

std::string usage_message(const std::string& text) {
  try {
    const auto cfg = from_toml(text);
    if (cfg.experiment == "sweep") {
      detail::plan_sweep(cfg);
    } else {
      prepare(cfg.experiment, cfg.parameters);
    }
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, NameDefaultsToExperimentAndSeedToZero) {
  const auto cfg = from_toml("experiment = \"spectrum\"\n");
  EXPECT_EQ(cfg.name, "spectrum");
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_TRUE(cfg.parameters.is_object());
}

TEST(Config, TomlAndJsonGiveTheSameTree) {
  const auto a = parse_toml("experiment = \"rfd\"\n[parameters]\nm = 0.6\nflow = { dt = 0.01 }\n", "a.toml");
  const auto b = json::parse(R"({"experiment": "rfd", "parameters": {"m": 0.6, "flow": {"dt": 0.01}}})");
  EXPECT_EQ(a, b);
}

TEST(Config, ResolvedParametersIncludeDefaults) {
  const auto p = prepare("spectrum", json::parse(R"({"m": 0.9})"));
  EXPECT_EQ(p.resolved.at("d"), 3);
  EXPECT_DOUBLE_EQ(p.resolved.at("m").get<double>(), 0.9);
  EXPECT_EQ(p.resolved.at("grid").at("n"), 4000);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(usage_message("experiment = \"rfd\"\n[parameters]\nd = 3\nm = 0.2\n").find("field 'parameters.m'"),
            std::string::npos);
  EXPECT_NE(usage_message("experiment = \"rfd\"\n[parameters]\nm = 0.2\nd = 3\n").find("(d-2)/d is 0.333"),
            std::string::npos);
  EXPECT_NE(usage_message("experiment = \"spectrum\"\n[parameters]\nell_max = \"x\"\n").find("parameters.ell_max"),
            std::string::npos);
  EXPECT_NE(usage_message("experiment = \"sphere\"\n[parameters]\nmode = \"other\"\n").find("parameters.mode"),
            std::string::npos);
  EXPECT_NE(usage_message("experiment = \"yamabe\"\nextra = 1\n").find("field 'extra'"), std::string::npos);
  EXPECT_NE(usage_message("experiment = \"nope\"\n").find("field 'experiment'"), std::string::npos);
  EXPECT_NE(usage_message("experiment = \"gaussian\"\n[parameters]\nfamily = { kind = \"bump\", width = [0.0] }\n")
                .find("parameters.family.width"),
            std::string::npos);
}

TEST(Config, SuiteRunsInheritSeedAndRejectDuplicates) {
  const auto cfg = from_toml(
      "experiment = \"suite\"\nseed = 9\n[[runs]]\nexperiment = \"spectrum\"\nname = \"a\"\n"
      "[[runs]]\nexperiment = \"rfd\"\nname = \"b\"\nseed = 3\n");
  ASSERT_EQ(cfg.runs.size(), 2u);
  EXPECT_EQ(cfg.runs[0].seed, 9u);
  EXPECT_EQ(cfg.runs[1].seed, 3u);
  EXPECT_THROW(from_toml("experiment = \"suite\"\n[[runs]]\nexperiment = \"rfd\"\n[[runs]]\nexperiment = \"rfd\"\n"),
               UsageError);
  EXPECT_THROW(from_toml("experiment = \"suite\"\n[[runs]]\nexperiment = \"suite\"\n"), UsageError);
}

TEST(Sweep, LatticeIsLexicographicWithLastKeyFastest) {
  const auto plan = detail::plan_sweep(from_toml(
      "experiment = \"sweep\"\n[parameters]\nbase = \"spectrum\"\nfixed = { grid = { n = 200 } }\n"
      "[parameters.lattice]\nd = [3, 4]\nm = [0.8, 0.9, 0.95]\n"));
  ASSERT_EQ(plan.keys, (std::vector<std::string>{"d", "m"}));
  ASSERT_EQ(plan.points.size(), 6u);
  EXPECT_EQ(plan.points[0], (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(plan.points[1], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(plan.points[3], (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(plan.prepared[4].resolved.at("d"), 4);
  EXPECT_DOUBLE_EQ(plan.prepared[4].resolved.at("m").get<double>(), 0.9);
  EXPECT_EQ(plan.prepared[4].resolved.at("grid").at("n"), 200);
}

TEST(Sweep, DottedKeysReachNestedTables) {
  const auto plan = detail::plan_sweep(from_toml(
      "experiment = \"sweep\"\n[parameters]\nbase = \"rfd\"\n"
      "[parameters.lattice]\n\"initial.lambda\" = [1.1, 1.3]\n"));
  ASSERT_EQ(plan.prepared.size(), 2u);
  EXPECT_DOUBLE_EQ(plan.prepared[1].resolved.at("initial").at("lambda").get<double>(), 1.3);
}

TEST(Sweep, EveryPointIsValidatedBeforeRunning) {
  const auto msg = usage_message(
      "experiment = \"sweep\"\n[parameters]\nbase = \"rfd\"\nfixed = { d = 3 }\n[parameters.lattice]\nm = [0.5, 0.2]\n");
  EXPECT_NE(msg.find("m = 0.2"), std::string::npos);
  EXPECT_NE(msg.find("sweep point m = 0.2"), std::string::npos);
}

TEST(Runner, ParallelForVisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Runner, SpectrumJobIsDeterministic) {
  const auto p = prepare("spectrum", json::parse(R"({"grid": {"n": 300}, "checks": {"rel_tol": 1.0}})"));
  const auto a = p.job({1, 1.0});
  const auto b = p.job({1, 1.0});
  EXPECT_EQ(a.results.dump(), b.results.dump());
  ASSERT_EQ(a.tables.size(), 1u);
  EXPECT_EQ(a.tables[0].text, b.tables[0].text);
  EXPECT_TRUE(a.passed());
}

}  // namespace
