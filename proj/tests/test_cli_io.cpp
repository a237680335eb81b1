#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fhn/run.hpp"

using namespace fhn;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    load_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("fhn_cli_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kSmallSimulate = R"({
  "parameters": {"epsilon": 0.2},
  "grid": {"half_length": 10, "points_per_axis": 80},
  "forcing_f": {"time_profile": {"kind": "sinusoidal", "amplitude": 1, "frequency": 1},
                "space_profile": {"kind": "gaussian", "amplitude": 1, "width": 2}},
  "step": {"dt": 0.01},
  "experiment": {"simulate": {"t_end": 1, "stride": 10}}
})";

const char* kSmallPullback = R"({
  "grid": {"half_length": 10, "points_per_axis": 60},
  "parameters": {"epsilon": 0.5},
  "forcing_f": {"time_profile": {"kind": "constant"}, "space_profile": {"kind": "gaussian", "width": 2}},
  "step": {"dt": 0.02},
  "seed": 4,
  "experiment": {"pullback": {"depths": [2, 4, 8], "bundle_size": 4, "sampling": "basin",
                              "basin": {"amplitude": 2}}}
})";

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const RunConfig rc = load_config_text(R"({"experiment": {"simulate": {}}})");
  EXPECT_EQ(rc.parameters.epsilon(), 0.1);
  EXPECT_EQ(rc.parameters.nu(), 1.0);
  EXPECT_EQ(rc.grid.points_per_axis(), 400);
  EXPECT_EQ(rc.grid.half_length(), 20.0);
  EXPECT_EQ(rc.step.dt, 1e-2);
  EXPECT_EQ(rc.step.scheme, Scheme::imex_cn);
  EXPECT_TRUE(rc.forcing_f.is_zero());
  EXPECT_EQ(rc.threads, 1);
  const json echo = config_to_json(rc);
  EXPECT_EQ(echo.at("experiment").at("simulate").at("t_end"), 10.0);
}

TEST(Config, EpsilonAboveThresholdCitesTheInvariant) {
  const auto msg = error_of(R"({"parameters": {"epsilon": 0.9, "lambda": 0.5}, "experiment": {"simulate": {}}})");
  EXPECT_NE(msg.find("epsilon exceeds min(1, lambda/gamma)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("parameters"), std::string::npos);
}

TEST(Config, UnknownKeysAreRejected) {
  auto msg = error_of(R"({"experiment": {"simulate": {}}, "colour": 1})");
  EXPECT_NE(msg.find("unknown key 'colour'"), std::string::npos) << msg;
  msg = error_of(R"({"parameters": {"nu": 1, "mu": 2}, "experiment": {"simulate": {}}})");
  EXPECT_NE(msg.find("'mu'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("parameters"), std::string::npos) << msg;
  msg = error_of(R"({"experiment": {"simulate": {"t_end": 1, "speed": 2}}})");
  EXPECT_NE(msg.find("experiment.simulate"), std::string::npos) << msg;
}

TEST(Config, ParseErrorsCarryLineAndColumn) {
  const auto msg = error_of("{\n  \"experiment\": {\n    \"simulate\": {,}\n  }\n}");
  EXPECT_NE(msg.find("<config>:3:"), std::string::npos) << msg;
}

TEST(Config, SemanticErrors) {
  EXPECT_FALSE(error_of(R"({})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"simulate": {}, "verify": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"dance": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"simulate": {"t_end": 0.005}}})").empty());
  EXPECT_FALSE(error_of(R"({"grid": {"dim": 3}, "experiment": {"simulate": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"step": {"dt": -1}, "experiment": {"simulate": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"step": {"scheme": "rk4"}, "experiment": {"simulate": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"parameters": {"nu": "one"}, "experiment": {"simulate": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"forcing_f": {"time_profile": {"kind": "exp_sigma_frac", "c": 0.5},
      "space_profile": {"kind": "gaussian"}}, "experiment": {"simulate": {}}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"pullback": {"depths": [2, 1]}}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"pullback": {"sampling": "basin"}}})").empty());
  EXPECT_FALSE(error_of(R"({"experiment": {"pullback": {"basin": {"amplitude": 1, "backward_rate": -1}}}})").empty());
  const auto tails = error_of(R"({"experiment": {"tails": {"k_list": [15]}}})");
  EXPECT_NE(tails.find("L >= 2k"), std::string::npos) << tails;
  EXPECT_FALSE(error_of(R"({"experiment": {"sweep": {"epsilons": [0.1, 2.0]}}})").empty());
  EXPECT_FALSE(error_of(R"({"nonlinearity": {"kind": "odd_polynomial", "coefficients": [0, -1]},
      "experiment": {"simulate": {}}})").empty());
}

TEST(ConfigProperty, JsonRoundTripIsStable) {
  for (const char* text : {kSmallSimulate, kSmallPullback}) {
    const RunConfig a = load_config_text(text);
    const json ja = config_to_json(a);
    const RunConfig b = config_from_json(ja);
    EXPECT_EQ(config_to_json(b), ja);
    EXPECT_EQ(config_hash(a), config_hash(b));
  }
}

TEST(ConfigProperty, HashIgnoresThreadsAndOutputDir) {
  RunConfig a = load_config_text(kSmallPullback);
  RunConfig b = a;
  b.threads = 8;
  b.output_dir = "/elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 5;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, ShippedConfigsLoad) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(FHN_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 5);
}

TEST(Run, SimulateWritesArtifactsAndManifest) {
  const auto dir = fresh_dir("sim");
  const RunResult r = run(load_config_text(kSmallSimulate), RunOverrides{dir.string()});
  EXPECT_EQ(r.exit_code, exit_ok);
  for (const char* f : {"effective_config.json", "summary.json", "manifest.json", "energy.csv", "final.ckpt",
                        "final_u.csv", "final_v.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const json man = json::parse(slurp(dir / "manifest.json"));
  for (const char* k : {"version", "compiler", "config_hash", "seed", "threads", "started_at", "wall_time_s", "files"}) {
    EXPECT_TRUE(man.contains(k)) << k;
  }
  EXPECT_EQ(man.at("version"), kVersion);
  // The echoed config reloads to the same run.
  const RunConfig echo = load_config((dir / "effective_config.json").string());
  EXPECT_EQ(config_hash(echo), man.at("config_hash"));
}

TEST(Run, ResumeContinuesFromCheckpoint) {
  const auto a = fresh_dir("resume_a");
  const auto b = fresh_dir("resume_b");
  const auto full = fresh_dir("resume_full");
  RunConfig half = load_config_text(kSmallSimulate);
  run(half, RunOverrides{a.string()});
  RunConfig rest = half;
  std::get<SimulateOptions>(rest.experiment).t_end = 2.0;
  RunOverrides ov{b.string()};
  ov.checkpoint = (a / "final.ckpt").string();
  EXPECT_EQ(run(rest, ov).exit_code, exit_ok);
  run(rest, RunOverrides{full.string()});
  EXPECT_EQ(slurp(b / "final.ckpt"), slurp(full / "final.ckpt"));
  // Resume is only defined for simulate.
  RunOverrides bad{fresh_dir("resume_bad").string()};
  bad.checkpoint = (a / "final.ckpt").string();
  EXPECT_THROW(run(load_config_text(kSmallPullback), bad), ConfigError);
}

TEST(RunProperty, SeedAndThreadsReproducibility) {
  const RunConfig rc = load_config_text(kSmallPullback);
  const auto d1 = fresh_dir("rep1");
  const auto d2 = fresh_dir("rep2");
  const auto d3 = fresh_dir("rep3");
  RunOverrides o1{d1.string()};
  RunOverrides o2{d2.string()};
  o2.threads = 3;
  RunOverrides o3{d3.string()};
  o3.seed = 77;
  run(rc, o1);
  run(rc, o2);
  run(rc, o3);
  EXPECT_EQ(slurp(d1 / "pullback.csv"), slurp(d2 / "pullback.csv"));
  EXPECT_EQ(slurp(d1 / "cloud" / "member_0.ckpt"), slurp(d2 / "cloud" / "member_0.ckpt"));
  EXPECT_NE(slurp(d1 / "cloud" / "member_0.ckpt"), slurp(d3 / "cloud" / "member_0.ckpt"));
}

TEST(Run, OutputDirectoryResolution) {
  RunConfig rc = load_config_text(kSmallSimulate);
  EXPECT_EQ(resolve_output_dir(rc, RunOverrides{"x"}), fs::path("x"));
  rc.output_dir = "from_config";
  EXPECT_EQ(resolve_output_dir(rc, {}), fs::path("from_config"));
  rc.output_dir.clear();
  ::setenv("FHN_OUTPUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(rc, {}), fs::path("/tmp/root/simulate"));
  ::unsetenv("FHN_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(rc, {}), fs::path("fhn_out/simulate"));
}

TEST(Run, ExitCodeMapping) {
  std::ostringstream err;
  EXPECT_EQ(guarded([]() -> int { throw ConfigError("bad"); }, err), exit_config);
  EXPECT_EQ(guarded([]() -> int { throw ConstraintError("bad"); }, err), exit_config);
  EXPECT_EQ(guarded([]() -> int { throw NumericError("nan"); }, err), exit_numeric);
  EXPECT_EQ(guarded([] { return 4; }, err), 4);
  std::istringstream lines(err.str());
  std::string line;
  std::getline(lines, line);
  const json j = json::parse(line);
  EXPECT_EQ(j.at("error"), "config");
  EXPECT_EQ(j.at("exit_code"), exit_config);
}

TEST(Run, DivergingRunExitsWithNumericCode) {
  const auto dir = fresh_dir("diverge");
  const std::string text = R"({
    "grid": {"half_length": 5, "points_per_axis": 20},
    "step": {"dt": 0.5, "scheme": "imex_euler"},
    "experiment": {"simulate": {"t_end": 20, "stride": 1,
                   "initial": {"u": {"kind": "gaussian", "amplitude": 50, "width": 10}}}}
  })";
  std::ostringstream err;
  const int code = guarded([&] { return run(load_config_text(text), RunOverrides{dir.string()}).exit_code; }, err);
  EXPECT_EQ(code, exit_numeric);
  EXPECT_NE(err.str().find("dt may be too large"), std::string::npos);
}
