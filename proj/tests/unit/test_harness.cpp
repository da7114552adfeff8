#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "proxpg/error.hpp"
#include "proxpg/harness.hpp"

using namespace proxpg;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("proxpg_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.toml");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

const char* kMinimal = R"(
[environment]
kind = "softmax_bandit"
rewards = [1.0, 0.0]

[algorithm]
name = "spg"
eta = 0.1
batch = 20
iterations = 15
)";

}  // namespace

TEST(Config, RoundTripIsIdentity) {
  ExperimentConfig c;
  c.environment.kind = "theta_reward_bandit";
  c.environment.rewards = {1.0, 0.25, -0.5};
  c.environment.box_radius = 1.5;
  c.environment.alpha = 0.3;
  c.environment.direction_seed = 9;
  c.environment.declared.weight_bound = 2.0;
  c.environment.declared.score_bound = 0.1 + 0.2;
  c.regularizer = {"box", 0.0, -1.5, 1.5, 1e-3};
  c.algorithm.name = "page";
  c.algorithm.schedule = "theorem3";
  c.algorithm.epsilon = 0.2;
  c.algorithm.c_n1 = 2.5;
  c.algorithm.c_t = 1.0 / 3.0;
  c.algorithm.initial = {0.1, 0.2, 0.3};
  c.run.seeds = {1, 5, 8};
  c.run.workers = 3;
  c.run.output_dir = "out dir/x";
  c.sweep.epsilons = {0.2, 0.1};
  c.sweep.sample_cap = 1000000;
  const ExperimentConfig back = parse_config(serialize_config(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));

  for (const char* name : {"spg_bandit.toml", "page_bandit.toml", "theorem2_schedule.toml",
                           "mdp_check.toml", "page_theorem3.toml", "sweep_bandit.toml"}) {
    const ExperimentConfig shipped = load_config(fs::path(PROXPG_SOURCE_DIR) / "configs" / name);
    EXPECT_TRUE(parse_config(serialize_config(shipped)) == shipped) << name;
  }
}

TEST(Config, ErrorsNameLineAndField) {
  std::string msg = config_error("[environment]\nkind = \"softmax_bandit\"\nrewards = [1.0]\nbogus = 3\n");
  EXPECT_NE(msg.find("cfg.toml:4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("environment.bogus"), std::string::npos) << msg;

  msg = config_error("[environment]\nkind = \"softmax_bandit\"\n[algorithm]\nbatch = \"ten\"\n");
  EXPECT_NE(msg.find("cfg.toml:4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("algorithm.batch"), std::string::npos) << msg;

  msg = config_error("[environment]\nkind = \"softmax_bandit\"\n[algorithm]\nname = \"sgd\"\n");
  EXPECT_NE(msg.find("algorithm.name"), std::string::npos) << msg;

  msg = config_error("[environment]\nkind = \"x\"\n[extra]\n");
  EXPECT_NE(msg.find("extra"), std::string::npos) << msg;

  msg = config_error("[environment]\nkind = \"softmax_bandit\"\nrewards = [1.0,\n");
  EXPECT_NE(msg.find("cfg.toml:"), std::string::npos) << msg;

  msg = config_error("[algorithm]\nname = \"spg\"\n");
  EXPECT_NE(msg.find("environment"), std::string::npos) << msg;

  msg = config_error(std::string(kMinimal) + "[run]\nseeds = []\n");
  EXPECT_NE(msg.find("run.seeds"), std::string::npos) << msg;
}

TEST(Resolve, ScheduleRequirements) {
  ExperimentConfig c = parse_config(kMinimal);
  c.algorithm.schedule = "theorem2";
  c.algorithm.epsilon = 0.1;
  EXPECT_THROW(resolve(c), Error);  // no delta_bound
  c.algorithm.delta_bound = 1.0;
  EXPECT_NO_THROW(resolve(c));

  c.algorithm.name = "page";
  c.algorithm.schedule = "theorem3";
  try {
    resolve(c);  // no C_w declared
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
  }
  c.environment.box_radius = 1.0;
  c.regularizer = {"box", 0.0, -1.0, 1.0, 1e-3};
  const Plan plan = resolve(c);
  EXPECT_EQ(plan.page.N1, 100u);
  EXPECT_EQ(plan.page.N2, 10u);

  ExperimentConfig bad = parse_config(kMinimal);
  bad.algorithm.eta.reset();
  EXPECT_THROW(resolve(bad), Error);
  bad = parse_config(kMinimal);
  bad.environment.kind = "nope";
  EXPECT_THROW(resolve(bad), Error);
  bad = parse_config(kMinimal);
  bad.regularizer.kind = "entropy";
  EXPECT_THROW(resolve(bad), Error);
}

TEST(Resolve, SimplexDefaultsToCenter) {
  ExperimentConfig c = parse_config(kMinimal);
  c.environment.kind = "direct_bandit";
  c.environment.rewards = {1.0, 0.5, 0.0, 0.2};
  c.environment.floor = 0.05;
  c.regularizer.kind = "lower_bounded_simplex";
  c.regularizer.floor = 0.05;
  const Plan plan = resolve(c);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(plan.theta0[i], 0.25);
}

TEST(CmdRun, WritesTraceAndSummary) {
  TempDir tmp;
  const fs::path out = tmp.path() / "out";
  const fs::path cfg = write(tmp.path() / "min.toml",
                             std::string(kMinimal) + "[run]\nseeds = [4]\noutput_dir = \"" +
                                 out.string() + "\"\n");
  std::ostringstream o, e;
  ASSERT_EQ(cmd_run(cfg, o, e), 0) << e.str();
  const std::string csv = slurp(out / "trace_seed4.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,cumulative_samples,grad_mapping_norm,objective,branch");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 16u);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  ASSERT_EQ(summary["runs"].size(), 1u);
  const auto& run = summary["runs"][0];
  EXPECT_GE(run["output_index"].get<int>(), 1);
  EXPECT_LE(run["output_index"].get<int>(), 15);
  EXPECT_EQ(run["total_samples"].get<int>(), 300);
  EXPECT_TRUE(run["output"]["grad_mapping_norm"].is_number());
}

TEST(CmdRun, DeterministicCsv) {
  TempDir tmp;
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = tmp.path() / ("o" + std::to_string(k));
    const fs::path cfg = write(tmp.path() / "c.toml",
                               std::string(kMinimal) + "[run]\nseeds = [7]\nworkers = " +
                                   std::to_string(1 + 3 * k) + "\noutput_dir = \"" +
                                   out.string() + "\"\n");
    std::ostringstream o, e;
    ASSERT_EQ(cmd_run(cfg, o, e), 0) << e.str();
    csv[k] = slurp(out / "trace_seed7.csv");
  }
  EXPECT_FALSE(csv[0].empty());
  EXPECT_EQ(csv[0], csv[1]);
}

TEST(CmdRun, SpgScheduleDryRunEchoesSchedule) {
  TempDir tmp;
  const ExperimentConfig shipped =
      load_config(fs::path(PROXPG_SOURCE_DIR) / "configs" / "theorem2_schedule.toml");
  ExperimentConfig c = shipped;
  c.run.output_dir = (tmp.path() / "t2").string();
  const fs::path cfg = write(tmp.path() / "t2.toml", serialize_config(c));
  std::ostringstream o, e;
  ASSERT_EQ(cmd_run(cfg, o, e), 0) << e.str();
  const auto summary = nlohmann::json::parse(slurp(tmp.path() / "t2" / "summary.json"));
  EXPECT_EQ(summary["schedule"]["T"].get<std::uint64_t>(), 40000u);
  EXPECT_EQ(summary["schedule"]["N"].get<std::uint64_t>(), 28800u);
  EXPECT_DOUBLE_EQ(summary["schedule"]["L"].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(summary["schedule"]["sigma_sq"].get<double>(), 8.0);
  EXPECT_TRUE(summary["runs"].empty());
}

TEST(CmdRun, MalformedConfigWritesNothing) {
  TempDir tmp;
  const fs::path out = tmp.path() / "never";
  const fs::path cfg = write(tmp.path() / "bad.toml",
                             "[run]\noutput_dir = \"" + out.string() + "\"\n[environment\n");
  std::ostringstream o, e;
  EXPECT_EQ(cmd_run(cfg, o, e), 2);
  EXPECT_NE(e.str().find("bad.toml:"), std::string::npos) << e.str();
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(cmd_run(tmp.path() / "missing.toml", o, e), 2);
  EXPECT_EQ(cmd_run(fs::path(PROXPG_SOURCE_DIR) / "tests" / "data" / "malformed.toml", o, e), 2);
}

TEST(CmdRun, DivergenceExitsThree) {
  TempDir tmp;
  const fs::path out = tmp.path() / "div";
  const fs::path cfg = write(tmp.path() / "div.toml", R"(
[environment]
kind = "point_mass"
center = [0.0]
amplitude = 1e9
width = 1.0

[algorithm]
name = "spg"
eta = 1000.0
batch = 1
iterations = 10
initial = [1.0]

[run]
output_dir = ")" + out.string() + "\"\n");
  std::ostringstream o, e;
  EXPECT_EQ(cmd_run(cfg, o, e), 3);
  EXPECT_NE(e.str().find("NumericalDivergence"), std::string::npos) << e.str();
  EXPECT_FALSE(fs::exists(out));
}

TEST(CmdRun, OutputDirEnvironmentOverride) {
  TempDir tmp;
  const fs::path configured = tmp.path() / "configured";
  const fs::path overridden = tmp.path() / "overridden";
  const fs::path cfg = write(tmp.path() / "c.toml",
                             std::string(kMinimal) + "[run]\noutput_dir = \"" +
                                 configured.string() + "\"\n");
  ::setenv(kOutputDirEnv, overridden.c_str(), 1);
  std::ostringstream o, e;
  const int status = cmd_run(cfg, o, e);
  ::unsetenv(kOutputDirEnv);
  ASSERT_EQ(status, 0) << e.str();
  EXPECT_TRUE(fs::exists(overridden / "summary.json"));
  EXPECT_FALSE(fs::exists(configured));
}

TEST(CmdCheck, PassesOnBanditAndFailsOnUnderstatedBound) {
  TempDir tmp;
  fs::path cfg = write(tmp.path() / "ok.toml",
                       std::string(kMinimal) + "[run]\noutput_dir = \"" +
                           (tmp.path() / "ok").string() + "\"\n");
  std::ostringstream o, e;
  EXPECT_EQ(cmd_check(cfg, o, e), 0) << o.str() << e.str();
  EXPECT_NE(o.str().find("PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(tmp.path() / "ok" / "check.json"));

  cfg = write(tmp.path() / "bad.toml",
              std::string(kMinimal) + "[environment.declared]\nscore_bound = 0.5\n[run]\noutput_dir = \"" +
                  (tmp.path() / "bad").string() + "\"\n");
  std::ostringstream o2, e2;
  EXPECT_EQ(cmd_check(cfg, o2, e2), 1) << o2.str() << e2.str();
  EXPECT_NE(o2.str().find("FAIL"), std::string::npos);
}

TEST(Schedule, JsonForBothMethods) {
  ScheduleRequest r;
  r.eps = 0.1;
  r.theorem = 2;
  r.constants.reward_bound = 1.0;
  r.constants.score_bound = 2.0;
  r.constants.score_hessian_bound = 1.0;
  auto j = schedule_json(r);
  EXPECT_EQ(j["T"].get<std::uint64_t>(), 40000u);
  EXPECT_EQ(j["N"].get<std::uint64_t>(), 28800u);
  EXPECT_DOUBLE_EQ(j["eta"].get<double>(), 0.05);

  r.theorem = 3;
  r.constants.score_bound = 1.0;
  r.constants.weight_bound = 1.0;
  j = schedule_json(r);
  // L = 1 (1 + 1) = 2, C = 30: eta_max = 2 / (60 + 8).
  EXPECT_DOUBLE_EQ(j["eta_max"].get<double>(), 2.0 / 68.0);
  EXPECT_EQ(j["N1"].get<std::uint64_t>(), 100u);
  EXPECT_EQ(j["N2"].get<std::uint64_t>(), 10u);
  EXPECT_GE(j["contraction_at_eta"].get<double>(), 0.5);

  r.L = 5.0;
  r.C = 30.0;
  j = schedule_json(r);
  EXPECT_DOUBLE_EQ(j["eta_max"].get<double>(), 1.0 / 22.0);

  std::ostringstream o, e;
  EXPECT_EQ(cmd_schedule(r, o, e), 0);
  EXPECT_NE(o.str().find("N1"), std::string::npos);
  ScheduleRequest bad;
  bad.theorem = 3;
  EXPECT_EQ(cmd_schedule(bad, o, e), 2);
}

TEST(Sweep, LogLogSlope) {
  const std::vector<double> x = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> y;
  for (double v : x) y.push_back(7.0 * std::pow(v, -3.0));
  EXPECT_NEAR(loglog_slope(x, y), -3.0, 1e-12);
  EXPECT_THROW(loglog_slope({0.1}, {1.0}), Error);
}

TEST(CmdSweep, SmallGrid) {
  TempDir tmp;
  const fs::path out = tmp.path() / "sweep";
  const fs::path cfg = write(tmp.path() / "s.toml", R"(
[environment]
kind = "softmax_bandit"
rewards = [1.0, 0.0]
box_radius = 5.0

[regularizer]
kind = "box"
lower = -5.0
upper = 5.0

[algorithm]
eta = 0.1

[run]
seeds = [1, 2]
workers = 2
output_dir = ")" + out.string() + R"("

[sweep]
epsilons = [0.3, 0.2]
max_iterations = 2000
)");
  std::ostringstream o, e;
  ASSERT_EQ(cmd_sweep(cfg, o, e), 0) << e.str();
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(csv.rfind("algorithm,epsilon,seed,samples,iterations,status\n", 0), 0u);
  std::size_t rows = 0;
  for (char ch : csv) rows += ch == '\n';
  EXPECT_EQ(rows, 1u + 2u * 2u * 2u);
  const auto summary = nlohmann::json::parse(slurp(out / "sweep.json"));
  EXPECT_TRUE(summary.contains("stopping_rule"));
  EXPECT_TRUE(summary["fits"].contains("spg"));
  EXPECT_TRUE(summary["fits"].contains("page"));
}

TEST(CmdCheck, IgnoresAlgorithmSettings) {
  TempDir tmp;
  const ExperimentConfig shipped =
      load_config(fs::path(PROXPG_SOURCE_DIR) / "configs" / "mdp_check.toml");
  ExperimentConfig c = shipped;
  c.run.output_dir = (tmp.path() / "mdp").string();
  const fs::path cfg = write(tmp.path() / "mdp.toml", serialize_config(c));
  std::ostringstream o, e;
  EXPECT_EQ(cmd_check(cfg, o, e), 0) << o.str() << e.str();
  EXPECT_TRUE(fs::exists(tmp.path() / "mdp" / "check.json"));
}
