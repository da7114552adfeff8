#include "proxpg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "proxpg/diagnostics.hpp"
#include "proxpg/environments.hpp"
#include "proxpg/error.hpp"
#include "proxpg/theory.hpp"

namespace proxpg {

using nlohmann::json;

bool DeclaredOverrides::empty() const {
  return !reward_bound && !score_bound && !score_hessian_bound && !reward_grad_bound &&
         !reward_hessian_bound && !weight_bound;
}

TheoryConstants DeclaredOverrides::apply(TheoryConstants tc) const {
  if (reward_bound) tc.reward_bound = *reward_bound;
  if (score_bound) tc.score_bound = *score_bound;
  if (score_hessian_bound) tc.score_hessian_bound = *score_hessian_bound;
  if (reward_grad_bound) tc.reward_grad_bound = *reward_grad_bound;
  if (reward_hessian_bound) tc.reward_hessian_bound = *reward_hessian_bound;
  if (weight_bound) tc.weight_bound = *weight_bound;
  return tc;
}

namespace {

// Forwards everything to a wrapped environment except the declared bounds.
class DeclaredEnvironment final : public Environment {
 public:
  DeclaredEnvironment(std::unique_ptr<Environment> inner, const DeclaredOverrides& overrides)
      : inner_(std::move(inner)), constants_(overrides.apply(inner_->constants())) {
    constants_.validate();
  }

  std::string name() const override { return inner_->name(); }
  Eigen::Index dim() const override { return inner_->dim(); }
  Outcome sample(const Vector& theta, RandomStream& rng) const override {
    return inner_->sample(theta, rng);
  }
  double log_prob(const Vector& theta, const Outcome& x) const override {
    return inner_->log_prob(theta, x);
  }
  Vector grad_log_prob(const Vector& theta, const Outcome& x) const override {
    return inner_->grad_log_prob(theta, x);
  }
  double reward(const Vector& theta, const Outcome& x) const override {
    return inner_->reward(theta, x);
  }
  Vector grad_reward(const Vector& theta, const Outcome& x) const override {
    return inner_->grad_reward(theta, x);
  }
  void score_gradient(const Vector& theta, const Outcome& x,
                      Eigen::Ref<Vector> out) const override {
    inner_->score_gradient(theta, x, out);
  }
  bool enumerable() const override { return inner_->enumerable(); }
  std::span<const Outcome> outcomes() const override { return inner_->outcomes(); }
  TheoryConstants constants() const override { return constants_; }
  Vector random_point(RandomStream& rng) const override { return inner_->random_point(rng); }
  bool in_domain(const Vector& theta) const override { return inner_->in_domain(theta); }

 private:
  std::unique_ptr<Environment> inner_;
  TheoryConstants constants_;
};

[[noreturn]] void config_error(const std::string& message) {
  throw Error(Errc::ConfigError, message);
}

void require_rewards(const EnvironmentSpec& spec) {
  if (spec.rewards.empty()) config_error("field 'environment.rewards' is required for " + spec.kind);
}

// Shortest representation that reads back to the same double.
std::string format_g(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::unique_ptr<Environment> make_environment(const EnvironmentSpec& spec) {
  std::unique_ptr<Environment> env;
  if (spec.kind == "softmax_bandit") {
    require_rewards(spec);
    env = std::make_unique<SoftmaxBandit>(spec.rewards, spec.box_radius);
  } else if (spec.kind == "theta_reward_bandit") {
    require_rewards(spec);
    env = std::make_unique<ThetaRewardBandit>(ThetaRewardBandit::with_random_directions(
        spec.rewards, spec.alpha, spec.direction_seed, spec.box_radius));
  } else if (spec.kind == "direct_bandit") {
    require_rewards(spec);
    env = std::make_unique<DirectBandit>(spec.rewards, spec.floor);
  } else if (spec.kind == "point_mass") {
    if (spec.center.empty()) config_error("field 'environment.center' is required for point_mass");
    env = std::make_unique<PointMassEnv>(
        Eigen::Map<const Vector>(spec.center.data(), static_cast<Eigen::Index>(spec.center.size())),
        spec.amplitude, spec.width);
  } else if (spec.kind == "tabular_mdp") {
    env = std::make_unique<TabularMdp>(TabularMdp::random(
        spec.states, spec.actions, spec.horizon, spec.gamma, spec.mdp_seed, spec.enumeration_cap));
  } else {
    config_error("field 'environment.kind': unknown environment '" + spec.kind + "'");
  }
  if (spec.declared.empty()) return env;
  return std::make_unique<DeclaredEnvironment>(std::move(env), spec.declared);
}

std::unique_ptr<Regularizer> make_regularizer(const RegularizerSpec& spec, Eigen::Index dim) {
  if (spec.kind == "zero") return std::make_unique<ZeroReg>();
  if (spec.kind == "l2") return std::make_unique<ScaledSquaredNorm>(spec.lambda);
  if (spec.kind == "l1") return std::make_unique<L1>(spec.lambda);
  if (spec.kind == "box") return std::make_unique<BoxIndicator>(spec.lower, spec.upper);
  if (spec.kind == "simplex") return std::make_unique<SimplexIndicator>(dim);
  if (spec.kind == "lower_bounded_simplex") {
    return std::make_unique<LowerBoundedSimplexIndicator>(dim, spec.floor);
  }
  config_error("field 'regularizer.kind': unknown regularizer '" + spec.kind + "'");
}

Plan resolve(const ExperimentConfig& config) {
  try {
    Plan plan;
    plan.env = make_environment(config.environment);
    const Eigen::Index n = plan.env->dim();
    plan.reg = make_regularizer(config.regularizer, n);
    plan.algorithm = config.algorithm.name;

    const AlgorithmSpec& a = config.algorithm;
    if (!a.initial.empty()) {
      if (static_cast<Eigen::Index>(a.initial.size()) != n) {
        config_error("field 'algorithm.initial' has " + std::to_string(a.initial.size()) +
                     " entries, expected " + std::to_string(n));
      }
      plan.theta0 = Eigen::Map<const Vector>(a.initial.data(), n);
    } else if (config.regularizer.kind == "simplex" ||
               config.regularizer.kind == "lower_bounded_simplex" ||
               config.environment.kind == "direct_bandit") {
      plan.theta0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
    } else {
      plan.theta0 = Vector::Zero(n);
    }
    if (plan.reg->value(plan.theta0) == std::numeric_limits<double>::infinity()) {
      config_error("field 'algorithm.initial' is infeasible for regularizer " +
                   plan.reg->name());
    }

    DerivedConstants dc = DerivedConstants::from(plan.env->constants());
    if (a.empirical_sigma) dc.sigma_sq = empirical_sigma_sq(*plan.env);

    json& s = plan.schedule;
    s["mode"] = a.schedule;
    s["L"] = dc.L;
    s["sigma_sq"] = dc.sigma_sq;
    if (dc.C) s["C"] = *dc.C;

    auto require = [](const std::optional<double>& v, const char* field, const std::string& why) {
      if (!v) config_error(std::string("field 'algorithm.") + field + "' is required " + why);
      return *v;
    };

    if (a.schedule == "theorem2") {
      if (a.name != "spg") config_error("field 'algorithm.schedule': theorem2 applies to spg");
      const double eps = require(a.epsilon, "epsilon", "for schedule theorem2");
      const double delta = require(a.delta_bound, "delta_bound", "for schedule theorem2");
      const SpgSchedule sched = spg_schedule(eps, delta, dc, a.eta);
      plan.spg = {sched.eta, sched.N, sched.T, 0};
      s["epsilon"] = eps;
      s["delta"] = delta;
      s["degenerate_L"] = sched.degenerate_L;
      s["total_samples"] = sched.total_samples;
      plan.warnings = sched.warnings;
    } else if (a.schedule == "theorem3") {
      if (a.name != "page") config_error("field 'algorithm.schedule': theorem3 applies to page");
      const double eps = require(a.epsilon, "epsilon", "for schedule theorem3");
      if (!dc.C) {
        config_error("schedule theorem3 needs an importance-weight bound; declare "
                     "'environment.declared.weight_bound' or use a bounded domain");
      }
      const PageSchedule sched = page_schedule(eps, dc, a.c_n1, a.c_t, a.eta);
      plan.page = {sched.eta, sched.N1, sched.N2, sched.p, sched.T, 0};
      s["epsilon"] = eps;
      s["eta_max"] = sched.eta_max;
      s["expected_total_samples"] = sched.expected_total;
      plan.warnings = sched.warnings;
    } else {
      const double eta = require(a.eta, "eta", "for schedule manual");
      if (a.iterations == 0) config_error("field 'algorithm.iterations' must be at least 1");
      if (a.name == "spg") {
        if (a.batch == 0) config_error("field 'algorithm.batch' must be at least 1");
        plan.spg = {eta, a.batch, a.iterations, 0};
      } else {
        if (a.n1 == 0 || a.n2 == 0) config_error("fields 'algorithm.n1/n2' must be at least 1");
        if (!(a.p > 0.0 && a.p <= 1.0)) config_error("field 'algorithm.p' must lie in (0, 1]");
        plan.page = {eta, a.n1, a.n2, a.p, a.iterations, 0};
      }
      if (dc.L > 0.0 && eta >= 0.5 / dc.L) {
        plan.warnings.push_back("eta = " + format_g(eta) + " is not below 1/(2L) = " +
                                format_g(0.5 / dc.L));
      }
      if (a.name == "page" && dc.C && dc.L > 0.0 && eta > dc.L / (2.0 * *dc.C + 2.0 * dc.L * dc.L)) {
        plan.warnings.push_back("eta = " + format_g(eta) + " exceeds L/(2C + 2L^2)");
      }
    }
    if (a.name == "spg") {
      s["eta"] = plan.spg.eta;
      s["T"] = plan.spg.T;
      s["N"] = plan.spg.N;
    } else {
      s["eta"] = plan.page.eta;
      s["T"] = plan.page.T;
      s["N1"] = plan.page.N1;
      s["N2"] = plan.page.N2;
      s["p"] = plan.page.p;
    }
    return plan;
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw Error(Errc::ConfigError, e.what());
  }
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) return dir;
  return config.run.output_dir;
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "t,cumulative_samples,grad_mapping_norm,objective,branch\n";
  for (const IterationRecord& r : trace.records) {
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.cumulative_samples);
    out += ',';
    if (r.grad_mapping_norm) out += format_g(*r.grad_mapping_norm);
    out += ',';
    if (r.objective) out += format_g(*r.objective);
    out += ',';
    if (r.branch) out += branch_name(*r.branch);
    out += '\n';
  }
  return out;
}

json schedule_json(const ScheduleRequest& req) {
  DerivedConstants dc = DerivedConstants::from(req.constants);
  if (req.L) dc.L = *req.L;
  if (req.sigma_sq) dc.sigma_sq = *req.sigma_sq;
  if (req.C) dc.C = *req.C;
  json j;
  j["theorem"] = req.theorem;
  j["epsilon"] = req.eps;
  j["L"] = dc.L;
  j["sigma_sq"] = dc.sigma_sq;
  if (dc.C) j["C"] = *dc.C;
  if (req.theorem == 2) {
    const SpgSchedule s = spg_schedule(req.eps, req.delta, dc, req.eta);
    j["delta"] = req.delta;
    j["eta"] = s.eta;
    j["T"] = s.T;
    j["N"] = s.N;
    j["total_samples"] = s.total_samples;
    j["degenerate_L"] = s.degenerate_L;
    j["warnings"] = s.warnings;
  } else if (req.theorem == 3) {
    const PageSchedule s = page_schedule(req.eps, dc, req.c_n1, req.c_t, req.eta);
    j["eta_max"] = s.eta_max;
    j["eta"] = s.eta;
    j["N1"] = s.N1;
    j["N2"] = s.N2;
    j["p"] = s.p;
    j["T"] = s.T;
    j["expected_per_iteration"] = s.expected_per_iteration;
    j["expected_total_samples"] = s.expected_total;
    j["contraction_at_eta"] = page_contraction(s.p, s.N2, s.eta, dc.L, *dc.C);
    j["warnings"] = s.warnings;
  } else {
    throw Error(Errc::InvalidArgument, "theorem must be 2 or 3");
  }
  return j;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(Errc::InvalidArgument, "slope fit needs at least two points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(Errc::InvalidArgument, "slope fit needs distinct x values");
  return sxy / sxx;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(Errc::InvalidArgument, "failed writing " + path.string());
}

json record_summary(const IterationRecord& r) {
  json j;
  j["t"] = r.t;
  j["grad_mapping_norm"] = r.grad_mapping_norm ? json(*r.grad_mapping_norm) : json(nullptr);
  j["subdiff_distance"] = r.subdiff_distance ? json(*r.subdiff_distance) : json(nullptr);
  j["objective"] = r.objective ? json(*r.objective) : json(nullptr);
  j["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
  return j;
}

// Shared front matter: load and resolve, mapping every failure to exit 2.
std::optional<std::pair<ExperimentConfig, Plan>> prepare(const std::filesystem::path& path,
                                                         std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(path);
    Plan plan = resolve(cfg);
    return std::make_pair(std::move(cfg), std::move(plan));
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return std::nullopt;
  }
}

int runtime_failure(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  return e.code() == Errc::NumericalDivergence ? 3 : 1;
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  auto prepared = prepare(config_path, err);
  if (!prepared) return 2;
  auto& [cfg, plan] = *prepared;
  for (const std::string& w : plan.warnings) err << "warning: " << w << "\n";

  json summary;
  summary["config"] = config_path.string();
  summary["environment"] = plan.env->name();
  summary["regularizer"] = plan.reg->name();
  summary["algorithm"] = plan.algorithm;
  summary["schedule"] = plan.schedule;
  summary["warnings"] = plan.warnings;
  summary["dry_run"] = cfg.run.dry_run;
  summary["runs"] = json::array();

  const std::filesystem::path dir = output_dir(cfg);
  try {
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    if (!cfg.run.dry_run) {
      RunOptions options;
      options.track_exact = cfg.run.track_exact;
      options.workers = static_cast<unsigned>(cfg.run.workers);
      for (std::uint64_t seed : cfg.run.seeds) {
        RunTrace trace;
        const ParamVector theta0(plan.theta0);
        if (plan.algorithm == "spg") {
          SpgConfig c = plan.spg;
          c.seed = seed;
          trace = run_spg(*plan.env, *plan.reg, c, theta0, options);
        } else {
          PageConfig c = plan.page;
          c.seed = seed;
          trace = run_page(*plan.env, *plan.reg, c, theta0, options);
        }
        const std::string csv_name = "trace_seed" + std::to_string(seed) + ".csv";
        files.emplace_back(dir / csv_name, trace_csv(trace));
        json r;
        r["seed"] = seed;
        r["csv"] = csv_name;
        r["iterations"] = trace.iterations();
        r["output_index"] = trace.output_index;
        r["output"] = record_summary(trace.output());
        r["final"] = record_summary(trace.records.back());
        r["total_samples"] = trace.records.back().cumulative_samples;
        r["wall_time_seconds"] = trace.wall_time_seconds;
        summary["runs"].push_back(std::move(r));
      }
    }
    std::filesystem::create_directories(dir);
    for (const auto& [path, content] : files) write_file(path, content);
    write_file(dir / "summary.json", summary.dump(2) + "\n");
  } catch (const Error& e) {
    return runtime_failure(e, err);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out << summary["schedule"].dump() << "\n";
  out << "wrote " << (dir / "summary.json").string() << "\n";
  return 0;
}

int cmd_check(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  // Only the environment matters here; algorithm settings are not resolved.
  ExperimentConfig cfg;
  std::unique_ptr<Environment> env;
  try {
    cfg = load_config(config_path);
    env = make_environment(cfg.environment);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const std::vector<Report> reports = run_battery(*env, cfg.run.seeds.front());
    json all = json::array();
    bool failed = false;
    for (const Report& r : reports) {
      const char* status = !r.pass ? "INCONCLUSIVE" : (*r.pass ? "PASS" : "FAIL");
      out << status << " " << r.name << " " << r.values.dump() << "\n";
      if (r.assertion && r.pass && !*r.pass) failed = true;
      all.push_back(r.to_json());
    }
    const std::filesystem::path dir = output_dir(cfg);
    std::filesystem::create_directories(dir);
    write_file(dir / "check.json", all.dump(2) + "\n");
    return failed ? 1 : 0;
  } catch (const Error& e) {
    return runtime_failure(e, err);
  }
}

int cmd_schedule(const ScheduleRequest& request, std::ostream& out, std::ostream& err) {
  try {
    out << schedule_json(request).dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

namespace {

struct SweepCell {
  std::string algorithm;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string status;  // hit | budget_exceeded | max_iterations | diverged
  std::size_t samples = 0;
  std::size_t iterations = 0;
};

}  // namespace

int cmd_sweep(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  auto prepared = prepare(config_path, err);
  if (!prepared) return 2;
  auto& [cfg, plan] = *prepared;
  const SweepSpec& sw = cfg.sweep;
  if (sw.epsilons.empty()) {
    err << "config error: field 'sweep.epsilons' must list at least one tolerance\n";
    return 2;
  }
  if (!plan.env->enumerable()) {
    err << "config error: sweep stops on exact stationarity and needs an enumerable environment\n";
    return 2;
  }

  DerivedConstants dc = DerivedConstants::from(plan.env->constants());
  if (cfg.algorithm.empirical_sigma) dc.sigma_sq = empirical_sigma_sq(*plan.env);
  const double delta = cfg.algorithm.delta_bound.value_or(
      default_delta(*plan.env, *plan.reg, plan.theta0));

  // Schedules are resolved up front so that configuration problems exit 2
  // before any work starts.
  std::vector<SweepCell> cells;
  std::vector<SpgConfig> spg_cfgs;
  std::vector<PageConfig> page_cfgs;
  json schedules = json::array();
  try {
    for (const std::string& alg : sw.algorithms) {
      for (double eps : sw.epsilons) {
        json s;
        s["algorithm"] = alg;
        s["epsilon"] = eps;
        SpgConfig sc;
        PageConfig pc;
        if (alg == "spg") {
          const SpgSchedule sched = spg_schedule(eps, delta, dc, cfg.algorithm.eta);
          sc = {sched.eta, sched.N, sw.max_iterations.value_or(sched.T), 0};
          s["eta"] = sc.eta;
          s["N"] = sc.N;
          s["T"] = sc.T;
        } else {
          const PageSchedule sched =
              page_schedule(eps, dc, cfg.algorithm.c_n1, cfg.algorithm.c_t, cfg.algorithm.eta);
          pc = {sched.eta, sched.N1, sched.N2, sched.p, sw.max_iterations.value_or(sched.T), 0};
          s["eta"] = pc.eta;
          s["N1"] = pc.N1;
          s["N2"] = pc.N2;
          s["p"] = pc.p;
          s["T"] = pc.T;
          s["warnings"] = sched.warnings;
        }
        schedules.push_back(std::move(s));
        for (std::uint64_t seed : cfg.run.seeds) {
          cells.push_back({alg, eps, seed, "", 0, 0});
          sc.seed = seed;
          pc.seed = seed;
          spg_cfgs.push_back(sc);
          page_cfgs.push_back(pc);
        }
      }
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  auto run_cell = [&](std::size_t i) {
    SweepCell& cell = cells[i];
    RunOptions options;
    options.track_exact = true;
    const double eps = cell.eps;
    options.stop = [eps](const IterationRecord& r) {
      return r.grad_mapping_norm && *r.grad_mapping_norm <= eps;
    };
    if (sw.sample_cap) options.sample_cap = static_cast<std::size_t>(*sw.sample_cap);
    try {
      const ParamVector theta0(plan.theta0);
      const RunTrace trace = cell.algorithm == "spg"
                                 ? run_spg(*plan.env, *plan.reg, spg_cfgs[i], theta0, options)
                                 : run_page(*plan.env, *plan.reg, page_cfgs[i], theta0, options);
      const IterationRecord& last = trace.records.back();
      cell.iterations = last.t;
      cell.samples = last.cumulative_samples;
      const bool hit = last.t > 0 && last.grad_mapping_norm && *last.grad_mapping_norm <= eps;
      cell.status = hit ? "hit" : (trace.budget_exceeded ? "budget_exceeded" : "max_iterations");
    } catch (const Error& e) {
      if (e.code() != Errc::NumericalDivergence) throw;
      cell.status = "diverged";
    }
  };

  const unsigned pool =
      static_cast<unsigned>(std::min<std::size_t>(cfg.run.workers, std::max<std::size_t>(cells.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<Error> failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        run_cell(i);
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = e;
      }
    }
  };
  std::vector<std::thread> threads;
  for (unsigned w = 1; w < pool; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (failure) return runtime_failure(*failure, err);

  std::string csv = "algorithm,epsilon,seed,samples,iterations,status\n";
  for (const SweepCell& c : cells) {
    csv += c.algorithm + "," + format_g(c.eps) + "," + std::to_string(c.seed) + "," +
           std::to_string(c.samples) + "," + std::to_string(c.iterations) + "," + c.status + "\n";
  }

  json summary;
  summary["stopping_rule"] =
      "first iterate t >= 1 with exact ||G_eta(theta^t)|| <= epsilon; a first-hitting-time "
      "proxy for the randomly selected output iterate";
  summary["samples_definition"] = "outcome draws consumed before the hitting iterate was formed";
  summary["delta"] = delta;
  summary["L"] = dc.L;
  summary["sigma_sq"] = dc.sigma_sq;
  summary["schedules"] = schedules;
  json fits = json::object();
  for (const std::string& alg : sw.algorithms) {
    std::vector<double> xs, ys;
    json per_eps = json::object();
    for (double eps : sw.epsilons) {
      double total = 0.0;
      std::size_t hits = 0, misses = 0;
      for (const SweepCell& c : cells) {
        if (c.algorithm != alg || c.eps != eps) continue;
        if (c.status == "hit") {
          xs.push_back(eps);
          ys.push_back(static_cast<double>(std::max<std::size_t>(c.samples, 1)));
          total += static_cast<double>(c.samples);
          ++hits;
        } else {
          ++misses;
        }
      }
      json e;
      e["hits"] = hits;
      e["misses"] = misses;
      e["mean_samples"] = hits ? json(total / static_cast<double>(hits)) : json(nullptr);
      per_eps[format_g(eps)] = e;
    }
    json f;
    f["per_epsilon"] = per_eps;
    bool distinct = false;
    for (double x : xs) distinct = distinct || x != xs.front();
    f["slope"] = distinct ? json(loglog_slope(xs, ys)) : json(nullptr);
    fits[alg] = f;
  }
  summary["fits"] = fits;

  const std::filesystem::path dir = output_dir(cfg);
  try {
    std::filesystem::create_directories(dir);
    write_file(dir / "sweep.csv", csv);
    write_file(dir / "sweep.json", summary.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (const std::string& alg : sw.algorithms) {
    out << alg << " slope " << fits[alg]["slope"].dump() << "\n";
  }
  out << "wrote " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace proxpg
