// TOML parsing and serialization of ExperimentConfig.
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "proxpg/error.hpp"
#include "proxpg/harness.hpp"

namespace proxpg {

namespace {

// Reads one TOML table, remembering which keys were consumed so that
// unknown keys can be reported.
class Section {
 public:
  Section(const toml::table* table, std::string name, std::string_view source)
      : table_(table), name_(std::move(name)), source_(source) {}

  bool present() const { return table_ != nullptr; }

  std::optional<double> number(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) {
      if (!std::isfinite(*v)) fail(*n, key, "must be finite");
      return *v;
    }
    fail(*n, key, "expected a number");
  }

  std::optional<std::uint64_t> count(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(*n, key, "expected an integer");
    const std::int64_t v = n->as_integer()->get();
    if (v < 0) fail(*n, key, "must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }

  std::optional<int> small_int(std::string_view key) {
    auto v = count(key);
    if (!v) return std::nullopt;
    if (*v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      fail(*table_->get(key), key, "is too large");
    }
    return static_cast<int>(*v);
  }

  std::optional<bool> flag(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) fail(*n, key, "expected true or false");
    return n->as_boolean()->get();
  }

  std::optional<std::string> text(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(*n, key, "expected a string");
    return n->as_string()->get();
  }

  std::optional<std::vector<double>> numbers(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of numbers");
    std::vector<double> out;
    for (const toml::node& e : *arr) {
      auto v = e.value<double>();
      if (!v || !std::isfinite(*v)) fail(e, key, "expected an array of finite numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::vector<std::uint64_t>> counts(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of integers");
    std::vector<std::uint64_t> out;
    for (const toml::node& e : *arr) {
      if (!e.is_integer() || e.as_integer()->get() < 0) {
        fail(e, key, "expected an array of nonnegative integers");
      }
      out.push_back(static_cast<std::uint64_t>(e.as_integer()->get()));
    }
    return out;
  }

  std::optional<std::vector<std::string>> texts(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, key, "expected an array of strings");
    std::vector<std::string> out;
    for (const toml::node& e : *arr) {
      if (!e.is_string()) fail(e, key, "expected an array of strings");
      out.push_back(e.as_string()->get());
    }
    return out;
  }

  Section subsection(std::string_view key) {
    const toml::node* n = take(key);
    if (!n) return Section(nullptr, name_ + "." + std::string(key), source_);
    if (!n->is_table()) fail(*n, key, "expected a table");
    return Section(n->as_table(), name_ + "." + std::string(key), source_);
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) fail(v, k.str(), "is not a recognized field");
    }
  }

  [[noreturn]] void fail_field(std::string_view key, const std::string& what) const {
    if (table_) {
      if (const toml::node* n = table_->get(key)) fail(*n, key, what);
    }
    std::ostringstream os;
    os << source_;
    if (table_ && table_->source().begin.line > 0) os << ":" << table_->source().begin.line;
    os << ": field '" << name_ << "." << key << "' " << what;
    throw Error(Errc::ConfigError, os.str());
  }

 private:
  const toml::node* take(std::string_view key) {
    seen_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }

  [[noreturn]] void fail(const toml::node& n, std::string_view key, const std::string& what) const {
    std::ostringstream os;
    os << source_ << ":" << n.source().begin.line << ": field '" << name_ << "." << key << "' "
       << what;
    throw Error(Errc::ConfigError, os.str());
  }

  const toml::table* table_;
  std::string name_;
  std::string_view source_;
  std::set<std::string> seen_;
};

template <typename T>
void assign(T& target, std::optional<T> v) {
  if (v) target = std::move(*v);
}

template <typename T>
void assign(std::optional<T>& target, std::optional<T> v) {
  if (v) target = std::move(v);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw Error(Errc::ConfigError, os.str());
  }

  ExperimentConfig c;
  const std::set<std::string> sections{"environment", "regularizer", "algorithm", "run", "sweep"};
  for (const auto& [k, v] : root) {
    if (!sections.count(std::string(k.str()))) {
      std::ostringstream os;
      os << source << ":" << v.source().begin.line << ": unknown section '" << k.str() << "'";
      throw Error(Errc::ConfigError, os.str());
    }
    if (!v.is_table()) {
      std::ostringstream os;
      os << source << ":" << v.source().begin.line << ": '" << k.str() << "' must be a table";
      throw Error(Errc::ConfigError, os.str());
    }
  }

  {
    Section s(root["environment"].as_table(), "environment", source);
    if (!s.present()) {
      throw Error(Errc::ConfigError, std::string(source) + ": missing [environment] section");
    }
    EnvironmentSpec& e = c.environment;
    auto kind = s.text("kind");
    if (!kind) s.fail_field("kind", "is required");
    e.kind = *kind;
    assign(e.rewards, s.numbers("rewards"));
    assign(e.box_radius, s.number("box_radius"));
    assign(e.alpha, s.number("alpha"));
    assign(e.direction_seed, s.count("direction_seed"));
    assign(e.floor, s.number("floor"));
    assign(e.center, s.numbers("center"));
    assign(e.amplitude, s.number("amplitude"));
    assign(e.width, s.number("width"));
    assign(e.states, s.small_int("states"));
    assign(e.actions, s.small_int("actions"));
    assign(e.horizon, s.small_int("horizon"));
    assign(e.gamma, s.number("gamma"));
    assign(e.mdp_seed, s.count("mdp_seed"));
    assign(e.enumeration_cap, s.number("enumeration_cap"));
    Section d = s.subsection("declared");
    assign(e.declared.reward_bound, d.number("reward_bound"));
    assign(e.declared.score_bound, d.number("score_bound"));
    assign(e.declared.score_hessian_bound, d.number("score_hessian_bound"));
    assign(e.declared.reward_grad_bound, d.number("reward_grad_bound"));
    assign(e.declared.reward_hessian_bound, d.number("reward_hessian_bound"));
    assign(e.declared.weight_bound, d.number("weight_bound"));
    d.finish();
    s.finish();
  }
  {
    Section s(root["regularizer"].as_table(), "regularizer", source);
    RegularizerSpec& r = c.regularizer;
    assign(r.kind, s.text("kind"));
    assign(r.lambda, s.number("lambda"));
    assign(r.lower, s.number("lower"));
    assign(r.upper, s.number("upper"));
    assign(r.floor, s.number("floor"));
    s.finish();
  }
  {
    Section s(root["algorithm"].as_table(), "algorithm", source);
    AlgorithmSpec& a = c.algorithm;
    assign(a.name, s.text("name"));
    assign(a.schedule, s.text("schedule"));
    assign(a.eta, s.number("eta"));
    assign(a.batch, s.count("batch"));
    assign(a.iterations, s.count("iterations"));
    assign(a.n1, s.count("n1"));
    assign(a.n2, s.count("n2"));
    assign(a.p, s.number("p"));
    assign(a.epsilon, s.number("epsilon"));
    assign(a.delta_bound, s.number("delta_bound"));
    assign(a.c_n1, s.number("c_n1"));
    assign(a.c_t, s.number("c_t"));
    assign(a.empirical_sigma, s.flag("empirical_sigma"));
    assign(a.initial, s.numbers("initial"));
    if (a.name != "spg" && a.name != "page") s.fail_field("name", "must be \"spg\" or \"page\"");
    if (a.schedule != "manual" && a.schedule != "theorem2" && a.schedule != "theorem3") {
      s.fail_field("schedule", "must be \"manual\", \"theorem2\" or \"theorem3\"");
    }
    s.finish();
  }
  {
    Section s(root["run"].as_table(), "run", source);
    RunSpec& r = c.run;
    assign(r.seeds, s.counts("seeds"));
    assign(r.output_dir, s.text("output_dir"));
    assign(r.track_exact, s.flag("track_exact"));
    assign(r.workers, s.count("workers"));
    assign(r.dry_run, s.flag("dry_run"));
    if (r.seeds.empty()) s.fail_field("seeds", "must list at least one seed");
    if (r.workers == 0) s.fail_field("workers", "must be at least 1");
    s.finish();
  }
  {
    Section s(root["sweep"].as_table(), "sweep", source);
    SweepSpec& w = c.sweep;
    assign(w.epsilons, s.numbers("epsilons"));
    assign(w.algorithms, s.texts("algorithms"));
    assign(w.sample_cap, s.count("sample_cap"));
    assign(w.max_iterations, s.count("max_iterations"));
    for (const std::string& a : w.algorithms) {
      if (a != "spg" && a != "page") s.fail_field("algorithms", "entries must be spg or page");
    }
    s.finish();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

namespace {

toml::array to_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v) a.push_back(x);
  return a;
}

void put(toml::table& t, std::string_view key, const std::optional<double>& v) {
  if (v) t.insert_or_assign(key, *v);
}

void put(toml::table& t, std::string_view key, const std::optional<std::uint64_t>& v) {
  if (v) t.insert_or_assign(key, static_cast<std::int64_t>(*v));
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  toml::table env;
  const EnvironmentSpec& e = c.environment;
  env.insert_or_assign("kind", e.kind);
  env.insert_or_assign("rewards", to_array(e.rewards));
  put(env, "box_radius", e.box_radius);
  env.insert_or_assign("alpha", e.alpha);
  env.insert_or_assign("direction_seed", static_cast<std::int64_t>(e.direction_seed));
  env.insert_or_assign("floor", e.floor);
  env.insert_or_assign("center", to_array(e.center));
  env.insert_or_assign("amplitude", e.amplitude);
  env.insert_or_assign("width", e.width);
  env.insert_or_assign("states", e.states);
  env.insert_or_assign("actions", e.actions);
  env.insert_or_assign("horizon", e.horizon);
  env.insert_or_assign("gamma", e.gamma);
  env.insert_or_assign("mdp_seed", static_cast<std::int64_t>(e.mdp_seed));
  env.insert_or_assign("enumeration_cap", e.enumeration_cap);
  if (!e.declared.empty()) {
    toml::table d;
    put(d, "reward_bound", e.declared.reward_bound);
    put(d, "score_bound", e.declared.score_bound);
    put(d, "score_hessian_bound", e.declared.score_hessian_bound);
    put(d, "reward_grad_bound", e.declared.reward_grad_bound);
    put(d, "reward_hessian_bound", e.declared.reward_hessian_bound);
    put(d, "weight_bound", e.declared.weight_bound);
    env.insert_or_assign("declared", std::move(d));
  }

  toml::table reg;
  reg.insert_or_assign("kind", c.regularizer.kind);
  reg.insert_or_assign("lambda", c.regularizer.lambda);
  reg.insert_or_assign("lower", c.regularizer.lower);
  reg.insert_or_assign("upper", c.regularizer.upper);
  reg.insert_or_assign("floor", c.regularizer.floor);

  toml::table alg;
  const AlgorithmSpec& a = c.algorithm;
  alg.insert_or_assign("name", a.name);
  alg.insert_or_assign("schedule", a.schedule);
  put(alg, "eta", a.eta);
  alg.insert_or_assign("batch", static_cast<std::int64_t>(a.batch));
  alg.insert_or_assign("iterations", static_cast<std::int64_t>(a.iterations));
  alg.insert_or_assign("n1", static_cast<std::int64_t>(a.n1));
  alg.insert_or_assign("n2", static_cast<std::int64_t>(a.n2));
  alg.insert_or_assign("p", a.p);
  put(alg, "epsilon", a.epsilon);
  put(alg, "delta_bound", a.delta_bound);
  alg.insert_or_assign("c_n1", a.c_n1);
  put(alg, "c_t", a.c_t);
  alg.insert_or_assign("empirical_sigma", a.empirical_sigma);
  alg.insert_or_assign("initial", to_array(a.initial));

  toml::table run;
  toml::array seeds;
  for (std::uint64_t s : c.run.seeds) seeds.push_back(static_cast<std::int64_t>(s));
  run.insert_or_assign("seeds", std::move(seeds));
  run.insert_or_assign("output_dir", c.run.output_dir);
  run.insert_or_assign("track_exact", c.run.track_exact);
  run.insert_or_assign("workers", static_cast<std::int64_t>(c.run.workers));
  run.insert_or_assign("dry_run", c.run.dry_run);

  toml::table sweep;
  sweep.insert_or_assign("epsilons", to_array(c.sweep.epsilons));
  toml::array algs;
  for (const std::string& s : c.sweep.algorithms) algs.push_back(s);
  sweep.insert_or_assign("algorithms", std::move(algs));
  put(sweep, "sample_cap", c.sweep.sample_cap);
  put(sweep, "max_iterations", c.sweep.max_iterations);

  toml::table root;
  root.insert_or_assign("environment", std::move(env));
  root.insert_or_assign("regularizer", std::move(reg));
  root.insert_or_assign("algorithm", std::move(alg));
  root.insert_or_assign("run", std::move(run));
  root.insert_or_assign("sweep", std::move(sweep));
  std::ostringstream os;
  os << root << "\n";
  return os.str();
}

}  // namespace proxpg
