#include "proxpg/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "proxpg/error.hpp"

namespace proxpg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<Outcome> arm_outcomes(std::size_t k) {
  std::vector<Outcome> arms;
  arms.reserve(k);
  for (std::size_t a = 0; a < k; ++a) arms.push_back(Outcome{{static_cast<int>(a)}});
  return arms;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_rewards(const std::vector<double>& rewards) {
  if (rewards.empty()) throw Error(Errc::InvalidArgument, "bandit needs at least one arm");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error(Errc::InvalidArgument, "bandit reward is not finite");
  }
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp().matrix();
  return p / p.sum();
}

int sample_categorical(const Eigen::Ref<const Vector>& probs, RandomStream& rng) {
  const double u = rng.uniform() * probs.sum();
  double cumulative = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = static_cast<int>(i);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

// ----------------------------------------------------------- SoftmaxBandit

SoftmaxBandit::SoftmaxBandit(std::vector<double> rewards, std::optional<double> box_radius)
    : rewards_(std::move(rewards)), box_radius_(box_radius) {
  require_rewards(rewards_);
  if (box_radius_ && !(*box_radius_ > 0.0 && std::isfinite(*box_radius_))) {
    throw Error(Errc::InvalidArgument, "box radius must be positive and finite");
  }
  arms_ = arm_outcomes(rewards_.size());
}

int SoftmaxBandit::arm(const Outcome& x) const {
  if (x.codes.size() != 1 || x.codes[0] < 0 ||
      x.codes[0] >= static_cast<int>(rewards_.size())) {
    throw Error(Errc::InvalidArgument, "outcome is not an arm of this bandit");
  }
  return x.codes[0];
}

Outcome SoftmaxBandit::sample(const Vector& theta, RandomStream& rng) const {
  return Outcome{{sample_categorical(softmax(theta), rng)}};
}

double SoftmaxBandit::log_prob(const Vector& theta, const Outcome& x) const {
  return theta[arm(x)] - log_sum_exp(theta);
}

Vector SoftmaxBandit::grad_log_prob(const Vector& theta, const Outcome& x) const {
  Vector g = -softmax(theta);
  g[arm(x)] += 1.0;
  return g;
}

double SoftmaxBandit::reward(const Vector&, const Outcome& x) const {
  return rewards_[static_cast<std::size_t>(arm(x))];
}

Vector SoftmaxBandit::grad_reward(const Vector& theta, const Outcome&) const {
  return Vector::Zero(theta.size());
}

void SoftmaxBandit::score_gradient(const Vector& theta, const Outcome& x,
                                   Eigen::Ref<Vector> out) const {
  const int a = arm(x);
  const double r = rewards_[static_cast<std::size_t>(a)];
  out = -r * softmax(theta);
  out[a] += r;
}

TheoryConstants SoftmaxBandit::constants() const {
  TheoryConstants c;
  c.reward_bound = max_abs(rewards_);
  c.score_bound = std::sqrt(2.0);
  c.score_hessian_bound = 2.0;
  if (box_radius_) c.weight_bound = std::sqrt(std::expm1(4.0 * *box_radius_));
  return c;
}

Vector SoftmaxBandit::random_point(RandomStream& rng) const {
  if (!box_radius_) return Environment::random_point(rng);
  const double b = *box_radius_;
  Vector theta(dim());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = -b + 2.0 * b * rng.uniform();
  return theta;
}

bool SoftmaxBandit::in_domain(const Vector& theta) const {
  if (!Environment::in_domain(theta)) return false;
  return !box_radius_ || theta.lpNorm<Eigen::Infinity>() <= *box_radius_;
}

// ------------------------------------------------------- ThetaRewardBandit

ThetaRewardBandit::ThetaRewardBandit(std::vector<double> rewards, double alpha,
                                     std::vector<Vector> directions,
                                     std::optional<double> box_radius)
    : SoftmaxBandit(std::move(rewards), box_radius),
      alpha_(alpha),
      directions_(std::move(directions)) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(Errc::InvalidArgument, "reward modulation alpha must lie in [0, 1)");
  }
  if (directions_.size() != rewards_.size()) {
    throw Error(Errc::InvalidArgument, "need one direction vector per arm");
  }
  for (const Vector& v : directions_) {
    if (v.size() != dim() || !all_finite(v)) {
      throw Error(Errc::InvalidArgument, "direction vectors must be finite with size K");
    }
  }
}

ThetaRewardBandit ThetaRewardBandit::with_random_directions(
    std::vector<double> rewards, double alpha, std::uint64_t seed,
    std::optional<double> box_radius) {
  RandomStream rng = StreamFactory(seed).child("directions").stream();
  const auto k = static_cast<Eigen::Index>(rewards.size());
  std::vector<Vector> dirs;
  for (Eigen::Index a = 0; a < k; ++a) {
    Vector v(k);
    for (Eigen::Index i = 0; i < k; ++i) v[i] = -1.0 + 2.0 * rng.uniform();
    dirs.push_back(std::move(v));
  }
  return ThetaRewardBandit(std::move(rewards), alpha, std::move(dirs), box_radius);
}

double ThetaRewardBandit::reward(const Vector& theta, const Outcome& x) const {
  const int a = arm(x);
  const double phase = directions_[static_cast<std::size_t>(a)].dot(theta);
  return rewards_[static_cast<std::size_t>(a)] * (1.0 + alpha_ * std::sin(phase)) / 2.0;
}

Vector ThetaRewardBandit::grad_reward(const Vector& theta, const Outcome& x) const {
  const int a = arm(x);
  const Vector& v = directions_[static_cast<std::size_t>(a)];
  return (rewards_[static_cast<std::size_t>(a)] * alpha_ * std::cos(v.dot(theta)) / 2.0) * v;
}

void ThetaRewardBandit::score_gradient(const Vector& theta, const Outcome& x,
                                       Eigen::Ref<Vector> out) const {
  Environment::score_gradient(theta, x, out);
}

TheoryConstants ThetaRewardBandit::constants() const {
  TheoryConstants c = SoftmaxBandit::constants();
  double max_norm = 0.0;
  for (const Vector& v : directions_) max_norm = std::max(max_norm, v.norm());
  const double scale = 0.5 * alpha_ * max_abs(rewards_);
  c.reward_grad_bound = scale * max_norm;
  c.reward_hessian_bound = scale * max_norm * max_norm;
  return c;
}

// ------------------------------------------------------------ DirectBandit

DirectBandit::DirectBandit(std::vector<double> rewards, double floor)
    : rewards_(std::move(rewards)), floor_(floor) {
  require_rewards(rewards_);
  if (!(floor > 0.0) || floor * static_cast<double>(rewards_.size()) > 1.0) {
    throw Error(Errc::InfeasibleConstruction,
                "direct parameterization needs 0 < floor <= 1/K");
  }
  arms_ = arm_outcomes(rewards_.size());
}

Outcome DirectBandit::sample(const Vector& theta, RandomStream& rng) const {
  return Outcome{{sample_categorical(theta.cwiseMax(0.0), rng)}};
}

double DirectBandit::log_prob(const Vector& theta, const Outcome& x) const {
  const double p = theta[x.codes.at(0)];
  return p > 0.0 ? std::log(p) : kNegInf;
}

Vector DirectBandit::grad_log_prob(const Vector& theta, const Outcome& x) const {
  const int a = x.codes.at(0);
  Vector g = Vector::Zero(theta.size());
  g[a] = 1.0 / theta[a];
  return g;
}

double DirectBandit::reward(const Vector&, const Outcome& x) const {
  return rewards_.at(static_cast<std::size_t>(x.codes.at(0)));
}

Vector DirectBandit::grad_reward(const Vector& theta, const Outcome&) const {
  return Vector::Zero(theta.size());
}

TheoryConstants DirectBandit::constants() const {
  TheoryConstants c;
  c.reward_bound = max_abs(rewards_);
  c.score_bound = 1.0 / floor_;
  c.score_hessian_bound = 1.0 / (floor_ * floor_);
  c.weight_bound = std::sqrt(1.0 / floor_ - 1.0);
  return c;
}

Vector DirectBandit::random_point(RandomStream& rng) const {
  // Uniform on the simplex via normalized exponentials, then shifted onto
  // the floored simplex.
  Vector e(dim());
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = -std::log1p(-rng.uniform());
  e /= e.sum();
  const double radius = 1.0 - floor_ * static_cast<double>(dim());
  return (floor_ + radius * e.array()).matrix();
}

bool DirectBandit::in_domain(const Vector& theta) const {
  if (!Environment::in_domain(theta)) return false;
  return theta.minCoeff() >= floor_ * (1.0 - 1e-12) && std::abs(theta.sum() - 1.0) <= 1e-9;
}

// ------------------------------------------------------------ PointMassEnv

PointMassEnv::PointMassEnv(Vector center, double amplitude, double width)
    : center_(std::move(center)), amplitude_(amplitude), width_(width) {
  if (center_.size() == 0 || !all_finite(center_)) {
    throw Error(Errc::InvalidArgument, "point mass center must be finite and nonempty");
  }
  if (!(amplitude >= 0.0) || !(width > 0.0)) {
    throw Error(Errc::InvalidArgument, "point mass needs amplitude >= 0 and width > 0");
  }
  single_.push_back(Outcome{{0}});
}

Outcome PointMassEnv::sample(const Vector&, RandomStream&) const { return single_[0]; }

double PointMassEnv::log_prob(const Vector&, const Outcome& x) const {
  return x.codes == single_[0].codes ? 0.0 : kNegInf;
}

Vector PointMassEnv::grad_log_prob(const Vector& theta, const Outcome&) const {
  return Vector::Zero(theta.size());
}

double PointMassEnv::reward(const Vector& theta, const Outcome&) const {
  return amplitude_ * std::exp(-(theta - center_).squaredNorm() / (2.0 * width_ * width_));
}

Vector PointMassEnv::grad_reward(const Vector& theta, const Outcome& x) const {
  return (-reward(theta, x) / (width_ * width_)) * (theta - center_);
}

TheoryConstants PointMassEnv::constants() const {
  TheoryConstants c;
  c.reward_bound = amplitude_;
  // max_r (r / s^2) exp(-r^2 / 2s^2) is attained at r = s.
  c.reward_grad_bound = amplitude_ * std::exp(-0.5) / width_;
  c.reward_hessian_bound = amplitude_ / (width_ * width_);
  c.weight_bound = 0.0;
  return c;
}

// -------------------------------------------------------------- TabularMdp

TabularMdp::TabularMdp(Spec spec) : spec_(std::move(spec)) {
  const auto s = static_cast<std::size_t>(spec_.states);
  const auto a = static_cast<std::size_t>(spec_.actions);
  if (spec_.states <= 0 || spec_.actions <= 0) {
    throw Error(Errc::InvalidArgument, "MDP needs at least one state and one action");
  }
  if (spec_.horizon <= 0) throw Error(Errc::InvalidArgument, "MDP horizon must be positive");
  if (!(spec_.gamma >= 0.0 && spec_.gamma < 1.0)) {
    throw Error(Errc::InvalidArgument, "discount must lie in [0, 1)");
  }
  auto check_distribution = [](const std::vector<double>& p, std::size_t n,
                               const char* what) {
    if (p.size() != n) throw Error(Errc::InvalidArgument, std::string(what) + " has wrong size");
    double total = 0.0;
    for (double x : p) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(Errc::InvalidArgument, std::string(what) + " has a negative entry");
      }
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(Errc::InvalidArgument, std::string(what) + " does not sum to 1");
    }
  };
  check_distribution(spec_.initial, s, "initial distribution");
  if (spec_.transitions.size() != s || spec_.rewards.size() != s) {
    throw Error(Errc::InvalidArgument, "transition/reward tables need one row per state");
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (spec_.transitions[i].size() != a || spec_.rewards[i].size() != a) {
      throw Error(Errc::InvalidArgument, "transition/reward tables need one entry per action");
    }
    for (std::size_t j = 0; j < a; ++j) {
      check_distribution(spec_.transitions[i][j], s, "transition row");
      const double r = spec_.rewards[i][j];
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw Error(Errc::InvalidArgument, "MDP rewards must be finite and nonnegative");
      }
    }
  }
  if (enumerable()) build_outcomes();
}

TabularMdp TabularMdp::random(int states, int actions, int horizon, double gamma,
                              std::uint64_t seed, double enumeration_cap) {
  const StreamFactory root(seed);
  RandomStream rng = root.child("mdp").stream();
  auto dirichlet = [&rng](int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& x : p) {
      x = -std::log1p(-rng.uniform());
      total += x;
    }
    for (double& x : p) x /= total;
    return p;
  };
  Spec spec;
  spec.states = states;
  spec.actions = actions;
  spec.gamma = gamma;
  spec.horizon = horizon;
  spec.enumeration_cap = enumeration_cap;
  spec.initial = dirichlet(states);
  spec.transitions.resize(static_cast<std::size_t>(states));
  spec.rewards.resize(static_cast<std::size_t>(states));
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      spec.transitions[static_cast<std::size_t>(s)].push_back(dirichlet(states));
      spec.rewards[static_cast<std::size_t>(s)].push_back(rng.uniform());
    }
  }
  return TabularMdp(std::move(spec));
}

Vector TabularMdp::policy(const Vector& theta, int state) const {
  return softmax(theta.segment(static_cast<Eigen::Index>(state) * spec_.actions, spec_.actions));
}

double TabularMdp::log_policy(const Vector& theta, int state, int action) const {
  const auto block = theta.segment(static_cast<Eigen::Index>(state) * spec_.actions,
                                   spec_.actions);
  return block[action] - log_sum_exp(block);
}

Outcome TabularMdp::sample(const Vector& theta, RandomStream& rng) const {
  Outcome tau;
  tau.codes.reserve(static_cast<std::size_t>(2 * spec_.horizon + 1));
  const Eigen::Map<const Vector> initial(spec_.initial.data(),
                                         static_cast<Eigen::Index>(spec_.initial.size()));
  int s = sample_categorical(initial, rng);
  for (int t = 0; t < spec_.horizon; ++t) {
    const int a = sample_categorical(policy(theta, s), rng);
    tau.codes.push_back(s);
    tau.codes.push_back(a);
    const auto& row = spec_.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    s = sample_categorical(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())),
                           rng);
  }
  tau.codes.push_back(s);
  return tau;
}

double TabularMdp::log_prob(const Vector& theta, const Outcome& x) const {
  const auto& c = x.codes;
  double lp = std::log(spec_.initial[static_cast<std::size_t>(c[0])]);
  for (int t = 0; t < spec_.horizon; ++t) {
    const int s = c[static_cast<std::size_t>(2 * t)];
    const int a = c[static_cast<std::size_t>(2 * t + 1)];
    const int next = c[static_cast<std::size_t>(2 * t + 2)];
    lp += log_policy(theta, s, a);
    lp += std::log(spec_.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                                    [static_cast<std::size_t>(next)]);
  }
  return lp;
}

Vector TabularMdp::grad_log_prob(const Vector& theta, const Outcome& x) const {
  Vector g = Vector::Zero(dim());
  for (int t = 0; t < spec_.horizon; ++t) {
    const int s = x.codes[static_cast<std::size_t>(2 * t)];
    const int a = x.codes[static_cast<std::size_t>(2 * t + 1)];
    const Eigen::Index base = static_cast<Eigen::Index>(s) * spec_.actions;
    g.segment(base, spec_.actions) -= policy(theta, s);
    g[base + a] += 1.0;
  }
  return g;
}

double TabularMdp::reward(const Vector&, const Outcome& x) const {
  double total = 0.0;
  double discount = 1.0;
  for (int t = 0; t < spec_.horizon; ++t) {
    const int s = x.codes[static_cast<std::size_t>(2 * t)];
    const int a = x.codes[static_cast<std::size_t>(2 * t + 1)];
    total += discount * spec_.rewards[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
    discount *= spec_.gamma;
  }
  return total;
}

Vector TabularMdp::grad_reward(const Vector&, const Outcome&) const {
  return Vector::Zero(dim());
}

void TabularMdp::score_gradient(const Vector& theta, const Outcome& x,
                                Eigen::Ref<Vector> out) const {
  out.setZero();
  Vector cumulative_score = Vector::Zero(dim());
  double discount = 1.0;
  for (int t = 0; t < spec_.horizon; ++t) {
    const int s = x.codes[static_cast<std::size_t>(2 * t)];
    const int a = x.codes[static_cast<std::size_t>(2 * t + 1)];
    const Eigen::Index base = static_cast<Eigen::Index>(s) * spec_.actions;
    cumulative_score.segment(base, spec_.actions) -= policy(theta, s);
    cumulative_score[base + a] += 1.0;
    out += (discount * spec_.rewards[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) *
           cumulative_score;
    discount *= spec_.gamma;
  }
}

double TabularMdp::importance_weight(const Vector& theta, const Vector& theta_prime,
                                     const Outcome& x) const {
  double log_ratio = 0.0;
  for (int t = 0; t < spec_.horizon; ++t) {
    const int s = x.codes[static_cast<std::size_t>(2 * t)];
    const int a = x.codes[static_cast<std::size_t>(2 * t + 1)];
    log_ratio += log_policy(theta, s, a) - log_policy(theta_prime, s, a);
  }
  return std::exp(log_ratio);
}

double TabularMdp::trajectory_space_size() const {
  return std::pow(static_cast<double>(spec_.states), spec_.horizon + 1) *
         std::pow(static_cast<double>(spec_.actions), spec_.horizon);
}

bool TabularMdp::enumerable() const {
  return trajectory_space_size() <= spec_.enumeration_cap;
}

void TabularMdp::build_outcomes() {
  // Depth-first over (s0, a0, s1, ...), pruning prefixes with zero
  // theta-independent probability.
  std::vector<int> codes;
  auto recurse = [&](auto&& self, int t) -> void {
    if (t == spec_.horizon) {
      outcomes_.push_back(Outcome{codes});
      return;
    }
    const int s = codes.back();
    for (int a = 0; a < spec_.actions; ++a) {
      const auto& row = spec_.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      for (int next = 0; next < spec_.states; ++next) {
        if (row[static_cast<std::size_t>(next)] <= 0.0) continue;
        codes.push_back(a);
        codes.push_back(next);
        self(self, t + 1);
        codes.pop_back();
        codes.pop_back();
      }
    }
  };
  for (int s0 = 0; s0 < spec_.states; ++s0) {
    if (spec_.initial[static_cast<std::size_t>(s0)] <= 0.0) continue;
    codes.assign(1, s0);
    recurse(recurse, 0);
  }
}

std::span<const Outcome> TabularMdp::outcomes() const {
  if (!enumerable()) {
    throw Error(Errc::NotEnumerable, "trajectory space exceeds the enumeration cap");
  }
  return outcomes_;
}

TheoryConstants TabularMdp::constants() const {
  double max_reward = 0.0;
  for (const auto& row : spec_.rewards) {
    for (double r : row) max_reward = std::max(max_reward, r);
  }
  double discount_sum = 0.0;
  double discount = 1.0;
  for (int t = 0; t < spec_.horizon; ++t) {
    discount_sum += discount;
    discount *= spec_.gamma;
  }
  TheoryConstants c;
  c.reward_bound = max_reward * discount_sum;
  c.score_bound = spec_.horizon * std::sqrt(2.0);
  c.score_hessian_bound = 2.0 * spec_.horizon;
  return c;
}

}  // namespace proxpg
