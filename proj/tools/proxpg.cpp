#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "proxpg/harness.hpp"

namespace {

template <typename T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target,
                   const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic proximal policy-gradient experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run SPG or PAGE as configured and write traces");
  run->add_option("config", config_path, "TOML experiment config")->required();
  auto* check = app.add_subcommand("check", "Run the diagnostic battery for the environment");
  check->add_option("config", config_path, "TOML experiment config")->required();
  auto* sweep = app.add_subcommand("sweep", "Samples-to-epsilon scaling study");
  sweep->add_option("config", config_path, "TOML experiment config")->required();

  proxpg::ScheduleRequest req;
  std::optional<double> cw;
  auto* sched = app.add_subcommand("schedule", "Print the step size, batch sizes and iterations");
  sched->add_option("--eps", req.eps, "Target tolerance epsilon")->required();
  sched->add_option("--theorem", req.theorem, "2 for SPG, 3 for PAGE")
      ->check(CLI::IsMember({2, 3}));
  sched->add_option("--U", req.constants.reward_bound, "Reward bound");
  sched->add_option("--Cg", req.constants.score_bound, "Score-function bound");
  sched->add_option("--Ch", req.constants.score_hessian_bound, "Score Hessian bound");
  sched->add_option("--Cg-tilde", req.constants.reward_grad_bound, "Reward gradient bound");
  sched->add_option("--Ch-tilde", req.constants.reward_hessian_bound, "Reward Hessian bound");
  optional_flag(sched, "--Cw", cw, "Importance-weight bound");
  optional_flag(sched, "--L", req.L, "Override the smoothness constant");
  optional_flag(sched, "--sigma-sq", req.sigma_sq, "Override the variance bound");
  optional_flag(sched, "--C", req.C, "Override the importance-sampling constant");
  sched->add_option("--delta", req.delta, "Upper bound on F* - F(theta0)");
  optional_flag(sched, "--eta", req.eta, "Step size (defaults per theorem)");
  sched->add_option("--c-n1", req.c_n1, "Constant in N1 = c_N1 / eps^2");
  optional_flag(sched, "--c-t", req.c_t, "Constant in T = c_T / eps^2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return proxpg::cmd_run(config_path, std::cout, std::cerr);
  if (*check) return proxpg::cmd_check(config_path, std::cout, std::cerr);
  if (*sweep) return proxpg::cmd_sweep(config_path, std::cout, std::cerr);
  req.constants.weight_bound = cw;
  return proxpg::cmd_schedule(req, std::cout, std::cerr);
}
