// Experiment driver: model-based and model-free stochastic LQR solvers.
//
//   slqr_cli solve   <spec.json> [--out DIR]
//   slqr_cli learn   <spec.json> [--seed S] [--out DIR]
//   slqr_cli check   <spec.json> --gain "l_1,...,l_nm"
//   slqr_cli compare <spec.json> [--seed S] [--out DIR]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "slqr/errors.hpp"
#include "slqr/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discounted stochastic LQR: offline policy iteration and model-free Q-learning"};
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string gain_row;

  auto add_common = [&](CLI::App* cmd, bool with_seed) {
    cmd->add_option("spec", spec_path, "Experiment description (JSON)")->required();
    cmd->add_option("--out", out_dir, "Override output_dir");
    if (with_seed) cmd->add_option("--seed", seed, "Override learner.master_seed");
  };
  auto* solve = app.add_subcommand("solve", "Model-based policy iteration");
  add_common(solve, false);
  auto* learn = app.add_subcommand("learn", "Model-free batch least-squares Q-learning");
  add_common(learn, true);
  auto* check = app.add_subcommand("check", "Admissibility and cost report for one gain");
  add_common(check, false);
  check->add_option("--gain", gain_row, "Row-major gain entries, comma separated")->required();
  auto* compare = app.add_subcommand("compare", "Run solve and learn and join their traces");
  add_common(compare, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : slqr::kExitValidation;
  }

  slqr::ExperimentSpec spec;
  slqr::Gain gain;
  try {
    spec = slqr::load_experiment(spec_path);
    if (seed) spec.learner.master_seed = *seed;
    if (!out_dir.empty()) spec.output_dir = out_dir;
    if (check->parsed()) gain = slqr::parse_gain_row(gain_row, spec.model.m(), spec.model.n());
  } catch (const slqr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return slqr::kExitValidation;
  }

  if (solve->parsed()) return slqr::run_solve(spec, std::cout, std::cerr);
  if (learn->parsed()) return slqr::run_learn(spec, std::cout, std::cerr);
  if (check->parsed()) return slqr::run_check(spec, gain, std::cout, std::cerr);
  return slqr::run_compare(spec, std::cout, std::cerr);
}
