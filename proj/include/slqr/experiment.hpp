#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "slqr/learner.hpp"

namespace slqr {

/// Everything one experiment needs: plant, cost, learner settings, an
/// optional reference gain for error curves and the output directory.
struct ExperimentSpec {
  SystemModel model;
  CostSpec cost;
  LearnerConfig learner;
  std::optional<Gain> reference_gain;
  std::filesystem::path output_dir;
};

// Parses the JSON experiment format. Throws ValidationError (or
// DimensionError) on any schema or invariant violation.
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::filesystem::path& path);

// Comma-separated row-major gain entries, e.g. "-0.9319,-1.5784".
Gain parse_gain_row(const std::string& text, Index m, Index n);

// Locale-independent shortest-general formatting with 12 significant digits.
std::string format_number(double value);

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumeric = 3,
  kExitExcitation = 4,
};

// Subcommand drivers. Each writes its files under spec.output_dir, reports
// progress on `out` and problems on `err`, and returns an ExitCode.
//
//   solve:   offline_pi.csv, summary.json
//   learn:   modelfree.csv, learn_summary.json
//   check:   report on `out` only
//   compare: offline_pi.csv, modelfree.csv, compare.csv, summary.json,
//            learn_summary.json
int run_solve(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int run_learn(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int run_check(const ExperimentSpec& spec, const Gain& gain, std::ostream& out, std::ostream& err);
int run_compare(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace slqr
