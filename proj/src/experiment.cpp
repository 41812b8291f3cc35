#include "slqr/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "slqr/errors.hpp"

namespace slqr {

namespace {

using json = nlohmann::json;

constexpr int kReferenceIterations = 200;
constexpr double kReferenceTolerance = 1e-12;

Matrix parse_matrix(const json& node, const std::string& name) {
  if (!node.is_object()) throw ValidationError(name + ": expected an object with rows, cols, data");
  for (const char* key : {"rows", "cols", "data"}) {
    if (!node.contains(key)) throw ValidationError(name + ": missing '" + key + "'");
  }
  if (!node["rows"].is_number_integer() || !node["cols"].is_number_integer()) {
    throw ValidationError(name + ": rows and cols must be integers");
  }
  const auto rows = node["rows"].get<long long>();
  const auto cols = node["cols"].get<long long>();
  if (rows < 1 || cols < 1) throw ValidationError(name + ": rows and cols must be positive");
  const json& data = node["data"];
  if (!data.is_array() || static_cast<long long>(data.size()) != rows) {
    throw ValidationError(name + ": data must hold " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    const json& row = data[i];
    if (!row.is_array() || static_cast<long long>(row.size()) != cols) {
      throw ValidationError(name + ": row " + std::to_string(i) + " must hold " + std::to_string(cols) +
                            " entries");
    }
    for (long long j = 0; j < cols; ++j) {
      if (!row[j].is_number()) throw ValidationError(name + ": entries must be numbers");
      m(i, j) = row[j].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    data.push_back(row);
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

template <typename T>
T get_or(const json& node, const char* key, T fallback) {
  if (!node.contains(key) || node[key].is_null()) return fallback;
  try {
    return node[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("learner.") + key + " has the wrong type");
  }
}

LearnerConfig parse_learner(const json& node, Index n, Index m) {
  if (!node.is_object()) throw ValidationError("learner: expected an object");
  LearnerConfig c;
  if (!node.contains("initial_gain")) throw ValidationError("learner: missing 'initial_gain'");
  c.initial_gain = Gain{parse_matrix(node["initial_gain"], "learner.initial_gain")};
  c.rollout_length = get_or<long long>(node, "rollout_length", c.rollout_length);
  c.num_mean = get_or<int>(node, "num_mean", c.num_mean);
  c.max_iterations = get_or<int>(node, "max_iterations", c.max_iterations);
  c.tolerance = get_or<double>(node, "tolerance", c.tolerance);
  c.probe_std = get_or<double>(node, "probe_std", c.probe_std);
  c.master_seed = get_or<std::uint64_t>(node, "master_seed", c.master_seed);
  c.trace_correction = get_or<bool>(node, "trace_correction", c.trace_correction);
  c.threads = get_or<int>(node, "threads", c.threads);
  c.max_steps = get_or<std::int64_t>(node, "max_steps", c.max_steps);
  const auto next = get_or<std::string>(node, "next_action", "policy");
  if (next == "policy") {
    c.next_action = NextAction::kPolicy;
  } else if (next == "recorded") {
    c.next_action = NextAction::kRecorded;
  } else {
    throw ValidationError("learner.next_action must be 'policy' or 'recorded'");
  }
  c.validate(n, m);
  return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
  if (!f) throw ValidationError("failed writing " + path.string());
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ValidationError("output directory " + dir.string() + " is not writable");
  }
}

std::string gain_columns(Index count, const char* prefix) {
  std::string s;
  for (Index i = 1; i <= count; ++i) s += std::string(",") + prefix + std::to_string(i);
  return s;
}

// Row-major entries of L, each preceded by a comma.
std::string gain_fields(const Gain& gain) {
  std::string s;
  for (Index i = 0; i < gain.L.rows(); ++i) {
    for (Index j = 0; j < gain.L.cols(); ++j) s += "," + format_number(gain.L(i, j));
  }
  return s;
}

// "a, b, ..." for console output.
std::string gain_text(const Gain& gain) { return "[" + gain_fields(gain).substr(1) + "]"; }

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

// Cost of the optimal policy, from tight model-based policy iteration.
std::optional<double> optimal_cost(const ExperimentSpec& spec) {
  try {
    const PiTrace ref = offline_pi(spec.model, spec.cost, spec.learner.initial_gain, kReferenceIterations,
                                   kReferenceTolerance);
    return exact_cost(spec.model, spec.cost, ref.final_gain);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<double> relative_cost_error(const ExperimentSpec& spec, const Gain& gain,
                                          const std::optional<double>& v_star) {
  if (!v_star || *v_star == 0.0) return std::nullopt;
  try {
    return std::abs(exact_cost(spec.model, spec.cost, gain) - *v_star) / *v_star;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<double> gain_error(const ExperimentSpec& spec, const Gain& gain) {
  if (!spec.reference_gain) return std::nullopt;
  return (gain.L - spec.reference_gain->L).norm();
}

struct SolveOutput {
  PiTrace trace;
  std::string csv;
  json summary;
};

SolveOutput solve(const ExperimentSpec& spec) {
  SolveOutput o;
  o.trace = offline_pi(spec.model, spec.cost, spec.learner.initial_gain, spec.learner.max_iterations,
                       spec.learner.tolerance);
  const auto v_star = optimal_cost(spec);
  const Index n = spec.model.n();
  const Index m = spec.model.m();

  std::ostringstream csv;
  csv << "iter" << gain_columns(n * m, "l_") << gain_columns(half_vec_size(n), "p_")
      << ",gain_change,gain_err,cost_rel_err,admissible,cost_bound\n";
  const auto gains = o.trace.gain_sequence();
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const Gain& g = gains[i];
    std::optional<CostKernel> kernel;
    if (i < o.trace.iterations.size()) {
      kernel = o.trace.iterations[i].kernel;
    } else {
      kernel = o.trace.final_kernel;
    }
    const bool admissible = is_admissible(spec.model, g);
    csv << i << gain_fields(g);
    const Vector p = kernel ? vech(kernel->P) : Vector();
    for (Index k = 0; k < half_vec_size(n); ++k) csv << "," << (kernel ? format_number(p(k)) : "");
    csv << "," << (i == 0 ? "" : format_number(o.trace.iterations[i - 1].gain_change));
    csv << "," << optional_field(gain_error(spec, g));
    csv << "," << optional_field(relative_cost_error(spec, g, v_star));
    csv << "," << (admissible ? 1 : 0);
    csv << "," << (kernel ? (cost_bound_holds(spec.cost, g, *kernel) ? "1" : "0") : "");
    csv << "\n";
  }
  o.csv = csv.str();

  json s;
  s["converged"] = o.trace.converged;
  s["iterations"] = o.trace.iterations.size();
  s["final_gain"] = matrix_to_json(o.trace.final_gain.L);
  s["admissible"] = is_admissible(spec.model, o.trace.final_gain);
  if (o.trace.final_kernel) {
    s["final_kernel"] = matrix_to_json(o.trace.final_kernel->P.matrix());
    s["cost"] = exact_cost(spec.model, spec.cost, o.trace.final_gain);
    s["cost_bound"] = cost_bound_holds(spec.cost, o.trace.final_gain, *o.trace.final_kernel) ? "holds"
                                                                                             : "inconclusive";
  }
  o.summary = s;
  return o;
}

struct LearnOutput {
  LearnerResult result;
  std::string csv;
  json summary;
};

LearnOutput learn(const ExperimentSpec& spec) {
  if (!is_admissible(spec.model, spec.learner.initial_gain)) {
    throw AdmissibilityError("initial gain is not admissible for the plant");
  }
  LearnOutput o;
  const ModelSampler sampler(spec.model);
  o.result = model_free_pi(sampler, spec.cost, spec.model.W, spec.learner);
  const auto v_star = optimal_cost(spec);
  const Index nm = spec.model.n() * spec.model.m();
  const std::string seed = std::to_string(spec.learner.master_seed);

  std::ostringstream csv;
  csv << "iter" << gain_columns(nm, "l_") << ",gain_change,gain_err,cost_rel_err,seed\n";
  const auto gains = o.result.trace.gain_sequence();
  for (std::size_t i = 0; i < gains.size(); ++i) {
    csv << i << gain_fields(gains[i]);
    csv << "," << (i == 0 ? "" : format_number(o.result.trace.iterations[i - 1].gain_change));
    csv << "," << optional_field(gain_error(spec, gains[i]));
    csv << "," << optional_field(relative_cost_error(spec, gains[i], v_star));
    csv << "," << seed << "\n";
  }
  o.csv = csv.str();

  const Gain& final_gain = o.result.trace.final_gain;
  json s;
  s["converged"] = o.result.trace.converged;
  s["iterations"] = o.result.trace.iterations.size();
  s["steps_consumed"] = o.result.steps_consumed;
  s["master_seed"] = spec.learner.master_seed;
  s["final_gain"] = matrix_to_json(final_gain.L);
  s["admissible"] = is_admissible(spec.model, final_gain);
  if (const auto rel = relative_cost_error(spec, final_gain, v_star)) {
    s["cost"] = exact_cost(spec.model, spec.cost, final_gain);
    s["optimal_cost"] = *v_star;
    s["cost_rel_err"] = *rel;
  }
  o.summary = s;
  return o;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ExcitationError& e) {
    err << "error: " << e.what() << "\nhint: raise learner.probe_std or learner.rollout_length\n";
    return kExitExcitation;
  } catch (const AdmissibilityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace

ExperimentSpec parse_experiment(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("experiment file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("experiment file must hold a JSON object");
  for (const char* key : {"model", "cost", "learner", "output_dir"}) {
    if (!root.contains(key)) throw ValidationError(std::string("experiment file is missing '") + key + "'");
  }

  ExperimentSpec spec;
  const json& model = root["model"];
  if (!model.is_object()) throw ValidationError("model: expected an object");
  for (const char* key : {"A", "B", "C", "D", "W", "X0"}) {
    if (!model.contains(key)) throw ValidationError(std::string("model: missing '") + key + "'");
  }
  spec.model.A = parse_matrix(model["A"], "model.A");
  spec.model.B = parse_matrix(model["B"], "model.B");
  spec.model.C = parse_matrix(model["C"], "model.C");
  spec.model.D = parse_matrix(model["D"], "model.D");
  spec.model.W = parse_matrix(model["W"], "model.W");
  spec.model.X0 = parse_matrix(model["X0"], "model.X0");
  spec.model.validate();

  const json& cost = root["cost"];
  if (!cost.is_object() || !cost.contains("Q") || !cost.contains("R") || !cost.contains("gamma") ||
      !cost["gamma"].is_number()) {
    throw ValidationError("cost: expected Q, R and a numeric gamma");
  }
  spec.cost.Q = parse_matrix(cost["Q"], "cost.Q");
  spec.cost.R = parse_matrix(cost["R"], "cost.R");
  spec.cost.gamma = cost["gamma"].get<double>();
  spec.cost.validate_against(spec.model);

  spec.learner = parse_learner(root["learner"], spec.model.n(), spec.model.m());

  if (root.contains("reference_gain") && !root["reference_gain"].is_null()) {
    Gain ref{parse_matrix(root["reference_gain"], "reference_gain")};
    check_gain(spec.model, ref);
    spec.reference_gain = std::move(ref);
  }
  if (!root["output_dir"].is_string() || root["output_dir"].get<std::string>().empty()) {
    throw ValidationError("output_dir must be a non-empty string");
  }
  spec.output_dir = root["output_dir"].get<std::string>();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read experiment file " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  return parse_experiment(text.str());
}

Gain parse_gain_row(const std::string& text, Index m, Index n) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string field = text.substr(pos, comma - pos);
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    field = first == std::string::npos ? "" : field.substr(first, last - first + 1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size()) {
      throw ValidationError("gain: cannot parse '" + field + "' as a number");
    }
    values.push_back(v);
    pos = comma + 1;
  }
  if (static_cast<Index>(values.size()) != m * n) {
    throw ValidationError("gain: expected " + std::to_string(m * n) + " entries, got " +
                          std::to_string(values.size()));
  }
  Gain g{Matrix(m, n)};
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) g.L(i, j) = values[static_cast<std::size_t>(i * n + j)];
  }
  return g;
}

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

int run_solve(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    prepare_output_dir(spec.output_dir);
    const SolveOutput o = solve(spec);
    write_text(spec.output_dir / "offline_pi.csv", o.csv);
    write_text(spec.output_dir / "summary.json", o.summary.dump(2) + "\n");
    if (o.trace.final_kernel && !cost_bound_holds(spec.cost, o.trace.final_gain, *o.trace.final_kernel)) {
      err << "warning: cost-bound certificate does not hold for the final gain; admissibility rests on "
             "the spectral test\n";
    }
    out << "solve: " << o.trace.iterations.size() << " iterations, converged="
        << (o.trace.converged ? "true" : "false") << ", L = " << gain_text(o.trace.final_gain) << "\n";
    return static_cast<int>(kExitOk);
  });
}

int run_learn(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    prepare_output_dir(spec.output_dir);
    const LearnOutput o = learn(spec);
    write_text(spec.output_dir / "modelfree.csv", o.csv);
    write_text(spec.output_dir / "learn_summary.json", o.summary.dump(2) + "\n");
    out << "learn: " << o.result.trace.iterations.size() << " iterations, converged="
        << (o.result.trace.converged ? "true" : "false") << ", L = " << gain_text(o.result.trace.final_gain)
        << "\n";
    return static_cast<int>(kExitOk);
  });
}

int run_check(const ExperimentSpec& spec, const Gain& gain, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_gain(spec.model, gain);
    const double rho = spectral_radius(closed_loop_matrix(spec.model, gain));
    const bool admissible = is_admissible(spec.model, gain);
    out << "gain: " << gain_text(gain) << "\n";
    out << "spectral_radius: " << format_number(rho) << "\n";
    out << "admissible: " << (admissible ? "yes" : "no") << "\n";
    std::optional<CostKernel> kernel;
    try {
      kernel = solve_sle(spec.model, spec.cost, gain);
      out << "lyapunov: solved\n";
    } catch (const Error& e) {
      out << "lyapunov: failed (" << e.what() << ")\n";
    }
    if (kernel) {
      const bool bound = cost_bound_holds(spec.cost, gain, *kernel);
      out << "cost_bound: " << (bound ? "holds" : "inconclusive") << "\n";
    } else {
      out << "cost_bound: n/a\n";
    }
    if (admissible) {
      out << "cost: " << format_number(exact_cost(spec.model, spec.cost, gain)) << "\n";
    } else {
      out << "cost: n/a\n";
    }
    const auto gamma = smallest_certified_discount(spec.model, spec.cost, gain);
    char buf[32];
    if (gamma) std::snprintf(buf, sizeof buf, "%.2f", *gamma);
    out << "certified_discount: " << (gamma ? std::string(buf) : std::string("none")) << "\n";
    return static_cast<int>(kExitOk);
  });
}

int run_compare(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    prepare_output_dir(spec.output_dir);
    const SolveOutput s = solve(spec);
    const LearnOutput l = learn(spec);
    write_text(spec.output_dir / "offline_pi.csv", s.csv);
    write_text(spec.output_dir / "summary.json", s.summary.dump(2) + "\n");
    write_text(spec.output_dir / "modelfree.csv", l.csv);
    write_text(spec.output_dir / "learn_summary.json", l.summary.dump(2) + "\n");

    const Index nm = spec.model.n() * spec.model.m();
    const auto a = s.trace.gain_sequence();
    const auto b = l.result.trace.gain_sequence();
    std::ostringstream csv;
    csv << "iter" << gain_columns(nm, "offline_l_") << gain_columns(nm, "modelfree_l_") << ",gain_diff\n";
    const Index blank = nm;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      csv << i;
      if (i < a.size()) {
        csv << gain_fields(a[i]);
      } else {
        for (Index k = 0; k < blank; ++k) csv << ",";
      }
      if (i < b.size()) {
        csv << gain_fields(b[i]);
      } else {
        for (Index k = 0; k < blank; ++k) csv << ",";
      }
      csv << ",";
      if (i < a.size() && i < b.size()) csv << format_number((a[i].L - b[i].L).norm());
      csv << "\n";
    }
    write_text(spec.output_dir / "compare.csv", csv.str());
    out << "compare: offline " << s.trace.iterations.size() << " iterations, model-free "
        << l.result.trace.iterations.size() << " iterations\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace slqr
