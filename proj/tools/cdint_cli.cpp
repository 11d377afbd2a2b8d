#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdint/cdint.hpp"

// Command-line front end. Every run prints a key-sorted JSON report on
// stdout and a short human summary on stderr; exit codes are 0 on success,
// 1 for validation/admissibility failures, 2 for budget or feasibility
// refusals, 3 for parse errors.

namespace {

using nlohmann::json;

constexpr double kFeasibilityCutoff = 1e9;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cdint::ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[32];
  std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                static_cast<unsigned long long>(cdint::fnv1a64(buf.str())));
  return hex;
}

// "auto" or a number; "auto" resolves to nullopt for the library to fill in.
std::optional<double> auto_or_double(const std::string& text,
                                     const std::string& flag) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw cdint::ValidationError(flag + " expects a number or \"auto\", got \"" +
                               text + "\"");
}

std::optional<int> auto_or_int(const std::string& text,
                               const std::string& flag) {
  if (text.empty() || text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    int value = std::stoi(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw cdint::ValidationError(flag + " expects an integer or \"auto\", got \"" +
                               text + "\"");
}

int resolve_vertex(const cdint::ModelFile& file, const std::string& token) {
  for (std::size_t i = 0; i < file.vertex_names.size(); ++i)
    if (file.vertex_names[i] == token) return static_cast<int>(i);
  try {
    std::size_t used = 0;
    int v = std::stoi(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception&) {
  }
  throw cdint::ValidationError("unknown vertex \"" + token + "\"");
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// --beta "v=m,w=l": comma list of pinnings, vertices by index or name.
cdint::ConstraintSet parse_beta(const std::string& text,
                                const cdint::ModelFile& file) {
  cdint::ConstraintSet beta(file.vertex_count);
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trimmed(item);
    if (item.empty()) continue;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw cdint::ValidationError("--beta entry \"" + item +
                                   "\" is not of the form v=m");
    int v = resolve_vertex(file, trimmed(item.substr(0, eq)));
    std::string level_text = trimmed(item.substr(eq + 1));
    int m = 0;
    try {
      std::size_t used = 0;
      m = std::stoi(level_text, &used);
      if (used != level_text.size()) throw std::invalid_argument(level_text);
    } catch (const std::exception&) {
      throw cdint::ValidationError("--beta level \"" + level_text +
                                   "\" is not an integer");
    }
    if (v < 0 || v >= file.vertex_count)
      throw cdint::ValidationError("--beta vertex " + std::to_string(v) +
                                   " out of range");
    beta.pin(v, m);
  }
  return beta;
}

// Shared --delta semantics: an explicit number wins, an explicit "auto"
// derives the margin from the window even when the file names one, and an
// absent flag defers to the file (falling back to the window).
void apply_delta_flag(const std::string& text,
                      cdint::InstantiateOptions& mopts) {
  mopts.delta = auto_or_double(text, "--delta");
  mopts.delta_auto = !mopts.delta && text == "auto";
}

std::optional<int> try_resolve_levels(const cdint::ModelFile& file,
                                      std::optional<int> override_levels) {
  bool has_table = false;
  for (const auto& spec : file.potentials)
    has_table = has_table || spec.family == cdint::PotentialFamily::table;
  if (override_levels || file.num_levels || has_table)
    return cdint::resolve_num_levels(file, override_levels);
  return std::nullopt;
}

void emit(const json& report, const std::string& summary) {
  std::cout << report.dump(2) << "\n";
  std::cerr << summary;
}

json beta_to_json(const cdint::ConstraintSet& beta) {
  json out = json::object();
  for (int v = 0; v < beta.vertex_count(); ++v)
    if (beta.constrained(v)) out[std::to_string(v)] = beta.level(v);
  return out;
}

// Worst-case calls for a whole run. The recursion deletes one vertex per
// level, so no call tree is deeper than n; predicting at min(depth, n)
// keeps the guard meaningful when the closed form dwarfs what a small graph
// can actually spend.
double predict_calls(const cdint::Model& model, int depth) {
  int n = model.graph().vertex_count();
  return n * cdint::call_count_estimate(model, std::min(depth, n));
}

void ensure_feasible(double predicted_calls, bool force) {
  if (predicted_calls > kFeasibilityCutoff && !force)
    throw cdint::BudgetError(
        "predicted " + std::to_string(predicted_calls) +
            " recursive calls exceed the feasibility cutoff of 1e9; rerun "
            "with --force to proceed anyway",
        predicted_calls);
}

struct CheckArgs {
  std::string input;
  std::optional<int> num_levels;
  std::string delta_text;
};

int cmd_check(const CheckArgs& args) {
  Timer timer;
  cdint::ModelFile file = cdint::load_model_file(args.input);
  std::optional<int> num_levels = try_resolve_levels(file, args.num_levels);
  cdint::Hypergraph graph = cdint::build_graph(file);
  std::vector<cdint::Potential> potentials =
      cdint::build_potentials(file, num_levels);

  std::optional<double> delta_flag =
      auto_or_double(args.delta_text, "--delta");
  double delta;
  if (delta_flag)
    delta = *delta_flag;
  else if (args.delta_text != "auto" && file.delta)
    delta = *file.delta;
  else
    delta = cdint::detail::auto_delta(graph, potentials);

  cdint::AdmissibilityReport admissibility =
      cdint::check_admissibility(graph, potentials, delta);

  double spread = 1.0;
  for (const auto& p : potentials)
    spread = std::max(spread, p.upper_factor());
  json delta_max;
  try {
    delta_max = cdint::max_admissible_delta(
        spread, graph.max_degree(),
        cdint::detail::effective_neighbor_bound(graph));
  } catch (const cdint::ValidationError&) {
    delta_max = nullptr;  // spread exceeds the window even at delta = 0
  }

  bool any_continuous = false;
  for (const auto& p : potentials)
    any_continuous = any_continuous || p.has_continuous_form();
  json gradient_rows = json::array();
  bool gradient_pass = true;
  if (any_continuous) {
    cdint::GradientReport gradient = cdint::check_gradient_bound(potentials);
    gradient_pass = gradient.pass;
    for (const auto& row : gradient.edges) {
      if (!row.applicable) continue;
      gradient_rows.push_back({{"edge", row.edge},
                               {"declared", row.declared},
                               {"observed", row.observed},
                               {"pass", row.pass}});
    }
  }

  json edges = json::array();
  for (const auto& row : admissibility.edges) {
    json entry = {{"edge", row.edge},
                  {"lower", row.lower},
                  {"upper_factor", row.upper_factor},
                  {"margin", row.margin},
                  {"pass", row.pass}};
    if (row.offending_index >= 0)
      entry["offending_index"] = row.offending_index;
    edges.push_back(entry);
  }

  bool pass = admissibility.pass && gradient_pass;
  json report = {{"subcommand", "check"},
                 {"input", args.input},
                 {"input_digest", file_digest(args.input)},
                 {"vertex_count", graph.vertex_count()},
                 {"edge_count", graph.edge_count()},
                 {"max_degree", graph.max_degree()},
                 {"max_neighbor_count", graph.max_neighbor_count()},
                 {"max_edge_size", graph.max_edge_size()},
                 {"delta", delta},
                 {"window", admissibility.window},
                 {"max_admissible_delta", delta_max},
                 {"edges", edges},
                 {"gradient", gradient_rows},
                 {"pass", pass},
                 {"wall_seconds", timer.seconds()}};
  if (num_levels) report["num_levels"] = *num_levels;

  std::ostringstream summary;
  if (graph.edge_count() == 0)
    summary << "warning: trivial product model (no edges)\n";
  summary << "check " << args.input << ": "
          << (pass ? "admissible" : "NOT admissible") << " at delta = "
          << delta << " (window " << admissibility.window << ", Delta "
          << graph.max_degree() << ", eta " << graph.max_neighbor_count()
          << ", R " << graph.max_edge_size() << ")\n";
  for (const auto& row : admissibility.edges)
    if (!row.pass)
      summary << "  edge " << row.edge << ": spread " << row.upper_factor
              << " exceeds window by " << -row.margin << "\n";
  emit(report, summary.str());
  return pass ? 0 : 1;
}

struct OracleArgs {
  std::string input;
  std::optional<int> num_levels;
  std::string beta_text;
  std::uint64_t budget = 100'000'000;
  std::string marginal_text;
  int quadrature = 0;
};

int cmd_oracle(const OracleArgs& args) {
  Timer timer;
  cdint::ModelFile file = cdint::load_model_file(args.input);

  // The quadrature reference integrates the continuous potentials directly,
  // so it works even when nothing fixes a grid; enumeration does not.
  bool quadrature_only =
      args.quadrature > 0 && !try_resolve_levels(file, args.num_levels);

  cdint::InstantiateOptions mopts;
  mopts.num_levels = args.num_levels;
  if (quadrature_only) mopts.num_levels = 1;
  cdint::Model model = cdint::instantiate_model(file, mopts);
  cdint::ConstraintSet beta = parse_beta(args.beta_text, file);
  cdint::OracleOptions oopts;
  oopts.budget = args.budget;

  json report = {{"subcommand", "oracle"},
                 {"input", args.input},
                 {"input_digest", file_digest(args.input)},
                 {"vertex_count", model.graph().vertex_count()},
                 {"budget", args.budget},
                 {"wall_seconds", 0.0}};

  std::ostringstream summary;
  summary << "oracle " << args.input << ":";

  if (!quadrature_only) {
    cdint::ExactResult z = cdint::z_exact(model, beta, oopts);
    int free_count = model.graph().vertex_count() - beta.constrained_count();
    report["N"] = model.num_levels();
    report["delta"] = model.delta();
    report["beta"] = beta_to_json(beta);
    report["log_z"] = z.log_value;
    report["z"] = z.value;
    report["free_vertices"] = free_count;
    report["enumerated"] = std::pow(static_cast<double>(model.num_levels()),
                                    static_cast<double>(free_count));
    summary << " log Z = " << z.log_value << ", Z = " << z.value;
  }
  summary << "\n";

  if (!args.marginal_text.empty()) {
    if (quadrature_only)
      throw cdint::ValidationError(
          "marginals need a level count: pass --N or fix one in the file");
    int v = resolve_vertex(file, args.marginal_text);
    json values = json::array();
    for (int m = 0; m < model.num_levels(); ++m)
      values.push_back(cdint::marginal_exact(model, v, m, beta, oopts));
    report["marginal"] = {{"vertex", v}, {"values", values}};
    summary << "  marginal of vertex " << v << ": " << values.dump() << "\n";
  }
  if (args.quadrature > 0) {
    cdint::QuadratureResult quad =
        cdint::integral_reference(model, args.quadrature, oopts);
    report["quadrature"] = {{"refinement", quad.refinement},
                            {"value", quad.value},
                            {"refined_value", quad.refined_value}};
    summary << "  quadrature at M = " << quad.refinement << ": "
            << quad.value << " (2M: " << quad.refined_value << ")\n";
  }

  report["wall_seconds"] = timer.seconds();
  emit(report, summary.str());
  return 0;
}

struct EstimateZArgs {
  std::string input;
  std::optional<int> num_levels;
  std::string delta_text;
  std::string depth_text = "auto";
  std::string cache_text = "off";
  int threads = 1;
  bool force = false;
};

bool parse_cache(const std::string& text) {
  if (text == "on") return true;
  if (text == "off") return false;
  throw cdint::ValidationError("--cache expects on or off, got \"" + text +
                               "\"");
}

int cmd_estimate_z(const EstimateZArgs& args) {
  Timer timer;
  cdint::ModelFile file = cdint::load_model_file(args.input);
  cdint::InstantiateOptions mopts;
  mopts.num_levels = args.num_levels;
  apply_delta_flag(args.delta_text, mopts);
  cdint::Model model = cdint::instantiate_model(file, mopts);

  std::optional<int> depth_flag = auto_or_int(args.depth_text, "--depth");
  int depth = depth_flag ? *depth_flag : cdint::choose_depth(model);

  double predicted = predict_calls(model, depth);
  ensure_feasible(predicted, args.force);

  cdint::DecayOptions dopts;
  dopts.threads = args.threads;
  dopts.use_cache = parse_cache(args.cache_text);
  cdint::ZEstimate z = cdint::approx_z(model, depth, dopts);

  json report = {{"subcommand", "estimate-z"},
                 {"input", args.input},
                 {"input_digest", file_digest(args.input)},
                 {"vertex_count", model.graph().vertex_count()},
                 {"N", model.num_levels()},
                 {"delta", z.delta},
                 {"depth", z.depth},
                 {"cache", dopts.use_cache},
                 {"threads", dopts.threads},
                 {"log_z", z.log_value},
                 {"z", z.value},
                 {"error_bound_rel", z.rel_error_bound},
                 {"per_step_error", z.per_step_error},
                 {"per_step_lower", z.per_step_lower},
                 {"calls", z.recursive_calls},
                 {"predicted_calls", predicted},
                 {"wall_seconds", timer.seconds()}};

  std::ostringstream summary;
  summary << "estimate-z " << args.input << ": log Z ~ " << z.log_value
          << ", Z ~ " << z.value << " (depth " << z.depth << ", delta "
          << z.delta << ", rel err <= " << z.rel_error_bound << ", "
          << z.recursive_calls << " calls)\n";
  emit(report, summary.str());
  return 0;
}

struct EstimateIntegralArgs {
  std::string input;
  std::string k_text = "auto";
  std::string levels_text = "auto";
  std::string delta_text;
  std::string depth_text = "auto";
  std::string cache_text = "off";
  int threads = 1;
  bool force = false;
};

int cmd_estimate_integral(const EstimateIntegralArgs& args) {
  Timer timer;
  cdint::ModelFile file = cdint::load_model_file(args.input);
  cdint::Hypergraph graph = cdint::build_graph(file);
  std::vector<cdint::Potential> potentials =
      cdint::build_potentials(file, try_resolve_levels(file, std::nullopt));

  cdint::IntegralOptions iopts;
  iopts.k = auto_or_double(args.k_text, "--k");
  iopts.num_levels = auto_or_int(args.levels_text, "--N");
  iopts.depth = auto_or_int(args.depth_text, "--depth");
  iopts.delta = auto_or_double(args.delta_text, "--delta");
  if (!iopts.delta && args.delta_text != "auto" && file.delta)
    iopts.delta = file.delta;  // an explicit "auto" derives from the window
  iopts.decay.threads = args.threads;
  iopts.decay.use_cache = parse_cache(args.cache_text);

  cdint::IntegralPlan plan =
      cdint::plan_integral(graph, std::move(potentials), iopts);
  double predicted = predict_calls(plan.model, plan.depth);
  ensure_feasible(predicted, args.force);

  cdint::IntegralEstimate est = cdint::run_integral(plan, iopts.decay);

  json report = {{"subcommand", "estimate-integral"},
                 {"input", args.input},
                 {"input_digest", file_digest(args.input)},
                 {"vertex_count", graph.vertex_count()},
                 {"N", est.num_levels},
                 {"k", est.k},
                 {"delta", est.z.delta},
                 {"depth", est.z.depth},
                 {"cache", iopts.decay.use_cache},
                 {"threads", iopts.decay.threads},
                 {"log_z", est.z.log_value},
                 {"z", est.z.value},
                 {"error_bound_rel", est.z.rel_error_bound},
                 {"integral", est.value},
                 {"log_integral", est.log_value},
                 {"lower_factor", est.lower_factor},
                 {"upper_factor", est.upper_factor},
                 {"combined_lower", est.combined_lower},
                 {"combined_upper", est.combined_upper},
                 {"combined_rel_bound", est.combined_rel_bound},
                 {"calls", est.z.recursive_calls},
                 {"predicted_calls", predicted},
                 {"wall_seconds", timer.seconds()}};

  std::ostringstream summary;
  summary << "estimate-integral " << args.input << ": V ~ " << est.value
          << " in [" << est.combined_lower << ", " << est.combined_upper
          << "] (N " << est.num_levels << ", k " << est.k << ", depth "
          << est.z.depth << ")\n";
  emit(report, summary.str());
  return 0;
}

struct CompareArgs {
  std::string input;
  std::optional<int> num_levels;
  std::string delta_text;
  std::string depth_text = "auto";
  std::string csv_path;
  std::uint64_t budget = 100'000'000;
  int threads = 1;
  bool force = false;
};

int cmd_compare(const CompareArgs& args) {
  Timer timer;
  cdint::ModelFile file = cdint::load_model_file(args.input);
  cdint::InstantiateOptions mopts;
  mopts.num_levels = args.num_levels;
  apply_delta_flag(args.delta_text, mopts);
  cdint::Model model = cdint::instantiate_model(file, mopts);
  const int n = model.graph().vertex_count();
  const int num_levels = model.num_levels();

  double enumerations = std::pow(static_cast<double>(num_levels),
                                 static_cast<double>(n));
  if (enumerations > static_cast<double>(args.budget))
    throw cdint::BudgetError(
        "exact comparison needs N^n = " + std::to_string(enumerations) +
            " enumerations, over the budget of " +
            std::to_string(args.budget) +
            "; this model is oracle-infeasible, use estimate-z instead",
        enumerations);

  std::optional<int> depth_flag = auto_or_int(args.depth_text, "--depth");
  int max_depth =
      depth_flag ? *depth_flag : std::min(cdint::choose_depth(model), 8);
  ensure_feasible(predict_calls(model, max_depth), args.force);

  cdint::OracleOptions oopts;
  oopts.budget = args.budget;
  cdint::ConstraintSet empty(n);
  cdint::ExactResult z = cdint::z_exact(model, empty, oopts);
  std::vector<std::vector<double>> exact(n);
  for (int v = 0; v < n; ++v)
    for (int m = 0; m < num_levels; ++m)
      exact[v].push_back(cdint::marginal_exact(model, v, m, empty, oopts));

  cdint::DecayOptions dopts;
  dopts.threads = args.threads;

  json rows = json::array();
  std::ostringstream csv;
  csv << "depth,max_marginal_abs_error,marginal_error_bound,z_rel_error,"
         "z_rel_error_bound,recursive_calls\n";
  for (int d = 0; d <= max_depth; ++d) {
    double max_err = 0.0;
    std::uint64_t calls = 0;
    for (int v = 0; v < n; ++v) {
      for (int m = 0; m < num_levels; ++m) {
        cdint::DecayEstimate est =
            cdint::approx_prob(model, v, m, d, empty, dopts);
        max_err = std::max(max_err, std::abs(est.value - exact[v][m]));
        calls += est.recursive_calls;
      }
    }
    double bound = std::pow(1.0 - model.delta(), d);
    json row = {{"depth", d},
                {"max_marginal_abs_error", max_err},
                {"marginal_error_bound", bound},
                {"recursive_calls", calls}};
    csv << d << ',' << max_err << ',' << bound << ',';
    if (d >= 1) {
      cdint::ZEstimate approx = cdint::approx_z(model, d, dopts);
      double rel = std::abs(std::exp(approx.log_value - z.log_value) - 1.0);
      row["z_rel_error"] = rel;
      row["z_rel_error_bound"] = approx.rel_error_bound;
      csv << rel << ',' << approx.rel_error_bound;
    } else {
      csv << ',';
    }
    csv << ',' << calls << "\n";
    rows.push_back(row);
  }

  json report = {{"subcommand", "compare"},
                 {"input", args.input},
                 {"input_digest", file_digest(args.input)},
                 {"vertex_count", n},
                 {"N", num_levels},
                 {"delta", model.delta()},
                 {"max_depth", max_depth},
                 {"log_z_exact", z.log_value},
                 {"rows", rows},
                 {"csv", args.csv_path.empty() ? json(nullptr)
                                               : json(args.csv_path)},
                 {"wall_seconds", timer.seconds()}};

  if (!args.csv_path.empty()) {
    std::ofstream out(args.csv_path);
    if (!out)
      throw cdint::ValidationError("cannot write CSV to " + args.csv_path);
    out << csv.str();
  }

  std::ostringstream summary;
  summary << "compare " << args.input << ": exact log Z = " << z.log_value
          << ", depths 0.." << max_depth << "\n";
  for (const auto& row : rows)
    summary << "  d = " << row["depth"] << ": max marginal err "
            << row["max_marginal_abs_error"].get<double>() << " (bound "
            << row["marginal_error_bound"].get<double>() << ")\n";
  emit(report, summary.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deterministic partition-function and integral estimation for "
      "hypergraph potential models"};
  app.require_subcommand(1);

  CheckArgs check_args;
  OracleArgs oracle_args;
  EstimateZArgs ez_args;
  EstimateIntegralArgs ei_args;
  CompareArgs compare_args;
  int which = 0;

  CLI::App* check = app.add_subcommand(
      "check", "Validate a model file and report admissibility margins");
  check->add_option("model", check_args.input, "model JSON file")->required();
  check->add_option("--N", check_args.num_levels, "level count override");
  check->add_option("--delta", check_args.delta_text,
                    "decay margin, or auto");
  check->callback([&] { which = 1; });

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exact enumeration of Z and marginals on small models");
  oracle->add_option("model", oracle_args.input, "model JSON file")
      ->required();
  oracle->add_option("--N", oracle_args.num_levels, "level count override");
  oracle->add_option("--beta", oracle_args.beta_text,
                     "constraints, e.g. \"0=1,2=0\"");
  oracle->add_option("--budget", oracle_args.budget,
                     "max enumerated assignments");
  oracle->add_option("--marginal", oracle_args.marginal_text,
                     "also report the exact marginal of this vertex");
  oracle->add_option("--quadrature", oracle_args.quadrature,
                     "also report midpoint quadrature at this refinement");
  oracle->callback([&] { which = 2; });

  CLI::App* ez = app.add_subcommand(
      "estimate-z", "Certified partition-function estimate");
  ez->add_option("model", ez_args.input, "model JSON file")->required();
  ez->add_option("--N", ez_args.num_levels, "level count override");
  ez->add_option("--delta", ez_args.delta_text, "decay margin, or auto");
  ez->add_option("--depth", ez_args.depth_text, "recursion depth, or auto");
  ez->add_option("--cache", ez_args.cache_text, "memoization: on or off");
  ez->add_option("--threads", ez_args.threads, "worker count");
  ez->add_flag("--force", ez_args.force, "run past the feasibility guard");
  ez->callback([&] { which = 3; });

  CLI::App* ei = app.add_subcommand(
      "estimate-integral", "Certified estimate of the integral over [0,1]^n");
  ei->add_option("model", ei_args.input, "model JSON file")->required();
  ei->add_option("--k", ei_args.k_text, "smoothness bound, or auto");
  ei->add_option("--N", ei_args.levels_text, "grid resolution, or auto");
  ei->add_option("--delta", ei_args.delta_text, "decay margin, or auto");
  ei->add_option("--depth", ei_args.depth_text, "recursion depth, or auto");
  ei->add_option("--cache", ei_args.cache_text, "memoization: on or off");
  ei->add_option("--threads", ei_args.threads, "worker count");
  ei->add_flag("--force", ei_args.force, "run past the feasibility guard");
  ei->callback([&] { which = 4; });

  CLI::App* compare = app.add_subcommand(
      "compare", "Decay estimates against the oracle, depth by depth");
  compare->add_option("model", compare_args.input, "model JSON file")
      ->required();
  compare->add_option("--N", compare_args.num_levels, "level count override");
  compare->add_option("--delta", compare_args.delta_text,
                      "decay margin, or auto");
  compare->add_option("--depth", compare_args.depth_text,
                      "largest depth to sweep, or auto");
  compare->add_option("--csv", compare_args.csv_path, "write CSV here");
  compare->add_option("--budget", compare_args.budget,
                      "max enumerated assignments for the oracle side");
  compare->add_option("--threads", compare_args.threads, "worker count");
  compare->add_flag("--force", compare_args.force,
                    "run past the feasibility guard");
  compare->callback([&] { which = 5; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 3;
  }

  try {
    switch (which) {
      case 1: return cmd_check(check_args);
      case 2: return cmd_oracle(oracle_args);
      case 3: return cmd_estimate_z(ez_args);
      case 4: return cmd_estimate_integral(ei_args);
      case 5: return cmd_compare(compare_args);
    }
  } catch (const cdint::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const cdint::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const cdint::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
