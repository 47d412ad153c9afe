#pragma once

// Batch front end: validate-weights, analyze and converge.
// Exit codes: 0 success, 1 config error, 2 numerical or structural failure,
// 3 validation failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergo/config.hpp"
#include "ergo/ergodic.hpp"
#include "ergo/fixed_points.hpp"
#include "ergo/random.hpp"
#include "ergo/superop.hpp"
#include "ergo/weights.hpp"

namespace ergo::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNumericalFailure = 2,
  kValidationFailure = 3,
};

// Sub-seed streams derived from the run seed.
enum SeedStream : std::uint64_t {
  kMarkovStream = 1,
  kInputStream = 2,
  kConditionalStream = 3,
};

inline const char* yes_no(bool b) { return b ? "yes" : "no"; }

/// Writes to `path.tmp` and renames over `path`.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ParseError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

inline std::string csv_header() { return "n,p_n,S_n,P_n,err,bound,ok\n"; }

inline std::string csv_row(const ConvergenceRow& r) {
  std::string s = std::to_string(r.n);
  for (double v : {r.p_n, r.s_n, r.big_p_n, r.err, r.bound}) {
    s += ',';
    s += format_double(v);
  }
  s += r.ok ? ",true\n" : ",false\n";
  return s;
}

inline std::string to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string s = csv_header();
  for (const auto& r : rows) s += csv_row(r);
  return s;
}

namespace detail {

inline void print_trace(std::ostream& os, const std::vector<double>& trace) {
  os << "    trace:";
  for (std::size_t n = 1; n <= trace.size(); n *= 2) os << " n=" << n << ":" << format_double(trace[n - 1]);
  if (!trace.empty()) os << " n=" << trace.size() << ":" << format_double(trace.back());
  os << '\n';
}

}  // namespace detail

inline int cmd_validate_weights(const config::ExperimentConfig& cfg, std::ostream& report) {
  const WeightSequence w = config::build_weights(cfg.weights);
  const std::size_t horizon = cfg.run.n_max;
  const double tol = cfg.run.limit_tolerance;
  if (horizon < 10) throw InvalidArgument("validate-weights needs run.n_max >= 10");

  const LimitCheck reg = check_regularity(w, horizon, tol);
  const CesaroCheck ces = check_cesaro_domination(w, horizon);
  const LimitCheck pc = check_p_condition(w, horizon, tol);

  report << "weights: " << to_string(w.family());
  if (w.family() == WeightFamily::power) report << " alpha=" << format_double(w.parameter());
  if (w.family() == WeightFamily::constant) report << " value=" << format_double(w.parameter());
  if (w.family() == WeightFamily::explicit_list) report << " entries=" << w.values().size();
  report << "  horizon N=" << horizon << "  limit tolerance=" << format_double(tol) << '\n';
  if (reg.extrapolated || pc.extrapolated)
    report << "warning: explicit weights shorter than the horizon; last entry repeated\n";
  report << "regularity (p_n/S_n -> 0): " << to_string(reg.verdict) << '\n';
  detail::print_trace(report, reg.trace);
  report << "cesaro domination (p_{n+1} <= p_n, n p_n/S_n <= C): " << to_string(ces.verdict)
         << "  C=" << format_double(ces.witness_c);
  if (ces.first_increase) report << "  first increase at n=" << ces.first_increase;
  report << '\n';
  report << "P-condition (P(n) -> 0): " << to_string(pc.verdict) << '\n';
  detail::print_trace(report, pc.trace);

  const bool any_fail = reg.verdict == Verdict::fail || ces.verdict == Verdict::fail ||
                        pc.verdict == Verdict::fail;
  return any_fail ? kValidationFailure : kOk;
}

inline int cmd_analyze(const config::ExperimentConfig& cfg, std::ostream& report) {
  const SuperOperator s = config::build_operator(cfg);
  const double tol = cfg.run.tolerance;
  const std::uint64_t seed = cfg.run.seed;
  const Index d = s.dim();

  const ErgodicityReport er =
      unique_ergodicity_check(s, tol, derive_seed(seed, kMarkovStream), cfg.run.samples);
  report << "operator: " << cfg.op.kind << "  d=" << d << '\n';
  report << "markov: unital " << yes_no(er.markov.unital) << " (residual "
         << format_double(er.markov.unital_residual) << "), positivity violations "
         << er.markov.positivity_violations << "/" << er.markov.positivity_samples
         << " (worst eigenvalue " << format_double(er.markov.worst_negative_eigenvalue) << ")\n";
  if (er.markov_warning())
    report << "warning: not a Markov operator; results describe the raw linear map\n";
  report << "dim A^T: " << er.dim_fixed << '\n';
  report << "rank(I - T): " << er.rank_range << "  intersection dim: " << er.intersection_dim << '\n';
  const SubalgebraCheck sub = is_subalgebra(*er.fixed, tol);
  report << "fixed space is a subalgebra: " << yes_no(sub.closed) << '\n';
  report << "uniquely ergodic relative to A^T: " << yes_no(er.uniquely_ergodic_relative) << '\n';
  report << "ergodic: " << yes_no(er.ergodic) << '\n';
  report << "T completely positive: " << yes_no(is_completely_positive(s, tol)) << '\n';

  if (cfg.op.kind == "entangled_psi" || cfg.op.kind == "entangled_p") {
    const StochasticMatrix pi = config::build_stochastic(cfg.op);
    const VectorFixedSpace fix = fix_stochastic(pi, tol);
    const LemmaCheck lemma = verify_lemma_fixed(pi, 1e-8, tol);
    report << "schur identity preserving: " << yes_no(is_schur_identity_preserving(s, tol))
           << "  entangled: " << yes_no(is_entangled(s, tol)) << '\n';
    report << "dim Fix(Pi): " << fix.size() << '\n';
    report << "fixed space of Psi vs diagonal Fix(Pi): distance " << format_double(lemma.distance)
           << " (" << (lemma.holds ? "match" : "mismatch") << ")\n";
  }

  int code = kOk;
  if (er.projection) {
    const SuperOperator& e = *er.projection;
    report << "E_T completely positive: " << yes_no(is_completely_positive(e, tol)) << '\n';
    const auto ce = is_conditional_expectation(e, *er.fixed, cfg.run.samples,
                                               derive_seed(seed, kConditionalStream), tol);
    report << "E_T conditional expectation: " << yes_no(ce.is_conditional_expectation);
    if (!ce.subalgebra.closed) report << " (fixed space not a subalgebra)";
    else if (ce.witness) report << " (bimodule defect " << format_double(ce.witness->defect) << ")";
    report << '\n';
  } else {
    report << "E_T: undefined (fixed space and range of I - T are not a direct sum)\n";
    code = kNumericalFailure;
  }
  if (cfg.run.require_markov && !er.markov.is_markov()) code = kNumericalFailure;
  return code;
}

inline int cmd_converge(const config::ExperimentConfig& cfg, std::ostream& report,
                        std::ostream* csv_sink = nullptr) {
  const SuperOperator s = config::build_operator(cfg);
  const WeightSequence w = config::build_weights(cfg.weights);
  const double tol = cfg.run.tolerance;
  const std::uint64_t seed = cfg.run.seed;
  const CMatrix x = config::build_input(cfg.input, s.dim(), derive_seed(seed, kInputStream));
  const auto cps = config::checkpoints(cfg.run);

  const ErgodicityReport er =
      unique_ergodicity_check(s, tol, derive_seed(seed, kMarkovStream), cfg.run.samples);
  if (er.markov_warning())
    report << "warning: not a Markov operator; the estimate is not backed by theory\n";
  if (cfg.run.require_markov && !er.markov.is_markov()) {
    report << "error: operator failed the Markov check\n";
    return kNumericalFailure;
  }
  if (!er.projection) {
    report << "error: fixed space and range of I - T are not a direct sum (intersection dim "
           << er.intersection_dim << "); E_T is undefined\n";
    return kNumericalFailure;
  }

  const auto rows = verify_estimate(s, *er.projection, x, w, cps, tol);
  const std::string csv = to_csv(rows);
  if (!cfg.output.csv_path.empty())
    write_atomically(cfg.output.csv_path, csv);
  else if (csv_sink)
    *csv_sink << csv;

  double worst_ratio = 0.0;
  std::optional<std::size_t> first_small;
  bool all_ok = true;
  for (const auto& r : rows) {
    if (r.bound > 0.0) worst_ratio = std::max(worst_ratio, r.err / r.bound);
    if (!first_small && r.err <= 1e-6) first_small = r.n;
    all_ok = all_ok && r.ok;
  }
  report << "converge: " << rows.size() << " checkpoints up to n=" << (rows.empty() ? 0 : rows.back().n)
         << ", weights " << to_string(w.family()) << '\n';
  report << "max err/bound: " << format_double(worst_ratio) << '\n';
  report << "first checkpoint with err <= 1e-6: ";
  if (first_small) report << *first_small << '\n';
  else report << "none\n";
  report << "all rows within the estimate: " << yes_no(all_ok) << '\n';
  return all_ok ? kOk : kValidationFailure;
}

/// Full command-line entry point; never throws.
inline int run(int argc, char** argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Riesz-mean ergodicity analysis of Markov operators on matrix algebras"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_option("--tolerance", tolerance, "override run.tolerance");
    sub->add_flag("--quiet", quiet, "suppress the report");
  };
  auto* validate = app.add_subcommand("validate-weights", "check the summability conditions on the weights");
  auto* analyze = app.add_subcommand("analyze", "fixed space, ergodicity and positivity analysis");
  auto* converge = app.add_subcommand("converge", "Riesz-mean convergence table against the estimate");
  for (auto* sub : {validate, analyze, converge}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  config::ExperimentConfig cfg;
  try {
    cfg = config::load(config_path);
    if (seed) cfg.run.seed = *seed;
    if (tolerance) {
      if (!(*tolerance > 0.0)) throw ParseError("--tolerance must be > 0");
      cfg.run.tolerance = *tolerance;
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  std::ostringstream report;
  std::ostringstream csv;
  int code = kOk;
  try {
    if (validate->parsed()) code = cmd_validate_weights(cfg, report);
    else if (analyze->parsed()) code = cmd_analyze(cfg, report);
    else code = cmd_converge(cfg, report, &csv);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    // Malformed operator, weight or matrix files surface here.
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumericalFailure;
  }

  try {
    if (!cfg.output.report_path.empty()) write_atomically(cfg.output.report_path, report.str());
  } catch (const std::exception& e) {
    err << "cannot write report: " << e.what() << '\n';
    return kConfigError;
  }
  if (!quiet) out << report.str();
  out << csv.str();
  return code;
}

}  // namespace ergo::cli
