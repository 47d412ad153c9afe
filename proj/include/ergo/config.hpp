#pragma once

// Experiment configuration (JSON). Unknown keys are rejected. Relative paths
// resolve against the directory of the config file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergo/error.hpp"
#include "ergo/matrix.hpp"
#include "ergo/random.hpp"
#include "ergo/superop.hpp"
#include "ergo/weights.hpp"

namespace ergo::config {

using nlohmann::json;

struct OperatorConfig {
  std::string kind;  // transpose | identity | entangled_psi | entangled_p | file
  Index dim = 0;
  std::optional<RMatrix> stochastic;  // inline rows
  std::string stochastic_path;
  std::string path;
};

struct WeightsConfig {
  std::string kind = "constant";  // constant | power | harmonic | file
  double alpha = 1.0;
  double value = 1.0;
  std::string path;
};

struct RunConfig {
  std::size_t n_max = 1000;
  bool log_checkpoints = true;
  std::vector<std::size_t> checkpoints;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  int samples = 200;
  double limit_tolerance = 1e-2;  // threshold for the weight limit checks
  bool require_markov = false;
};

struct InputConfig {
  std::string kind = "random";  // random | file | matrix_unit
  std::string path;
  Index i = 1;  // 1-based
  Index j = 1;
};

struct OutputConfig {
  std::string csv_path;
  std::string report_path;
};

struct ExperimentConfig {
  OperatorConfig op;
  WeightsConfig weights;
  RunConfig run;
  InputConfig input;
  OutputConfig output;
  bool has_operator = false;
};

namespace detail {

inline void only_keys(const json& j, const char* where,
                      std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ParseError(std::string(where) + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, const char* where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(where) + "." + key + ": " + e.what());
  }
}

inline std::string resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return p;
  const std::filesystem::path fp(p);
  return fp.is_absolute() ? p : (base / fp).string();
}

inline RMatrix rows_to_matrix(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw ParseError("operator.stochastic: expected a nonempty array of rows");
  const auto d = static_cast<Index>(rows.size());
  RMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    const json& r = rows[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Index>(r.size()) != d)
      throw ParseError("operator.stochastic: row " + std::to_string(i + 1) + " must have " +
                       std::to_string(d) + " entries");
    for (Index k = 0; k < d; ++k) {
      const json& v = r[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ParseError("operator.stochastic: non-numeric entry");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline ExperimentConfig parse(const json& root, const std::filesystem::path& base_dir) {
  using detail::get;
  detail::only_keys(root, "config", {"operator", "weights", "run", "input_x", "output"});
  ExperimentConfig cfg;

  if (root.contains("operator")) {
    const json& o = root["operator"];
    detail::only_keys(o, "operator", {"kind", "dim", "stochastic", "path"});
    cfg.has_operator = true;
    auto& op = cfg.op;
    op.kind = get<std::string>(o, "kind", "operator");
    if (o.contains("dim")) op.dim = get<Index>(o, "dim", "operator");
    if (o.contains("path")) op.path = detail::resolve(get<std::string>(o, "path", "operator"), base_dir);
    if (o.contains("stochastic")) {
      const json& s = o["stochastic"];
      if (s.is_string())
        op.stochastic_path = detail::resolve(s.get<std::string>(), base_dir);
      else
        op.stochastic = detail::rows_to_matrix(s);
    }
    if (op.kind == "transpose" || op.kind == "identity") {
      if (op.dim <= 0) throw ParseError("operator.dim must be a positive integer for kind '" + op.kind + "'");
    } else if (op.kind == "entangled_psi" || op.kind == "entangled_p") {
      if (!op.stochastic && op.stochastic_path.empty())
        throw ParseError("operator.stochastic is required for kind '" + op.kind + "'");
    } else if (op.kind == "file") {
      if (op.path.empty()) throw ParseError("operator.path is required for kind 'file'");
    } else {
      throw ParseError("operator.kind: unknown kind '" + op.kind + "'");
    }
  }

  if (root.contains("weights")) {
    const json& w = root["weights"];
    detail::only_keys(w, "weights", {"kind", "alpha", "value", "path"});
    auto& wc = cfg.weights;
    wc.kind = get<std::string>(w, "kind", "weights");
    if (w.contains("alpha")) wc.alpha = get<double>(w, "alpha", "weights");
    if (w.contains("value")) wc.value = get<double>(w, "value", "weights");
    if (w.contains("path")) wc.path = detail::resolve(get<std::string>(w, "path", "weights"), base_dir);
    if (wc.kind != "constant" && wc.kind != "power" && wc.kind != "harmonic" && wc.kind != "file")
      throw ParseError("weights.kind: unknown kind '" + wc.kind + "'");
    if (wc.kind == "file" && wc.path.empty()) throw ParseError("weights.path is required for kind 'file'");
  }

  if (root.contains("run")) {
    const json& r = root["run"];
    detail::only_keys(r, "run", {"n_max", "checkpoints", "seed", "tolerance", "samples",
                                 "limit_tolerance", "require_markov"});
    auto& rc = cfg.run;
    if (r.contains("n_max")) {
      const auto n = get<long long>(r, "n_max", "run");
      if (n < 1) throw ParseError("run.n_max must be >= 1");
      rc.n_max = static_cast<std::size_t>(n);
    }
    if (r.contains("checkpoints")) {
      const json& c = r["checkpoints"];
      if (c.is_string()) {
        if (c.get<std::string>() != "log") throw ParseError("run.checkpoints: expected \"log\" or a list");
        rc.log_checkpoints = true;
      } else if (c.is_array()) {
        rc.log_checkpoints = false;
        for (const auto& v : c) {
          if (!v.is_number_integer() || v.get<long long>() < 1)
            throw ParseError("run.checkpoints: entries must be positive integers");
          rc.checkpoints.push_back(v.get<std::size_t>());
        }
        if (rc.checkpoints.empty()) throw ParseError("run.checkpoints: empty list");
      } else {
        throw ParseError("run.checkpoints: expected \"log\" or a list");
      }
    }
    if (r.contains("seed")) rc.seed = get<std::uint64_t>(r, "seed", "run");
    if (r.contains("tolerance")) rc.tolerance = get<double>(r, "tolerance", "run");
    if (r.contains("samples")) rc.samples = get<int>(r, "samples", "run");
    if (r.contains("limit_tolerance")) rc.limit_tolerance = get<double>(r, "limit_tolerance", "run");
    if (r.contains("require_markov")) rc.require_markov = get<bool>(r, "require_markov", "run");
    if (!(rc.tolerance > 0.0)) throw ParseError("run.tolerance must be > 0");
    if (!(rc.limit_tolerance > 0.0)) throw ParseError("run.limit_tolerance must be > 0");
    if (rc.samples < 1) throw ParseError("run.samples must be >= 1");
    for (auto n : rc.checkpoints)
      if (n > rc.n_max) throw ParseError("run.checkpoints: entry exceeds n_max");
  }

  if (root.contains("input_x")) {
    const json& x = root["input_x"];
    detail::only_keys(x, "input_x", {"kind", "path", "i", "j"});
    auto& ic = cfg.input;
    ic.kind = get<std::string>(x, "kind", "input_x");
    if (x.contains("path")) ic.path = detail::resolve(get<std::string>(x, "path", "input_x"), base_dir);
    if (x.contains("i")) ic.i = get<Index>(x, "i", "input_x");
    if (x.contains("j")) ic.j = get<Index>(x, "j", "input_x");
    if (ic.kind != "random" && ic.kind != "file" && ic.kind != "matrix_unit")
      throw ParseError("input_x.kind: unknown kind '" + ic.kind + "'");
    if (ic.kind == "file" && ic.path.empty()) throw ParseError("input_x.path is required for kind 'file'");
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    detail::only_keys(o, "output", {"csv_path", "report_path"});
    if (o.contains("csv_path"))
      cfg.output.csv_path = detail::resolve(get<std::string>(o, "csv_path", "output"), base_dir);
    if (o.contains("report_path"))
      cfg.output.report_path = detail::resolve(get<std::string>(o, "report_path", "output"), base_dir);
  }
  return cfg;
}

inline ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(root, std::filesystem::absolute(path).parent_path());
}

// --- builders ---------------------------------------------------------------

inline StochasticMatrix build_stochastic(const OperatorConfig& op) {
  StochasticMatrix pi = op.stochastic ? StochasticMatrix(*op.stochastic)
                                      : StochasticMatrix::from_file(op.stochastic_path);
  if (op.dim > 0 && op.dim != pi.dim())
    throw ParseError("operator.dim does not match the stochastic matrix");
  return pi;
}

inline SuperOperator build_operator(const ExperimentConfig& cfg) {
  if (!cfg.has_operator) throw ParseError("config has no operator section");
  const auto& op = cfg.op;
  if (op.kind == "transpose") return transpose_map(op.dim);
  if (op.kind == "identity") return identity_map(op.dim);
  if (op.kind == "entangled_psi") return entangled_psi(build_stochastic(op));
  if (op.kind == "entangled_p") return entangled_P(build_stochastic(op));
  SuperOperator s = SuperOperator::from_file(op.path);
  if (op.dim > 0 && op.dim != s.dim()) throw ParseError("operator.dim does not match the superoperator file");
  return s;
}

inline WeightSequence build_weights(const WeightsConfig& wc) {
  if (wc.kind == "constant") return WeightSequence::constant(wc.value);
  if (wc.kind == "power") return WeightSequence::power(wc.alpha);
  if (wc.kind == "harmonic") return WeightSequence::harmonic();
  return WeightSequence::explicit_list(read_weight_file(wc.path));
}

inline CMatrix build_input(const InputConfig& ic, Index d, std::uint64_t seed) {
  if (ic.kind == "matrix_unit") {
    if (ic.i < 1 || ic.j < 1 || ic.i > d || ic.j > d)
      throw ParseError("input_x: matrix unit index out of range");
    return matrix_unit(d, ic.i - 1, ic.j - 1);
  }
  if (ic.kind == "file") {
    CMatrix x = read_matrix_file(ic.path);
    if (x.rows() != d) throw ParseError("input_x: matrix dimension does not match the operator");
    return x;
  }
  std::mt19937_64 rng(seed);
  return random_unit_matrix(d, rng);
}

/// Powers of two up to n_max, or the explicit list.
inline std::vector<std::size_t> checkpoints(const RunConfig& rc) {
  if (!rc.log_checkpoints) return rc.checkpoints;
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= rc.n_max; n *= 2) out.push_back(n);
  return out;
}

}  // namespace ergo::config
