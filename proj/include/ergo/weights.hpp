#pragma once

// Riesz weight sequences p_1, p_2, ... with cached prefix sums
//   S_n = p_1 + ... + p_n
//   V_n = p_1 + |p_2 - p_1| + ... + |p_n - p_{n-1}| + p_n
// and the finite-horizon checks on them (regularity p_n/S_n -> 0, Cesaro
// domination, and P(n) = V_n/S_n -> 0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ergo/error.hpp"
#include "ergo/matrix.hpp"

namespace ergo {

enum class WeightFamily { constant, power, harmonic, explicit_list };

inline const char* to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::constant: return "constant";
    case WeightFamily::power: return "power";
    case WeightFamily::harmonic: return "harmonic";
    case WeightFamily::explicit_list: return "explicit";
  }
  return "?";
}

namespace detail {

/// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

class WeightSequence {
 public:
  static WeightSequence constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw InvalidArgument("constant weight must be a positive finite number");
    return WeightSequence(WeightFamily::constant, value, {});
  }

  static WeightSequence power(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw InvalidArgument("power weight exponent must be positive");
    return WeightSequence(WeightFamily::power, alpha, {});
  }

  static WeightSequence harmonic() {
    return WeightSequence(WeightFamily::harmonic, 0.0, {});
  }

  /// Entries beyond the end of the list repeat the last entry.
  static WeightSequence explicit_list(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("explicit weight list is empty");
    if (!(values.front() > 0.0))
      throw InvalidArgument("first weight must be strictly positive");
    for (std::size_t k = 0; k < values.size(); ++k)
      if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
        throw InvalidArgument("weight " + std::to_string(k + 1) +
                              " is negative or non-finite");
    return WeightSequence(WeightFamily::explicit_list, 0.0, std::move(values));
  }

  WeightFamily family() const { return family_; }
  double parameter() const { return param_; }
  const std::vector<double>& values() const { return values_; }

  /// p_k for k >= 1.
  double weight(std::size_t k) const {
    if (k == 0) throw InvalidArgument("weights are indexed from 1");
    switch (family_) {
      case WeightFamily::constant: return param_;
      case WeightFamily::power: return std::pow(static_cast<double>(k), param_);
      case WeightFamily::harmonic: return 1.0 / static_cast<double>(k);
      case WeightFamily::explicit_list:
        return k <= values_.size() ? values_[k - 1] : values_.back();
    }
    return 0.0;
  }

  /// True if p_n had to be obtained by repeating the last explicit entry.
  bool extrapolated(std::size_t n) const {
    return family_ == WeightFamily::explicit_list && n > values_.size();
  }

  double prefix_sum(std::size_t n) const { return cached(n).first; }

  double variation_sum(std::size_t n) const {
    return cached(n).second + weight(n);
  }

  /// P(n) = V_n / S_n; P(1) = 2.
  double p_condition_value(std::size_t n) const {
    const auto [s, d] = cached(n);
    return (d + weight(n)) / s;
  }

  double regularity_ratio(std::size_t n) const {
    return weight(n) / prefix_sum(n);
  }

 private:
  WeightSequence(WeightFamily f, double param, std::vector<double> values)
      : family_(f), param_(param), values_(std::move(values)),
        cache_(std::make_shared<Cache>()) {}

  // Append-only caches of S_n and D_n = p_1 + sum_{k<=n} |p_k - p_{k-1}|.
  struct Cache {
    std::mutex mu;
    std::vector<double> prefix;
    std::vector<double> variation;
    detail::CompensatedSum s;
    detail::CompensatedSum v;
  };

  std::pair<double, double> cached(std::size_t n) const {
    if (n == 0) throw InvalidArgument("n must be at least 1");
    std::lock_guard lock(cache_->mu);
    auto& c = *cache_;
    while (c.prefix.size() < n) {
      const std::size_t k = c.prefix.size() + 1;
      const double pk = weight(k);
      c.s.add(pk);
      c.v.add(k == 1 ? pk : std::abs(pk - weight(k - 1)));
      c.prefix.push_back(c.s.value());
      c.variation.push_back(c.v.value());
    }
    return {c.prefix[n - 1], c.variation[n - 1]};
  }

  WeightFamily family_;
  double param_;
  std::vector<double> values_;
  std::shared_ptr<Cache> cache_;
};

/// One decimal per line; blank lines are ignored.
inline std::vector<double> read_weight_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open weight file: " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 1)
      throw ParseError("weight file line " + std::to_string(lineno) +
                       ": expected one number");
    out.push_back(parse_double(toks[0]));
  }
  return out;
}

// --- finite-horizon checks ------------------------------------------------

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct LimitCheck {
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> trace;  // trace[n-1] is the value at n
  bool extrapolated = false;
};

struct CesaroCheck {
  Verdict verdict = Verdict::fail;
  double witness_c = 0.0;          // max_{n<=N} n p_n / S_n
  std::size_t first_increase = 0;  // smallest n with p_{n+1} > p_n, 0 if none
  bool extrapolated = false;
};

/// Relative spread below which the tail of a trace counts as a plateau.
inline constexpr double kPlateauSpread = 0.05;

/// Classifies whether a sampled sequence tends to zero. The tail is the last
/// half of the samples. Pass: final value below `tol` and the tail is
/// non-increasing. Fail: tail bounded below by `tol` and either
/// non-decreasing or flat to within kPlateauSpread. Anything else is
/// inconclusive.
inline Verdict classify_limit_to_zero(const std::vector<double>& trace,
                                      double tol) {
  if (trace.empty()) return Verdict::inconclusive;
  const std::size_t n = trace.size();
  const std::size_t start = n / 2;
  bool non_increasing = true;
  bool non_decreasing = true;
  double lo = trace[start];
  double hi = trace[start];
  for (std::size_t k = start + 1; k < n; ++k) {
    const double slack = 1e-12 * std::abs(trace[k - 1]);
    if (trace[k] > trace[k - 1] + slack) non_increasing = false;
    if (trace[k] < trace[k - 1] - slack) non_decreasing = false;
    lo = std::min(lo, trace[k]);
    hi = std::max(hi, trace[k]);
  }
  if (trace.back() < tol && non_increasing) return Verdict::pass;
  if (lo >= tol && (non_decreasing || (hi - lo) <= kPlateauSpread * lo))
    return Verdict::fail;
  return Verdict::inconclusive;
}

inline void require_horizon(std::size_t big_n, std::size_t min_n,
                            const char* what) {
  if (big_n < min_n)
    throw InvalidArgument(std::string(what) + ": horizon must be at least " +
                          std::to_string(min_n));
}

/// p_n / S_n -> 0, sampled for n <= N.
inline LimitCheck check_regularity(const WeightSequence& w, std::size_t big_n,
                                   double tol) {
  require_horizon(big_n, 10, "check_regularity");
  LimitCheck out;
  out.trace.reserve(big_n);
  for (std::size_t n = 1; n <= big_n; ++n)
    out.trace.push_back(w.regularity_ratio(n));
  out.verdict = classify_limit_to_zero(out.trace, tol);
  out.extrapolated = w.extrapolated(big_n);
  return out;
}

/// P(n) -> 0, sampled for n <= N.
inline LimitCheck check_p_condition(const WeightSequence& w, std::size_t big_n,
                                    double tol) {
  require_horizon(big_n, 10, "check_p_condition");
  LimitCheck out;
  out.trace.reserve(big_n);
  for (std::size_t n = 1; n <= big_n; ++n)
    out.trace.push_back(w.p_condition_value(n));
  out.verdict = classify_limit_to_zero(out.trace, tol);
  out.extrapolated = w.extrapolated(big_n);
  return out;
}

/// Non-increasing weights with n p_n / S_n <= C: passes iff p_{n+1} <= p_n
/// for all n < N; C is reported as the observed maximum.
inline CesaroCheck check_cesaro_domination(const WeightSequence& w,
                                           std::size_t big_n) {
  require_horizon(big_n, 2, "check_cesaro_domination");
  CesaroCheck out;
  for (std::size_t n = 1; n <= big_n; ++n) {
    out.witness_c = std::max(
        out.witness_c, static_cast<double>(n) * w.weight(n) / w.prefix_sum(n));
    if (n < big_n && out.first_increase == 0 && w.weight(n + 1) > w.weight(n))
      out.first_increase = n;
  }
  out.verdict = out.first_increase == 0 ? Verdict::pass : Verdict::fail;
  out.extrapolated = w.extrapolated(big_n);
  return out;
}

}  // namespace ergo
