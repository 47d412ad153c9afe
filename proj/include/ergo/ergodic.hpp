#pragma once

// Riesz means of operator orbits and the relative unique ergodicity
// machinery built on them: the projection E_T onto the fixed space along
// Ran(I - T), the coboundary decomposition, the convergence estimate,
// Jordan decomposition and invariant functionals, invariant state
// extension, and the conditional-expectation test.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ergo/error.hpp"
#include "ergo/fixed_points.hpp"
#include "ergo/matrix.hpp"
#include "ergo/random.hpp"
#include "ergo/superop.hpp"
#include "ergo/weights.hpp"

namespace ergo {

// --- Riesz means ----------------------------------------------------------

/// Streams M_n(x) = (1/S_n) sum_{k=1}^n p_k T^k x, one application of T per
/// step. The sum starts at k = 1, so the first term is p_1 T x.
class RieszMeanAccumulator {
 public:
  RieszMeanAccumulator(SuperOperator s, const CMatrix& x, WeightSequence w)
      : s_(std::move(s)), w_(std::move(w)) {
    if (x.rows() != s_.dim() || x.cols() != s_.dim())
      throw DimensionError("RieszMeanAccumulator: matrix size does not match operator");
    orbit_ = vec(x);
    sum_ = VectorC::Zero(orbit_.size());
  }

  void step() {
    ++n_;
    orbit_ = s_.rep() * orbit_;
    sum_ += w_.weight(n_) * orbit_;
  }

  void advance_to(std::size_t n) {
    while (n_ < n) step();
  }

  std::size_t n() const { return n_; }
  const WeightSequence& weights() const { return w_; }

  /// Current orbit point T^n x.
  CMatrix orbit_point() const { return unvec(orbit_, s_.dim()); }

  CMatrix mean() const {
    if (n_ == 0) throw InvalidArgument("RieszMeanAccumulator: no steps taken");
    return unvec(sum_ / w_.prefix_sum(n_), s_.dim());
  }

 private:
  SuperOperator s_;
  WeightSequence w_;
  std::size_t n_ = 0;
  VectorC orbit_;
  VectorC sum_;
};

inline CMatrix riesz_mean(const SuperOperator& s, const CMatrix& x,
                          const WeightSequence& w, std::size_t n) {
  if (n == 0) throw InvalidArgument("riesz_mean: n must be at least 1");
  RieszMeanAccumulator acc(s, x, w);
  acc.advance_to(n);
  return acc.mean();
}

// --- fixed space vs. range of I - T ---------------------------------------

/// ker(T - I) and Ran(T - I) from one SVD, plus the dimension of their sum.
struct SpaceSplit {
  FixedSpace fixed;
  CMatrix range;  // orthonormal columns spanning Ran(T - I)
  Index rank = 0;
  Index sum_dim = 0;

  Index total_dim() const { return fixed.ambient_dim() * fixed.ambient_dim(); }
  Index intersection_dim() const { return fixed.size() + rank - sum_dim; }
  bool spans_all() const {
    return fixed.size() + rank == total_dim() && sum_dim == total_dim();
  }
};

inline SpaceSplit split_spaces(const SuperOperator& s, double tol = kDefaultTol) {
  const RankSplit rs = rank_split(minus_identity(s), tol);
  const Index m = rs.kernel.cols();
  CMatrix stacked(rs.kernel.rows(), m + rs.rank);
  stacked << rs.kernel, rs.range;
  return SpaceSplit{FixedSpace(s.dim(), rs.kernel), rs.range, rs.rank,
                    matrix_rank(stacked, tol)};
}

/// Projection onto ker(T - I) along Ran(T - I), from an already computed split.
inline SuperOperator et_projection(const SpaceSplit& sp) {
  if (!sp.spans_all())
    throw NumericalError(
        "fixed space and range of I - T do not form a direct sum (dim fixed " +
        std::to_string(sp.fixed.size()) + ", rank " + std::to_string(sp.rank) +
        ", dim of sum " + std::to_string(sp.sum_dim) +
        "); no projection along the range exists");
  const Index m = sp.fixed.size();
  const Index total = sp.total_dim();
  CMatrix block(total, total);
  block << sp.fixed.vec_basis(), sp.range;
  const CMatrix coords = block.fullPivLu().inverse();
  return SuperOperator(sp.fixed.ambient_dim(),
                       sp.fixed.vec_basis() * coords.topRows(m));
}

inline SuperOperator et_projection(const SuperOperator& s, double tol = kDefaultTol) {
  return et_projection(split_spaces(s, tol));
}

struct ErgodicityReport {
  MarkovReport markov;
  Index dim_fixed = 0;
  Index rank_range = 0;
  bool sum_spans_all = false;
  Index intersection_dim = 0;
  bool uniquely_ergodic_relative = false;
  bool ergodic = false;
  std::optional<SuperOperator> projection;  // E_T, present iff uniquely ergodic relative
  std::optional<FixedSpace> fixed;

  /// The conclusions are only backed by the theory for Markov operators.
  bool markov_warning() const { return !markov.is_markov(); }
};

inline ErgodicityReport unique_ergodicity_check(const SuperOperator& s,
                                                double tol = kDefaultTol,
                                                std::uint64_t seed = 0,
                                                int samples = 200) {
  ErgodicityReport r;
  r.markov = check_markov(s, samples, seed, tol);
  SpaceSplit sp = split_spaces(s, tol);
  r.dim_fixed = sp.fixed.size();
  r.rank_range = sp.rank;
  r.sum_spans_all = sp.spans_all();
  r.intersection_dim = sp.intersection_dim();
  r.uniquely_ergodic_relative = r.sum_spans_all && r.intersection_dim == 0;
  r.ergodic = r.uniquely_ergodic_relative && r.dim_fixed == 1;
  if (r.uniquely_ergodic_relative) r.projection = et_projection(sp);
  r.fixed = std::move(sp.fixed);
  return r;
}

// --- coboundary decomposition ---------------------------------------------

struct Decomposition {
  CMatrix x_fix;  // E_T(x)
  CMatrix y;      // minimum-norm solution of (I - T) y = x - x_fix
  double residual = 0.0;  // ||x_fix + (y - T y) - x||_spectral
};

/// x = x_fix + (y - T y) with x_fix in the fixed space.
inline Decomposition decompose(const SuperOperator& s, const CMatrix& x,
                               double tol = kDefaultTol) {
  const SuperOperator e = et_projection(s, tol);
  Decomposition out;
  out.x_fix = e.apply(x);
  const Index m = s.dim() * s.dim();
  const CMatrix a = CMatrix::Identity(m, m) - s.rep();
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tau = tol * std::max(sv(0), 1.0);
  const VectorC rhs = svd.matrixU().adjoint() * vec(x - out.x_fix);
  VectorC coef = VectorC::Zero(m);
  for (Index k = 0; k < m; ++k)
    if (sv(k) > tau) coef(k) = rhs(k) / sv(k);
  out.y = unvec(svd.matrixV() * coef, s.dim());
  out.residual = spectral_norm(out.x_fix + (out.y - s.apply(out.y)) - x);
  return out;
}

// --- convergence estimate -------------------------------------------------

struct ConvergenceRow {
  std::size_t n = 0;
  double p_n = 0.0;
  double s_n = 0.0;
  double big_p_n = 0.0;  // P(n)
  double err = 0.0;      // ||M_n(x) - E_T x||
  double bound = 0.0;    // P(n) ||x||
  bool ok = false;       // err <= bound + tol
};

/// err_n against P(n) ||x|| at each checkpoint, given a precomputed E_T.
inline std::vector<ConvergenceRow> verify_estimate(
    const SuperOperator& s, const SuperOperator& projection, const CMatrix& x,
    const WeightSequence& w, const std::vector<std::size_t>& checkpoints,
    double tol) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw InvalidArgument("verify_estimate: checkpoints must be ascending");
  if (!checkpoints.empty() && checkpoints.front() == 0)
    throw InvalidArgument("verify_estimate: checkpoints start at 1");
  const CMatrix target = projection.apply(x);
  const double xnorm = spectral_norm(x);
  RieszMeanAccumulator acc(s, x, w);
  std::vector<ConvergenceRow> rows;
  rows.reserve(checkpoints.size());
  for (std::size_t n : checkpoints) {
    acc.advance_to(n);
    ConvergenceRow row;
    row.n = n;
    row.p_n = w.weight(n);
    row.s_n = w.prefix_sum(n);
    row.big_p_n = w.p_condition_value(n);
    row.err = spectral_norm(acc.mean() - target);
    row.bound = row.big_p_n * xnorm;
    row.ok = row.err <= row.bound + tol;
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<ConvergenceRow> verify_estimate(
    const SuperOperator& s, const CMatrix& x, const WeightSequence& w,
    const std::vector<std::size_t>& checkpoints, double tol,
    double rank_tol = kDefaultTol) {
  return verify_estimate(s, et_projection(s, rank_tol), x, w, checkpoints, tol);
}

// --- Hermitian functionals ------------------------------------------------

/// Functional x -> trace(rep x) with Hermitian rep.
class HermitianFunctional {
 public:
  explicit HermitianFunctional(CMatrix rep, double tol = kDefaultTol)
      : rep_(std::move(rep)) {
    if (rep_.rows() != rep_.cols()) throw DimensionError("HermitianFunctional: rep not square");
    if (hermitian_defect(rep_) > tol * std::max(1.0, spectral_norm(rep_)))
      throw InvalidArgument("HermitianFunctional: rep is not Hermitian");
    rep_ = 0.5 * (rep_ + rep_.adjoint());
  }

  const CMatrix& rep() const { return rep_; }
  Complex operator()(const CMatrix& x) const { return (rep_ * x).trace(); }

  /// Dual norm ||h||_1 = trace norm of the rep.
  double norm() const { return trace_norm(rep_); }

 private:
  CMatrix rep_;
};

struct JordanParts {
  HermitianFunctional plus;
  HermitianFunctional minus;
};

/// h = h_+ - h_- from the spectral split of the rep.
inline JordanParts jordan_decompose(const HermitianFunctional& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.rep());
  const auto& lam = es.eigenvalues();
  const CMatrix& u = es.eigenvectors();
  const Eigen::VectorXd pos = lam.cwiseMax(0.0);
  const Eigen::VectorXd neg = (-lam).cwiseMax(0.0);
  const CMatrix hp = u * pos.cast<Complex>().asDiagonal() * u.adjoint();
  const CMatrix hm = u * neg.cast<Complex>().asDiagonal() * u.adjoint();
  return JordanParts{HermitianFunctional(hp), HermitianFunctional(hm)};
}

/// HS-orthonormal basis of the real vector space of d x d Hermitian matrices.
inline std::vector<CMatrix> hermitian_basis(Index d) {
  std::vector<CMatrix> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < d; ++i) out.push_back(matrix_unit(d, i, i));
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      out.push_back(r * (matrix_unit(d, i, j) + matrix_unit(d, j, i)));
      out.push_back(Complex(0.0, r) * (matrix_unit(d, i, j) - matrix_unit(d, j, i)));
    }
  return out;
}

namespace detail {

/// The complex-linear map L (on vectorized matrices) restricted to real
/// combinations of `basis`, realified: returns [Re; Im] of L applied to each.
inline RMatrix realify(const CMatrix& l, const std::vector<CMatrix>& basis) {
  const Index rows = l.rows();
  RMatrix out(2 * rows, static_cast<Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const VectorC img = l * vec(basis[k]);
    out.col(static_cast<Index>(k)) << img.real(), img.imag();
  }
  return out;
}

inline RMatrix real_kernel(const RMatrix& m, double tol) {
  Eigen::JacobiSVD<RMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tau = tol * std::max(sv.size() ? sv(0) : 0.0, 1.0);
  Index r = 0;
  while (r < sv.size() && sv(r) > tau) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

inline CMatrix combine(const std::vector<CMatrix>& basis, const Eigen::VectorXd& c) {
  CMatrix out = CMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k) out += c(static_cast<Index>(k)) * basis[k];
  return out;
}

}  // namespace detail

/// Basis of the Hermitian functionals h with h o T = h, i.e. T^*(rep) = rep.
inline std::vector<HermitianFunctional> invariant_functionals(
    const SuperOperator& s, double tol = kDefaultTol) {
  const Index d = s.dim();
  const Index m = d * d;
  const auto herm = hermitian_basis(d);
  const CMatrix l = s.rep().adjoint() - CMatrix::Identity(m, m);
  const RMatrix ker = detail::real_kernel(detail::realify(l, herm), tol);
  std::vector<HermitianFunctional> out;
  for (Index c = 0; c < ker.cols(); ++c)
    out.emplace_back(detail::combine(herm, ker.col(c)));
  return out;
}

/// Dimension of {h invariant Hermitian : h vanishes on the fixed space}.
/// Zero whenever T is uniquely ergodic relative to its fixed space.
inline Index annihilating_invariant_dim(const SuperOperator& s,
                                        double tol = kDefaultTol) {
  const auto inv = invariant_functionals(s, tol);
  if (inv.empty()) return 0;
  const FixedSpace f = fixed_space(s, tol);
  const auto fb = f.basis();
  RMatrix cons(2 * static_cast<Index>(fb.size()), static_cast<Index>(inv.size()));
  for (std::size_t j = 0; j < inv.size(); ++j)
    for (std::size_t i = 0; i < fb.size(); ++i) {
      const Complex v = inv[j](fb[i]);
      cons(static_cast<Index>(2 * i), static_cast<Index>(j)) = v.real();
      cons(static_cast<Index>(2 * i + 1), static_cast<Index>(j)) = v.imag();
    }
  if (cons.rows() == 0) return static_cast<Index>(inv.size());
  return detail::real_kernel(cons, tol).cols();
}

// --- invariant state extension --------------------------------------------

/// The unique invariant extension phi = psi o E_T of a state psi on the
/// fixed space, where psi is given by its values on the fixed-space basis
/// (psi_values[k] = psi(b_k)). Returns the density matrix of phi.
inline HermitianFunctional extend_state(const SuperOperator& s,
                                        const std::vector<Complex>& psi_values,
                                        double tol = kDefaultTol,
                                        std::uint64_t seed = 0,
                                        int samples = 200) {
  const Index d = s.dim();
  const SpaceSplit sp = split_spaces(s, tol);
  if (!sp.spans_all())
    throw NumericalError("extend_state: operator is not uniquely ergodic relative to its fixed space");
  const SuperOperator e = et_projection(sp);
  const auto basis = sp.fixed.basis();
  if (psi_values.size() != basis.size())
    throw InvalidArgument("extend_state: expected " + std::to_string(basis.size()) +
                          " values, one per fixed-space basis element");

  auto psi = [&](const CMatrix& f) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) acc += hs_inner(basis[k], f) * psi_values[k];
    return acc;
  };

  const double unit_res = sp.fixed.residual(identity(d));
  if (unit_res > std::sqrt(tol))
    throw InvalidArgument("extend_state: identity is not in the fixed space, no states to extend");
  const Complex one = psi(identity(d));
  if (std::abs(one - 1.0) > 1e-8)
    throw InvalidArgument("extend_state: psi(1) = " + format_double(one.real()) + " is not 1");

  // Sampled positivity on PSD elements of the fixed space.
  const double pos_tol = 1e-8;
  std::mt19937_64 rng(seed);
  auto probe = [&](const CMatrix& f) {
    if (!is_psd(f, pos_tol)) return;
    const Complex v = psi(f);
    if (v.real() < -pos_tol || std::abs(v.imag()) > pos_tol)
      throw InvalidArgument("extend_state: psi is negative on a positive element of the fixed space");
  };
  for (Index i = 0; i < d; ++i) probe(e.apply(matrix_unit(d, i, i)));
  const bool algebra = is_subalgebra(sp.fixed, tol).closed;
  for (int k = 0; k < samples; ++k) {
    const VectorC v = random_unit_vector(d, rng);
    probe(e.apply(v * v.adjoint()));
    if (algebra) {
      CMatrix f = CMatrix::Zero(d, d);
      std::normal_distribution<double> g(0.0, 1.0);
      for (const auto& b : basis) {
        const double re = g(rng);
        const double im = g(rng);
        f += Complex(re, im) * b;
      }
      probe(f.adjoint() * f);
    }
  }

  // rho_0 reproduces psi on the basis: trace(rho_0 b_k) = psi(b_k).
  CMatrix rho0 = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < basis.size(); ++k) rho0 += psi_values[k] * basis[k].adjoint();
  const CMatrix rho = adjoint(e).apply(rho0);
  if (hermitian_defect(rho) > 1e-8)
    throw InvalidArgument("extend_state: psi is not Hermitian on the fixed space");
  if (min_hermitian_eigenvalue(rho) < -1e-8)
    throw InvalidArgument("extend_state: the extension is not positive, psi is not a state");
  return HermitianFunctional(rho, 1e-8);
}

/// Values psi(b_k) = trace(sigma b_k) of the functional given by `sigma`
/// on the fixed-space basis, in the order extend_state expects.
inline std::vector<Complex> state_values_on(const FixedSpace& f, const CMatrix& sigma) {
  std::vector<Complex> out;
  for (const auto& b : f.basis()) out.push_back((sigma * b).trace());
  return out;
}

// --- conditional expectations ---------------------------------------------

struct BimoduleWitness {
  CMatrix a;
  CMatrix x;
  CMatrix b;
  double defect = 0.0;  // ||E(a x b) - a E(x) b||
};

struct ConditionalExpectationCheck {
  bool is_conditional_expectation = false;
  SubalgebraCheck subalgebra;
  std::optional<BimoduleWitness> witness;
  double worst_defect = 0.0;
};

/// Subalgebra test plus the sampled bimodule identity E(a x b) = a E(x) b
/// for a, b in F. A violating triple is reported when one is found.
inline ConditionalExpectationCheck is_conditional_expectation(
    const SuperOperator& e, const FixedSpace& f, int n_samples,
    std::uint64_t seed, double tol = kDefaultTol) {
  const Index d = e.dim();
  if (f.ambient_dim() != d) throw DimensionError("is_conditional_expectation: dimension mismatch");
  const Index m = d * d;
  const double scale = std::max(1.0, spectral_norm(e.rep()));
  const CMatrix p = f.projector();
  if (spectral_norm(e.rep() * e.rep() - e.rep()) > 1e-8 * scale ||
      spectral_norm((CMatrix::Identity(m, m) - p) * e.rep()) > 1e-8 * scale ||
      spectral_norm(e.rep() * p - p) > 1e-8 * scale)
    throw InvalidArgument("is_conditional_expectation: E is not a projection onto F");

  ConditionalExpectationCheck out;
  out.subalgebra = is_subalgebra(f, tol);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto basis = f.basis();
  auto random_in_f = [&]() {
    CMatrix z = CMatrix::Zero(d, d);
    for (const auto& bk : basis) {
      const double re = g(rng);
      const double im = g(rng);
      z += Complex(re, im) * bk;
    }
    return z;
  };
  bool bimodule = true;
  for (int k = 0; k < n_samples && !basis.empty(); ++k) {
    const CMatrix a = random_in_f();
    const CMatrix b = random_in_f();
    const CMatrix x = random_gaussian_matrix(d, rng);
    const double defect = spectral_norm(e.apply(a * x * b) - a * e.apply(x) * b);
    const double allowed =
        tol * std::max(1.0, spectral_norm(a) * spectral_norm(x) * spectral_norm(b));
    out.worst_defect = std::max(out.worst_defect, defect);
    if (defect > allowed && !out.witness) {
      bimodule = false;
      out.witness = BimoduleWitness{a, x, b, defect};
    }
  }
  out.is_conditional_expectation = out.subalgebra.closed && bimodule;
  return out;
}

}  // namespace ergo
