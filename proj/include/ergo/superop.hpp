#pragma once

// Linear maps on M_d(C) as d^2 x d^2 matrices acting on column-stacked
// vectorizations: rep * vec(x) = vec(T(x)), vec(x)[i + j*d] = x(i, j).
// Under this convention x -> a x b has rep kron(b^T, a).

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "ergo/error.hpp"
#include "ergo/matrix.hpp"

namespace ergo {

/// Row-stochastic matrix with nonnegative real entries.
class StochasticMatrix {
 public:
  static constexpr double kRowSumTol = 1e-12;

  explicit StochasticMatrix(RMatrix p) : p_(std::move(p)) {
    if (p_.rows() == 0 || p_.rows() != p_.cols())
      throw InvalidArgument("stochastic matrix must be square and nonempty");
    if (!p_.allFinite()) throw InvalidArgument("stochastic matrix has non-finite entries");
    for (Index i = 0; i < p_.rows(); ++i) {
      for (Index j = 0; j < p_.cols(); ++j)
        if (p_(i, j) < 0.0)
          throw InvalidArgument("stochastic matrix has a negative entry at (" +
                                std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ")");
      const double s = p_.row(i).sum();
      if (std::abs(s - 1.0) > kRowSumTol)
        throw InvalidArgument("stochastic matrix row " + std::to_string(i + 1) +
                              " sums to " + format_double(s));
    }
  }

  /// Accepts a complex matrix whose imaginary parts vanish within 1e-12.
  static StochasticMatrix from_complex(const CMatrix& x) {
    if (x.size() > 0 && x.imag().cwiseAbs().maxCoeff() > 1e-12)
      throw ParseError("stochastic matrix has nonzero imaginary parts");
    return StochasticMatrix(x.real());
  }

  static StochasticMatrix from_file(const std::string& path) {
    return from_complex(read_matrix_file(path));
  }

  static StochasticMatrix identity(Index d) {
    return StochasticMatrix(RMatrix::Identity(d, d));
  }

  static StochasticMatrix uniform(Index d) {
    return StochasticMatrix(RMatrix::Constant(d, d, 1.0 / static_cast<double>(d)));
  }

  /// The 3-state chain with an absorbing state 1 and a closed class {2, 3}:
  ///   [1 0 0; 0 0 1; 0 u v],  u + v = 1.
  static StochasticMatrix two_class_chain(double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("two_class_chain: u must lie in [0, 1]");
    RMatrix p(3, 3);
    p << 1, 0, 0,
         0, 0, 1,
         0, u, 1.0 - u;
    return StochasticMatrix(std::move(p));
  }

  /// Rows drawn uniformly from the simplex (normalized exponentials).
  template <class Rng>
  static StochasticMatrix random(Index d, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    RMatrix p(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) p(i, j) = expo(rng);
      p.row(i) /= p.row(i).sum();
    }
    return StochasticMatrix(std::move(p));
  }

  Index dim() const { return p_.rows(); }
  const RMatrix& matrix() const { return p_; }
  double operator()(Index i, Index j) const { return p_(i, j); }

 private:
  RMatrix p_;
};

class SuperOperator {
 public:
  SuperOperator(Index d, CMatrix rep) : d_(d), rep_(std::move(rep)) {
    if (d <= 0) throw InvalidArgument("superoperator dimension must be positive");
    if (rep_.rows() != d * d || rep_.cols() != d * d)
      throw DimensionError("superoperator rep must be " + std::to_string(d * d) +
                           "x" + std::to_string(d * d));
    if (!rep_.allFinite()) throw InvalidArgument("superoperator rep has non-finite entries");
  }

  /// Infers d from a d^2 x d^2 rep.
  static SuperOperator from_rep(CMatrix rep) {
    if (rep.rows() != rep.cols())
      throw DimensionError("superoperator rep must be square");
    const auto m = rep.rows();
    const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(m))));
    if (d * d != m)
      throw DimensionError("superoperator rep size " + std::to_string(m) +
                           " is not a perfect square");
    return SuperOperator(d, std::move(rep));
  }

  static SuperOperator from_file(const std::string& path) {
    return from_rep(read_matrix_file(path));
  }

  Index dim() const { return d_; }
  const CMatrix& rep() const { return rep_; }

  CMatrix apply(const CMatrix& x) const {
    if (x.rows() != d_ || x.cols() != d_)
      throw DimensionError("apply: expected a " + std::to_string(d_) + "x" +
                           std::to_string(d_) + " matrix");
    CMatrix y(d_, d_);
    Eigen::Map<VectorC>(y.data(), d_ * d_) =
        rep_ * Eigen::Map<const VectorC>(x.data(), d_ * d_);
    return y;
  }

  CMatrix operator()(const CMatrix& x) const { return apply(x); }

  /// Composition: (a * b)(x) = a(b(x)).
  friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
    if (a.d_ != b.d_) throw DimensionError("compose: dimension mismatch");
    return SuperOperator(a.d_, a.rep_ * b.rep_);
  }

  friend bool operator==(const SuperOperator& a, const SuperOperator& b) {
    return a.d_ == b.d_ && a.rep_ == b.rep_;
  }

 private:
  Index d_;
  CMatrix rep_;
};

inline VectorC vec(const CMatrix& x) {
  return Eigen::Map<const VectorC>(x.data(), x.size());
}

inline CMatrix unvec(const VectorC& v, Index d) {
  if (v.size() != d * d) throw DimensionError("unvec: length is not d^2");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

inline SuperOperator identity_map(Index d) {
  return SuperOperator(d, CMatrix::Identity(d * d, d * d));
}

/// x -> a x b.
inline SuperOperator sandwich_map(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DimensionError("sandwich_map: operands must be square of equal size");
  const Index d = a.rows();
  CMatrix rep(d * d, d * d);
  const CMatrix bt = b.transpose();
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) rep.block(r * d, c * d, d, d) = bt(r, c) * a;
  return SuperOperator(d, std::move(rep));
}

/// x -> x^T (positive, not completely positive for d >= 2).
inline SuperOperator transpose_map(Index d) {
  CMatrix rep = CMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) rep(j + i * d, i + j * d) = 1.0;
  return SuperOperator(d, std::move(rep));
}

/// x -> mask o x.
inline SuperOperator schur_mask_map(const CMatrix& mask) {
  if (mask.rows() != mask.cols()) throw DimensionError("schur_mask_map: mask not square");
  const Index d = mask.rows();
  CMatrix rep = vec(mask).asDiagonal();
  return SuperOperator(d, std::move(rep));
}

/// P(x)_ij = sum_{k,l} sqrt(p_ik p_jl) x_kl, i.e. P(x) = Q x Q^T with
/// Q_ik = sqrt(p_ik).
inline SuperOperator entangled_P(const StochasticMatrix& pi) {
  const CMatrix q = pi.matrix().cwiseSqrt().cast<Complex>();
  return sandwich_map(q, q.transpose());
}

/// Psi(x) = 1 o P(x): the diagonal of the entangled operator.
inline SuperOperator entangled_psi(const StochasticMatrix& pi) {
  return schur_mask_map(identity(pi.dim())) * entangled_P(pi);
}

/// Adjoint with respect to the Hilbert-Schmidt pairing.
inline SuperOperator adjoint(const SuperOperator& s) {
  return SuperOperator(s.dim(), s.rep().adjoint());
}

/// Unnormalized Choi matrix sum_ij e_ij (x) T(e_ij); block (i, j) is T(e_ij).
inline CMatrix choi(const SuperOperator& s) {
  const Index d = s.dim();
  CMatrix c(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      c.block(i * d, j * d, d, d) = s.apply(matrix_unit(d, i, j));
  return c;
}

inline bool is_completely_positive(const SuperOperator& s,
                                   double tol = kDefaultTol) {
  return is_psd(choi(s), tol);
}

struct MarkovReport {
  bool unital = false;
  double unital_residual = 0.0;
  int positivity_samples = 0;
  int positivity_violations = 0;
  double worst_negative_eigenvalue = 0.0;  // min over samples, capped at 0

  bool positive_on_samples() const { return positivity_violations == 0; }
  bool is_markov() const { return unital && positive_on_samples(); }
};

/// Haar-distributed unit vector (normalized complex Gaussian).
template <class Rng>
VectorC random_unit_vector(Index d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorC v(d);
  for (Index i = 0; i < d; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

/// Unitality residual plus sampled positivity on rank-one projectors vv^*
/// and the diagonal matrix units.
inline MarkovReport check_markov(const SuperOperator& s, int n_samples,
                                 std::uint64_t seed, double tol = kDefaultTol) {
  if (n_samples < 1) throw InvalidArgument("check_markov: n_samples must be >= 1");
  const Index d = s.dim();
  MarkovReport r;
  r.unital_residual = spectral_norm(s.apply(identity(d)) - identity(d));
  r.unital = r.unital_residual <= tol;

  auto probe = [&](const CMatrix& x) {
    const CMatrix y = s.apply(x);
    const double lo = min_hermitian_eigenvalue(y);
    const bool herm = hermitian_defect(y) <= tol;
    ++r.positivity_samples;
    r.worst_negative_eigenvalue = std::min(r.worst_negative_eigenvalue, lo);
    if (!herm || lo < -tol) ++r.positivity_violations;
  };
  for (Index i = 0; i < d; ++i) probe(matrix_unit(d, i, i));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    const VectorC v = random_unit_vector(d, rng);
    probe(v * v.adjoint());
  }
  return r;
}

/// 1 o T(1) = 1.
inline bool is_schur_identity_preserving(const SuperOperator& s,
                                         double tol = kDefaultTol) {
  const Index d = s.dim();
  const CMatrix diag = schur_product(identity(d), s.apply(identity(d)));
  return spectral_norm(diag - identity(d)) <= tol;
}

/// Schur-identity-preserving with T(1) != 1.
inline bool is_entangled(const SuperOperator& s, double tol = kDefaultTol) {
  const Index d = s.dim();
  return is_schur_identity_preserving(s, tol) &&
         spectral_norm(s.apply(identity(d)) - identity(d)) > tol;
}

}  // namespace ergo
