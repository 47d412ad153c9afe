#pragma once

// Fixed-point subspaces ker(T - I) of superoperators, right fixed vectors of
// stochastic matrices, and subalgebra tests.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "ergo/matrix.hpp"
#include "ergo/superop.hpp"

namespace ergo {

/// Subspace of M_d(C) with a Hilbert-Schmidt orthonormal basis.
class FixedSpace {
 public:
  FixedSpace(Index d, CMatrix vec_basis) : d_(d), basis_(std::move(vec_basis)) {
    if (basis_.rows() != d * d) throw DimensionError("FixedSpace: basis vectors must have length d^2");
  }

  /// Orthonormalized span of arbitrary matrices.
  static FixedSpace span_of(Index d, const std::vector<CMatrix>& mats,
                            double tol = kDefaultTol) {
    CMatrix cols(d * d, static_cast<Index>(mats.size()));
    for (std::size_t k = 0; k < mats.size(); ++k) {
      if (mats[k].rows() != d || mats[k].cols() != d)
        throw DimensionError("FixedSpace::span_of: matrix has wrong size");
      cols.col(static_cast<Index>(k)) = vec(mats[k]);
    }
    return FixedSpace(d, orthonormal_span(cols, tol));
  }

  Index ambient_dim() const { return d_; }
  Index size() const { return basis_.cols(); }

  /// Basis vectors as columns of a d^2 x m matrix.
  const CMatrix& vec_basis() const { return basis_; }

  CMatrix basis(Index k) const { return unvec(basis_.col(k), d_); }

  std::vector<CMatrix> basis() const {
    std::vector<CMatrix> out;
    for (Index k = 0; k < size(); ++k) out.push_back(basis(k));
    return out;
  }

  /// Orthogonal projector onto the space, as a d^2 x d^2 matrix.
  CMatrix projector() const { return ergo::projector(basis_); }

  CMatrix project(const CMatrix& x) const {
    return unvec(basis_ * (basis_.adjoint() * vec(x)), d_);
  }

  /// Frobenius distance from x to the space.
  double residual(const CMatrix& x) const { return (x - project(x)).norm(); }

 private:
  Index d_;
  CMatrix basis_;
};

/// Orthonormal basis of a subspace of C^d.
struct VectorFixedSpace {
  Index dim = 0;
  CMatrix basis;  // d x m, orthonormal columns

  Index size() const { return basis.cols(); }
  CMatrix projector() const { return ergo::projector(basis); }
};

/// Spectral-norm distance between orthogonal projectors.
inline double subspace_distance(const CMatrix& orthonormal_a,
                                const CMatrix& orthonormal_b) {
  return spectral_norm(projector(orthonormal_a) - projector(orthonormal_b));
}

inline double subspace_distance(const FixedSpace& a, const FixedSpace& b) {
  return subspace_distance(a.vec_basis(), b.vec_basis());
}

inline CMatrix minus_identity(const SuperOperator& s) {
  const Index m = s.dim() * s.dim();
  return s.rep() - CMatrix::Identity(m, m);
}

/// A^T = {x : T x = x}.
inline FixedSpace fixed_space(const SuperOperator& s, double tol = kDefaultTol) {
  return FixedSpace(s.dim(), rank_split(minus_identity(s), tol).kernel);
}

/// Fix(Pi) = {psi in C^d : Pi psi = psi} (right fixed vectors).
inline VectorFixedSpace fix_stochastic(const StochasticMatrix& pi,
                                       double tol = kDefaultTol) {
  const Index d = pi.dim();
  const CMatrix m = pi.matrix().cast<Complex>() - CMatrix::Identity(d, d);
  return VectorFixedSpace{d, rank_split(m, tol).kernel};
}

struct LemmaCheck {
  bool holds = false;
  double distance = 0.0;
  Index fixed_dim = 0;   // dim of the fixed space of Psi
  Index vector_dim = 0;  // dim Fix(Pi)
};

/// Compares the fixed space of Psi with the diagonal embeddings of Fix(Pi).
inline LemmaCheck verify_lemma_fixed(const StochasticMatrix& pi,
                                     double tol = 1e-8,
                                     double rank_tol = kDefaultTol) {
  const Index d = pi.dim();
  const FixedSpace lhs = fixed_space(entangled_psi(pi), rank_tol);
  const VectorFixedSpace fix = fix_stochastic(pi, rank_tol);
  std::vector<CMatrix> embedded;
  for (Index k = 0; k < fix.size(); ++k) embedded.push_back(diag_embed(fix.basis.col(k)));
  const FixedSpace rhs = FixedSpace::span_of(d, embedded, rank_tol);
  LemmaCheck out;
  out.fixed_dim = lhs.size();
  out.vector_dim = fix.size();
  out.distance = subspace_distance(lhs, rhs);
  out.holds = out.distance <= tol;
  return out;
}

struct SubalgebraCheck {
  bool closed = false;
  double worst_residual = 0.0;
  std::optional<std::pair<Index, Index>> witness;  // basis indices (i, j)
};

/// Closure under multiplication: every b_i b_j stays in the span within
/// tol * max(1, ||b_i b_j||_F).
inline SubalgebraCheck is_subalgebra(const FixedSpace& f, double tol = kDefaultTol) {
  SubalgebraCheck out;
  out.closed = true;
  const auto basis = f.basis();
  for (Index i = 0; i < f.size(); ++i) {
    for (Index j = 0; j < f.size(); ++j) {
      const CMatrix prod = basis[i] * basis[j];
      const double res = f.residual(prod);
      if (res > out.worst_residual) out.worst_residual = res;
      if (res > tol * std::max(1.0, prod.norm()) && !out.witness) {
        out.closed = false;
        out.witness = std::make_pair(i, j);
      }
    }
  }
  return out;
}

}  // namespace ergo
