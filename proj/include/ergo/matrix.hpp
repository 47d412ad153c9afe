#pragma once

// Dense complex matrices over M_d(C): Schur products, norms, PSD tests,
// SVD-based null spaces and the plain-text matrix file format.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "ergo/error.hpp"

namespace ergo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Relative rank threshold shared by every SVD-based decision in the library.
inline constexpr double kDefaultTol = 1e-9;

inline CMatrix identity(Index d) { return CMatrix::Identity(d, d); }

/// All-ones matrix; the unit of the Schur product.
inline CMatrix ones(Index d) { return CMatrix::Ones(d, d); }

/// Matrix unit e_ij (0-based indices).
inline CMatrix matrix_unit(Index d, Index i, Index j) {
  if (i < 0 || j < 0 || i >= d || j >= d)
    throw InvalidArgument("matrix_unit: index out of range");
  CMatrix e = CMatrix::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

inline void require_same_shape(const CMatrix& x, const CMatrix& y,
                               const char* what) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs " +
                         std::to_string(y.rows()) + "x" +
                         std::to_string(y.cols()) + ")");
}

/// Entrywise product (x o y)_ij = x_ij * y_ij.
inline CMatrix schur_product(const CMatrix& x, const CMatrix& y) {
  require_same_shape(x, y, "schur_product");
  return x.cwiseProduct(y);
}

/// Diagonal matrix carrying `a` on its diagonal.
inline CMatrix diag_embed(const VectorC& a) { return a.asDiagonal(); }

/// Largest singular value (the C*-norm on M_d).
inline double spectral_norm(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(x);
  return svd.singularValues()(0);
}

/// Sum of singular values (the dual norm under the trace pairing).
inline double trace_norm(const CMatrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(x);
  return svd.singularValues().sum();
}

/// Hilbert-Schmidt pairing trace(x^* y).
inline Complex hs_inner(const CMatrix& x, const CMatrix& y) {
  require_same_shape(x, y, "hs_inner");
  return (x.adjoint() * y).trace();
}

inline double hermitian_defect(const CMatrix& x) {
  return spectral_norm(x - x.adjoint());
}

/// Smallest eigenvalue of the Hermitian part (x + x^*)/2.
inline double min_hermitian_eigenvalue(const CMatrix& x) {
  const CMatrix h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const CMatrix& x, double tol = kDefaultTol) {
  if (x.rows() != x.cols()) return false;
  if (hermitian_defect(x) > tol) return false;
  return min_hermitian_eigenvalue(x) >= -tol;
}

/// Orthonormal bases of the range and of the kernel of a matrix, split by
/// the threshold tau = tol * max(sigma_max, 1).
struct RankSplit {
  CMatrix range;   // columns: orthonormal basis of the column space
  CMatrix kernel;  // columns: orthonormal basis of the null space
  Index rank = 0;
  double threshold = 0.0;
};

inline RankSplit rank_split(const CMatrix& m, double tol = kDefaultTol) {
  RankSplit out;
  if (m.size() == 0) {
    out.kernel = CMatrix::Identity(m.cols(), m.cols());
    out.range = CMatrix(m.rows(), 0);
    return out;
  }
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  out.threshold = tol * std::max(sv(0), 1.0);
  Index r = 0;
  while (r < sv.size() && sv(r) > out.threshold) ++r;
  out.rank = r;
  out.range = svd.matrixU().leftCols(r);
  out.kernel = svd.matrixV().rightCols(m.cols() - r);
  return out;
}

inline Index matrix_rank(const CMatrix& m, double tol = kDefaultTol) {
  return rank_split(m, tol).rank;
}

inline std::vector<VectorC> columns_of(const CMatrix& m) {
  std::vector<VectorC> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Index c = 0; c < m.cols(); ++c) out.emplace_back(m.col(c));
  return out;
}

/// Orthonormal basis of {v : ||M v|| <= tau ||M||}.
inline std::vector<VectorC> null_space(const CMatrix& m,
                                       double tol = kDefaultTol) {
  return columns_of(rank_split(m, tol).kernel);
}

/// Orthonormal basis (as columns) of the span of the given columns.
inline CMatrix orthonormal_span(const CMatrix& columns,
                                double tol = kDefaultTol) {
  return rank_split(columns, tol).range;
}

/// Orthogonal projector onto the span of orthonormal columns.
inline CMatrix projector(const CMatrix& orthonormal_columns) {
  return orthonormal_columns * orthonormal_columns.adjoint();
}

inline bool all_finite(const CMatrix& x) { return x.allFinite(); }

// --- text I/O --------------------------------------------------------------

/// Shortest-text-safe, locale-independent decimal with 17 significant digits.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("not a decimal number: '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw ParseError("non-finite value: '" + std::string(tok) + "'");
  return v;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < line.size()) {
    while (i < line.size() && is_ws(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_ws(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool blank(std::string_view line) { return split_ws(line).empty(); }

}  // namespace detail

/// Reads the matrix text format: line 1 is the dimension d, followed by d
/// rows of 2d decimals (re im re im ...). Trailing blank lines are allowed.
inline CMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix: empty input");
  const auto head = detail::split_ws(line);
  if (head.size() != 1) throw ParseError("matrix: first line must hold only the dimension");
  long long d = 0;
  {
    auto [ptr, ec] = std::from_chars(head[0].data(),
                                     head[0].data() + head[0].size(), d);
    if (ec != std::errc{} || ptr != head[0].data() + head[0].size() || d <= 0)
      throw ParseError("matrix: invalid dimension '" + std::string(head[0]) + "'");
  }
  if (d > 4096) throw ParseError("matrix: dimension too large");
  CMatrix x(d, d);
  for (long long i = 0; i < d; ++i) {
    if (!std::getline(in, line))
      throw ParseError("matrix: expected " + std::to_string(d) + " rows, got " +
                       std::to_string(i));
    const auto toks = detail::split_ws(line);
    if (toks.size() != static_cast<std::size_t>(2 * d))
      throw ParseError("matrix: row " + std::to_string(i + 1) + " has " +
                       std::to_string(toks.size()) + " numbers, expected " +
                       std::to_string(2 * d));
    for (long long j = 0; j < d; ++j)
      x(i, j) = Complex(parse_double(toks[2 * j]), parse_double(toks[2 * j + 1]));
  }
  while (std::getline(in, line))
    if (!detail::blank(line)) throw ParseError("matrix: trailing content after last row");
  return x;
}

inline CMatrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_matrix(in);
}

inline CMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file: " + path);
  return read_matrix(in);
}

inline void write_matrix(std::ostream& out, const CMatrix& x) {
  if (x.rows() != x.cols()) throw DimensionError("write_matrix: not square");
  out << x.rows() << '\n';
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(x(i, j).real()) << ' ' << format_double(x(i, j).imag());
    }
    out << '\n';
  }
}

}  // namespace ergo
