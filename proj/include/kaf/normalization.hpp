#pragma once

#include "kaf/errors.hpp"
#include "kaf/kernels.hpp"
#include "kaf/types.hpp"

#include <Eigen/Core>

#include <string>

namespace kaf {

enum class NormalizationMode { none, symmetric_markov, diffusion };

std::string to_string(NormalizationMode mode);
NormalizationMode parse_normalization_mode(const std::string &name);

template <typename Scalar> struct MarkovNormalization {
  Matrix<Scalar> p;
  Vector<Scalar> u;
  Vector<Scalar> v;
};

template <typename Scalar> struct DiffusionNormalization {
  Matrix<Scalar> p;
  Vector<Scalar> u;
  Vector<Scalar> v;
  Vector<Scalar> d;
};

namespace detail {
template <typename Derived>
void check_positive_square(const Eigen::MatrixBase<Derived> &k) {
  if (k.rows() != k.cols() || k.rows() == 0)
    throw ArgumentError("kernel matrix must be square and nonempty");
  if (!(k.array() > 0).all())
    throw ArgumentError("kernel matrix entries must be strictly positive");
}
} // namespace detail

/// Bistochastic normalization of a symmetric positive kernel matrix:
///   u_i = (1/n) sum_j K_ij,   v_i = (1/n) sum_j K_ij / u_j,
///   P_ij = (1/n) sum_k K_ik K_kj / (u_i v_k u_j).
/// P is formed as S^T S / n with S = diag(v)^(-1/2) K diag(u)^(-1), so it is
/// symmetric to the bit and positive semidefinite.
template <typename Derived>
MarkovNormalization<typename Derived::Scalar>
markov_normalize(const Eigen::MatrixBase<Derived> &k) {
  using Scalar = typename Derived::Scalar;
  detail::check_positive_square(k);
  const Index n = k.rows();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  MarkovNormalization<Scalar> out;
  out.u = k.rowwise().sum() * inv_n;
  out.v = (k * out.u.cwiseInverse()) * inv_n;

  Matrix<Scalar> s = out.v.cwiseSqrt().cwiseInverse().asDiagonal() *
                     k.derived() * out.u.cwiseInverse().asDiagonal();
  out.p = Matrix<Scalar>::Zero(n, n);
  out.p.template selfadjointView<Eigen::Lower>().rankUpdate(s.transpose(),
                                                            inv_n);
  out.p.template triangularView<Eigen::StrictlyUpper>() = out.p.transpose();
  return out;
}

/// Diffusion-maps normalization with exponent alpha:
///   u_i = (1/n) sum_j K_ij,   v_i = (1/n) sum_j K_ij / u_j^alpha,
///   P_ij = K_ij / (v_i u_j^alpha),   d_i = v_i / u_i^alpha,
/// so that rows of P average to 1 and d_i P_ij = d_j P_ji.
template <typename Derived>
DiffusionNormalization<typename Derived::Scalar>
diffusion_normalize(const Eigen::MatrixBase<Derived> &k,
                    typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  detail::check_positive_square(k);
  const Index n = k.rows();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  DiffusionNormalization<Scalar> out;
  out.u = k.rowwise().sum() * inv_n;
  const Vector<Scalar> u_alpha = out.u.array().pow(alpha).matrix();
  out.v = (k * u_alpha.cwiseInverse()) * inv_n;
  out.p = out.v.cwiseInverse().asDiagonal() * k.derived() *
          u_alpha.cwiseInverse().asDiagonal();
  out.d = out.v.cwiseQuotient(u_alpha);
  return out;
}

/// A base kernel together with the normalization functions u, v (and d in
/// diffusion mode) evaluated on the training measure. Out-of-sample rows are
/// computed with the same quadrature against the fixed training points.
class NormalizedKernel {
public:
  NormalizedKernel() = default;

  /// Rebuilds a fitted kernel from stored normalization functions.
  NormalizedKernel(ResolvedKernel base, NormalizationMode mode, double alpha,
                   VectorXd u, VectorXd v);

  NormalizationMode mode() const { return mode_; }
  double alpha() const { return alpha_; }
  const ResolvedKernel &base() const { return base_; }
  Index size() const { return base_.size(); }
  const VectorXd &u() const { return u_; }
  const VectorXd &v() const { return v_; }
  /// Detailed-balance density v/u^alpha (diffusion mode), ones otherwise.
  const VectorXd &d() const { return d_; }

  /// Normalized kernel values between x and every training point.
  VectorXd oos_row(const RowVectorXd &x) const;

  /// Q x n block of normalized out-of-sample rows.
  MatrixXd oos_rows(const MatrixXd &queries) const;

  /// oos_rows(queries) * basis, evaluated without forming the Q x n block
  /// for all queries at once.
  MatrixXd apply(const MatrixXd &queries, const MatrixXd &basis) const;

private:
  MatrixXd normalize_rows(const MatrixXd &raw) const;

  ResolvedKernel base_;
  NormalizationMode mode_ = NormalizationMode::none;
  double alpha_ = 0.0;
  VectorXd u_;
  VectorXd v_;
  VectorXd d_;
  VectorXd u_alpha_;
  // diag(v)^-1 K diag(u)^-1, symmetric mode only.
  MatrixXd middle_;
};

/// Fitted kernel plus its n x n training matrix.
struct NormalizedFit {
  NormalizedKernel kernel;
  MatrixXd p;
};

NormalizedFit normalize(const ResolvedKernel &base, NormalizationMode mode,
                        double alpha = 0.0);

} // namespace kaf
