#include "kaf/spectral.hpp"

#include "kaf/errors.hpp"

#include <lapacke.h>

#include <cmath>
#include <vector>

namespace kaf {

void symmetric_top_eigenpairs(MatrixXd &a, Index count, VectorXd &values,
                              MatrixXd &vectors) {
  const Index n = a.rows();
  if (a.cols() != n)
    throw ArgumentError("matrix must be square");
  if (count < 1 || count > n)
    throw ArgumentError("eigenpair count must lie in [1, n]");

  lapack_int found = 0;
  VectorXd w(n);
  MatrixXd z(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', ln, a.data(), ln, 0.0, 0.0,
      static_cast<lapack_int>(n - count + 1), ln, 0.0, &found, w.data(),
      z.data(), ln, support.data());
  if (info != 0 || found != count)
    throw Error("symmetric eigensolver failed (info " + std::to_string(info) +
                ")");

  values.resize(count);
  vectors.resize(n, count);
  for (Index i = 0; i < count; ++i) {
    values(i) = w(count - 1 - i);
    vectors.col(i) = z.col(count - 1 - i);
  }
}

namespace {

void fix_signs(MatrixXd &vectors) {
  for (Index i = 0; i < vectors.cols(); ++i) {
    auto col = vectors.col(i);
    const double cutoff = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Index j = 0; j < col.size(); ++j) {
      if (std::abs(col(j)) > cutoff) {
        if (col(j) < 0)
          col = -col;
        break;
      }
    }
  }
}

void check_rank(const VectorXd &values, double rank_tol) {
  const double floor =
      rank_tol > 0 ? rank_tol * std::max(values(0), 0.0) : 0.0;
  const Index ell = values.size();
  if (values(0) > 0 && values(ell - 1) > floor)
    return;
  Index usable = 0;
  while (usable < ell && values(usable) > floor && values(usable) > 0)
    ++usable;
  throw RankDeficiencyError(ell, usable);
}

} // namespace

SpectralBasis SpectralBasis::truncated(Index count) const {
  if (count < 1 || count > ell())
    throw ArgumentError("cannot truncate basis to " + std::to_string(count) +
                        " eigenpairs");
  return {lambdas.head(count), phis.leftCols(count), kernel};
}

BiorthogonalBasis BiorthogonalBasis::truncated(Index count) const {
  if (count < 1 || count > ell())
    throw ArgumentError("cannot truncate basis to " + std::to_string(count) +
                        " eigenpairs");
  return {etas.head(count),         xis.leftCols(count),
          xi_primes.leftCols(count), d,
          hat_phis.leftCols(count), kernel};
}

SpectralBasis eigendecompose(MatrixXd p, Index ell, double rank_tol) {
  return eigendecompose(std::move(p), nullptr, ell, rank_tol);
}

SpectralBasis eigendecompose(MatrixXd p,
                             std::shared_ptr<const NormalizedKernel> kernel,
                             Index ell, double rank_tol) {
  const Index n = p.rows();
  if (p.cols() != n || n == 0)
    throw ArgumentError("normalized matrix must be square and nonempty");
  if (ell < 1 || ell > n)
    throw ArgumentError("ell must lie in [1, n]");
  if (kernel && kernel->size() != n)
    throw ArgumentError("kernel does not match the matrix size");

  p *= 1.0 / static_cast<double>(n);
  SpectralBasis basis;
  symmetric_top_eigenpairs(p, ell, basis.lambdas, basis.phis);
  p.resize(0, 0);
  check_rank(basis.lambdas, rank_tol);
  basis.phis *= std::sqrt(static_cast<double>(n));
  fix_signs(basis.phis);
  basis.kernel = std::move(kernel);
  return basis;
}

VectorXd nystrom_psi(const SpectralBasis &basis, const RowVectorXd &x) {
  return nystrom_psi(basis, MatrixXd(x)).transpose();
}

MatrixXd nystrom_psi(const SpectralBasis &basis, const MatrixXd &queries) {
  if (!basis.kernel)
    throw ArgumentError("basis has no kernel for out-of-sample evaluation");
  const double inv_n = 1.0 / static_cast<double>(basis.size());
  const VectorXd scale = basis.lambdas.cwiseSqrt().cwiseInverse() * inv_n;
  return basis.kernel->apply(queries, basis.phis) * scale.asDiagonal();
}

namespace {

BiorthogonalBasis conjugate_decompose(const MatrixXd &k, const VectorXd &u,
                                      const VectorXd &v, double alpha,
                                      Index ell, double rank_tol) {
  const Index n = k.rows();
  if (ell < 1 || ell > n)
    throw ArgumentError("ell must lie in [1, n]");
  // khat_ij = d_i^(1/2) P_ij d_j^(-1/2) = K_ij / (s_i s_j),
  // s = v^(1/2) u^(alpha/2)
  const VectorXd u_alpha = u.array().pow(alpha).matrix();
  const VectorXd s_inv = (v.cwiseProduct(u_alpha)).cwiseSqrt().cwiseInverse();
  MatrixXd khat = s_inv.asDiagonal() * k * s_inv.asDiagonal();
  khat *= 1.0 / static_cast<double>(n);

  BiorthogonalBasis basis;
  symmetric_top_eigenpairs(khat, ell, basis.etas, basis.hat_phis);
  khat.resize(0, 0);
  check_rank(basis.etas, rank_tol);
  basis.hat_phis *= std::sqrt(static_cast<double>(n));
  fix_signs(basis.hat_phis);

  basis.d = v.cwiseQuotient(u_alpha);
  const VectorXd d_half = basis.d.cwiseSqrt();
  basis.xis = d_half.cwiseInverse().asDiagonal() * basis.hat_phis;
  basis.xi_primes = d_half.asDiagonal() * basis.hat_phis;
  return basis;
}

} // namespace

BiorthogonalBasis biorthogonal_decompose(const MatrixXd &k, double alpha,
                                         Index ell, double rank_tol) {
  detail::check_positive_square(k);
  const double inv_n = 1.0 / static_cast<double>(k.rows());
  const VectorXd u = k.rowwise().sum() * inv_n;
  const VectorXd v = (k * u.array().pow(alpha).inverse().matrix()) * inv_n;
  return conjugate_decompose(k, u, v, alpha, ell, rank_tol);
}

BiorthogonalBasis
biorthogonal_decompose(std::shared_ptr<const NormalizedKernel> kernel,
                       Index ell, double rank_tol) {
  if (!kernel || kernel->mode() != NormalizationMode::diffusion)
    throw ArgumentError("biorthogonal basis needs a diffusion-mode kernel");
  BiorthogonalBasis basis =
      conjugate_decompose(kernel->base().matrix(), kernel->u(), kernel->v(),
                          kernel->alpha(), ell, rank_tol);
  basis.kernel = std::move(kernel);
  return basis;
}

MatrixXd nystrom_theta(const BiorthogonalBasis &basis,
                       const MatrixXd &queries) {
  if (!basis.kernel)
    throw ArgumentError("basis has no kernel for out-of-sample evaluation");
  const double inv_n = 1.0 / static_cast<double>(basis.size());
  const VectorXd scale = basis.etas.cwiseSqrt().cwiseInverse() * inv_n;
  return basis.kernel->apply(queries, basis.xis) * scale.asDiagonal();
}

double nystrom_nonsym(const BiorthogonalBasis &basis, const RowVectorXd &x,
                      const VectorXd &coeffs) {
  if (coeffs.size() != basis.ell())
    throw ArgumentError("coefficient count does not match the basis");
  const RowVectorXd theta = nystrom_theta(basis, MatrixXd(x)).row(0);
  return theta.dot(coeffs.cwiseQuotient(basis.etas.cwiseSqrt()));
}

} // namespace kaf
