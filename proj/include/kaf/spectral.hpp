#pragma once

#include "kaf/normalization.hpp"
#include "kaf/types.hpp"

#include <memory>

namespace kaf {

/// Leading eigenpairs of f -> (1/n) P f. Columns of `phis` satisfy
/// (1/n) phi_i . phi_k = delta_ik.
struct SpectralBasis {
  VectorXd lambdas;
  MatrixXd phis;
  std::shared_ptr<const NormalizedKernel> kernel;

  Index size() const { return phis.rows(); }
  Index ell() const { return lambdas.size(); }

  /// First `ell` eigenpairs; shares the kernel handle.
  SpectralBasis truncated(Index ell) const;
};

/// Eigenpairs of the non-symmetric diffusion operator obtained through its
/// symmetric conjugate. xis are right eigenvectors, xi_primes the dual
/// basis: (1/n) xi'_i . xi_k = delta_ik.
struct BiorthogonalBasis {
  VectorXd etas;
  MatrixXd xis;
  MatrixXd xi_primes;
  VectorXd d;
  MatrixXd hat_phis;
  std::shared_ptr<const NormalizedKernel> kernel;

  Index size() const { return xis.rows(); }
  Index ell() const { return etas.size(); }

  BiorthogonalBasis truncated(Index ell) const;
};

/// Top `count` eigenpairs of a symmetric matrix (lower triangle referenced),
/// eigenvalues in decreasing order and unit-norm eigenvectors. The matrix is
/// overwritten.
void symmetric_top_eigenpairs(MatrixXd &a, Index count, VectorXd &values,
                              MatrixXd &vectors);

/// Leading `ell` eigenpairs of P/n. Eigenvalues at or below
/// rank_tol * lambda_1 (or nonpositive ones when rank_tol is 0) raise
/// RankDeficiencyError.
SpectralBasis eigendecompose(MatrixXd p, Index ell, double rank_tol = 1e-12);
SpectralBasis eigendecompose(MatrixXd p,
                             std::shared_ptr<const NormalizedKernel> kernel,
                             Index ell, double rank_tol = 1e-12);

/// psi_i(x) = (1/(n lambda_i^(1/2))) sum_j k(x)_j phi_i(x_j).
VectorXd nystrom_psi(const SpectralBasis &basis, const RowVectorXd &x);
/// One row of psi values per query row.
MatrixXd nystrom_psi(const SpectralBasis &basis, const MatrixXd &queries);

BiorthogonalBasis biorthogonal_decompose(const MatrixXd &k, double alpha,
                                         Index ell, double rank_tol = 1e-12);
/// Same decomposition attached to a diffusion-mode kernel for out-of-sample
/// evaluation.
BiorthogonalBasis
biorthogonal_decompose(std::shared_ptr<const NormalizedKernel> kernel,
                       Index ell, double rank_tol = 1e-12);

/// theta_i(x) = (1/eta_i^(1/2)) (1/n) sum_j w(x)_j xi_i(x_j).
MatrixXd nystrom_theta(const BiorthogonalBasis &basis,
                       const MatrixXd &queries);

/// sum_i coeffs_i / eta_i^(1/2) theta_i(x)
double nystrom_nonsym(const BiorthogonalBasis &basis, const RowVectorXd &x,
                      const VectorXd &coeffs);

} // namespace kaf
