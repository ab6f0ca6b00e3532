#pragma once

#include "kaf/dataset.hpp"
#include "kaf/normalization.hpp"
#include "kaf/spectral.hpp"
#include "kaf/types.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace kaf {

using ForecastBasis = std::variant<SpectralBasis, BiorthogonalBasis>;

/// Eigenvalues of the basis (lambda or eta).
const VectorXd &basis_eigenvalues(const ForecastBasis &basis);
/// Vectors that project responses onto the basis (phi or xi').
const MatrixXd &analysis_vectors(const ForecastBasis &basis);
/// Vectors that are extended out of sample (phi or xi).
const MatrixXd &synthesis_vectors(const ForecastBasis &basis);
const NormalizedKernel &basis_kernel(const ForecastBasis &basis);
std::shared_ptr<const NormalizedKernel>
basis_kernel_handle(const ForecastBasis &basis);
Index basis_size(const ForecastBasis &basis);
Index basis_ell(const ForecastBasis &basis);
ForecastBasis truncate_basis(const ForecastBasis &basis, Index ell);

/// KPCR forecast model. Column k of `alphas` holds the coefficients
/// alpha_i = (1/n) a_i . y_tau for lead `leads[k]` (in steps of dt).
struct ForecastModel {
  ForecastBasis basis;
  std::vector<Index> leads;
  MatrixXd alphas;
  /// Coefficients of the squared-residual expansion; empty without an
  /// error model.
  MatrixXd variance_alphas;
  ResponseTransform transform;
  /// Moments of the transformed training responses.
  Moments response_stats;
  double dt = 1.0;

  Index size() const { return basis_size(basis); }
  Index ell() const { return basis_ell(basis); }
  Index dim() const { return basis_kernel(basis).base().dim(); }
  Index delays() const { return basis_kernel(basis).base().delays(); }
  bool has_variance() const { return variance_alphas.size() > 0; }
  double tau(Index k) const { return static_cast<double>(leads.at(k)) * dt; }
  /// Position of lead q in `leads`; throws ArgumentError when absent.
  Index lead_index(Index q) const;
};

/// Coefficients for each lead from the analog vectors of `ds`, whose
/// covariates must be the ones the basis was trained on.
ForecastModel fit_kpcr(ForecastBasis basis, const TimeSeriesDataset &ds,
                       const std::vector<Index> &leads,
                       const ResponseTransform &transform = {});

/// (1/n) w(x) . s_i for every query row and basis vector.
MatrixXd kernel_projection(const ForecastModel &model,
                           const MatrixXd &queries);

/// Q x L forecasts sum_i alpha_i / lambda_i^(1/2) psi_i(x).
MatrixXd predict_kpcr(const ForecastModel &model, const MatrixXd &queries);
double predict_kpcr(const ForecastModel &model, const RowVectorXd &x,
                    Index lead_index);

/// Spectrally regularized forecasts sum_i alpha_i / (lambda_i + eta)
/// (1/n) w(x) . s_i; eta = 0 gives KPCR.
MatrixXd predict_hybrid(const ForecastModel &model, double eta,
                        const MatrixXd &queries);
double predict_hybrid(const ForecastModel &model, double eta,
                      const RowVectorXd &x, Index lead_index);

/// Forecasts at the training points themselves (n x L).
MatrixXd in_sample_forecast(const ForecastModel &model);

/// Adds an error model fitted to the squared in-sample residuals
/// beta_j = |y_{j+q} - f(x_j)|^2 (zero past the end of the record).
ForecastModel with_conditional_variance(ForecastModel model,
                                        const TimeSeriesDataset &ds);

/// Q x L error estimates |s(x)|^(1/2).
MatrixXd predict_error(const ForecastModel &model, const MatrixXd &queries);

/// KPCR value clipped to [0, 1]; needs an indicator transform.
MatrixXd predict_probability(const ForecastModel &model,
                             const MatrixXd &queries);
double predict_probability(const ForecastModel &model, const RowVectorXd &x,
                           Index lead_index);

struct ForecastOutput {
  MatrixXd mean;  // Q x L
  MatrixXd error; // Q x L, empty without an error model
};

/// Forecasts and error bars sharing one kernel projection. Indicator
/// models return clipped probabilities.
ForecastOutput predict(const ForecastModel &model, const MatrixXd &queries,
                       double eta = 0.0);

/// Kernel ridge regression with G = P/n: (P/n + eta I) c = y_tau and
/// f(x) = (1/n) w(x) . c.
struct KrrModel {
  std::shared_ptr<const NormalizedKernel> kernel;
  std::vector<Index> leads;
  MatrixXd coefficients; // n x L
  double eta = 0.0;
  ResponseTransform transform;
};

KrrModel fit_krr(std::shared_ptr<const NormalizedKernel> kernel,
                 const MatrixXd &p, const TimeSeriesDataset &ds,
                 const std::vector<Index> &leads, double eta,
                 const ResponseTransform &transform = {});
MatrixXd predict_krr(const KrrModel &model, const MatrixXd &queries);

/// Single-shot form on explicit matrices: `p` is the n x n training matrix
/// and `row` the kernel row of the query.
double fit_predict_krr(const MatrixXd &p, const TimeSeriesDataset &ds,
                       Index q, double eta, const VectorXd &row);

} // namespace kaf
