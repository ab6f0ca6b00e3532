#include "kaf/forecast.hpp"

#include "kaf/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace kaf {

const VectorXd &basis_eigenvalues(const ForecastBasis &basis) {
  if (const auto *s = std::get_if<SpectralBasis>(&basis))
    return s->lambdas;
  return std::get<BiorthogonalBasis>(basis).etas;
}

const MatrixXd &analysis_vectors(const ForecastBasis &basis) {
  if (const auto *s = std::get_if<SpectralBasis>(&basis))
    return s->phis;
  return std::get<BiorthogonalBasis>(basis).xi_primes;
}

const MatrixXd &synthesis_vectors(const ForecastBasis &basis) {
  if (const auto *s = std::get_if<SpectralBasis>(&basis))
    return s->phis;
  return std::get<BiorthogonalBasis>(basis).xis;
}

std::shared_ptr<const NormalizedKernel>
basis_kernel_handle(const ForecastBasis &basis) {
  return std::visit([](const auto &b) { return b.kernel; }, basis);
}

const NormalizedKernel &basis_kernel(const ForecastBasis &basis) {
  const auto *k =
      std::visit([](const auto &b) { return b.kernel.get(); }, basis);
  if (!k)
    throw ArgumentError("basis has no kernel for out-of-sample evaluation");
  return *k;
}

Index basis_size(const ForecastBasis &basis) {
  return std::visit([](const auto &b) { return b.size(); }, basis);
}

Index basis_ell(const ForecastBasis &basis) {
  return std::visit([](const auto &b) { return b.ell(); }, basis);
}

ForecastBasis truncate_basis(const ForecastBasis &basis, Index ell) {
  return std::visit([ell](const auto &b) { return ForecastBasis(b.truncated(ell)); },
                    basis);
}

Index ForecastModel::lead_index(Index q) const {
  const auto it = std::find(leads.begin(), leads.end(), q);
  if (it == leads.end())
    throw ArgumentError("lead " + std::to_string(q) + " is not in the model");
  return static_cast<Index>(it - leads.begin());
}

ForecastModel fit_kpcr(ForecastBasis basis, const TimeSeriesDataset &ds,
                       const std::vector<Index> &leads,
                       const ResponseTransform &transform) {
  const Index n = basis_size(basis);
  if (ds.size() != n)
    throw ArgumentError("dataset size does not match the basis");
  if (leads.empty())
    throw ArgumentError("at least one lead is required");

  ForecastModel model;
  model.leads = leads;
  model.transform = transform;
  model.dt = ds.dt;
  const VectorXd transformed = transform.apply(ds.responses);
  model.response_stats = empirical_moments(transformed);

  MatrixXd shifted(n, static_cast<Index>(leads.size()));
  for (std::size_t k = 0; k < leads.size(); ++k) {
    if (leads[k] < 0 || leads[k] > n)
      throw ArgumentError("lead " + std::to_string(leads[k]) +
                          " is outside [0, n]");
    shifted.col(static_cast<Index>(k)) = shift_sequence(transformed, leads[k]);
  }
  model.alphas = analysis_vectors(basis).transpose() * shifted /
                 static_cast<double>(n);
  model.basis = std::move(basis);
  return model;
}

MatrixXd kernel_projection(const ForecastModel &model,
                           const MatrixXd &queries) {
  const NormalizedKernel &kernel = basis_kernel(model.basis);
  return kernel.apply(queries, synthesis_vectors(model.basis)) /
         static_cast<double>(model.size());
}

namespace {

MatrixXd scaled_coefficients(const MatrixXd &alphas, const VectorXd &values,
                             double eta) {
  const VectorXd denom = (values.array() + eta).matrix();
  return denom.cwiseInverse().asDiagonal() * alphas;
}

void check_lead_index(const ForecastModel &model, Index k) {
  if (k < 0 || k >= static_cast<Index>(model.leads.size()))
    throw ArgumentError("lead index out of range");
}

} // namespace

MatrixXd predict_kpcr(const ForecastModel &model, const MatrixXd &queries) {
  return predict_hybrid(model, 0.0, queries);
}

double predict_kpcr(const ForecastModel &model, const RowVectorXd &x,
                    Index lead_index) {
  return predict_hybrid(model, 0.0, x, lead_index);
}

MatrixXd predict_hybrid(const ForecastModel &model, double eta,
                        const MatrixXd &queries) {
  if (eta < 0)
    throw ArgumentError("regularization parameter must be nonnegative");
  return kernel_projection(model, queries) *
         scaled_coefficients(model.alphas, basis_eigenvalues(model.basis), eta);
}

double predict_hybrid(const ForecastModel &model, double eta,
                      const RowVectorXd &x, Index lead_index) {
  check_lead_index(model, lead_index);
  return predict_hybrid(model, eta, MatrixXd(x))(0, lead_index);
}

MatrixXd in_sample_forecast(const ForecastModel &model) {
  return synthesis_vectors(model.basis) * model.alphas;
}

ForecastModel with_conditional_variance(ForecastModel model,
                                        const TimeSeriesDataset &ds) {
  const Index n = model.size();
  if (ds.size() != n)
    throw ArgumentError("dataset size does not match the model");
  const VectorXd transformed = model.transform.apply(ds.responses);
  const MatrixXd fitted = in_sample_forecast(model);

  MatrixXd beta = MatrixXd::Zero(n, static_cast<Index>(model.leads.size()));
  for (std::size_t k = 0; k < model.leads.size(); ++k) {
    const Index q = model.leads[k];
    const auto col = static_cast<Index>(k);
    for (Index j = 0; j + q < n; ++j) {
      const double r = transformed(j + q) - fitted(j, col);
      beta(j, col) = r * r;
    }
  }
  model.variance_alphas = analysis_vectors(model.basis).transpose() * beta /
                          static_cast<double>(n);
  return model;
}

namespace {

MatrixXd error_from_projection(const ForecastModel &model,
                               const MatrixXd &projection) {
  const MatrixXd s =
      projection * scaled_coefficients(model.variance_alphas,
                                       basis_eigenvalues(model.basis), 0.0);
  return s.cwiseAbs().cwiseSqrt();
}

} // namespace

MatrixXd predict_error(const ForecastModel &model, const MatrixXd &queries) {
  if (!model.has_variance())
    throw ArgumentError("model has no error estimate");
  return error_from_projection(model, kernel_projection(model, queries));
}

MatrixXd predict_probability(const ForecastModel &model,
                             const MatrixXd &queries) {
  if (model.transform.kind != ResponseTransform::Kind::indicator)
    throw ArgumentError("probability forecasts need an indicator transform");
  return predict_kpcr(model, queries).cwiseMax(0.0).cwiseMin(1.0);
}

double predict_probability(const ForecastModel &model, const RowVectorXd &x,
                           Index lead_index) {
  check_lead_index(model, lead_index);
  return predict_probability(model, MatrixXd(x))(0, lead_index);
}

ForecastOutput predict(const ForecastModel &model, const MatrixXd &queries,
                       double eta) {
  if (eta < 0)
    throw ArgumentError("regularization parameter must be nonnegative");
  const MatrixXd projection = kernel_projection(model, queries);
  ForecastOutput out;
  out.mean = projection * scaled_coefficients(
                              model.alphas, basis_eigenvalues(model.basis), eta);
  if (model.transform.kind == ResponseTransform::Kind::indicator)
    out.mean = out.mean.cwiseMax(0.0).cwiseMin(1.0);
  if (model.has_variance())
    out.error = error_from_projection(model, projection);
  return out;
}

namespace {

MatrixXd solve_ridge(const MatrixXd &p, const MatrixXd &rhs, double eta) {
  if (!(eta > 0))
    throw ArgumentError("ridge parameter must be positive");
  const Index n = p.rows();
  MatrixXd g = p / static_cast<double>(n);
  g.diagonal().array() += eta;
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw Error("ridge system is not positive definite");
  return llt.solve(rhs);
}

MatrixXd shifted_responses(const TimeSeriesDataset &ds,
                           const std::vector<Index> &leads,
                           const ResponseTransform &transform) {
  const Index n = ds.size();
  const VectorXd transformed = transform.apply(ds.responses);
  MatrixXd out(n, static_cast<Index>(leads.size()));
  for (std::size_t k = 0; k < leads.size(); ++k) {
    if (leads[k] < 0 || leads[k] > n)
      throw ArgumentError("lead " + std::to_string(leads[k]) +
                          " is outside [0, n]");
    out.col(static_cast<Index>(k)) = shift_sequence(transformed, leads[k]);
  }
  return out;
}

} // namespace

KrrModel fit_krr(std::shared_ptr<const NormalizedKernel> kernel,
                 const MatrixXd &p, const TimeSeriesDataset &ds,
                 const std::vector<Index> &leads, double eta,
                 const ResponseTransform &transform) {
  if (p.rows() != ds.size() || p.cols() != ds.size())
    throw ArgumentError("kernel matrix does not match the dataset");
  KrrModel model;
  model.coefficients = solve_ridge(p, shifted_responses(ds, leads, transform), eta);
  model.kernel = std::move(kernel);
  model.leads = leads;
  model.eta = eta;
  model.transform = transform;
  return model;
}

MatrixXd predict_krr(const KrrModel &model, const MatrixXd &queries) {
  if (!model.kernel)
    throw ArgumentError("model has no kernel for out-of-sample evaluation");
  return model.kernel->apply(queries, model.coefficients) /
         static_cast<double>(model.kernel->size());
}

double fit_predict_krr(const MatrixXd &p, const TimeSeriesDataset &ds, Index q,
                       double eta, const VectorXd &row) {
  if (p.rows() != ds.size() || p.cols() != ds.size() || row.size() != ds.size())
    throw ArgumentError("kernel matrix does not match the dataset");
  const MatrixXd c = solve_ridge(p, shifted_responses(ds, {q}, {}), eta);
  return row.dot(c.col(0)) / static_cast<double>(ds.size());
}

} // namespace kaf
