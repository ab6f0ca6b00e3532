#include "kaf/pipeline.hpp"

#include "kaf/errors.hpp"
#include "kaf/spectral.hpp"

#include <memory>

namespace kaf {

ForecastBasis build_basis(const TimeSeriesDataset &embedded,
                          const TrainOptions &opts, TrainReport *report) {
  if (opts.ell < 1 || opts.ell > embedded.size())
    throw ArgumentError("ell must lie in [1, n]");
  KernelTuningReport tuning;
  ResolvedKernel base = fit_kernel(opts.kernel, embedded.covariates, &tuning);

  ForecastBasis basis;
  if (opts.normalization == NormalizationMode::diffusion) {
    MatrixXd k = base.matrix();
    auto norm = diffusion_normalize(k, opts.alpha);
    auto kernel = std::make_shared<const NormalizedKernel>(
        std::move(base), opts.normalization, opts.alpha, std::move(norm.u),
        std::move(norm.v));
    basis = biorthogonal_decompose(std::move(kernel), opts.ell, opts.rank_tol);
  } else {
    NormalizedFit fit = normalize(base, opts.normalization, opts.alpha);
    auto kernel = std::make_shared<const NormalizedKernel>(std::move(fit.kernel));
    basis = eigendecompose(std::move(fit.p), std::move(kernel), opts.ell,
                           opts.rank_tol);
  }

  if (report) {
    const NormalizedKernel &k = basis_kernel(basis);
    report->tuning = tuning;
    report->n = embedded.size();
    report->epsilon = k.base().epsilon();
    report->epsilon_tilde = k.base().epsilon_tilde();
    report->m_tilde = k.base().m_tilde();
    const VectorXd &values = basis_eigenvalues(basis);
    report->lambda_first = values(0);
    report->lambda_last = values(values.size() - 1);
  }
  return basis;
}

ForecastModel fit_model(ForecastBasis basis, const TimeSeriesDataset &embedded,
                        const TrainOptions &opts) {
  ForecastModel model =
      fit_kpcr(std::move(basis), embedded, opts.leads, opts.transform);
  if (opts.error_model)
    model = with_conditional_variance(std::move(model), embedded);
  return model;
}

ForecastModel train(const TimeSeriesDataset &raw, const TrainOptions &opts,
                    TrainReport *report) {
  const Index delays = opts.kernel.delays;
  const TimeSeriesDataset embedded = delays > 1 ? delay_embed(raw, delays) : raw;
  return fit_model(build_basis(embedded, opts, report), embedded, opts);
}

} // namespace kaf
