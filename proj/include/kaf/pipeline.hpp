#pragma once

#include "kaf/dataset.hpp"
#include "kaf/forecast.hpp"
#include "kaf/kernels.hpp"
#include "kaf/normalization.hpp"

#include <vector>

namespace kaf {

struct TrainOptions {
  KernelSpec kernel;
  NormalizationMode normalization = NormalizationMode::symmetric_markov;
  double alpha = 1.0; // diffusion-maps exponent
  Index ell = 1;
  std::vector<Index> leads{0};
  ResponseTransform transform;
  bool error_model = false;
  double rank_tol = 1e-12;
};

struct TrainReport {
  KernelTuningReport tuning;
  Index n = 0;
  double epsilon = 0.0;
  double epsilon_tilde = 0.0;
  double m_tilde = 0.0;
  double lambda_first = 0.0;
  double lambda_last = 0.0;
};

/// Kernel fit, normalization and eigendecomposition on covariates that are
/// already delay-embedded. Diffusion normalization yields a biorthogonal
/// basis, the other modes a symmetric one.
ForecastBasis build_basis(const TimeSeriesDataset &embedded,
                          const TrainOptions &opts,
                          TrainReport *report = nullptr);

/// Coefficients (and the optional error model) on top of a basis.
ForecastModel fit_model(ForecastBasis basis,
                        const TimeSeriesDataset &embedded,
                        const TrainOptions &opts);

/// Full training run on a raw dataset: delay embedding, basis, coefficients.
ForecastModel train(const TimeSeriesDataset &raw, const TrainOptions &opts,
                    TrainReport *report = nullptr);

} // namespace kaf
