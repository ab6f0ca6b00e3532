#pragma once

#include "kaf/dataset.hpp"
#include "kaf/forecast.hpp"
#include "kaf/types.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace kaf {

/// sqrt((1/m) sum_j |pred_j - truth_j|^2)
double rmse(const VectorXd &pred, const VectorXd &truth);

/// (1/m) sum_j |pred_j - oracle_j|^2
double excess_gen_error(const VectorXd &pred, const VectorXd &oracle);

/// Regression function Z_tau(x) of an analytically solvable problem.
using Oracle = std::function<double(const RowVectorXd &x, double tau)>;

struct SkillReport {
  std::vector<Index> leads;
  std::vector<double> lead_times;
  std::vector<double> rmse;
  std::vector<double> normalized_rmse;
  /// RMS of the error estimate; NaN without an error model.
  std::vector<double> estimated_error_rms;
  /// NaN without an oracle.
  std::vector<double> excess_gen_error;
  nlohmann::json params = nlohmann::json::object();
};

/// Applies the model's delay embedding to a raw dataset.
TimeSeriesDataset model_inputs(const ForecastModel &model,
                               const TimeSeriesDataset &raw);

/// Scores the model on a raw verification record. For lead q the forecasts
/// at x_j are compared with Gamma(y_{j+q}) for j < m - q; the excess error
/// uses every verification point. An empty `leads` scores all model leads.
SkillReport evaluate_forecast(const ForecastModel &model,
                              const TimeSeriesDataset &verif,
                              const std::vector<Index> &leads = {},
                              const Oracle &oracle = nullptr,
                              double eta = 0.0);

/// Same scoring for forecasts already computed at the verification points
/// (m x L, aligned with `model.leads`).
SkillReport score_forecasts(const ForecastModel &model,
                            const TimeSeriesDataset &verif,
                            const ForecastOutput &forecasts,
                            const std::vector<Index> &leads = {},
                            const Oracle &oracle = nullptr);

/// "lead_time,rmse,normalized_rmse,estimated_error_rms,excess_gen_error"
/// with empty fields for missing values.
void write_skill_csv(std::ostream &out, const SkillReport &report);
nlohmann::json to_json(const SkillReport &report);

} // namespace kaf
