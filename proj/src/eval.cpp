#include "kaf/eval.hpp"

#include "kaf/errors.hpp"

#include <cmath>
#include <limits>

namespace kaf {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_lengths(const VectorXd &a, const VectorXd &b) {
  if (a.size() != b.size())
    throw ArgumentError("sequences differ in length");
  if (a.size() == 0)
    throw ArgumentError("sequences are empty");
}

std::string csv_field(double v) { return std::isnan(v) ? "" : format_double(v); }

nlohmann::json json_value(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}
} // namespace

double rmse(const VectorXd &pred, const VectorXd &truth) {
  check_lengths(pred, truth);
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(pred.size()));
}

double excess_gen_error(const VectorXd &pred, const VectorXd &oracle) {
  check_lengths(pred, oracle);
  return (pred - oracle).squaredNorm() / static_cast<double>(pred.size());
}

TimeSeriesDataset model_inputs(const ForecastModel &model,
                               const TimeSeriesDataset &raw) {
  const Index delays = model.delays();
  if (raw.dim() * delays != model.dim())
    throw ArgumentError("verification covariate dimension " +
                        std::to_string(raw.dim()) +
                        " does not match the model");
  return delays > 1 ? delay_embed(raw, delays) : raw;
}

SkillReport evaluate_forecast(const ForecastModel &model,
                              const TimeSeriesDataset &verif,
                              const std::vector<Index> &leads,
                              const Oracle &oracle, double eta) {
  const TimeSeriesDataset inputs = model_inputs(model, verif);
  const ForecastOutput forecasts = predict(model, inputs.covariates, eta);
  return score_forecasts(model, verif, forecasts, leads, oracle);
}

SkillReport score_forecasts(const ForecastModel &model,
                            const TimeSeriesDataset &verif,
                            const ForecastOutput &forecasts,
                            const std::vector<Index> &leads,
                            const Oracle &oracle) {
  const TimeSeriesDataset inputs = model_inputs(model, verif);
  const Index m = inputs.size();
  if (forecasts.mean.rows() != m ||
      forecasts.mean.cols() != static_cast<Index>(model.leads.size()))
    throw ArgumentError("forecast block does not match the verification set");
  if (!(model.response_stats.std > 0))
    throw DegenerateDataError("training responses have zero variance");

  const VectorXd truth = model.transform.apply(inputs.responses);
  const std::vector<Index> &selected = leads.empty() ? model.leads : leads;

  SkillReport report;
  for (Index q : selected) {
    const Index k = model.lead_index(q);
    const double tau = model.tau(k);
    report.leads.push_back(q);
    report.lead_times.push_back(tau);
    const Index len = m - q;
    if (len < 1) {
      report.rmse.push_back(kNaN);
      report.normalized_rmse.push_back(kNaN);
      report.estimated_error_rms.push_back(kNaN);
    } else {
      const double e =
          rmse(forecasts.mean.col(k).head(len), truth.segment(q, len));
      report.rmse.push_back(e);
      report.normalized_rmse.push_back(e / model.response_stats.std);
      if (forecasts.error.size() > 0) {
        const auto err = forecasts.error.col(k).head(len);
        report.estimated_error_rms.push_back(
            std::sqrt(err.squaredNorm() / static_cast<double>(len)));
      } else {
        report.estimated_error_rms.push_back(kNaN);
      }
    }
    if (oracle) {
      VectorXd z(m);
      for (Index j = 0; j < m; ++j)
        z(j) = oracle(inputs.covariates.row(j), tau);
      report.excess_gen_error.push_back(
          excess_gen_error(forecasts.mean.col(k), z));
    } else {
      report.excess_gen_error.push_back(kNaN);
    }
  }
  return report;
}

void write_skill_csv(std::ostream &out, const SkillReport &report) {
  out << "lead_time,rmse,normalized_rmse,estimated_error_rms,excess_gen_error\n";
  for (std::size_t k = 0; k < report.leads.size(); ++k)
    out << format_double(report.lead_times[k]) << ',' << csv_field(report.rmse[k])
        << ',' << csv_field(report.normalized_rmse[k]) << ','
        << csv_field(report.estimated_error_rms[k]) << ','
        << csv_field(report.excess_gen_error[k]) << '\n';
}

nlohmann::json to_json(const SkillReport &report) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < report.leads.size(); ++k)
    rows.push_back({{"lead", report.leads[k]},
                    {"lead_time", report.lead_times[k]},
                    {"rmse", json_value(report.rmse[k])},
                    {"normalized_rmse", json_value(report.normalized_rmse[k])},
                    {"estimated_error_rms",
                     json_value(report.estimated_error_rms[k])},
                    {"excess_gen_error", json_value(report.excess_gen_error[k])}});
  return {{"params", report.params}, {"skill", rows}};
}

} // namespace kaf
