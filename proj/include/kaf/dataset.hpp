#pragma once

#include "kaf/types.hpp"

#include <string>

namespace kaf {

/// Time-ordered samples (x_j, y_j) taken at a fixed interval dt.
/// Row j of `covariates` is the covariate vector x_j.
struct TimeSeriesDataset {
  MatrixXd covariates;
  VectorXd responses;
  double dt = 1.0;

  Index size() const { return responses.size(); }
  Index dim() const { return covariates.cols(); }
};

/// Builds a dataset after checking the invariants (equal lengths, n >= 1,
/// dt > 0, finite entries). Throws ValidationError.
TimeSeriesDataset make_dataset(MatrixXd covariates, VectorXd responses,
                               double dt);

/// Elementwise response transform applied before forming analog vectors.
/// `indicator` maps y to 1 when y > threshold and to 0 otherwise.
struct ResponseTransform {
  enum class Kind { identity, indicator };

  Kind kind = Kind::identity;
  double threshold = 0.0;

  static ResponseTransform identity() { return {}; }
  static ResponseTransform indicator(double threshold) {
    return {Kind::indicator, threshold};
  }

  double operator()(double y) const {
    if (kind == Kind::indicator)
      return y > threshold ? 1.0 : 0.0;
    return y;
  }
  VectorXd apply(const VectorXd &y) const {
    return y.unaryExpr([this](double v) { return (*this)(v); });
  }
};

/// The q-step shifted, zero-padded response sequence.
struct AnalogVector {
  VectorXd values;
  Index shift = 0;
  double tau = 0.0;
};

AnalogVector analog_vector(const TimeSeriesDataset &ds, Index q,
                           const ResponseTransform &gamma = {});

/// Same shift applied to a raw sequence: out[j] = values[j + q] when in
/// range, zero otherwise.
VectorXd shift_sequence(const VectorXd &values, Index q);

/// Delay-coordinate embedding with `delays` lags. Row j' of the result
/// concatenates (x_j, x_{j-1}, ..., x_{j-delays+1}); responses are aligned
/// with the most recent lag.
TimeSeriesDataset delay_embed(const TimeSeriesDataset &ds, Index delays);

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population (1/n) standard deviation.
Moments empirical_moments(const VectorXd &values);
inline Moments empirical_moments(const TimeSeriesDataset &ds) {
  return empirical_moments(ds.responses);
}

/// Reads "t,x1,...,xm,y" CSV. dt comes from the first two time stamps; the
/// remaining spacing must match within a relative tolerance of 1e-9.
TimeSeriesDataset load_csv(const std::string &path, Index covariate_dim);

/// Covariate dimension declared by the header row of a CSV file.
Index csv_covariate_dim(const std::string &path);

/// load_csv with the dimension taken from the header.
TimeSeriesDataset load_csv(const std::string &path);

/// Writes the same layout with t_j = t0 + j*dt and shortest round-trip
/// number formatting.
void save_csv(const std::string &path, const TimeSeriesDataset &ds,
              double t0 = 0.0);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace kaf
