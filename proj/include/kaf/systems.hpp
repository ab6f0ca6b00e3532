#pragma once

#include "kaf/dataset.hpp"
#include "kaf/types.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace kaf {

/// Lorenz 63 parameters, defaulting to the classical chaotic regime.
struct L63Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

struct CircleParams {
  double alpha = 1.4142135623730951; // sqrt(2)
};

using State3 = Eigen::Vector3d;
using Trajectory3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

State3 l63_vector_field(const L63Params &p, const State3 &state);

/// Classical RK4 with internal step dt_out/substeps. Returns n_steps+1 rows,
/// the first being `initial`. Throws DivergenceError on non-finite states.
Trajectory3 integrate_rk4(const L63Params &p, const State3 &initial,
                          double dt_out, Index n_steps, Index substeps);

/// Picks either the full 3-vector or a single component (0, 1 or 2).
struct StateSelector {
  int component = -1; // -1 selects the full state

  static StateSelector full() { return {}; }
  static StateSelector coordinate(int k) { return {k}; }
  bool is_full() const { return component < 0; }
  Index dim() const { return is_full() ? 3 : 1; }
};

struct L63SamplingOptions {
  Index n = 1000;
  double dt = 0.01;
  double spinup_time = 100.0;
  std::uint64_t seed = 0;
  Index substeps = 10;
  StateSelector covariate = StateSelector::full();
  int response = 0;
};

/// Samples an L63 trajectory from a seeded initial condition in [-10,10]^3
/// after discarding the spinup interval.
TimeSeriesDataset generate_l63(const L63Params &p,
                               const L63SamplingOptions &opts);

/// Raw trajectory behind generate_l63 (n rows, after spinup).
Trajectory3 sample_l63(const L63Params &p, const L63SamplingOptions &opts);

/// Circle rotation sampled at angles omega0 + alpha*(j-1)*dt (mod 2 pi), with
/// covariate cos(angle) and response sin(angle).
TimeSeriesDataset generate_circle(const CircleParams &p, Index n, double dt,
                                  double omega0);

/// Uniform angle in [0, 2 pi) from a seeded generator.
double random_angle(std::uint64_t seed);

/// Regression function x*sin(alpha*tau) and intrinsic error
/// cos^2(alpha*tau)/2 of the circle problem.
struct CircleOracleValue {
  double z = 0.0;
  double sigma = 0.0;
};
CircleOracleValue circle_oracle(const CircleParams &p, double x, double tau);

} // namespace kaf
