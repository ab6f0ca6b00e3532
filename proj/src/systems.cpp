#include "kaf/systems.hpp"
#include "kaf/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kaf {

State3 l63_vector_field(const L63Params &p, const State3 &w) {
  return {p.sigma * (w(1) - w(0)), w(0) * (p.rho - w(2)),
          w(0) * w(1) - p.beta * w(2)};
}

namespace {

State3 rk4_step(const L63Params &p, const State3 &w, double h) {
  const State3 k1 = l63_vector_field(p, w);
  const State3 k2 = l63_vector_field(p, w + 0.5 * h * k1);
  const State3 k3 = l63_vector_field(p, w + 0.5 * h * k2);
  const State3 k4 = l63_vector_field(p, w + h * k3);
  return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

State3 advance(const L63Params &p, State3 w, double dt_out, Index substeps) {
  const double h = dt_out / static_cast<double>(substeps);
  for (Index s = 0; s < substeps; ++s)
    w = rk4_step(p, w, h);
  if (!w.allFinite())
    throw DivergenceError("L63 integration produced a non-finite state");
  return w;
}

void check_step_args(double dt_out, Index substeps) {
  if (!(dt_out > 0.0))
    throw ArgumentError("output interval must be positive");
  if (substeps < 1)
    throw ArgumentError("substeps must be at least 1");
}

} // namespace

Trajectory3 integrate_rk4(const L63Params &p, const State3 &initial,
                          double dt_out, Index n_steps, Index substeps) {
  check_step_args(dt_out, substeps);
  if (n_steps < 0)
    throw ArgumentError("step count must be nonnegative");
  if (!initial.allFinite())
    throw DivergenceError("initial state is not finite");
  Trajectory3 out(n_steps + 1, 3);
  State3 w = initial;
  out.row(0) = w.transpose();
  for (Index k = 1; k <= n_steps; ++k) {
    w = advance(p, w, dt_out, substeps);
    out.row(k) = w.transpose();
  }
  return out;
}

Trajectory3 sample_l63(const L63Params &p, const L63SamplingOptions &opts) {
  if (opts.n < 1)
    throw ArgumentError("sample count must be positive");
  check_step_args(opts.dt, opts.substeps);
  if (opts.spinup_time < 0.0)
    throw ArgumentError("spinup time must be nonnegative");

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  State3 w;
  for (int k = 0; k < 3; ++k)
    w(k) = unif(rng);

  const auto spinup_steps =
      static_cast<Index>(std::llround(opts.spinup_time / opts.dt));
  for (Index k = 0; k < spinup_steps; ++k)
    w = advance(p, w, opts.dt, opts.substeps);
  return integrate_rk4(p, w, opts.dt, opts.n - 1, opts.substeps);
}

TimeSeriesDataset generate_l63(const L63Params &p,
                               const L63SamplingOptions &opts) {
  if (opts.response < 0 || opts.response > 2)
    throw ArgumentError("response component must be 0, 1 or 2");
  if (!opts.covariate.is_full() &&
      (opts.covariate.component < 0 || opts.covariate.component > 2))
    throw ArgumentError("covariate component must be 0, 1 or 2");
  const Trajectory3 traj = sample_l63(p, opts);
  MatrixXd cov = opts.covariate.is_full()
                     ? MatrixXd(traj)
                     : MatrixXd(traj.col(opts.covariate.component));
  VectorXd resp = traj.col(opts.response);
  return make_dataset(std::move(cov), std::move(resp), opts.dt);
}

TimeSeriesDataset generate_circle(const CircleParams &p, Index n, double dt,
                                  double omega0) {
  if (n < 1)
    throw ArgumentError("sample count must be positive");
  if (p.alpha == 0.0)
    throw ArgumentError("circle frequency must be nonzero");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  MatrixXd cov(n, 1);
  VectorXd resp(n);
  for (Index j = 0; j < n; ++j) {
    double angle = std::fmod(omega0 + p.alpha * static_cast<double>(j) * dt,
                             two_pi);
    if (angle < 0.0)
      angle += two_pi;
    cov(j, 0) = std::cos(angle);
    resp(j) = std::sin(angle);
  }
  return make_dataset(std::move(cov), std::move(resp), dt);
}

double random_angle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
  return unif(rng);
}

CircleOracleValue circle_oracle(const CircleParams &p, double x, double tau) {
  if (!(std::abs(x) <= 1.0))
    throw DomainError("circle covariate must lie in [-1, 1]");
  const double phase = p.alpha * tau;
  const double c = std::cos(phase);
  return {x * std::sin(phase), 0.5 * c * c};
}

} // namespace kaf
