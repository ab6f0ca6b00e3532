#include "helpers.hpp"

#include "kaf/dataset.hpp"
#include "kaf/errors.hpp"
#include "kaf/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kaf;

TEST_CASE("L63 vector field examples") {
  const L63Params p;
  CHECK(l63_vector_field(p, State3(0, 0, 0)) == State3(0, 0, 0));
  const State3 a = l63_vector_field(p, State3(1, 1, 1));
  CHECK(a(0) == doctest::Approx(0.0));
  CHECK(a(1) == doctest::Approx(27.0));
  CHECK(a(2) == doctest::Approx(-5.0 / 3.0));
  const State3 b = l63_vector_field(p, State3(0, 1, 0));
  CHECK(b(0) == doctest::Approx(10.0));
  CHECK(b(1) == doctest::Approx(0.0));
  CHECK(b(2) == doctest::Approx(0.0));
}

TEST_CASE("RK4 keeps the origin fixed") {
  const auto traj = integrate_rk4(L63Params{}, State3(0, 0, 0), 0.01, 50, 10);
  CHECK(traj.rows() == 51);
  CHECK(traj.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RK4 converges at fourth order") {
  const L63Params p;
  const State3 x0(1, 1, 1);
  // One time unit with output step 0.05; the reference uses 256 substeps.
  const auto ref = integrate_rk4(p, x0, 0.05, 20, 256);
  const auto coarse = integrate_rk4(p, x0, 0.05, 20, 1);
  const auto fine = integrate_rk4(p, x0, 0.05, 20, 2);
  const double e1 = (coarse.row(20) - ref.row(20)).norm();
  const double e2 = (fine.row(20) - ref.row(20)).norm();
  MESSAGE("RK4 error ratio " << e1 / e2);
  CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("RK4 divergence is reported") {
  const L63Params p;
  CHECK_THROWS_AS(integrate_rk4(p, State3(1e200, 1e200, 1e200), 0.01, 10, 1),
                  DivergenceError);
}

TEST_CASE("L63 trajectories stay in the absorbing ball") {
  L63SamplingOptions o;
  o.n = 1000;
  o.seed = 3;
  const auto traj = sample_l63(L63Params{}, o);
  CHECK(traj.rows() == 1000);
  CHECK(traj.rowwise().norm().maxCoeff() < 100.0);
}

TEST_CASE("generate_l63 selectors and determinism") {
  L63SamplingOptions o;
  o.n = 10;
  o.seed = 42;
  o.covariate = StateSelector::full();
  o.response = 0;
  const auto a = generate_l63(L63Params{}, o);
  CHECK(a.dim() == 3);
  CHECK(a.size() == 10);
  CHECK(a.responses == a.covariates.col(0));
  const auto b = generate_l63(L63Params{}, o);
  CHECK(a.covariates == b.covariates);

  o.covariate = StateSelector::coordinate(1);
  o.response = 2;
  const auto c = generate_l63(L63Params{}, o);
  CHECK(c.dim() == 1);
  CHECK(c.covariates.col(0) == a.covariates.col(1));
  CHECK(c.responses == a.covariates.col(2));

  o.seed = 43;
  CHECK(generate_l63(L63Params{}, o).covariates != c.covariates);
}

TEST_CASE("L63 first-coordinate climatology") {
  L63SamplingOptions o;
  o.n = 64000;
  o.seed = 1;
  o.covariate = StateSelector::coordinate(0);
  const auto ds = generate_l63(L63Params{}, o);
  const auto m = empirical_moments(ds);
  MESSAGE("std of first coordinate " << m.std);
  CHECK(m.std == doctest::Approx(7.9).epsilon(0.5 / 7.9));
}

TEST_CASE("circle samples") {
  const CircleParams p;
  const double dt = 2 * std::numbers::pi / 100;
  const auto ds = generate_circle(p, 1000, dt, 0.0);
  CHECK(ds.covariates(0, 0) == 1.0);
  CHECK(ds.responses(0) == 0.0);
  double worst = 0.0;
  for (Index j = 0; j < ds.size(); ++j) {
    const double r = ds.covariates(j, 0) * ds.covariates(j, 0) +
                     ds.responses(j) * ds.responses(j);
    worst = std::max(worst, std::abs(r - 1.0));
    worst = std::max(worst, std::abs(ds.covariates(j, 0) -
                                     std::cos(p.alpha * dt *
                                              static_cast<double>(j))));
  }
  CHECK(worst < 1e-12);
  const double rotations =
      static_cast<double>(ds.size()) * dt * p.alpha / (2 * std::numbers::pi);
  CHECK(rotations == doctest::Approx(14.142).epsilon(1e-3));
}

TEST_CASE("random_angle is seeded and in range") {
  const double a = random_angle(5);
  CHECK(a == random_angle(5));
  CHECK(a != random_angle(6));
  for (std::uint64_t s = 0; s < 50; ++s) {
    const double v = random_angle(s);
    CHECK(v >= 0.0);
    CHECK(v < 2 * std::numbers::pi);
  }
}

TEST_CASE("circle oracle") {
  const CircleParams p;
  auto v = circle_oracle(p, 0.3, 0.0);
  CHECK(v.z == 0.0);
  CHECK(v.sigma == doctest::Approx(0.5));
  v = circle_oracle(p, 0.5, std::numbers::pi / 2 / p.alpha);
  CHECK(v.z == doctest::Approx(0.5));
  CHECK(v.sigma == doctest::Approx(0.0));
  v = circle_oracle(p, -0.7, std::numbers::pi / p.alpha);
  CHECK(v.z == doctest::Approx(0.0));
  CHECK(v.sigma == doctest::Approx(0.5));
  CHECK_THROWS_AS(circle_oracle(p, 1.5, 0.1), DomainError);
}
