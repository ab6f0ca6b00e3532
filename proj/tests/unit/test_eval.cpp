#include "helpers.hpp"

#include "kaf/errors.hpp"
#include "kaf/eval.hpp"
#include "kaf/pipeline.hpp"
#include "kaf/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kaf;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

TimeSeriesDataset smooth_series(Index n, std::uint64_t seed) {
  const MatrixXd x = test::random_points(n, 2, seed);
  VectorXd y(n);
  for (Index j = 0; j < n; ++j)
    y(j) = std::cos(2 * x(j, 0)) - x(j, 1);
  return make_dataset(x, y, 0.1);
}

} // namespace

TEST_CASE("rmse examples") {
  const VectorXd a = test::random_vector(10, 1);
  CHECK(rmse(a, a) == 0.0);
  CHECK(rmse(vec({0, 0}), vec({3, 4})) == doctest::Approx(std::sqrt(12.5)));
  CHECK(rmse(vec({1}), vec({4})) == doctest::Approx(3.0));
  CHECK_THROWS_AS(rmse(vec({1, 2}), vec({1})), ArgumentError);
  CHECK_THROWS_AS(rmse(VectorXd(), VectorXd()), ArgumentError);
}

TEST_CASE("rmse is a metric on random instances") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const VectorXd a = test::random_vector(30, 3 * s);
    const VectorXd b = test::random_vector(30, 3 * s + 1);
    const VectorXd c = test::random_vector(30, 3 * s + 2);
    CHECK(rmse(a, b) == rmse(b, a));
    CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-15);
  }
}

TEST_CASE("excess generalization error examples") {
  const VectorXd z = test::random_vector(25, 4);
  CHECK(excess_gen_error(z, z) == 0.0);
  CHECK(excess_gen_error((z.array() + 0.3).matrix(), z) ==
        doctest::Approx(0.09));
  CHECK_THROWS_AS(excess_gen_error(z, vec({1})), ArgumentError);
}

TEST_CASE("evaluate_forecast truncates the final q points") {
  const TimeSeriesDataset train_ds = smooth_series(80, 5);
  TrainOptions o;
  o.kernel.epsilon = 0.3;
  o.ell = 10;
  o.leads = {0, 3};
  const auto model = train(train_ds, o);

  const TimeSeriesDataset verif = smooth_series(40, 6);
  const SkillReport r = evaluate_forecast(model, verif);
  CHECK(r.leads == std::vector<Index>{0, 3});
  CHECK(r.lead_times[1] == doctest::Approx(0.3));

  const MatrixXd pred = predict_kpcr(model, verif.covariates);
  const double by_hand =
      rmse(pred.col(1).head(37), verif.responses.tail(37));
  CHECK(r.rmse[1] == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(r.normalized_rmse[1] ==
        doctest::Approx(by_hand / empirical_moments(train_ds).std));
  CHECK(std::isnan(r.estimated_error_rms[0]));
  CHECK(std::isnan(r.excess_gen_error[0]));

  const SkillReport only = evaluate_forecast(model, verif, {3});
  CHECK(only.leads.size() == 1);
  CHECK(only.rmse[0] == r.rmse[1]);
  CHECK_THROWS_AS(evaluate_forecast(model, verif, {2}), ArgumentError);
}

TEST_CASE("evaluate_forecast rejects mismatched covariates") {
  TrainOptions o;
  o.kernel.epsilon = 0.3;
  o.ell = 5;
  const auto model = train(smooth_series(30, 7), o);
  const auto wrong = make_dataset(test::random_points(10, 3, 8),
                                  test::random_vector(10, 9), 0.1);
  CHECK_THROWS_AS(evaluate_forecast(model, wrong), ArgumentError);
}

TEST_CASE("interpolation on the training set") {
  const TimeSeriesDataset ds = smooth_series(40, 10);
  TrainOptions o;
  o.kernel.epsilon = 0.05;
  o.ell = 40;
  o.leads = {0};
  const auto model = train(ds, o);
  const SkillReport r = evaluate_forecast(model, ds);
  CHECK(r.rmse[0] < 1e-6 * empirical_moments(ds).std);
}

TEST_CASE("error bars and oracle columns") {
  const auto ds = generate_circle(CircleParams{}, 1000,
                                  2 * std::numbers::pi / 100, 0.0);
  TrainOptions o;
  o.kernel.epsilon = 0.1;
  o.normalization = NormalizationMode::none;
  o.ell = 15;
  o.leads = {0, 17};
  o.error_model = true;
  const auto model = train(ds, o);
  const auto verif = generate_circle(CircleParams{}, 3000,
                                     2 * std::numbers::pi / 100, 2.0);
  const CircleParams cp;
  const SkillReport r = evaluate_forecast(
      model, verif, {},
      [cp](const RowVectorXd &x, double tau) {
        return circle_oracle(cp, x(0), tau).z;
      });
  CHECK(r.excess_gen_error[0] < 1e-3);
  CHECK(r.excess_gen_error[1] < 2e-3);
  // Intrinsic error at tau = 0 is 1/2, so the RMSE is about 1/sqrt(2).
  CHECK(r.rmse[0] == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
  CHECK(r.estimated_error_rms[0] == doctest::Approx(r.rmse[0]).epsilon(0.05));

  std::ostringstream csv;
  write_skill_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header ==
        "lead_time,rmse,normalized_rmse,estimated_error_rms,excess_gen_error");
  std::getline(lines, row);
  CHECK(row.rfind("0,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 4);

  SkillReport echoed = r;
  echoed.params = {{"ell", 15}};
  const auto js = to_json(echoed);
  CHECK(js["params"]["ell"] == 15);
  CHECK(js["skill"].size() == 2);
  CHECK(js["skill"][1]["lead"] == 17);
}

TEST_CASE("missing values are blank in CSV and null in JSON") {
  SkillReport r;
  r.leads = {2};
  r.lead_times = {0.2};
  r.rmse = {0.5};
  r.normalized_rmse = {0.25};
  r.estimated_error_rms = {std::nan("")};
  r.excess_gen_error = {std::nan("")};
  std::ostringstream csv;
  write_skill_csv(csv, r);
  CHECK(csv.str().find("0.2,0.5,0.25,,\n") != std::string::npos);
  CHECK(to_json(r)["skill"][0]["excess_gen_error"].is_null());
}

TEST_CASE("constant-mean forecast has unit normalized error on L63") {
  L63SamplingOptions o;
  o.dt = 0.1;
  o.n = 2000;
  o.seed = 101;
  o.substeps = 100;
  const auto train_ds = generate_l63(L63Params{}, o);
  o.n = 10000;
  o.seed = 202;
  const auto verif = generate_l63(L63Params{}, o);

  TrainOptions t;
  t.kernel.epsilon = 50.0;
  t.ell = 1;
  t.leads = {0, 10};
  const auto model = train(train_ds, t);
  const SkillReport r = evaluate_forecast(model, verif);
  MESSAGE("constant-mean normalized RMSE " << r.normalized_rmse[0] << ", "
                                           << r.normalized_rmse[1]);
  CHECK(std::abs(r.normalized_rmse[0] - 1.0) < 0.05);
  CHECK(std::abs(r.normalized_rmse[1] - 1.0) < 0.05);
}
