#include "helpers.hpp"

#include "kaf/dataset.hpp"
#include "kaf/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

using namespace kaf;

namespace {

TimeSeriesDataset series(std::initializer_list<double> y) {
  VectorXd resp(static_cast<Index>(y.size()));
  Index i = 0;
  for (double v : y)
    resp(i++) = v;
  MatrixXd cov = resp;
  return make_dataset(cov, resp, 0.5);
}

std::string write_file(const std::string &name, const std::string &body) {
  const auto path = test::scratch_dir("dataset_" + name) / "data.csv";
  std::ofstream(path) << body;
  return path.string();
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
}

} // namespace

TEST_CASE("make_dataset validates its invariants") {
  CHECK_THROWS_AS(make_dataset(MatrixXd::Zero(3, 1), VectorXd::Zero(2), 0.1),
                  ValidationError);
  CHECK_THROWS_AS(make_dataset(MatrixXd::Zero(0, 1), VectorXd::Zero(0), 0.1),
                  ValidationError);
  CHECK_THROWS_AS(make_dataset(MatrixXd::Zero(2, 1), VectorXd::Zero(2), 0.0),
                  ValidationError);
  MatrixXd bad = MatrixXd::Zero(2, 1);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_dataset(bad, VectorXd::Zero(2), 0.1), ValidationError);
}

TEST_CASE("load_csv parses a three-row file") {
  const auto path = write_file("ok", "t,x1,y\n0,1,2\n0.1,3,4\n0.2,5,6\n");
  const auto ds = load_csv(path, 1);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 1);
  CHECK(ds.dt == doctest::Approx(0.1));
  CHECK(ds.covariates(2, 0) == 5.0);
  CHECK(ds.responses(1) == 4.0);
  CHECK(csv_covariate_dim(path) == 1);
  CHECK(load_csv(path).size() == 3);
}

TEST_CASE("load_csv rejects bad input") {
  SUBCASE("non-uniform spacing") {
    const auto path = write_file("spacing", "t,x1,y\n0,1,2\n0.1,3,4\n0.25,5,6\n");
    CHECK_THROWS_AS(load_csv(path, 1), SpacingError);
  }
  SUBCASE("empty data section") {
    const auto path = write_file("empty", "t,x1,y\n");
    CHECK_THROWS_AS(load_csv(path, 1), ValidationError);
  }
  SUBCASE("NaN entry") {
    const auto path = write_file("nan", "t,x1,y\n0,1,2\n0.1,nan,4\n");
    CHECK_THROWS_AS(load_csv(path, 1), ValidationError);
  }
  SUBCASE("malformed row reports its line") {
    const auto path = write_file("bad", "t,x1,y\n0,1,2\n0.1,abc,4\n");
    try {
      load_csv(path, 1);
      FAIL("expected a parse error");
    } catch (const ParseError &e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("wrong field count") {
    const auto path = write_file("width", "t,x1,y\n0,1,2\n0.1,4\n");
    CHECK_THROWS_AS(load_csv(path, 1), ParseError);
  }
  SUBCASE("header mismatch") {
    const auto path = write_file("header", "t,x1,x2,y\n0,1,2,3\n0.1,1,2,3\n");
    CHECK_THROWS_AS(load_csv(path, 1), ParseError);
  }
}

TEST_CASE("save_csv round-trips exactly") {
  const MatrixXd x = test::random_points(50, 3, 11);
  const VectorXd y = test::random_vector(50, 12);
  const auto ds = make_dataset(x, y, 0.01);
  const auto path = test::scratch_dir("roundtrip") / "ds.csv";
  save_csv(path.string(), ds);
  const auto back = load_csv(path.string(), 3);
  CHECK(back.covariates == ds.covariates);
  CHECK(back.responses == ds.responses);
  CHECK(back.dt == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("analog_vector examples") {
  const auto ds = series({1, 2, 3, 4, 5});
  const auto a = analog_vector(ds, 2);
  CHECK(a.values == vec({3, 4, 5, 0, 0}));
  CHECK(a.shift == 2);
  CHECK(a.tau == doctest::Approx(1.0));

  const auto short_ds = series({1, 2, 3});
  CHECK(analog_vector(short_ds, 0).values == vec({1, 2, 3}));
  CHECK(analog_vector(short_ds, 3).values == vec({0, 0, 0}));
  CHECK_THROWS_AS(analog_vector(short_ds, 4), ArgumentError);
}

TEST_CASE("analog_vector applies the response transform") {
  const auto ds = series({1, 5, 2, 7});
  const auto a = analog_vector(ds, 1, ResponseTransform::indicator(3.0));
  CHECK(a.values == vec({1, 0, 1, 0}));
}

TEST_CASE("analog shifts compose on their common support") {
  const VectorXd y = test::random_vector(40, 3);
  const auto ds = make_dataset(MatrixXd(y), y, 1.0);
  CHECK(analog_vector(ds, 0).values == y);
  for (Index q1 : {0, 3, 7})
    for (Index q2 : {0, 2, 9}) {
      const VectorXd twice = shift_sequence(analog_vector(ds, q1).values, q2);
      const VectorXd once = analog_vector(ds, q1 + q2).values;
      const Index support = 40 - q1 - q2;
      CHECK(twice.head(support) == once.head(support));
    }
}

TEST_CASE("delay_embed examples") {
  const auto ds = series({10, 20, 30, 40});
  const auto same = delay_embed(ds, 1);
  CHECK(same.covariates == ds.covariates);
  CHECK(same.responses == ds.responses);

  const auto e = delay_embed(ds, 2);
  CHECK(e.size() == 3);
  CHECK(e.dim() == 2);
  MatrixXd expected(3, 2);
  expected << 20, 10, 30, 20, 40, 30;
  CHECK(e.covariates == expected);
  CHECK(e.responses == vec({20, 30, 40}));

  CHECK_THROWS_AS(delay_embed(ds, 5), ArgumentError);
}

TEST_CASE("delay_embed shape on multivariate data") {
  const auto ds =
      make_dataset(test::random_points(30, 3, 5), test::random_vector(30, 6), 0.1);
  const auto e = delay_embed(ds, 4);
  CHECK(e.dim() == 12);
  CHECK(e.size() == 27);
  CHECK(e.covariates.row(0).segment(9, 3) == ds.covariates.row(0));
  CHECK(e.covariates.row(0).segment(0, 3) == ds.covariates.row(3));
}

TEST_CASE("empirical_moments examples") {
  auto m = empirical_moments(series({1, 1, 1}));
  CHECK(m.mean == 1.0);
  CHECK(m.std == 0.0);
  m = empirical_moments(series({0, 2}));
  CHECK(m.mean == doctest::Approx(1.0));
  CHECK(m.std == doctest::Approx(1.0));
  m = empirical_moments(series({3, 4, 5, 6}));
  CHECK(m.mean == doctest::Approx(4.5));
  CHECK(m.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("format_double gives shortest round-trip text") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_double(x)) == x);
}
