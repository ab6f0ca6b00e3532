#include "helpers.hpp"

#include "kaf/errors.hpp"
#include "kaf/kernels.hpp"
#include "kaf/normalization.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>

using namespace kaf;

namespace {

// Triple-loop evaluation of the bistochastic formula.
MatrixXd naive_markov(const MatrixXd &k) {
  const Index n = k.rows();
  const double dn = static_cast<double>(n);
  VectorXd u = VectorXd::Zero(n), v = VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      u(i) += k(i, j) / dn;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      v(i) += k(i, j) / u(j) / dn;
  MatrixXd p = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index m = 0; m < n; ++m)
        p(i, j) += k(i, m) * k(m, j) / (u(i) * v(m) * u(j)) / dn;
  return p;
}

double row_mean_error(const MatrixXd &p) {
  return (p.rowwise().mean().array() - 1.0).abs().maxCoeff();
}

ResolvedKernel vb_kernel(const MatrixXd &x) {
  KernelSpec spec;
  spec.family = KernelFamily::variable_bandwidth;
  spec.epsilon = 0.3;
  spec.epsilon_tilde = 0.2;
  spec.m_tilde = 2.0;
  return fit_kernel(spec, x);
}

} // namespace

TEST_CASE("markov_normalize of a constant kernel") {
  for (Index n : {1, 4, 9}) {
    const auto m = markov_normalize(MatrixXd::Ones(n, n));
    CHECK(m.u == VectorXd::Ones(n));
    CHECK(m.v == VectorXd::Ones(n));
    CHECK(m.p == MatrixXd::Ones(n, n));
  }
}

TEST_CASE("markov_normalize two-point closed form") {
  MatrixXd k(2, 2);
  k << 1.0, 0.5, 0.5, 1.0;
  const auto m = markov_normalize(k);
  // u = 3/4, v = 1, so P = (1/2) K^2 / (3/4)^2 with K^2 = [[5/4, 1], [1, 5/4]].
  const double c = 0.5 / (0.75 * 0.75);
  MatrixXd expected(2, 2);
  expected << 1.25 * c, 1.0 * c, 1.0 * c, 1.25 * c;
  CHECK(test::max_abs(m.p - expected) < 1e-15);
  CHECK(m.p == m.p.transpose());
  CHECK(row_mean_error(m.p) < 1e-15);
}

TEST_CASE("markov_normalize matches the defining sums") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const MatrixXd x = test::random_points(25, 2, seed);
    const MatrixXd k = test::naive_gaussian(x, 0.4);
    const auto m = markov_normalize(k);
    CHECK(test::max_abs(m.p - naive_markov(k)) < 1e-12);
    CHECK(m.p == m.p.transpose());
    CHECK(row_mean_error(m.p) < 1e-10);
    CHECK((m.u.array() > 0).all());
    CHECK((m.v.array() > 0).all());
  }
}

TEST_CASE("markov_normalize preserves positive definiteness") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const MatrixXd x = test::random_points(50, 3, seed);
    const MatrixXd k = test::naive_gaussian(x, 0.5);
    const auto m = markov_normalize(k);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.p);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("markov_normalize in single precision") {
  const Eigen::MatrixXf k =
      test::naive_gaussian(test::random_points(10, 2, 3), 0.5).cast<float>();
  const auto m = markov_normalize(k);
  CHECK((m.p.rowwise().mean().array() - 1.0f).abs().maxCoeff() < 1e-5f);
}

TEST_CASE("normalizations reject nonpositive entries") {
  MatrixXd k = MatrixXd::Ones(3, 3);
  k(0, 2) = k(2, 0) = 0.0;
  CHECK_THROWS_AS(markov_normalize(k), ArgumentError);
  CHECK_THROWS_AS(diffusion_normalize(k, 0.5), ArgumentError);
  k(0, 2) = k(2, 0) = -1.0;
  CHECK_THROWS_AS(markov_normalize(k), ArgumentError);
}

TEST_CASE("diffusion_normalize") {
  SUBCASE("alpha zero is plain row normalization") {
    const MatrixXd k = test::naive_gaussian(test::random_points(15, 2, 4), 0.3);
    const auto m = diffusion_normalize(k, 0.0);
    const VectorXd rows = k.rowwise().mean();
    CHECK(test::max_abs(m.p - rows.cwiseInverse().asDiagonal() * k) < 1e-14);
    CHECK(row_mean_error(m.p) < 1e-14);
  }
  SUBCASE("constant kernel") {
    const auto m = diffusion_normalize(MatrixXd::Ones(6, 6), 1.0);
    CHECK(m.p == MatrixXd::Ones(6, 6));
    CHECK((m.d.array() == m.d(0)).all());
  }
  SUBCASE("random instance: Markov property and detailed balance") {
    for (double alpha : {0.0, 0.5, 1.0}) {
      const MatrixXd k = test::naive_gaussian(test::random_points(20, 2, 8), 0.2);
      const auto m = diffusion_normalize(k, alpha);
      CHECK(row_mean_error(m.p) < 1e-12);
      const MatrixXd balance = m.d.asDiagonal() * m.p;
      CHECK(test::max_abs(balance - balance.transpose()) < 1e-12);
      CHECK((m.d.array() > 0).all());
      for (Index i = 0; i < 20; ++i)
        CHECK(m.d(i) == doctest::Approx(m.v(i) / std::pow(m.u(i), alpha)));
    }
  }
}

TEST_CASE("normalized kernel out-of-sample rows") {
  const MatrixXd x = test::random_points(80, 2, 21);
  const MatrixXd verif = test::random_points(30, 2, 22);
  const ResolvedKernel base = vb_kernel(x);

  for (auto mode : {NormalizationMode::none, NormalizationMode::symmetric_markov,
                    NormalizationMode::diffusion}) {
    CAPTURE(to_string(mode));
    const NormalizedFit fit = normalize(base, mode, 0.5);
    // Rows at training points reproduce the training matrix.
    CHECK(test::max_abs(fit.kernel.oos_rows(x.topRows(10)) -
                        fit.p.topRows(10)) < 1e-12);
    CHECK(test::max_abs(fit.kernel.oos_row(x.row(7)).transpose() -
                        fit.p.row(7)) < 1e-12);
    // Batched application equals rows times basis.
    const MatrixXd basis = test::random_points(80, 3, 23);
    CHECK(test::max_abs(fit.kernel.apply(verif, basis) -
                        fit.kernel.oos_rows(verif) * basis) < 1e-11);
    if (mode != NormalizationMode::none) {
      CHECK(row_mean_error(fit.p) < 1e-10);
      CHECK(row_mean_error(fit.kernel.oos_rows(verif)) < 1e-10);
    }
  }

  const NormalizedFit sym = normalize(base, NormalizationMode::symmetric_markov);
  CHECK(test::max_abs(sym.p - sym.p.transpose()) == 0.0);
}

TEST_CASE("symmetric Markov rows of a constant kernel") {
  KernelSpec spec;
  spec.epsilon = 1e300;
  MatrixXd x(3, 1);
  x << 0.0, 0.1, 0.2;
  const NormalizedFit fit =
      normalize(fit_kernel(spec, x), NormalizationMode::symmetric_markov);
  MatrixXd q(1, 1);
  q << 0.05;
  CHECK(test::max_abs(fit.kernel.oos_rows(q) - MatrixXd::Ones(1, 3)) < 1e-15);
}

TEST_CASE("normalized kernel rebuilt from stored functions") {
  const MatrixXd x = test::random_points(40, 2, 31);
  const ResolvedKernel base = vb_kernel(x);
  const NormalizedFit fit =
      normalize(base, NormalizationMode::diffusion, 1.0);
  const NormalizedKernel again(base, NormalizationMode::diffusion, 1.0,
                               fit.kernel.u(), fit.kernel.v());
  CHECK(again.d() == fit.kernel.d());
  const MatrixXd q = test::random_points(5, 2, 32);
  CHECK(again.oos_rows(q) == fit.kernel.oos_rows(q));
  CHECK_THROWS_AS(NormalizedKernel(base, NormalizationMode::diffusion, 1.0,
                                   VectorXd::Ones(3), VectorXd::Ones(3)),
                  ArgumentError);
  CHECK(parse_normalization_mode("markov") ==
        NormalizationMode::symmetric_markov);
  CHECK_THROWS_AS(parse_normalization_mode("laplacian"), ArgumentError);
}
