#include "kaf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace kaf {

std::string to_string(KernelFamily family) {
  switch (family) {
  case KernelFamily::gaussian:
    return "gaussian";
  case KernelFamily::variable_bandwidth:
    return "variable_bandwidth";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string &name) {
  if (name == "gaussian")
    return KernelFamily::gaussian;
  if (name == "variable_bandwidth" || name == "vb")
    return KernelFamily::variable_bandwidth;
  throw ArgumentError("unknown kernel family '" + name + "'");
}

namespace {

// Underflow limit of exp(-t) for doubles; larger exponents contribute 0.
constexpr double kExpCutoff = 745.2;

void check_delays(Index dim, Index delays) {
  if (delays < 1 || dim % delays != 0)
    throw ArgumentError("covariate dimension " + std::to_string(dim) +
                        " is not a multiple of " + std::to_string(delays) +
                        " delays");
}

double col_distance(const MatrixXd &a, Index i, const MatrixXd &b, Index j,
                    double inv_delays) {
  return (a.col(i) - b.col(j)).squaredNorm() * inv_delays;
}

// Upper-triangle entries of a symmetric distance matrix, sorted ascending.
std::vector<double> sorted_upper(const MatrixXd &d) {
  std::vector<double> v;
  const Index n = d.rows();
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i)
      v.push_back(d(i, j));
  std::sort(v.begin(), v.end());
  return v;
}

double log_kernel_sum(const std::vector<double> &upper, Index n, double eps) {
  double acc = 0.0;
  for (double d : upper) {
    const double t = d / eps;
    if (t > kExpCutoff)
      break;
    acc += std::exp(-t);
  }
  const double nn = static_cast<double>(n);
  return std::log((nn + 2.0 * acc) / (nn * nn));
}

double slope_at(const std::vector<double> &upper, Index n, double eps) {
  const double h = 0.5 * std::log(10.0) * 16.0 / 199.0; // default grid step
  const double lo = eps * std::exp(-h);
  const double hi = eps * std::exp(h);
  return (log_kernel_sum(upper, n, hi) - log_kernel_sum(upper, n, lo)) /
         (2.0 * h);
}

std::vector<Index> tuning_subsample(Index n) {
  constexpr Index kThreshold = 5000;
  constexpr Index kSubsample = 2000;
  std::vector<Index> idx;
  if (n <= kThreshold) {
    idx.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      idx[static_cast<std::size_t>(i)] = i;
    return idx;
  }
  idx.reserve(kSubsample);
  for (Index k = 0; k < kSubsample; ++k)
    idx.push_back(k * n / kSubsample);
  return idx;
}

} // namespace

double density_estimate(const MatrixXd &points, double epsilon_tilde,
                        double m_tilde, const RowVectorXd &x, Index delays) {
  if (!(epsilon_tilde > 0.0) || !(m_tilde > 0.0))
    throw ArgumentError("density bandwidth and dimension must be positive");
  if (x.size() != points.cols())
    throw ArgumentError("query dimension does not match the point set");
  check_delays(points.cols(), delays);
  const double inv_delays = 1.0 / static_cast<double>(delays);
  double acc = 0.0;
  for (Index j = 0; j < points.rows(); ++j)
    acc += std::exp(-(points.row(j) - x).squaredNorm() * inv_delays /
                    epsilon_tilde);
  const double norm =
      std::pow(std::numbers::pi * epsilon_tilde, -0.5 * m_tilde);
  return norm * acc / static_cast<double>(points.rows());
}

VectorXd log_grid(double lo, double hi, Index count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw ArgumentError("invalid logarithmic grid");
  VectorXd g(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (Index k = 0; k < count; ++k)
    g(k) = std::exp(a + (b - a) * static_cast<double>(k) /
                            static_cast<double>(count - 1));
  return g;
}

VectorXd default_bandwidth_grid() { return log_grid(1e-8, 1e8, 200); }

BandwidthTuning tune_bandwidth(const MatrixXd &sq_dists, const VectorXd &grid) {
  const Index n = sq_dists.rows();
  if (sq_dists.cols() != n)
    throw ArgumentError("distance matrix must be square");
  if (grid.size() < 3)
    throw ArgumentError("tuning grid needs at least 3 points");
  if (!(grid(grid.size() - 1) / grid(0) >= 1e4))
    throw ArgumentError("tuning grid must span at least 4 decades");
  if (n < 2)
    throw DegenerateDataError("bandwidth tuning needs at least two points");

  const std::vector<double> upper = sorted_upper(sq_dists);
  if (upper.back() <= 0.0)
    throw DegenerateDataError("all data points coincide");

  const Index g = grid.size();
  VectorXd log_s(g);
  for (Index k = 0; k < g; ++k)
    log_s(k) = log_kernel_sum(upper, n, grid(k));

  BandwidthTuning best;
  best.max_slope = -std::numeric_limits<double>::infinity();
  for (Index k = 1; k + 1 < g; ++k) {
    const double slope = (log_s(k + 1) - log_s(k - 1)) /
                         (std::log(grid(k + 1)) - std::log(grid(k - 1)));
    if (slope > best.max_slope) {
      best.max_slope = slope;
      best.epsilon = grid(k);
    }
  }
  if (!(best.max_slope > 1e-6))
    throw TuningError("kernel sum is flat over the bandwidth grid");
  best.m_tilde = 2.0 * best.max_slope;
  return best;
}

MatrixXd pairwise_sq_distances(const MatrixXd &points, Index delays) {
  check_delays(points.cols(), delays);
  const MatrixXd cols = points.transpose();
  const Index n = cols.cols();
  const double inv_delays = 1.0 / static_cast<double>(delays);
  MatrixXd d(n, n);
  for (Index j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (Index i = 0; i < j; ++i) {
      const double v = col_distance(cols, i, cols, j, inv_delays);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

BandwidthInfo bandwidth_function(const MatrixXd &points, double epsilon_tilde,
                                 double m_tilde, Index delays) {
  if (!(epsilon_tilde > 0.0) || !(m_tilde > 0.0))
    throw ArgumentError("density bandwidth and dimension must be positive");
  check_delays(points.cols(), delays);
  const MatrixXd cols = points.transpose();
  const Index n = cols.cols();
  const double inv_delays = 1.0 / static_cast<double>(delays);

  // Symmetric accumulation of the density sums.
  VectorXd acc = VectorXd::Ones(n);
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const double e =
          std::exp(-col_distance(cols, i, cols, j, inv_delays) / epsilon_tilde);
      acc(i) += e;
      acc(j) += e;
    }
  const double norm =
      std::pow(std::numbers::pi * epsilon_tilde, -0.5 * m_tilde);
  BandwidthInfo info;
  info.epsilon_tilde = epsilon_tilde;
  info.m_tilde = m_tilde;
  info.r_values =
      (acc * (norm / static_cast<double>(n))).array().pow(-1.0 / m_tilde);
  if (!info.r_values.allFinite() || (info.r_values.array() <= 0.0).any())
    throw TuningError("bandwidth function is not finite and positive");
  return info;
}

ResolvedKernel::ResolvedKernel(KernelFamily family, MatrixXd points,
                               VectorXd r_values, double epsilon,
                               double epsilon_tilde, double m_tilde,
                               Index delays)
    : family_(family), points_(points.transpose()), r_(std::move(r_values)),
      epsilon_(epsilon), epsilon_tilde_(epsilon_tilde), m_tilde_(m_tilde),
      delays_(delays) {
  check_delays(points_.rows(), delays_);
  if (!(epsilon_ > 0.0))
    throw ArgumentError("bandwidth must be positive");
  if (r_.size() != points_.cols())
    throw ArgumentError("bandwidth function length does not match the data");
  if ((r_.array() <= 0.0).any())
    throw ArgumentError("bandwidth function values must be positive");
}

double ResolvedKernel::bandwidth(const RowVectorXd &x) const {
  if (family_ == KernelFamily::gaussian)
    return 1.0;
  const double q = density_estimate(training_points(), epsilon_tilde_,
                                    m_tilde_, x, delays_);
  return std::pow(q, -1.0 / m_tilde_);
}

MatrixXd ResolvedKernel::matrix() const {
  const Index n = size();
  const double inv_delays = 1.0 / static_cast<double>(delays_);
  MatrixXd k(n, n);
  for (Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Index i = 0; i < j; ++i) {
      const double v = eval_scaled(
          col_distance(points_, i, points_, j, inv_delays), r_(i), r_(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

MatrixXd ResolvedKernel::cross(const MatrixXd &queries) const {
  if (queries.cols() != dim())
    throw ArgumentError("query dimension " + std::to_string(queries.cols()) +
                        " does not match kernel dimension " +
                        std::to_string(dim()));
  const Index q = queries.rows();
  const Index n = size();
  const double inv_delays = 1.0 / static_cast<double>(delays_);
  const MatrixXd qcols = queries.transpose();

  VectorXd rq = VectorXd::Ones(q);
  if (family_ == KernelFamily::variable_bandwidth) {
    const double norm =
        std::pow(std::numbers::pi * epsilon_tilde_, -0.5 * m_tilde_);
    for (Index a = 0; a < q; ++a) {
      double acc = 0.0;
      for (Index j = 0; j < n; ++j)
        acc += std::exp(-col_distance(qcols, a, points_, j, inv_delays) /
                        epsilon_tilde_);
      rq(a) = std::pow(norm * acc / static_cast<double>(n), -1.0 / m_tilde_);
    }
  }

  MatrixXd k(q, n);
  for (Index j = 0; j < n; ++j)
    for (Index a = 0; a < q; ++a)
      k(a, j) = eval_scaled(col_distance(qcols, a, points_, j, inv_delays),
                            rq(a), r_(j));
  return k;
}

VectorXd ResolvedKernel::row(const RowVectorXd &x) const {
  return cross(MatrixXd(x)).transpose();
}

KernelSpec ResolvedKernel::spec() const {
  KernelSpec s;
  s.family = family_;
  s.epsilon = epsilon_;
  if (family_ == KernelFamily::variable_bandwidth) {
    s.epsilon_tilde = epsilon_tilde_;
    s.m_tilde = m_tilde_;
  }
  s.delays = delays_;
  return s;
}

ResolvedKernel fit_kernel(const KernelSpec &spec, const MatrixXd &points,
                          KernelTuningReport *report) {
  if (points.rows() < 1)
    throw ArgumentError("kernel needs at least one training point");
  check_delays(points.cols(), spec.delays);
  auto check_positive = [](const std::optional<double> &v, const char *name) {
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      throw ArgumentError(std::string(name) + " must be positive");
  };
  check_positive(spec.epsilon, "epsilon");
  check_positive(spec.epsilon_tilde, "epsilon_tilde");
  check_positive(spec.m_tilde, "m_tilde");

  KernelTuningReport local;
  KernelTuningReport &rep = report ? *report : local;
  rep = {};
  const Index n = points.rows();
  const std::vector<Index> sub = tuning_subsample(n);
  const VectorXd grid = default_bandwidth_grid();

  std::optional<MatrixXd> sub_dists;
  auto subsample_distances = [&]() -> const MatrixXd & {
    if (!sub_dists) {
      MatrixXd sp(static_cast<Index>(sub.size()), points.cols());
      for (std::size_t k = 0; k < sub.size(); ++k)
        sp.row(static_cast<Index>(k)) = points.row(sub[k]);
      sub_dists = pairwise_sq_distances(sp, spec.delays);
    }
    return *sub_dists;
  };

  if (spec.family == KernelFamily::gaussian) {
    double eps = 0.0;
    if (spec.epsilon) {
      eps = *spec.epsilon;
    } else {
      rep.bandwidth = tune_bandwidth(subsample_distances(), grid);
      rep.tuned_bandwidth = true;
      eps = rep.bandwidth.epsilon;
    }
    return ResolvedKernel(KernelFamily::gaussian, points, VectorXd::Ones(n),
                          eps, 0.0, 0.0, spec.delays);
  }

  // Variable bandwidth: density estimate first, then the kernel bandwidth on
  // r-scaled distances.
  double eps_t = 0.0;
  double m_t = 0.0;
  if (spec.epsilon_tilde) {
    eps_t = *spec.epsilon_tilde;
    if (spec.m_tilde) {
      m_t = *spec.m_tilde;
    } else {
      const double slope =
          slope_at(sorted_upper(subsample_distances()),
                   static_cast<Index>(sub.size()), eps_t);
      if (!(slope > 1e-6))
        throw TuningError("kernel sum is flat at the given epsilon_tilde");
      m_t = 2.0 * slope;
    }
  } else {
    rep.density = tune_bandwidth(subsample_distances(), grid);
    rep.tuned_density = true;
    eps_t = rep.density.epsilon;
    m_t = spec.m_tilde ? *spec.m_tilde : rep.density.m_tilde;
  }

  BandwidthInfo info = bandwidth_function(points, eps_t, m_t, spec.delays);
  double eps = 0.0;
  if (spec.epsilon) {
    eps = *spec.epsilon;
  } else {
    MatrixXd scaled = subsample_distances();
    for (Index j = 0; j < scaled.cols(); ++j)
      for (Index i = 0; i < scaled.rows(); ++i)
        scaled(i, j) /= info.r_values(sub[static_cast<std::size_t>(i)]) *
                        info.r_values(sub[static_cast<std::size_t>(j)]);
    rep.bandwidth = tune_bandwidth(scaled, grid);
    rep.tuned_bandwidth = true;
    eps = rep.bandwidth.epsilon;
  }
  return ResolvedKernel(KernelFamily::variable_bandwidth, points,
                        std::move(info.r_values), eps, eps_t, m_t,
                        spec.delays);
}

MatrixXd kernel_matrix(const KernelSpec &spec, const MatrixXd &points) {
  return fit_kernel(spec, points).matrix();
}

} // namespace kaf
