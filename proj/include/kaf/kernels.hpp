#pragma once

#include "kaf/errors.hpp"
#include "kaf/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace kaf {

enum class KernelFamily { gaussian, variable_bandwidth };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string &name);

/// Kernel family plus bandwidth parameters. An empty optional means the
/// parameter is tuned from the data. `delays` > 1 declares that covariates
/// are delay-embedded, in which case distances are averaged over the lags.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  std::optional<double> epsilon;
  std::optional<double> epsilon_tilde;
  std::optional<double> m_tilde;
  Index delays = 1;
};

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar
squared_distance(const Eigen::MatrixBase<DerivedA> &x,
                 const Eigen::MatrixBase<DerivedB> &xp) {
  if (x.size() != xp.size())
    throw ArgumentError("kernel arguments differ in dimension");
  return (x - xp).squaredNorm();
}

/// Lag-averaged squared distance (1/q) sum_j |x_j - x'_j|^2 between two
/// delay-embedded vectors made of `delays` equal-length blocks.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar
delay_distance(const Eigen::MatrixBase<DerivedA> &x,
               const Eigen::MatrixBase<DerivedB> &xp, Index delays) {
  using Scalar = typename DerivedA::Scalar;
  if (delays < 1 || x.size() % delays != 0)
    throw ArgumentError("vector length is not a multiple of the delay count");
  return squared_distance(x, xp) / static_cast<Scalar>(delays);
}

/// exp(-t) kept strictly positive: far pairs whose value would underflow
/// get the smallest normal number instead of zero.
template <typename Scalar> Scalar positive_exp(Scalar t) {
  using std::exp;
  return std::max(exp(-t), std::numeric_limits<Scalar>::min());
}

/// exp(-|x - x'|^2 / epsilon)
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar gaussian_eval(typename DerivedA::Scalar epsilon,
                                        const Eigen::MatrixBase<DerivedA> &x,
                                        const Eigen::MatrixBase<DerivedB> &xp) {
  if (!(epsilon > 0))
    throw ArgumentError("bandwidth must be positive");
  return positive_exp(squared_distance(x, xp) / epsilon);
}

/// exp(-|x - x'|^2 / (epsilon r(x) r(x')))
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar vb_eval(typename DerivedA::Scalar epsilon,
                                  typename DerivedA::Scalar rx,
                                  typename DerivedA::Scalar rxp,
                                  const Eigen::MatrixBase<DerivedA> &x,
                                  const Eigen::MatrixBase<DerivedB> &xp) {
  if (!(rx > 0) || !(rxp > 0))
    throw ArgumentError("bandwidth function values must be positive");
  if (!(epsilon > 0))
    throw ArgumentError("bandwidth must be positive");
  return positive_exp(squared_distance(x, xp) / (epsilon * rx * rxp));
}

/// Kernel density estimate
///   q(x) = (pi eps~)^(-m~/2) (1/n) sum_j exp(-d(x, x_j) / eps~)
/// where the rows of `points` are the x_j and d is the lag-averaged squared
/// distance.
double density_estimate(const MatrixXd &points, double epsilon_tilde,
                        double m_tilde, const RowVectorXd &x,
                        Index delays = 1);

/// `count` log-spaced values from lo to hi inclusive.
VectorXd log_grid(double lo, double hi, Index count);

/// Default tuning grid: 200 values in [1e-8, 1e8].
VectorXd default_bandwidth_grid();

struct BandwidthTuning {
  double epsilon = 0.0;
  double m_tilde = 0.0;
  double max_slope = 0.0;
};

/// Picks the grid bandwidth where the centered log-log slope of
/// S(eps) = (1/n^2) sum_ij exp(-d_ij / eps) peaks; the dimension estimate is
/// twice that slope. `sq_dists` is a symmetric matrix of pairwise distances.
BandwidthTuning tune_bandwidth(const MatrixXd &sq_dists, const VectorXd &grid);

/// Pairwise lag-averaged squared distances between the rows of `points`.
MatrixXd pairwise_sq_distances(const MatrixXd &points, Index delays = 1);

/// Bandwidth function r_n(x_j) = q_n(x_j)^(-1/m~) at the training points.
struct BandwidthInfo {
  VectorXd r_values;
  double epsilon = 0.0;
  double epsilon_tilde = 0.0;
  double m_tilde = 0.0;
};

BandwidthInfo bandwidth_function(const MatrixXd &points, double epsilon_tilde,
                                 double m_tilde, Index delays = 1);

/// Kernel with every bandwidth parameter resolved against a training set.
/// Training points are stored column-wise.
class ResolvedKernel {
public:
  ResolvedKernel() = default;
  ResolvedKernel(KernelFamily family, MatrixXd points, VectorXd r_values,
                 double epsilon, double epsilon_tilde, double m_tilde,
                 Index delays);

  KernelFamily family() const { return family_; }
  double epsilon() const { return epsilon_; }
  double epsilon_tilde() const { return epsilon_tilde_; }
  double m_tilde() const { return m_tilde_; }
  Index delays() const { return delays_; }
  Index size() const { return points_.cols(); }
  Index dim() const { return points_.rows(); }

  /// Training points as an n x m matrix.
  MatrixXd training_points() const { return points_.transpose(); }
  const VectorXd &r_values() const { return r_; }

  /// Bandwidth function at an arbitrary point (1 for the plain Gaussian).
  double bandwidth(const RowVectorXd &x) const;

  /// n x n training kernel matrix, exactly symmetric with unit diagonal.
  MatrixXd matrix() const;

  /// Q x n matrix of kernel values between query rows and training points.
  MatrixXd cross(const MatrixXd &queries) const;

  /// Kernel values between one query and every training point.
  VectorXd row(const RowVectorXd &x) const;

  /// Resolved values echoed back as a spec (no auto fields).
  KernelSpec spec() const;

private:
  double eval_scaled(double dist, double rx, double rxp) const {
    return positive_exp(dist / (epsilon_ * rx * rxp));
  }

  KernelFamily family_ = KernelFamily::gaussian;
  MatrixXd points_; // m x n
  VectorXd r_;
  double epsilon_ = 1.0;
  double epsilon_tilde_ = 0.0;
  double m_tilde_ = 0.0;
  Index delays_ = 1;
};

struct KernelTuningReport {
  BandwidthTuning density;   // eps~ and m~ (variable bandwidth only)
  BandwidthTuning bandwidth; // eps
  bool tuned_density = false;
  bool tuned_bandwidth = false;
};

/// Resolves every "auto" parameter of `spec` on the rows of `points`. Sets
/// of more than 5000 points are tuned on a strided subsample of 2000.
ResolvedKernel fit_kernel(const KernelSpec &spec, const MatrixXd &points,
                          KernelTuningReport *report = nullptr);

/// Convenience: fit_kernel(spec, points).matrix().
MatrixXd kernel_matrix(const KernelSpec &spec, const MatrixXd &points);

} // namespace kaf
