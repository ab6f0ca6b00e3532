#pragma once

#include "kaf/types.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

namespace kaf::test {

inline MatrixXd random_points(Index n, Index m, std::uint64_t seed,
                              double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  MatrixXd x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      x(i, j) = dist(gen);
  return x;
}

inline VectorXd random_vector(Index n, std::uint64_t seed) {
  return random_points(n, 1, seed).col(0);
}

/// Gaussian kernel matrix built entry by entry.
inline MatrixXd naive_gaussian(const MatrixXd &x, double eps) {
  MatrixXd k(x.rows(), x.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.rows(); ++j)
      k(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / eps);
  return k;
}

/// Fresh scratch directory under the system temp location.
inline std::filesystem::path scratch_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("kaf_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double max_abs(const MatrixXd &m) { return m.cwiseAbs().maxCoeff(); }

} // namespace kaf::test
