#include "kaf/normalization.hpp"

#include <algorithm>

namespace kaf {

std::string to_string(NormalizationMode mode) {
  switch (mode) {
  case NormalizationMode::none:
    return "none";
  case NormalizationMode::symmetric_markov:
    return "symmetric_markov";
  case NormalizationMode::diffusion:
    return "diffusion";
  }
  return "unknown";
}

NormalizationMode parse_normalization_mode(const std::string &name) {
  if (name == "none")
    return NormalizationMode::none;
  if (name == "symmetric_markov" || name == "markov")
    return NormalizationMode::symmetric_markov;
  if (name == "diffusion")
    return NormalizationMode::diffusion;
  throw ArgumentError("unknown normalization '" + name + "'");
}

namespace {
constexpr Index kQueryBlock = 1024;
}

NormalizedKernel::NormalizedKernel(ResolvedKernel base, NormalizationMode mode,
                                   double alpha, VectorXd u, VectorXd v)
    : base_(std::move(base)), mode_(mode), alpha_(alpha), u_(std::move(u)),
      v_(std::move(v)) {
  const Index n = base_.size();
  if (mode_ == NormalizationMode::none) {
    u_ = VectorXd::Ones(n);
    v_ = VectorXd::Ones(n);
  }
  if (u_.size() != n || v_.size() != n)
    throw ArgumentError("normalization functions do not match the kernel");
  if ((u_.array() <= 0.0).any() || (v_.array() <= 0.0).any())
    throw ArgumentError("normalization functions must be positive");
  u_alpha_ = mode_ == NormalizationMode::diffusion
                 ? VectorXd(u_.array().pow(alpha_))
                 : VectorXd::Ones(n);
  d_ = mode_ == NormalizationMode::diffusion ? VectorXd(v_.cwiseQuotient(u_alpha_))
                                             : VectorXd::Ones(n);
  if (mode_ == NormalizationMode::symmetric_markov)
    middle_ = v_.cwiseInverse().asDiagonal() * base_.matrix() *
              u_.cwiseInverse().asDiagonal();
}

MatrixXd NormalizedKernel::normalize_rows(const MatrixXd &raw) const {
  const double inv_n = 1.0 / static_cast<double>(size());
  switch (mode_) {
  case NormalizationMode::none:
    return raw;
  case NormalizationMode::symmetric_markov: {
    const VectorXd ux = raw.rowwise().sum() * inv_n;
    return (ux.cwiseInverse() * inv_n).asDiagonal() * (raw * middle_);
  }
  case NormalizationMode::diffusion: {
    const MatrixXd scaled = raw * u_alpha_.cwiseInverse().asDiagonal();
    const VectorXd vx = scaled.rowwise().sum() * inv_n;
    return vx.cwiseInverse().asDiagonal() * scaled;
  }
  }
  return raw;
}

VectorXd NormalizedKernel::oos_row(const RowVectorXd &x) const {
  return normalize_rows(base_.cross(MatrixXd(x))).transpose();
}

MatrixXd NormalizedKernel::oos_rows(const MatrixXd &queries) const {
  return normalize_rows(base_.cross(queries));
}

MatrixXd NormalizedKernel::apply(const MatrixXd &queries,
                                 const MatrixXd &basis) const {
  if (basis.rows() != size())
    throw ArgumentError("basis length does not match the training set");
  const double inv_n = 1.0 / static_cast<double>(size());
  // Fold the right-hand normalization into the basis once.
  MatrixXd folded;
  switch (mode_) {
  case NormalizationMode::none:
    folded = basis;
    break;
  case NormalizationMode::symmetric_markov:
    folded = middle_ * basis;
    break;
  case NormalizationMode::diffusion:
    folded = u_alpha_.cwiseInverse().asDiagonal() * basis;
    break;
  }

  const Index q = queries.rows();
  MatrixXd out(q, basis.cols());
  for (Index start = 0; start < q; start += kQueryBlock) {
    const Index len = std::min(kQueryBlock, q - start);
    const MatrixXd raw = base_.cross(queries.middleRows(start, len));
    MatrixXd block = raw * folded;
    switch (mode_) {
    case NormalizationMode::none:
      break;
    case NormalizationMode::symmetric_markov: {
      const VectorXd ux = raw.rowwise().sum() * inv_n;
      block = (ux.cwiseInverse() * inv_n).asDiagonal() * block;
      break;
    }
    case NormalizationMode::diffusion: {
      const VectorXd vx = (raw * u_alpha_.cwiseInverse()) * inv_n;
      block = vx.cwiseInverse().asDiagonal() * block;
      break;
    }
    }
    out.middleRows(start, len) = block;
  }
  return out;
}

NormalizedFit normalize(const ResolvedKernel &base, NormalizationMode mode,
                        double alpha) {
  MatrixXd k = base.matrix();
  switch (mode) {
  case NormalizationMode::none: {
    const Index n = k.rows();
    return {NormalizedKernel(base, mode, alpha, VectorXd::Ones(n),
                             VectorXd::Ones(n)),
            std::move(k)};
  }
  case NormalizationMode::symmetric_markov: {
    auto m = markov_normalize(k);
    k.resize(0, 0);
    return {NormalizedKernel(base, mode, alpha, std::move(m.u), std::move(m.v)),
            std::move(m.p)};
  }
  case NormalizationMode::diffusion: {
    auto m = diffusion_normalize(k, alpha);
    return {NormalizedKernel(base, mode, alpha, std::move(m.u), std::move(m.v)),
            std::move(m.p)};
  }
  }
  throw ArgumentError("unknown normalization mode");
}

} // namespace kaf
