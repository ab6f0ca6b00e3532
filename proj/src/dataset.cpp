#include "kaf/dataset.hpp"
#include "kaf/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace kaf {

TimeSeriesDataset make_dataset(MatrixXd covariates, VectorXd responses,
                               double dt) {
  if (responses.size() < 1)
    throw ValidationError("dataset must contain at least one sample");
  if (covariates.rows() != responses.size())
    throw ValidationError("covariates and responses differ in length");
  if (covariates.cols() < 1)
    throw ValidationError("covariate dimension must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError("sampling interval must be positive and finite");
  if (!covariates.allFinite() || !responses.allFinite())
    throw ValidationError("dataset contains non-finite entries");
  return {std::move(covariates), std::move(responses), dt};
}

VectorXd shift_sequence(const VectorXd &values, Index q) {
  const Index n = values.size();
  if (q < 0 || q > n)
    throw ArgumentError("shift " + std::to_string(q) +
                        " outside [0, " + std::to_string(n) + "]");
  VectorXd out = VectorXd::Zero(n);
  out.head(n - q) = values.tail(n - q);
  return out;
}

AnalogVector analog_vector(const TimeSeriesDataset &ds, Index q,
                           const ResponseTransform &gamma) {
  if (q < 0 || q > ds.size())
    throw ArgumentError("lead of " + std::to_string(q) +
                        " steps exceeds sample count " +
                        std::to_string(ds.size()));
  AnalogVector a;
  a.shift = q;
  a.tau = static_cast<double>(q) * ds.dt;
  a.values = shift_sequence(gamma.apply(ds.responses), q);
  return a;
}

TimeSeriesDataset delay_embed(const TimeSeriesDataset &ds, Index delays) {
  if (delays < 1)
    throw ArgumentError("number of delays must be positive");
  if (delays > ds.size())
    throw ArgumentError("number of delays exceeds sample count");
  const Index n = ds.size();
  const Index m = ds.dim();
  const Index rows = n - delays + 1;
  TimeSeriesDataset out;
  out.dt = ds.dt;
  out.covariates.resize(rows, m * delays);
  for (Index r = 0; r < rows; ++r) {
    const Index j = r + delays - 1;
    for (Index lag = 0; lag < delays; ++lag)
      out.covariates.block(r, lag * m, 1, m) = ds.covariates.row(j - lag);
  }
  out.responses = ds.responses.tail(rows);
  return out;
}

Moments empirical_moments(const VectorXd &values) {
  const double n = static_cast<double>(values.size());
  Moments mo;
  if (values.size() == 0)
    return mo;
  mo.mean = values.sum() / n;
  mo.std = std::sqrt((values.array() - mo.mean).square().sum() / n);
  return mo;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    fields.push_back(field);
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string &raw, long line) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  if (!s.empty() && *first == '+')
    ++first;
  auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last)
    throw ParseError("cannot parse number '" + s + "'", line);
  return v;
}

} // namespace

TimeSeriesDataset load_csv(const std::string &path, Index covariate_dim) {
  if (covariate_dim < 1)
    throw ArgumentError("covariate dimension must be positive");
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path + "'");

  const std::size_t width = static_cast<std::size_t>(covariate_dim) + 2;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  std::vector<double> t, x, y;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != width || trim(fields.front()) != "t" ||
          trim(fields.back()) != "y")
        throw ParseError("expected header t,x1,...,x" +
                             std::to_string(covariate_dim) + ",y",
                         line_no);
      continue;
    }
    if (fields.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    t.push_back(parse_number(fields[0], line_no));
    for (std::size_t k = 1; k + 1 < width; ++k)
      x.push_back(parse_number(fields[k], line_no));
    y.push_back(parse_number(fields.back(), line_no));
  }
  if (!header_seen)
    throw ParseError("missing header row", line_no);

  const Index n = static_cast<Index>(y.size());
  if (n < 2)
    throw ValidationError("need at least two samples to infer dt, got " +
                          std::to_string(n));
  const double dt = t[1] - t[0];
  if (!(dt > 0.0))
    throw SpacingError("time stamps must be increasing");
  for (Index k = 2; k < n; ++k) {
    const double step = t[k] - t[k - 1];
    if (std::abs(step - dt) > 1e-9 * dt)
      throw SpacingError("non-uniform spacing at sample " + std::to_string(k) +
                         ": step " + format_double(step) + " vs dt " +
                         format_double(dt));
  }
  MatrixXd cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>(
      x.data(), n, covariate_dim);
  VectorXd resp = Eigen::Map<const VectorXd>(y.data(), n);
  return make_dataset(std::move(cov), std::move(resp), dt);
}

void save_csv(const std::string &path, const TimeSeriesDataset &ds,
              double t0) {
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write '" + path + "'");
  out << 't';
  for (Index k = 0; k < ds.dim(); ++k)
    out << ",x" << (k + 1);
  out << ",y\n";
  for (Index j = 0; j < ds.size(); ++j) {
    out << format_double(t0 + static_cast<double>(j) * ds.dt);
    for (Index k = 0; k < ds.dim(); ++k)
      out << ',' << format_double(ds.covariates(j, k));
    out << ',' << format_double(ds.responses(j)) << '\n';
  }
  if (!out)
    throw Error("write failed for '" + path + "'");
}

} // namespace kaf

namespace kaf {

Index csv_covariate_dim(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line);
    if (fields.size() < 3 || trim(fields.front()) != "t" ||
        trim(fields.back()) != "y")
      throw ParseError("expected header t,x1,...,xm,y", line_no);
    return static_cast<Index>(fields.size()) - 2;
  }
  throw ParseError("missing header row", line_no);
}

TimeSeriesDataset load_csv(const std::string &path) {
  return load_csv(path, csv_covariate_dim(path));
}

} // namespace kaf
