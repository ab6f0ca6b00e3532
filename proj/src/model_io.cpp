#include "kaf/model_io.hpp"

#include "kaf/errors.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace kaf {

namespace {

constexpr const char *kMagic = "kaf-model v1";

struct ArrayEntry {
  std::string name;
  const MatrixXd *data = nullptr;
};

void write_raw(std::ostream &out, const MatrixXd &m) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char *>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  } else {
    for (Index i = 0; i < m.size(); ++i) {
      char bytes[sizeof(double)];
      std::memcpy(bytes, m.data() + i, sizeof(double));
      std::reverse(bytes, bytes + sizeof(double));
      out.write(bytes, sizeof(double));
    }
  }
}

void read_raw(std::istream &in, MatrixXd &m) {
  in.read(reinterpret_cast<char *>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in)
    throw FormatError("model file is truncated");
  if constexpr (std::endian::native != std::endian::little) {
    for (Index i = 0; i < m.size(); ++i) {
      auto *bytes = reinterpret_cast<char *>(m.data() + i);
      std::reverse(bytes, bytes + sizeof(double));
    }
  }
}

MatrixXd as_matrix(const VectorXd &v) { return MatrixXd(v); }

std::string join_leads(const std::vector<Index> &leads) {
  std::string s;
  for (std::size_t k = 0; k < leads.size(); ++k) {
    if (k)
      s += ',';
    s += std::to_string(leads[k]);
  }
  return s;
}

class Metadata {
public:
  void set(const std::string &key, const std::string &value) {
    values_[key] = value;
  }
  const std::string &get(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw FormatError("model file lacks '" + key + "'");
    return it->second;
  }
  double number(const std::string &key) const {
    const std::string &s = get(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw FormatError("bad number for '" + key + "': " + s);
    return v;
  }
  Index integer(const std::string &key) const {
    const std::string &s = get(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw FormatError("bad integer for '" + key + "': " + s);
    return static_cast<Index>(v);
  }

private:
  std::map<std::string, std::string> values_;
};

std::vector<Index> parse_leads(const std::string &s) {
  std::vector<Index> leads;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    long long v = 0;
    const auto [ptr, ec] =
        std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw FormatError("bad lead list: " + s);
    leads.push_back(static_cast<Index>(v));
  }
  if (leads.empty())
    throw FormatError("model file has no leads");
  return leads;
}

} // namespace

void write_model(std::ostream &out, const ForecastModel &model) {
  const NormalizedKernel &kernel = basis_kernel(model.basis);
  const ResolvedKernel &base = kernel.base();
  const bool biorthogonal =
      std::holds_alternative<BiorthogonalBasis>(model.basis);

  out << kMagic << '\n';
  out << "basis=" << (biorthogonal ? "biorthogonal" : "symmetric") << '\n';
  out << "kernel=" << to_string(base.family()) << '\n';
  out << "epsilon=" << format_double(base.epsilon()) << '\n';
  out << "epsilon_tilde=" << format_double(base.epsilon_tilde()) << '\n';
  out << "m_tilde=" << format_double(base.m_tilde()) << '\n';
  out << "delays=" << base.delays() << '\n';
  out << "normalization=" << to_string(kernel.mode()) << '\n';
  out << "alpha=" << format_double(kernel.alpha()) << '\n';
  out << "n=" << model.size() << '\n';
  out << "dim=" << base.dim() << '\n';
  out << "ell=" << model.ell() << '\n';
  out << "leads=" << join_leads(model.leads) << '\n';
  out << "dt=" << format_double(model.dt) << '\n';
  out << "transform="
      << (model.transform.kind == ResponseTransform::Kind::indicator
              ? "indicator"
              : "identity")
      << '\n';
  out << "threshold=" << format_double(model.transform.threshold) << '\n';
  out << "response_mean=" << format_double(model.response_stats.mean) << '\n';
  out << "response_std=" << format_double(model.response_stats.std) << '\n';

  const MatrixXd points = base.training_points();
  const MatrixXd r = as_matrix(base.r_values());
  const MatrixXd u = as_matrix(kernel.u());
  const MatrixXd v = as_matrix(kernel.v());
  std::vector<ArrayEntry> arrays{
      {"points", &points}, {"r", &r}, {"u", &u}, {"v", &v}};
  MatrixXd values;
  if (biorthogonal) {
    const auto &b = std::get<BiorthogonalBasis>(model.basis);
    values = as_matrix(b.etas);
    arrays.push_back({"etas", &values});
    arrays.push_back({"hat_phis", &b.hat_phis});
    arrays.push_back({"xis", &b.xis});
    arrays.push_back({"xi_primes", &b.xi_primes});
  } else {
    const auto &b = std::get<SpectralBasis>(model.basis);
    values = as_matrix(b.lambdas);
    arrays.push_back({"lambdas", &values});
    arrays.push_back({"phis", &b.phis});
  }
  arrays.push_back({"alphas", &model.alphas});
  if (model.has_variance())
    arrays.push_back({"variance_alphas", &model.variance_alphas});

  for (const auto &a : arrays)
    out << "array " << a.name << ' ' << a.data->rows() << ' '
        << a.data->cols() << '\n';
  out << "end\n";
  for (const auto &a : arrays)
    write_raw(out, *a.data);
  if (!out)
    throw Error("failed to write model");
}

ForecastModel read_model(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw FormatError("not a kaf model file");

  Metadata meta;
  std::vector<std::pair<std::string, std::pair<Index, Index>>> layout;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    if (line.rfind("array ", 0) == 0) {
      std::istringstream ls(line.substr(6));
      std::string name;
      long long rows = -1, cols = -1;
      if (!(ls >> name >> rows >> cols) || rows < 0 || cols < 0)
        throw FormatError("bad array line: " + line);
      layout.push_back({name, {rows, cols}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("bad metadata line: " + line);
    meta.set(line.substr(0, eq), line.substr(eq + 1));
  }
  if (!ended)
    throw FormatError("model header is not terminated");

  std::map<std::string, MatrixXd> arrays;
  for (const auto &[name, shape] : layout) {
    MatrixXd m(shape.first, shape.second);
    read_raw(in, m);
    arrays[name] = std::move(m);
  }
  const auto take = [&arrays](const std::string &name) -> MatrixXd {
    auto it = arrays.find(name);
    if (it == arrays.end())
      throw FormatError("model file lacks array '" + name + "'");
    return std::move(it->second);
  };

  const Index n = meta.integer("n");
  const Index dim = meta.integer("dim");
  MatrixXd points = take("points");
  if (points.rows() != n || points.cols() != dim)
    throw FormatError("training points have the wrong shape");

  ResolvedKernel base(parse_kernel_family(meta.get("kernel")),
                      std::move(points), take("r").col(0),
                      meta.number("epsilon"), meta.number("epsilon_tilde"),
                      meta.number("m_tilde"), meta.integer("delays"));
  auto kernel = std::make_shared<const NormalizedKernel>(
      std::move(base), parse_normalization_mode(meta.get("normalization")),
      meta.number("alpha"), take("u").col(0), take("v").col(0));

  ForecastModel model;
  if (meta.get("basis") == "biorthogonal") {
    BiorthogonalBasis b;
    b.etas = take("etas").col(0);
    b.hat_phis = take("hat_phis");
    b.xis = take("xis");
    b.xi_primes = take("xi_primes");
    b.d = kernel->d();
    b.kernel = kernel;
    model.basis = std::move(b);
  } else if (meta.get("basis") == "symmetric") {
    SpectralBasis b;
    b.lambdas = take("lambdas").col(0);
    b.phis = take("phis");
    b.kernel = kernel;
    model.basis = std::move(b);
  } else {
    throw FormatError("unknown basis kind '" + meta.get("basis") + "'");
  }

  model.leads = parse_leads(meta.get("leads"));
  model.alphas = take("alphas");
  if (arrays.count("variance_alphas"))
    model.variance_alphas = take("variance_alphas");
  model.dt = meta.number("dt");
  const std::string &kind = meta.get("transform");
  if (kind == "indicator")
    model.transform = ResponseTransform::indicator(meta.number("threshold"));
  else if (kind == "identity")
    model.transform = ResponseTransform::identity();
  else
    throw FormatError("unknown transform '" + kind + "'");
  model.transform.threshold = meta.number("threshold");
  model.response_stats = {meta.number("response_mean"),
                          meta.number("response_std")};

  const Index ell = meta.integer("ell");
  if (model.ell() != ell || model.size() != n ||
      model.alphas.rows() != ell ||
      model.alphas.cols() != static_cast<Index>(model.leads.size()))
    throw FormatError("model arrays are inconsistent with the metadata");
  return model;
}

void save_model(const std::string &path, const ForecastModel &model) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open '" + path + "' for writing");
  write_model(out, model);
}

ForecastModel load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path + "'");
  return read_model(in);
}

} // namespace kaf
