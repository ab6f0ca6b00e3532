#include "kaf/cli.hpp"

#include "kaf/dataset.hpp"
#include "kaf/errors.hpp"
#include "kaf/eval.hpp"
#include "kaf/forecast.hpp"
#include "kaf/model_io.hpp"
#include "kaf/pipeline.hpp"
#include "kaf/systems.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

extern "C" void openblas_set_num_threads(int);

namespace kaf::cli {

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    parts.push_back(trim(item));
  return parts;
}

double to_number(const std::string &s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("not a number: '" + s + "'");
  return v;
}

Index to_integer(const std::string &s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError("not an integer: '" + s + "'");
  return static_cast<Index>(v);
}

std::optional<double> auto_or_positive(const std::string &s,
                                       const std::string &what) {
  if (s == "auto")
    return std::nullopt;
  const double v = to_number(s);
  if (!(v > 0))
    throw UsageError(what + " must be positive or 'auto'");
  return v;
}

} // namespace

std::vector<double> parse_values(const std::string &text) {
  const std::string t = trim(text);
  if (t.empty())
    throw UsageError("empty value list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3)
      throw UsageError("range must look like start:step:stop");
    const double a = to_number(parts[0]);
    const double s = to_number(parts[1]);
    const double b = to_number(parts[2]);
    if (!(s > 0) || b < a)
      throw UsageError("range needs a positive step and stop >= start");
    std::vector<double> out;
    const auto count = static_cast<long long>(std::floor((b - a) / s + 1e-9));
    for (long long k = 0; k <= count; ++k)
      out.push_back(a + static_cast<double>(k) * s);
    return out;
  }
  std::vector<double> out;
  for (const auto &p : split(t, ','))
    out.push_back(to_number(p));
  return out;
}

std::vector<Index> parse_leads(const std::string &text) {
  std::vector<Index> out;
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3)
      throw UsageError("lead range must look like start:step:stop");
    const Index a = to_integer(parts[0]);
    const Index s = to_integer(parts[1]);
    const Index b = to_integer(parts[2]);
    if (s < 1 || b < a)
      throw UsageError("lead range needs a positive step and stop >= start");
    for (Index q = a; q <= b; q += s)
      out.push_back(q);
  } else {
    for (const auto &p : split(t, ','))
      out.push_back(to_integer(p));
  }
  if (out.empty())
    throw UsageError("no leads given");
  for (Index q : out)
    if (q < 0)
      throw UsageError("leads must be nonnegative");
  return out;
}

std::vector<ConfigEntry> read_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config file '" + path + "'");
  std::vector<ConfigEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) +
                       ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    entries.push_back({key, trim(line.substr(eq + 1)), line_no});
  }
  return entries;
}

namespace {

// ---------------------------------------------------------------- options

struct TrainArgs {
  std::string data;
  std::string kernel = "vb-markov";
  std::string normalization;
  std::string eps = "auto";
  std::string eps_tilde = "auto";
  std::string m_tilde = "auto";
  double dm_alpha = 1.0;
  Index delays = 1;
  Index ell = 0;
  std::string leads = "0";
  std::string transform = "identity";
  std::string theta = "mean";
  bool error_model = false;
  double rank_tol = 1e-12;
};

void add_train_options(CLI::App *cmd, TrainArgs &a) {
  cmd->add_option("--data", a.data, "Training CSV")->required();
  cmd->add_option("--kernel", a.kernel,
                  "gaussian, vb, gaussian-markov, vb-markov, "
                  "gaussian-diffusion or vb-diffusion")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "vb", "variable_bandwidth",
                             "gaussian-markov", "vb-markov",
                             "gaussian-diffusion", "vb-diffusion"}));
  cmd->add_option("--normalization", a.normalization,
                  "Overrides the kernel shorthand: none, markov, diffusion")
      ->check(CLI::IsMember({"none", "markov", "symmetric_markov",
                             "diffusion"}));
  cmd->add_option("--eps", a.eps, "Kernel bandwidth or 'auto'")
      ->capture_default_str();
  cmd->add_option("--eps-tilde", a.eps_tilde,
                  "Density-estimate bandwidth or 'auto'")
      ->capture_default_str();
  cmd->add_option("--m-tilde", a.m_tilde, "Dimension estimate or 'auto'")
      ->capture_default_str();
  cmd->add_option("--dm-alpha", a.dm_alpha, "Diffusion-maps exponent")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--delays", a.delays, "Number of delay lags")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--l,--ell", a.ell, "Number of eigenpairs")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--leads", a.leads, "Leads in steps: q, a,b,c or a:s:b")
      ->capture_default_str();
  cmd->add_option("--transform", a.transform, "identity or indicator")
      ->capture_default_str()
      ->check(CLI::IsMember({"identity", "indicator"}));
  cmd->add_option("--theta", a.theta,
                  "Indicator threshold: a number or 'mean' (training mean)")
      ->capture_default_str();
  cmd->add_flag("--error-model", a.error_model,
                "Fit the conditional-variance error model");
  cmd->add_option("--rank-tol", a.rank_tol,
                  "Relative eigenvalue cutoff (0 accepts any positive value)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

TrainOptions resolve(const TrainArgs &a, const TimeSeriesDataset &raw) {
  TrainOptions o;
  std::string family = a.kernel;
  std::string norm = "none";
  if (const auto dash = family.find('-'); dash != std::string::npos) {
    norm = family.substr(dash + 1);
    family = family.substr(0, dash);
  }
  if (!a.normalization.empty())
    norm = a.normalization;
  o.kernel.family = parse_kernel_family(family);
  o.normalization = parse_normalization_mode(norm);
  o.alpha = a.dm_alpha;
  o.kernel.epsilon = auto_or_positive(a.eps, "--eps");
  o.kernel.epsilon_tilde = auto_or_positive(a.eps_tilde, "--eps-tilde");
  o.kernel.m_tilde = auto_or_positive(a.m_tilde, "--m-tilde");
  o.kernel.delays = a.delays;
  o.ell = a.ell;
  o.leads = parse_leads(a.leads);
  o.error_model = a.error_model;
  o.rank_tol = a.rank_tol;
  if (a.transform == "indicator") {
    const double theta = a.theta == "mean" ? empirical_moments(raw).mean
                                           : to_number(a.theta);
    o.transform = ResponseTransform::indicator(theta);
  }
  const Index embedded = raw.size() - a.delays + 1;
  if (embedded < 1)
    throw UsageError("more delays than samples");
  if (o.ell > embedded)
    throw UsageError("--l exceeds the number of training samples");
  for (Index q : o.leads)
    if (q > embedded)
      throw UsageError("lead " + std::to_string(q) +
                       " exceeds the number of training samples");
  return o;
}

nlohmann::json echo(const TrainOptions &o, const std::string &data) {
  const auto opt = [](const std::optional<double> &v) {
    return v ? nlohmann::json(*v) : nlohmann::json("auto");
  };
  return {{"data", data},
          {"kernel", to_string(o.kernel.family)},
          {"normalization", to_string(o.normalization)},
          {"dm_alpha", o.alpha},
          {"epsilon", opt(o.kernel.epsilon)},
          {"epsilon_tilde", opt(o.kernel.epsilon_tilde)},
          {"m_tilde", opt(o.kernel.m_tilde)},
          {"delays", o.kernel.delays},
          {"ell", o.ell},
          {"leads", o.leads},
          {"transform", o.transform.kind == ResponseTransform::Kind::indicator
                            ? "indicator"
                            : "identity"},
          {"theta", o.transform.threshold},
          {"error_model", o.error_model},
          {"rank_tol", o.rank_tol}};
}

nlohmann::json echo(const ForecastModel &m) {
  const ResolvedKernel &base = basis_kernel(m.basis).base();
  return {{"kernel", to_string(base.family())},
          {"normalization", to_string(basis_kernel(m.basis).mode())},
          {"epsilon", base.epsilon()},
          {"epsilon_tilde", base.epsilon_tilde()},
          {"m_tilde", base.m_tilde()},
          {"delays", base.delays()},
          {"n", m.size()},
          {"ell", m.ell()},
          {"leads", m.leads},
          {"dt", m.dt},
          {"theta", m.transform.threshold},
          {"error_model", m.has_variance()}};
}

Oracle make_oracle(const std::string &name, double alpha) {
  if (name.empty())
    return nullptr;
  if (name == "circle") {
    const CircleParams p{alpha};
    return [p](const RowVectorXd &x, double tau) {
      return circle_oracle(p, x(0), tau).z;
    };
  }
  throw UsageError("unknown oracle '" + name + "'");
}

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw Error("cannot open '" + path + "' for writing");
  return out;
}

StateSelector parse_selector(const std::string &s) {
  if (s == "full")
    return StateSelector::full();
  if (s == "x" || s == "1")
    return StateSelector::coordinate(0);
  if (s == "y" || s == "2")
    return StateSelector::coordinate(1);
  if (s == "z" || s == "3")
    return StateSelector::coordinate(2);
  throw UsageError("unknown state selector '" + s + "'");
}

// ---------------------------------------------------------------- commands

struct GenerateArgs {
  std::string system;
  Index n = 1000;
  double dt = 0.01;
  double alpha = std::numbers::sqrt2;
  std::string omega0 = "0";
  std::uint64_t seed = 0;
  double spinup = 100.0;
  Index substeps = 10;
  std::string covariate = "full";
  std::string response = "x";
  std::string out;
};

int cmd_generate(const GenerateArgs &a, std::ostream &out) {
  TimeSeriesDataset ds;
  if (a.system == "circle") {
    const double omega0 =
        a.omega0 == "random" ? random_angle(a.seed) : to_number(a.omega0);
    ds = generate_circle(CircleParams{a.alpha}, a.n, a.dt, omega0);
  } else {
    L63SamplingOptions o;
    o.n = a.n;
    o.dt = a.dt;
    o.spinup_time = a.spinup;
    o.seed = a.seed;
    o.substeps = a.substeps;
    o.covariate = parse_selector(a.covariate);
    const StateSelector r = parse_selector(a.response);
    if (r.is_full())
      throw UsageError("the response must be a single coordinate");
    o.response = r.component;
    ds = generate_l63(L63Params{}, o);
  }
  save_csv(a.out, ds);
  const Moments mom = empirical_moments(ds);
  out << "n=" << ds.size() << " dt=" << format_double(ds.dt)
      << " m=" << ds.dim() << " response_mean=" << format_double(mom.mean)
      << " response_std=" << format_double(mom.std) << '\n';
  return 0;
}

int cmd_train(const TrainArgs &a, const std::string &model_path,
              std::ostream &out) {
  const TimeSeriesDataset raw = load_csv(a.data);
  const TrainOptions o = resolve(a, raw);
  TrainReport report;
  const ForecastModel model = train(raw, o, &report);
  save_model(model_path, model);
  out << "params " << echo(o, a.data).dump() << '\n';
  out << "n=" << report.n << " ell=" << o.ell
      << " lambda_1=" << format_double(report.lambda_first)
      << " lambda_ell=" << format_double(report.lambda_last)
      << " epsilon=" << format_double(report.epsilon);
  if (o.kernel.family == KernelFamily::variable_bandwidth)
    out << " epsilon_tilde=" << format_double(report.epsilon_tilde)
        << " m_tilde=" << format_double(report.m_tilde);
  out << '\n';
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  double eta = 0.0;
};

int cmd_predict(const PredictArgs &a, std::ostream &out) {
  const ForecastModel model = load_model(a.model);
  const TimeSeriesDataset raw = load_csv(a.data);
  const TimeSeriesDataset inputs = model_inputs(model, raw);
  const ForecastOutput f = predict(model, inputs.covariates, a.eta);

  std::ofstream csv = open_output(a.out);
  csv << 'j';
  for (Index q : model.leads)
    csv << ",forecast_q" << q;
  if (f.error.size() > 0)
    for (Index q : model.leads)
      csv << ",error_q" << q;
  csv << '\n';
  const Index offset = raw.size() - inputs.size();
  for (Index j = 0; j < inputs.size(); ++j) {
    csv << j + offset;
    for (Index k = 0; k < f.mean.cols(); ++k)
      csv << ',' << format_double(f.mean(j, k));
    for (Index k = 0; k < f.error.cols(); ++k)
      csv << ',' << format_double(f.error(j, k));
    csv << '\n';
  }
  nlohmann::json params = echo(model);
  params["eta"] = a.eta;
  out << "params " << params.dump() << '\n';
  out << "wrote " << inputs.size() << " forecasts for " << model.leads.size()
      << " leads to " << a.out << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string json;
  std::string leads;
  std::string oracle;
  double oracle_alpha = std::numbers::sqrt2;
  double eta = 0.0;
};

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
  const ForecastModel model = load_model(a.model);
  const TimeSeriesDataset verif = load_csv(a.data);
  const std::vector<Index> leads =
      a.leads.empty() ? std::vector<Index>{} : parse_leads(a.leads);
  SkillReport report = evaluate_forecast(
      model, verif, leads, make_oracle(a.oracle, a.oracle_alpha), a.eta);
  report.params = echo(model);
  report.params["verification"] = a.data;
  report.params["eta"] = a.eta;
  if (!a.oracle.empty())
    report.params["oracle"] = a.oracle;

  if (a.out.empty()) {
    write_skill_csv(out, report);
  } else {
    std::ofstream csv = open_output(a.out);
    write_skill_csv(csv, report);
  }
  if (!a.json.empty()) {
    std::ofstream js = open_output(a.json);
    js << to_json(report).dump(2) << '\n';
  }
  return 0;
}

struct SweepArgs {
  TrainArgs train;
  std::string verif;
  std::string param;
  std::string values;
  std::string out;
  std::string oracle;
  double oracle_alpha = std::numbers::sqrt2;
  double eta = 0.0;
};

void write_sweep_rows(std::ostream &csv, const std::string &param,
                      double value, const SkillReport &r) {
  const auto field = [](double v) {
    return std::isnan(v) ? std::string() : format_double(v);
  };
  for (std::size_t k = 0; k < r.leads.size(); ++k)
    csv << param << ',' << format_double(value) << ','
        << format_double(r.lead_times[k]) << ',' << field(r.rmse[k]) << ','
        << field(r.normalized_rmse[k]) << ','
        << field(r.estimated_error_rms[k]) << ','
        << field(r.excess_gen_error[k]) << ",ok\n";
}

void write_sweep_failure(std::ostream &csv, const std::string &param,
                         double value, const std::string &message) {
  std::string quoted = message;
  std::replace(quoted.begin(), quoted.end(), '"', '\'');
  csv << param << ',' << format_double(value) << ",,,,,,\"error: " << quoted
      << "\"\n";
}

int cmd_sweep(const SweepArgs &a, std::ostream &out, std::ostream &err) {
  const TimeSeriesDataset raw = load_csv(a.train.data);
  const TimeSeriesDataset verif = load_csv(a.verif);
  const std::vector<double> values = parse_values(a.values);
  const Oracle oracle = make_oracle(a.oracle, a.oracle_alpha);
  const bool integral = a.param == "ell" || a.param == "n" ||
                        a.param == "delays";
  for (double v : values) {
    if (integral && (v < 1 || v != std::floor(v)))
      throw UsageError("--values for " + a.param +
                       " must be positive integers");
    if (!integral && !(v >= 0) )
      throw UsageError("--values must be nonnegative");
  }

  std::ofstream csv = open_output(a.out);
  csv << "param,value,lead_time,rmse,normalized_rmse,estimated_error_rms,"
         "excess_gen_error,status\n";
  int failures = 0;
  const auto fail = [&](double v, const std::string &msg) {
    ++failures;
    write_sweep_failure(csv, a.param, v, msg);
    err << "sweep " << a.param << '=' << format_double(v) << " failed: " << msg
        << '\n';
  };

  if (a.param == "ell" || a.param == "eta") {
    // One decomposition serves every value.
    TrainArgs base_args = a.train;
    if (a.param == "ell")
      base_args.ell = static_cast<Index>(
          *std::max_element(values.begin(), values.end()));
    TrainOptions o = resolve(base_args, raw);
    const TimeSeriesDataset embedded =
        o.kernel.delays > 1 ? delay_embed(raw, o.kernel.delays) : raw;
    std::optional<ForecastBasis> basis;
    try {
      basis = build_basis(embedded, o);
    } catch (const RankDeficiencyError &e) {
      if (a.param != "ell" || e.usable_rank() < 1)
        throw;
      o.ell = e.usable_rank();
      basis = build_basis(embedded, o);
    }
    for (double v : values) {
      try {
        if (a.param == "ell") {
          const auto ell = static_cast<Index>(v);
          if (ell > basis_ell(*basis))
            throw RankDeficiencyError(ell, basis_ell(*basis));
          const ForecastModel model =
              fit_model(truncate_basis(*basis, ell), embedded, o);
          write_sweep_rows(csv, a.param, v,
                           evaluate_forecast(model, verif, {}, oracle, a.eta));
        } else {
          const ForecastModel model = fit_model(*basis, embedded, o);
          write_sweep_rows(csv, a.param, v,
                           evaluate_forecast(model, verif, {}, oracle, v));
        }
      } catch (const Error &e) {
        fail(v, e.what());
      }
    }
  } else {
    for (double v : values) {
      try {
        TrainArgs args = a.train;
        TimeSeriesDataset data = raw;
        if (a.param == "epsilon") {
          args.eps = format_double(v);
        } else if (a.param == "delays") {
          args.delays = static_cast<Index>(v);
        } else {
          const auto n = static_cast<Index>(v);
          if (n > raw.size())
            throw ArgumentError("n exceeds the training record");
          data = make_dataset(raw.covariates.topRows(n),
                              raw.responses.head(n), raw.dt);
        }
        const ForecastModel model = train(data, resolve(args, data));
        write_sweep_rows(csv, a.param, v,
                         evaluate_forecast(model, verif, {}, oracle, a.eta));
      } catch (const Error &e) {
        fail(v, e.what());
      }
    }
  }
  out << "swept " << a.param << " over " << values.size() << " values, "
      << failures << " failed; wrote " << a.out << '\n';
  return failures > 0 ? 1 : 0;
}

// ------------------------------------------------------------- config merge

// Splices "--config FILE" entries into the argument list right after the
// subcommand name so that explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string> &args,
                                       const CLI::App &app) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw UsageError("--config needs a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty())
    return rest;

  const CLI::App *sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    for (const CLI::App *s : app.get_subcommands({})) {
      if (s->get_name() == rest[i]) {
        sub = s;
        sub_pos = i;
        break;
      }
    }
    if (sub)
      break;
  }
  if (!sub)
    throw UsageError("--config needs a subcommand");

  std::vector<std::string> injected;
  for (const ConfigEntry &e : read_config(config_path)) {
    const CLI::Option *opt = sub->get_option_no_throw("--" + e.key);
    if (!opt)
      throw UsageError(config_path + ":" + std::to_string(e.line) +
                       ": unknown key '" + e.key + "' for " + sub->get_name());
    if (opt->get_expected_min() == 0) {
      if (e.value == "true" || e.value == "1")
        injected.push_back("--" + e.key);
      else if (e.value != "false" && e.value != "0")
        throw UsageError(config_path + ":" + std::to_string(e.line) +
                         ": flag '" + e.key + "' takes true or false");
    } else {
      injected.push_back("--" + e.key);
      injected.push_back(e.value);
    }
  }
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1,
              injected.begin(), injected.end());
  return rest;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Kernel analog forecasting"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on BLAS threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", "Key = value file with defaults for the "
                             "subcommand's flags");

  GenerateArgs gen;
  auto *generate = app.add_subcommand("generate", "Write a dataset CSV");
  generate->add_option("--system", gen.system, "circle or l63")
      ->required()
      ->check(CLI::IsMember({"circle", "l63"}));
  generate->add_option("--n", gen.n, "Number of samples")
      ->capture_default_str()
      ->check(CLI::Range(Index{2}, std::numeric_limits<Index>::max()));
  generate->add_option("--dt", gen.dt, "Sampling interval")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  generate->add_option("--alpha", gen.alpha, "Circle rotation frequency")
      ->capture_default_str();
  generate->add_option("--omega0", gen.omega0,
                       "Circle initial angle or 'random'")
      ->capture_default_str();
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--spinup", gen.spinup, "L63 spinup time")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--substeps", gen.substeps, "RK4 steps per sample")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  generate->add_option("--covariate", gen.covariate, "full, x, y or z")
      ->capture_default_str();
  generate->add_option("--response", gen.response, "x, y or z")
      ->capture_default_str();
  generate->add_option("--out", gen.out, "Output CSV")->required();

  TrainArgs tr;
  std::string model_out;
  auto *train_cmd = app.add_subcommand("train", "Fit a forecast model");
  add_train_options(train_cmd, tr);
  train_cmd->add_option("--out", model_out, "Model file")->required();

  PredictArgs pr;
  auto *predict_cmd = app.add_subcommand("predict", "Forecast a dataset");
  predict_cmd->add_option("--model", pr.model)->required();
  predict_cmd->add_option("--data", pr.data, "Covariate CSV")->required();
  predict_cmd->add_option("--out", pr.out, "Forecast CSV")->required();
  predict_cmd->add_option("--eta", pr.eta, "Spectral regularization")
      ->check(CLI::NonNegativeNumber);

  EvaluateArgs ev;
  auto *evaluate = app.add_subcommand("evaluate", "Score a model");
  evaluate->add_option("--model", ev.model)->required();
  evaluate->add_option("--data", ev.data, "Verification CSV")->required();
  evaluate->add_option("--out", ev.out, "Skill CSV (default: stdout)");
  evaluate->add_option("--json", ev.json, "Skill report as JSON");
  evaluate->add_option("--leads", ev.leads, "Subset of the model leads");
  evaluate->add_option("--oracle", ev.oracle, "Analytic oracle")
      ->check(CLI::IsMember({"circle"}));
  evaluate->add_option("--oracle-alpha", ev.oracle_alpha,
                       "Circle frequency for the oracle")
      ->capture_default_str();
  evaluate->add_option("--eta", ev.eta, "Spectral regularization")
      ->check(CLI::NonNegativeNumber);

  SweepArgs sw;
  auto *sweep = app.add_subcommand("sweep", "Train and score over a grid");
  add_train_options(sweep, sw.train);
  sweep->add_option("--verif", sw.verif, "Verification CSV")->required();
  sweep->add_option("--param", sw.param, "epsilon, ell, n, delays or eta")
      ->required()
      ->check(CLI::IsMember({"epsilon", "ell", "n", "delays", "eta"}));
  sweep->add_option("--values", sw.values, "List or start:step:stop")
      ->required();
  sweep->add_option("--out", sw.out, "Long-format CSV")->required();
  sweep->add_option("--oracle", sw.oracle, "Analytic oracle")
      ->check(CLI::IsMember({"circle"}));
  sweep->add_option("--oracle-alpha", sw.oracle_alpha)->capture_default_str();
  sweep->add_option("--eta", sw.eta, "Spectral regularization")
      ->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  if (threads > 0)
    openblas_set_num_threads(threads);

  try {
    if (generate->parsed())
      return cmd_generate(gen, out);
    if (train_cmd->parsed())
      return cmd_train(tr, model_out, out);
    if (predict_cmd->parsed())
      return cmd_predict(pr, out);
    if (evaluate->parsed())
      return cmd_evaluate(ev, out);
    if (sweep->parsed())
      return cmd_sweep(sw, out, err);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace kaf::cli
