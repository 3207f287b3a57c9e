#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpest/bandit.hpp"
#include "gpest/benchmarks.hpp"

namespace gpest {

/// Usage, config and parse failures; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* a : allowed)
      if (key == a) {
        found = true;
        break;
      }
    if (!found)
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

/// 17 significant digits: round-trip safe for 64-bit doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline KernelSpec parse_kernel(const json& j) {
  detail::reject_unknown_keys(j, "kernel", {"family", "lengthscale", "signal_std"});
  KernelSpec k;
  const std::string fam = detail::get_or<std::string>(j, "family", "matern52");
  if (fam == "matern32")
    k.family = KernelFamily::Matern32;
  else if (fam == "matern52")
    k.family = KernelFamily::Matern52;
  else if (fam == "se" || fam == "squared_exponential")
    k.family = KernelFamily::SquaredExponential;
  else
    throw ConfigError("unknown kernel family \"" + fam + "\"");
  k.lengthscale = detail::get_or<double>(j, "lengthscale", 1.0);
  k.signal_std = detail::get_or<double>(j, "signal_std", 1.0);
  return k;
}

inline MeanSpec parse_mean(const json& j) {
  detail::reject_unknown_keys(j, "mean", {"kind", "slope", "intercept"});
  MeanSpec m;
  const std::string kind = detail::get_or<std::string>(j, "kind", "zero");
  if (kind == "zero") {
    m.kind = MeanKind::Zero;
  } else if (kind == "linear") {
    m.kind = MeanKind::Linear;
    const auto slope = detail::get_or<std::vector<double>>(j, "slope", {});
    if (slope.empty()) throw ConfigError("linear mean requires a slope");
    m.slope = Eigen::Map<const Eigen::VectorXd>(slope.data(),
                                                static_cast<Eigen::Index>(slope.size()));
    m.intercept = detail::get_or<double>(j, "intercept", 0.0);
  } else {
    throw ConfigError("unknown mean kind \"" + kind + "\"");
  }
  return m;
}

inline CandidateGrid parse_grid(const json& j) {
  detail::reject_unknown_keys(j, "grid", {"dims", "points", "rho"});
  if (j.contains("dims") == j.contains("points"))
    throw ConfigError("grid requires exactly one of \"dims\" or \"points\"");
  if (j.contains("dims")) {
    std::vector<GridDim> dims;
    for (const auto& dj : j.at("dims")) {
      detail::reject_unknown_keys(dj, "grid.dims[]", {"lo", "hi", "n"});
      GridDim d;
      d.lo = detail::get_or<double>(dj, "lo", 0.0);
      d.hi = detail::get_or<double>(dj, "hi", 1.0);
      d.n = detail::get_or<int>(dj, "n", 2);
      dims.push_back(d);
    }
    try {
      return CandidateGrid::uniform(dims);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const auto rows = detail::get_or<std::vector<std::vector<double>>>(j, "points", {});
  if (rows.empty()) throw ConfigError("grid.points must be nonempty");
  const std::size_t d = rows.front().size();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw ConfigError("grid.points row " + std::to_string(i + 1) +
                        " has inconsistent dimension");
    for (std::size_t k = 0; k < d; ++k)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return CandidateGrid::from_points(std::move(pts),
                                    detail::get_or<double>(j, "rho", 0.0));
}

inline AcquisitionKind parse_acquisition(const json& j) {
  detail::reject_unknown_keys(j, "acquisition", {"kind", "delta", "epsilon", "seed"});
  const std::string kind = detail::get_or<std::string>(j, "kind", "estn");
  if (kind == "estn" || kind == "est") return EstNumeric{};
  if (kind == "esta") return EstLaplace{};
  if (kind == "ucb") return Ucb{detail::get_or<double>(j, "delta", 0.01)};
  if (kind == "ei") return Ei{detail::get_or<double>(j, "epsilon", 0.0)};
  if (kind == "pi") return Pi{detail::get_or<double>(j, "epsilon", 0.1)};
  if (kind == "rand" || kind == "random")
    return Random{detail::get_or<std::uint64_t>(j, "seed", 0)};
  throw ConfigError("unknown acquisition kind \"" + kind + "\"");
}

/// Single-run configuration (the suggest command and the library runner).
inline RunConfig parse_run_config(const json& j) {
  detail::reject_unknown_keys(
      j, "config",
      {"seed", "kernel", "mean", "noise_var", "grid", "acquisition", "max_rounds",
       "observation_noise_std", "delta", "lipschitz", "refit", "warm_start",
       "suite"});
  RunConfig c;
  if (!j.contains("grid")) throw ConfigError("config requires a grid");
  c.grid = parse_grid(j.at("grid"));
  if (j.contains("kernel")) c.model.kernel = parse_kernel(j.at("kernel"));
  if (j.contains("mean")) c.model.mean = parse_mean(j.at("mean"));
  c.model.noise_var = detail::get_or<double>(j, "noise_var", 0.0);
  if (j.contains("acquisition")) c.acquisition = parse_acquisition(j.at("acquisition"));
  c.max_rounds = detail::get_or<int>(j, "max_rounds", 1);
  c.observation_noise_std = detail::get_or<double>(j, "observation_noise_std", 0.0);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  c.delta = detail::get_or<double>(j, "delta", 0.01);
  if (j.contains("lipschitz")) {
    const json& lj = j.at("lipschitz");
    detail::reject_unknown_keys(lj, "lipschitz", {"L", "rho"});
    LipschitzSpec lip;
    lip.L = detail::get_or<double>(lj, "L", 0.0);
    lip.rho = detail::get_or<double>(lj, "rho", c.grid.covering_radius());
    c.lipschitz = lip;
  }
  if (j.contains("refit")) {
    const json& rj = j.at("refit");
    detail::reject_unknown_keys(rj, "refit", {"every", "lengthscales", "signal_stds"});
    RefitSpec r;
    r.every = detail::get_or<int>(rj, "every", 5);
    r.lengthscales = detail::get_or<std::vector<double>>(rj, "lengthscales", {});
    r.signal_stds = detail::get_or<std::vector<double>>(
        rj, "signal_stds", {c.model.kernel.signal_std});
    c.refit = r;
  }
  if (j.contains("warm_start")) {
    for (const auto& v : j.at("warm_start"))
      c.warm_start.push_back(v.get<Eigen::Index>());
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

/// Suite configuration for the bench command: the "suite" object of the
/// config file.
inline SuiteSpec parse_suite_spec(const json& root) {
  if (!root.contains("suite")) throw ConfigError("bench config requires \"suite\"");
  const json& j = root.at("suite");
  detail::reject_unknown_keys(j, "suite",
                              {"family", "n_functions", "max_rounds", "acquisitions",
                               "grid_resolution", "domain", "base_seed", "noise_std",
                               "jobs"});
  SuiteSpec s;
  const std::string fam = detail::get_or<std::string>(j, "family", "gp1d");
  if (fam == "gp1d")
    s.family = FunctionFamily::GpSample1D;
  else if (fam == "gp2d")
    s.family = FunctionFamily::GpSample2D;
  else if (fam == "hartmann3")
    s.family = FunctionFamily::Hartmann3;
  else if (fam == "branin")
    s.family = FunctionFamily::Branin;
  else
    throw ConfigError("unknown suite family \"" + fam + "\"");
  s.n_functions = detail::get_or<int>(j, "n_functions", 30);
  s.max_rounds = detail::get_or<int>(j, "max_rounds", 150);
  if (j.contains("acquisitions")) {
    for (const auto& aj : j.at("acquisitions"))
      s.acquisitions.push_back(parse_acquisition(aj));
  } else {
    s.acquisitions = {Random{}, Ucb{}, Ei{}, Pi{}, EstLaplace{}, EstNumeric{}};
  }
  s.grid_resolution = detail::get_or<int>(j, "grid_resolution", 0);
  s.domain = detail::get_or<double>(j, "domain", 0.0);
  s.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", 0);
  s.noise_std = detail::get_or<double>(j, "noise_std", 0.01);
  s.jobs = detail::get_or<int>(j, "jobs", 0);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

/// Serializes the resolved suite spec (the suite.json echo of bench).
inline json suite_spec_to_json(const SuiteSpec& s) {
  json acqs = json::array();
  for (const auto& a : s.acquisitions) {
    json aj;
    aj["kind"] = acquisition_name(a);
    if (const auto* u = std::get_if<Ucb>(&a)) aj["delta"] = u->delta;
    if (const auto* e = std::get_if<Ei>(&a)) aj["epsilon"] = e->epsilon;
    if (const auto* p = std::get_if<Pi>(&a)) aj["epsilon"] = p->epsilon;
    if (const auto* r = std::get_if<Random>(&a)) aj["seed"] = r->seed;
    acqs.push_back(aj);
  }
  return json{{"family", family_name(s.family)},
              {"n_functions", s.n_functions},
              {"max_rounds", s.max_rounds},
              {"acquisitions", acqs},
              {"grid_resolution", s.grid_resolution},
              {"domain", s.domain},
              {"base_seed", s.base_seed},
              {"noise_std", s.noise_std},
              {"jobs", s.jobs}};
}

/// History file: header "x1,...,xd,y", one observation per row,
/// '.' decimal separator. Parse errors carry 1-based line numbers.
inline History read_history_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open history file: " + path);
  History h = History::empty(expected_dim);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;  // first nonempty line is the header
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != expected_dim + 1)
      throw ConfigError("history line " + std::to_string(lineno) + ": expected " +
                        std::to_string(expected_dim + 1) + " columns, got " +
                        std::to_string(fields.size()));
    Eigen::VectorXd x(expected_dim);
    for (int k = 0; k <= expected_dim; ++k) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[static_cast<std::size_t>(k)], &pos);
      } catch (const std::exception&) {
        throw ConfigError("history line " + std::to_string(lineno) +
                          ": bad number \"" + fields[static_cast<std::size_t>(k)] +
                          "\"");
      }
      if (pos != fields[static_cast<std::size_t>(k)].size())
        throw ConfigError("history line " + std::to_string(lineno) +
                          ": bad number \"" + fields[static_cast<std::size_t>(k)] +
                          "\"");
      if (k < expected_dim)
        x(k) = v;
      else
        ys.push_back(v);
    }
    xs.push_back(std::move(x));
  }
  if (!header_seen) throw ConfigError("history file has no header line: " + path);
  h.points.resize(static_cast<Eigen::Index>(xs.size()), expected_dim);
  h.values.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    h.points.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
    h.values(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return h;
}

inline std::string history_csv_header(int dim) {
  std::string s;
  for (int k = 1; k <= dim; ++k) s += "x" + std::to_string(k) + ",";
  return s + "y";
}

}  // namespace gpest
