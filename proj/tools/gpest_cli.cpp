// Command-line front end: benchmark suites, stateless suggest/observe
// steps against an external objective, and report generation from
// previously written round logs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gpest/gpest.hpp"

namespace fs = std::filesystem;
using gpest::ConfigError;

namespace {

constexpr const char* config_schema_help = R"(Config file (JSON). Single-run keys:
  seed                   integer, RNG seed (default 0; env GPEST_SEED overrides)
  kernel                 {family: matern52|matern32|se, lengthscale: 1.0, signal_std: 1.0}
  mean                   {kind: zero} or {kind: linear, slope: [...], intercept: 0.0}
  noise_var              observation noise variance used by inference (default 0)
  grid                   {dims: [{lo,hi,n}, ...]} or {points: [[...], ...], rho: 0}
  acquisition            {kind: estn|esta|ucb|ei|pi|rand, delta: 0.01, epsilon: ..., seed: 0}
                         (defaults: ucb delta 0.01, ei epsilon 0, pi epsilon 0.1)
  max_rounds             rounds per run (default 1)
  observation_noise_std  noise added to oracle evaluations (default 0)
  delta                  confidence parameter for the zeta_t records (default 0.01)
  lipschitz              {L, rho} discretization correction (optional; rho defaults
                         to the grid covering radius)
  refit                  {every: 5, lengthscales: [...], signal_stds: [...]} (optional)
  warm_start             [grid indices] forced as the first rounds (optional)

Bench additionally reads the "suite" object:
  suite: {family: gp1d|gp2d|hartmann3|branin, n_functions: 30, max_rounds: 150,
          acquisitions: [...], grid_resolution: 0 (family default),
          domain: 0 (family default), base_seed: 0, noise_std: 0.01,
          jobs: 0 (0 = all cores)}
Unknown keys are rejected. All defaults above apply when a key is omitted.)";

std::uint64_t resolve_seed_override(std::optional<std::uint64_t> fallback) {
  // GPEST_SEED wins over the config seed when set.
  const char* env = std::getenv("GPEST_SEED");
  if (env == nullptr) {
    if (!fallback) throw ConfigError("internal: no seed");
    return *fallback;
  }
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument(env);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string("GPEST_SEED is not an integer: ") + env);
  }
}

struct RoundsRow {
  std::string acquisition;
  int function_id = 0;
  int t = 0;
  std::vector<double> x;
  double y = 0.0;
  double simple_regret = 0.0;
  double cumulative_regret = 0.0;
  std::optional<double> m_hat, nu_t;
};

void write_rounds_csv(const fs::path& path, const gpest::SuiteResult& suite) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const int dim = suite.runs.empty() || suite.runs[0].empty() ||
                          suite.runs[0][0].records.empty()
                      ? 0
                      : static_cast<int>(suite.runs[0][0].records[0].x.size());
  out << "acquisition,function_id,t";
  for (int k = 1; k <= dim; ++k) out << ",x" << k;
  out << ",y,simple_regret,cumulative_regret,m_hat,nu_t\n";
  for (std::size_t ai = 0; ai < suite.runs.size(); ++ai) {
    const std::string name = gpest::acquisition_name(suite.spec.acquisitions[ai]);
    for (std::size_t fi = 0; fi < suite.runs[ai].size(); ++fi) {
      for (const gpest::RoundRecord& rec : suite.runs[ai][fi].records) {
        out << name << ',' << fi << ',' << rec.t;
        for (int k = 0; k < dim; ++k) out << ',' << gpest::format_double(rec.x(k));
        out << ',' << gpest::format_double(rec.y) << ','
            << gpest::format_double(rec.simple_regret) << ','
            << gpest::format_double(rec.cumulative_regret) << ',';
        if (rec.m_hat) out << gpest::format_double(*rec.m_hat);
        out << ',';
        if (rec.nu_t) out << gpest::format_double(*rec.nu_t);
        out << '\n';
      }
    }
  }
}

void write_summary_csv(const fs::path& path,
                       const std::vector<gpest::AcquisitionStats>& stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "acquisition,T_min_mean,T_min_median,r_min_mean,r_min_median\n";
  for (const auto& st : stats) {
    out << st.name << ',' << gpest::format_double(st.t_min_mean) << ','
        << gpest::format_double(st.t_min_median) << ','
        << gpest::format_double(st.r_min_mean) << ','
        << gpest::format_double(st.r_min_median) << '\n';
  }
}

void print_summary_table(std::ostream& out,
                         const std::vector<gpest::AcquisitionStats>& stats) {
  out << "acquisition   T_min_mean  T_min_median  r_min_mean  r_min_median\n";
  for (const auto& st : stats) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %11.4g %13.4g %11.4g %13.4g\n",
                  st.name.c_str(), st.t_min_mean, st.t_min_median, st.r_min_mean,
                  st.r_min_median);
    out << line;
  }
}

int cmd_bench(const std::string& config_path, const std::string& out_dir,
              int jobs_flag) {
  const gpest::json root = gpest::load_json_file(config_path);
  gpest::SuiteSpec spec = gpest::parse_suite_spec(root);
  spec.base_seed = resolve_seed_override(spec.base_seed);
  if (jobs_flag > 0) spec.jobs = jobs_flag;
  if (spec.jobs <= 0)
    spec.jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (spec.jobs <= 0) spec.jobs = 1;

  fs::create_directories(out_dir);
  const gpest::SuiteResult result = gpest::run_suite(spec);
  if (result.failures > 0)
    std::cerr << "warning: " << result.failures
              << " run(s) failed and were excluded\n";

  write_rounds_csv(fs::path(out_dir) / "rounds.csv", result);
  write_summary_csv(fs::path(out_dir) / "summary.csv", result.stats);
  std::ofstream echo(fs::path(out_dir) / "suite.json");
  echo << gpest::suite_spec_to_json(spec).dump(2) << '\n';
  print_summary_table(std::cout, result.stats);
  return 0;
}

int cmd_suggest(const std::string& config_path, const std::string& history_path) {
  const gpest::json root = gpest::load_json_file(config_path);
  gpest::RunConfig config = gpest::parse_run_config(root);
  config.seed = resolve_seed_override(config.seed);

  const gpest::History history =
      gpest::read_history_csv(history_path, config.grid.dim());
  const int t = static_cast<int>(history.size()) + 1;

  const gpest::Posterior post = gpest::fit_posterior(config.model, history);
  const gpest::PredictStats stats = post.predict(config.grid.points());
  std::optional<double> best_y;
  if (history.size() > 0) best_y = history.values.maxCoeff();

  const gpest::Selection sel = gpest::select_next(
      stats, config.acquisition, t, best_y, config.lipschitz);

  const Eigen::VectorXd x = config.grid.point(sel.index);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (k > 0) std::cout << ',';
    std::cout << gpest::format_double(x(k));
  }
  std::cout << '\n';

  gpest::json diag{{"acquisition", gpest::acquisition_name(config.acquisition)},
                   {"t", t},
                   {"grid_index", sel.index}};
  if (sel.m_hat) diag["m_hat"] = *sel.m_hat;
  if (sel.nu_t) diag["nu_t"] = *sel.nu_t;
  std::cerr << diag.dump() << '\n';
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

int cmd_report(const std::string& rounds_path, std::string out_dir) {
  std::ifstream in(rounds_path);
  if (!in) throw ConfigError("cannot open rounds file: " + rounds_path);
  if (out_dir.empty())
    out_dir = fs::path(rounds_path).parent_path().string();
  if (out_dir.empty()) out_dir = ".";

  std::string line;
  if (!std::getline(in, line)) throw ConfigError("no data rows in " + rounds_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required :
       {"acquisition", "function_id", "t", "simple_regret", "cumulative_regret"})
    if (col.find(required) == col.end())
      throw ConfigError(std::string("rounds.csv lacks column \"") + required +
                        "\"");

  struct FunctionTrace {
    std::vector<double> simple, cum_avg;
  };
  // acquisition -> function_id -> per-round traces (insertion-ordered)
  std::vector<std::string> acq_order;
  std::map<std::string, std::map<int, FunctionTrace>> traces;
  int lineno = 1;
  int data_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw ConfigError("rounds.csv line " + std::to_string(lineno) +
                        ": expected " + std::to_string(header.size()) +
                        " columns, got " + std::to_string(f.size()));
    try {
      const std::string& acq = f[col["acquisition"]];
      const int fid = std::stoi(f[col["function_id"]]);
      const int t = std::stoi(f[col["t"]]);
      const double simple = std::stod(f[col["simple_regret"]]);
      const double cum = std::stod(f[col["cumulative_regret"]]);
      if (traces.find(acq) == traces.end()) acq_order.push_back(acq);
      auto& trace = traces[acq][fid];
      if (static_cast<int>(trace.simple.size()) + 1 != t)
        throw std::invalid_argument("rounds out of order");
      trace.simple.push_back(simple);
      trace.cum_avg.push_back(cum / t);
      ++data_rows;
    } catch (const std::exception& e) {
      throw ConfigError("rounds.csv line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  if (data_rows == 0) throw ConfigError("no data rows in " + rounds_path);

  std::vector<gpest::AcquisitionStats> stats;
  for (const std::string& acq : acq_order) {
    gpest::AcquisitionStats st;
    st.name = acq;
    std::vector<double> t_mins, r_mins;
    std::size_t rounds = 0;
    for (const auto& [fid, trace] : traces[acq])
      rounds = std::max(rounds, trace.simple.size());
    for (const auto& [fid, trace] : traces[acq]) {
      const double r_min = trace.simple.back();
      r_mins.push_back(r_min);
      for (std::size_t i = 0; i < trace.simple.size(); ++i)
        if (trace.simple[i] == r_min) {
          t_mins.push_back(static_cast<double>(i + 1));
          break;
        }
    }
    st.t_min_mean = gpest::detail::mean_of(t_mins);
    st.t_min_median = gpest::detail::lower_median(t_mins);
    st.r_min_mean = gpest::detail::mean_of(r_mins);
    st.r_min_median = gpest::detail::lower_median(r_mins);
    for (std::size_t t = 0; t < rounds; ++t) {
      std::vector<double> simple, cum;
      for (const auto& [fid, trace] : traces[acq]) {
        if (t < trace.simple.size()) {
          simple.push_back(trace.simple[t]);
          cum.push_back(trace.cum_avg[t]);
        }
      }
      const double sm = gpest::detail::mean_of(simple);
      const double cm = gpest::detail::mean_of(cum);
      st.simple_mean.push_back(sm);
      st.simple_std.push_back(gpest::detail::sample_std(simple, sm));
      st.cum_mean.push_back(cm);
      st.cum_std.push_back(gpest::detail::sample_std(cum, cm));
    }
    stats.push_back(std::move(st));
  }

  fs::create_directories(out_dir);
  for (const auto& st : stats) {
    {
      std::ofstream out(fs::path(out_dir) / ("curve_simple_" + st.name + ".csv"));
      out << "round,mean,std\n";
      for (std::size_t t = 0; t < st.simple_mean.size(); ++t)
        out << (t + 1) << ',' << gpest::format_double(st.simple_mean[t]) << ','
            << gpest::format_double(st.simple_std[t]) << '\n';
    }
    {
      std::ofstream out(fs::path(out_dir) /
                        ("curve_cumulative_" + st.name + ".csv"));
      out << "round,mean,std\n";
      for (std::size_t t = 0; t < st.cum_mean.size(); ++t)
        out << (t + 1) << ',' << gpest::format_double(st.cum_mean[t]) << ','
            << gpest::format_double(st.cum_std[t]) << '\n';
    }
  }
  print_summary_table(std::cout, stats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process bandit optimization (EST, UCB, EI, PI)"};
  app.require_subcommand(1);
  app.footer(config_schema_help);

  std::string config_path, out_dir, history_path, rounds_path, report_out;
  int jobs = 0;

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("--config", config_path, "suite config file (JSON)")
      ->required();
  bench->add_option("--out", out_dir, "output directory")->required();
  bench->add_option("--jobs", jobs,
                    "worker threads (default: suite config, else all cores)");

  CLI::App* suggest = app.add_subcommand(
      "suggest", "print the next point to evaluate given a history CSV");
  suggest->add_option("--config", config_path, "run config file (JSON)")
      ->required();
  suggest->add_option("--history", history_path, "history CSV (x1,...,xd,y)")
      ->required();

  CLI::App* report =
      app.add_subcommand("report", "summarize a rounds.csv written by bench");
  report->add_option("--rounds", rounds_path, "rounds.csv path")->required();
  report->add_option("--out", report_out,
                     "directory for regret-curve CSVs (default: alongside input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) return cmd_bench(config_path, out_dir, jobs);
    if (suggest->parsed()) return cmd_suggest(config_path, history_path);
    if (report->parsed()) return cmd_report(rounds_path, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
