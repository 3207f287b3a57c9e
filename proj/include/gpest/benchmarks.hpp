#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "gpest/bandit.hpp"
#include "gpest/gp.hpp"
#include "gpest/grid.hpp"

namespace gpest {

/// 3-D Hartmann function on the unit cube, in maximization orientation
/// (the canonical form is a minimization; this returns its negation).
inline double hartmann3(const Eigen::VectorXd& x) {
  if (x.size() != 3) throw std::invalid_argument("hartmann3: expects 3-vector");
  for (int i = 0; i < 3; ++i)
    if (!(x(i) >= 0.0 && x(i) <= 1.0))
      throw std::invalid_argument("hartmann3: point outside the unit cube");
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double a[4][3] = {
      {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static const double p[4][3] = {{0.3689, 0.1170, 0.2673},
                                 {0.4699, 0.4387, 0.7470},
                                 {0.1091, 0.8732, 0.5547},
                                 {0.0381, 0.5743, 0.8828}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double d = x(j) - p[i][j];
      inner += a[i][j] * d * d;
    }
    sum += alpha[i] * std::exp(-inner);
  }
  return sum;
}

/// Branin-Hoo on [-5,10] x [0,15], maximization orientation (negated).
inline double branin(const Eigen::VectorXd& x) {
  if (x.size() != 2) throw std::invalid_argument("branin: expects 2-vector");
  if (!(x(0) >= -5.0 && x(0) <= 10.0 && x(1) >= 0.0 && x(1) <= 15.0))
    throw std::invalid_argument("branin: point outside [-5,10]x[0,15]");
  const double pi = std::numbers::pi;
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double u = x(1) - b * x(0) * x(0) + c * x(0) - 6.0;
  return -(u * u + 10.0 * (1.0 - t) * std::cos(x(0)) + 10.0);
}

enum class FunctionFamily { GpSample1D, GpSample2D, Hartmann3, Branin };

inline std::string family_name(FunctionFamily f) {
  switch (f) {
    case FunctionFamily::GpSample1D: return "gp1d";
    case FunctionFamily::GpSample2D: return "gp2d";
    case FunctionFamily::Hartmann3: return "hartmann3";
    case FunctionFamily::Branin: return "branin";
  }
  return "?";
}

/// Defaults for the synthetic GP families: isotropic Matern-5/2 with
/// lengthscale 0.1 and unit signal, plus a linear mean with intercept 1 and
/// per-dimension slopes drawn uniformly from [-1, 1]. The domain spans many
/// lengthscales so the draws carry many local optima.
struct GpObjectiveDefaults {
  static constexpr double lengthscale = 0.1;
  static constexpr double signal_std = 1.0;
  static constexpr double intercept = 1.0;
  static constexpr int resolution_1d = 300;
  static constexpr double domain_1d = 6.0;
  static constexpr int resolution_2d = 50;
  static constexpr double domain_2d = 2.0;
};

struct SyntheticObjective {
  CandidateGrid grid;
  Eigen::VectorXd values;
  double true_max = 0.0;
  GpModel prior;  // the generating model, including the drawn slope
};

/// Draws one objective on its grid. Deterministic in the seed; the slope
/// and the function values come from independent derived streams.
inline SyntheticObjective make_gp_objective(int dim, std::uint64_t seed,
                                            int resolution = 0,
                                            double domain = 0.0,
                                            double signal_std_override = -1.0) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("make_gp_objective: dim must be 1 or 2");
  if (resolution <= 0)
    resolution = dim == 1 ? GpObjectiveDefaults::resolution_1d
                          : GpObjectiveDefaults::resolution_2d;
  if (!(domain > 0.0))
    domain = dim == 1 ? GpObjectiveDefaults::domain_1d
                      : GpObjectiveDefaults::domain_2d;

  std::vector<GridDim> dims;
  for (int j = 0; j < dim; ++j) dims.push_back({0.0, domain, resolution});

  GpModel prior;
  prior.kernel.family = KernelFamily::Matern52;
  prior.kernel.lengthscale = GpObjectiveDefaults::lengthscale;
  prior.kernel.signal_std = signal_std_override > 0.0
                                ? signal_std_override
                                : GpObjectiveDefaults::signal_std;
  prior.noise_var = 0.0;
  prior.mean.kind = MeanKind::Linear;
  prior.mean.intercept = GpObjectiveDefaults::intercept;
  Rng slope_rng(mix_seed(seed, 0x736c6f7065ULL));
  prior.mean.slope.resize(dim);
  for (int j = 0; j < dim; ++j) prior.mean.slope(j) = slope_rng.uniform(-1.0, 1.0);

  SyntheticObjective obj{CandidateGrid::uniform(dims), {}, 0.0, prior};
  obj.values = sample_function(prior, obj.grid, mix_seed(seed, 0x64726177ULL));
  obj.true_max = obj.values.maxCoeff();
  return obj;
}

struct SuiteSpec {
  FunctionFamily family = FunctionFamily::GpSample1D;
  int n_functions = 30;
  int max_rounds = 150;
  std::vector<AcquisitionKind> acquisitions;
  int grid_resolution = 0;   // 0 = family default
  double domain = 0.0;       // GP families only; 0 = family default
  std::uint64_t base_seed = 0;
  double noise_std = 0.01;   // observation noise; the model uses its square
  int jobs = 1;              // worker threads over (function, acquisition)

  void validate() const {
    if (n_functions < 1)
      throw std::invalid_argument("SuiteSpec: n_functions must be >= 1");
    if (max_rounds < 1)
      throw std::invalid_argument("SuiteSpec: max_rounds must be >= 1");
    if (acquisitions.empty())
      throw std::invalid_argument("SuiteSpec: no acquisitions");
    for (const auto& a : acquisitions) gpest::validate(a);
    if (!(noise_std >= 0.0))
      throw std::invalid_argument("SuiteSpec: noise_std must be >= 0");
  }
};

/// Table-style aggregates for one acquisition. Medians use the lower-median
/// convention for even counts; curve stds are sample standard deviations.
struct AcquisitionStats {
  std::string name;
  double t_min_mean = 0.0;
  double t_min_median = 0.0;
  double r_min_mean = 0.0;
  double r_min_median = 0.0;
  std::vector<double> simple_mean, simple_std;  // per round
  std::vector<double> cum_mean, cum_std;        // running average regret
};

struct SuiteResult {
  SuiteSpec spec;
  std::vector<std::vector<RunResult>> runs;  // [acquisition][function]
  std::vector<AcquisitionStats> stats;
  int failures = 0;  // runs that threw and were excluded
};

namespace detail {

inline double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Oracle backed by precomputed grid values; exact row match expected.
/// Lookups usually arrive in grid order, so a moving cursor makes the
/// common case O(1).
struct GridOracle {
  const CandidateGrid* grid;
  const Eigen::VectorXd* values;
  mutable Eigen::Index hint = 0;

  double operator()(const Eigen::VectorXd& x) const {
    const Eigen::Index n = grid->size();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index i = (hint + k) % n;
      if ((grid->points().row(i).transpose().array() == x.array()).all()) {
        hint = i + 1 == n ? 0 : i + 1;
        return (*values)(i);
      }
    }
    throw std::invalid_argument("grid oracle: point not on the grid");
  }
};

}  // namespace detail

/// Runs every acquisition on every function with matched seeds: objective
/// draw, warm-start point, and noise stream depend only on the function
/// index, so all strategies face bit-identical conditions.
inline SuiteResult run_suite(const SuiteSpec& spec) {
  spec.validate();
  const std::size_t n_acq = spec.acquisitions.size();
  const std::size_t n_fun = static_cast<std::size_t>(spec.n_functions);

  struct Task {
    std::size_t ai, fi;
  };
  std::vector<Task> tasks;
  tasks.reserve(n_acq * n_fun);
  for (std::size_t ai = 0; ai < n_acq; ++ai)
    for (std::size_t fi = 0; fi < n_fun; ++fi) tasks.push_back({ai, fi});

  SuiteResult result;
  result.spec = spec;
  result.runs.assign(n_acq, std::vector<RunResult>(n_fun));
  // uint8 rather than bool: elements are written concurrently per task
  std::vector<std::vector<std::uint8_t>> ok(n_acq,
                                            std::vector<std::uint8_t>(n_fun, 0));

  const auto run_one = [&](const Task& task) {
    const std::uint64_t fseed = mix_seed(spec.base_seed, task.fi);

    CandidateGrid grid = CandidateGrid::uniform({{0.0, 1.0, 2}});
    Eigen::VectorXd values;
    GpModel model;
    switch (spec.family) {
      case FunctionFamily::GpSample1D:
      case FunctionFamily::GpSample2D: {
        const int dim = spec.family == FunctionFamily::GpSample1D ? 1 : 2;
        SyntheticObjective obj =
            make_gp_objective(dim, fseed, spec.grid_resolution, spec.domain);
        grid = std::move(obj.grid);
        values = std::move(obj.values);
        model = obj.prior;
        break;
      }
      case FunctionFamily::Hartmann3: {
        const int res = spec.grid_resolution > 0 ? spec.grid_resolution : 20;
        grid = CandidateGrid::uniform(
            {{0.0, 1.0, res}, {0.0, 1.0, res}, {0.0, 1.0, res}});
        values.resize(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i)
          values(i) = hartmann3(grid.point(i));
        model.kernel = {KernelFamily::Matern52, 0.1, 1.0};
        model.mean.kind = MeanKind::Zero;
        break;
      }
      case FunctionFamily::Branin: {
        const int res = spec.grid_resolution > 0 ? spec.grid_resolution : 50;
        grid = CandidateGrid::uniform({{-5.0, 10.0, res}, {0.0, 15.0, res}});
        values.resize(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i)
          values(i) = branin(grid.point(i));
        // Branin spans two orders of magnitude; a generous signal keeps the
        // prior from fighting the data.
        model.kernel = {KernelFamily::Matern52, 1.5, 50.0};
        model.mean.kind = MeanKind::Zero;
        break;
      }
    }
    model.noise_var = spec.noise_std * spec.noise_std;

    RunConfig config;
    config.model = model;
    config.grid = std::move(grid);
    config.acquisition = spec.acquisitions[task.ai];
    if (auto* r = std::get_if<Random>(&config.acquisition))
      r->seed = mix_seed(spec.base_seed, task.fi, 0x72616e64ULL);
    config.max_rounds = spec.max_rounds;
    config.observation_noise_std = spec.noise_std;
    config.seed = mix_seed(spec.base_seed, task.fi, 0x72756eULL);
    Rng warm_rng(mix_seed(spec.base_seed, task.fi, 0x7761726dULL));
    config.warm_start = {static_cast<Eigen::Index>(
        warm_rng.uniform_index(static_cast<std::uint64_t>(config.grid.size())))};

    detail::GridOracle oracle{&config.grid, &values};
    result.runs[task.ai][task.fi] = run(config, oracle);
    ok[task.ai][task.fi] = 1;
  };

  std::atomic<int> failures{0};
  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    for (const Task& task : tasks) {
      try {
        run_one(task);
      } catch (const std::exception&) {
        ++failures;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(tasks.size()));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= tasks.size()) return;
          try {
            run_one(tasks[k]);
          } catch (const std::exception&) {
            ++failures;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  result.failures = failures.load();

  for (std::size_t ai = 0; ai < n_acq; ++ai) {
    AcquisitionStats st;
    st.name = acquisition_name(spec.acquisitions[ai]);
    std::vector<double> t_mins, r_mins;
    for (std::size_t fi = 0; fi < n_fun; ++fi) {
      if (!ok[ai][fi]) continue;
      t_mins.push_back(static_cast<double>(result.runs[ai][fi].T_min));
      r_mins.push_back(result.runs[ai][fi].r_min);
    }
    if (!t_mins.empty()) {
      st.t_min_mean = detail::mean_of(t_mins);
      st.t_min_median = detail::lower_median(t_mins);
      st.r_min_mean = detail::mean_of(r_mins);
      st.r_min_median = detail::lower_median(r_mins);
      for (int t = 0; t < spec.max_rounds; ++t) {
        std::vector<double> simple, cum;
        for (std::size_t fi = 0; fi < n_fun; ++fi) {
          if (!ok[ai][fi]) continue;
          const auto& rr = result.runs[ai][fi];
          simple.push_back(rr.records[static_cast<std::size_t>(t)].simple_regret);
          cum.push_back(rr.avg_cumulative[static_cast<std::size_t>(t)]);
        }
        const double sm = detail::mean_of(simple);
        const double cm = detail::mean_of(cum);
        st.simple_mean.push_back(sm);
        st.simple_std.push_back(detail::sample_std(simple, sm));
        st.cum_mean.push_back(cm);
        st.cum_std.push_back(detail::sample_std(cum, cm));
      }
    }
    result.stats.push_back(std::move(st));
  }
  return result;
}

}  // namespace gpest
