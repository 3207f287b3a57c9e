#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpest/acquisition.hpp"
#include "gpest/gp.hpp"
#include "gpest/grid.hpp"
#include "gpest/max_value.hpp"
#include "gpest/rng.hpp"

namespace gpest {

enum class ZetaSchedule { PiSquared, Horizon };

/// High-probability deviation multiplier: zeta_t = sqrt(2 log(pi_t / 2 delta))
/// with pi_t = pi^2 t^2 / 6 (anytime) or pi_t = T (fixed horizon).
inline double zeta_schedule(int t, int T, double delta, ZetaSchedule schedule) {
  if (t < 1) throw std::invalid_argument("zeta_schedule: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("zeta_schedule: delta must lie in (0,1)");
  double pi_t;
  if (schedule == ZetaSchedule::PiSquared) {
    const double tt = static_cast<double>(t);
    pi_t = std::numbers::pi * std::numbers::pi * tt * tt / 6.0;
  } else {
    if (T < 1) throw std::invalid_argument("zeta_schedule: T must be >= 1");
    pi_t = static_cast<double>(T);
  }
  return std::sqrt(2.0 * std::log(pi_t / (2.0 * delta)));
}

/// Optional periodic hyperparameter refit by exhaustive grid search over
/// (lengthscale, signal_std) pairs, maximizing the log marginal likelihood.
struct RefitSpec {
  int every = 5;
  std::vector<double> lengthscales;
  std::vector<double> signal_stds;

  void validate() const {
    if (every < 1) throw std::invalid_argument("RefitSpec: every must be >= 1");
    if (lengthscales.empty() || signal_stds.empty())
      throw std::invalid_argument("RefitSpec: empty hyperparameter grid");
  }
};

struct RunConfig {
  GpModel model;
  CandidateGrid grid = CandidateGrid::uniform({{0.0, 1.0, 2}});
  AcquisitionKind acquisition = EstNumeric{};
  int max_rounds = 1;
  double observation_noise_std = 0.0;
  std::uint64_t seed = 0;
  std::optional<RefitSpec> refit;
  std::optional<LipschitzSpec> lipschitz;
  double delta = 0.01;  // for the zeta_t records
  std::vector<Eigen::Index> warm_start;  // grid indices forced as the first rounds

  void validate() const {
    model.validate();
    gpest::validate(acquisition);
    if (max_rounds < 1)
      throw std::invalid_argument("RunConfig: max_rounds must be >= 1");
    if (!(observation_noise_std >= 0.0))
      throw std::invalid_argument("RunConfig: observation_noise_std must be >= 0");
    if (!(delta > 0.0 && delta < 1.0))
      throw std::invalid_argument("RunConfig: delta must lie in (0,1)");
    if (refit) refit->validate();
    if (lipschitz) lipschitz->validate();
    if (static_cast<int>(warm_start.size()) > max_rounds)
      throw std::invalid_argument("RunConfig: more warm-start points than rounds");
    for (Eigen::Index idx : warm_start)
      if (idx < 0 || idx >= grid.size())
        throw std::invalid_argument("RunConfig: warm-start index out of range");
  }
};

struct RoundRecord {
  int t = 0;
  Eigen::Index grid_index = 0;
  Eigen::VectorXd x;
  double y = 0.0;
  std::optional<double> m_hat;
  std::optional<double> nu_t;
  double zeta_t = 0.0;
  double instant_regret = 0.0;     // f_max - f(x_t)
  double simple_regret = 0.0;      // min instant regret so far
  double cumulative_regret = 0.0;  // running sum of instant regret
  double sigma_at_choice = 0.0;    // sigma_{t-1}(x_t)
  double mu_at_choice = 0.0;       // mu_{t-1}(x_t)
  double f_at_choice = 0.0;        // noiseless objective value
};

struct RunResult {
  std::vector<RoundRecord> records;
  double r_min = 0.0;
  int T_min = 0;  // first round attaining r_min
  std::vector<double> avg_cumulative;  // R_t = (sum of instant regret) / t
  double true_max = 0.0;
  GpModel final_model;  // kernel after any refits
};

using Oracle = std::function<double(const Eigen::VectorXd&)>;

namespace detail {

inline GpModel refit_model(const GpModel& model, const History& history,
                           const RefitSpec& refit) {
  GpModel best = model;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ell : refit.lengthscales) {
    for (double sf : refit.signal_stds) {
      GpModel candidate = model;
      candidate.kernel.lengthscale = ell;
      candidate.kernel.signal_std = sf;
      const double lml = log_marginal_likelihood(candidate, history);
      if (lml > best_lml) {
        best_lml = lml;
        best = candidate;
      }
    }
  }
  return best;
}

}  // namespace detail

/// One acquisition step given the round's posterior stats. Shared by the
/// runner and the stateless suggest command so the two paths cannot drift.
/// best_y is the anchor (largest observation so far); pass nullopt when no
/// observation exists, and the prior lower envelope anchors the estimators.
inline Selection select_next(const PredictStats& stats, const AcquisitionKind& kind,
                             int t, std::optional<double> best_y,
                             const std::optional<LipschitzSpec>& lipschitz = {}) {
  const double anchor =
      best_y ? *best_y : prior_anchor(stats.means, stats.stds);
  struct Visitor {
    const PredictStats& stats;
    const std::optional<LipschitzSpec>& lipschitz;
    int t;
    double anchor;
    Selection operator()(const Ucb& a) const {
      return ucb_select(stats, t, stats.means.size(), a.delta);
    }
    Selection operator()(const Ei& a) const {
      return ei_select(stats, anchor + a.epsilon);
    }
    Selection operator()(const Pi& a) const {
      return pi_select(stats, anchor + a.epsilon);
    }
    Selection operator()(const EstNumeric&) const {
      const MaxEstimate mh =
          m_hat_numeric(stats.means, stats.stds, anchor, lipschitz);
      return est_select(stats, mh);
    }
    Selection operator()(const EstLaplace&) const {
      const MaxEstimate mh = m_hat_laplace(stats.means, stats.stds, anchor);
      return est_select(stats, mh);
    }
    Selection operator()(const Random& a) const {
      Rng rng(mix_seed(a.seed, 0x72616e64ULL, static_cast<std::uint64_t>(t)));
      return random_select(stats.means.size(), rng);
    }
  };
  return std::visit(Visitor{stats, lipschitz, t, anchor}, kind);
}

/// One bandit game: T rounds of fit / estimate / select / observe.
///
/// The oracle supplies noiseless ground truth; it is evaluated on the whole
/// grid once, up front, for regret accounting only -- the acquisition path
/// sees nothing but the noisy bandit feedback.
inline RunResult run(const RunConfig& config, const Oracle& oracle) {
  config.validate();
  const Eigen::Index n = config.grid.size();

  Eigen::VectorXd f_true(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      f_true(i) = oracle(config.grid.point(i));
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failed during grid evaluation at index " +
                               std::to_string(i) + ": " + e.what());
    }
    if (!std::isfinite(f_true(i)))
      throw std::runtime_error("oracle returned a non-finite value at index " +
                               std::to_string(i));
  }
  const double f_max = f_true.maxCoeff();

  Rng noise_rng(mix_seed(config.seed, 0x6e6f697365ULL));

  GpModel model = config.model;
  History history = History::empty(config.grid.dim());
  double best_y = -std::numeric_limits<double>::infinity();

  RunResult result;
  result.true_max = f_max;
  result.records.reserve(static_cast<std::size_t>(config.max_rounds));
  result.avg_cumulative.reserve(static_cast<std::size_t>(config.max_rounds));
  double cum = 0.0;
  double best_regret = std::numeric_limits<double>::infinity();

  for (int t = 1; t <= config.max_rounds; ++t) {
    if (config.refit && history.size() >= 1 &&
        history.size() % config.refit->every == 0) {
      model = detail::refit_model(model, history, *config.refit);
    }
    const Posterior post = fit_posterior(model, history);
    const PredictStats stats = post.predict(config.grid.points());

    Selection sel;
    if (t <= static_cast<int>(config.warm_start.size())) {
      sel.index = config.warm_start[static_cast<std::size_t>(t - 1)];
    } else {
      sel = select_next(stats, config.acquisition, t,
                        history.size() > 0 ? std::optional<double>(best_y)
                                           : std::nullopt,
                        config.lipschitz);
    }

    const Eigen::VectorXd x = config.grid.point(sel.index);
    const double y =
        f_true(sel.index) + config.observation_noise_std * noise_rng.normal();
    history.append(x, y);
    best_y = std::max(best_y, y);

    RoundRecord rec;
    rec.t = t;
    rec.grid_index = sel.index;
    rec.x = x;
    rec.y = y;
    rec.m_hat = sel.m_hat;
    rec.nu_t = sel.nu_t;
    rec.zeta_t = zeta_schedule(t, config.max_rounds, config.delta,
                               ZetaSchedule::PiSquared);
    rec.instant_regret = f_max - f_true(sel.index);
    cum += rec.instant_regret;
    best_regret = std::min(best_regret, rec.instant_regret);
    rec.simple_regret = best_regret;
    rec.cumulative_regret = cum;
    rec.sigma_at_choice = stats.stds(sel.index);
    rec.mu_at_choice = stats.means(sel.index);
    rec.f_at_choice = f_true(sel.index);
    result.records.push_back(std::move(rec));
    result.avg_cumulative.push_back(cum / static_cast<double>(t));
  }

  result.r_min = best_regret;
  for (const RoundRecord& rec : result.records) {
    if (rec.instant_regret == best_regret) {
      result.T_min = rec.t;
      break;
    }
  }
  result.final_model = model;
  return result;
}

/// Realized information gain 0.5 * log det(I + sigma^-2 K) of a point set
/// under the model prior.
inline double information_gain(const GpModel& model, const Eigen::MatrixXd& points) {
  model.validate();
  if (!(model.noise_var > 0.0))
    throw std::invalid_argument("information_gain: noise_var must be positive");
  if (points.rows() == 0) return 0.0;
  Eigen::MatrixXd m = kernel_gram(model.kernel, points) / model.noise_var;
  m.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("information_gain: factorization failed");
  const Eigen::MatrixXd l = llt.matrixL();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det_half += std::log(l(i, i));
  return log_det_half;  // = 0.5 * log det
}

/// Diagnostics against the regret analysis: per-round margins of the
/// pointwise bound r_t <= (nu_t + zeta_t) sigma_{t-1}(x_t), and the
/// cumulative bound with realized information gain standing in for the
/// subset maximum (a lower bound on it, labeled as such).
struct BoundReport {
  std::vector<double> margins;
  double fraction_nonnegative = 0.0;
  double cumulative_regret = 0.0;
  double rhs = 0.0;  // (nu_{t*} + zeta_T) sqrt(C T I_realized)
  double nu_star = 0.0;
  double zeta_T = 0.0;
  double information_constant = 0.0;  // C = 2 / log(1 + sigma^-2)
  double realized_information = 0.0;
  int rounds_m_hat_below_max = 0;  // rounds violating the m-hat assumption
};

inline BoundReport bound_report(const RunResult& result, const GpModel& model,
                                double delta) {
  if (result.records.empty())
    throw std::invalid_argument("bound_report: empty run");
  if (!(model.noise_var > 0.0))
    throw std::invalid_argument("bound_report: noise_var must be positive");
  const int T = static_cast<int>(result.records.size());

  BoundReport report;
  report.margins.reserve(result.records.size());
  Eigen::MatrixXd chosen(T, result.records.front().x.size());
  int nonneg = 0;
  double nu_star = 0.0;
  for (int i = 0; i < T; ++i) {
    const RoundRecord& rec = result.records[static_cast<std::size_t>(i)];
    if (!rec.nu_t)
      throw std::invalid_argument(
          "bound_report: record lacks nu_t (not an EST run?)");
    const double margin =
        (*rec.nu_t + rec.zeta_t) * rec.sigma_at_choice - rec.instant_regret;
    report.margins.push_back(margin);
    if (margin >= 0.0) ++nonneg;
    nu_star = std::max(nu_star, *rec.nu_t);
    report.cumulative_regret += rec.instant_regret;
    chosen.row(i) = rec.x.transpose();
    if (rec.m_hat && *rec.m_hat < result.true_max) ++report.rounds_m_hat_below_max;
  }
  report.fraction_nonnegative = static_cast<double>(nonneg) / T;
  report.nu_star = nu_star;
  report.zeta_T = zeta_schedule(T, T, delta, ZetaSchedule::Horizon);
  report.information_constant = 2.0 / std::log1p(1.0 / model.noise_var);
  report.realized_information = information_gain(model, chosen);
  report.rhs = (report.nu_star + report.zeta_T) *
               std::sqrt(report.information_constant * T *
                         report.realized_information);
  return report;
}

}  // namespace gpest
