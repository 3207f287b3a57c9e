#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "gpest/gp.hpp"
#include "gpest/math.hpp"
#include "gpest/max_value.hpp"
#include "gpest/rng.hpp"

namespace gpest {

struct Ucb {
  double delta = 0.01;
};
struct Ei {
  double epsilon = 0.0;  // threshold = best observation + epsilon
};
struct Pi {
  double epsilon = 0.1;
};
struct EstNumeric {};
struct EstLaplace {};
struct Random {
  std::uint64_t seed = 0;
};

using AcquisitionKind = std::variant<Ucb, Ei, Pi, EstNumeric, EstLaplace, Random>;

inline void validate(const AcquisitionKind& kind) {
  if (const auto* u = std::get_if<Ucb>(&kind)) {
    if (!(u->delta > 0.0 && u->delta < 1.0))
      throw std::invalid_argument("Ucb: delta must lie in (0,1)");
  } else if (const auto* e = std::get_if<Ei>(&kind)) {
    if (!(e->epsilon >= 0.0))
      throw std::invalid_argument("Ei: epsilon must be nonnegative");
  } else if (const auto* p = std::get_if<Pi>(&kind)) {
    if (!(p->epsilon >= 0.0))
      throw std::invalid_argument("Pi: epsilon must be nonnegative");
  }
}

inline std::string acquisition_name(const AcquisitionKind& kind) {
  struct Visitor {
    std::string operator()(const Ucb&) const { return "ucb"; }
    std::string operator()(const Ei&) const { return "ei"; }
    std::string operator()(const Pi&) const { return "pi"; }
    std::string operator()(const EstNumeric&) const { return "estn"; }
    std::string operator()(const EstLaplace&) const { return "esta"; }
    std::string operator()(const Random&) const { return "rand"; }
  };
  return std::visit(Visitor{}, kind);
}

/// Result of one selection step. The equivalence fields expose the
/// adaptively-implied parameters of the other strategies: for EST,
/// lambda_equiv is the UCB coefficient and theta_equiv the PI threshold
/// that would pick the same point.
struct Selection {
  Eigen::Index index = 0;
  double score = 0.0;
  std::optional<double> m_hat;
  std::optional<double> nu_t;
  std::optional<double> lambda_equiv;
  std::optional<double> theta_equiv;
};

namespace detail {

inline void check_select_stats(const PredictStats& stats) {
  if (stats.means.size() == 0 || stats.means.size() != stats.stds.size())
    throw std::invalid_argument("selection: empty or mismatched stats");
}

/// argmin over candidates of gamma(x) = (theta - mu(x)) / sd(x);
/// ties resolve to the lowest index. Shared by PI and EST so their
/// equivalence is structural rather than numerical.
inline Eigen::Index argmin_gamma(const PredictStats& stats, double theta,
                                 double* min_gamma = nullptr) {
  Eigen::Index best = 0;
  double best_val = (theta - stats.means(0)) / stats.stds(0);
  for (Eigen::Index i = 1; i < stats.means.size(); ++i) {
    const double g = (theta - stats.means(i)) / stats.stds(i);
    if (g < best_val) {
      best_val = g;
      best = i;
    }
  }
  if (min_gamma) *min_gamma = best_val;
  return best;
}

}  // namespace detail

/// GP-UCB exploration coefficient for a finite candidate set.
inline double ucb_lambda(int t, Eigen::Index grid_size, double delta) {
  if (t < 1 || grid_size < 1)
    throw std::invalid_argument("ucb_lambda: t and grid_size must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("ucb_lambda: delta must lie in (0,1)");
  const double tt = static_cast<double>(t);
  const double arg = static_cast<double>(grid_size) * std::numbers::pi *
                     std::numbers::pi * tt * tt / (6.0 * delta);
  return std::sqrt(2.0 * std::log(arg));
}

/// argmax of mu + lambda_t * sd.
inline Selection ucb_select(const PredictStats& stats, int t,
                            Eigen::Index grid_size, double delta) {
  detail::check_select_stats(stats);
  const double lambda = ucb_lambda(t, grid_size, delta);
  Eigen::Index best = 0;
  double best_val = stats.means(0) + lambda * stats.stds(0);
  for (Eigen::Index i = 1; i < stats.means.size(); ++i) {
    const double v = stats.means(i) + lambda * stats.stds(i);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  Selection sel;
  sel.index = best;
  sel.score = best_val;
  sel.lambda_equiv = lambda;
  return sel;
}

/// Expected improvement over threshold theta for one candidate.
inline double expected_improvement(double mean, double sd, double theta) {
  const double gamma = (theta - mean) / sd;
  return std::max((normal_pdf(gamma) - gamma * normal_tail(gamma)) * sd, 0.0);
}

/// argmax of EI(x) = [phi(gamma) - gamma Q(gamma)] * sd.
inline Selection ei_select(const PredictStats& stats, double theta) {
  detail::check_select_stats(stats);
  Eigen::Index best = 0;
  double best_val = expected_improvement(stats.means(0), stats.stds(0), theta);
  for (Eigen::Index i = 1; i < stats.means.size(); ++i) {
    const double v = expected_improvement(stats.means(i), stats.stds(i), theta);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  Selection sel;
  sel.index = best;
  sel.score = best_val;
  sel.theta_equiv = theta;
  return sel;
}

/// argmax of Pr[f(x) > theta], i.e. argmin of gamma(x).
inline Selection pi_select(const PredictStats& stats, double theta) {
  detail::check_select_stats(stats);
  double min_gamma = 0.0;
  Selection sel;
  sel.index = detail::argmin_gamma(stats, theta, &min_gamma);
  sel.score = normal_tail(min_gamma);  // the improvement probability itself
  sel.theta_equiv = theta;
  return sel;
}

/// EST step: argmin of (m-hat - mu) / sd. Records nu_t = min gamma, which
/// is both the implied UCB coefficient and the bound quantity of the
/// regret analysis.
inline Selection est_select(const PredictStats& stats, const MaxEstimate& m_hat) {
  detail::check_select_stats(stats);
  if (!std::isfinite(m_hat.value))
    throw std::invalid_argument("est_select: m_hat must be finite");
  double min_gamma = 0.0;
  Selection sel;
  sel.index = detail::argmin_gamma(stats, m_hat.value, &min_gamma);
  sel.score = min_gamma;
  sel.m_hat = m_hat.value;
  sel.nu_t = min_gamma;
  sel.lambda_equiv = min_gamma;
  sel.theta_equiv = m_hat.value;
  return sel;
}

/// Log of the product-form argmax probabilities
/// Pr[M_x | m-hat, D] ~ Q(gamma(x)) * prod_{x' != x} Phi(gamma(x')).
inline Eigen::VectorXd est_prob_exact(const PredictStats& stats, double m_hat) {
  detail::check_select_stats(stats);
  if (!std::isfinite(m_hat))
    throw std::invalid_argument("est_prob_exact: m_hat must be finite");
  const Eigen::Index n = stats.means.size();
  Eigen::VectorXd log_cdf(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gamma = (m_hat - stats.means(i)) / stats.stds(i);
    log_cdf(i) = log_normal_cdf(gamma);
    total += log_cdf(i);
  }
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gamma = (m_hat - stats.means(i)) / stats.stds(i);
    out(i) = log_normal_tail(gamma) + (total - log_cdf(i));
  }
  return out;
}

/// Uniform choice over the grid; deterministic in the rng state.
inline Selection random_select(Eigen::Index grid_size, Rng& rng) {
  if (grid_size < 1)
    throw std::invalid_argument("random_select: grid_size must be >= 1");
  Selection sel;
  sel.index = static_cast<Eigen::Index>(
      rng.uniform_index(static_cast<std::uint64_t>(grid_size)));
  sel.score = 0.0;
  return sel;
}

}  // namespace gpest
