#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gpest/gp.hpp"
#include "gpest/math.hpp"

namespace gpest {

enum class MaxEstimateMethod { Numeric, Laplace, ExactNoisy };

/// Estimate of max f with integration diagnostics. For the Laplace
/// estimator, method == Numeric signals that the two-point fit was
/// degenerate and the numeric integral was used instead.
struct MaxEstimate {
  double value = 0.0;  // m-hat
  double m0 = 0.0;     // anchor (best observation)
  MaxEstimateMethod method = MaxEstimateMethod::Numeric;
  double integral_mass = 0.0;
  int n_quadrature_points = 0;
};

/// Discretization correction: the candidate set is a rho-covering of the
/// continuous domain and f is L-Lipschitz, so thresholds shift by rho * L.
struct LipschitzSpec {
  double L = 0.0;
  double rho = 0.0;

  double margin() const { return L * rho; }

  void validate() const {
    if (!(L >= 0.0) || !(rho >= 0.0))
      throw std::invalid_argument("LipschitzSpec: L and rho must be nonnegative");
  }
};

namespace detail {

inline void check_stats(const Eigen::VectorXd& means, const Eigen::VectorXd& stds) {
  if (means.size() != stds.size() || means.size() == 0)
    throw std::invalid_argument("max estimator: means/stds size mismatch");
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    if (!std::isfinite(means(i)) || !std::isfinite(stds(i)) || !(stds(i) > 0.0))
      throw std::invalid_argument(
          "max estimator: means must be finite and stds finite positive");
  }
}

/// Expected upside of one candidate over threshold m0,
/// integral over [m0, inf) of 1 - Phi((w - mu) / sd).
inline double upside_mass(double mu, double sd, double m0) {
  const double g = (m0 - mu) / sd;
  return sd * std::max(normal_pdf(g) - g * normal_tail(g), 0.0);
}

}  // namespace detail

inline constexpr int max_quadrature_points = 20000;
inline constexpr double quadrature_tail_eps = 1e-10;

/// Probability that the max over candidates exceeds w, under the
/// independence approximation: 1 - prod_x Phi((w - margin - mu_x) / sd_x),
/// evaluated in log space.
inline double g_integrand(const Eigen::VectorXd& means, const Eigen::VectorXd& stds,
                          double w, double margin = 0.0) {
  detail::check_stats(means, stds);
  double log_prod = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i)
    log_prod += log_normal_cdf((w - margin - means(i)) / stds(i));
  return -std::expm1(log_prod);
}

/// Eq.-(3)-style estimate: m-hat = m0 + integral over [m0, W) of the
/// exceedance probability, by composite trapezoid quadrature.
///
/// Candidates whose whole upside mass is negligible (below 1e-6 * max sd)
/// are excluded from the product and from the step-size rule; this keeps
/// the step from collapsing when the posterior pins some candidates at the
/// variance floor, at a cost bounded by the excluded mass. The step is
/// min(kept sds) / 64, capped so the node count stays within
/// max_quadrature_points.
inline MaxEstimate m_hat_numeric(const Eigen::VectorXd& means,
                                 const Eigen::VectorXd& stds, double m0,
                                 const std::optional<LipschitzSpec>& lip = {}) {
  detail::check_stats(means, stds);
  if (!std::isfinite(m0))
    throw std::invalid_argument("m_hat_numeric: m0 must be finite");
  const double margin = lip ? (lip->validate(), lip->margin()) : 0.0;

  const Eigen::Index n = means.size();
  const double sd_ref = stds.maxCoeff();
  const double mass_eps = 1e-6 * sd_ref;

  // Shift means by the margin once; the integrand is then the plain product.
  struct Cand {
    double mu, sd, threshold;
  };
  std::vector<Cand> kept;
  kept.reserve(static_cast<std::size_t>(n));
  double min_sd = sd_ref;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = means(i) + margin;
    if (detail::upside_mass(mu, stds(i), m0) <= mass_eps) continue;
    kept.push_back({mu, stds(i), mu + 8.0 * stds(i)});
    min_sd = std::min(min_sd, stds(i));
  }

  MaxEstimate est;
  est.m0 = m0;
  est.method = MaxEstimateMethod::Numeric;
  if (kept.empty()) {
    est.value = m0;
    return est;
  }

  std::sort(kept.begin(), kept.end(),
            [](const Cand& a, const Cand& b) { return a.threshold < b.threshold; });

  double upper = kept.back().threshold;
  const auto g_at = [&kept](double w, std::size_t first) {
    double s = 0.0;
    for (std::size_t i = kept.size(); i-- > first;) {
      s += log_normal_cdf((w - kept[i].mu) / kept[i].sd);
      if (s < -45.0) return 1.0;  // product already zero to double precision
    }
    return -std::expm1(s);
  };
  while (g_at(upper, 0) >= quadrature_tail_eps) upper += sd_ref;

  const double range = upper - m0;
  if (!(range > 0.0)) {
    est.value = m0;
    return est;
  }
  double step = min_sd / 64.0;
  Eigen::Index intervals =
      static_cast<Eigen::Index>(std::ceil(range / step));
  intervals = std::clamp<Eigen::Index>(intervals, 1, max_quadrature_points - 1);
  step = range / static_cast<double>(intervals);

  double integral = 0.5 * (g_at(m0, 0) + g_at(upper, 0)) * step;
  std::size_t first = 0;
  for (Eigen::Index j = 1; j < intervals; ++j) {
    const double w = m0 + step * static_cast<double>(j);
    while (first < kept.size() && kept[first].threshold <= w) ++first;
    integral += g_at(w, first) * step;
  }

  est.value = m0 + integral;
  est.integral_mass = integral;
  est.n_quadrature_points = static_cast<int>(intervals) + 1;
  return est;
}

/// Eq.-(2)-style estimate of E[max f]: integral over [0, W) of
/// Pr[Y > y] - Pr[Y < -y]. Not anchored at the best observation, so the
/// result may fall below m0_hint.
inline MaxEstimate m_hat_exact_noisy(const Eigen::VectorXd& means,
                                     const Eigen::VectorXd& stds,
                                     double m0_hint) {
  detail::check_stats(means, stds);
  const Eigen::Index n = means.size();

  double upper = 0.0;
  double neg_cut = (means(0) - 8.0 * stds(0));  // Pr[Y < -y] dies past -min_i(...)
  for (Eigen::Index i = 0; i < n; ++i) {
    upper = std::max(upper, means(i) + 8.0 * stds(i));
    neg_cut = std::min(neg_cut, means(i) - 8.0 * stds(i));
  }
  upper = std::max({upper, -neg_cut, 0.0});

  const auto integrand = [&](double y) {
    double log_hi = 0.0, log_lo = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      log_hi += log_normal_cdf((y - means(i)) / stds(i));
      log_lo += log_normal_cdf((-y - means(i)) / stds(i));
    }
    return -std::expm1(log_hi) - std::exp(log_lo);
  };

  MaxEstimate est;
  est.m0 = m0_hint;
  est.method = MaxEstimateMethod::ExactNoisy;
  if (!(upper > 0.0)) {
    est.value = 0.0;
    return est;
  }
  double step = stds.minCoeff() / 64.0;
  Eigen::Index intervals = static_cast<Eigen::Index>(std::ceil(upper / step));
  intervals = std::clamp<Eigen::Index>(intervals, 1, max_quadrature_points - 1);
  step = upper / static_cast<double>(intervals);
  double integral = 0.5 * (integrand(0.0) + integrand(upper)) * step;
  for (Eigen::Index j = 1; j < intervals; ++j)
    integral += integrand(step * static_cast<double>(j)) * step;

  est.value = integral;
  est.integral_mass = integral;
  est.n_quadrature_points = static_cast<int>(intervals) + 1;
  return est;
}

/// Two-point Gaussian fit of the exceedance curve (ESTa): anchors
/// a = g(m0), probes at m0 + s, fits a * exp(-(w - m0)^2 / 2 b^2) and
/// integrates the half line analytically to a * b * sqrt(pi / 2).
/// Falls back to the numeric integral when the probe does not decay.
inline MaxEstimate m_hat_laplace(const Eigen::VectorXd& means,
                                 const Eigen::VectorXd& stds, double m0) {
  detail::check_stats(means, stds);
  if (!std::isfinite(m0))
    throw std::invalid_argument("m_hat_laplace: m0 must be finite");

  constexpr double g_eps = 1e-12;
  const double a = g_integrand(means, stds, m0);

  MaxEstimate est;
  est.m0 = m0;
  est.method = MaxEstimateMethod::Laplace;
  if (a <= g_eps) {
    est.value = m0;
    return est;
  }

  // Probe offset: median std (lower median), floored.
  std::vector<double> sorted(stds.data(), stds.data() + stds.size());
  std::nth_element(sorted.begin(),
                   sorted.begin() + (static_cast<std::ptrdiff_t>(sorted.size()) - 1) / 2,
                   sorted.end());
  const double s =
      std::max(sorted[static_cast<std::size_t>(sorted.size() - 1) / 2], 1e-6);

  const double g1 = g_integrand(means, stds, m0 + s);
  if (g1 >= a || g1 <= 0.0) return m_hat_numeric(means, stds, m0);

  const double b = std::sqrt(-s * s / (2.0 * std::log(g1 / a)));
  est.integral_mass = a * b * std::sqrt(std::numbers::pi / 2.0);
  est.value = m0 + est.integral_mass;
  est.n_quadrature_points = 2;
  return est;
}

/// Anchor used before any observation exists: a value low enough that the
/// exceedance integral recovers the full expectation of the max.
inline double prior_anchor(const Eigen::VectorXd& means, const Eigen::VectorXd& stds) {
  detail::check_stats(means, stds);
  double lo = means(0) - 8.0 * stds(0);
  for (Eigen::Index i = 1; i < means.size(); ++i)
    lo = std::min(lo, means(i) - 8.0 * stds(i));
  return lo;
}

}  // namespace gpest
