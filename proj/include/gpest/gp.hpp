#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gpest/grid.hpp"
#include "gpest/kernel.hpp"
#include "gpest/rng.hpp"

namespace gpest {

/// Floor applied to predictive variances before taking square roots.
inline constexpr double var_floor = 1e-12;

/// Observed data (x_1, y_1), ..., (x_t, y_t).
struct History {
  Eigen::MatrixXd points;  // t x d
  Eigen::VectorXd values;  // t

  static History empty(int dim) {
    History h;
    h.points.resize(0, dim);
    h.values.resize(0);
    return h;
  }

  Eigen::Index size() const { return values.size(); }
  int dim() const { return static_cast<int>(points.cols()); }

  void append(const Eigen::VectorXd& x, double y) {
    if (x.size() != points.cols())
      throw std::invalid_argument("History::append: dimension mismatch");
    points.conservativeResize(points.rows() + 1, Eigen::NoChange);
    points.row(points.rows() - 1) = x.transpose();
    values.conservativeResize(values.size() + 1);
    values(values.size() - 1) = y;
  }

  void validate() const {
    if (points.rows() != values.size())
      throw std::invalid_argument("History: points/values length mismatch");
  }
};

struct PredictStats {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
};

namespace detail {

/// Cholesky of m with an escalating diagonal jitter. Starts at
/// 1e-10 * scale, escalates tenfold up to 1e-4 * scale, then throws.
inline std::pair<Eigen::MatrixXd, double> robust_cholesky(const Eigen::MatrixXd& m,
                                                          double scale) {
  for (double jitter = 1e-10 * scale; jitter <= 1e-4 * scale * 1.0000001;
       jitter *= 10.0) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success)
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
  }
  throw std::runtime_error(
      "robust_cholesky: factorization failed after jitter escalation "
      "(matrix of size " + std::to_string(m.rows()) + " too ill-conditioned)");
}

}  // namespace detail

/// Exact GP posterior over f given a model and history. Immutable once
/// fitted; predictions are pure and safe to call from several threads.
class Posterior {
 public:
  Posterior(GpModel model, History history)
      : model_(std::move(model)), history_(std::move(history)) {
    model_.validate();
    history_.validate();
    const Eigen::Index t = history_.size();
    if (t == 0) return;
    Eigen::MatrixXd k = kernel_gram(model_.kernel, history_.points);
    k.diagonal().array() += model_.noise_var;
    auto [chol, jitter] = detail::robust_cholesky(k, model_.kernel.signal_var());
    chol_ = std::move(chol);
    jitter_ = jitter;
    const Eigen::VectorXd resid =
        history_.values - model_.mean.values(history_.points);
    weights_ = chol_.triangularView<Eigen::Lower>().solve(resid);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
  }

  const GpModel& model() const { return model_; }
  const History& history() const { return history_; }
  double jitter() const { return jitter_; }

  /// Posterior mean and variance of f at a single point.
  std::pair<double, double> predict_one(const Eigen::VectorXd& x) const {
    const double prior_var = model_.kernel.signal_var();
    const double m0 = model_.mean.value(x);
    if (history_.size() == 0) return {m0, std::max(prior_var, var_floor)};
    Eigen::VectorXd kx(history_.size());
    for (Eigen::Index i = 0; i < history_.size(); ++i)
      kx(i) = kernel_eval(model_.kernel, history_.points.row(i), x);
    const double mean = m0 + kx.dot(weights_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    const double var = prior_var - v.squaredNorm();
    return {mean, std::max(var, var_floor)};
  }

  /// Posterior means and standard deviations at each row of pts.
  PredictStats predict(const Eigen::MatrixXd& pts) const {
    if (pts.cols() != history_.points.cols() && history_.size() > 0)
      throw std::invalid_argument("Posterior::predict: dimension mismatch");
    PredictStats out;
    out.means = model_.mean.values(pts);
    const double prior_var = model_.kernel.signal_var();
    if (history_.size() == 0) {
      out.stds = Eigen::VectorXd::Constant(
          pts.rows(), std::sqrt(std::max(prior_var, var_floor)));
      return out;
    }
    const Eigen::MatrixXd kxs = kernel_gram(model_.kernel, history_.points, pts);
    out.means += kxs.transpose() * weights_;
    const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kxs);
    out.stds.resize(pts.rows());
    for (Eigen::Index j = 0; j < pts.rows(); ++j)
      out.stds(j) = std::sqrt(
          std::max(prior_var - v.col(j).squaredNorm(), var_floor));
    return out;
  }

  /// Full posterior covariance matrix over the rows of pts.
  Eigen::MatrixXd cov(const Eigen::MatrixXd& pts) const {
    Eigen::MatrixXd k = kernel_gram(model_.kernel, pts);
    if (history_.size() == 0) return k;
    const Eigen::MatrixXd kxs = kernel_gram(model_.kernel, history_.points, pts);
    const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kxs);
    k -= v.transpose() * v;
    return k;
  }

 private:
  GpModel model_;
  History history_;
  Eigen::MatrixXd chol_;     // lower factor of K_t + noise_var I + jitter I
  Eigen::VectorXd weights_;  // (K_t + noise_var I + jitter I)^{-1} residuals
  double jitter_ = 0.0;
};

inline Posterior fit_posterior(const GpModel& model, const History& history) {
  return Posterior(model, history);
}

inline PredictStats predict(const Posterior& post, const CandidateGrid& grid) {
  return post.predict(grid.points());
}

inline Eigen::MatrixXd posterior_cov(const Posterior& post,
                                     const Eigen::MatrixXd& pts) {
  return post.cov(pts);
}

/// One joint draw of f over the grid, deterministic in the seed.
inline Eigen::VectorXd sample_function(const GpModel& model,
                                       const CandidateGrid& grid,
                                       std::uint64_t seed) {
  model.validate();
  const Eigen::MatrixXd k = kernel_gram(model.kernel, grid.points());
  auto [chol, jitter] = detail::robust_cholesky(k, model.kernel.signal_var());
  (void)jitter;
  Rng rng(mix_seed(seed, 0x73616d706c65ULL));
  Eigen::VectorXd z(grid.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return model.mean.values(grid.points()) + chol * z;
}

/// Log evidence of the observed values under the model.
inline double log_marginal_likelihood(const GpModel& model,
                                      const History& history) {
  model.validate();
  history.validate();
  const Eigen::Index t = history.size();
  if (t < 1)
    throw std::invalid_argument("log_marginal_likelihood: empty history");
  Eigen::MatrixXd k = kernel_gram(model.kernel, history.points);
  k.diagonal().array() += model.noise_var;
  auto [chol, jitter] = detail::robust_cholesky(k, model.kernel.signal_var());
  (void)jitter;
  const Eigen::VectorXd resid = history.values - model.mean.values(history.points);
  const Eigen::VectorXd v = chol.triangularView<Eigen::Lower>().solve(resid);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) log_det_half += std::log(chol(i, i));
  return -0.5 * v.squaredNorm() - log_det_half -
         0.5 * static_cast<double>(t) * std::log(2.0 * std::numbers::pi);
}

}  // namespace gpest
