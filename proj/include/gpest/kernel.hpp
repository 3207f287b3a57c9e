#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpest {

enum class KernelFamily { Matern32, Matern52, SquaredExponential };

/// Isotropic covariance: k(x, x') = signal_std^2 * corr(||x - x'|| / lengthscale).
struct KernelSpec {
  KernelFamily family = KernelFamily::Matern52;
  double lengthscale = 1.0;
  double signal_std = 1.0;

  double signal_var() const { return signal_std * signal_std; }

  void validate() const {
    if (!(lengthscale > 0.0))
      throw std::invalid_argument("KernelSpec: lengthscale must be positive");
    if (!(signal_std > 0.0))
      throw std::invalid_argument("KernelSpec: signal_std must be positive");
  }
};

/// Correlation at scaled distance r = ||x - x'|| / lengthscale.
inline double kernel_correlation(KernelFamily family, double r) {
  switch (family) {
    case KernelFamily::Matern32: {
      const double a = std::numbers::sqrt3 * r;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::Matern52: {
      const double a = std::sqrt(5.0) * r;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::SquaredExponential:
      return std::exp(-0.5 * r * r);
  }
  return 0.0;  // unreachable
}

inline double kernel_eval(const KernelSpec& k, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  const double r = (x - y).norm() / k.lengthscale;
  return k.signal_var() * kernel_correlation(k.family, r);
}

/// Cross-covariance matrix between two point sets (rows are points).
inline Eigen::MatrixXd kernel_gram(const KernelSpec& k, const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("kernel_gram: dimension mismatch");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double r = (a.row(i) - b.row(j)).norm() / k.lengthscale;
      out(i, j) = k.signal_var() * kernel_correlation(k.family, r);
    }
  }
  return out;
}

/// Symmetric Gram matrix of one point set.
inline Eigen::MatrixXd kernel_gram(const KernelSpec& k, const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out(a.rows(), a.rows());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    out(j, j) = k.signal_var();
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      const double r = (a.row(i) - a.row(j)).norm() / k.lengthscale;
      const double v = k.signal_var() * kernel_correlation(k.family, r);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

enum class MeanKind { Zero, Linear };

/// Prior mean function; Linear is intercept + slope . x.
struct MeanSpec {
  MeanKind kind = MeanKind::Zero;
  Eigen::VectorXd slope;  // Linear only, one entry per input dimension
  double intercept = 0.0;

  double value(const Eigen::VectorXd& x) const {
    if (kind == MeanKind::Zero) return 0.0;
    if (slope.size() != x.size())
      throw std::invalid_argument("MeanSpec: slope dimension mismatch");
    return intercept + slope.dot(x);
  }

  Eigen::VectorXd values(const Eigen::MatrixXd& points) const {
    if (kind == MeanKind::Zero) return Eigen::VectorXd::Zero(points.rows());
    if (slope.size() != points.cols())
      throw std::invalid_argument("MeanSpec: slope dimension mismatch");
    return Eigen::VectorXd::Constant(points.rows(), intercept) + points * slope;
  }
};

/// Prior: f ~ GP(mean, k), observations y = f(x) + N(0, noise_var).
struct GpModel {
  KernelSpec kernel;
  MeanSpec mean;
  double noise_var = 0.0;

  void validate() const {
    kernel.validate();
    if (!(noise_var >= 0.0))
      throw std::invalid_argument("GpModel: noise_var must be nonnegative");
  }
};

}  // namespace gpest
