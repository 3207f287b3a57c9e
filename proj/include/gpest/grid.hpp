#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gpest {

/// One axis of a uniform grid: n points spanning [lo, hi].
struct GridDim {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;
};

/// Finite candidate set over a box domain.
///
/// covering_radius() is the largest distance from any point of the
/// continuous box to the nearest grid point, used by the Lipschitz
/// discretization correction of the max estimators.
class CandidateGrid {
 public:
  static CandidateGrid uniform(const std::vector<GridDim>& dims) {
    if (dims.empty()) throw std::invalid_argument("CandidateGrid: no dimensions");
    Eigen::Index total = 1;
    for (const auto& d : dims) {
      if (d.n < 1 || !(d.hi >= d.lo))
        throw std::invalid_argument("CandidateGrid: bad dimension spec");
      total *= d.n;
    }
    const int nd = static_cast<int>(dims.size());
    Eigen::MatrixXd pts(total, nd);
    for (Eigen::Index idx = 0; idx < total; ++idx) {
      Eigen::Index rest = idx;
      for (int j = nd - 1; j >= 0; --j) {
        const auto& d = dims[static_cast<std::size_t>(j)];
        const Eigen::Index c = rest % d.n;
        rest /= d.n;
        pts(idx, j) = d.n == 1 ? 0.5 * (d.lo + d.hi)
                               : d.lo + (d.hi - d.lo) * static_cast<double>(c) /
                                            static_cast<double>(d.n - 1);
      }
    }
    double rho2 = 0.0;
    std::vector<std::array<double, 2>> bounds;
    bounds.reserve(dims.size());
    for (const auto& d : dims) {
      const double gap = d.n == 1 ? 0.5 * (d.hi - d.lo)
                                  : 0.5 * (d.hi - d.lo) / static_cast<double>(d.n - 1);
      rho2 += gap * gap;
      bounds.push_back({d.lo, d.hi});
    }
    return CandidateGrid(std::move(pts), std::move(bounds), std::sqrt(rho2));
  }

  /// Explicit candidate list; rho must be supplied by the caller when the
  /// correction is wanted (0 treats the set as the whole domain).
  static CandidateGrid from_points(Eigen::MatrixXd points, double rho = 0.0) {
    if (points.rows() == 0)
      throw std::invalid_argument("CandidateGrid: empty point list");
    std::vector<std::array<double, 2>> bounds;
    bounds.reserve(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index j = 0; j < points.cols(); ++j)
      bounds.push_back({points.col(j).minCoeff(), points.col(j).maxCoeff()});
    return CandidateGrid(std::move(points), std::move(bounds), rho);
  }

  const Eigen::MatrixXd& points() const { return points_; }
  Eigen::VectorXd point(Eigen::Index i) const { return points_.row(i); }
  Eigen::Index size() const { return points_.rows(); }
  int dim() const { return static_cast<int>(points_.cols()); }
  double covering_radius() const { return rho_; }
  const std::vector<std::array<double, 2>>& bounds() const { return bounds_; }

 private:
  CandidateGrid(Eigen::MatrixXd pts, std::vector<std::array<double, 2>> bounds,
                double rho)
      : points_(std::move(pts)), bounds_(std::move(bounds)), rho_(rho) {}

  Eigen::MatrixXd points_;  // size x dim
  std::vector<std::array<double, 2>> bounds_;
  double rho_ = 0.0;
};

}  // namespace gpest
