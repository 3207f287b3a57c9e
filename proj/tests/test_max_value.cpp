#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "gpest/math.hpp"
#include "gpest/max_value.hpp"
#include "gpest/rng.hpp"

using namespace gpest;

namespace {

struct Instance {
  Eigen::VectorXd means, stds;
};

Instance random_instance(Eigen::Index n, Rng& rng, double sd_lo = 0.2,
                         double sd_hi = 2.0) {
  Instance inst;
  inst.means.resize(n);
  inst.stds.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inst.means(i) = rng.uniform(-2.0, 2.0);
    inst.stds(i) = rng.uniform(sd_lo, sd_hi);
  }
  return inst;
}

/// Monte Carlo oracle for E[max of independent normals], with its
/// standard error. floor_at clips each draw from below (the anchored case).
std::pair<double, double> mc_max_mean(const Instance& inst, int draws, Rng& rng,
                                      double floor_at = -1e300) {
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < draws; ++s) {
    double best = floor_at;
    for (Eigen::Index i = 0; i < inst.means.size(); ++i)
      best = std::max(best, inst.means(i) + inst.stds(i) * rng.normal());
    sum += best;
    sumsq += best * best;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / draws)};
}

Eigen::VectorXd single(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("g_integrand limits and closed values", "[max_value]") {
  Instance inst;
  inst.means = single(0.0);
  inst.stds = single(1.0);
  CHECK(g_integrand(inst.means, inst.stds, 0.0) == Catch::Approx(0.5));
  // far below every candidate the product vanishes
  CHECK(g_integrand(inst.means, inst.stds, -40.0) ==
        Catch::Approx(1.0).margin(1e-12));
  // margin shifts the threshold
  CHECK(g_integrand(inst.means, inst.stds, 0.5, 0.5) == Catch::Approx(0.5));
}

TEST_CASE("g_integrand log-space path equals the naive product", "[max_value]") {
  Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const Instance inst = random_instance(3, rng);
    const double w = rng.uniform(-3.0, 3.0);
    double prod = 1.0;
    for (int i = 0; i < 3; ++i)
      prod *= normal_cdf((w - inst.means(i)) / inst.stds(i));
    CHECK(g_integrand(inst.means, inst.stds, w) ==
          Catch::Approx(1.0 - prod).margin(1e-12));
  }
}

TEST_CASE("single-candidate numeric estimate hits the closed form",
          "[max_value]") {
  // m0 at the mean: integral of Q(w) over [0, inf) = E[Z+] = 1/sqrt(2 pi).
  const MaxEstimate est = m_hat_numeric(single(0.0), single(1.0), 0.0);
  CHECK(est.method == MaxEstimateMethod::Numeric);
  CHECK(est.m0 == 0.0);
  CHECK(est.value == Catch::Approx(inv_sqrt_2pi).margin(1e-4));
  CHECK(est.n_quadrature_points > 10);
}

TEST_CASE("degenerate posterior returns the anchor", "[max_value]") {
  Eigen::VectorXd means(3), stds(3);
  means << -5.0, -4.0, -6.0;
  stds << 1e-6, 1e-6, 1e-6;
  const MaxEstimate est = m_hat_numeric(means, stds, 1.0);
  CHECK(est.value == Catch::Approx(1.0).margin(1e-6));
  CHECK(est.integral_mass == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("numeric estimate vs Monte Carlo max oracle", "[max_value]") {
  Rng rng(555);
  Rng mc_rng(556);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(49));
    const Instance inst = random_instance(n, rng);
    const double m0 = inst.means.maxCoeff();  // anchor at the best mean
    const auto [mc, se] = mc_max_mean(inst, 100000, mc_rng, m0);
    const MaxEstimate est = m_hat_numeric(inst.means, inst.stds, m0);
    CAPTURE(n, mc, se, est.value);
    // The estimator integrates exactly E[max(Y, m0)] under independence, so
    // agreement within MC noise is expected.
    CHECK(std::abs(est.value - mc) < 3.0 * se + 1e-4);
    CHECK(est.value >= m0);
  }
}

TEST_CASE("numeric estimate dominates the unanchored MC max", "[max_value]") {
  Rng rng(777);
  Rng mc_rng(778);
  const Instance inst = random_instance(50, rng);
  const double m0 = inst.means.maxCoeff();
  const auto [mc, se] = mc_max_mean(inst, 100000, mc_rng);
  const MaxEstimate est = m_hat_numeric(inst.means, inst.stds, m0);
  CHECK(est.value >= mc - 3.0 * se);
}

TEST_CASE("numeric estimate is monotone in means and stds", "[max_value]") {
  Rng rng(31337);
  for (int rep = 0; rep < 20; ++rep) {
    Instance inst = random_instance(12, rng);
    const double m0 = inst.means.maxCoeff();
    const double base = m_hat_numeric(inst.means, inst.stds, m0).value;
    const Eigen::Index which = static_cast<Eigen::Index>(rng.uniform_index(12));
    Instance up = inst;
    up.means(which) += 0.05;
    CHECK(m_hat_numeric(up.means, up.stds, m0).value >= base - 1e-6);
    Instance wider = inst;
    wider.stds(which) *= 1.2;
    CHECK(m_hat_numeric(wider.means, wider.stds, m0).value >= base - 1e-6);
  }
}

TEST_CASE("lipschitz margin never lowers the estimate", "[max_value]") {
  Rng rng(909);
  const Instance inst = random_instance(10, rng);
  const double m0 = inst.means.maxCoeff();
  double prev = m_hat_numeric(inst.means, inst.stds, m0).value;
  for (double margin : {0.05, 0.1, 0.5, 1.0}) {
    const MaxEstimate est =
        m_hat_numeric(inst.means, inst.stds, m0, LipschitzSpec{margin, 1.0});
    CHECK(est.value >= prev - 1e-7);
    prev = est.value;
  }
}

TEST_CASE("exact-noisy estimator on symmetric and degenerate candidates",
          "[max_value]") {
  // symmetric single candidate: E[Y] = 0
  const MaxEstimate sym = m_hat_exact_noisy(single(0.0), single(1.0), 0.0);
  CHECK(sym.method == MaxEstimateMethod::ExactNoisy);
  CHECK(sym.value == Catch::Approx(0.0).margin(1e-4));
  // point mass at 2
  const MaxEstimate pt = m_hat_exact_noisy(single(2.0), single(1e-6), 0.0);
  CHECK(pt.value == Catch::Approx(2.0).margin(1e-4));
  // point mass at -3: not anchored, may land below any hint
  const MaxEstimate neg = m_hat_exact_noisy(single(-3.0), single(1e-6), 0.0);
  CHECK(neg.value == Catch::Approx(-3.0).margin(1e-4));
}

TEST_CASE("exact-noisy estimator vs Monte Carlo oracle", "[max_value]") {
  Rng rng(8888);
  Rng mc_rng(8889);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = random_instance(10, rng);
    const auto [mc, se] = mc_max_mean(inst, 100000, mc_rng);
    const MaxEstimate est =
        m_hat_exact_noisy(inst.means, inst.stds, inst.means.maxCoeff());
    CAPTURE(mc, se, est.value);
    CHECK(std::abs(est.value - mc) < 3.0 * se + 1e-4);
  }
}

TEST_CASE("laplace estimate close to numeric on a single candidate",
          "[max_value]") {
  const MaxEstimate lap = m_hat_laplace(single(0.0), single(1.0), 0.0);
  CHECK(lap.method == MaxEstimateMethod::Laplace);
  CHECK(lap.n_quadrature_points == 2);
  // a = g(m0) = 0.5 exactly
  CHECK(g_integrand(single(0.0), single(1.0), 0.0) == Catch::Approx(0.5));
  CHECK(std::abs(lap.value - inv_sqrt_2pi) / inv_sqrt_2pi < 0.15);
}

TEST_CASE("laplace falls back to the anchor on degenerate posteriors",
          "[max_value]") {
  Eigen::VectorXd means(2), stds(2);
  means << -30.0, -40.0;
  stds << 1e-6, 1e-6;
  const MaxEstimate est = m_hat_laplace(means, stds, 0.5);
  CHECK(est.value == 0.5);
  CHECK(est.method == MaxEstimateMethod::Laplace);
}

TEST_CASE("laplace tracks numeric within the harness tolerance", "[max_value]") {
  Rng rng(4242);
  std::vector<double> rel;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(30));
    const Instance inst = random_instance(n, rng);
    const double m0 = inst.means.maxCoeff() + rng.uniform(0.0, 0.5);
    const MaxEstimate numeric = m_hat_numeric(inst.means, inst.stds, m0);
    const MaxEstimate laplace = m_hat_laplace(inst.means, inst.stds, m0);
    rel.push_back(std::abs(laplace.value - numeric.value) /
                  (numeric.value - m0 + 1e-9));
  }
  std::sort(rel.begin(), rel.end());
  CHECK(rel[(rel.size() - 1) / 2] <= 0.25);
}

TEST_CASE("estimators reject bad inputs", "[max_value]") {
  Eigen::VectorXd ok = single(0.0), bad_sd = single(0.0);
  CHECK_THROWS_AS(m_hat_numeric(ok, bad_sd, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(
      m_hat_numeric(ok, single(1.0), std::numeric_limits<double>::infinity()),
      std::invalid_argument);
  Eigen::VectorXd nan_mean = single(std::nan(""));
  CHECK_THROWS_AS(m_hat_laplace(nan_mean, single(1.0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("prior anchor sits below every candidate", "[max_value]") {
  Rng rng(5150);
  const Instance inst = random_instance(20, rng);
  const double anchor = prior_anchor(inst.means, inst.stds);
  for (Eigen::Index i = 0; i < 20; ++i)
    CHECK(anchor <= inst.means(i) - 7.9 * inst.stds(i));
  // the integrand is ~1 there, so the integral recovers the full expectation
  CHECK(g_integrand(inst.means, inst.stds, anchor) ==
        Catch::Approx(1.0).margin(1e-9));
}
