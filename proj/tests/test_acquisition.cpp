#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gpest/acquisition.hpp"
#include "gpest/math.hpp"
#include "gpest/rng.hpp"

using namespace gpest;

namespace {

PredictStats random_stats(Eigen::Index n, Rng& rng) {
  PredictStats s;
  s.means.resize(n);
  s.stds.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.means(i) = rng.uniform(-2.0, 2.0);
    s.stds(i) = rng.uniform(0.05, 2.0);
  }
  return s;
}

MaxEstimate fixed_m_hat(double v) {
  MaxEstimate m;
  m.value = v;
  m.m0 = v;
  return m;
}

}  // namespace

TEST_CASE("ucb lambda matches the closed form", "[acquisition]") {
  CHECK(ucb_lambda(1, 1000, 0.01) ==
        Catch::Approx(4.9011479813286548).epsilon(1e-12));
  CHECK_THROWS_AS(ucb_lambda(0, 10, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(ucb_lambda(1, 10, 1.5), std::invalid_argument);
}

TEST_CASE("ucb reduces to argmax mean under equal stds", "[acquisition]") {
  PredictStats s;
  s.means.resize(4);
  s.means << 0.1, 0.9, 0.3, 0.9;
  s.stds = Eigen::VectorXd::Constant(4, 0.5);
  const Selection sel = ucb_select(s, 3, 4, 0.01);
  CHECK(sel.index == 1);  // tie with 3 resolves to the lowest index
  CHECK(sel.lambda_equiv.has_value());
}

TEST_CASE("ucb prefers stds when means are equal and delta is tiny",
          "[acquisition]") {
  PredictStats s;
  s.means = Eigen::VectorXd::Constant(4, 1.0);
  s.stds.resize(4);
  s.stds << 0.1, 0.4, 0.9, 0.2;
  const Selection sel = ucb_select(s, 1, 4, 1e-300);
  CHECK(sel.index == 2);
}

TEST_CASE("expected improvement closed values and nonnegativity",
          "[acquisition]") {
  // gamma = 0: EI = phi(0) * sd
  CHECK(expected_improvement(1.0, 2.0, 1.0) ==
        Catch::Approx(0.3989422804014327 * 2.0).epsilon(1e-12));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double ei = expected_improvement(
        rng.uniform(-3.0, 3.0), rng.uniform(0.01, 2.0), rng.uniform(-3.0, 3.0));
    CHECK(ei >= 0.0);
    CHECK(std::isfinite(ei));
  }
}

TEST_CASE("expected improvement matches Monte Carlo", "[acquisition]") {
  Rng rng(99);
  Rng mc(100);
  for (int rep = 0; rep < 10; ++rep) {
    const double mu = rng.uniform(-1.0, 1.0);
    const double sd = rng.uniform(0.2, 2.0);
    const double theta = rng.uniform(-1.5, 1.5);
    const int draws = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < draws; ++s) {
      const double imp = std::max(mu + sd * mc.normal() - theta, 0.0);
      sum += imp;
      sumsq += imp * imp;
    }
    const double mean = sum / draws;
    const double se =
        std::sqrt(std::max(sumsq / draws - mean * mean, 0.0) / draws);
    CHECK(std::abs(expected_improvement(mu, sd, theta) - mean) <
          3.0 * se + 1e-6);
  }
}

TEST_CASE("ei threshold far above all means follows the mean ordering",
          "[acquisition]") {
  PredictStats s;
  s.means.resize(3);
  s.means << 0.0, 0.5, -0.5;
  s.stds = Eigen::VectorXd::Constant(3, 1.0);
  const Selection sel = ei_select(s, 30.0);
  CHECK(sel.index == 1);
  CHECK(sel.score >= 0.0);
}

TEST_CASE("pi picks the most promising standardized gap", "[acquisition]") {
  PredictStats s;
  s.means.resize(3);
  s.means << 0.0, 1.0, 2.0;
  s.stds = Eigen::VectorXd::Constant(3, 1.0);
  // theta below every mean: most-negative gamma wins
  CHECK(pi_select(s, -1.0).index == 2);
  // equal stds: argmax mean regardless of theta
  CHECK(pi_select(s, 5.0).index == 2);
}

TEST_CASE("pi equals the direct probability argmax", "[acquisition]") {
  Rng rng(1234);
  for (int rep = 0; rep < 25; ++rep) {
    const PredictStats s = random_stats(20, rng);
    const double theta = rng.uniform(-1.0, 3.0);
    const Selection sel = pi_select(s, theta);
    Eigen::Index best = 0;
    double best_p = -1.0;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const double p = normal_tail((theta - s.means(i)) / s.stds(i));
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    CHECK(sel.index == best);
    CHECK(sel.score >= 0.0);
    CHECK(sel.score <= 1.0);
  }
}

TEST_CASE("est picks the max-mean point when m-hat touches it", "[acquisition]") {
  Rng rng(42);
  const PredictStats s = random_stats(30, rng);
  Eigen::Index argmax_mean = 0;
  s.means.maxCoeff(&argmax_mean);
  const Selection sel = est_select(s, fixed_m_hat(s.means.maxCoeff()));
  CHECK(sel.index == argmax_mean);
  CHECK(*sel.nu_t == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("est reduces to argmax std under equal means", "[acquisition]") {
  PredictStats s;
  s.means = Eigen::VectorXd::Constant(5, 0.0);
  s.stds.resize(5);
  s.stds << 0.2, 1.5, 0.7, 1.5, 0.1;
  const Selection sel = est_select(s, fixed_m_hat(2.0));
  CHECK(sel.index == 1);  // tie with 3 resolves low
}

TEST_CASE("lemma 1: est equals the ucb variant with lambda = nu_t",
          "[acquisition]") {
  Rng rng(314159);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(199));
    const PredictStats s = random_stats(n, rng);
    const double m_hat = s.means.maxCoeff() + rng.uniform(0.0, 2.0);
    const Selection est = est_select(s, fixed_m_hat(m_hat));
    Eigen::Index best = 0;
    double best_val = s.means(0) + *est.nu_t * s.stds(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      const double v = s.means(i) + *est.nu_t * s.stds(i);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    CHECK(est.index == best);
  }
}

TEST_CASE("proposition 2: est equals pi at theta = m-hat", "[acquisition]") {
  Rng rng(2718);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(199));
    const PredictStats s = random_stats(n, rng);
    const double m_hat = rng.uniform(-1.0, 4.0);  // any threshold
    CHECK(est_select(s, fixed_m_hat(m_hat)).index == pi_select(s, m_hat).index);
  }
}

TEST_CASE("corollary 3: pi at the ucb target reproduces ucb", "[acquisition]") {
  Rng rng(161803);
  for (int rep = 0; rep < 300; ++rep) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(99));
    const PredictStats s = random_stats(n, rng);
    const double lambda = rng.uniform(0.01, 6.0);
    Eigen::Index ucb_idx = 0;
    double best = s.means(0) + lambda * s.stds(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      const double v = s.means(i) + lambda * s.stds(i);
      if (v > best) {
        best = v;
        ucb_idx = i;
      }
    }
    CHECK(pi_select(s, best).index == ucb_idx);
  }
}

TEST_CASE("est monotone-transform invariance", "[acquisition]") {
  Rng rng(55555);
  for (int rep = 0; rep < 50; ++rep) {
    const PredictStats s = random_stats(40, rng);
    const double m_hat = s.means.maxCoeff() + rng.uniform(0.0, 1.0);
    const Eigen::Index base = est_select(s, fixed_m_hat(m_hat)).index;

    const double c = rng.uniform(-5.0, 5.0);
    PredictStats shifted = s;
    shifted.means.array() += c;
    CHECK(est_select(shifted, fixed_m_hat(m_hat + c)).index == base);

    // scaling stds and gaps together leaves the argmin unchanged
    const double k = rng.uniform(0.1, 10.0);
    PredictStats scaled = s;
    scaled.stds = k * s.stds;
    scaled.means = m_hat - k * (m_hat - s.means.array());
    CHECK(est_select(scaled, fixed_m_hat(m_hat)).index == base);
  }
}

TEST_CASE("est_prob_exact matches the naive product and est_select",
          "[acquisition]") {
  Rng rng(8086);
  for (int rep = 0; rep < 50; ++rep) {
    const PredictStats s = random_stats(8, rng);
    const double m_hat = s.means.maxCoeff() + rng.uniform(0.0, 1.5);
    const Eigen::VectorXd logp = est_prob_exact(s, m_hat);
    for (Eigen::Index i = 0; i < 8; ++i) {
      double naive = normal_tail((m_hat - s.means(i)) / s.stds(i));
      for (Eigen::Index j = 0; j < 8; ++j)
        if (j != i) naive *= normal_cdf((m_hat - s.means(j)) / s.stds(j));
      CHECK(std::exp(logp(i)) == Catch::Approx(naive).margin(1e-12));
    }
    Eigen::Index argmax = 0;
    logp.maxCoeff(&argmax);
    CHECK(argmax == est_select(s, fixed_m_hat(m_hat)).index);
  }
}

TEST_CASE("est_prob_exact symmetry and single-candidate value", "[acquisition]") {
  PredictStats s;
  s.means.resize(2);
  s.means << 0.7, 0.7;
  s.stds.resize(2);
  s.stds << 0.4, 0.4;
  const Eigen::VectorXd logp = est_prob_exact(s, 1.5);
  CHECK(logp(0) == Catch::Approx(logp(1)));

  PredictStats one;
  one.means.resize(1);
  one.means << 0.2;
  one.stds.resize(1);
  one.stds << 0.5;
  CHECK(est_prob_exact(one, 1.0)(0) ==
        Catch::Approx(log_normal_tail((1.0 - 0.2) / 0.5)));
}

TEST_CASE("random_select is reproducible and uniform", "[acquisition]") {
  Rng a(9), b(9);
  for (int i = 0; i < 20; ++i)
    CHECK(random_select(17, a).index == random_select(17, b).index);

  CHECK(random_select(1, a).index == 0);

  Rng rng(77);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i)
    ++counts[static_cast<std::size_t>(random_select(10, rng).index)];
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("acquisition kind validation and names", "[acquisition]") {
  CHECK_THROWS_AS(validate(AcquisitionKind(Ucb{0.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate(AcquisitionKind(Pi{-0.1})), std::invalid_argument);
  CHECK_NOTHROW(validate(AcquisitionKind(EstNumeric{})));
  CHECK(acquisition_name(AcquisitionKind(EstLaplace{})) == "esta");
  CHECK(acquisition_name(AcquisitionKind(Random{3})) == "rand");
}
