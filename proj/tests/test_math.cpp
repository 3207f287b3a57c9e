#include <catch_amalgamated.hpp>

#include <cmath>

#include "gpest/math.hpp"
#include "gpest/rng.hpp"

using namespace gpest;

TEST_CASE("normal cdf and tail basics", "[math]") {
  CHECK(normal_cdf(0.0) == Catch::Approx(0.5));
  CHECK(normal_tail(0.0) == Catch::Approx(0.5));
  CHECK(normal_pdf(0.0) == Catch::Approx(0.3989422804014327));
  CHECK(normal_cdf(5.0) + normal_tail(5.0) == Catch::Approx(1.0));
  CHECK(normal_cdf(-50.0) >= 0.0);
  CHECK(normal_tail(50.0) >= 0.0);
}

TEST_CASE("log_normal_cdf matches high-precision values", "[math]") {
  // Reference values computed with 40-digit arithmetic.
  struct Case {
    double z, expect, rel_tol;
  };
  const Case cases[] = {
      {-60.0, -1805.0135606805671387, 1e-13},
      {-50.0, -1254.8313611394199013, 1e-13},
      {-40.0, -804.60844201375378817, 1e-13},
      {-37.0, -689.0305855768905936, 1e-13},
      {-36.0, -652.50322759379839685, 1e-12},
      {-30.0, -454.32124395634319711, 1e-12},
      {-20.0, -203.91715537109726394, 1e-12},
      {-10.0, -53.231285150512470578, 1e-12},
      {-5.0, -15.064998393988725736, 1e-12},
      {-1.0, -1.8410216450092635058, 1e-12},
      {0.0, -0.69314718055994530942, 1e-12},
      {1.0, -0.17275377902344988953, 1e-12},
      {5.0, -2.8665161296376359338e-7, 1e-12},
      {8.0, -6.2209605742717860585e-16, 1e-12},
  };
  for (const Case& c : cases) {
    CAPTURE(c.z);
    CHECK(log_normal_cdf(c.z) ==
          Catch::Approx(c.expect).epsilon(c.rel_tol).margin(0.0));
  }
  CHECK(log_normal_cdf(20.0) == Catch::Approx(0.0).margin(1e-30));
}

TEST_CASE("log_normal_cdf continuous across the asymptotic switch", "[math]") {
  // Both branches are valid near -36; they must agree tightly.
  for (double z = -36.5; z <= -35.5; z += 0.01) {
    const double direct = std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    CHECK(log_normal_cdf(z) == Catch::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("log_normal_tail symmetry", "[math]") {
  for (double z : {-8.0, -2.5, 0.0, 1.0, 3.0, 40.0}) {
    CHECK(log_normal_tail(z) == Catch::Approx(log_normal_cdf(-z)));
  }
}

TEST_CASE("rng determinism and stream independence", "[math]") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double va = a.normal();
    CHECK(va == b.normal());
    (void)c.normal();
  }
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
}

TEST_CASE("rng normal moments", "[math]") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng uniform_index is unbiased", "[math]") {
  Rng rng(12345);
  int counts[10] = {0};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_index(10)];
  for (int k = 0; k < 10; ++k) {
    const double freq = static_cast<double>(counts[k]) / draws;
    CHECK(freq > 0.09);
    CHECK(freq < 0.11);
  }
}
