#include "doctest.h"

#include <cmath>

#include "censurv/distributions.hpp"
#include "support/oracles.hpp"

using namespace censurv;
using namespace censurv::testing;

TEST_CASE("three point grid matches the direct summation oracle") {
  // t_max=3, mu=2, sigma=1: Z = 1 + 2 e^{-1/2}
  const EventPmf pmf = disc_gauss_log_pmf({2.0, 1.0}, TimeGrid(3));
  const double z = 1.0 + 2.0 * std::exp(-0.5);
  CHECK(pmf.prob(2) == doctest::Approx(1.0 / z).epsilon(1e-14));
  CHECK(pmf.prob(1) == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-14));
  CHECK(pmf.prob(2) == doctest::Approx(0.4519).epsilon(1e-4));
}

TEST_CASE("pmf is symmetric about an interior integer mu") {
  const EventPmf pmf = disc_gauss_log_pmf({3.0, 1.7}, TimeGrid(5));
  CHECK(pmf.prob(1) == doctest::Approx(pmf.prob(5)).epsilon(1e-14));
  CHECK(pmf.prob(2) == doctest::Approx(pmf.prob(4)).epsilon(1e-14));
}

TEST_CASE("tiny sigma between two grid points splits mass equally") {
  const EventPmf pmf = disc_gauss_log_pmf({5.5, 1e-3}, TimeGrid(10));
  CHECK(pmf.prob(5) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pmf.prob(6) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("sigma must be positive") {
  CHECK_THROWS_AS(disc_gauss_log_pmf({2.0, 0.0}, TimeGrid(3)), ConfigError);
  CHECK_THROWS_AS(disc_gauss_log_pmf({2.0, -1.0}, TimeGrid(3)), ConfigError);
}

TEST_CASE("normalization within 1e-12 across extreme parameters") {
  for (int t_max : {2, 156, 1000}) {
    const TimeGrid grid(t_max);
    for (double mu : {-10.0 * t_max, -1.5, 1.0, t_max / 2.0, 10.0 * t_max}) {
      for (double sigma : {1e-3, 1.0, 12.0, 10.0 * t_max}) {
        const EventPmf pmf = disc_gauss_log_pmf({mu, sigma}, grid);
        double sum = 0.0;
        for (int t = 1; t <= t_max; ++t) {
          CHECK(std::isfinite(pmf.log_prob(t)));
          sum += pmf.prob(t);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("gradient wrt mu matches central differences on random parameters") {
  Rng rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const int t_max = rng.uniform_int(2, 30);
    const TimeGrid grid(t_max);
    const double mu = (2.0 * rng.u01() - 1.0) * 2.0 * t_max;
    const double sigma = 0.5 + rng.u01() * t_max;
    const Vec analytic = disc_gauss_dlogpmf_dmu({mu, sigma}, grid);
    const int t_probe = rng.uniform_int(1, t_max);
    const auto f = [&](const Vec& m) {
      return disc_gauss_log_pmf({m[0], sigma}, grid).log_prob(t_probe);
    };
    const Vec fd = central_diff(f, Vec{mu}, 1e-5);
    CHECK(rel_err_vec({analytic[static_cast<std::size_t>(t_probe - 1)]}, fd, 1e-6) < 1e-6);
  }
}

TEST_CASE("gradient facts from symmetry and normalization") {
  const TimeGrid grid(3);
  const Vec g = disc_gauss_dlogpmf_dmu({2.0, 1.0}, grid);
  CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-14));  // symmetric case: E[T] = 2
  CHECK(g[2] == doctest::Approx(1.0).epsilon(1e-12));  // (3-2)/1 - 0
  const EventPmf pmf = disc_gauss_log_pmf({2.0, 1.0}, grid);
  double weighted = 0.0;
  for (int t = 1; t <= 3; ++t) weighted += pmf.prob(t) * g[static_cast<std::size_t>(t - 1)];
  CHECK(weighted == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("cdf basics") {
  const EventPmf uniform = EventPmf::from_probs({0.25, 0.25, 0.25, 0.25});
  CHECK(pmf_to_cdf(uniform) == Vec{0.25, 0.5, 0.75, 1.0});
  const EventPmf point = EventPmf::from_probs({1.0, 0.0, 0.0});
  CHECK(pmf_to_cdf(point) == Vec{1.0, 1.0, 1.0});
}

TEST_CASE("cdf is nondecreasing and ends at 1 for random pmfs") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const EventPmf pmf = random_pmf(rng.uniform_int(2, 40), rng);
    const Vec cdf = pmf_to_cdf(pmf);
    for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i] >= cdf[i - 1]);
    CHECK(std::abs(cdf.back() - 1.0) <= 1e-12);
  }
}

TEST_CASE("mean of simple distributions") {
  CHECK(pmf_mean(EventPmf::from_probs({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(2.5));
  Vec point(10, 0.0);
  point[6] = 1.0;
  CHECK(pmf_mean(EventPmf::from_probs(point)) == doctest::Approx(7.0));
  CHECK(pmf_mean(disc_gauss_log_pmf({2.0, 1.0}, TimeGrid(3))) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("mode picks the largest entry, smallest index on ties") {
  CHECK(pmf_mode(EventPmf::from_probs({0.2, 0.5, 0.3})) == 2);
  CHECK(pmf_mode(EventPmf::from_probs({0.25, 0.25, 0.25, 0.25})) == 1);
}

TEST_CASE("sampling a point mass always returns it") {
  Vec point(8, 0.0);
  point[4] = 1.0;
  const EventPmf pmf = EventPmf::from_probs(point);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) CHECK(sample_event(pmf, rng) == 5);
}

TEST_CASE("sampling frequencies match a uniform pmf within 3 binomial sigmas") {
  const EventPmf pmf = EventPmf::from_probs({0.25, 0.25, 0.25, 0.25});
  Rng rng(99);
  const int n = 100000;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) ++counts[sample_event(pmf, rng) - 1];
  const double se = std::sqrt(n * 0.25 * 0.75);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(counts[k] - n * 0.25) < 3.0 * se);
}

TEST_CASE("sampling is deterministic per seed") {
  const EventPmf pmf = disc_gauss_log_pmf({6.0, 2.5}, TimeGrid(12));
  Rng a(31), b(31);
  for (int i = 0; i < 50; ++i) CHECK(sample_event(pmf, a) == sample_event(pmf, b));
}

TEST_CASE("argmax shifts with integer shifts of interior mu") {
  const TimeGrid grid(80);
  const double sigma = 3.0;
  const double mu = 30.3;
  const int base = pmf_mode(disc_gauss_log_pmf({mu, sigma}, grid));
  for (int k : {-5, -1, 1, 7}) {
    const int shifted = pmf_mode(disc_gauss_log_pmf({mu + k, sigma}, grid));
    CHECK(shifted == base + k);
  }
}

TEST_CASE("log pmf strictly decreases with distance from interior mu") {
  const TimeGrid grid(40);
  const EventPmf pmf = disc_gauss_log_pmf({20.5, 2.0}, grid);
  for (int step = 1; step <= 15; ++step) {
    CHECK(pmf.log_prob(20 - step + 1) > pmf.log_prob(20 - step));   // moving away below
    CHECK(pmf.log_prob(21 + step - 1) > pmf.log_prob(21 + step));  // moving away above
  }
}

TEST_CASE("event pmf validates its invariants") {
  CHECK_THROWS_AS(EventPmf::from_probs({0.5, 0.4}), ConfigError);        // sums to 0.9
  CHECK_THROWS_AS(EventPmf::from_probs({1.5, -0.5}), ConfigError);      // negative entry
  CHECK_THROWS_AS(EventPmf::from_probs({1.0}), ConfigError);            // single point grid
}
