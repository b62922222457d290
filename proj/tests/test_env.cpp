#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "polymerlab/env.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/stats.hpp"

using namespace polymerlab;

namespace {

// Composite Simpson on [a, b] with m (even) panels.
template <class F>
double simpson(F f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<DisorderSpec> sample_specs(double beta) {
  return {DisorderSpec::gaussian(0.0, 1.0, beta), DisorderSpec::gaussian(0.5, 2.0, beta),
          DisorderSpec::bernoulli(0.5, 1.0, -1.0, beta), DisorderSpec::bernoulli(0.3, 2.0, 0.0, beta),
          DisorderSpec::exponential(2.0, true, beta), DisorderSpec::exponential(3.0, false, beta)};
}

}  // namespace

TEST_CASE("log_mgf closed forms") {
  CHECK(log_mgf(DisorderSpec::gaussian(0, 1, 0.3), 0.3) == doctest::Approx(0.045).epsilon(1e-14));
  for (const auto& s : sample_specs(0.2)) CHECK(log_mgf(s, 0.0) == 0.0);
  const double two_point = std::log(0.5 * (std::exp(0.5) + std::exp(-0.5)));
  CHECK(log_mgf(DisorderSpec::bernoulli(0.5, 1, -1, 0.5), 0.5) == doctest::Approx(two_point).epsilon(1e-14));
  CHECK(two_point == doctest::Approx(0.120114).epsilon(1e-5));
}

TEST_CASE("log_mgf of exponential laws matches quadrature") {
  for (bool centered : {true, false}) {
    const double rate = 2.0;
    const auto s = DisorderSpec::exponential(rate, centered, 0.4);
    for (double b : {-1.0, 0.3, 0.9}) {
      const double shift = centered ? 1.0 / rate : 0.0;
      const double m = simpson([&](double x) { return rate * std::exp(-rate * x) * std::exp(b * (x - shift)); }, 0.0,
                               60.0, 200000);
      CHECK(log_mgf(s, b) == doctest::Approx(std::log(m)).epsilon(1e-9));
    }
  }
}

TEST_CASE("divergence and validation") {
  CHECK_THROWS_AS(DisorderSpec::exponential(1.0, true, 0.5), DivergenceError);
  CHECK_THROWS_AS(DisorderSpec::exponential(1.0, true, 0.7), DivergenceError);
  CHECK_NOTHROW(DisorderSpec::exponential(1.0, true, 0.49));
  const auto s = DisorderSpec::exponential(1.0, true, 0.2);
  CHECK_THROWS_AS(log_mgf(s, 1.0), DivergenceError);
  CHECK_THROWS(DisorderSpec::gaussian(0.0, 0.0, 0.1));
  CHECK_THROWS(DisorderSpec::bernoulli(0.0, 1.0, -1.0, 0.1));
  CHECK_THROWS(DisorderSpec::bernoulli(0.5, 1.0, 1.0, 0.1));
}

TEST_CASE("lambda2 values and sign") {
  CHECK(lambda2(DisorderSpec::gaussian(0, 1, 0.3)) == doctest::Approx(0.09).epsilon(1e-13));
  const double expected = std::log(0.5 * (std::exp(1.0) + std::exp(-1.0))) -
                          2.0 * std::log(0.5 * (std::exp(0.5) + std::exp(-0.5)));
  CHECK(lambda2(DisorderSpec::bernoulli(0.5, 1, -1, 0.5)) == doctest::Approx(expected).epsilon(1e-13));
  for (const auto& s : sample_specs(0.0)) CHECK(lambda2(s) == 0.0);
  for (double beta : {-0.4, 0.05, 0.3, 0.45})
    for (const auto& s : sample_specs(0.0)) CHECK(lambda2(s.with_beta(beta)) > 0.0);
}

TEST_CASE("log_mgf is convex") {
  for (const auto& s : sample_specs(0.0)) {
    const double h = 1e-3;
    for (double b = -0.8; b <= 0.8; b += 0.1) {
      const double second = log_mgf(s, b + h) - 2 * log_mgf(s, b) + log_mgf(s, b - h);
      CHECK(second >= -1e-12);
    }
  }
}

TEST_CASE("inverse normal cdf round trip") {
  for (double p : {1e-12, 1e-6, 0.001, 0.02, 0.1, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
    const double x = rng::inverse_normal_cdf(p);
    CHECK(std::abs(normal_cdf(x) - p) <= 1e-9 * std::max(p, 1e-3));
  }
}

TEST_CASE("single Boltzmann factor is normalized") {
  for (double beta : {0.1, 0.3, 0.45}) {
    // Gaussian: quadrature against the density.
    const auto g = DisorderSpec::gaussian(0.5, 2.0, beta);
    const double sd = std::sqrt(2.0);
    const double ig = simpson(
        [&](double x) {
          const double z = (x - 0.5) / sd;
          return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * M_PI)) * std::exp(beta * x - g.lambda());
        },
        0.5 - 40 * sd, 0.5 + 40 * sd, 400000);
    CHECK(ig == doctest::Approx(1.0).epsilon(1e-10));
    // Bernoulli: exact two-term sum.
    const auto b = DisorderSpec::bernoulli(0.3, 2.0, 0.0, beta);
    CHECK(0.3 * std::exp(2.0 * beta - b.lambda()) + 0.7 * std::exp(-b.lambda()) == doctest::Approx(1.0).epsilon(1e-14));
    // Exponential: quadrature.
    const auto e = DisorderSpec::exponential(2.0, true, beta);
    const double ie = simpson([&](double x) { return 2.0 * std::exp(-2.0 * x) * std::exp(beta * (x - 0.5) - e.lambda()); },
                              0.0, 80.0, 400000);
    CHECK(ie == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("quantile matches the law") {
  const auto b = DisorderSpec::bernoulli(0.3, 2.0, -1.0, 0.1);
  CHECK(b.quantile(0.1) == 2.0);
  CHECK(b.quantile(0.5) == -1.0);
  const auto e = DisorderSpec::exponential(2.0, true, 0.1);
  CHECK(e.quantile(1.0 - std::exp(-1.0)) == doctest::Approx(0.5 - 0.5).epsilon(1e-12));
  const auto g = DisorderSpec::gaussian(1.0, 4.0, 0.1);
  CHECK(g.quantile(normal_cdf(0.7)) == doctest::Approx(1.0 + 2.0 * 0.7).epsilon(1e-9));
}

TEST_CASE("l2 region check") {
  const auto r0 = l2_region_check(DisorderSpec::gaussian(0, 1, 0.0), 3);
  CHECK(r0.in_region);
  CHECK(r0.margin == doctest::Approx(std::log(1.0 / 0.340537)).epsilon(1e-4));
  CHECK(r0.margin == doctest::Approx(1.0772).epsilon(1e-3));
  const auto r1 = l2_region_check(DisorderSpec::gaussian(0, 1, 0.2), 3);
  CHECK(r1.margin == doctest::Approx(r0.margin - 0.04).epsilon(1e-12));
  const auto r2 = l2_region_check(DisorderSpec::gaussian(0, 1, 2.0), 3);
  CHECK_FALSE(r2.in_region);
  CHECK_THROWS_AS(l2_region_check(DisorderSpec::gaussian(0, 1, 0.2), 2), DimensionError);
}

TEST_CASE("environment field determinism and window") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.3);
  const Box box = Box::centered(origin(3), 20);
  const EnvironmentField f1(spec, 12345, box, 50);
  const EnvironmentField f2(spec, 12345, box, 50);
  const EnvironmentField f3(spec, 12346, box, 50);
  rng::CounterStream pick(7, 0);
  int differ = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 1 + pick.below(50);
    const Site x{pick.below(41) - 20, pick.below(41) - 20, pick.below(41) - 20};
    const double a = f1.eta(n, x);
    const double b = f2.eta(n, x);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    if (f3.eta(n, x) != a) ++differ;
  }
  CHECK(differ == 10000);
  CHECK_THROWS_AS(f1.eta(0, origin(3)), OutOfWindowError);
  CHECK_THROWS_AS(f1.eta(51, origin(3)), OutOfWindowError);
  CHECK_THROWS_AS(f1.eta(1, Site{21, 0, 0}), OutOfWindowError);
  // Row sampler agrees with pointwise access.
  const auto row = f1.row(5, std::array<int, kMaxDim>{3, -4});
  for (int z = -20; z <= 20; ++z) CHECK(row.eta(z) == f1.eta(5, Site{3, -4, z}));
}

TEST_CASE("environment field first moments") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.3);
  const EnvironmentField f(spec, 99, Box::centered(origin(3), 49), 8);
  std::vector<double> eta;
  std::vector<double> w;
  eta.reserve(1000000);
  for (int n = 1; n <= 8; ++n)
    for (int a = -49; a <= 49 && eta.size() < 1000000; ++a)
      for (int b = -49; b <= 49 && eta.size() < 1000000; ++b)
        for (int c = -49; c <= 49 && eta.size() < 1000000; ++c) {
          const Site x{a, b, c};
          eta.push_back(f.eta(n, x));
          w.push_back(f.boltzmann(n, x));
        }
  REQUIRE(eta.size() == 1000000);
  const auto me = mean_se(eta);
  CHECK(std::abs(me.mean) <= 3e-3);
  const auto mw = mean_se(w);
  CHECK(std::abs(mw.mean - 1.0) <= 3.0 * mw.se);
}
