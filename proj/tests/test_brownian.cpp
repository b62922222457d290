#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "doctest.h"
#include "polymerlab/brownian.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/rng.hpp"

using namespace polymerlab;

namespace {

// Cap of height r - a in a d-ball via the regularized incomplete beta function.
double lens_oracle(int d, double r, double delta) {
  const double a = delta / 2.0;
  if (a >= r) return 0.0;
  const double vd = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(r, d);
  const double cap = 0.5 * vd * boost::math::ibeta((d + 1) / 2.0, 0.5, 1.0 - (a / r) * (a / r));
  return 2.0 * cap;
}

}  // namespace

TEST_CASE("unit ball radius gives unit volume") {
  for (int d = 1; d <= 6; ++d) CHECK(ball_volume(d, unit_ball_radius(d)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(unit_ball_radius(1) == doctest::Approx(0.5));
  CHECK(unit_ball_radius(3) == doctest::Approx(std::cbrt(3.0 / (4.0 * M_PI))));
}

TEST_CASE("lens volume against incomplete beta") {
  for (int d = 1; d <= 6; ++d) {
    const double r = unit_ball_radius(d);
    for (double f : {0.0, 0.1, 0.5, 1.0, 1.7, 1.99, 2.0, 2.5}) {
      const double delta = f * r;
      CHECK(lens_volume(d, r, delta) == doctest::Approx(lens_oracle(d, r, delta)).epsilon(1e-10));
    }
  }
  CHECK(lens_volume(3, 0.62, 0.0) == doctest::Approx(ball_volume(3, 0.62)));
  CHECK(lens_volume(3, 0.62, -0.3) == doctest::Approx(lens_volume(3, 0.62, 0.3)));
}

TEST_CASE("Poisson environment has unit intensity") {
  const SpaceBox box = SpaceBox::centered({0.0, 0.0, 0.0}, 10.0);
  std::vector<double> counts, ball;
  const double r = unit_ball_radius(3);
  const double c[3] = {0.3, -0.2, 1.1};
  for (std::uint64_t s = 0; s < 800; ++s) {
    const PoissonEnvironment env(rng::derive_seed(5, s), 4.0, box);
    counts.push_back(static_cast<double>(env.count_points({-1.5, 0.0, 0.0}, {1.5, 2.0, 1.0}, 0.5, 2.5)));
    ball.push_back(env.count_ball(c, r, 1.0, 3.0));
  }
  const MeanSe m = mean_se(counts);
  CHECK(std::abs(m.mean - 12.0) < 4.0 * std::sqrt(12.0 / 800.0));
  // Poisson: variance equals mean.
  const double var = m.se * m.se * 800.0;
  CHECK(var == doctest::Approx(12.0).epsilon(0.15));
  const MeanSe b = mean_se(ball);
  CHECK(std::abs(b.mean - 2.0) < 4.0 * std::sqrt(2.0 / 800.0));
}

TEST_CASE("Poisson environment is a pure function of the seed and additive over regions") {
  const SpaceBox box = SpaceBox::centered({0.0, 0.0}, 8.0);
  const PoissonEnvironment a(17, 3.0, box), b(17, 3.0, box), other(18, 3.0, box);
  const std::size_t whole = a.count_points({-2.3, -1.0}, {2.9, 1.4}, 0.1, 2.7);
  CHECK(whole == b.count_points({-2.3, -1.0}, {2.9, 1.4}, 0.1, 2.7));
  const std::size_t left = a.count_points({-2.3, -1.0}, {0.4, 1.4}, 0.1, 2.7);
  const std::size_t right = a.count_points({0.4, -1.0}, {2.9, 1.4}, 0.1, 1.3) +
                            a.count_points({0.4, -1.0}, {2.9, 1.4}, 1.3, 2.7);
  CHECK(whole == left + right);
  std::size_t diff = 0;
  for (int k = 0; k < 5; ++k)
    diff += a.count_points({-4.0 + k, -4.0}, {-3.0 + k, 4.0}, 0.0, 3.0) !=
            other.count_points({-4.0 + k, -4.0}, {-3.0 + k, 4.0}, 0.0, 3.0);
  CHECK(diff > 0);
  const auto pts = a.cell_points({1, 0}, 5);
  for (const auto& p : pts) {
    CHECK(p.u > 5 * kPoissonTimeCell);
    CHECK(p.u <= 6 * kPoissonTimeCell);
    CHECK(p.z[0] >= 1.0);
    CHECK(p.z[0] < 2.0);
  }
}

TEST_CASE("tubes outside the environment are refused") {
  const PoissonEnvironment env(1, 1.0, SpaceBox::centered({0.0, 0.0, 0.0}, 2.0));
  const double inside[3] = {0.0, 0.0, 0.0};
  const double edge[3] = {1.8, 0.0, 0.0};
  CHECK_NOTHROW(env.count_ball(inside, 0.6, 0.0, 1.0));
  CHECK_THROWS_AS(env.count_ball(edge, 0.6, 0.0, 1.0), BoxOverflowError);
  CHECK_THROWS_AS(env.count_ball(inside, 0.6, 0.5, 1.5), BoxOverflowError);
}

TEST_CASE("Brownian increments and bridge marginals") {
  const std::vector<double> x{0.5, -1.0, 2.0}, y{1.5, 0.0, 1.0};
  const double t = 2.0, h = 0.05;
  std::vector<double> end, mid;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const Path p = brownian_path(x, t, h, 9, i);
    end.push_back(p.at(p.steps)[1] - x[1]);
    const Path b = bridge_sample(x, y, t, h, 11, i);
    CHECK(b.at(b.steps)[0] == y[0]);
    CHECK(b.at(0)[2] == x[2]);
    mid.push_back(b.at(b.steps / 4)[0] - (x[0] + 0.25 * (y[0] - x[0])));
  }
  const MeanSe e = mean_se(end);
  CHECK(std::abs(e.mean) < 4.0 * std::sqrt(t / 4000.0));
  CHECK(e.se * e.se * 4000.0 == doctest::Approx(t).epsilon(0.08));
  const MeanSe m = mean_se(mid);
  // Bridge variance s (t - s) / t at s = t / 4.
  CHECK(m.se * m.se * 4000.0 == doctest::Approx(0.25 * 0.75 * t).epsilon(0.08));
  CHECK(brownian_path(x, t, h, 9, 3).x == brownian_path(x, t, h, 9, 3).x);
  CHECK(step_count(1.0, 0.3) == 3);
  CHECK_THROWS(step_count(0.1, 0.2));
}

TEST_CASE("tube count is Poisson with mean t given the path") {
  const std::vector<double> x{0.0, 0.0, 0.0};
  const double t = 1.5, h = 0.05;
  const TubeGeometry g(3, h);
  const Path p = brownian_path(x, t, h, 4, 0);
  std::vector<double> c;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const PoissonEnvironment env(rng::derive_seed(3, s), t, brownian_box(x, t, g.radius));
    c.push_back(tube_count(env, p, 0.0, t, g));
  }
  const MeanSe m = mean_se(c);
  CHECK(std::abs(m.mean - t) < 4.0 * std::sqrt(t / 1000.0));
}

TEST_CASE("reversed tube reads the mirrored time slab") {
  const std::vector<double> x{0.0, 0.0};
  const TubeGeometry g(2, 0.1);
  const PoissonEnvironment env(8, 2.0, brownian_box(x, 2.0, g.radius));
  const Path p = brownian_path(x, 0.5, 0.1, 2, 0);
  int expected = 0;
  for (int k = 0; k < p.steps; ++k) expected += env.count_ball(p.at(k), g.radius, 2.0 - (k + 1) * 0.1, 2.0 - k * 0.1);
  CHECK(tube_count_reversed(env, p, 0.0, 0.5, 2.0, g) == expected);
}

TEST_CASE("partition function has unit disorder mean") {
  const std::vector<double> x{0.0, 0.0, 0.0};
  const double t = 1.0, h = 0.05, beta = 0.4;
  std::vector<double> z;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const PoissonEnvironment env(rng::derive_seed(21, s), t, brownian_box(x, t, unit_ball_radius(3)));
    z.push_back(brownian_partition_mc(env, x, t, beta, 4, h, rng::derive_seed(22, s)).mean);
  }
  const MeanSe m = mean_se(z);
  CHECK(std::abs(m.mean - 1.0) < 4.0 * m.se);
  const PoissonEnvironment env(1, t, brownian_box(x, t, unit_ball_radius(3)));
  const MeanSe flat = brownian_partition_mc(env, x, t, 0.0, 10, h, 1);
  CHECK(flat.mean == 1.0);
  CHECK(flat.se == 0.0);
}

TEST_CASE("overlap volume of a path with itself") {
  const TubeGeometry g(3, 0.1);
  const Path p = brownian_path({0.0, 0.0, 0.0}, 1.0, 0.1, 1, 0);
  CHECK(overlap_volume(p, p, 0.0, 1.0, g) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(overlap_volume(p, p, 0.2, 0.7, g) == doctest::Approx(0.5).epsilon(1e-12));
  Path q = p;
  for (int k = 0; k <= q.steps; ++k) q.at(k)[0] += 5.0;
  CHECK(overlap_volume(p, q, 0.0, 1.0, g) == 0.0);
}

TEST_CASE("continuous second moment identity") {
  const auto flat = continuous_second_moment_check(0.0, 3, 1.0, 10, 2, 10, 0.1, 1);
  CHECK(flat.lhs == 1.0);
  CHECK(flat.rhs == 1.0);
  CHECK(flat.z_score == 0.0);
  const auto r = continuous_second_moment_check(0.5, 3, 1.0, 400, 2, 2000, 0.05, 7);
  CHECK(std::abs(r.z_score) < 4.0);
  CHECK(r.rhs > 1.0);
}

TEST_CASE("bridge conditioning agrees with endpoint binning") {
  const std::vector<double> x{0.0, 0.0, 0.0}, y{0.3, 0.0, 0.0};
  const double t = 1.0;
  const PoissonEnvironment env(12, t, brownian_box(x, t, unit_ball_radius(3)));
  const auto r = bridge_binning_check(env, x, y, t, 0.6, 0.05, 0.35, 60000, 3000, 5);
  CHECK(r.n_in_bin > 200);
  CHECK(std::abs(r.z_score) < 4.0);
}

TEST_CASE("continuous residual scan") {
  CHECK(continuous_l(16.0, 0.5, 0.1) == doctest::Approx(4.0));
  CHECK(continuous_l(1e-4, 0.4, 0.1) == doctest::Approx(0.1));
  ContinuousLltConfig cfg;
  cfg.times = {1.0, 2.0};
  cfg.n_env = 4;
  cfg.n_paths = 4;
  cfg.h = 0.1;
  const auto flat = continuous_llt_residual_scan(cfg);
  CHECK(flat.rows.size() == 6);
  CHECK(flat.sup_rows.size() == 2);
  for (const auto& row : flat.rows) CHECK(row.corrected == 0.0);
  cfg.beta = 0.3;
  const auto small = continuous_llt_residual_scan(cfg);
  for (const auto& row : small.rows) CHECK(row.noise_floor >= 0.0);
  cfg.beta = 3.0;
  cfg.max_inner_cv2 = 0.5;
  CHECK_THROWS_AS(continuous_llt_residual_scan(cfg), RegionRefusal);
  cfg.force = true;
  CHECK_NOTHROW(continuous_llt_residual_scan(cfg));
  cfg.a = 0.7;
  CHECK_THROWS_AS(continuous_llt_residual_scan(cfg), ValidationError);
}

TEST_CASE("bridge moment check reports exact references") {
  const auto rows = bridge_moment_check({0.0, 1.0}, {2.0, -1.0}, 1.0, 0.01, {0.0, 0.3, 1.0}, 2000, 3);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].var == 0.0);
  CHECK(rows[0].mean_z == 0.0);
  CHECK(rows[2].mean_exact == doctest::Approx(0.6));
  CHECK(rows[3].var_exact == doctest::Approx(0.21));
  CHECK(rows[4].mean == 2.0);
  for (const auto& r : rows) {
    CHECK(std::abs(r.mean_z) < 4.0);
    CHECK(std::abs(r.var_z) < 4.0);
  }
}

TEST_CASE("lens volume against hit-or-miss integration") {
  const double r = unit_ball_radius(3);
  rng::CounterStream s(77, 0);
  const int n = 200000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    // Uniform in the box [-r, r]^3 around the first center, second center at (r, 0, 0).
    const double u = (2.0 * s.uniform() - 1.0) * r, v = (2.0 * s.uniform() - 1.0) * r, w = (2.0 * s.uniform() - 1.0) * r;
    if (u * u + v * v + w * w <= r * r && (u - r) * (u - r) + v * v + w * w <= r * r) ++hits;
  }
  const double box = 8.0 * r * r * r;
  const double p = static_cast<double>(hits) / n;
  const double est = p * box, se = std::sqrt(p * (1.0 - p) / n) * box;
  CHECK(std::abs(est - lens_volume(3, r, r)) < 3.0 * se);
}

TEST_CASE("Poisson unit cells pass mean, variance and covariance tests") {
  const PoissonEnvironment env(99, 10.0, SpaceBox::centered({0.0, 0.0, 0.0}, 6.0), 1.0 / 32.0);
  std::vector<double> a, b, ab;
  for (int i = 0; i < 1000; ++i) {
    const double x = -5.0 + i % 10, y = -5.0 + (i / 10) % 10, tt = static_cast<double>(i / 100);
    a.push_back(static_cast<double>(env.count_points({x, y, 0.0}, {x + 1.0, y + 1.0, 1.0}, tt, tt + 1.0)));
    b.push_back(static_cast<double>(env.count_points({x, y, 1.0}, {x + 1.0, y + 1.0, 2.0}, tt, tt + 1.0)));
  }
  const MeanSe ma = mean_se(a), mb = mean_se(b);
  for (std::size_t i = 0; i < a.size(); ++i) ab.push_back((a[i] - ma.mean) * (b[i] - mb.mean));
  const double var = ma.se * ma.se * 1000.0;
  CHECK(std::abs(ma.mean - 1.0) < 3.5 * std::sqrt(1.0 / 1000.0));
  // Var of a Poisson(1) sample variance is about (1 + 2) / n.
  CHECK(std::abs(var - 1.0) < 3.5 * std::sqrt(3.0 / 1000.0));
  const MeanSe c = mean_se(ab);
  CHECK(std::abs(c.mean) < 3.5 * c.se);
}

TEST_CASE("step refinement and time monotonicity") {
  const std::vector<double> x{0.0, 0.0, 0.0};
  const double t = 1.0, beta = 0.5;
  std::vector<double> coarse, fine;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const PoissonEnvironment env(rng::derive_seed(40, s), t, brownian_box(x, t, unit_ball_radius(3)));
    coarse.push_back(brownian_partition_mc(env, x, t, beta, 200, 0.02, 3).mean);
    fine.push_back(brownian_partition_mc(env, x, t, beta, 200, 0.01, 4).mean);
  }
  std::vector<double> diff;
  for (std::size_t i = 0; i < coarse.size(); ++i) diff.push_back(coarse[i] - fine[i]);
  const MeanSe d = mean_se(diff);
  CHECK(std::abs(d.mean) < 4.0 * d.se);
  // Same pair streams: the overlap grows with t.
  const auto r1 = continuous_second_moment_check(0.5, 3, 0.5, 2, 1, 400, 0.05, 2);
  const auto r2 = continuous_second_moment_check(0.5, 3, 1.0, 2, 1, 400, 0.05, 2);
  CHECK(r2.rhs > r1.rhs);
}

TEST_CASE("reversed factor has unit disorder mean") {
  const std::vector<double> y{0.4, 0.0, -0.3};
  const double anchor = 2.0, l = 0.8;
  std::vector<double> z;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const PoissonEnvironment env(rng::derive_seed(60, s), anchor, brownian_box(y, anchor, unit_ball_radius(3)));
    const TubeGeometry g(3, 0.05);
    const Path p = brownian_path(y, l, 0.05, rng::derive_seed(61, s), 0);
    z.push_back(std::exp(0.4 * tube_count_reversed(env, p, 0.0, l, anchor, g) - poisson_lambda(0.4) * l));
  }
  const MeanSe m = mean_se(z);
  CHECK(std::abs(m.mean - 1.0) < 3.5 * m.se);
}

TEST_CASE("first-order residual prediction") {
  const double r = unit_ball_radius(3);
  CHECK(expected_lens_gaussian(0.7, 0.0) == doctest::Approx(lens_volume(3, r, 0.7)));
  // Wide Gaussian: E lens ~ density at the mean times the integral of the lens, which is 1.
  const double s2 = 400.0;
  CHECK(expected_lens_gaussian(0.0, s2) == doctest::Approx(std::pow(2.0 * M_PI * s2, -1.5)).epsilon(1e-3));
  // Independent scipy evaluation of the same integral.
  CHECK(residual_l2_first_order(0.15, 2.0, continuous_l(2.0, 0.4, 0.01), 0.0) == doctest::Approx(0.000275).epsilon(0.02));
  CHECK(residual_l2_first_order(0.15, 4.0, continuous_l(4.0, 0.4, 0.01), 2.0) == doctest::Approx(0.000675).epsilon(0.02));
  CHECK(residual_l2_first_order(0.0, 4.0, 1.0, 1.0) == 0.0);
}
