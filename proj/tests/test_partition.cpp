#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/partition.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/stats.hpp"

using namespace polymerlab;

namespace {

EnvironmentField make_field(const DisorderSpec& spec, std::uint64_t seed, int half_width, int time_max) {
  return EnvironmentField(spec, seed, Box::centered(origin(3), half_width), time_max);
}

}  // namespace

TEST_CASE("beta = 0 reduces to the walk kernel") {
  const auto f = make_field(DisorderSpec::gaussian(0, 1, 0.0), 1, 12, 12);
  const KernelTable t(3, 10);
  const auto w = forward_partition(f, Site{1, -1, 0}, 10);
  CHECK(w.total() == doctest::Approx(1.0).epsilon(1e-13));
  for (const Site& y : {Site{1, -1, 0}, Site{3, 1, 2}, Site{-5, 0, 3}, Site{1, -1, 10}, Site{2, -1, 0}})
    CHECK(w.weight(y) == t(10, y - Site{1, -1, 0}));
  CHECK(reversed_partition(f, origin(3), 5, 9).total() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(conditional_density(f, origin(3), Site{2, 2, 0}, 8) == doctest::Approx(1.0).epsilon(1e-13));
  const auto law = endpoint_law(f, origin(3), 7);
  CHECK(law.weight(Site{1, 2, 0}) == doctest::Approx(t(7, Site{1, 2, 0})).epsilon(1e-13));
}

TEST_CASE("one step expansion") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.4);
  const auto f = make_field(spec, 5, 4, 4);
  const auto w = forward_partition(f, origin(3), 1);
  for (int k = 0; k < 3; ++k)
    for (int s : {1, -1}) {
      const Site e = unit_vector(3, k, s);
      CHECK(w.weight(e) == doctest::Approx(std::exp(0.4 * f.eta(1, e) - spec.lambda()) / 6.0).epsilon(1e-15));
    }
  CHECK(w.weight(origin(3)) == 0.0);
}

TEST_CASE("brute-force path enumeration, n <= 5") {
  const auto spec = DisorderSpec::bernoulli(0.4, 1.0, -0.5, 0.7);
  const auto f = make_field(spec, 2024, 8, 12);
  const KernelTable t(3, 5);
  for (int n = 1; n <= 5; ++n) {
    const Site x0{1, 0, -1};
    const auto ref = oracle::forward_weights(f, x0, n);
    const auto w = forward_partition(f, x0, n);
    double ref_total = 0.0;
    for (const auto& [y, v] : ref) {
      ref_total += v;
      CHECK(w.weight(y) == doctest::Approx(v).epsilon(1e-12));
      CHECK(conditional_density(f, t, x0, y, n) == doctest::Approx(v / t(n, y - x0)).epsilon(1e-12));
    }
    CHECK(w.total() == doctest::Approx(ref_total).epsilon(1e-12));
    CHECK(i_n_statistic(f, x0, n) > 0.0);
    for (int l = 1; l <= n; ++l)
      CHECK(reversed_partition(f, Site{0, 1, 1}, l, 7).total() ==
            doctest::Approx(oracle::reversed_total(f, Site{0, 1, 1}, l, 7)).epsilon(1e-12));
  }
  // Start time shifts the environment read.
  const auto shifted = oracle::forward_weights(f, origin(3), 3, 4);
  const auto w = forward_partition(f, origin(3), 3, 4);
  for (const auto& [y, v] : shifted) CHECK(w.weight(y) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("conditional density equals the bridge average") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.5);
  const auto f = make_field(spec, 77, 6, 6);
  const Site x{0, 0, 0};
  for (const Site& y : {Site{0, 0, 0}, Site{2, 0, 0}, Site{1, -1, 0}, Site{1, 1, 2}}) {
    double sum = 0.0;
    int count = 0;
    oracle::enumerate_paths(3, x, 4, [&](const std::vector<Site>& p) {
      if (p.back() != y) return;
      double h = 0.0;
      for (int j = 1; j <= 4; ++j) h += f.eta(j, p[static_cast<std::size_t>(j)]);
      sum += std::exp(0.5 * h - 4 * spec.lambda());
      ++count;
    });
    CHECK(conditional_density(f, x, y, 4) == doctest::Approx(sum / count).epsilon(1e-12));
  }
  CHECK_THROWS_AS(conditional_density(f, x, Site{1, 0, 0}, 4), ParityError);
  CHECK_THROWS_AS(conditional_density(f, x, Site{5, 0, 0}, 4), ParityError);
}

TEST_CASE("reversed partition symmetry identity") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.6);
  const auto f = make_field(spec, 31, 14, 8);
  const int n = 8;
  const int l = 3;
  for (const Site& y : {Site{0, 0, 0}, Site{1, 2, -1}, Site{-2, 0, 3}}) {
    // Forward walks from z started at time n - l collect factors at times n-l+1 .. n.
    double lhs = 0.0;
    for (int a = -l; a <= l; ++a)
      for (int b = -l; b <= l; ++b)
        for (int c = -l; c <= l; ++c) {
          const Site off{a, b, c};
          if (l1_norm(off) > l || !same_parity(l, off)) continue;
          const Site z = y + off;
          lhs += forward_partition(f, z, l, n - l).weight(y);
        }
    const double rhs = reversed_partition(f, y, l, n).total();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("reversed totals for all endpoints") {
  const auto spec = DisorderSpec::exponential(2.0, true, 0.5);
  const auto f = make_field(spec, 8, 12, 20);
  const Site c{1, 0, -1};
  for (int parity : {-1, 0, 1}) {
    const auto h = reversed_totals(f, c, 4, 5, 17, parity);
    for (int a = -4; a <= 4; ++a)
      for (int b = -4; b <= 4; ++b)
        for (int e = -4; e <= 4; ++e) {
          const Site off{a, b, e};
          if (l1_norm(off) > 4) continue;
          if (parity >= 0 && !same_parity(parity, off)) continue;
          const Site y = c + off;
          CHECK(h.at(y) == doctest::Approx(reversed_partition(f, y, 5, 17).total()).epsilon(1e-12));
        }
  }
}

TEST_CASE("Markov factorization") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.5);
  const auto f = make_field(spec, 404, 10, 10);
  const auto full = forward_partition(f, origin(3), 8);
  const auto first = forward_partition(f, origin(3), 4);
  CubeGrid composed(3, origin(3), 8);
  first.grid().for_each(first.support(), [&](const Site& z, double wz) {
    const auto cont = forward_partition(f, z, 4, 4);
    cont.grid().for_each(cont.support(), [&](const Site& y, double wy) { composed[composed.index(y)] += wz * wy; });
  });
  full.grid().for_each(full.support(), [&](const Site& y, double w) {
    CHECK(composed.at(y) == doctest::Approx(w).epsilon(1e-12));
  });
}

TEST_CASE("forward sweep snapshots match one-shot partitions") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.3);
  const auto f = make_field(spec, 9, 14, 14);
  ForwardSweep sweep(f, origin(3), 12);
  for (int n : {3, 7, 12}) {
    sweep.advance_to(n);
    const auto one = forward_partition(f, origin(3), n);
    CHECK(sweep.total() == one.total());
    const auto snap = sweep.snapshot();
    CHECK(snap.weight(Site{1, 0, 0}) == one.weight(Site{1, 0, 0}));
    CHECK(snap.total() == one.total());
  }
  CHECK_THROWS(sweep.advance());
  CHECK_THROWS_AS(ForwardSweep(f, origin(3), 15), WindowTooSmallError);
  CHECK_THROWS_AS(forward_partition(f, Site{5, 0, 0}, 10), WindowTooSmallError);
}

TEST_CASE("endpoint law and I_n") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.5);
  const auto f = make_field(spec, 3, 20, 20);
  const auto law = endpoint_law(f, origin(3), 15);
  CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-12));
  bool nonneg = true;
  law.grid().for_each(law.support(), [&](const Site&, double v) { nonneg = nonneg && v >= 0.0; });
  CHECK(nonneg);
  // beta = 0: I_n = q^(2n)(0).
  const auto f0 = make_field(DisorderSpec::gaussian(0, 1, 0.0), 3, 20, 20);
  const KernelTable t(3, 40);
  for (int n : {1, 5, 10, 20}) CHECK(i_n_statistic(f0, origin(3), n) == doctest::Approx(t(2 * n, origin(3))).epsilon(1e-12));
  CHECK(i_n_statistic(f0, origin(3), 20) * std::pow(20.0, 1.5) ==
        doctest::Approx(2.0 * std::pow(3.0 / (4.0 * M_PI), 1.5)).epsilon(0.05));
}

TEST_CASE("partition field csv export") {
  const auto f = make_field(DisorderSpec::gaussian(0, 1, 0.2), 3, 4, 4);
  std::ostringstream os;
  forward_partition(f, origin(3), 2).write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("x1,x2,x3,weight\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 19);
}

TEST_CASE("disorder mean normalization") {
  const std::vector<DisorderSpec> kinds{DisorderSpec::gaussian(0, 1, 0.0), DisorderSpec::bernoulli(0.5, 1, -1, 0.0),
                                        DisorderSpec::exponential(2.0, true, 0.0)};
  const int seeds = 10000;
  for (const auto& kind : kinds)
    for (double beta : {0.1, 0.3}) {
      const auto spec = kind.with_beta(beta);
      std::vector<double> z4(seeds), z8(seeds), z16(seeds);
      for (int i = 0; i < seeds; ++i) {
        const auto f = make_field(spec, rng::derive_seed(42, static_cast<std::uint64_t>(i)), 16, 16);
        ForwardSweep s(f, origin(3), 16);
        s.advance_to(4);
        z4[static_cast<std::size_t>(i)] = s.total();
        s.advance_to(8);
        z8[static_cast<std::size_t>(i)] = s.total();
        s.advance_to(16);
        z16[static_cast<std::size_t>(i)] = s.total();
      }
      for (const auto* v : {&z4, &z8, &z16}) {
        const auto m = mean_se(*v);
        CAPTURE(spec.kind_name());
        CAPTURE(beta);
        CHECK(std::abs(m.mean - 1.0) <= 3.0 * m.se);
      }
    }
}

TEST_CASE("disorder means of conditional density and full reversed partition") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.3);
  const KernelTable t(3, 6);
  std::vector<double> cd, rev;
  for (int i = 0; i < 10000; ++i) {
    const auto f = make_field(spec, rng::derive_seed(7, static_cast<std::uint64_t>(i)), 8, 6);
    cd.push_back(conditional_density(f, t, origin(3), Site{2, 0, 0}, 6));
    rev.push_back(reversed_partition(f, origin(3), 6, 6).total());
  }
  const auto a = mean_se(cd);
  const auto b = mean_se(rev);
  CHECK(std::abs(a.mean - 1.0) <= 3.0 * a.se);
  CHECK(std::abs(b.mean - 1.0) <= 3.0 * b.se);
}

TEST_CASE("endpoint second moment is diffusive in the L2 region") {
  const auto spec = DisorderSpec::gaussian(0, 1, 0.2);
  std::vector<double> m2;
  for (int i = 0; i < 40; ++i) {
    const auto f = make_field(spec, rng::derive_seed(11, static_cast<std::uint64_t>(i)), 40, 40);
    const auto law = endpoint_law(f, origin(3), 40);
    double s = 0.0;
    law.grid().for_each(law.support(), [&](const Site& y, double p) { s += p * static_cast<double>(l2_squared(y)); });
    m2.push_back(s / 40.0);
  }
  CHECK(mean_se(m2).mean == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("I_n scan without disorder is the meeting probability of two walks") {
  const auto rows = i_n_scan(DisorderSpec::gaussian(0.0, 1.0, 0.0), 3, {6, 4}, 3, 1);
  REQUIRE(rows.size() == 2);
  const KernelTable k(3, 12);
  CHECK(rows[0].n == 4);
  CHECK(rows[0].mean == doctest::Approx(k(8, origin(3))).epsilon(1e-12));
  CHECK(rows[1].mean == doctest::Approx(k(12, origin(3))).epsilon(1e-12));
  CHECK(rows[1].scaled == doctest::Approx(rows[1].mean * std::pow(6.0, 1.5)));
  CHECK(rows[1].se == doctest::Approx(0.0).epsilon(1e-12));
}
