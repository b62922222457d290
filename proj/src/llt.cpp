#include "polymerlab/llt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "polymerlab/errors.hpp"
#include "polymerlab/overlap.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/partition.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/stats.hpp"
#include "polymerlab/walk.hpp"

namespace polymerlab {

int l_of(int n, double a) { return static_cast<int>(std::floor(std::pow(static_cast<double>(n), a) + 1e-9)); }

void validate(const LltScanConfig& cfg, bool needs_proxy) {
  if (cfg.d < 3 || cfg.d > kMaxDim) throw ValidationError("llt scans need 3 <= d <= 8");
  if (cfg.times.empty()) throw ValidationError("llt scan needs at least one time");
  if (!(cfg.a > 0.0 && cfg.a < 0.5)) throw ValidationError("exponent a must lie in (0, 1/2)");
  if (!(cfg.window_a > 0.0)) throw ValidationError("window constant A must be positive");
  if (cfg.n_seeds < 2) throw ValidationError("llt scan needs at least two seeds");
  if (cfg.grid_stride < 1) throw ValidationError("grid_stride must be >= 1");
  if (!cfg.x.empty() && static_cast<int>(cfg.x.size()) != cfg.d) throw ValidationError("start point dimension mismatch");
  for (int n : cfg.times) {
    const int l = n >= 1 ? l_of(n, cfg.a) : 0;
    if (n < 1 || l < 1) throw ValidationError("time " + std::to_string(n) + " gives l_n < 1");
    if (2 * l >= n) throw ValidationError("time " + std::to_string(n) + " violates l_n < n/2");
  }
  if (needs_proxy && cfg.zinf_proxy_time < *std::max_element(cfg.times.begin(), cfg.times.end()))
    throw ValidationError("zinf_proxy_time must be >= max(times)");
  const RegionCheck gate = l2_region_check(cfg.spec, cfg.d);
  if (!gate.in_region && !cfg.force)
    throw RegionRefusal("lambda2(beta) >= ln(1/pi_d): outside the L2 region (margin " + std::to_string(gate.margin) +
                        ")");
}

std::vector<Site> window_grid(int d, int n, double window_a, int stride) {
  const double r2 = window_a * window_a * n;
  const int r = static_cast<int>(std::floor(std::sqrt(r2) + 1e-12));
  std::vector<Site> out;
  CubeGrid g(d, origin(d), std::max(1, std::min(n, d * r)));
  g.for_each(diamond_rows(d, std::min(n, d * r), n & 1), [&](const Site& y, double) {
    if (static_cast<double>(l2_squared(y)) > r2 + 1e-9) return;
    if (stride > 1) {
      int nonzero = 0;
      std::uint64_t h = rng::mix64(0x51a1u);
      for (int v : y) {
        nonzero += v != 0;
        h = rng::combine(h, static_cast<std::int64_t>(v));
      }
      if (nonzero > 1 && h % static_cast<std::uint64_t>(stride) != 0) return;
    }
    out.push_back(y);
  });
  return out;
}

double sinai_residual(const EnvironmentField& field, const Site& x, const Site& y, int n, int l) {
  if (l < 1 || 2 * l >= n) throw std::invalid_argument("sinai_residual needs 1 <= l < n/2");
  const double cond = conditional_density(field, x, y, n);
  const double z = forward_partition(field, x, l).total();
  const double r = reversed_partition(field, y, l, n).total();
  return cond - z * r;
}

std::vector<double> residual_l2_exact(int d, int n, int l, double lambda2, const std::vector<Site>& y_offsets) {
  if (l < 1 || 2 * l >= n) throw std::invalid_argument("residual_l2_exact needs 1 <= l < n/2");
  const KernelTable kernel(d, n);
  const ConditionedPairTable pinned(d, n, lambda2);
  const double e = std::exp(lambda2);

  // Bridge position after l steps from x, weighted by a free replica's meetings.
  PairChainState fwd(d, lambda2);
  for (int j = 0; j < l; ++j) fwd.advance();
  std::vector<double> f(fwd.sites().size(), 0.0);
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = 0; b < f.size(); ++b) f[a] += fwd.mass(a, b);

  // Reversed side: meetings at reversed steps 0..l-1, then one more free step.
  PairChainState rev(d, lambda2);
  for (int j = 0; j + 1 < l; ++j) rev.advance();
  std::vector<double> g0(rev.sites().size(), 0.0);
  for (std::size_t a = 0; a < g0.size(); ++a)
    for (std::size_t b = 0; b < g0.size(); ++b) g0[a] += rev.mass(a, b);
  CubeGrid g(d, origin(d), l);
  for (std::size_t a = 0; a < g0.size(); ++a)
    for (int k = 0; k < 2 * d; ++k) {
      const Site z = rev.sites()[a] + unit_vector(d, k / 2, k % 2 ? -1 : 1);
      g[g.index(z)] += e * g0[a] / (2.0 * d);
    }
  std::vector<Site> g_sites;
  std::vector<double> g_vals;
  g.for_each(diamond_rows(d, l, l & 1), [&](const Site& z, double v) {
    g_sites.push_back(z);
    g_vals.push_back(v);
  });

  const double b2 = fwd.total() * e * rev.total();
  std::vector<double> out;
  for (const Site& y : y_offsets) {
    const double qn = kernel(n, y);
    if (!(qn > 0.0)) throw ParityError("endpoint not reachable: q^(n)(y - x) = 0");
    std::vector<double> terms;
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = 0; b < g_sites.size(); ++b)
        terms.push_back(f[a] * g_vals[b] * kernel(n - 2 * l, y + g_sites[b] - fwd.sites()[a]));
    const double ab = pairwise_sum(terms) / qn;
    out.push_back(pinned(n, y) - 2.0 * ab + b2);
  }
  return out;
}

namespace {

void fill_result(LltScanResult& res, const std::vector<int>& times, const std::vector<int>& ls,
                 const std::vector<std::vector<Site>>& grids, const std::vector<std::vector<double>>& values,
                 std::size_t n_seeds) {
  std::size_t cell = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    ResidualSupRow sup;
    sup.n = times[k];
    sup.l = ls[k];
    sup.sup = -1.0;
    for (const Site& y : grids[k]) {
      const MeanSe m = mean_se(values[cell++]);
      ResidualCell c{times[k], ls[k], y, m.mean, m.se, n_seeds};
      if (c.q_hat > sup.sup) {
        sup.sup = c.q_hat;
        sup.se = c.se;
        sup.argsup = y;
      }
      ++sup.n_sites;
      res.cells.push_back(std::move(c));
    }
    res.sup_rows.push_back(sup);
  }
}

}  // namespace

CombinedLltScan llt_scan(const LltScanConfig& cfg, bool with_proxy) {
  validate(cfg, with_proxy);
  const int d = cfg.d;
  const Site x = cfg.x.empty() ? origin(d) : cfg.x;
  std::vector<int> times = cfg.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<int> ls, radii;
  std::vector<std::vector<Site>> grids;
  std::size_t n_cells = 0;
  for (int n : times) {
    ls.push_back(l_of(n, cfg.a));
    radii.push_back(std::min(n, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d) * cfg.window_a *
                                                                      cfg.window_a * n) + 1e-12))));
    grids.push_back(window_grid(d, n, cfg.window_a, cfg.grid_stride));
    n_cells += grids.back().size();
  }
  const int n_max = times.back();
  const int horizon = with_proxy ? std::max(cfg.zinf_proxy_time, n_max) : n_max;
  int half_width = horizon;
  for (std::size_t k = 0; k < times.size(); ++k) half_width = std::max(half_width, radii[k] + times[k] - 1);
  const Box box = Box::centered(x, half_width);

  const KernelTable kernel(d, n_max);
  std::vector<double> q;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (const Site& y : grids[k]) q.push_back(kernel(times[k], y));

  std::vector<std::vector<double>> d2(n_cells, std::vector<double>(cfg.n_seeds, 0.0));
  std::vector<std::vector<double>> dbar(with_proxy ? n_cells : 0, std::vector<double>(cfg.n_seeds, 0.0));

  // At beta = 0 every factor is 1 and both residuals vanish identically.
  if (cfg.spec.beta() != 0.0) {
    parallel_for(cfg.n_seeds, [&](std::size_t s) {
      const EnvironmentField field(cfg.spec, rng::derive_seed(cfg.master_seed, s), box, horizon);
      ForwardSweep sweep(field, x, horizon);
      std::vector<double> z_l(times.size());
      std::vector<std::vector<double>> w(times.size());
      double z_n = 0.0;
      for (int t = 1; t <= horizon; ++t) {
        sweep.advance();
        for (std::size_t k = 0; k < times.size(); ++k) {
          if (ls[k] == t) z_l[k] = sweep.total();
          if (times[k] == t)
            for (const Site& y : grids[k]) w[k].push_back(sweep.weight(x + y));
        }
        if (t == cfg.zinf_proxy_time) z_n = sweep.total();
      }
      std::size_t cell = 0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        const int n = times[k];
        const int parity = n & 1;
        const CubeGrid rl = reversed_totals(field, x, radii[k], ls[k], n, parity);
        CubeGrid rn;
        if (with_proxy) rn = reversed_totals(field, x, radii[k], n, n, parity);
        for (std::size_t i = 0; i < grids[k].size(); ++i, ++cell) {
          const Site y = x + grids[k][i];
          const double cond = w[k][i] / q[cell];
          const double delta = cond - z_l[k] * rl.at(y);
          d2[cell][s] = delta * delta;
          if (with_proxy) dbar[cell][s] = std::abs(cond - z_n * rn.at(y));
        }
      }
    });
  }

  CombinedLltScan out;
  fill_result(out.l2, times, ls, grids, d2, cfg.n_seeds);
  if (with_proxy) fill_result(out.zinf, times, ls, grids, dbar, cfg.n_seeds);
  return out;
}

LltScanResult residual_l2_scan(const LltScanConfig& cfg) { return llt_scan(cfg, false).l2; }

LltScanResult zinf_residual_l1_scan(const LltScanConfig& cfg) { return llt_scan(cfg, true).zinf; }

void write_residual_csv(std::ostream& os, const LltScanResult& result) {
  os << "n,l,y_offset,q_hat,se,n_seeds\n";
  os.precision(17);
  for (const auto& c : result.cells)
    os << c.n << ',' << c.l << ',' << format_site(c.y_offset) << ',' << c.q_hat << ',' << c.se << ',' << c.n_seeds
       << '\n';
}

ProxyCheck zinf_proxy_check(const DisorderSpec& spec, int d, int n, std::size_t n_seeds, std::uint64_t master_seed) {
  if (n < 1 || n_seeds < 2) throw std::invalid_argument("proxy check needs n >= 1 and two seeds");
  std::vector<double> diff2(n_seeds), z2(n_seeds);
  const Box box = Box::centered(origin(d), 2 * n);
  // Seeds run one after another; each sweep parallelizes over lattice rows.
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const EnvironmentField field(spec, rng::derive_seed(master_seed, s), box, 2 * n);
    ForwardSweep sweep(field, origin(d), 2 * n);
    sweep.advance_to(n);
    const double zn = sweep.total();
    sweep.advance_to(2 * n);
    const double z2n = sweep.total();
    diff2[s] = (zn - z2n) * (zn - z2n);
    z2[s] = zn * zn;
  }
  ProxyCheck r;
  r.n = n;
  r.n_seeds = n_seeds;
  const MeanSe a = mean_se(diff2);
  const MeanSe b = mean_se(z2);
  r.diff2 = a.mean;
  r.diff2_se = a.se;
  r.z2 = b.mean;
  r.z2_se = b.se;
  r.ratio = a.mean / b.mean;
  const auto seq = pair_expectation_sequence(d, 2 * n, spec.lambda2());
  r.exact_ratio = (seq[static_cast<std::size_t>(2 * n)] - seq[static_cast<std::size_t>(n)]) /
                  seq[static_cast<std::size_t>(n)];
  return r;
}

TailCheck reversed_tail_equivalence_check(const DisorderSpec& spec, int d, int n, int l, std::size_t n_seeds,
                                          std::uint64_t master_seed) {
  if (l < 1 || l > n) throw std::invalid_argument("reversed tail check needs 1 <= l <= n");
  if (n_seeds < 2) throw std::invalid_argument("reversed tail check needs two seeds");
  std::vector<double> v(n_seeds);
  const Site y = origin(d);
  const Box box = Box::centered(y, n);
  parallel_for(n_seeds, [&](std::size_t s) {
    const EnvironmentField field(spec, rng::derive_seed(master_seed, s), box, n);
    const double rl = reversed_partition(field, y, l, n).total();
    const double rn = l == n ? rl : reversed_partition(field, y, n, n).total();
    v[s] = (rl - rn) * (rl - rn);
  });
  TailCheck r;
  r.n_seeds = n_seeds;
  const MeanSe m = mean_se(v);
  r.mc_mean = m.mean;
  r.mc_se = m.se;
  if (l == n || spec.beta() == 0.0) {
    r.exact = 0.0;
    r.z_score = 0.0;
    return r;
  }
  const double l2 = spec.lambda2();
  r.exact = std::exp(l2) * (pair_expectation(d, n - 1, l2) - pair_expectation(d, l - 1, l2));
  r.z_score = z_score(r.mc_mean, r.mc_se, r.exact, 0.0);
  return r;
}

}  // namespace polymerlab
