#include "polymerlab/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "polymerlab/errors.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/partition.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/walk.hpp"

namespace polymerlab {

namespace {

// Difference walk D_j = w_j - w~_j: one step of the pair is two simple-walk steps
// of D. After step j the mass at D = 0 is multiplied by factor(j); visit(j, grid, rows)
// then sees the law at time j.
template <class Factor, class Visit>
void difference_chain(int d, int n, Factor&& factor, Visit&& visit) {
  if (d < 1 || d > kMaxDim) throw DimensionError("dimension out of range");
  CubeGrid cur(d, origin(d), std::max(2 * n, 1));
  CubeGrid next(d, origin(d), std::max(2 * n, 1));
  cur[cur.center_index()] = factor(0);
  visit(0, cur, diamond_rows(d, 0, 0));
  for (int j = 1; j <= n; ++j) {
    transfer_step(cur, next, diamond_rows(d, 2 * j - 1, 1), unit_row_factor());
    const auto rows = diamond_rows(d, 2 * j, 0);
    transfer_step(next, cur, rows, unit_row_factor());
    cur[cur.center_index()] *= factor(j);
    visit(j, cur, rows);
  }
}

}  // namespace

double pair_expectation(int d, int n, double lambda2, int k) {
  if (n < 0) throw std::invalid_argument("pair_expectation needs n >= 0");
  const double e = std::exp(lambda2);
  double total = 1.0;
  difference_chain(
      d, n, [&](int j) { return j >= k ? e : 1.0; },
      [&](int j, const CubeGrid& g, const std::vector<DiamondRow>& rows) {
        if (j == n) total = g.sum_rows(rows);
      });
  return total;
}

std::vector<double> pair_expectation_sequence(int d, int n_max, double lambda2) {
  const double e = std::exp(lambda2);
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  difference_chain(
      d, n_max, [&](int j) { return j >= 1 ? e : 1.0; },
      [&](int j, const CubeGrid& g, const std::vector<DiamondRow>& rows) {
        out[static_cast<std::size_t>(j)] = g.sum_rows(rows);
      });
  return out;
}

double no_meeting_probability(int d, int n, int k) {
  double total = 1.0;
  difference_chain(
      d, n, [&](int j) { return j >= k ? 0.0 : 1.0; },
      [&](int j, const CubeGrid& g, const std::vector<DiamondRow>& rows) {
        if (j == n) total = g.sum_rows(rows);
      });
  return total;
}

std::vector<double> meeting_count_law(int d, int n, int k) {
  if (n < 0 || k < 1) throw std::invalid_argument("meeting_count_law needs n >= 0 and k >= 1");
  const int r = std::max(2 * n, 1);
  std::vector<CubeGrid> cur(static_cast<std::size_t>(n) + 2, CubeGrid(d, origin(d), r));
  CubeGrid scratch(d, origin(d), r);
  cur[0][cur[0].center_index()] = 1.0;
  for (int j = 1; j <= n; ++j) {
    const auto odd = diamond_rows(d, 2 * j - 1, 1);
    const auto even = diamond_rows(d, 2 * j, 0);
    for (int c = 0; c <= j; ++c) {
      auto& layer = cur[static_cast<std::size_t>(c)];
      transfer_step(layer, scratch, odd, unit_row_factor());
      transfer_step(scratch, layer, even, unit_row_factor());
    }
    if (j >= k) {
      const auto o = cur[0].center_index();
      for (int c = j; c >= 0; --c) {
        cur[static_cast<std::size_t>(c) + 1][o] = cur[static_cast<std::size_t>(c)][o];
        cur[static_cast<std::size_t>(c)][o] = 0.0;
      }
    }
  }
  const auto rows = diamond_rows(d, 2 * n, 0);
  std::vector<double> law(static_cast<std::size_t>(n) + 1);
  for (int c = 0; c <= n; ++c) law[static_cast<std::size_t>(c)] = cur[static_cast<std::size_t>(c)].sum_rows(rows);
  return law;
}

// ---------------------------------------------------------------- pair chain

namespace {

std::vector<Site> diamond_sites(int d, int radius, int parity) {
  std::vector<Site> out;
  CubeGrid g(d, origin(d), std::max(radius, 1));
  g.for_each(diamond_rows(d, radius, parity), [&](const Site& s, double) { out.push_back(s); });
  return out;
}

}  // namespace

PairChainState::PairChainState(int d, double lambda2, int range_start, bool track_counts, std::size_t max_cells)
    : d_(d), lambda2_(lambda2), range_start_(range_start), track_counts_(track_counts), max_cells_(max_cells) {
  sites_ = {origin(d)};
  dist_ = {1.0};
}

double PairChainState::mass(std::size_t a, std::size_t b, int count) const {
  if (count < 0 || count >= count_levels()) return 0.0;
  return dist_[cell(a, b, count)];
}

double PairChainState::total() const { return pairwise_sum(dist_); }

double PairChainState::exp_moment() const {
  if (!track_counts_) return total();
  std::vector<double> per_level;
  const std::size_t s2 = sites_.size() * sites_.size();
  for (int c = 0; c < count_levels(); ++c) {
    std::span<const double> level(dist_.data() + static_cast<std::size_t>(c) * s2, s2);
    per_level.push_back(pairwise_sum(level) * std::exp(lambda2_ * c));
  }
  return pairwise_sum(per_level);
}

void PairChainState::advance() {
  const int t = time_ + 1;
  std::vector<Site> next_sites = diamond_sites(d_, t, t & 1);
  const int levels = track_counts_ ? t + 1 : 1;
  const std::size_t s = next_sites.size();
  if (static_cast<double>(levels) * static_cast<double>(s) * static_cast<double>(s) > static_cast<double>(max_cells_))
    throw ResourceRefusal("pair chain state exceeds the cell budget");

  std::map<Site, std::size_t> index;
  for (std::size_t i = 0; i < s; ++i) index.emplace(next_sites[i], i);
  const int moves = 2 * d_;
  std::vector<std::size_t> nb(sites_.size() * static_cast<std::size_t>(moves));
  for (std::size_t a = 0; a < sites_.size(); ++a)
    for (int e = 0; e < moves; ++e)
      nb[a * static_cast<std::size_t>(moves) + static_cast<std::size_t>(e)] =
          index.at(sites_[a] + unit_vector(d_, e / 2, e % 2 ? -1 : 1));

  const bool in_range = t >= range_start_;
  const double meet = in_range ? std::exp(lambda2_) : 1.0;
  const double p = 1.0 / (static_cast<double>(moves) * moves);
  std::vector<double> next(static_cast<std::size_t>(levels) * s * s, 0.0);
  const std::size_t old_s = sites_.size();
  for (int c = 0; c < count_levels(); ++c)
    for (std::size_t a = 0; a < old_s; ++a)
      for (std::size_t b = 0; b < old_s; ++b) {
        const double m = dist_[cell(a, b, c)];
        if (m == 0.0) continue;
        for (int ea = 0; ea < moves; ++ea) {
          const std::size_t na = nb[a * static_cast<std::size_t>(moves) + static_cast<std::size_t>(ea)];
          for (int eb = 0; eb < moves; ++eb) {
            const std::size_t nbb = nb[b * static_cast<std::size_t>(moves) + static_cast<std::size_t>(eb)];
            const bool same = na == nbb;
            if (track_counts_) {
              const int nc = c + (same && in_range ? 1 : 0);
              next[(static_cast<std::size_t>(nc) * s + na) * s + nbb] += m * p;
            } else {
              next[na * s + nbb] += m * p * (same ? meet : 1.0);
            }
          }
        }
      }
  sites_ = std::move(next_sites);
  dist_ = std::move(next);
  time_ = t;
}

// ------------------------------------------------------- pinned pair expectations

ConditionedPairTable::ConditionedPairTable(int d, int n_max, double lambda2)
    : d_(d), n_max_(n_max), lambda2_(lambda2) {
  if (n_max < 1) throw std::invalid_argument("conditioned table needs n_max >= 1");
  const KernelTable kernel(d, n_max);
  const double rho = std::expm1(lambda2);
  q2_.resize(static_cast<std::size_t>(n_max) + 1);
  s_.resize(static_cast<std::size_t>(n_max) + 1);
  for (int m = 1; m <= n_max; ++m) {
    CubeGrid g(d, origin(d), m);
    std::vector<std::pair<std::ptrdiff_t, double>> vals;
    g.for_each(diamond_rows(d, m, m & 1), [&](const Site& o, double) {
      const double q = kernel(m, o);
      vals.emplace_back(g.index(o), q * q);
    });
    for (const auto& [i, v] : vals) g[i] = v;
    q2_[static_cast<std::size_t>(m)] = std::move(g);
  }

  // s_j = q2_j + rho * sum_{i<j} s_i * q2_{j-i}  (renewal over the last meeting before j).
  for (int j = 1; j <= n_max; ++j) {
    CubeGrid out = CubeGrid(d, origin(d), j);
    const auto out_rows = diamond_rows(d, j, j & 1);
    {
      const CubeGrid& q = q2_[static_cast<std::size_t>(j)];
      out.for_each(out_rows, [&](const Site& y, double) { out[out.index(y)] = q.at(y); });
    }
    std::vector<CubeGrid> partial(static_cast<std::size_t>(j));
    parallel_for(static_cast<std::size_t>(j - 1), [&](std::size_t idx) {
      const int i = static_cast<int>(idx) + 1;
      const int m = j - i;
      CubeGrid acc(d, origin(d), j);
      const CubeGrid& si = s_[static_cast<std::size_t>(i)];
      const CubeGrid& q = q2_[static_cast<std::size_t>(m)];
      const auto q_rows = diamond_rows(d, m, m & 1);
      std::vector<std::ptrdiff_t> q_shift;
      std::vector<std::ptrdiff_t> q_base;
      for (const auto& r : q_rows) {
        std::ptrdiff_t sh = 0;
        for (int k = 0; k + 1 < d; ++k) sh += acc.stride(k) * r.prefix[static_cast<std::size_t>(k)];
        q_shift.push_back(sh);
        q_base.push_back(q.row_base(r));
      }
      for (const auto& wr : diamond_rows(d, i, i & 1)) {
        const std::ptrdiff_t w_base = si.row_base(wr);
        const std::ptrdiff_t a_base = acc.row_base(wr);
        for (int wl = wr.lo; wl <= wr.hi; wl += wr.step) {
          const double sw = si[w_base + wl];
          if (sw == 0.0) continue;
          const double c = rho * sw;
          for (std::size_t r = 0; r < q_rows.size(); ++r) {
            const auto& qr = q_rows[r];
            const std::ptrdiff_t ab = a_base + wl + q_shift[r];
            const std::ptrdiff_t qb = q_base[r];
            for (int ol = qr.lo; ol <= qr.hi; ol += qr.step) acc[ab + ol] += c * q[qb + ol];
          }
        }
      }
      partial[idx] = std::move(acc);
    });
    for (int i = 1; i < j; ++i) {
      const CubeGrid& p = partial[static_cast<std::size_t>(i - 1)];
      for (const auto& r : out_rows) {
        const std::ptrdiff_t b = out.row_base(r);
        for (int o = r.lo; o <= r.hi; o += r.step) out[b + o] += p[b + o];
      }
    }
    s_[static_cast<std::size_t>(j)] = std::move(out);
  }
}

double ConditionedPairTable::pinned_mass(int n, const Site& offset) const {
  if (n < 1 || n > n_max_) throw std::out_of_range("conditioned table queried outside 1..n_max");
  if (l1_norm(offset) > n || !same_parity(n, offset)) return 0.0;
  return std::exp(lambda2_) * s_[static_cast<std::size_t>(n)].at(offset);
}

double ConditionedPairTable::operator()(int n, const Site& offset) const {
  if (n < 1 || n > n_max_) throw std::out_of_range("conditioned table queried outside 1..n_max");
  if (l1_norm(offset) > n || !same_parity(n, offset)) throw ParityError("endpoint not reachable: q^(n)(y - x) = 0");
  return pinned_mass(n, offset) / q2_[static_cast<std::size_t>(n)].at(offset);
}

double conditioned_pair_expectation(int d, int n, double lambda2, const Site& x, const Site& y) {
  const Site off = y - x;
  if (n < 1 || l1_norm(off) > n || !same_parity(n, off)) throw ParityError("endpoint not reachable: q^(n)(y - x) = 0");
  return ConditionedPairTable(d, n, lambda2)(n, off);
}

namespace {

// Sites y <-> n with |y|_2 <= A sqrt(n).
std::vector<Site> ball_sites(int d, int n, double window_a) {
  const double r2 = window_a * window_a * n;
  const int r = static_cast<int>(std::floor(std::sqrt(r2) + 1e-12));
  std::vector<Site> out;
  for (const Site& y : diamond_sites(d, std::min(n, d * r), -1))
    if (static_cast<double>(l2_squared(y)) <= r2 + 1e-9 && same_parity(n, y) && l1_norm(y) <= n) out.push_back(y);
  return out;
}

}  // namespace

ConditionedScan conditioned_pair_scan(int d, const std::vector<int>& times, double lambda2, double window_a) {
  if (times.empty()) throw std::invalid_argument("conditioned scan needs at least one time");
  const ConditionedPairTable table(d, *std::max_element(times.begin(), times.end()), lambda2);
  ConditionedScan scan;
  for (int n : times) {
    ConditionedScanRow row;
    row.n = n;
    row.inf = INFINITY;
    for (const Site& y : ball_sites(d, n, window_a)) {
      const double v = table(n, y);
      if (v > row.sup) {
        row.sup = v;
        row.argsup = y;
      }
      row.inf = std::min(row.inf, v);
      ++row.n_sites;
    }
    scan.constant = std::max(scan.constant, row.sup);
    scan.rows.push_back(row);
  }
  return scan;
}

// ----------------------------------------------------------------- Monte Carlo

MomentCheck second_moment_identity_check(const DisorderSpec& spec, int d, int n, std::size_t n_seeds,
                                         std::uint64_t master_seed) {
  if (n_seeds < 2) throw std::invalid_argument("second moment check needs at least two seeds");
  std::vector<double> z2(n_seeds);
  const Box box = Box::centered(origin(d), n);
  parallel_for(n_seeds, [&](std::size_t i) {
    const EnvironmentField field(spec, rng::derive_seed(master_seed, i), box, n);
    const double z = forward_partition(field, origin(d), n).total();
    z2[i] = z * z;
  });
  MomentCheck r;
  const MeanSe m = mean_se(z2);
  r.mc_mean = m.mean;
  r.mc_se = m.se;
  r.n_seeds = n_seeds;
  if (spec.beta() == 0.0) {
    // Both sides are deterministic; the Monte Carlo spread is pure rounding.
    r.exact = 1.0;
    r.z_score = 0.0;
    return r;
  }
  r.exact = pair_expectation(d, n, spec.lambda2(), 1);
  r.z_score = z_score(r.mc_mean, r.mc_se, r.exact, 0.0);
  return r;
}

double OverlapHistogram::probability(int c) const {
  if (c < 0 || c >= static_cast<int>(counts.size()) || n_pairs == 0) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n_pairs);
}

MeanSe OverlapHistogram::exp_moment(double lambda2) const {
  MeanSe r;
  r.n = n_pairs;
  if (n_pairs == 0) return r;
  std::vector<double> m1, m2;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double w = static_cast<double>(counts[c]) / static_cast<double>(n_pairs);
    const double e = std::exp(lambda2 * static_cast<double>(c));
    m1.push_back(w * e);
    m2.push_back(w * e * e);
  }
  r.mean = pairwise_sum(m1);
  if (n_pairs > 1) {
    const double var = std::max(0.0, pairwise_sum(m2) - r.mean * r.mean) * static_cast<double>(n_pairs) /
                       static_cast<double>(n_pairs - 1);
    r.se = std::sqrt(var / static_cast<double>(n_pairs));
  }
  return r;
}

OverlapHistogram overlap_mc(int d, int n, std::uint64_t n_pairs, std::uint64_t seed) {
  if (d < 1 || d > kMaxDim) throw DimensionError("dimension out of range");
  std::vector<int> per_pair(n_pairs);
  const int moves = 2 * d;
  parallel_for(n_pairs, [&](std::size_t i) {
    rng::CounterStream s(seed, i);
    std::array<int, kMaxDim> a{}, b{};
    int count = 0;
    for (int j = 1; j <= n; ++j) {
      const int ea = s.below(moves);
      const int eb = s.below(moves);
      a[static_cast<std::size_t>(ea / 2)] += ea % 2 ? -1 : 1;
      b[static_cast<std::size_t>(eb / 2)] += eb % 2 ? -1 : 1;
      if (a == b) ++count;
    }
    per_pair[i] = count;
  });
  OverlapHistogram h;
  h.n = n;
  h.n_pairs = n_pairs;
  h.counts.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int c : per_pair) ++h.counts[static_cast<std::size_t>(c)];
  return h;
}

CountFunctional CountFunctional::one() {
  return {"one", [](int) { return 1.0; }};
}

CountFunctional CountFunctional::exp_overlap(double lambda2) {
  return {"exp_overlap(" + std::to_string(lambda2) + ")", [lambda2](int c) { return std::exp(lambda2 * c); }};
}

CountFunctional CountFunctional::hits_at_least(int k) {
  return {"hits_at_least(" + std::to_string(k) + ")", [k](int c) { return c >= k ? 1.0 : 0.0; }};
}

AbsContinuityResult bridge_abs_continuity_check(int d, const std::vector<int>& times, double t, double window_a,
                                                const CountFunctional& f) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0, 1)");
  if (times.empty()) throw std::invalid_argument("absolute continuity check needs at least one time");
  std::vector<int> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const KernelTable kernel(d, sorted.back());
  PairChainState chain(d, 0.0, 1, true);
  AbsContinuityResult res;

  for (int n : sorted) {
    const int m = static_cast<int>(std::floor(n * t));
    while (chain.time() < m) chain.advance();
    const auto& sites = chain.sites();
    const std::size_t s = sites.size();
    // Marginal weight of f per count level, and E[f].
    std::vector<double> fc(static_cast<std::size_t>(chain.count_levels()));
    for (int c = 0; c < chain.count_levels(); ++c) fc[static_cast<std::size_t>(c)] = f.f(c);
    std::vector<double> rhs_terms;
    for (int c = 0; c < chain.count_levels(); ++c) {
      if (fc[static_cast<std::size_t>(c)] == 0.0) continue;
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b) rhs_terms.push_back(fc[static_cast<std::size_t>(c)] * chain.mass(a, b, c));
    }
    const double rhs = pairwise_sum(rhs_terms);

    for (const Site& y : ball_sites(d, n, window_a)) {
      const double qn = kernel(n, y);
      std::vector<double> w(s);
      double wmax = 0.0;
      for (std::size_t a = 0; a < s; ++a) {
        w[a] = kernel(n - m, y - sites[a]);
        wmax = std::max(wmax, w[a]);
      }
      std::vector<double> terms;
      for (int c = 0; c < chain.count_levels(); ++c) {
        const double fv = fc[static_cast<std::size_t>(c)];
        if (fv == 0.0) continue;
        for (std::size_t a = 0; a < s; ++a) {
          if (w[a] == 0.0) continue;
          double row = 0.0;
          for (std::size_t b = 0; b < s; ++b) row += chain.mass(a, b, c) * w[b];
          terms.push_back(fv * w[a] * row);
        }
      }
      AbsContinuityRow r;
      r.n = n;
      r.y = y;
      r.lhs = pairwise_sum(terms) / (qn * qn);
      r.rhs = rhs;
      r.kernel_ratio = wmax * wmax / (qn * qn);
      res.constant = std::max(res.constant, r.kernel_ratio * std::pow(1.0 - t, d));
      res.rows.push_back(std::move(r));
    }
  }
  const double bound = res.constant / std::pow(1.0 - t, d);
  for (const auto& r : res.rows)
    if (r.lhs > bound * r.rhs * (1.0 + 1e-12)) res.violations.push_back(r);
  res.ok = res.violations.empty();
  return res;
}

}  // namespace polymerlab
