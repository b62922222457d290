#include "polymerlab/brownian.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "polymerlab/errors.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {

double ball_volume(int d, double radius) {
  return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(radius, d);
}

double unit_ball_radius(int d) {
  if (d < 1) throw DimensionError("dimension must be >= 1");
  return std::pow(std::tgamma(d / 2.0 + 1.0) / std::pow(M_PI, d / 2.0), 1.0 / d);
}

double lens_volume(int d, double radius, double delta) {
  delta = std::abs(delta);
  if (delta >= 2.0 * radius) return 0.0;
  if (delta == 0.0) return ball_volume(d, radius);
  const double r = radius;
  switch (d) {
    case 1:
      return 2.0 * r - delta;
    case 2:
      return 2.0 * r * r * std::acos(delta / (2.0 * r)) - 0.5 * delta * std::sqrt(4.0 * r * r - delta * delta);
    case 3:
      return M_PI * (4.0 * r + delta) * (2.0 * r - delta) * (2.0 * r - delta) / 12.0;
    default: {
      // Two caps; each is the integral of (d-1)-ball sections.
      const double c = std::pow(M_PI, (d - 1) / 2.0) / std::tgamma((d + 1) / 2.0);
      auto section = [&](double s) { return c * std::pow(std::max(0.0, r * r - s * s), (d - 1) / 2.0); };
      return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(section, delta / 2.0, r, 15, 1e-12);
    }
  }
}

TubeGeometry::TubeGeometry(int dim, double step) : d(dim), radius(unit_ball_radius(dim)), h(step) {}

double poisson_lambda(double beta) { return std::expm1(beta); }

double poisson_lambda2(double beta) {
  const double e = std::expm1(beta);
  return e * e;
}

SpaceBox SpaceBox::centered(const std::vector<double>& center, double half_width) {
  SpaceBox b;
  for (double c : center) {
    b.lo.push_back(c - half_width);
    b.hi.push_back(c + half_width);
  }
  return b;
}

bool SpaceBox::contains_ball(const double* center, double r) const {
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (center[k] - r < lo[k] || center[k] + r > hi[k]) return false;
  return true;
}

PoissonEnvironment::PoissonEnvironment(std::uint64_t seed, double horizon, SpaceBox box, double time_cell)
    : seed_(seed), horizon_(horizon), box_(std::move(box)), time_cell_(time_cell) {
  if (box_.dim() < 1 || box_.dim() > kMaxDim) throw DimensionError("dimension out of range");
  if (!(horizon > 0.0) || !(time_cell > 0.0)) throw std::invalid_argument("horizon and time cell must be positive");
}

template <class F>
void PoissonEnvironment::visit_cell(const std::array<std::int64_t, kMaxDim>& cell, std::int64_t tc, F&& f) const {
  const int d = dim();
  std::uint64_t key = rng::combine(rng::mix64(seed_ ^ 0x9015u), tc);
  for (int k = 0; k < d; ++k) key = rng::combine(key, cell[static_cast<std::size_t>(k)]);
  std::uint64_t counter = 0;
  auto uniform = [&] { return rng::to_unit_open(rng::mix64(key ^ rng::mix64(counter++))); };
  // Poisson(time_cell) by inversion.
  const double u = uniform();
  double p = std::exp(-time_cell_);
  double cdf = p;
  int count = 0;
  while (u > cdf && count < 1000) {
    ++count;
    p *= time_cell_ / count;
    cdf += p;
  }
  for (int i = 0; i < count; ++i) {
    Point pt;
    pt.u = (static_cast<double>(tc) + uniform()) * time_cell_;
    for (int k = 0; k < d; ++k)
      pt.z[static_cast<std::size_t>(k)] = static_cast<double>(cell[static_cast<std::size_t>(k)]) + uniform();
    f(pt);
  }
}

std::vector<PoissonEnvironment::Point> PoissonEnvironment::cell_points(const std::array<std::int64_t, kMaxDim>& cell,
                                                                       std::int64_t time_cell_index) const {
  std::vector<Point> out;
  visit_cell(cell, time_cell_index, [&](const Point& p) { out.push_back(p); });
  return out;
}

namespace {

// Odometer over the integer box [lo_k, hi_k].
template <class F>
void for_cells(int d, const std::array<std::int64_t, kMaxDim>& lo, const std::array<std::int64_t, kMaxDim>& hi, F&& f) {
  std::array<std::int64_t, kMaxDim> c = lo;
  for (int k = 0; k < d; ++k)
    if (hi[static_cast<std::size_t>(k)] < lo[static_cast<std::size_t>(k)]) return;
  while (true) {
    f(c);
    int k = d - 1;
    while (k >= 0) {
      auto& v = c[static_cast<std::size_t>(k)];
      if (v < hi[static_cast<std::size_t>(k)]) {
        ++v;
        break;
      }
      v = lo[static_cast<std::size_t>(k)];
      --k;
    }
    if (k < 0) return;
  }
}

}  // namespace

std::size_t PoissonEnvironment::count_points(const std::vector<double>& lo, const std::vector<double>& hi, double t0,
                                             double t1) const {
  const int d = dim();
  std::array<std::int64_t, kMaxDim> clo{}, chi{};
  for (int k = 0; k < d; ++k) {
    clo[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(lo[static_cast<std::size_t>(k)]));
    chi[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::ceil(hi[static_cast<std::size_t>(k)])) - 1;
  }
  const auto tc0 = static_cast<std::int64_t>(std::floor(t0 / time_cell_));
  const auto tc1 = static_cast<std::int64_t>(std::ceil(t1 / time_cell_)) - 1;
  std::size_t n = 0;
  for (std::int64_t tc = tc0; tc <= tc1; ++tc)
    for_cells(d, clo, chi, [&](const std::array<std::int64_t, kMaxDim>& c) {
      visit_cell(c, tc, [&](const Point& p) {
        if (p.u <= t0 || p.u > t1) return;
        for (int k = 0; k < d; ++k)
          if (p.z[static_cast<std::size_t>(k)] < lo[static_cast<std::size_t>(k)] ||
              p.z[static_cast<std::size_t>(k)] >= hi[static_cast<std::size_t>(k)])
            return;
        ++n;
      });
    });
  return n;
}

int PoissonEnvironment::count_ball(const double* center, double r, double u0, double u1) const {
  const double eps = 1e-9 * std::max(1.0, horizon_);
  if (!box_.contains_ball(center, r)) throw BoxOverflowError("tube left the spatial box of the environment");
  if (u0 < -eps || u1 > horizon_ + eps) throw BoxOverflowError("tube left the time range of the environment");
  const int d = dim();
  std::array<std::int64_t, kMaxDim> clo{}, chi{};
  for (int k = 0; k < d; ++k) {
    clo[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(center[k] - r));
    chi[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(center[k] + r));
  }
  const auto tc0 = static_cast<std::int64_t>(std::floor(u0 / time_cell_));
  const auto tc1 = static_cast<std::int64_t>(std::ceil(u1 / time_cell_)) - 1;
  const double r2 = r * r;
  int n = 0;
  for (std::int64_t tc = tc0; tc <= tc1; ++tc)
    for_cells(d, clo, chi, [&](const std::array<std::int64_t, kMaxDim>& c) {
      visit_cell(c, tc, [&](const Point& p) {
        if (p.u <= u0 || p.u > u1) return;
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
          const double dz = p.z[static_cast<std::size_t>(k)] - center[k];
          s += dz * dz;
        }
        if (s <= r2) ++n;
      });
    });
  return n;
}

int step_count(double t, double h) {
  if (!(t > 0.0) || !(h > 0.0) || h > t * (1.0 + 1e-12)) throw std::invalid_argument("need 0 < h <= t");
  return std::max(1, static_cast<int>(std::llround(t / h)));
}

Path brownian_path(const std::vector<double>& x, double t, double h, std::uint64_t seed, std::uint64_t stream) {
  Path p;
  p.d = static_cast<int>(x.size());
  p.steps = step_count(t, h);
  p.h = t / p.steps;
  p.x.resize(static_cast<std::size_t>(p.steps + 1) * x.size());
  std::copy(x.begin(), x.end(), p.x.begin());
  rng::CounterStream s(seed, stream);
  const double sd = std::sqrt(p.h);
  for (int k = 1; k <= p.steps; ++k) {
    const double* prev = p.at(k - 1);
    double* cur = p.at(k);
    for (int i = 0; i < p.d; ++i) cur[i] = prev[i] + sd * s.normal();
  }
  return p;
}

Path bridge_sample(const std::vector<double>& x, const std::vector<double>& y, double t, double h, std::uint64_t seed,
                   std::uint64_t stream) {
  if (x.size() != y.size()) throw DimensionError("bridge endpoints differ in dimension");
  Path p = brownian_path(std::vector<double>(x.size(), 0.0), t, h, seed, stream);
  const std::vector<double> w_end(p.at(p.steps), p.at(p.steps) + p.d);
  for (int k = 0; k <= p.steps; ++k) {
    const double frac = static_cast<double>(k) / p.steps;
    double* c = p.at(k);
    for (int i = 0; i < p.d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      c[i] = x[ui] + c[i] + frac * (y[ui] - x[ui] - w_end[ui]);
    }
  }
  std::copy(x.begin(), x.end(), p.at(0));
  std::copy(y.begin(), y.end(), p.at(p.steps));
  return p;
}

std::vector<BridgeMomentRow> bridge_moment_check(const std::vector<double>& x, const std::vector<double>& y, double t,
                                                 double h, const std::vector<double>& fractions,
                                                 std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("bridge check needs at least two samples");
  const int d = static_cast<int>(x.size());
  const int steps = step_count(t, h);
  std::vector<int> ks;
  for (double f : fractions) ks.push_back(static_cast<int>(std::llround(f * steps)));
  // samples[k][coord][i]
  std::vector<std::vector<std::vector<double>>> samples(
      ks.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(d), std::vector<double>(n_samples)));
  parallel_for(n_samples, [&](std::size_t i) {
    const Path p = bridge_sample(x, y, t, h, seed, i);
    for (std::size_t j = 0; j < ks.size(); ++j)
      for (int c = 0; c < d; ++c) samples[j][static_cast<std::size_t>(c)][i] = p.at(ks[j])[c];
  });
  std::vector<BridgeMomentRow> rows;
  for (std::size_t j = 0; j < ks.size(); ++j)
    for (int c = 0; c < d; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      BridgeMomentRow r;
      r.s = ks[j] * (t / steps);
      r.coord = c;
      r.mean_exact = x[uc] + r.s / t * (y[uc] - x[uc]);
      r.var_exact = r.s * (t - r.s) / t;
      const auto& v = samples[j][uc];
      const MeanSe m = mean_se(v);
      r.mean = m.mean;
      r.mean_z = m.se > 0.0 ? (m.mean - r.mean_exact) / m.se : (m.mean == r.mean_exact ? 0.0 : INFINITY);
      std::vector<double> dev(n_samples);
      for (std::size_t i = 0; i < n_samples; ++i) dev[i] = (v[i] - r.mean_exact) * (v[i] - r.mean_exact);
      const MeanSe q = mean_se(dev);
      r.var = q.mean;
      r.var_z = q.se > 0.0 ? (q.mean - r.var_exact) / q.se : (q.mean == r.var_exact ? 0.0 : INFINITY);
      rows.push_back(r);
    }
  return rows;
}

namespace {

std::pair<int, int> step_range(const Path& path, double s, double t) {
  const auto k0 = static_cast<int>(std::llround(s / path.h));
  const auto k1 = static_cast<int>(std::llround(t / path.h));
  if (k0 < 0 || k1 > path.steps || k0 > k1) throw std::out_of_range("interval outside the path");
  return {k0, k1};
}

}  // namespace

int tube_count(const PoissonEnvironment& env, const Path& path, double s, double t, const TubeGeometry& g) {
  const auto [k0, k1] = step_range(path, s, t);
  int n = 0;
  for (int k = k0; k < k1; ++k) n += env.count_ball(path.at(k), g.radius, k * path.h, (k + 1) * path.h);
  return n;
}

int tube_count_reversed(const PoissonEnvironment& env, const Path& path, double s, double t, double anchor,
                        const TubeGeometry& g) {
  const auto [k0, k1] = step_range(path, s, t);
  int n = 0;
  for (int k = k0; k < k1; ++k)
    n += env.count_ball(path.at(k), g.radius, std::max(0.0, anchor - (k + 1) * path.h), anchor - k * path.h);
  return n;
}

MeanSe brownian_partition_mc(const PoissonEnvironment& env, const std::vector<double>& x, double t, double beta,
                             std::size_t n_paths, double h, std::uint64_t path_seed) {
  const TubeGeometry g(static_cast<int>(x.size()), h);
  const double lam = poisson_lambda(beta);
  std::vector<double> w(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (beta == 0.0) {
      w[i] = 1.0;
      continue;
    }
    const Path p = brownian_path(x, t, h, path_seed, i);
    w[i] = std::exp(beta * tube_count(env, p, 0.0, t, g) - lam * t);
  }
  return mean_se(w);
}

double overlap_volume(const Path& a, const Path& b, double s, double t, const TubeGeometry& g) {
  if (a.d != b.d || a.steps != b.steps || a.h != b.h) throw std::invalid_argument("paths must share a step grid");
  const auto [k0, k1] = step_range(a, s, t);
  std::vector<double> terms;
  for (int k = k0; k < k1; ++k) {
    double s2 = 0.0;
    for (int i = 0; i < a.d; ++i) {
      const double dz = a.at(k)[i] - b.at(k)[i];
      s2 += dz * dz;
    }
    terms.push_back(g.lens_volume(std::sqrt(s2)) * a.h);
  }
  return pairwise_sum(terms);
}

SpaceBox brownian_box(const std::vector<double>& x, double t, double radius) {
  return SpaceBox::centered(x, 6.0 * std::sqrt(t) + radius);
}

BrownianMomentCheck continuous_second_moment_check(double beta, int d, double t, std::size_t n_env,
                                                   std::size_t n_paths, std::size_t n_pairs, double h,
                                                   std::uint64_t master_seed) {
  if (n_env < 2 || n_paths < 1 || n_pairs < 2) throw std::invalid_argument("moment check needs more samples");
  const std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  const TubeGeometry g(d, h);
  const SpaceBox box = brownian_box(x, t, g.radius);
  std::vector<double> prod(n_env);
  parallel_for(n_env, [&](std::size_t i) {
    const std::uint64_t env_seed = rng::derive_seed(master_seed, i);
    const PoissonEnvironment env(env_seed, t, box);
    const MeanSe za = brownian_partition_mc(env, x, t, beta, n_paths, h, rng::derive_seed(env_seed, 1));
    const MeanSe zb = brownian_partition_mc(env, x, t, beta, n_paths, h, rng::derive_seed(env_seed, 2));
    prod[i] = za.mean * zb.mean;
  });
  const double l2 = poisson_lambda2(beta);
  const std::uint64_t pair_seed = rng::combine(master_seed, std::uint64_t{0x9a17});
  std::vector<double> ov(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    if (l2 == 0.0) {
      ov[i] = 1.0;
      return;
    }
    const Path a = brownian_path(x, t, h, pair_seed, 2 * i);
    const Path b = brownian_path(x, t, h, pair_seed, 2 * i + 1);
    ov[i] = std::exp(l2 * overlap_volume(a, b, 0.0, t, g));
  });
  BrownianMomentCheck r;
  const MeanSe lhs = mean_se(prod);
  const MeanSe rhs = mean_se(ov);
  r.lhs = lhs.mean;
  r.lhs_se = lhs.se;
  r.rhs = rhs.mean;
  r.rhs_se = rhs.se;
  r.z_score = z_score(lhs.mean, lhs.se, rhs.mean, rhs.se);
  r.n_env = n_env;
  r.n_paths = n_paths;
  r.n_pairs = n_pairs;
  std::vector<double> c2(n_env), c4(n_env);
  for (std::size_t i = 0; i < n_env; ++i) {
    const double c = prod[i] - lhs.mean;
    c2[i] = c * c;
    c4[i] = c2[i] * c2[i];
  }
  const double m2 = pairwise_sum(c2) / static_cast<double>(n_env);
  r.kurtosis = m2 > 0.0 ? pairwise_sum(c4) / static_cast<double>(n_env) / (m2 * m2) : 0.0;
  r.variance_warning = r.kurtosis > 50.0;
  return r;
}

double continuous_l(double t, double a, double h) {
  return std::max(h, std::round(std::pow(t, a) / h) * h);
}

double expected_lens_gaussian(double m, double s2) {
  const double r = unit_ball_radius(3);
  if (s2 < 1e-14) return lens_volume(3, r, m);
  const double s = std::sqrt(s2);
  // Density of |D| (noncentral chi, three degrees of freedom).
  auto density = [&](double rho) {
    if (m < 1e-9 * s) return std::sqrt(2.0 / M_PI) * rho * rho / (s2 * s) * std::exp(-rho * rho / (2.0 * s2));
    return rho / (m * std::sqrt(2.0 * M_PI * s2)) *
           (std::exp(-(rho - m) * (rho - m) / (2.0 * s2)) - std::exp(-(rho + m) * (rho + m) / (2.0 * s2)));
  };
  auto f = [&](double rho) { return density(rho) * lens_volume(3, r, rho); };
  // The density lives within a few s of m; fixed-order panels on that window.
  const double lo = std::max(0.0, m - 10.0 * s), hi = std::min(2.0 * r, m + 10.0 * s);
  if (hi <= lo) return 0.0;
  using G = boost::math::quadrature::gauss<double, 30>;
  double total = 0.0;
  const int panels = 4;
  for (int k = 0; k < panels; ++k)
    total += G::integrate(f, lo + (hi - lo) * k / panels, lo + (hi - lo) * (k + 1) / panels);
  return total;
}

double residual_l2_first_order(double beta, double t, double l, double y) {
  if (!(t > 0.0) || !(l > 0.0) || l > t) throw std::invalid_argument("need 0 < l <= t");
  auto integrand = [&](double u) {
    const double vb = u * (t - u) / t, mb = u / t * y;
    const bool fwd = u <= l, rev = u >= t - l;
    double v = expected_lens_gaussian(0.0, 2.0 * vb);
    if (fwd) v += expected_lens_gaussian(0.0, 2.0 * u) - 2.0 * expected_lens_gaussian(std::abs(mb), vb + u);
    if (rev)
      v += expected_lens_gaussian(0.0, 2.0 * (t - u)) - 2.0 * expected_lens_gaussian(std::abs(y - mb), vb + t - u);
    if (fwd && rev) v += 2.0 * expected_lens_gaussian(std::abs(y), t);
    return v;
  };
  std::vector<double> cuts{0.0, std::min(l, t - l), std::max(l, t - l), t};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i])
      for (int k = 0; k < 16; ++k) {
        const double a = cuts[i] + (cuts[i + 1] - cuts[i]) * k / 16.0;
        const double b = cuts[i] + (cuts[i + 1] - cuts[i]) * (k + 1) / 16.0;
        total += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, b);
      }
  return poisson_lambda2(beta) * total;
}

namespace {

struct InnerEstimate {
  double mean = 0.0;
  double var_of_mean = 0.0;  // sample variance / n
};

InnerEstimate inner(const std::vector<double>& w) {
  const MeanSe m = mean_se(w);
  return {m.mean, m.se * m.se};
}

std::uint64_t stream_seed(std::uint64_t env_seed, std::uint64_t t_index, std::uint64_t y_index, std::uint64_t role) {
  return rng::combine(rng::combine(rng::combine(env_seed, t_index), y_index), role);
}

}  // namespace

ContinuousLltScan continuous_llt_residual_scan(const ContinuousLltConfig& cfg) {
  if (cfg.d < 1 || cfg.d > kMaxDim) throw ValidationError("dimension out of range");
  if (cfg.times.empty()) throw ValidationError("continuous scan needs at least one time");
  if (!(cfg.a > 0.0 && cfg.a < 0.5)) throw ValidationError("exponent a must lie in (0, 1/2)");
  if (cfg.n_env < 2 || cfg.n_paths < 2) throw ValidationError("continuous scan needs >= 2 environments and paths");
  if (cfg.radial_fractions.empty()) throw ValidationError("continuous scan needs at least one y point");
  for (double t : cfg.times)
    if (!(t > 0.0) || !(cfg.h > 0.0) || cfg.h > t) throw ValidationError("need 0 < h <= t");

  const int d = cfg.d;
  const std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  const TubeGeometry g(d, cfg.h);
  const double lam = poisson_lambda(cfg.beta);
  const double t_max = *std::max_element(cfg.times.begin(), cfg.times.end());
  const double f_max = *std::max_element(cfg.radial_fractions.begin(), cfg.radial_fractions.end());
  const SpaceBox box = SpaceBox::centered(x, (6.0 + cfg.window_a * f_max) * std::sqrt(t_max) + g.radius);

  auto weight = [&](int count, double duration) { return std::exp(cfg.beta * count - lam * duration); };

  ContinuousLltScan scan;
  // Feasibility pilot: squared coefficient of variation of bridge weights at the longest time.
  if (cfg.beta != 0.0) {
    const std::size_t pilot = std::min<std::size_t>(16, cfg.n_env);
    std::vector<double> cv2(pilot);
    parallel_for(pilot, [&](std::size_t i) {
      const std::uint64_t env_seed = rng::derive_seed(cfg.master_seed, i);
      const PoissonEnvironment env(env_seed, t_max, box);
      std::vector<double> w(cfg.n_paths);
      for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        const Path b = bridge_sample(x, x, t_max, cfg.h, stream_seed(env_seed, 999, 0, 7), p);
        w[p] = weight(tube_count(env, b, 0.0, t_max, g), t_max);
      }
      const MeanSe m = mean_se(w);
      cv2[i] = m.se * m.se * static_cast<double>(m.n) / (m.mean * m.mean);
    });
    scan.inner_cv2 = mean_se(cv2).mean;
    if (scan.inner_cv2 > cfg.max_inner_cv2 && !cfg.force)
      throw RegionRefusal("inner Monte Carlo variance check failed (squared CV " + std::to_string(scan.inner_cv2) +
                          ")");
  }

  for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
    const double t = cfg.times[ti];
    const double l = continuous_l(t, cfg.a, cfg.h);
    const std::size_t ny = cfg.radial_fractions.size();
    std::vector<std::vector<double>> sq(ny, std::vector<double>(cfg.n_env, 0.0));
    std::vector<std::vector<double>> fl(ny, std::vector<double>(cfg.n_env, 0.0));
    if (cfg.beta != 0.0) {
      parallel_for(cfg.n_env, [&](std::size_t i) {
        const std::uint64_t env_seed = rng::derive_seed(cfg.master_seed, i);
        const PoissonEnvironment env(env_seed, t_max, box);
        std::vector<double> w(cfg.n_paths);
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
          const Path f = brownian_path(x, l, cfg.h, stream_seed(env_seed, ti, 0, 0), p);
          w[p] = weight(tube_count(env, f, 0.0, l, g), l);
        }
        const InnerEstimate z = inner(w);
        for (std::size_t yi = 0; yi < ny; ++yi) {
          std::vector<double> y = x;
          y[0] += cfg.radial_fractions[yi] * cfg.window_a * std::sqrt(t);
          for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            const Path b = bridge_sample(x, y, t, cfg.h, stream_seed(env_seed, ti, yi, 1), p);
            w[p] = weight(tube_count(env, b, 0.0, t, g), t);
          }
          const InnerEstimate a = inner(w);
          for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            const Path r = brownian_path(y, l, cfg.h, stream_seed(env_seed, ti, yi, 2), p);
            w[p] = weight(tube_count_reversed(env, r, 0.0, l, t, g), l);
          }
          const InnerEstimate rv = inner(w);
          const double resid = a.mean - z.mean * rv.mean;
          sq[yi][i] = resid * resid;
          fl[yi][i] = a.var_of_mean + z.mean * z.mean * rv.var_of_mean + rv.mean * rv.mean * z.var_of_mean -
                      z.var_of_mean * rv.var_of_mean;
        }
      });
    }
    ContinuousLltRow best;
    best.corrected = -INFINITY;
    for (std::size_t yi = 0; yi < ny; ++yi) {
      std::vector<double> corr(cfg.n_env);
      for (std::size_t i = 0; i < cfg.n_env; ++i) corr[i] = sq[yi][i] - fl[yi][i];
      ContinuousLltRow row;
      row.t = t;
      row.l = l;
      row.y_radius = cfg.radial_fractions[yi] * cfg.window_a * std::sqrt(t);
      row.raw = mean_se(sq[yi]).mean;
      row.noise_floor = mean_se(fl[yi]).mean;
      const MeanSe c = mean_se(corr);
      row.corrected = c.mean;
      row.se = c.se;
      row.n_env = cfg.n_env;
      row.first_order = cfg.d == 3 ? residual_l2_first_order(cfg.beta, t, l, row.y_radius) : NAN;
      if (row.corrected > best.corrected) best = row;
      scan.rows.push_back(row);
    }
    scan.sup_rows.push_back(best);
  }
  return scan;
}

BinningCheck bridge_binning_check(const PoissonEnvironment& env, const std::vector<double>& x,
                                  const std::vector<double>& y, double t, double beta, double h, double bin_radius,
                                  std::size_t n_free, std::size_t n_bridge, std::uint64_t seed) {
  const int d = static_cast<int>(x.size());
  const TubeGeometry g(d, h);
  const double lam = poisson_lambda(beta);
  std::vector<double> binned;
  for (std::size_t i = 0; i < n_free; ++i) {
    const Path p = brownian_path(x, t, h, seed, 2 * i);
    double s2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dz = p.at(p.steps)[k] - y[static_cast<std::size_t>(k)];
      s2 += dz * dz;
    }
    if (s2 > bin_radius * bin_radius) continue;
    binned.push_back(std::exp(beta * tube_count(env, p, 0.0, t, g) - lam * t));
  }
  std::vector<double> bridged(n_bridge);
  for (std::size_t i = 0; i < n_bridge; ++i) {
    const Path p = bridge_sample(x, y, t, h, seed, 2 * i + 1);
    bridged[i] = std::exp(beta * tube_count(env, p, 0.0, t, g) - lam * t);
  }
  BinningCheck r;
  const MeanSe a = mean_se(binned);
  const MeanSe b = mean_se(bridged);
  r.binned_mean = a.mean;
  r.binned_se = a.se;
  r.n_in_bin = a.n;
  r.bridge_mean = b.mean;
  r.bridge_se = b.se;
  r.z_score = z_score(a.mean, a.se, b.mean, b.se);
  return r;
}

}  // namespace polymerlab
