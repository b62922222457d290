#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polymerlab/lattice.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

// Time-cell length of the Poisson environment; independent of any path step so
// that refining h reuses the same environment.
inline constexpr double kPoissonTimeCell = 1.0 / 32.0;

// Radius of the unit-volume ball in R^d.
double unit_ball_radius(int d);
double ball_volume(int d, double radius);
// Volume of the intersection of two balls of the given radius at center distance delta.
// Closed form for d = 1, 2, 3; cap quadrature otherwise.
double lens_volume(int d, double radius, double delta);

struct TubeGeometry {
  int d;
  double radius;
  double h;

  TubeGeometry(int d, double h);
  double ball_volume() const { return polymerlab::ball_volume(d, radius); }
  double lens_volume(double delta) const { return polymerlab::lens_volume(d, radius, delta); }
};

// lambda(beta) = e^beta - 1 for a unit-intensity Poisson environment, and lambda2 = (e^beta - 1)^2.
double poisson_lambda(double beta);
double poisson_lambda2(double beta);

struct SpaceBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static SpaceBox centered(const std::vector<double>& center, double half_width);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains_ball(const double* center, double r) const;
};

// Unit-intensity Poisson point process on (0, horizon] x box. Points of each
// space-time cell (unit cube x time cell) are a pure function of (seed, cell).
class PoissonEnvironment {
 public:
  PoissonEnvironment(std::uint64_t seed, double horizon, SpaceBox box, double time_cell = kPoissonTimeCell);

  std::uint64_t seed() const { return seed_; }
  double horizon() const { return horizon_; }
  const SpaceBox& box() const { return box_; }
  int dim() const { return box_.dim(); }
  double time_cell() const { return time_cell_; }

  struct Point {
    double u = 0.0;
    std::array<double, kMaxDim> z{};
  };

  // Points of the cell [c, c + 1) x (tc, tc + 1] * time_cell.
  std::vector<Point> cell_points(const std::array<std::int64_t, kMaxDim>& cell, std::int64_t time_cell_index) const;

  // Points with u in (t0, t1] inside the axis box [lo, hi) (unclipped; caller keeps it in range).
  std::size_t count_points(const std::vector<double>& lo, const std::vector<double>& hi, double t0, double t1) const;

  // Points with u in (u0, u1] and |z - center| <= r. Throws BoxOverflowError when the
  // ball leaves the box or the interval leaves (0, horizon].
  int count_ball(const double* center, double r, double u0, double u1) const;

 private:
  template <class F>
  void visit_cell(const std::array<std::int64_t, kMaxDim>& cell, std::int64_t tc, F&& f) const;

  std::uint64_t seed_;
  double horizon_;
  SpaceBox box_;
  double time_cell_;
};

// Positions at times 0, h, ..., steps * h.
struct Path {
  int d = 0;
  double h = 0.0;
  int steps = 0;
  std::vector<double> x;

  const double* at(int k) const { return x.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(d); }
  double* at(int k) { return x.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(d); }
  double duration() const { return h * steps; }
};

// Number of steps of size close to h covering [0, t]; the effective step is t / steps.
int step_count(double t, double h);

// Euler path of standard Brownian motion from x over [0, t], keyed by (seed, stream).
Path brownian_path(const std::vector<double>& x, double t, double h, std::uint64_t seed, std::uint64_t stream);

// Brownian bridge from x to y over [0, t]: free increments plus the linear correction.
Path bridge_sample(const std::vector<double>& x, const std::vector<double>& y, double t, double h, std::uint64_t seed,
                   std::uint64_t stream = 0);

// eta(V_{s,t}) with the left-endpoint convention: on (kh, (k+1)h] the tube is the ball
// around the path at time kh.
int tube_count(const PoissonEnvironment& env, const Path& path, double s, double t, const TubeGeometry& g);

// eta of the reversed tube {(anchor - u, z) : u in (s, t], z in U(w_u)}.
int tube_count_reversed(const PoissonEnvironment& env, const Path& path, double s, double t, double anchor,
                        const TubeGeometry& g);

// Path Monte Carlo of Z_t^x = P^x(exp(beta eta(V_t) - (e^beta - 1) t)).
MeanSe brownian_partition_mc(const PoissonEnvironment& env, const std::vector<double>& x, double t, double beta,
                             std::size_t n_paths, double h, std::uint64_t path_seed);

// sum over steps in (s, t] of lens_volume(|w_kh - w~_kh|) * h.
double overlap_volume(const Path& a, const Path& b, double s, double t, const TubeGeometry& g);

// Box x +- (6 sqrt(t) + radius) used by the Monte Carlo drivers.
SpaceBox brownian_box(const std::vector<double>& x, double t, double radius);

struct BridgeMomentRow {
  double s = 0.0;
  int coord = 0;
  double mean = 0.0;
  double mean_exact = 0.0;  // x + (s / t)(y - x)
  double mean_z = 0.0;
  double var = 0.0;
  double var_exact = 0.0;  // s (t - s) / t
  double var_z = 0.0;
};

// Empirical mean and variance of each bridge coordinate at the grid times nearest to f * t.
std::vector<BridgeMomentRow> bridge_moment_check(const std::vector<double>& x, const std::vector<double>& y, double t,
                                                 double h, const std::vector<double>& fractions,
                                                 std::size_t n_samples, std::uint64_t seed);

struct BrownianMomentCheck {
  double lhs = 0.0;  // disorder mean of Z_A * Z_B (two independent inner path sets)
  double lhs_se = 0.0;
  double rhs = 0.0;  // path-pair mean of exp(lambda2 N_{0,t})
  double rhs_se = 0.0;
  double z_score = 0.0;
  double kurtosis = 0.0;  // sample kurtosis of the per-environment products
  bool variance_warning = false;
  std::size_t n_env = 0;
  std::size_t n_paths = 0;
  std::size_t n_pairs = 0;
};

BrownianMomentCheck continuous_second_moment_check(double beta, int d, double t, std::size_t n_env,
                                                   std::size_t n_paths, std::size_t n_pairs, double h,
                                                   std::uint64_t master_seed);

struct ContinuousLltConfig {
  double beta = 0.0;
  int d = 3;
  std::vector<double> times;
  double a = 0.4;  // l_t = t^a rounded to the step grid
  double window_a = 1.0;
  std::vector<double> radial_fractions{0.0, 0.5, 1.0};  // y = x + f A sqrt(t) e_1
  std::size_t n_env = 0;
  std::size_t n_paths = 0;
  double h = 0.01;
  std::uint64_t master_seed = 0;
  double max_inner_cv2 = 4.0;  // feasibility gate on the bridge weights' squared CV
  bool force = false;
};

struct ContinuousLltRow {
  double t = 0.0;
  double l = 0.0;
  double y_radius = 0.0;
  double raw = 0.0;          // disorder mean of the squared estimated residual
  double noise_floor = 0.0;  // disorder mean of its inner-MC variance estimate
  double corrected = 0.0;    // raw - noise_floor, unbiased for Q(delta^2)
  double se = 0.0;
  std::size_t n_env = 0;
  double first_order = 0.0;  // lambda2-linear prediction of Q(delta^2); NaN unless d = 3
};

struct ContinuousLltScan {
  std::vector<ContinuousLltRow> rows;
  std::vector<ContinuousLltRow> sup_rows;  // per t, the row with the largest corrected value
  double inner_cv2 = 0.0;                  // pilot estimate used by the gate
};

ContinuousLltScan continuous_llt_residual_scan(const ContinuousLltConfig& cfg);

// l_t = t^a rounded to the grid of step h (at least one step).
double continuous_l(double t, double a, double h);

// E lens(|D|) for D ~ N(m e_1, s2 I) in R^3 and unit-volume balls.
double expected_lens_gaussian(double m, double s2);

// Leading term of Q(delta^2) as lambda2 -> 0 (continuum tube, d = 3): lambda2 times the
// space-time integral of (p_bridge - p_fwd 1{u <= l} - p_rev 1{u >= t - l})^2, where p is
// the probability that the tube at time u covers z. Marginals are Gaussian, so each
// product integrates to an expected lens volume.
double residual_l2_first_order(double beta, double t, double l, double y_radius);

struct BinningCheck {
  double binned_mean = 0.0;
  double binned_se = 0.0;
  std::size_t n_in_bin = 0;
  double bridge_mean = 0.0;
  double bridge_se = 0.0;
  double z_score = 0.0;
};

// Free paths whose endpoint falls within bin_radius of y, averaged weight, vs the
// bridge estimate of P^x(e_{0,t} | w_t = y) on the same environment.
BinningCheck bridge_binning_check(const PoissonEnvironment& env, const std::vector<double>& x,
                                  const std::vector<double>& y, double t, double beta, double h, double bin_radius,
                                  std::size_t n_free, std::size_t n_bridge, std::uint64_t seed);

}  // namespace polymerlab
