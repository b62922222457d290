#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "polymerlab/env.hpp"
#include "polymerlab/lattice.hpp"

namespace polymerlab {

struct LltScanConfig {
  DisorderSpec spec = DisorderSpec::gaussian(0.0, 1.0, 0.0);
  int d = 3;
  std::vector<int> times;
  double a = 0.4;         // l_n = floor(n^a)
  double window_a = 1.0;  // |y - x| <= A sqrt(n), Euclidean
  std::size_t n_seeds = 0;
  int zinf_proxy_time = 64;
  int grid_stride = 1;  // keep every site (1) or a hash-thinned subset plus axis points
  std::uint64_t master_seed = 0;
  bool force = false;  // run outside the L2 region
  Site x;              // start point; empty means the origin
};

// floor(n^a), guarded against rounding just below an integer.
int l_of(int n, double a);

// Throws ValidationError on malformed parameters (including l_n >= n/2) and
// RegionRefusal outside the L2 region unless cfg.force is set.
void validate(const LltScanConfig& cfg, bool needs_proxy);

// y - x offsets scanned at time n: all y <-> n with |y - x|_2 <= A sqrt(n); with
// stride k > 1 only sites whose hash is 0 mod k, plus the points on the axes.
// The set for a larger A contains the set for a smaller A.
std::vector<Site> window_grid(int d, int n, double window_a, int stride);

// delta_n^{x,y} = P^x(e_{1,n} | w_n = y) - P^x(e_{1,l}) P^y(e<-_{1,l}), the reversed
// factor anchored at time n.
double sinai_residual(const EnvironmentField& field, const Site& x, const Site& y, int n, int l);

// Exact Q(delta_n^{x,y}^2), which depends on the disorder only through lambda2:
//   Q(cond^2) - 2 Q(cond Z_l R_l) + Q(Z_l^2) Q(R_l^2),
// each term a two-replica expectation (pinned bridges, bridge vs free, free).
std::vector<double> residual_l2_exact(int d, int n, int l, double lambda2, const std::vector<Site>& y_offsets);

struct ResidualCell {
  int n = 0;
  int l = 0;
  Site y_offset;
  double q_hat = 0.0;  // disorder mean of delta^2 (or |delta bar|)
  double se = 0.0;
  std::size_t n_seeds = 0;
};

struct ResidualSupRow {
  int n = 0;
  int l = 0;
  Site argsup;
  double sup = 0.0;
  double se = 0.0;
  std::size_t n_sites = 0;
};

struct LltScanResult {
  std::vector<ResidualCell> cells;
  std::vector<ResidualSupRow> sup_rows;
};

struct CombinedLltScan {
  LltScanResult l2;    // Q(delta^2)
  LltScanResult zinf;  // Q(|delta bar|) with Z_N standing in for Z_infinity
};

// One pass per environment serving both residuals. The Z_infinity proxy is Z_N^x,
// N = cfg.zinf_proxy_time, on the same environment.
CombinedLltScan llt_scan(const LltScanConfig& cfg, bool with_proxy = true);
LltScanResult residual_l2_scan(const LltScanConfig& cfg);
LltScanResult zinf_residual_l1_scan(const LltScanConfig& cfg);

void write_residual_csv(std::ostream& os, const LltScanResult& result);

struct ProxyCheck {
  int n = 0;
  double diff2 = 0.0;  // Q(|Z_N - Z_2N|^2)
  double diff2_se = 0.0;
  double z2 = 0.0;  // Q(Z_N^2)
  double z2_se = 0.0;
  double ratio = 0.0;
  double exact_ratio = 0.0;  // (E e^{l2 N_{1,2N}} - E e^{l2 N_{1,N}}) / E e^{l2 N_{1,N}}
  std::size_t n_seeds = 0;
};

ProxyCheck zinf_proxy_check(const DisorderSpec& spec, int d, int n, std::size_t n_seeds, std::uint64_t master_seed);

struct TailCheck {
  double mc_mean = 0.0;  // Q((P^y(e<-_{1,l}) - P^y(e<-_{1,n}))^2)
  double mc_se = 0.0;
  double exact = 0.0;  // e^{l2} (E e^{l2 N_{1,n-1}} - E e^{l2 N_{1,l-1}})
  double z_score = 0.0;
  std::size_t n_seeds = 0;
};

TailCheck reversed_tail_equivalence_check(const DisorderSpec& spec, int d, int n, int l, std::size_t n_seeds,
                                          std::uint64_t master_seed);

}  // namespace polymerlab
