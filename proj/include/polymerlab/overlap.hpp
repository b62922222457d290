#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polymerlab/env.hpp"
#include "polymerlab/lattice.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

// E[exp(lambda2 N_{k,n})] for two independent walks started together, where
// N_{k,n} = #{k <= j <= n : w_j = w~_j}. Exact, via the difference walk on Z^d.
double pair_expectation(int d, int n, double lambda2, int k = 1);

// E[exp(lambda2 N_{1,m})] for m = 0..n_max from one difference-chain pass.
std::vector<double> pair_expectation_sequence(int d, int n_max, double lambda2);

// P(N_{k,n} = 0).
double no_meeting_probability(int d, int n, int k = 1);

// Exact law of N_{k,n}: entry c is P(N_{k,n} = c), c = 0..n.
std::vector<double> meeting_count_law(int d, int n, int k = 1);

// Full two-replica chain (w_j, w~_j) on Z^d x Z^d from a common origin. Stores the
// joint law of the pair and either the meeting count N_{k,j} (track_counts) or the
// weight exp(lambda2 N_{k,j}). Memory grows like j^{2d}; intended for small j.
class PairChainState {
 public:
  PairChainState(int d, double lambda2, int range_start = 1, bool track_counts = false,
                 std::size_t max_cells = std::size_t{1} << 26);

  int time() const { return time_; }
  int dim() const { return d_; }
  bool tracks_counts() const { return track_counts_; }
  int count_levels() const { return track_counts_ ? time_ + 1 : 1; }
  void advance();

  // Sites with |x|_1 <= time and time <-> x.
  const std::vector<Site>& sites() const { return sites_; }
  double mass(std::size_t a, std::size_t b, int count = 0) const;
  double total() const;
  // E[exp(lambda2 N)] (counts are folded with the chain's lambda2 when tracked).
  double exp_moment() const;

 private:
  std::size_t cell(std::size_t a, std::size_t b, int c) const {
    return (static_cast<std::size_t>(c) * sites_.size() + a) * sites_.size() + b;
  }

  int d_;
  double lambda2_;
  int range_start_;
  bool track_counts_;
  std::size_t max_cells_;
  int time_ = 0;
  std::vector<Site> sites_;
  std::vector<double> dist_;
};

// Bridge-pinned pair expectations
//   P^x (x) P^x(exp(lambda2 N_{1,n}) | w_n = w~_n = y)
// for every n <= n_max and every y, by renewal over meeting times.
class ConditionedPairTable {
 public:
  ConditionedPairTable(int d, int n_max, double lambda2);

  int dim() const { return d_; }
  int n_max() const { return n_max_; }
  // Conditioned expectation for endpoint offset y - x. Throws ParityError when q^(n)(offset) = 0.
  double operator()(int n, const Site& offset) const;
  // Unconditioned pinned mass P (x) P(exp(lambda2 N_{1,n}); w_n = w~_n = offset).
  double pinned_mass(int n, const Site& offset) const;

 private:
  int d_;
  int n_max_;
  double lambda2_;
  std::vector<CubeGrid> q2_;  // q^(m)(.)^2
  std::vector<CubeGrid> s_;   // pinned mass without the final meeting factor
};

double conditioned_pair_expectation(int d, int n, double lambda2, const Site& x, const Site& y);

struct ConditionedScanRow {
  int n = 0;
  double sup = 0.0;
  Site argsup;
  double inf = 0.0;
  std::size_t n_sites = 0;
};

struct ConditionedScan {
  std::vector<ConditionedScanRow> rows;
  double constant = 0.0;  // sup over all scanned (n, y)
};

// Scan over n in `times` and all y <-> n with |y - x| <= A sqrt(n) (Euclidean).
ConditionedScan conditioned_pair_scan(int d, const std::vector<int>& times, double lambda2, double window_a);

struct MomentCheck {
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double exact = 0.0;
  double z_score = 0.0;
  std::size_t n_seeds = 0;
};

// Monte Carlo Q(Z_n^2) over independent environments vs the exact pair expectation.
MomentCheck second_moment_identity_check(const DisorderSpec& spec, int d, int n, std::size_t n_seeds,
                                         std::uint64_t master_seed);

struct OverlapHistogram {
  int n = 0;
  std::vector<std::uint64_t> counts;  // counts[c] = #pairs with N_{1,n} = c
  std::uint64_t n_pairs = 0;

  double probability(int c) const;
  // Estimate of E[exp(lambda2 N)] with its standard error.
  MeanSe exp_moment(double lambda2) const;
};

// Samples n_pairs independent pairs of n-step walks. Pair i uses stream (seed, i).
OverlapHistogram overlap_mc(int d, int n, std::uint64_t n_pairs, std::uint64_t seed);

// Nonnegative functional of the meeting count of the first m pair steps.
struct CountFunctional {
  std::string name;
  std::function<double(int)> f;

  static CountFunctional one();
  static CountFunctional exp_overlap(double lambda2);
  static CountFunctional hits_at_least(int k);
};

struct AbsContinuityRow {
  int n = 0;
  Site y;
  double lhs = 0.0;           // E[f | w_n = w~_n = y]
  double rhs = 0.0;           // E[f]
  double kernel_ratio = 0.0;  // max_u q^(n-m)(y - u)^2 / q^(n)(y)^2
};

struct AbsContinuityResult {
  std::vector<AbsContinuityRow> rows;
  double constant = 0.0;  // C(A, d): sup of kernel_ratio * (1 - t)^d over the scan
  bool ok = false;        // lhs <= C / (1 - t)^d * rhs on every row
  std::vector<AbsContinuityRow> violations;
};

// Exact check of the bridge absolute-continuity bound for f of the first floor(n t)
// pair steps, over all y <-> n with |y| <= A sqrt(n), for each n in `times`.
AbsContinuityResult bridge_abs_continuity_check(int d, const std::vector<int>& times, double t, double window_a,
                                                const CountFunctional& f);

}  // namespace polymerlab
