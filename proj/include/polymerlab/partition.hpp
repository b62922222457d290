#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "polymerlab/env.hpp"
#include "polymerlab/lattice.hpp"
#include "polymerlab/walk.hpp"

namespace polymerlab {

enum class Direction { forward, reversed };

// One time slice of point-to-point polymer weights.
//   forward:  weight(y) = P^x0(e_{start+1, start+n} 1{w_n = y})
//   reversed: weight(z) = P^x0(prod_{j<n} e^{beta eta(anchor - j, w_j) - lambda} 1{w_n = z})
class PartitionField {
 public:
  PartitionField(CubeGrid grid, int time, Direction direction, int reference_time);

  const Site& origin() const { return grid_.center(); }
  int time() const { return time_; }
  Direction direction() const { return direction_; }
  // Start time (forward) or anchor time (reversed).
  int reference_time() const { return reference_time_; }

  double weight(const Site& y) const;
  double total() const { return total_; }
  std::span<const DiamondRow> support() const { return rows_; }
  const CubeGrid& grid() const { return grid_; }

  // Site coordinates and weight, one row per support site.
  void write_csv(std::ostream& os) const;

 private:
  CubeGrid grid_;
  int time_;
  Direction direction_;
  int reference_time_;
  std::vector<DiamondRow> rows_;
  double total_;
};

// Forward transfer-matrix sweep W_0 = delta_x0,
//   W_{j+1}(y) = e^{beta eta(start + j + 1, y) - lambda} * (1/2d) sum_{|z - y|_1 = 1} W_j(z),
// advanced one slice at a time so that several times can be read from one pass.
class ForwardSweep {
 public:
  // Throws WindowTooSmallError unless the field covers the L1 ball of radius
  // n_max around x0 over times start+1 .. start+n_max.
  ForwardSweep(const EnvironmentField& field, Site x0, int n_max, int start_time = 0);

  int time() const { return time_; }
  void advance();
  void advance_to(int n);

  double weight(const Site& y) const;
  double total() const;
  const CubeGrid& slice() const { return cur_; }
  std::span<const DiamondRow> rows() const { return rows_; }
  PartitionField snapshot() const;

 private:
  const EnvironmentField* field_;
  int n_max_;
  int start_;
  int time_ = 0;
  CubeGrid cur_;
  CubeGrid next_;
  std::vector<DiamondRow> rows_;
};

PartitionField forward_partition(const EnvironmentField& field, const Site& x0, int n, int start_time = 0);

// Time-reversed partition from y: path step j reads eta(anchor - j, w_j) for
// j = 0..l-1. Requires 1 <= l <= anchor.
PartitionField reversed_partition(const EnvironmentField& field, const Site& y, int l, int anchor);

// P^y(e<-_{1,l}) anchored at `anchor` for every y with |y - center|_1 <= radius
// (restricted to sum(y - center) = parity mod 2 when parity >= 0), computed in one
// pass by the recursion H_m = e^{beta eta(anchor - l + m, .) - lambda} * P H_{m-1}, H_0 = 1.
CubeGrid reversed_totals(const EnvironmentField& field, const Site& center, int radius, int l, int anchor,
                         int parity = -1);

// P^x(e_{1,n} | w_n = y) = W_n(y) / q^(n)(y - x). Throws ParityError when q = 0.
double conditional_density(const EnvironmentField& field, const Site& x, const Site& y, int n);
double conditional_density(const EnvironmentField& field, const KernelTable& kernel, const Site& x, const Site& y,
                           int n);

// mu_n^x(w_n = .): forward weights divided by Z_n.
PartitionField endpoint_law(const EnvironmentField& field, const Site& x0, int n);

// I_n = sum_y mu_n(w_n = y)^2.
double i_n_statistic(const EnvironmentField& field, const Site& x0, int n);
double i_n_statistic(const ForwardSweep& sweep);

struct InScanRow {
  int n = 0;
  double mean = 0.0;  // disorder mean of I_n
  double se = 0.0;
  double scaled = 0.0;  // mean * n^(d/2)
  double scaled_se = 0.0;
  std::size_t n_seeds = 0;
};

// Disorder-averaged I_n at each time, one sweep per seed up to max(times).
std::vector<InScanRow> i_n_scan(const DisorderSpec& spec, int d, std::vector<int> times, std::size_t n_seeds,
                                std::uint64_t master_seed);

}  // namespace polymerlab
