#include "polymerlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "polymerlab/errors.hpp"
#include "polymerlab/parallel.hpp"

namespace polymerlab {

namespace {

constexpr double kOverflowGuard = 1e300;

void guard(double max_value) {
  if (!(max_value <= kOverflowGuard)) throw NumericalGuardError("partition weight exceeded overflow guard");
}

}  // namespace

PartitionField::PartitionField(CubeGrid grid, int time, Direction direction, int reference_time)
    : grid_(std::move(grid)),
      time_(time),
      direction_(direction),
      reference_time_(reference_time),
      rows_(diamond_rows(grid_.dim(), time, time & 1)),
      total_(grid_.sum_rows(rows_)) {}

double PartitionField::weight(const Site& y) const {
  const Site off = y - origin();
  if (l1_norm(off) > time_ || !same_parity(time_, off)) return 0.0;
  return grid_.at(y);
}

void PartitionField::write_csv(std::ostream& os) const {
  for (int k = 0; k < grid_.dim(); ++k) os << 'x' << k + 1 << ',';
  os << "weight\n";
  os.precision(17);
  grid_.for_each(rows_, [&](const Site& y, double w) {
    for (int v : y) os << v << ',';
    os << w << '\n';
  });
}

ForwardSweep::ForwardSweep(const EnvironmentField& field, Site x0, int n_max, int start_time)
    : field_(&field), n_max_(n_max), start_(start_time) {
  if (n_max < 0 || start_time < 0) throw std::invalid_argument("forward sweep needs n >= 0 and start >= 0");
  if (static_cast<int>(x0.size()) != field.dim()) throw DimensionError("origin dimension does not match field");
  if (!field.window().contains_l1_ball(x0, n_max) || start_time + n_max > field.time_max())
    throw WindowTooSmallError("field window does not contain the forward L1 ball");
  cur_ = CubeGrid(field.dim(), x0, std::max(n_max, 1));
  next_ = CubeGrid(field.dim(), std::move(x0), std::max(n_max, 1));
  cur_[cur_.center_index()] = 1.0;
  rows_ = diamond_rows(field.dim(), 0, 0);
}

void ForwardSweep::advance() {
  if (time_ >= n_max_) throw std::out_of_range("forward sweep advanced past n_max");
  const int t = time_ + 1;
  rows_ = diamond_rows(field_->dim(), t, t & 1);
  const int env_time = start_ + t;
  const EnvironmentField& f = *field_;
  guard(transfer_step(cur_, next_, rows_, [&f, env_time](const std::array<int, kMaxDim>& p) { return f.row(env_time, p); }));
  std::swap(cur_, next_);
  time_ = t;
}

void ForwardSweep::advance_to(int n) {
  while (time_ < n) advance();
}

double ForwardSweep::weight(const Site& y) const {
  const Site off = y - cur_.center();
  if (l1_norm(off) > time_ || !same_parity(time_, off)) return 0.0;
  return cur_.at(y);
}

double ForwardSweep::total() const { return cur_.sum_rows(rows_); }

PartitionField ForwardSweep::snapshot() const {
  CubeGrid g(cur_.dim(), cur_.center(), std::max(time_, 1));
  cur_.for_each(rows_, [&](const Site& y, double w) { g[g.index(y)] = w; });
  return PartitionField(std::move(g), time_, Direction::forward, start_);
}

PartitionField forward_partition(const EnvironmentField& field, const Site& x0, int n, int start_time) {
  ForwardSweep sweep(field, x0, n, start_time);
  sweep.advance_to(n);
  return PartitionField(sweep.slice(), n, Direction::forward, start_time);
}

PartitionField reversed_partition(const EnvironmentField& field, const Site& y, int l, int anchor) {
  if (l < 1 || l > anchor) throw std::invalid_argument("reversed partition needs 1 <= l <= anchor");
  if (static_cast<int>(y.size()) != field.dim()) throw DimensionError("origin dimension does not match field");
  if (anchor > field.time_max() || !field.window().contains_l1_ball(y, l - 1))
    throw WindowTooSmallError("field window does not contain the reversed L1 ball");
  const int d = field.dim();
  CubeGrid cur(d, y, l);
  CubeGrid next(d, y, l);
  cur[cur.center_index()] = field.boltzmann(anchor, y);
  for (int j = 1; j <= l; ++j) {
    const auto rows = diamond_rows(d, j, j & 1);
    double m;
    if (j < l) {
      const int env_time = anchor - j;
      m = transfer_step(cur, next, rows, [&field, env_time](const std::array<int, kMaxDim>& p) { return field.row(env_time, p); });
    } else {
      m = transfer_step(cur, next, rows, unit_row_factor());
    }
    guard(m);
    std::swap(cur, next);
  }
  return PartitionField(std::move(cur), l, Direction::reversed, anchor);
}

CubeGrid reversed_totals(const EnvironmentField& field, const Site& center, int radius, int l, int anchor,
                         int parity) {
  if (l < 1 || l > anchor) throw std::invalid_argument("reversed totals need 1 <= l <= anchor");
  if (radius < 0) throw std::invalid_argument("reversed totals need radius >= 0");
  if (anchor > field.time_max() || !field.window().contains_l1_ball(center, radius + l - 1))
    throw WindowTooSmallError("field window does not contain the reversed region");
  const int d = field.dim();
  auto region_parity = [parity](int extra) { return parity < 0 ? -1 : (parity + extra) & 1; };

  CubeGrid cur(d, center, radius + l);
  CubeGrid next(d, center, radius + l);
  {
    const int env_time = anchor - l + 1;
    const auto rows = diamond_rows(d, radius + l - 1, region_parity(l - 1));
    std::array<int, kMaxDim> abs_prefix{};
    for (const DiamondRow& row : rows) {
      for (int k = 0; k + 1 < d; ++k)
        abs_prefix[static_cast<std::size_t>(k)] = center[static_cast<std::size_t>(k)] + row.prefix[static_cast<std::size_t>(k)];
      const auto g = field.row(env_time, abs_prefix);
      const std::ptrdiff_t base = cur.row_base(row);
      for (int o = row.lo; o <= row.hi; o += row.step) cur[base + o] = g(center[static_cast<std::size_t>(d - 1)] + o);
    }
  }
  for (int m = 2; m <= l; ++m) {
    const int env_time = anchor - l + m;
    const auto rows = diamond_rows(d, radius + l - m, region_parity(l - m));
    guard(transfer_step(cur, next, rows, [&field, env_time](const std::array<int, kMaxDim>& p) { return field.row(env_time, p); }));
    std::swap(cur, next);
  }
  return cur;
}

double conditional_density(const EnvironmentField& field, const KernelTable& kernel, const Site& x, const Site& y,
                           int n) {
  const Site off = y - x;
  const double q = (n <= kernel.n_max()) ? kernel(n, off) : 0.0;
  if (!(q > 0.0)) throw ParityError("endpoint not reachable: q^(n)(y - x) = 0");
  return forward_partition(field, x, n).weight(y) / q;
}

double conditional_density(const EnvironmentField& field, const Site& x, const Site& y, int n) {
  const Site off = y - x;
  if (n < 0 || l1_norm(off) > n || !same_parity(n, off)) throw ParityError("endpoint not reachable: q^(n)(y - x) = 0");
  return conditional_density(field, KernelTable(field.dim(), n), x, y, n);
}

PartitionField endpoint_law(const EnvironmentField& field, const Site& x0, int n) {
  ForwardSweep sweep(field, x0, n);
  sweep.advance_to(n);
  CubeGrid g = sweep.slice();
  const double z = sweep.total();
  for (double& v : g.data()) v /= z;
  return PartitionField(std::move(g), n, Direction::forward, 0);
}

double i_n_statistic(const ForwardSweep& sweep) {
  std::vector<double> sq;
  sweep.slice().for_each(sweep.rows(), [&](const Site&, double w) { sq.push_back(w * w); });
  const double z = sweep.total();
  return pairwise_sum(sq) / (z * z);
}

double i_n_statistic(const EnvironmentField& field, const Site& x0, int n) {
  ForwardSweep sweep(field, x0, n);
  sweep.advance_to(n);
  return i_n_statistic(sweep);
}

std::vector<InScanRow> i_n_scan(const DisorderSpec& spec, int d, std::vector<int> times, std::size_t n_seeds,
                                std::uint64_t master_seed) {
  if (times.empty() || n_seeds < 2) throw std::invalid_argument("I_n scan needs times and at least two seeds");
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.front() < 1) throw std::invalid_argument("I_n scan times must be positive");
  const int n_max = times.back();
  const Site x0 = origin(d);
  const Box box = Box::centered(x0, n_max);
  std::vector<std::vector<double>> vals(times.size(), std::vector<double>(n_seeds));
  parallel_for(n_seeds, [&](std::size_t s) {
    const EnvironmentField field(spec, rng::derive_seed(master_seed, s), box, n_max);
    ForwardSweep sweep(field, x0, n_max);
    for (std::size_t k = 0; k < times.size(); ++k) {
      sweep.advance_to(times[k]);
      vals[k][s] = i_n_statistic(sweep);
    }
  });
  std::vector<InScanRow> rows;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const MeanSe m = mean_se(vals[k]);
    const double scale = std::pow(static_cast<double>(times[k]), d / 2.0);
    rows.push_back({times[k], m.mean, m.se, m.mean * scale, m.se * scale, n_seeds});
  }
  return rows;
}

}  // namespace polymerlab
