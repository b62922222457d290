#include "polymerlab/lattice.hpp"

#include <cstdlib>
#include <sstream>

#include "polymerlab/errors.hpp"

namespace polymerlab {

Site origin(int d) { return Site(static_cast<std::size_t>(d), 0); }

Site unit_vector(int d, int axis, int sign) {
  Site e = origin(d);
  e[static_cast<std::size_t>(axis)] = sign;
  return e;
}

Site operator+(const Site& a, const Site& b) {
  Site r(a);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] += b[k];
  return r;
}

Site operator-(const Site& a, const Site& b) {
  Site r(a);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= b[k];
  return r;
}

int l1_norm(const Site& x) {
  int s = 0;
  for (int v : x) s += std::abs(v);
  return s;
}

long long l2_squared(const Site& x) {
  long long s = 0;
  for (int v : x) s += static_cast<long long>(v) * v;
  return s;
}

bool same_parity(long long n, const Site& x) {
  long long s = n;
  for (int v : x) s += v;
  return (s & 1LL) == 0;
}

std::string format_site(const Site& x) {
  std::ostringstream os;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (k) os << ';';
    os << x[k];
  }
  return os.str();
}

Site parse_site(const std::string& text) {
  Site x;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ';')) x.push_back(std::stoi(part));
  return x;
}

Box Box::centered(const Site& center, int half_width) {
  Box b{center, center};
  for (std::size_t k = 0; k < center.size(); ++k) {
    b.lo[k] -= half_width;
    b.hi[k] += half_width;
  }
  return b;
}

bool Box::contains(const Site& x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  return true;
}

bool Box::contains_l1_ball(const Site& center, int r) const {
  if (center.size() != lo.size()) return false;
  for (std::size_t k = 0; k < center.size(); ++k)
    if (center[k] - r < lo[k] || center[k] + r > hi[k]) return false;
  return true;
}

namespace {

void emit_rows(int d, int axis, int budget, int prefix_sum, int parity, DiamondRow& cur,
               std::vector<DiamondRow>& out) {
  if (axis == d - 1) {
    DiamondRow row = cur;
    if (parity < 0) {
      row.lo = -budget;
      row.hi = budget;
      row.step = 1;
    } else {
      const int want = ((parity - prefix_sum) % 2 + 2) % 2;
      row.lo = ((budget % 2) == want) ? -budget : -budget + 1;
      row.hi = -row.lo;
      row.step = 2;
      if (row.lo > row.hi) return;
    }
    out.push_back(row);
    return;
  }
  for (int v = -budget; v <= budget; ++v) {
    cur.prefix[static_cast<std::size_t>(axis)] = v;
    emit_rows(d, axis + 1, budget - std::abs(v), prefix_sum + v, parity, cur, out);
  }
  cur.prefix[static_cast<std::size_t>(axis)] = 0;
}

}  // namespace

std::vector<DiamondRow> diamond_rows(int d, int radius, int parity) {
  if (d < 1 || d > kMaxDim) throw DimensionError("dimension out of supported range");
  std::vector<DiamondRow> rows;
  if (radius < 0) return rows;
  DiamondRow cur;
  emit_rows(d, 0, radius, 0, parity < 0 ? -1 : (parity & 1), cur, rows);
  return rows;
}

std::size_t diamond_size(int d, int radius, int parity) {
  std::size_t n = 0;
  for (const DiamondRow& r : diamond_rows(d, radius, parity))
    n += static_cast<std::size_t>((r.hi - r.lo) / r.step + 1);
  return n;
}

CubeGrid::CubeGrid(int d, Site center, int radius) : d_(d), radius_(radius), center_(std::move(center)) {
  if (d < 1 || d > kMaxDim) throw DimensionError("dimension out of supported range");
  if (static_cast<int>(center_.size()) != d) throw DimensionError("center has wrong dimension");
  const std::ptrdiff_t extent = 2 * static_cast<std::ptrdiff_t>(radius) + 3;
  std::ptrdiff_t s = 1;
  for (int k = d - 1; k >= 0; --k) {
    strides_[static_cast<std::size_t>(k)] = s;
    s *= extent;
  }
  center_index_ = 0;
  for (int k = 0; k < d; ++k) center_index_ += (radius + 1) * strides_[static_cast<std::size_t>(k)];
  data_.assign(static_cast<std::size_t>(s), 0.0);
}

bool CubeGrid::in_cube(const Site& y) const {
  if (static_cast<int>(y.size()) != d_) return false;
  for (int k = 0; k < d_; ++k)
    if (std::abs(y[static_cast<std::size_t>(k)] - center_[static_cast<std::size_t>(k)]) > radius_) return false;
  return true;
}

std::ptrdiff_t CubeGrid::index(const Site& y) const {
  std::ptrdiff_t i = center_index_;
  for (int k = 0; k < d_; ++k)
    i += (y[static_cast<std::size_t>(k)] - center_[static_cast<std::size_t>(k)]) * strides_[static_cast<std::size_t>(k)];
  return i;
}

std::ptrdiff_t CubeGrid::row_base(const DiamondRow& row) const {
  std::ptrdiff_t i = center_index_;
  for (int k = 0; k + 1 < d_; ++k) i += row.prefix[static_cast<std::size_t>(k)] * strides_[static_cast<std::size_t>(k)];
  return i;
}

void CubeGrid::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double CubeGrid::sum_rows(std::span<const DiamondRow> rows) const {
  std::vector<double> sums;
  sums.reserve(rows.size());
  for (const DiamondRow& row : rows) {
    const std::ptrdiff_t base = row_base(row);
    double s = 0.0;
    for (int o = row.lo; o <= row.hi; o += row.step) s += data_[static_cast<std::size_t>(base + o)];
    sums.push_back(s);
  }
  return pairwise_sum(sums);
}

}  // namespace polymerlab
