#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "polymerlab/stats.hpp"

namespace polymerlab {

inline constexpr int kMaxDim = 8;

// A point of Z^d; the vector length is the dimension.
using Site = std::vector<int>;

Site origin(int d);
Site unit_vector(int d, int axis, int sign = 1);
Site operator+(const Site& a, const Site& b);
Site operator-(const Site& a, const Site& b);
int l1_norm(const Site& x);
long long l2_squared(const Site& x);

// n <-> x: n + sum_k x_k is even.
bool same_parity(long long n, const Site& x);

std::string format_site(const Site& x);  // "1;0;-2"
Site parse_site(const std::string& text);

// Closed axis-aligned lattice box [lo, hi].
struct Box {
  Site lo;
  Site hi;

  static Box centered(const Site& center, int half_width);
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Site& x) const;
  // Every site within L1 distance r of center lies in the box.
  bool contains_l1_ball(const Site& center, int r) const;
};

// All sites o with |o|_1 <= radius (and sum(o) = parity mod 2 unless parity < 0)
// share a prefix o_0..o_{d-2}; the last coordinate runs lo, lo+step, ..., hi.
struct DiamondRow {
  std::array<int, kMaxDim> prefix{};
  int lo = 0;
  int hi = 0;
  int step = 1;
};

std::vector<DiamondRow> diamond_rows(int d, int radius, int parity);
std::size_t diamond_size(int d, int radius, int parity);

// Dense cube of half-width `radius` around `center`, with a one-site zero pad so
// that neighbors of any cube site are addressable. Last coordinate is contiguous.
class CubeGrid {
 public:
  CubeGrid() = default;
  CubeGrid(int d, Site center, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  const Site& center() const { return center_; }
  std::ptrdiff_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  std::ptrdiff_t center_index() const { return center_index_; }

  bool in_cube(const Site& y) const;
  std::ptrdiff_t index(const Site& y) const;  // y must be in the cube
  // Index of the site center + (prefix, last) for a row.
  std::ptrdiff_t row_base(const DiamondRow& row) const;

  double at(const Site& y) const { return in_cube(y) ? data_[static_cast<std::size_t>(index(y))] : 0.0; }
  double& operator[](std::ptrdiff_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::ptrdiff_t i) const { return data_[static_cast<std::size_t>(i)]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  void fill(double v);

  // Deterministic sum over the given rows (row sums, then pairwise).
  double sum_rows(std::span<const DiamondRow> rows) const;

  // Visits (site, value) for every site of the rows.
  template <class F>
  void for_each(std::span<const DiamondRow> rows, F&& f) const {
    Site y(static_cast<std::size_t>(d_));
    for (const DiamondRow& row : rows) {
      for (int k = 0; k + 1 < d_; ++k) y[static_cast<std::size_t>(k)] = center_[static_cast<std::size_t>(k)] + row.prefix[static_cast<std::size_t>(k)];
      const std::ptrdiff_t base = row_base(row);
      for (int o = row.lo; o <= row.hi; o += row.step) {
        y[static_cast<std::size_t>(d_ - 1)] = center_[static_cast<std::size_t>(d_ - 1)] + o;
        f(static_cast<const Site&>(y), data_[static_cast<std::size_t>(base + o)]);
      }
    }
  }

 private:
  int d_ = 0;
  int radius_ = 0;
  Site center_;
  std::array<std::ptrdiff_t, kMaxDim> strides_{};
  std::ptrdiff_t center_index_ = 0;
  std::vector<double> data_;
};

// Row-wise transfer step of the nearest-neighbour walk:
//   out(y) = factor(y) * (1/2d) * sum_{|e|_1 = 1} in(y + e)
// for every y on `rows` (offsets from out.center(), which must equal in.center()).
// `make_row_factor(absolute_prefix)` returns a callable last_coord -> factor;
// the rows are processed in parallel. Returns the largest value written.
template <class MakeRowFactor>
double transfer_step(const CubeGrid& in, CubeGrid& out, std::span<const DiamondRow> rows,
                     MakeRowFactor&& make_row_factor) {
  const int d = in.dim();
  const double inv = 1.0 / (2.0 * d);
  const auto n_rows = static_cast<std::ptrdiff_t>(rows.size());
  double max_value = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : max_value)
  for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
    const DiamondRow& row = rows[static_cast<std::size_t>(r)];
    std::array<int, kMaxDim> abs_prefix{};
    for (int k = 0; k + 1 < d; ++k)
      abs_prefix[static_cast<std::size_t>(k)] = in.center()[static_cast<std::size_t>(k)] + row.prefix[static_cast<std::size_t>(k)];
    auto factor = make_row_factor(abs_prefix);
    const int last_center = in.center()[static_cast<std::size_t>(d - 1)];
    const std::ptrdiff_t base = in.row_base(row);
    for (int o = row.lo; o <= row.hi; o += row.step) {
      const std::ptrdiff_t i = base + o;
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += in[i + in.stride(k)] + in[i - in.stride(k)];
      const double v = factor(last_center + o) * s * inv;
      out[i] = v;
      if (v > max_value) max_value = v;
    }
  }
  return max_value;
}

struct UnitFactor {
  constexpr double operator()(int) const noexcept { return 1.0; }
};

inline auto unit_row_factor() {
  return [](const std::array<int, kMaxDim>&) { return UnitFactor{}; };
}

}  // namespace polymerlab
