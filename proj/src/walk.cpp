#include "polymerlab/walk.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "polymerlab/errors.hpp"

namespace polymerlab {

KernelTable::KernelTable(int d, int n_max) : d_(d), n_max_(n_max) {
  if (d < 1 || d > kMaxDim) throw DimensionError("kernel table dimension out of range");
  if (n_max < 0) throw std::invalid_argument("kernel table needs n_max >= 0");

  CubeGrid cur(d, origin(d), std::max(n_max, 1));
  CubeGrid next(d, origin(d), std::max(n_max, 1));
  cur[cur.center_index()] = 1.0;

  auto store = [&](const CubeGrid& g, int n) {
    const std::size_t extent = static_cast<std::size_t>(n) + 1;
    std::size_t size = 1;
    for (int k = 0; k < d; ++k) size *= extent;
    std::vector<double> slice(size, 0.0);
    Site y(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t rem = i;
      for (int k = d - 1; k >= 0; --k) {
        y[static_cast<std::size_t>(k)] = static_cast<int>(rem % extent);
        rem /= extent;
      }
      if (l1_norm(y) <= n && same_parity(n, y)) slice[i] = g.at(y);
    }
    slices_.push_back(std::move(slice));
  };

  sums_.push_back(1.0);
  store(cur, 0);
  for (int n = 1; n <= n_max; ++n) {
    const auto rows = diamond_rows(d, n, n & 1);
    transfer_step(cur, next, rows, unit_row_factor());
    const double s = next.sum_rows(rows);
    if (std::fabs(s - 1.0) > 1e-12)
      throw NumericalGuardError("kernel slice " + std::to_string(n) + " lost normalization");
    sums_.push_back(s);
    store(next, n);
    std::swap(cur, next);
  }
}

std::size_t KernelTable::orthant_index(int n, const Site& x) const {
  const std::size_t extent = static_cast<std::size_t>(n) + 1;
  std::size_t i = 0;
  for (int v : x) i = i * extent + static_cast<std::size_t>(std::abs(v));
  return i;
}

double KernelTable::operator()(int n, const Site& x) const {
  if (n < 0 || n > n_max_) throw std::out_of_range("kernel table queried beyond n_max");
  if (static_cast<int>(x.size()) != d_) throw DimensionError("site dimension does not match kernel table");
  if (l1_norm(x) > n || !same_parity(n, x)) return 0.0;
  return slices_[static_cast<std::size_t>(n)][orthant_index(n, x)];
}

double q_exact(int d, int n, const Site& x) {
  if (n < 0) throw std::invalid_argument("q_exact needs n >= 0");
  if (l1_norm(x) > n || !same_parity(n, x)) return 0.0;
  return KernelTable(d, n)(n, x);
}

double q_bar(int d, int n, const Site& x) {
  if (n < 1) throw std::invalid_argument("q_bar needs n >= 1");
  const double dn = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  return 2.0 * std::pow(dn / (2.0 * std::numbers::pi * nn), 0.5 * dn) *
         std::exp(-dn * static_cast<double>(l2_squared(x)) / (2.0 * nn));
}

namespace {

// Visits every x in the orthant box [0, n]^d.
template <class F>
void for_each_orthant(int d, int n, F&& f) {
  Site x = origin(d);
  while (true) {
    f(static_cast<const Site&>(x));
    int k = d - 1;
    while (k >= 0 && x[static_cast<std::size_t>(k)] == n) {
      x[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) return;
    ++x[static_cast<std::size_t>(k)];
  }
}

}  // namespace

std::vector<LltErrorRow> llt_error_scan(const KernelTable& table) {
  const int d = table.dim();
  std::vector<LltErrorRow> rows;
  for (int n = 1; n <= table.n_max(); ++n) {
    LltErrorRow row;
    row.n = n;
    row.argmax = origin(d);
    for_each_orthant(d, n, [&](const Site& x) {
      if (!same_parity(n, x)) return;
      const double e = std::fabs(table(n, x) - q_bar(d, n, x));
      if (e > row.sup_error) {
        row.sup_error = e;
        row.argmax = x;
      }
    });
    row.scaled_error = row.sup_error * std::pow(static_cast<double>(n), 0.5 * d + 1.0);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LltErrorRow> llt_error_scan(int d, int n_max) { return llt_error_scan(KernelTable(d, n_max)); }

std::vector<LltLowerBoundRow> llt_lower_bound_scan(const KernelTable& table, int n_min, double window_a) {
  const int d = table.dim();
  std::vector<LltLowerBoundRow> rows;
  for (int n = std::max(n_min, 1); n <= table.n_max(); ++n) {
    const double r2 = window_a * window_a * n;
    LltLowerBoundRow row;
    row.n = n;
    row.min_scaled = INFINITY;
    for_each_orthant(d, n, [&](const Site& x) {
      if (!same_parity(n, x) || static_cast<double>(l2_squared(x)) > r2) return;
      const double v = table(n, x) * std::pow(static_cast<double>(n), 0.5 * d);
      if (v < row.min_scaled) {
        row.min_scaled = v;
        row.argmin = x;
      }
    });
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_llt_csv(std::ostream& os, const std::vector<LltErrorRow>& rows) {
  os << "n,sup_error,scaled_error,argmax_site\n";
  os.precision(17);
  for (const auto& r : rows) os << r.n << ',' << r.sup_error << ',' << r.scaled_error << ',' << format_site(r.argmax) << '\n';
}

std::vector<double> return_series_terms(int d, int n_terms) {
  if (d < 1) throw DimensionError("return series needs d >= 1");
  const int m_max = 2 * n_terms;
  std::vector<double> lgam(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) lgam[static_cast<std::size_t>(m)] = std::lgamma(m + 1.0);

  // One-dimensional return probabilities, then add one axis at a time.
  std::vector<double> r1(static_cast<std::size_t>(m_max) + 1, 0.0);
  r1[0] = 1.0;
  for (int m = 0; m + 2 <= m_max; m += 2)
    r1[static_cast<std::size_t>(m) + 2] = r1[static_cast<std::size_t>(m)] * (m + 1.0) / (m + 2.0);

  std::vector<double> prev = r1;
  for (int k = 2; k <= d; ++k) {
    const double log_p = std::log(1.0 / k);
    const double log_q = std::log((k - 1.0) / k);
    std::vector<double> cur(static_cast<std::size_t>(m_max) + 1, 0.0);
    for (int m = 0; m <= m_max; m += 2) {
      double s = 0.0;
      for (int i = 0; i <= m; i += 2) {
        const double lp = lgam[static_cast<std::size_t>(m)] - lgam[static_cast<std::size_t>(i)] -
                          lgam[static_cast<std::size_t>(m - i)] + i * log_p + (m - i) * log_q;
        s += std::exp(lp) * r1[static_cast<std::size_t>(i)] * prev[static_cast<std::size_t>(m - i)];
      }
      cur[static_cast<std::size_t>(m)] = s;
    }
    prev = std::move(cur);
  }
  std::vector<double> out(static_cast<std::size_t>(n_terms) + 1);
  for (int n = 0; n <= n_terms; ++n) out[static_cast<std::size_t>(n)] = prev[2 * static_cast<std::size_t>(n)];
  return out;
}

namespace {

// sum_{n > N} n^{-s} by Euler-Maclaurin at N (s > 1, N large).
double zeta_tail(double s, double big_n) {
  const double head = std::pow(big_n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(big_n, -s) +
                      s * std::pow(big_n, -s - 1.0) / 12.0 -
                      s * (s + 1.0) * (s + 2.0) * std::pow(big_n, -s - 3.0) / 720.0;
  return head - std::pow(big_n, -s);
}

ReturnProbability series_return_probability(int d) {
  const double s = 0.5 * d;
  const double lead = 2.0 * std::pow(d / (4.0 * std::numbers::pi), s);
  for (int n_terms = 250;; n_terms *= 2) {
    const auto u = return_series_terms(d, n_terms);
    std::vector<double> terms(u.begin(), u.end());
    double g = pairwise_sum(terms);

    // Leading Gaussian tail plus a bound on the O(n^{-d/2-1}) remainder,
    // with the remainder constant estimated on the upper half of the range.
    double c = 0.0;
    for (int n = n_terms / 2; n <= n_terms; ++n) {
      const double diff = std::fabs(u[static_cast<std::size_t>(n)] - lead * std::pow(n, -s));
      c = std::max(c, diff * std::pow(n, s + 1.0));
    }
    g += lead * zeta_tail(s, n_terms);
    const double g_bound = 2.0 * c * zeta_tail(s + 1.0, n_terms);
    const double pi_bound = g_bound / (g * g);
    if (pi_bound < 1e-6 || n_terms >= 64000) return {1.0 - 1.0 / g, pi_bound, g};
  }
}

// e^{-x} I_0(x).
double scaled_bessel_i0(double x) {
  if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 10; ++k) {
    term *= (2.0 * k + 1.0) * (2.0 * k + 1.0) / (8.0 * (k + 1.0) * x);
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

template <int Points>
double green_integral(int d) {
  using boost::math::quadrature::gauss;
  auto f = [d](double s) { return std::pow(scaled_bessel_i0(s / d), d); };
  double total = gauss<double, Points>::integrate(f, 0.0, 1.0);
  double a = 1.0;
  constexpr int kPanels = 44;
  for (int k = 0; k < kPanels; ++k, a *= 2.0) total += gauss<double, Points>::integrate(f, a, 2.0 * a);
  // Asymptotic tail: (2 pi s / d)^{-d/2} (1 + d^2 / (8 s)).
  const double h = 0.5 * d;
  const double c = std::pow(2.0 * std::numbers::pi / d, -h);
  total += c * (std::pow(a, 1.0 - h) / (h - 1.0) + d * d / 8.0 * std::pow(a, -h) / h);
  return total;
}

}  // namespace

ReturnProbability return_probability(int d, ReturnMethod method) {
  if (d < 3) throw DimensionError("return probability needs d >= 3 (the walk is recurrent for d <= 2)");
  if (method == ReturnMethod::series) return series_return_probability(d);
  // G(0) = (2 pi)^{-d} int_{[-pi,pi]^d} dtheta / (1 - phi(theta))
  //      = int_0^inf (e^{-s/d} I_0(s/d))^d ds.
  const double g = green_integral<30>(d);
  const double g_coarse = green_integral<20>(d);
  return {1.0 - 1.0 / g, std::fabs(g - g_coarse) / (g * g), g};
}

}  // namespace polymerlab
