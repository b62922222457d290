#pragma once

#include <iosfwd>
#include <vector>

#include "polymerlab/lattice.hpp"

namespace polymerlab {

// Exact n-step laws q^(n)(x) of the simple random walk on Z^d for n <= n_max.
// Slices are computed by the transfer DP over the reachable L1 ball and stored
// on the closed positive orthant (q is invariant under sign flips).
class KernelTable {
 public:
  // Throws NumericalGuardError if a slice sum deviates from 1 by more than 1e-12.
  KernelTable(int d, int n_max);

  int dim() const { return d_; }
  int n_max() const { return n_max_; }

  // q^(n)(x); 0 off parity or outside |x|_1 <= n. Requires n <= n_max.
  double operator()(int n, const Site& x) const;
  double slice_sum(int n) const { return sums_[static_cast<std::size_t>(n)]; }

 private:
  std::size_t orthant_index(int n, const Site& x) const;

  int d_;
  int n_max_;
  std::vector<std::vector<double>> slices_;
  std::vector<double> sums_;
};

// q^(n)(x) from a freshly built table (convenience for one-off queries).
double q_exact(int d, int n, const Site& x);

// n <-> x.
inline bool parity(int n, const Site& x) { return same_parity(n, x); }

// Gaussian approximation 2 (d / 2 pi n)^{d/2} exp(-d |x|^2 / 2n), n >= 1.
double q_bar(int d, int n, const Site& x);

struct LltErrorRow {
  int n = 0;
  double sup_error = 0.0;     // sup over n <-> x of |q - q_bar|
  double scaled_error = 0.0;  // sup_error * n^{d/2 + 1}
  Site argmax;
};

// Rows for n = 1..n_max (n = 0 is excluded: q_bar needs n >= 1).
std::vector<LltErrorRow> llt_error_scan(int d, int n_max);
std::vector<LltErrorRow> llt_error_scan(const KernelTable& table);

struct LltLowerBoundRow {
  int n = 0;
  double min_scaled = 0.0;  // min over {n <-> x, |x| <= A sqrt(n)} of q * n^{d/2}
  Site argmin;
};

std::vector<LltLowerBoundRow> llt_lower_bound_scan(const KernelTable& table, int n_min, double window_a);

void write_llt_csv(std::ostream& os, const std::vector<LltErrorRow>& rows);

enum class ReturnMethod { series, green_quadrature };

struct ReturnProbability {
  double value = 0.0;        // pi_d
  double error_bound = 0.0;  // bound (series) or quadrature error estimate
  double green = 0.0;        // G(0) = sum_n q^(2n)(0) = 1 / (1 - pi_d)
};

// pi_d = P(walk returns to 0). Requires d >= 3.
ReturnProbability return_probability(int d, ReturnMethod method);

// q^(2n)(0) for n = 0..n_terms, computed by splitting the steps among the
// coordinate axes (binomial thinning of one-dimensional return probabilities).
std::vector<double> return_series_terms(int d, int n_terms);

}  // namespace polymerlab
