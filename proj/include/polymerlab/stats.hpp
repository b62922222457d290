#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace polymerlab {

// Pairwise (cascade) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> v) {
  MeanSe r;
  r.n = v.size();
  if (r.n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(r.n);
  if (r.n < 2) return r;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - r.mean) * (v[i] - r.mean);
  const double var = pairwise_sum(dev) / static_cast<double>(r.n - 1);
  r.se = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

// z-score of a - b for independent estimates; 0 when both are exact and equal.
inline double z_score(double a, double se_a, double b, double se_b) {
  const double s = std::sqrt(se_a * se_a + se_b * se_b);
  if (s == 0.0) return a == b ? 0.0 : (a > b ? INFINITY : -INFINITY);
  return (a - b) / s;
}

}  // namespace polymerlab
