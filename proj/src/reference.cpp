#include "polymerlab/reference.hpp"

#include <cmath>

namespace polymerlab::reference {

SparseSlice forward_partition(const EnvironmentField& field, const Site& x0, int n, int start_time) {
  const int d = field.dim();
  const double p = 1.0 / (2.0 * d);
  SparseSlice cur{{x0, 1.0}};
  for (int k = 1; k <= n; ++k) {
    SparseSlice next;
    for (const auto& [x, w] : cur)
      for (int i = 0; i < d; ++i)
        for (int s : {-1, 1}) {
          Site y = x;
          y[static_cast<std::size_t>(i)] += s;
          next[y] += p * w;
        }
    for (auto& [y, w] : next) w *= field.boltzmann(start_time + k, y);
    cur = std::move(next);
  }
  return cur;
}

double total(const SparseSlice& s) {
  double t = 0.0;
  for (const auto& [x, w] : s) t += w;
  return t;
}

double pair_expectation(int d, int n, double lambda2) {
  // The difference of two independent walks moves by e_i - e_j.
  const double p = 1.0 / (4.0 * d * d);
  const double hit = std::exp(lambda2);
  SparseSlice cur{{Site(static_cast<std::size_t>(d), 0), 1.0}};
  for (int k = 1; k <= n; ++k) {
    SparseSlice next;
    for (const auto& [x, w] : cur)
      for (int i = 0; i < d; ++i)
        for (int si : {-1, 1})
          for (int j = 0; j < d; ++j)
            for (int sj : {-1, 1}) {
              Site y = x;
              y[static_cast<std::size_t>(i)] += si;
              y[static_cast<std::size_t>(j)] -= sj;
              next[y] += p * w;
            }
    const auto origin = next.find(Site(static_cast<std::size_t>(d), 0));
    if (origin != next.end()) origin->second *= hit;
    cur = std::move(next);
  }
  return total(cur);
}

}  // namespace polymerlab::reference
