#pragma once

#include <map>

#include "polymerlab/env.hpp"
#include "polymerlab/lattice.hpp"

// Serial sparse-map kernels. Slow but structurally independent of the grid
// kernels; used by the tests and by the benchmark as the baseline.
namespace polymerlab::reference {

using SparseSlice = std::map<Site, double>;

// Forward DP from x0 at start_time over n steps, factor at the arrival site.
SparseSlice forward_partition(const EnvironmentField& field, const Site& x0, int n, int start_time = 0);

double total(const SparseSlice& s);

// P(exp(lambda2 * #{1 <= k <= n : S_k = S~_k})) by a DP on the difference walk.
double pair_expectation(int d, int n, double lambda2);

}  // namespace polymerlab::reference
