#pragma once

// Brute-force reference computations used as independent oracles in tests.

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "polymerlab/env.hpp"
#include "polymerlab/lattice.hpp"

namespace oracle {

using polymerlab::Site;

inline std::vector<Site> steps(int d) {
  std::vector<Site> out;
  for (int k = 0; k < d; ++k) {
    Site e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(k)] = 1;
    out.push_back(e);
    e[static_cast<std::size_t>(k)] = -1;
    out.push_back(e);
  }
  return out;
}

// Calls f(path) for all (2d)^n nearest-neighbour paths w_0 = x0, ..., w_n.
inline void enumerate_paths(int d, const Site& x0, int n, const std::function<void(const std::vector<Site>&)>& f) {
  const auto e = steps(d);
  std::vector<Site> path{x0};
  std::function<void()> rec = [&] {
    if (static_cast<int>(path.size()) == n + 1) {
      f(path);
      return;
    }
    for (const Site& s : e) {
      Site next = path.back();
      for (std::size_t k = 0; k < next.size(); ++k) next[k] += s[k];
      path.push_back(next);
      rec();
      path.pop_back();
    }
  };
  rec();
}

// P^x0(e_{1,n} 1{w_n = y}) for every endpoint y, by summing over all paths.
inline std::map<Site, double> forward_weights(const polymerlab::EnvironmentField& field, const Site& x0, int n,
                                              int start = 0) {
  const int d = field.dim();
  const double p = std::pow(1.0 / (2.0 * d), n);
  const double beta = field.spec().beta();
  const double lam = polymerlab::log_mgf(field.spec(), beta);
  std::map<Site, double> w;
  enumerate_paths(d, x0, n, [&](const std::vector<Site>& path) {
    double h = 0.0;
    for (int j = 1; j <= n; ++j) h += field.eta(start + j, path[static_cast<std::size_t>(j)]);
    w[path.back()] += p * std::exp(beta * h - n * lam);
  });
  return w;
}

// P^y(prod_{j=0}^{l-1} e^{beta eta(anchor - j, w_j) - lambda}), by summing over all paths.
inline double reversed_total(const polymerlab::EnvironmentField& field, const Site& y, int l, int anchor) {
  const int d = field.dim();
  const double p = std::pow(1.0 / (2.0 * d), l);
  const double beta = field.spec().beta();
  const double lam = polymerlab::log_mgf(field.spec(), beta);
  double total = 0.0;
  enumerate_paths(d, y, l, [&](const std::vector<Site>& path) {
    double h = 0.0;
    for (int j = 0; j < l; ++j) h += field.eta(anchor - j, path[static_cast<std::size_t>(j)]);
    total += p * std::exp(beta * h - l * lam);
  });
  return total;
}

// Number of paths from x to y in n steps and probability q^(n)(y - x) by enumeration.
inline double q_enum(int d, int n, const Site& x) {
  double hits = 0.0;
  enumerate_paths(d, Site(static_cast<std::size_t>(d), 0), n, [&](const std::vector<Site>& path) {
    if (path.back() == x) hits += 1.0;
  });
  return hits / std::pow(2.0 * d, n);
}

// E[exp(l2 * #{j in [k, n] : w_j = w~_j})] over all pairs of n-step paths from a common origin.
inline double pair_expectation(int d, int n, double l2, int k) {
  std::vector<std::vector<Site>> paths;
  enumerate_paths(d, Site(static_cast<std::size_t>(d), 0), n, [&](const std::vector<Site>& p) { paths.push_back(p); });
  double s = 0.0;
  for (const auto& a : paths)
    for (const auto& b : paths) {
      int c = 0;
      for (int j = k; j <= n; ++j)
        if (a[static_cast<std::size_t>(j)] == b[static_cast<std::size_t>(j)]) ++c;
      s += std::exp(l2 * c);
    }
  return s / (static_cast<double>(paths.size()) * static_cast<double>(paths.size()));
}

// Same, restricted to pairs of bridges x -> y (both ending at y), normalized by the pinned count.
inline double pinned_pair_expectation(int d, int n, double l2, const Site& x, const Site& y) {
  std::vector<std::vector<Site>> bridges;
  enumerate_paths(d, x, n, [&](const std::vector<Site>& p) {
    if (p.back() == y) bridges.push_back(p);
  });
  double s = 0.0;
  for (const auto& a : bridges)
    for (const auto& b : bridges) {
      int c = 0;
      for (int j = 1; j <= n; ++j)
        if (a[static_cast<std::size_t>(j)] == b[static_cast<std::size_t>(j)]) ++c;
      s += std::exp(l2 * c);
    }
  return s / (static_cast<double>(bridges.size()) * static_cast<double>(bridges.size()));
}

}  // namespace oracle
