#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "polymerlab/lattice.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {

struct GaussianDisorder {
  double mean = 0.0;
  double variance = 1.0;
};

// Two-point law: value a with probability p, value b otherwise.
struct BernoulliDisorder {
  double p = 0.5;
  double a = 1.0;
  double b = -1.0;
};

// Exponential(rate); when centered the stored variable is X - 1/rate.
struct ExponentialDisorder {
  double rate = 1.0;
  bool centered = true;
};

using DisorderLaw = std::variant<GaussianDisorder, BernoulliDisorder, ExponentialDisorder>;

// Law of eta(n, x) together with the inverse temperature.
class DisorderSpec {
 public:
  // Throws std::invalid_argument for a constant law and DivergenceError when
  // lambda(beta) or lambda(2 beta) is infinite.
  DisorderSpec(DisorderLaw law, double beta);

  static DisorderSpec gaussian(double mean, double variance, double beta);
  static DisorderSpec bernoulli(double p, double a, double b, double beta);
  static DisorderSpec exponential(double rate, bool centered, double beta);

  const DisorderLaw& law() const { return law_; }
  double beta() const { return beta_; }
  std::string kind_name() const;
  DisorderSpec with_beta(double beta) const { return DisorderSpec(law_, beta); }

  // lambda(beta), cached at construction.
  double lambda() const { return lambda_; }
  double lambda2() const { return lambda2_; }

  // Inverse CDF of the law at u in (0, 1).
  double quantile(double u) const;

  // exp(beta * quantile(u) - lambda(beta)).
  double boltzmann(double u) const { return std::exp(beta_ * quantile(u) - lambda_); }

 private:
  DisorderLaw law_;
  double beta_;
  double lambda_;
  double lambda2_;
};

// lambda(b) = ln E[exp(b * eta)] in closed form.
double log_mgf(const DisorderSpec& spec, double b);

// lambda(2 beta) - 2 lambda(beta).
double lambda2(const DisorderSpec& spec);

struct RegionCheck {
  bool in_region = false;
  double margin = 0.0;  // ln(1/pi_d) - lambda2
};

// L2 criterion lambda2(beta) < ln(1/pi_d). Requires d >= 3.
RegionCheck l2_region_check(const DisorderSpec& spec, int d);

// Deterministic i.i.d. field eta(n, x) over times [1, time_max] and a lattice box.
// Values are a pure function of (seed, n, x); the object is immutable.
class EnvironmentField {
 public:
  EnvironmentField(DisorderSpec spec, std::uint64_t seed, Box window, int time_max);

  const DisorderSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const Box& window() const { return window_; }
  int time_max() const { return time_max_; }
  int dim() const { return window_.dim(); }

  // Throws OutOfWindowError outside the window or time range.
  double eta(int n, const Site& x) const;
  double boltzmann(int n, const Site& x) const { return std::exp(spec_.beta() * eta(n, x) - spec_.lambda()); }

  bool covers(int n, const Site& x) const { return n >= 1 && n <= time_max_ && window_.contains(x); }

  // Row sampler: Boltzmann factors along the last coordinate for fixed
  // (n, x_0..x_{d-2}). Unchecked; callers validate the window up front.
  class Row {
   public:
    double eta(int last) const { return spec_->quantile(rng::to_unit_open(rng::combine(prefix_hash_, static_cast<std::int64_t>(last)))); }
    double operator()(int last) const { return std::exp(beta_ * eta(last) - lambda_); }

   private:
    friend class EnvironmentField;
    const DisorderSpec* spec_ = nullptr;
    std::uint64_t prefix_hash_ = 0;
    double beta_ = 0.0;
    double lambda_ = 0.0;
  };

  Row row(int n, const std::array<int, kMaxDim>& prefix) const;

 private:
  std::uint64_t prefix_hash(int n, const int* prefix) const;

  DisorderSpec spec_;
  std::uint64_t seed_;
  Box window_;
  int time_max_;
};

}  // namespace polymerlab
