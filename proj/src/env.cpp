#include "polymerlab/env.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

#include "polymerlab/errors.hpp"
#include "polymerlab/walk.hpp"

namespace polymerlab {

namespace {

double log_mgf_law(const DisorderLaw& law, double b) {
  if (b == 0.0) return 0.0;
  return std::visit(
      [b](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianDisorder>) {
          return b * l.mean + 0.5 * b * b * l.variance;
        } else if constexpr (std::is_same_v<T, BernoulliDisorder>) {
          const double ea = b * l.a;
          const double eb = b * l.b;
          const double m = std::max(ea, eb);
          return m + std::log(l.p * std::exp(ea - m) + (1.0 - l.p) * std::exp(eb - m));
        } else {
          if (b >= l.rate) throw DivergenceError("exponential disorder: mgf infinite for b >= rate");
          return -std::log1p(-b / l.rate) - (l.centered ? b / l.rate : 0.0);
        }
      },
      law);
}

void validate_law(const DisorderLaw& law) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussianDisorder>) {
          if (!(l.variance > 0.0)) throw std::invalid_argument("gaussian disorder needs variance > 0");
        } else if constexpr (std::is_same_v<T, BernoulliDisorder>) {
          if (!(l.p > 0.0 && l.p < 1.0)) throw std::invalid_argument("bernoulli disorder needs 0 < p < 1");
          if (l.a == l.b) throw std::invalid_argument("bernoulli disorder needs a != b");
        } else {
          if (!(l.rate > 0.0)) throw std::invalid_argument("exponential disorder needs rate > 0");
        }
      },
      law);
}

}  // namespace

DisorderSpec::DisorderSpec(DisorderLaw law, double beta) : law_(law), beta_(beta) {
  validate_law(law_);
  lambda_ = log_mgf_law(law_, beta_);
  lambda2_ = log_mgf_law(law_, 2.0 * beta_) - 2.0 * lambda_;
}

DisorderSpec DisorderSpec::gaussian(double mean, double variance, double beta) {
  return DisorderSpec(GaussianDisorder{mean, variance}, beta);
}

DisorderSpec DisorderSpec::bernoulli(double p, double a, double b, double beta) {
  return DisorderSpec(BernoulliDisorder{p, a, b}, beta);
}

DisorderSpec DisorderSpec::exponential(double rate, bool centered, double beta) {
  return DisorderSpec(ExponentialDisorder{rate, centered}, beta);
}

std::string DisorderSpec::kind_name() const {
  switch (law_.index()) {
    case 0: return "gaussian";
    case 1: return "bernoulli";
    default: return "exponential";
  }
}

double DisorderSpec::quantile(double u) const {
  switch (law_.index()) {
    case 0: {
      const auto& g = std::get<GaussianDisorder>(law_);
      return g.mean + std::sqrt(g.variance) * rng::inverse_normal_cdf(u);
    }
    case 1: {
      const auto& bl = std::get<BernoulliDisorder>(law_);
      return u < bl.p ? bl.a : bl.b;
    }
    default: {
      const auto& e = std::get<ExponentialDisorder>(law_);
      const double x = -std::log1p(-u) / e.rate;
      return e.centered ? x - 1.0 / e.rate : x;
    }
  }
}

double log_mgf(const DisorderSpec& spec, double b) { return log_mgf_law(spec.law(), b); }

double lambda2(const DisorderSpec& spec) { return spec.lambda2(); }

RegionCheck l2_region_check(const DisorderSpec& spec, int d) {
  if (d < 3) throw DimensionError("L2 region criterion needs d >= 3");
  static std::mutex mu;
  static std::map<int, double> cache;
  double pi_d;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, return_probability(d, ReturnMethod::series).value).first;
    pi_d = it->second;
  }
  RegionCheck r;
  r.margin = std::log(1.0 / pi_d) - spec.lambda2();
  r.in_region = r.margin > 0.0;
  return r;
}

EnvironmentField::EnvironmentField(DisorderSpec spec, std::uint64_t seed, Box window, int time_max)
    : spec_(std::move(spec)), seed_(seed), window_(std::move(window)), time_max_(time_max) {
  if (window_.dim() < 1 || window_.dim() > kMaxDim) throw DimensionError("field dimension out of range");
  if (window_.hi.size() != window_.lo.size()) throw DimensionError("window corners disagree in dimension");
}

std::uint64_t EnvironmentField::prefix_hash(int n, const int* prefix) const {
  std::uint64_t h = rng::combine(rng::mix64(seed_), static_cast<std::int64_t>(n));
  for (int k = 0; k + 1 < dim(); ++k) h = rng::combine(h, static_cast<std::int64_t>(prefix[k]));
  return h;
}

double EnvironmentField::eta(int n, const Site& x) const {
  if (!covers(n, x)) throw OutOfWindowError("eta queried outside the field window");
  const std::uint64_t h = rng::combine(prefix_hash(n, x.data()), static_cast<std::int64_t>(x.back()));
  return spec_.quantile(rng::to_unit_open(h));
}

EnvironmentField::Row EnvironmentField::row(int n, const std::array<int, kMaxDim>& prefix) const {
  Row r;
  r.spec_ = &spec_;
  r.prefix_hash_ = prefix_hash(n, prefix.data());
  r.beta_ = spec_.beta();
  r.lambda_ = spec_.lambda();
  return r;
}

}  // namespace polymerlab
