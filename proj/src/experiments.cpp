#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include "polymerlab/brownian.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/llt.hpp"
#include "polymerlab/overlap.hpp"
#include "polymerlab/partition.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/runner.hpp"
#include "polymerlab/walk.hpp"

namespace polymerlab::runner {

namespace {

enum class T { integer, number, int_list, num_list, disorder, boolean };

struct Field {
  std::string key;
  T type;
  std::optional<json> fallback;  // engineering knobs only
};

struct Kind {
  std::vector<Field> params;
  json acceptance;
};

const std::map<std::string, Kind>& schema() {
  static const std::map<std::string, Kind> s = [] {
    const Field disorder{"disorder", T::disorder, {}}, d{"d", T::integer, {}}, a{"a", T::number, {}},
        window{"A", T::number, {}}, seeds{"n_seeds", T::integer, {}}, itimes{"times", T::int_list, {}};
    std::map<std::string, Kind> m;
    m["llt-scan"] = {{disorder, d, itimes, a, window, seeds, {"grid_stride", T::integer, json(1)}}, {{"band_se", 2.0}}};
    m["zinf-scan"] = {{disorder, d, itimes, a, window, seeds, {"grid_stride", T::integer, json(1)},
                       {"proxy_time", T::integer, {}}, {"proxy_seeds", T::integer, {}}},
                      {{"proxy_ratio_max", 0.05}}};
    m["moment-check"] = {{disorder, d, {"n", T::integer, {}}, seeds}, {{"z_max", 3.0}}};
    m["llt-classical"] = {{d, {"n_min", T::integer, {}}, {"n_max", T::integer, {}}, window}, {{"factor_max", 2.0}}};
    m["pi-d"] = {{d}, {{"tolerance", 1e-3}}};
    m["overlap-check"] = {{d, {"lambda2", T::number, {}}, itimes, window}, json::object()};
    m["brownian-moment"] = {{{"beta", T::number, {}},
                             d,
                             {"t", T::number, {}},
                             {"h", T::number, {}},
                             {"n_env", T::integer, {}},
                             {"n_paths", T::integer, {}},
                             {"n_pairs", T::integer, {}},
                             {"bridge_samples", T::integer, {}}},
                            {{"z_max", 3.0}, {"bridge_z_max", 3.0}}};
    m["brownian-llt"] = {{{"beta", T::number, {}},
                          d,
                          {"times", T::num_list, {}},
                          a,
                          window,
                          {"n_env", T::integer, {}},
                          {"n_paths", T::integer, {}},
                          {"h", T::number, {}},
                          {"radial_fractions", T::num_list, json::array({0.0, 0.5, 1.0})},
                          {"max_inner_cv2", T::number, json(4.0)}},
                         {{"calibration_z_max", 3.0}}};
    m["i-n-scan"] = {{disorder, d, itimes, seeds}, {{"factor_max", 2.0}}};
    return m;
  }();
  return s;
}

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void check_type(const std::string& where, const json& v, T type) {
  auto is_int = [](const json& x) { return x.is_number_integer(); };
  switch (type) {
    case T::integer:
      if (!is_int(v)) fail(where + " must be an integer");
      break;
    case T::number:
      if (!v.is_number()) fail(where + " must be a number");
      break;
    case T::boolean:
      if (!v.is_boolean()) fail(where + " must be true or false");
      break;
    case T::int_list:
    case T::num_list:
      if (!v.is_array() || v.empty()) fail(where + " must be a non-empty list");
      for (const auto& x : v)
        if (type == T::int_list ? !is_int(x) : !x.is_number()) fail(where + " has a non-numeric entry");
      break;
    case T::disorder: {
      if (!v.is_object() || !v.contains("law") || !v["law"].is_string()) fail(where + ".law is required");
      const std::string law = v["law"];
      std::vector<std::pair<std::string, T>> keys;
      if (law == "gaussian")
        keys = {{"mean", T::number}, {"variance", T::number}, {"beta", T::number}};
      else if (law == "bernoulli")
        keys = {{"p", T::number}, {"a", T::number}, {"b", T::number}, {"beta", T::number}};
      else if (law == "exponential")
        keys = {{"rate", T::number}, {"centered", T::boolean}, {"beta", T::number}};
      else
        fail(where + ".law must be gaussian, bernoulli or exponential");
      for (const auto& [k, t] : keys) {
        if (!v.contains(k)) fail(where + "." + k + " is required");
        check_type(where + "." + k, v[k], t);
      }
      for (const auto& [k, _] : v.items())
        if (k != "law" && std::none_of(keys.begin(), keys.end(), [&](const auto& p) { return p.first == k; }))
          fail("unknown key " + where + "." + k);
      break;
    }
  }
}

DisorderSpec disorder_of(const json& v) {
  const std::string law = v["law"];
  if (law == "gaussian") return DisorderSpec::gaussian(v["mean"], v["variance"], v["beta"]);
  if (law == "bernoulli") return DisorderSpec::bernoulli(v["p"], v["a"], v["b"], v["beta"]);
  return DisorderSpec::exponential(v["rate"], v["centered"], v["beta"]);
}

std::string csv_num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

class Csv {
 public:
  explicit Csv(const std::string& header) { os_ << header << '\n'; }
  template <class... A>
  void row(const A&... cols) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cols), first = false), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double x) { return csv_num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }
  std::ostringstream os_;
};

Verdict verdict(std::string name, bool pass, std::string detail) { return {std::move(name), pass, std::move(detail)}; }

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " > " : "") << v[i];
  return os.str();
}

LltScanConfig llt_config(const json& c) {
  const json& p = c["params"];
  LltScanConfig cfg;
  cfg.spec = disorder_of(p["disorder"]);
  cfg.d = p["d"];
  cfg.times = p["times"].get<std::vector<int>>();
  cfg.a = p["a"];
  cfg.window_a = p["A"];
  cfg.n_seeds = p["n_seeds"];
  cfg.grid_stride = p["grid_stride"];
  if (p.contains("proxy_time")) cfg.zinf_proxy_time = p["proxy_time"];
  cfg.master_seed = c["master_seed"];
  cfg.force = c["force"];
  return cfg;
}

std::string sup_csv(const LltScanResult& r) {
  Csv csv("n,l,argsup,sup,se,n_sites");
  for (const auto& s : r.sup_rows) csv.row(s.n, s.l, format_site(s.argsup), s.sup, s.se, s.n_sites);
  return csv.str();
}

json sup_json(const LltScanResult& r) {
  json rows = json::array();
  for (const auto& s : r.sup_rows)
    rows.push_back({{"n", s.n}, {"l", s.l}, {"argsup", format_site(s.argsup)}, {"sup", s.sup}, {"se", s.se}});
  return rows;
}

std::string residual_csv(const LltScanResult& r) {
  std::ostringstream os;
  write_residual_csv(os, r);
  return os.str();
}

bool all_zero(const LltScanResult& r) {
  return std::all_of(r.cells.begin(), r.cells.end(), [](const ResidualCell& c) { return c.q_hat == 0.0 && c.se == 0.0; });
}

std::vector<double> sups(const LltScanResult& r) {
  std::vector<double> v;
  for (const auto& s : r.sup_rows) v.push_back(s.sup);
  return v;
}

ExperimentOutput run_llt_scan(const json& c) {
  const LltScanConfig cfg = llt_config(c);
  validate(cfg, false);
  LltScanConfig control = cfg;
  control.spec = cfg.spec.with_beta(0.0);
  const auto res = llt_scan(cfg, false).l2;
  const auto ctl = llt_scan(control, false).l2;
  ExperimentOutput out;
  out.files["residuals.csv"] = residual_csv(res);
  out.files["sup.csv"] = sup_csv(res);
  out.files["control_beta0.csv"] = residual_csv(ctl);
  out.summary["sup"] = sup_json(res);
  out.summary["lambda2"] = cfg.spec.lambda2();
  out.summary["l2_margin"] = l2_region_check(cfg.spec, cfg.d).margin;
  const auto s = sups(res);
  out.verdicts.push_back(verdict("sup residual strictly decreasing", strictly_decreasing(s), join(s)));
  const auto& f = res.sup_rows.front();
  const auto& l = res.sup_rows.back();
  const double band = c["acceptance"]["band_se"].get<double>() * std::hypot(f.se, l.se);
  out.verdicts.push_back(verdict("last sup below first beyond SE band", f.sup - l.sup > band,
                                 "drop " + csv_num(f.sup - l.sup) + " vs band " + csv_num(band)));
  out.verdicts.push_back(verdict("beta=0 control identically zero", all_zero(ctl), ""));
  return out;
}

ExperimentOutput run_zinf_scan(const json& c) {
  const LltScanConfig cfg = llt_config(c);
  validate(cfg, true);
  LltScanConfig control = cfg;
  control.spec = cfg.spec.with_beta(0.0);
  const auto res = llt_scan(cfg, true).zinf;
  const auto ctl = llt_scan(control, true).zinf;
  const auto proxy = zinf_proxy_check(cfg.spec, cfg.d, cfg.zinf_proxy_time, c["params"]["proxy_seeds"],
                                      rng::combine(cfg.master_seed, std::uint64_t{0x9b0c}));
  ExperimentOutput out;
  out.files["zinf_residuals.csv"] = residual_csv(res);
  out.files["sup.csv"] = sup_csv(res);
  out.files["control_beta0.csv"] = residual_csv(ctl);
  Csv pc("n,diff2,diff2_se,z2,z2_se,ratio,exact_ratio,n_seeds");
  pc.row(proxy.n, proxy.diff2, proxy.diff2_se, proxy.z2, proxy.z2_se, proxy.ratio, proxy.exact_ratio, proxy.n_seeds);
  out.files["proxy.csv"] = pc.str();
  out.summary["sup"] = sup_json(res);
  out.summary["proxy"] = {{"n", proxy.n}, {"ratio", proxy.ratio}, {"exact_ratio", proxy.exact_ratio}};
  const auto s = sups(res);
  out.verdicts.push_back(verdict("sup |residual| strictly decreasing", strictly_decreasing(s), join(s)));
  const double lim = c["acceptance"]["proxy_ratio_max"];
  out.verdicts.push_back(verdict("proxy Cauchy ratio below threshold", proxy.ratio < lim,
                                 csv_num(proxy.ratio) + " (exact " + csv_num(proxy.exact_ratio) + ") < " + csv_num(lim)));
  out.verdicts.push_back(verdict("beta=0 control identically zero", all_zero(ctl), ""));
  return out;
}

ExperimentOutput run_moment_check(const json& c) {
  const json& p = c["params"];
  const DisorderSpec spec = disorder_of(p["disorder"]);
  const auto r = second_moment_identity_check(spec, p["d"], p["n"], p["n_seeds"], c["master_seed"]);
  ExperimentOutput out;
  Csv csv("law,beta,n,mc_mean,mc_se,exact,z_score,n_seeds");
  csv.row(spec.kind_name(), spec.beta(), p["n"].get<int>(), r.mc_mean, r.mc_se, r.exact, r.z_score, r.n_seeds);
  out.files["moment.csv"] = csv.str();
  out.summary = {{"mc_mean", r.mc_mean}, {"mc_se", r.mc_se}, {"exact", r.exact}, {"z_score", r.z_score}};
  const double zmax = c["acceptance"]["z_max"];
  out.verdicts.push_back(verdict("|z| within threshold", std::abs(r.z_score) <= zmax,
                                 "z = " + csv_num(r.z_score) + ", limit " + csv_num(zmax)));
  return out;
}

ExperimentOutput run_llt_classical(const json& c) {
  const json& p = c["params"];
  const int d = p["d"], n_min = p["n_min"], n_max = p["n_max"];
  if (d < 1 || n_min < 1 || n_max < n_min) fail("need d >= 1 and 1 <= n_min <= n_max");
  const KernelTable table(d, n_max);
  const auto err = llt_error_scan(table);
  const auto low = llt_lower_bound_scan(table, n_min, p["A"]);
  ExperimentOutput out;
  std::ostringstream os;
  write_llt_csv(os, err);
  out.files["llt_error.csv"] = os.str();
  Csv lc("n,min_scaled,argmin");
  for (const auto& r : low) lc.row(r.n, r.min_scaled, format_site(r.argmin));
  out.files["llt_lower.csv"] = lc.str();
  double at_min = 0.0, mx = 0.0;
  for (const auto& r : err)
    if (r.n >= n_min) {
      if (r.n == n_min) at_min = r.scaled_error;
      mx = std::max(mx, r.scaled_error);
    }
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : low) {
    lo = std::min(lo, r.min_scaled);
    hi = std::max(hi, r.min_scaled);
  }
  const double factor = c["acceptance"]["factor_max"];
  out.summary = {{"scaled_error_at_n_min", at_min}, {"scaled_error_max", mx}, {"lower_min", lo}, {"lower_max", hi}};
  out.verdicts.push_back(verdict("scaled error bounded", mx <= factor * at_min,
                                 "max " + csv_num(mx) + " vs " + csv_num(factor) + " x " + csv_num(at_min)));
  out.verdicts.push_back(verdict("scaled lower bound positive and stable", lo > 0.0 && hi <= factor * lo,
                                 "range [" + csv_num(lo) + ", " + csv_num(hi) + "]"));
  return out;
}

ExperimentOutput run_pi_d(const json& c) {
  const int d = c["params"]["d"];
  const auto s = return_probability(d, ReturnMethod::series);
  const auto g = return_probability(d, ReturnMethod::green_quadrature);
  ExperimentOutput out;
  Csv csv("method,pi_d,error_bound,green,log_inverse");
  csv.row("series", s.value, s.error_bound, s.green, std::log(1.0 / s.value));
  csv.row("green_quadrature", g.value, g.error_bound, g.green, std::log(1.0 / g.value));
  out.files["pi_d.csv"] = csv.str();
  out.summary = {{"series", s.value}, {"green_quadrature", g.value}, {"l2_threshold", std::log(1.0 / s.value)}};
  const double tol = c["acceptance"]["tolerance"];
  out.verdicts.push_back(verdict("series and quadrature agree", std::abs(s.value - g.value) <= tol,
                                 "difference " + csv_num(std::abs(s.value - g.value))));
  return out;
}

ExperimentOutput run_overlap_check(const json& c) {
  const json& p = c["params"];
  auto times = p["times"].get<std::vector<int>>();
  std::sort(times.begin(), times.end());
  const auto scan = conditioned_pair_scan(p["d"], times, p["lambda2"], p["A"]);
  ExperimentOutput out;
  Csv csv("n,sup,argsup,inf,n_sites");
  std::vector<double> s;
  for (const auto& r : scan.rows) {
    csv.row(r.n, r.sup, format_site(r.argsup), r.inf, r.n_sites);
    s.push_back(r.sup);
  }
  out.files["conditioned.csv"] = csv.str();
  out.summary = {{"constant", scan.constant}};
  bool ok = std::isfinite(scan.constant);
  for (std::size_t k = 2; k < s.size(); ++k) ok = ok && s[k] - s[k - 1] <= std::max(0.0, s[k - 1] - s[k - 2]);
  out.verdicts.push_back(verdict("conditioned overlap bounded by a constant", ok, "constant " + csv_num(scan.constant)));
  return out;
}

ExperimentOutput run_brownian_moment(const json& c) {
  const json& p = c["params"];
  const int d = p["d"];
  const double beta = p["beta"], t = p["t"], h = p["h"];
  const std::uint64_t master = c["master_seed"];
  const auto r = continuous_second_moment_check(beta, d, t, p["n_env"], p["n_paths"], p["n_pairs"], h, master);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0), y = x;
  y[0] = std::sqrt(t);
  const auto bridge =
      bridge_moment_check(x, y, t, h, {0.25, 0.5, 0.75}, p["bridge_samples"], rng::combine(master, std::uint64_t{0xb41d}));
  ExperimentOutput out;
  Csv mc("beta,t,h,lhs,lhs_se,rhs,rhs_se,z_score,kurtosis,variance_warning");
  mc.row(beta, t, h, r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.z_score, r.kurtosis, r.variance_warning ? 1 : 0);
  out.files["moment.csv"] = mc.str();
  Csv bc("s,coord,mean,mean_exact,mean_z,var,var_exact,var_z");
  double worst = 0.0;
  for (const auto& b : bridge) {
    bc.row(b.s, b.coord, b.mean, b.mean_exact, b.mean_z, b.var, b.var_exact, b.var_z);
    worst = std::max({worst, std::abs(b.mean_z), std::abs(b.var_z)});
  }
  out.files["bridge.csv"] = bc.str();
  const TubeGeometry g(d, h);
  out.summary = {{"lhs", r.lhs},   {"rhs", r.rhs},           {"z_score", r.z_score}, {"kurtosis", r.kurtosis},
                 {"radius", g.radius}, {"lambda2", poisson_lambda2(beta)}};
  const double zmax = c["acceptance"]["z_max"], bmax = c["acceptance"]["bridge_z_max"];
  out.verdicts.push_back(verdict("|z| within threshold", std::abs(r.z_score) <= zmax,
                                 "z = " + csv_num(r.z_score) + (r.variance_warning ? " (variance warning)" : "")));
  out.verdicts.push_back(verdict("bridge mean and variance within SE threshold", worst <= bmax,
                                 "worst |z| " + csv_num(worst)));
  return out;
}

ContinuousLltConfig brownian_llt_config(const json& c) {
  const json& p = c["params"];
  ContinuousLltConfig cfg;
  cfg.beta = p["beta"];
  cfg.d = p["d"];
  cfg.times = p["times"].get<std::vector<double>>();
  cfg.a = p["a"];
  cfg.window_a = p["A"];
  cfg.radial_fractions = p["radial_fractions"].get<std::vector<double>>();
  cfg.n_env = p["n_env"];
  cfg.n_paths = p["n_paths"];
  cfg.h = p["h"];
  cfg.max_inner_cv2 = p["max_inner_cv2"];
  cfg.master_seed = c["master_seed"];
  cfg.force = c["force"];
  return cfg;
}

std::string continuous_csv(const ContinuousLltScan& s) {
  Csv csv("t,l,y_offset,raw,noise_floor,corrected,se,n_env,first_order");
  for (const auto& r : s.rows)
    csv.row(r.t, r.l, r.y_radius, r.raw, r.noise_floor, r.corrected, r.se, r.n_env, r.first_order);
  return csv.str();
}

ExperimentOutput run_brownian_llt(const json& c) {
  const ContinuousLltConfig cfg = brownian_llt_config(c);
  ContinuousLltConfig control = cfg;
  control.beta = 0.0;
  const auto res = continuous_llt_residual_scan(cfg);
  const auto ctl = continuous_llt_residual_scan(control);
  ExperimentOutput out;
  out.files["residuals.csv"] = continuous_csv(res);
  out.files["calibration_beta0.csv"] = continuous_csv(ctl);
  Csv sc("t,l,y_offset,corrected,se,noise_floor,first_order");
  std::vector<double> s;
  json rows = json::array();
  for (const auto& r : res.sup_rows) {
    sc.row(r.t, r.l, r.y_radius, r.corrected, r.se, r.noise_floor, r.first_order);
    s.push_back(r.corrected);
    rows.push_back({{"t", r.t}, {"l", r.l}, {"y_offset", r.y_radius}, {"corrected", r.corrected}, {"se", r.se},
                    {"first_order", r.first_order}});
  }
  out.files["sup.csv"] = sc.str();
  const TubeGeometry g(cfg.d, cfg.h);
  out.summary = {{"sup", rows}, {"inner_cv2", res.inner_cv2}, {"radius", g.radius}, {"time_cell", kPoissonTimeCell}};
  out.verdicts.push_back(verdict("corrected sup residual strictly decreasing", strictly_decreasing(s), join(s)));
  const double zmax = c["acceptance"]["calibration_z_max"];
  bool calm = true;
  for (const auto& r : ctl.rows) calm = calm && std::abs(r.corrected) <= zmax * r.se;
  out.verdicts.push_back(verdict("beta=0 calibration consistent with noise floor", calm, ""));
  return out;
}

ExperimentOutput run_i_n_scan(const json& c) {
  const json& p = c["params"];
  const DisorderSpec spec = disorder_of(p["disorder"]);
  const auto rows = i_n_scan(spec, p["d"], p["times"].get<std::vector<int>>(), p["n_seeds"], c["master_seed"]);
  ExperimentOutput out;
  Csv csv("n,mean,se,scaled,scaled_se,n_seeds");
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rows) {
    csv.row(r.n, r.mean, r.se, r.scaled, r.scaled_se, r.n_seeds);
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
  }
  out.files["i_n.csv"] = csv.str();
  out.summary = {{"scaled_min", lo}, {"scaled_max", hi}};
  const double factor = c["acceptance"]["factor_max"];
  out.verdicts.push_back(verdict("scaled I_n within factor", hi < factor * lo,
                                 "ratio " + csv_num(hi / lo) + " < " + csv_num(factor)));
  return out;
}

double cube(double side, int d) { return std::pow(side, d); }

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : schema()) v.push_back(name);
    return v;
  }();
  return k;
}

json resolve_config(json cfg) {
  if (!cfg.is_object()) fail("config must be an object");
  for (const auto& [k, _] : cfg.items())
    if (k != "experiment" && k != "master_seed" && k != "params" && k != "acceptance" && k != "threads" &&
        k != "memory_cap_mb" && k != "force")
      fail("unknown top-level key " + k);
  if (!cfg.contains("experiment") || !cfg["experiment"].is_string()) fail("experiment is required");
  const auto it = schema().find(cfg["experiment"].get<std::string>());
  if (it == schema().end()) fail("unknown experiment kind " + cfg["experiment"].get<std::string>());
  if (!cfg.contains("master_seed") || !cfg["master_seed"].is_number_unsigned())
    fail("master_seed is required (unsigned integer)");
  if (!cfg.contains("threads")) cfg["threads"] = 0;
  if (!cfg.contains("memory_cap_mb")) cfg["memory_cap_mb"] = 4096;
  if (!cfg.contains("force")) cfg["force"] = false;
  check_type("threads", cfg["threads"], T::integer);
  check_type("memory_cap_mb", cfg["memory_cap_mb"], T::number);
  check_type("force", cfg["force"], T::boolean);
  if (cfg["threads"].get<int>() < 0) fail("threads must be >= 0");

  if (!cfg.contains("params") || !cfg["params"].is_object()) fail("params is required");
  json& p = cfg["params"];
  const Kind& kind = it->second;
  for (const auto& [k, _] : p.items())
    if (std::none_of(kind.params.begin(), kind.params.end(), [&](const Field& f) { return f.key == k; }))
      fail("unknown parameter params." + k);
  for (const Field& f : kind.params) {
    if (!p.contains(f.key)) {
      if (!f.fallback) fail("params." + f.key + " is required");
      p[f.key] = *f.fallback;
    }
    check_type("params." + f.key, p[f.key], f.type);
  }
  json acc = kind.acceptance;
  if (cfg.contains("acceptance")) {
    if (!cfg["acceptance"].is_object()) fail("acceptance must be an object");
    for (const auto& [k, v] : cfg["acceptance"].items()) {
      if (!acc.contains(k)) fail("unknown acceptance key " + k);
      check_type("acceptance." + k, v, T::number);
      acc[k] = v;
    }
  }
  cfg["acceptance"] = acc;
  if (p.contains("disorder")) {
    try {
      (void)disorder_of(p["disorder"]);
    } catch (const std::exception& e) {
      fail(std::string("params.disorder: ") + e.what());
    }
  }
  for (const char* k : {"d", "n_seeds", "n_env", "n_paths", "n_pairs", "bridge_samples", "proxy_seeds", "grid_stride"})
    if (p.contains(k) && p[k].get<long long>() < 1) fail(std::string("params.") + k + " must be >= 1");
  return cfg;
}

std::size_t task_count(const json& c) {
  const json& p = c["params"];
  const std::string kind = c["experiment"];
  if (p.contains("n_seeds")) return p["n_seeds"];
  if (kind == "brownian-moment") return std::max(p["n_env"].get<std::size_t>(), p["n_pairs"].get<std::size_t>());
  if (p.contains("n_env")) return p["n_env"];
  return 0;
}

std::uint64_t estimate_memory_bytes(const json& c) {
  const json& p = c["params"];
  const std::string kind = c["experiment"];
  const int d = p["d"];
  const double threads = std::max(1, c["threads"].get<int>());
  double bytes = 0.0;
  if (kind == "llt-scan" || kind == "zinf-scan" || kind == "i-n-scan") {
    const auto times = p["times"].get<std::vector<int>>();
    int horizon = *std::max_element(times.begin(), times.end());
    if (kind == "zinf-scan") {
      horizon = std::max(horizon, p["proxy_time"].get<int>());
      // Proxy check: one sweep at a time over a radius-2N cube.
      bytes += 3.0 * cube(4.0 * p["proxy_time"].get<double>() + 3.0, d) * 8.0;
    }
    // Per worker: two sweep slices plus the reversed-total grids.
    bytes += threads * 4.0 * cube(2.0 * horizon + 3.0, d) * 8.0;
    if (kind != "i-n-scan") {
      double cells = 0.0;
      const double a = p["A"];
      for (int n : times) cells += cube(2.0 * a * std::sqrt(n) + 1.0, d);
      bytes += 2.0 * cells * p["n_seeds"].get<double>() * 8.0;
    }
  } else if (kind == "moment-check") {
    bytes = threads * 4.0 * cube(4.0 * p["n"].get<double>() + 1.0, d) * 8.0;
  } else if (kind == "llt-classical") {
    bytes = p["n_max"].get<double>() * cube(2.0 * p["n_max"].get<double>() + 1.0, d) * 8.0;
  } else if (kind == "overlap-check") {
    const auto times = p["times"].get<std::vector<int>>();
    const double n = *std::max_element(times.begin(), times.end());
    bytes = 2.0 * n * cube(4.0 * n + 1.0, d) * 8.0;
  } else if (kind == "brownian-moment") {
    bytes = (p["n_env"].get<double>() + p["n_pairs"].get<double>() + p["bridge_samples"].get<double>() * 3.0 * d) * 8.0;
  } else if (kind == "brownian-llt") {
    bytes = p["n_env"].get<double>() * p["radial_fractions"].size() * p["times"].size() * 16.0;
  }
  return static_cast<std::uint64_t>(bytes) + (1u << 20);
}

ExperimentOutput execute(const json& c) {
  const double cap = c["memory_cap_mb"].get<double>() * 1024.0 * 1024.0;
  const auto need = estimate_memory_bytes(c);
  if (static_cast<double>(need) > cap)
    throw ResourceRefusal("predicted memory " + std::to_string(need / (1024 * 1024)) + " MB exceeds cap of " +
                          csv_num(c["memory_cap_mb"].get<double>()) + " MB");
  static const std::map<std::string, std::function<ExperimentOutput(const json&)>> table{
      {"llt-scan", run_llt_scan},         {"zinf-scan", run_zinf_scan},
      {"moment-check", run_moment_check}, {"llt-classical", run_llt_classical},
      {"pi-d", run_pi_d},                 {"overlap-check", run_overlap_check},
      {"brownian-moment", run_brownian_moment}, {"brownian-llt", run_brownian_llt},
      {"i-n-scan", run_i_n_scan}};
  ExperimentOutput out = table.at(c["experiment"])(c);
  json v = json::array();
  for (const auto& x : out.verdicts) v.push_back({{"name", x.name}, {"pass", x.pass}, {"detail", x.detail}});
  out.summary["verdicts"] = v;
  out.summary["experiment"] = c["experiment"];
  out.files["summary.json"] = out.summary.dump(2) + "\n";
  return out;
}

}  // namespace polymerlab::runner
