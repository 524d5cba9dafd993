#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "condtau/condtau.hpp"

namespace condtau::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Usage problems detected after parsing (bad grid syntax, unknown names).
class UsageError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline std::string na_or(double v) { return std::isnan(v) ? "NA" : format_double(v); }

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  double v;
  if (!parse_double(s, v)) throw UsageError("invalid number '" + s + "' in " + what);
  return v;
}

/// lo:hi:count, inclusive and equispaced.
inline std::optional<std::vector<double>> parse_range(const std::string& s, const std::string& what) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) return std::nullopt;
  const double lo = to_double(parts[0], what);
  const double hi = to_double(parts[1], what);
  const double cnt = to_double(parts[2], what);
  if (!(cnt >= 1.0) || cnt != std::floor(cnt)) throw UsageError(what + ": count must be a positive integer");
  const auto count = static_cast<std::size_t>(cnt);
  if (count > 1 && !(hi > lo)) throw UsageError(what + ": need lo < hi");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

/// Points for a p-dimensional covariate: "v1,v2,..." or "lo:hi:count" when
/// p = 1; "a,b;c,d" (points separated by ';') otherwise.
inline std::vector<Point> parse_points(const std::string& s, std::size_t p) {
  std::vector<Point> out;
  if (p == 1) {
    if (auto r = parse_range(s, "--z")) {
      for (double v : *r) out.push_back({v});
      return out;
    }
    for (const auto& tok : split(s, ',')) out.push_back({to_double(tok, "--z")});
    return out;
  }
  for (const auto& pt : split(s, ';')) {
    Point z;
    for (const auto& tok : split(pt, ',')) z.push_back(to_double(tok, "--z"));
    if (z.size() != p)
      throw UsageError("--z: each point needs " + std::to_string(p) + " coordinates");
    out.push_back(std::move(z));
  }
  return out;
}

inline std::vector<Estimator> parse_estimators(const std::vector<std::string>& names) {
  std::vector<Estimator> out;
  for (const auto& n : names) {
    if (n == "all") return {kAllEstimators.begin(), kAllEstimators.end()};
    try {
      out.push_back(estimator_from_name(n));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no estimator given");
  return out;
}

inline KernelSpec parse_kernel(const std::string& name, std::size_t p) {
  try {
    return KernelSpec(kernel_from_name(name), p);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

inline std::size_t resolve_threads(int requested) {
  return requested > 0 ? static_cast<std::size_t>(requested) : default_threads();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Every option of `sub` that was given or has a default, as argv tokens.
inline std::vector<std::string> resolved_args(const CLI::App& sub) {
  std::vector<std::string> args;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.rfind("--", 0) != 0 || name == "--help" || name == "--config") continue;
    if (opt->get_type_size() == 0) {
      if (opt->count() > 0) args.push_back(name);
      continue;
    }
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      const std::string def = opt->get_default_str();
      if (def.empty()) continue;
      values.push_back(def);
    }
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) joined += (i ? "," : "") + values[i];
    if (joined.size() >= 2 && joined.front() == '[' && joined.back() == ']')
      joined = joined.substr(1, joined.size() - 2);
    args.push_back(name);
    args.push_back(joined);
  }
  return args;
}

inline void write_manifest(const std::string& path, const CLI::App& sub,
                           std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json j;
  j["command"] = sub.get_name();
  j["args"] = resolved_args(sub);
  j["version"] = kVersion;
  if (seed) j["seed"] = *seed;
  j["timestamp"] = utc_timestamp();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

/// Output target: the named file, or `fallback` when the name is empty.
class Sink {
public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot open output file: " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

}  // namespace detail

struct EstimateOptions {
  std::string input;
  std::string z;
  std::string estimator = "tilde";
  std::string kernel = "epanechnikov";
  std::string bandwidth = "rot:1.5";
  std::size_t n_pairs = 1000;
  double ci = 0.0;
  bool truncate = false;
  std::string out;
};

struct CVOptions {
  std::string input;
  int k = 2;
  std::size_t n_pairs = 1000;
  std::string grid;
  std::string kernel = "epanechnikov";
  std::string out;
};

struct BoundsOptions {
  std::string prop;
  std::size_t n = 0;
  double h = 0.0;
  double t = 0.0;
  double t_prime = 0.0;
  int k = 2;
  std::size_t dim = 1;
  std::string kernel = "epanechnikov";
  std::string constants;
};

struct SimulateOptions {
  int setting = 1;
  std::size_t n = 100;
  std::size_t reps = 500;
  std::vector<double> alpha_h{1.5};
  std::vector<std::string> estimators{"all"};
  std::string h_source = "rot";
  std::size_t n_pairs = 1000;
  std::string kernel = "epanechnikov";
  std::uint64_t seed = 1;
  std::string out;
  std::string local_out;
};

struct CVStudyOptions {
  int setting = 2;
  std::vector<std::size_t> n_values{100, 500, 1000, 2000};
  std::size_t reps = 100;
  std::size_t n_pairs = 1000;
  std::vector<double> multipliers{0.5, 0.75, 1.0, 1.5, 2.0};
  std::vector<std::string> estimators{"all"};
  std::string kernel = "epanechnikov";
  std::uint64_t seed = 1;
  std::string out;
  std::string metrics_out;
};

namespace detail {

inline double resolve_bandwidth(const EstimateOptions& o, const Sample& s, const KernelSpec& spec,
                                std::size_t threads, std::ostream& err) {
  if (o.bandwidth == "cv") {
    CVConfig cv;
    cv.kernel = spec;
    cv.n_pairs = o.n_pairs;
    cv.h_grid = default_h_grid(s);
    cv.threads = threads;
    const double h = cv_select(s, cv).h_cv;
    err << "cross-validated bandwidth: " << format_double(h) << '\n';
    return h;
  }
  if (o.bandwidth.rfind("rot:", 0) == 0) return rule_of_thumb(s, to_double(o.bandwidth.substr(4), "--bandwidth"));
  const double h = to_double(o.bandwidth, "--bandwidth");
  if (!(h > 0.0)) throw UsageError("--bandwidth must be positive");
  return h;
}

inline int run_estimate(const EstimateOptions& o, std::size_t threads, std::ostream& out,
                        std::ostream& err) {
  const Sample s = read_sample_csv(o.input);
  const KernelSpec spec = parse_kernel(o.kernel, s.dim());
  const Estimator kind = parse_estimators({o.estimator}).front();
  if (o.ci != 0.0 && !(o.ci > 0.0 && o.ci < 1.0)) throw UsageError("--ci must lie in (0, 1)");
  const std::vector<Point> grid = parse_points(o.z, s.dim());
  const double h = resolve_bandwidth(o, s, spec, threads, err);

  struct Row {
    std::optional<TauEstimate> est;
    std::optional<ConfidenceInterval> ci;
    bool clamped = false;
  };
  std::vector<Row> rows(grid.size());
  LocalEstimator local(s, spec);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      rows[i].est = local.estimate(kind, grid[i], h);
    } catch (const AllWeightsZero&) {
      return;
    } catch (const DegenerateWindow&) {
      return;
    }
    if (o.ci > 0.0) {
      try {
        const VarianceEstimate v = estimate_variance(kind, s, grid[i], spec, h);
        rows[i].ci = confidence_interval(*rows[i].est, v, s.size(), o.ci, o.truncate);
        rows[i].clamped = v.clamped;
      } catch (const SparseWindow&) {
      }
    }
  });

  Sink sink(o.out, out);
  std::ostream& os = *sink;
  os << "z,estimate,s_n,n_effective";
  if (o.ci > 0.0) os << ",se,ci_lo,ci_hi,var_clamped";
  os << '\n';
  std::size_t ties = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string zs;
    for (std::size_t d = 0; d < grid[i].size(); ++d) zs += (d ? ";" : "") + format_double(grid[i][d]);
    os << zs << ',';
    const Row& r = rows[i];
    if (r.est) {
      os << format_double(r.est->value) << ',' << format_double(r.est->s_n) << ','
         << r.est->n_effective;
      ties = std::max(ties, r.est->tied_pairs);
    } else {
      os << "NA,NA,0";
    }
    if (o.ci > 0.0) {
      if (r.ci)
        os << ',' << format_double(r.ci->standard_error) << ',' << format_double(r.ci->lower) << ','
           << format_double(r.ci->upper) << ',' << (r.clamped ? "true" : "false");
      else
        os << ",NA,NA,NA,NA";
    }
    os << '\n';
  }
  if (ties > 0) err << "warning: " << ties << " tied pair(s) among weighted observations\n";
  return kExitOk;
}

inline int run_cv(const CVOptions& o, std::size_t threads, std::ostream& out, std::ostream& err) {
  const Sample s = read_sample_csv(o.input);
  CVConfig cv;
  try {
    cv.k = concordance_from_int(o.k);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  cv.kernel = parse_kernel(o.kernel, s.dim());
  cv.n_pairs = o.n_pairs;
  cv.threads = threads;
  if (o.grid.empty()) {
    cv.h_grid = default_h_grid(s);
  } else {
    auto g = parse_range(o.grid, "--grid");
    if (!g) throw UsageError("--grid expects lo:hi:count");
    cv.h_grid = *g;
  }
  const CVResult res = cv_select(s, cv);
  Sink sink(o.out, out);
  std::ostream& os = *sink;
  os << "h,cv\n";
  for (const auto& pt : res.curve) os << format_double(pt.h) << ',' << na_or(pt.value) << '\n';
  err << "selected h: " << format_double(res.h_cv) << " (tilde_h " << format_double(res.selection.tilde_h)
      << ", " << res.selection.pairs.size() << " pairs)\n";
  if (!o.out.empty()) out << format_double(res.h_cv) << '\n';
  return kExitOk;
}

inline DensityConstants read_constants(const std::string& path) {
  DensityConstants dc;
  if (path.empty()) return dc;
  const auto kv = read_key_values(path);
  for (const auto& [key, value] : kv) {
    std::string k = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
    const double v = to_double(value, path + ": " + key);
    if (k == "f_min")
      dc.f_min = v;
    else if (k == "f_max")
      dc.f_max = v;
    else if (k == "f_z")
      dc.f_z = v;
    else if (k == "c_k_alpha")
      dc.c_k_alpha = v;
    else if (k == "c_ktilde_2")
      dc.c_ktilde_2 = v;
    else if (k == "c_xz_alpha")
      dc.c_xz_alpha = v;
    else if (k == "alpha")
      dc.alpha = static_cast<int>(v);
    else
      throw Error(path + ": unknown constant '" + key + "'");
  }
  return dc;
}

inline int run_bounds(const BoundsOptions& o, std::ostream& out) {
  const KernelSpec spec = parse_kernel(o.kernel, o.dim);
  const DensityConstants dc = read_constants(o.constants);
  const KernelConstants kc = constants(spec);
  BoundResult r;
  if (o.prop == "positivity") {
    r = positivity_bound(o.n, o.h, o.dim, kc, dc);
  } else if (o.prop == "deviation") {
    Concordance k;
    try {
      k = concordance_from_int(o.k);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    r = deviation_bound(k, o.n, o.h, o.dim, o.t, o.t_prime, kc, dc);
  } else {
    throw UsageError("--prop must be positivity or deviation");
  }
  out << "quantity,value\n";
  for (const auto& c : r.conditions) out << "condition: " << c.name << ',' << (c.ok ? "ok" : "violated") << '\n';
  out << "threshold_x," << na_or(r.threshold_x) << '\n';
  out << "raw_bound," << format_double(r.raw_bound) << '\n';
  out << "prob_bound," << format_double(r.prob_bound) << '\n';
  return kExitOk;
}

inline void write_integrated(std::ostream& os, const std::vector<IntegratedRow>& rows) {
  for (const auto& r : rows)
    os << estimator_name(r.estimator) << ',' << format_double(r.alpha_h) << ',' << na_or(r.ibias) << ','
       << na_or(r.isd) << ',' << na_or(r.imse) << ',' << r.undefined << ',' << r.points_used << '\n';
}

inline int run_simulate(const SimulateOptions& o, std::size_t threads, std::ostream& out) {
  MCConfig mc;
  try {
    mc.setting = {setting_from_int(o.setting), o.n, o.seed};
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  mc.reps = o.reps;
  mc.alpha_h = o.alpha_h;
  mc.estimators = parse_estimators(o.estimators);
  if (o.h_source == "rot")
    mc.source = BandwidthSource::rule_of_thumb;
  else if (o.h_source == "cv")
    mc.source = BandwidthSource::cross_validation;
  else
    throw UsageError("--h-source must be rot or cv");
  mc.n_pairs = o.n_pairs;
  mc.kernel = parse_kernel(o.kernel, 1);
  mc.threads = threads;
  const MCReport rep = run_mc(mc);

  Sink sink(o.out, out);
  std::ostream& os = *sink;
  os << "estimator,alpha_h,ibias,isd,imse,undefined,points\n";
  write_integrated(os, rep.integrated);
  if (!o.local_out.empty()) {
    Sink local(o.local_out, out);
    std::ostream& ls = *local;
    ls << "z,estimator,alpha_h,bias,sd,mse\n";
    for (const auto& r : rep.local)
      ls << format_double(r.z) << ',' << estimator_name(r.estimator) << ',' << format_double(r.alpha_h) << ','
         << na_or(r.stats.bias) << ',' << na_or(r.stats.sd) << ',' << na_or(r.stats.mse) << '\n';
  }
  return kExitOk;
}

inline int run_cv_study_cmd(const CVStudyOptions& o, std::size_t threads, std::ostream& out) {
  CVStudyConfig c;
  try {
    c.setting = setting_from_int(o.setting);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  c.n_values = o.n_values;
  c.reps = o.reps;
  c.n_pairs = o.n_pairs;
  if (!o.metrics_out.empty()) c.multipliers = o.multipliers;
  c.estimators = parse_estimators(o.estimators);
  c.seed = o.seed;
  c.kernel = parse_kernel(o.kernel, 1);
  c.threads = threads;
  const auto rows = run_cv_study(c);

  Sink sink(o.out, out);
  std::ostream& os = *sink;
  os << "n,mean_h_cv,sd_h_cv,h_ref\n";
  for (const auto& r : rows)
    os << r.n << ',' << format_double(r.mean_h_cv) << ',' << format_double(r.sd_h_cv) << ','
       << format_double(r.h_ref) << '\n';
  if (!o.metrics_out.empty()) {
    Sink metrics(o.metrics_out, out);
    std::ostream& ms = *metrics;
    ms << "n,estimator,multiplier,ibias,isd,imse,undefined,points\n";
    for (const auto& r : rows) {
      for (const auto& ir : r.integrated) {
        ms << r.n << ',';
        write_integrated(ms, {ir});
      }
    }
  }
  return kExitOk;
}

}  // namespace detail

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 runtime
/// error, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Kernel estimation of conditional Kendall's tau", "condtau"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file; options go in a [simulate] or [cv-study] section");
  app.set_version_flag("--version", std::string(kVersion));
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: CONDTAU_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  std::string manifest;
  app.add_option("--manifest", manifest, "write the run manifest (JSON) to this path");

  EstimateOptions eo;
  auto* est = app.add_subcommand("estimate", "conditional Kendall's tau at given covariate points");
  est->add_option("--input", eo.input, "CSV with header x1,x2,z1[,z2,...]")->required();
  est->add_option("--z", eo.z, "points: v1,v2,... or lo:hi:count; 'a,b;c,d' when p > 1")->required();
  est->add_option("--estimator", eo.estimator, "tau1, tau2, tau3 or tilde")->capture_default_str();
  est->add_option("--kernel", eo.kernel, "epanechnikov, gaussian or uniform")->capture_default_str();
  est->add_option("--bandwidth", eo.bandwidth, "h, rot:<alpha> or cv")->capture_default_str();
  est->add_option("--n-pairs", eo.n_pairs, "pairs for --bandwidth cv")->capture_default_str();
  est->add_option("--ci", eo.ci, "confidence level of pointwise intervals");
  est->add_flag("--truncate-ci", eo.truncate, "clip interval bounds to [-1, 1]");
  est->add_option("--out", eo.out, "output CSV (default: stdout)");

  CVOptions co;
  auto* cvb = app.add_subcommand("cv-bandwidth", "leave-pair-out cross-validation curve");
  cvb->add_option("--input", co.input, "CSV with header x1,x2,z1[,z2,...]")->required();
  cvb->add_option("--k", co.k, "concordance function 1, 2 or 3")->capture_default_str();
  cvb->add_option("--n-pairs", co.n_pairs, "number of closest pairs")->capture_default_str();
  cvb->add_option("--grid", co.grid, "bandwidth grid lo:hi:count (default: 20 points around the rule of thumb)");
  cvb->add_option("--kernel", co.kernel)->capture_default_str();
  cvb->add_option("--out", co.out, "output CSV (default: stdout)");

  BoundsOptions bo;
  auto* bnd = app.add_subcommand("bounds", "finite-sample probability bounds");
  bnd->set_help_flag("--help", "Print this help message and exit");
  bnd->add_option("--prop", bo.prop, "positivity or deviation")->required();
  bnd->add_option("--n", bo.n)->required();
  bnd->add_option("--h", bo.h)->required();
  bnd->add_option("--t", bo.t, "deviation: density slack t");
  bnd->add_option("--t-prime", bo.t_prime, "deviation: U-statistic slack t'");
  bnd->add_option("--k", bo.k, "concordance function 1, 2 or 3")->capture_default_str();
  bnd->add_option("--dim", bo.dim, "covariate dimension p")->capture_default_str();
  bnd->add_option("--kernel", bo.kernel)->capture_default_str();
  bnd->add_option("--constants", bo.constants,
                  "key = value file: f_min, f_max, f_z, C_K_alpha, C_Ktilde_2, C_XZ_alpha, alpha");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the estimators");
  sim->add_option("--setting", so.setting, "1 or 2")->capture_default_str();
  sim->add_option("--n", so.n)->capture_default_str();
  sim->add_option("--reps", so.reps)->capture_default_str();
  sim->add_option("--alpha-h", so.alpha_h, "bandwidth multipliers")->delimiter(',')->capture_default_str();
  sim->add_option("--estimators", so.estimators, "all or a list of tau1,tau2,tau3,tilde")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--h-source", so.h_source, "rot or cv")->capture_default_str();
  sim->add_option("--n-pairs", so.n_pairs)->capture_default_str();
  sim->add_option("--kernel", so.kernel)->capture_default_str();
  sim->add_option("--seed", so.seed)->capture_default_str();
  sim->add_option("--out", so.out, "integrated measures CSV (default: stdout)");
  sim->add_option("--local-out", so.local_out, "local bias, sd and mse curves CSV");

  CVStudyOptions vo;
  auto* cvs = app.add_subcommand("cv-study", "distribution of the cross-validated bandwidth");
  cvs->add_option("--setting", vo.setting)->capture_default_str();
  cvs->add_option("--n", vo.n_values, "sample sizes")->delimiter(',')->capture_default_str();
  cvs->add_option("--reps", vo.reps)->capture_default_str();
  cvs->add_option("--n-pairs", vo.n_pairs)->capture_default_str();
  cvs->add_option("--multipliers", vo.multipliers, "h = multiplier * h_CV, used with --metrics-out")
      ->delimiter(',')
      ->capture_default_str();
  cvs->add_option("--estimators", vo.estimators)->delimiter(',')->capture_default_str();
  cvs->add_option("--kernel", vo.kernel)->capture_default_str();
  cvs->add_option("--seed", vo.seed)->capture_default_str();
  cvs->add_option("--out", vo.out, "bandwidth summary CSV (default: stdout)");
  cvs->add_option("--metrics-out", vo.metrics_out, "integrated measures per multiplier");

  std::string replay_path;
  auto* rpl = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  rpl->add_option("manifest", replay_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::size_t nthreads = detail::resolve_threads(threads);
    const CLI::App* used = nullptr;
    std::optional<std::uint64_t> seed;
    int code = kExitOk;
    if (*est) {
      used = est;
      code = detail::run_estimate(eo, nthreads, out, err);
    } else if (*cvb) {
      used = cvb;
      code = detail::run_cv(co, nthreads, out, err);
    } else if (*bnd) {
      used = bnd;
      code = detail::run_bounds(bo, out);
    } else if (*sim) {
      used = sim;
      seed = so.seed;
      code = detail::run_simulate(so, nthreads, out);
    } else if (*cvs) {
      used = cvs;
      seed = vo.seed;
      code = detail::run_cv_study_cmd(vo, nthreads, out);
    } else if (*rpl) {
      std::ifstream in(replay_path);
      if (!in) throw Error("cannot open manifest: " + replay_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw Error(replay_path + ": " + e.what());
      }
      std::vector<std::string> args{"condtau"};
      if (threads > 0) {
        args.push_back("--threads");
        args.push_back(std::to_string(threads));
      }
      args.push_back(j.at("command").get<std::string>());
      for (const auto& a : j.at("args")) args.push_back(a.get<std::string>());
      std::vector<const char*> ptrs;
      for (const auto& a : args) ptrs.push_back(a.c_str());
      return run(static_cast<int>(ptrs.size()), ptrs.data(), out, err);
    }
    if (manifest.empty() && used) {
      // Files written by a command are accompanied by a manifest.
      const CLI::Option* o = used->get_option_no_throw("--out");
      if (o && o->count() > 0) manifest = o->as<std::string>() + ".manifest.json";
    }
    if (!manifest.empty() && used) detail::write_manifest(manifest, *used, seed);
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace condtau::cli
