#pragma once

/// \file cli.hpp
/// \brief The wavegauge command line: subcommands, config resolution,
/// artifact output and exit codes.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wavegauge/asymptotic.hpp"
#include "wavegauge/config.hpp"
#include "wavegauge/data.hpp"
#include "wavegauge/driver.hpp"
#include "wavegauge/geodesic.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/suites.hpp"

namespace wavegauge::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2, kRuntimeError = 3 };

/// A runtime integration failure; the last valid state has been written.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

inline const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"run", "data", "perturbation", "grid", "evolve", "checks",
                                       "frame", "gauge", "asymptotic", "geodesic"};
  return s;
}

/// [checks] is shared by several subcommands, so its keys are validated
/// against the full list rather than per subcommand.
inline const std::set<std::string>& known_checks() {
  static const std::set<std::string> s{"checks.gauge_residual", "checks.energy_drift", "checks.gauge_linf",
                                       "checks.decay_exponent", "checks.decay_tol", "checks.fit_t0",
                                       "checks.fit_t1", "checks.epsilon", "checks.norm_residual"};
  return s;
}

inline std::string section_of(const std::string& key) {
  const auto dot = key.find('.');
  return dot == std::string::npos ? std::string() : key.substr(0, dot);
}

/// Keys in unknown sections, or unread keys in the sections a subcommand
/// owns, are configuration errors. Keys of other subcommands' sections are
/// ignored so that one file can serve every subcommand.
inline void check_keys(const config::Config& cfg, const std::set<std::string>& owned) {
  std::string bad;
  config::Config probe = cfg;
  for (const auto& [k, v] : cfg.entries()) {
    const std::string sec = section_of(k);
    if (!known_sections().count(sec) || (sec == "checks" && !known_checks().count(k)))
      bad += (bad.empty() ? "" : ", ") + k;
    else if (!owned.count(sec) || sec == "checks")
      probe.get_string(k, "");
  }
  if (!bad.empty()) throw ConfigError("unknown config keys: " + bad);
  probe.require_all_used();
}

inline std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json metrics_json(const suites::SuiteResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return m;
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

inline Vec3 vec3(const config::Config& cfg, const std::string& key, const Vec3& def) {
  if (!cfg.has(key)) return def;
  const auto v = cfg.get_doubles(key);
  if (v.size() != 3) throw ConfigError(key + ": expected three numbers");
  return {v[0], v[1], v[2]};
}

}  // namespace detail

/// State shared by one invocation.
struct Context {
  std::string subcommand;
  config::Config cfg;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 7;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
  std::vector<suites::SuiteResult> results;
  json extra = json::object();
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(out_dir);
    detail::write_text(out_dir / name, text);
    files.push_back(name);
  }

  void record(suites::SuiteResult r) {
    *out << (r.pass ? "PASS " : "FAIL ") << subcommand << "/" << r.name << ": " << r.detail << "\n";
    results.push_back(std::move(r));
  }

  bool all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  }

  /// Writes <subcommand>.json. The timestamp is the only field that varies
  /// between identical runs.
  void write_summary(int exit_code, const std::string& error = "") {
    json j;
    j["subcommand"] = subcommand;
    j["timestamp"] = detail::timestamp();
    j["seed"] = seed;
    j["exit_code"] = exit_code;
    json c = json::object();
    for (const auto& [k, v] : cfg.entries()) c[k] = v;
    j["config"] = c;
    json s = json::array();
    for (const auto& r : results)
      s.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"metrics", detail::metrics_json(r)}});
    j["suites"] = s;
    j["results"] = extra;
    if (!error.empty()) j["error"] = error;
    std::vector<std::string> outputs = files;
    j["outputs"] = outputs;
    std::filesystem::create_directories(out_dir);
    detail::write_text(out_dir / (subcommand + ".json"), j.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------
// Typed settings

struct DataSettings {
  data::DataConfig cfg;
  data::Perturbation pert;
};

inline DataSettings read_data(const config::Config& c) {
  DataSettings d;
  d.cfg.M = c.get_double("data.M", 0.0);
  d.cfg.r_inner = c.get_double("data.r_inner", 0.5);
  d.cfg.r_outer = c.get_double("data.r_outer", 4.0);
  d.cfg.smoothing.lo = c.get_double("data.smoothing_lo", 0.5);
  d.cfg.smoothing.hi = c.get_double("data.smoothing_hi", 1.0);
  // bumpK = a b amplitude cx cy cz width [dt]
  for (const auto& key : c.keys_with_prefix("perturbation.bump")) {
    const auto t = c.get_tokens(key);
    if (t.size() != 7 && !(t.size() == 8 && t[7] == "dt"))
      throw ConfigError(key + ": expected 'a b amplitude cx cy cz width [dt]'");
    data::Bump b;
    try {
      b.a = std::stoi(t[0]);
      b.b = std::stoi(t[1]);
      b.amplitude = std::stod(t[2]);
      b.center = {std::stod(t[3]), std::stod(t[4]), std::stod(t[5])};
      b.width = std::stod(t[6]);
    } catch (const std::exception&) {
      throw ConfigError(key + ": malformed number");
    }
    b.time_derivative = t.size() == 8;
    d.pert.push_back(b);
  }
  return d;
}

/// Radius outside of which the data is the exact static exterior.
inline double data_support(const DataSettings& d) {
  double s = d.cfg.smoothing.hi;
  for (const auto& b : d.pert) s = std::max(s, norm(b.center) + b.width);
  return s;
}

inline void validate_data(const DataSettings& d) {
  d.cfg.validate();
  try {
    data::validate_perturbation(d.pert, d.cfg.smoothing.hi);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("perturbation: ") + e.what());
  }
}

inline GridSpec read_grid(const config::Config& c, int n_default, double t_default) {
  GridSpec g;
  g.n = c.get_int("grid.n", n_default);
  g.extent = c.get_double("grid.extent", 4.0);
  g.dt_factor = c.get_double("grid.dt_factor", 0.25);
  g.t_final = c.get_double("grid.t_final", t_default);
  return g;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_check_frame(Context& ctx) {
  const int samples = ctx.cfg.get_int("frame.samples", 1000);
  const double tol = ctx.cfg.get_double("frame.tol", 1e-12);
  detail::check_keys(ctx.cfg, {"run", "frame"});
  if (samples < 1) throw ConfigError("frame.samples must be positive");
  ctx.record(suites::frame_suite(samples, ctx.seed, tol));
  return ctx.all_pass() ? kPass : kFail;
}

inline int cmd_check_gauge(Context& ctx) {
  const int samples = ctx.cfg.get_int("gauge.samples", 100);
  const double tol = ctx.cfg.get_double("gauge.tol", 1e-9);
  detail::check_keys(ctx.cfg, {"run", "gauge"});
  if (samples < 1) throw ConfigError("gauge.samples must be positive");
  ctx.record(suites::gauge_suite(samples, ctx.seed, tol));
  return ctx.all_pass() ? kPass : kFail;
}

inline int cmd_build_data(Context& ctx) {
  const DataSettings d = read_data(ctx.cfg);
  GridSpec g = read_grid(ctx.cfg, 33, 0.0);
  const double tol = ctx.cfg.get_double("checks.gauge_residual", 1e-10);
  const bool discrete = ctx.cfg.get_string("data.completion", "analytic") == "discrete";
  if (ctx.cfg.has("data.completion") && !discrete && ctx.cfg.get_string("data.completion", "") != "analytic")
    throw ConfigError("data.completion must be 'analytic' or 'discrete'");
  detail::check_keys(ctx.cfg, {"run", "data", "perturbation", "grid", "checks"});
  validate_data(d);
  g.validate(data_support(d));
  if (!(d.cfg.r_outer >= std::sqrt(3.0) * g.extent))
    throw ConfigError("data.r_outer must cover the grid corners (>= sqrt(3) * grid.extent)");

  const MetricState s = data::build_cauchy_data(d.cfg, g, d.pert,
                                                discrete ? data::Completion::Discrete : data::Completion::Analytic);
  const double gres = data::pointwise_gauge_residual(d.cfg, d.pert, s);
  const auto cr = data::constraint_residuals(s);
  // constraints are solved only by the exterior, not by the blend or the bumps
  const double r_ext = data_support(d) + 4.0 * g.spacing();
  double ham = 0.0, mom = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        if (norm(g.point(i, j, k)) < r_ext) continue;
        const std::size_t p = g.index(i, j, k);
        ham = std::max(ham, std::fabs(cr.hamiltonian[p]));
        for (const auto& f : cr.momentum) mom = std::max(mom, std::fabs(f[p]));
      }
  std::ostringstream csv;
  csv << "quantity,value\n"
      << "max_abs_h," << driver::format_double(s.max_abs_h()) << "\n"
      << "gauge_residual," << driver::format_double(gres) << "\n"
      << "exterior_radius," << driver::format_double(r_ext) << "\n"
      << "hamiltonian_exterior_linf," << driver::format_double(ham) << "\n"
      << "momentum_exterior_linf," << driver::format_double(mom) << "\n";
  ctx.write("data.csv", csv.str());
  std::filesystem::create_directories(ctx.out_dir);
  driver::write_checkpoint((ctx.out_dir / "initial.chk").string(), s);
  ctx.files.push_back("initial.chk");
  ctx.extra["max_abs_h"] = s.max_abs_h();
  ctx.extra["exterior_radius"] = r_ext;
  ctx.extra["hamiltonian_exterior_linf"] = ham;
  ctx.extra["momentum_exterior_linf"] = mom;

  suites::SuiteResult r;
  r.name = "gauge-residual";
  r.metric("gauge_residual", gres);
  r.pass = gres <= tol;
  r.detail = "max gauge residual on the initial slice " + suites::detail::sci(gres) + " (tol " +
             suites::detail::sci(tol) + "), n=" + std::to_string(g.n);
  ctx.record(r);
  return ctx.all_pass() ? kPass : kFail;
}

inline int cmd_evolve(Context& ctx) {
  const auto& c = ctx.cfg;
  const std::string initial = c.get_string("evolve.initial", "cauchy");
  const DataSettings d = read_data(c);
  GridSpec g = read_grid(c, 33, 1.0);
  driver::RunOptions ro;
  ro.evolve.octant_symmetry = c.get_bool("evolve.octant", false);
  ro.evolve.mask_radius = c.get_double("evolve.mask_radius", 0.0);
  ro.evolve.dissipation = c.get_bool("evolve.dissipation", false);
  ro.evolve.dissipation_sigma = c.get_double("evolve.dissipation_sigma", 0.02);
  ro.output_every = c.get_int("evolve.output_every", 1);
  ro.energy.max_order = c.get_int("evolve.max_order", 0);
  ro.energy.gamma = c.get_double("evolve.gamma", 0.25);
  ro.energy.mask_radius = c.get_double("evolve.energy_mask_radius", 0.0);
  ro.energy.exclude_radius = c.get_double("evolve.energy_exclude_radius", 0.0);
  ro.gauge_exclude = c.get_double("evolve.gauge_exclude_radius", 0.0);
  const double core = c.get_double("evolve.core_radius", 0.5);
  const double sigma = c.get_double("evolve.packet_sigma", 1.0);
  const double amp = c.get_double("evolve.packet_amplitude", 1e-6);
  const std::string chk = c.get_string("evolve.checkpoint", "");
  const std::optional<double> drift_tol =
      c.has("checks.energy_drift") ? std::optional<double>(c.get_double("checks.energy_drift", 0)) : std::nullopt;
  const std::optional<double> gauge_tol =
      c.has("checks.gauge_linf") ? std::optional<double>(c.get_double("checks.gauge_linf", 0)) : std::nullopt;
  const double fit_t0 = c.get_double("checks.fit_t0", 0.0);
  const double fit_t1 = c.get_double("checks.fit_t1", HUGE_VAL);
  const double epsilon = c.get_double("checks.epsilon", 0.0);
  const std::optional<double> decay_target =
      c.has("checks.decay_exponent") ? std::optional<double>(c.get_double("checks.decay_exponent", 0)) : std::nullopt;
  const double decay_tol = c.get_double("checks.decay_tol", 0.15);
  detail::check_keys(c, {"run", "data", "perturbation", "grid", "evolve", "checks"});

  // validation before any allocation
  if (ro.output_every < 1) throw ConfigError("evolve.output_every must be at least 1");
  if (ro.energy.max_order < 0 || ro.energy.max_order > 2) throw ConfigError("evolve.max_order must be 0..2");
  if (!(ro.energy.gamma > 0.0 && ro.energy.gamma <= 0.5)) throw ConfigError("evolve.gamma must lie in (0, 1/2]");
  MetricState s0;
  try {
    if (initial == "cauchy") {
      validate_data(d);
      g.validate(data_support(d));
      if (!(d.cfg.r_outer >= std::sqrt(3.0) * g.extent))
        throw ConfigError("data.r_outer must cover the grid corners (>= sqrt(3) * grid.extent)");
      s0 = data::build_cauchy_data(d.cfg, g, d.pert);
    } else if (initial == "static") {
      d.cfg.validate();
      if (!(core > 2.0 * d.cfg.M)) throw ConfigError("evolve.core_radius must exceed 2 data.M");
      g.validate(core);
      s0 = data::static_schwarzschild(d.cfg.M, g, core);
    } else if (initial == "packet") {
      if (!(sigma > 0.0)) throw ConfigError("evolve.packet_sigma must be positive");
      if (!(std::fabs(amp) < 0.125)) throw ConfigError("evolve.packet_amplitude must be below 1/8");
      g.validate(3.0 * sigma);
      s0 = data::flat_packet(g, 1, 1, amp, sigma);
    } else if (initial == "checkpoint") {
      if (chk.empty()) throw ConfigError("evolve.initial = checkpoint needs evolve.checkpoint");
      try {
        s0 = driver::read_checkpoint(chk);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("evolve.checkpoint: ") + e.what());
      }
      if (c.has("grid.t_final")) s0.grid.t_final = g.t_final;
      g = s0.grid;
    } else {
      throw ConfigError("evolve.initial must be cauchy, static, packet or checkpoint");
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("initial data: ") + e.what());
  }
  ro.t_final = g.t_final;

  const driver::RunResult res = driver::run(s0, ro);
  std::ostringstream csv;
  driver::write_csv(csv, res.series);
  ctx.write("diagnostics.csv", csv.str());
  std::filesystem::create_directories(ctx.out_dir);
  ctx.extra["steps"] = res.steps;
  ctx.extra["t_end"] = res.final_state.t;
  if (!res.completed) {
    driver::write_checkpoint((ctx.out_dir / "last_valid.chk").string(), res.final_state);
    ctx.files.push_back("last_valid.chk");
    throw RuntimeFailure("evolution stopped at t = " + driver::format_double(res.final_state.t) + ": " +
                         res.failure);
  }
  driver::write_checkpoint((ctx.out_dir / "final.chk").string(), res.final_state);
  ctx.files.push_back("final.chk");

  const auto& rows = res.series.rows;
  suites::SuiteResult run;
  run.name = "evolution";
  run.pass = true;
  run.metric("steps", res.steps);
  run.metric("t_end", res.final_state.t);
  run.metric("max_abs_h", rows.back().max_abs_h);
  run.detail = std::to_string(res.steps) + " steps to t = " + driver::format_double(res.final_state.t) +
               ", max|h| " + suites::detail::sci(rows.back().max_abs_h);
  ctx.record(run);
  if (drift_tol) {
    double drift = 0.0;
    const double E0 = rows.front().E[0];
    for (const auto& r : rows) drift = std::max(drift, E0 > 0.0 ? std::fabs(r.E[0] - E0) / E0 : std::fabs(r.E[0]));
    suites::SuiteResult e;
    e.name = "energy-drift";
    e.metric("max_rel_drift", drift);
    e.pass = drift <= *drift_tol;
    e.detail = "max relative E0 drift " + suites::detail::sci(drift) + " (tol " + suites::detail::sci(*drift_tol) + ")";
    ctx.record(e);
  }
  std::optional<diag::DecayReport> fit;
  try {
    fit = diag::decay_fit(res.series, fit_t0, fit_t1, epsilon);
  } catch (const std::runtime_error&) {
  }
  if (fit) {
    ctx.extra["fit"] = {{"t0", fit_t0},
                        {"t1", std::min(fit_t1, res.final_state.t)},
                        {"max_dh_decay_exponent", fit->p_all},
                        {"max_dh_decay_r2", fit->all.r2},
                        {"max_dh_tu_decay_exponent", fit->p_tu},
                        {"energy_growth_exponents", fit->growth},
                        {"energy_growth_constants", fit->C}};
  } else {
    ctx.extra["fit"] = nullptr;
  }
  if (decay_target) {
    suites::SuiteResult e;
    e.name = "decay-exponent";
    if (fit) {
      const double p = fit->p_all;
      e.metric("exponent", p);
      e.metric("r2", fit->all.r2);
      e.pass = std::fabs(p - *decay_target) <= decay_tol * std::fabs(*decay_target);
      e.detail = "max|dh| decay exponent " + suites::detail::fixed(p) + " (target " +
                 suites::detail::fixed(*decay_target) + " +- " + suites::detail::fixed(100.0 * decay_tol, 0) + "%)";
    } else {
      e.pass = false;
      e.detail = "too few diagnostics rows in the fit window";
    }
    ctx.record(e);
  }
  if (gauge_tol) {
    double gl = 0.0;
    for (const auto& r : rows) gl = std::max(gl, r.gauge_linf);
    suites::SuiteResult e;
    e.name = "gauge-monitor";
    e.metric("max_gauge_linf", gl);
    e.pass = gl <= *gauge_tol;
    e.detail = "max gauge residual " + suites::detail::sci(gl) + " (tol " + suites::detail::sci(*gauge_tol) + ")";
    ctx.record(e);
  }
  return ctx.all_pass() ? kPass : kFail;
}

namespace detail {

/// Parses "i j k alpha beta a" where alpha, beta are digit strings of
/// derivative indices (0 = t, 1..3 = x, y, z), "-" for none.
inline asym::Term parse_term(const std::string& key, const std::vector<std::string>& t) {
  if (t.size() != 6) throw ConfigError(key + ": expected 'i j k alpha beta a'");
  asym::Term term;
  try {
    term.i = std::stoi(t[0]);
    term.j = std::stoi(t[1]);
    term.k = std::stoi(t[2]);
    term.a = std::stod(t[5]);
  } catch (const std::exception&) {
    throw ConfigError(key + ": malformed number");
  }
  auto idx = [&](const std::string& s) {
    std::vector<int> v;
    if (s == "-") return v;
    for (char ch : s) {
      if (ch < '0' || ch > '3') throw ConfigError(key + ": derivative indices must be digits 0..3");
      v.push_back(ch - '0');
    }
    return v;
  };
  term.alpha = idx(t[3]);
  term.beta = idx(t[4]);
  return term;
}

}  // namespace detail

inline int cmd_asymptotic(Context& ctx) {
  const auto& c = ctx.cfg;
  const std::string name = c.get_string("asymptotic.preset", "riccati");
  const double w0 = c.get_double("asymptotic.w0", 1.0);
  struct Defaults {
    double Q, s_max;
    int markers;
  };
  const Defaults def = name == "riccati"        ? Defaults{1.0, 5.0, 5}
                       : name == "john-burgers" ? Defaults{6.0, 4.0, 1201}
                       : name == "triangular"   ? Defaults{4.0, 10.0, 81}
                       : name == "u-laplace-u"  ? Defaults{6.0, 50.0, 241}
                       : name == "einstein"     ? Defaults{2.0, 10.0, 21}
                                                : Defaults{4.0, 10.0, 81};
  const double Q = c.get_double("asymptotic.Q", def.Q);
  const double s_max = c.get_double("asymptotic.s_max", def.s_max);
  const int markers = c.get_int("asymptotic.markers", def.markers);
  const Vec3 omega = detail::vec3(c, "asymptotic.omega", {0.0, 0.0, 1.0});
  asym::GenericOptions go;
  go.ds_max = c.get_double("asymptotic.ds_max", go.ds_max);
  go.output_every = c.get_double("asymptotic.output_every", go.output_every);
  asym::EinsteinOptions eo;
  eo.ds = c.get_double("asymptotic.ds", eo.ds);
  eo.output_every = go.output_every;
  asym::QuadraticSpec custom;
  if (name == "custom") {
    custom.unknowns = c.get_int("asymptotic.unknowns", 1);
    for (const auto& key : c.keys_with_prefix("asymptotic.term"))
      custom.terms.push_back(detail::parse_term(key, c.get_tokens(key)));
  }
  detail::check_keys(c, {"run", "asymptotic"});

  if (!(Q > 0.0) || markers < 2) throw ConfigError("asymptotic.Q must be positive and asymptotic.markers >= 2");
  if (!(s_max > 0.0)) throw ConfigError("asymptotic.s_max must be positive");
  if (!(go.ds_max > 0.0) || !(go.output_every > 0.0) || !(eo.ds > 0.0))
    throw ConfigError("asymptotic step sizes must be positive");
  const double on = norm(omega);
  if (!(on > 0.0)) throw ConfigError("asymptotic.omega must be nonzero");
  const Vec3 w{omega[0] / on, omega[1] / on, omega[2] / on};
  if (!std::isfinite(w0)) throw ConfigError("asymptotic.w0 must be finite");

  if (name == "einstein") {
    asym::EinsteinTrajectory tr;
    try {
      tr = asym::evolve_einstein(
          asym::make_einstein_state(Q, markers, w, [&](double) { return suites::detail::traceless_W(w, w0); }),
          s_max, eo);
    } catch (const asym::IntegrationError& e) {
      ctx.write("last_valid.json", json({{"s", e.last_valid_s()}}).dump(2) + "\n");
      throw RuntimeFailure(e.what());
    }
    std::ostringstream csv;
    asym::write_einstein_csv(csv, tr, driver::format_double);
    ctx.write("einstein.csv", csv.str());
    double drift = 0.0, slope = 0.0, increase = 0.0;
    const auto& first = tr.samples.front();
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const auto& smp = tr.samples[i];
      drift = std::max({drift, smp.max_ULL_drift, smp.max_WTU_drift});
      for (std::size_t l = 0; l < smp.W_LbLb.size(); ++l)
        slope = std::max(slope, std::fabs(smp.W_LbLb[l] - first.W_LbLb[l] + 2.0 * w0 * w0 * smp.s));
      if (i > 0) increase = std::max(increase, smp.constraint - tr.samples[i - 1].constraint);
    }
    ctx.extra["s_end"] = tr.samples.back().s;
    ctx.extra["P"] = first.P.front();
    *ctx.out << "einstein: d_q U_LbLb grows with slope 2P = " << 2.0 * first.P.front() << " to s = "
             << tr.samples.back().s << "\n";
    suites::SuiteResult r;
    r.name = "einstein";
    r.metric("max_invariant_drift", drift);
    r.metric("slope_err", slope);
    r.metric("max_constraint_increase", increase);
    r.pass = drift <= 1e-8 && slope <= 1e-6 && increase <= 1e-8;
    r.detail = "invariant drift " + suites::detail::sci(drift) + ", slope error " + suites::detail::sci(slope) +
               ", constraint increase " + suites::detail::sci(increase);
    ctx.record(r);
    return ctx.all_pass() ? kPass : kFail;
  }

  asym::QuadraticSpec spec;
  try {
    spec = name == "custom" ? custom : asym::preset(name);
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("asymptotic: ") + e.what());
  }
  const int N = spec.unknowns;
  std::function<double(int, double)> U0, W0;
  if (name == "riccati") {
    U0 = [&](int, double q) { return w0 * q; };
    W0 = [&](int, double) { return w0; };
  } else if (name == "john-burgers") {
    U0 = [&](int, double q) { return -w0 * std::cos(q); };
    W0 = [&](int, double q) { return w0 * std::sin(q); };
  } else if (name == "triangular") {
    U0 = [&](int i, double q) { return i == 1 ? w0 * 0.5 * std::sqrt(M_PI) * (1.0 + std::erf(q)) : 0.0; };
    W0 = [&](int i, double q) { return i == 1 ? w0 * std::exp(-q * q) : 0.0; };
  } else if (name == "u-laplace-u") {
    U0 = [&](int, double q) { return w0 * std::exp(-q * q); };
    W0 = [&](int, double q) { return -2.0 * q * w0 * std::exp(-q * q); };
  } else {
    U0 = [&](int, double q) { return w0 * 0.5 * std::sqrt(M_PI) * (1.0 + std::erf(q)); };
    W0 = [&](int, double q) { return w0 * std::exp(-q * q); };
  }
  asym::Trajectory tr;
  try {
    tr = asym::evolve_generic(spec, asym::make_state(N, Q, markers, w, U0, W0), s_max, go);
  } catch (const asym::IntegrationError& e) {
    ctx.write("last_valid.json", json({{"s", e.last_valid_s()}}).dump(2) + "\n");
    throw RuntimeFailure(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("asymptotic: ") + e.what());
  }
  std::ostringstream csv;
  asym::write_trajectory_csv(csv, tr, driver::format_double);
  ctx.write("asymptotic.csv", csv.str());
  const auto& rep = tr.report;
  ctx.extra["blew_up"] = rep.blew_up;
  ctx.extra["s_star"] = rep.blew_up ? json(rep.s_star) : json(nullptr);
  ctx.extra["cause"] = rep.cause;
  ctx.extra["growth"] = asym::to_string(rep.growth);
  ctx.extra["s_end"] = rep.s_end;
  if (rep.blew_up)
    *ctx.out << name << ": blow-up at s* = " << rep.s_star << " (" << rep.cause << ")\n";
  else
    *ctx.out << name << ": no blow-up up to s = " << rep.s_end << ", growth " << asym::to_string(rep.growth) << "\n";

  suites::SuiteResult r;
  r.name = name;
  r.metric("s_end", rep.s_end);
  if (rep.blew_up) r.metric("s_star", rep.s_star);
  if (name == "riccati" || name == "john-burgers") {
    const double expect = (name == "riccati" ? 1.0 : 2.0) / w0;
    const bool finite = w0 > 0.0 && expect <= s_max;
    r.metric("s_star_expected", finite ? expect : HUGE_VAL);
    r.pass = finite ? rep.blew_up && std::fabs(rep.s_star - expect) <= 0.02 * expect : !rep.blew_up;
    r.detail = finite ? "s* = " + suites::detail::fixed(rep.s_star) + ", closed form " + suites::detail::fixed(expect)
                      : std::string("no blow-up expected before s_max");
  } else if (name == "triangular") {
    double err = 0.0;
    for (const auto& sn : tr.snapshots)
      for (std::size_t l = 0; l < sn.markers(); ++l)
        err = std::max(err, std::fabs(sn.W[0][l] - sn.s * sn.W[1][l] * sn.W[1][l]));
    r.metric("max_err", err);
    r.pass = !rep.blew_up && err <= 1e-8;
    r.detail = "max |U_q - s V_q^2| " + suites::detail::sci(err);
  } else if (name == "u-laplace-u") {
    r.pass = !rep.blew_up && std::fabs(rep.s_end - s_max) <= 1e-9 * s_max;
    r.detail = "reached s = " + suites::detail::fixed(rep.s_end, 2) + ", growth " + asym::to_string(rep.growth);
  } else {
    r.pass = true;
    r.detail = rep.blew_up ? "blow-up at s* = " + suites::detail::fixed(rep.s_star) + " (" + rep.cause + ")"
                           : "global to s = " + suites::detail::fixed(rep.s_end, 2) + ", growth " +
                                 asym::to_string(rep.growth);
  }
  ctx.record(r);
  return ctx.all_pass() ? kPass : kFail;
}

inline int cmd_geodesic(Context& ctx) {
  const auto& c = ctx.cfg;
  const std::string background = c.get_string("geodesic.background", "schwarzschild");
  const double M = c.get_double("geodesic.M", 0.1);
  const double r_min = c.get_double("geodesic.r_min", 0.0);
  const std::string chk = c.get_string("geodesic.checkpoint", "");
  const double tau_default = c.get_double("geodesic.tau_max", 100.0);
  geo::GeodesicOptions go;
  go.tol = c.get_double("geodesic.tol", go.tol);
  go.norm_tol = c.get_double("geodesic.norm_tol", go.norm_tol);
  const double dtau = c.get_double("geodesic.sample_every", 0.0);
  const double norm_check = c.get_double("checks.norm_residual", 1e-8);
  std::vector<std::pair<std::string, std::vector<double>>> raw;
  for (const auto& key : c.keys_with_prefix("geodesic.launch")) raw.emplace_back(key, c.get_doubles(key));
  detail::check_keys(c, {"run", "geodesic", "checks"});

  if (raw.empty()) throw ConfigError("geodesic needs at least one geodesic.launchK = t x y z Vt Vx Vy Vz [tau_max]");
  if (!(tau_default >= 0.0)) throw ConfigError("geodesic.tau_max must be nonnegative");
  if (!(dtau >= 0.0)) throw ConfigError("geodesic.sample_every must be nonnegative");
  std::unique_ptr<geo::MetricProvider> provider;
  if (background == "schwarzschild") {
    if (!(M >= 0.0)) throw ConfigError("geodesic.M must be nonnegative");
    provider = std::make_unique<geo::SchwarzschildWaveProvider>(M, r_min);
  } else if (background == "minkowski") {
    provider = std::make_unique<geo::MinkowskiProvider>();
  } else if (background == "checkpoint") {
    if (chk.empty()) throw ConfigError("geodesic.background = checkpoint needs geodesic.checkpoint");
    try {
      provider = std::make_unique<geo::SlabProvider>(std::vector<MetricState>{driver::read_checkpoint(chk)});
    } catch (const std::exception& e) {
      throw ConfigError(std::string("geodesic.checkpoint: ") + e.what());
    }
  } else {
    throw ConfigError("geodesic.background must be schwarzschild, minkowski or checkpoint");
  }

  std::vector<geo::Launch> launches;
  std::vector<std::string> names;
  for (const auto& [key, v] : raw) {
    if (v.size() != 8 && v.size() != 9) throw ConfigError(key + ": expected 't x y z Vt Vx Vy Vz [tau_max]'");
    geo::Launch l;
    l.Y = {v[0], v[1], v[2], v[3]};
    l.xi = {v[4], v[5], v[6], v[7]};
    l.tau_max = v.size() == 9 ? v[8] : tau_default;
    if (!(l.tau_max >= 0.0)) throw ConfigError(key + ": tau_max must be nonnegative");
    try {
      const SymTensor2 g = provider->sample(l.Y).g;
      if (l.xi[0] == 0.0) {
        // future null completion of the spatial velocity
        const Vec4 sp{0.0, l.xi[1], l.xi[2], l.xi[3]};
        const Vec4 e0{1.0, 0.0, 0.0, 0.0};
        const double a = g(0, 0), b = 2.0 * contract(g, e0, sp), cc = contract(g, sp, sp);
        const double disc = b * b - 4.0 * a * cc;
        if (!(cc > 0.0) || !(disc >= 0.0)) throw ConfigError(key + ": cannot complete a null velocity");
        l.xi[0] = (-b - std::sqrt(disc)) / (2.0 * a);
      }
      if (!(l.xi[0] > 0.0)) throw ConfigError(key + ": velocity must be future directed");
      if (contract(g, l.xi, l.xi) > 1e-14 * l.xi[0] * l.xi[0]) throw ConfigError(key + ": velocity is spacelike");
    } catch (const DomainError& e) {
      throw ConfigError(key + ": " + e.what());
    }
    launches.push_back(l);
    names.push_back(key.substr(std::string("geodesic.").size()));
  }
  if (dtau > 0.0) {
    go.record_steps = false;
    const double tmax = std::max_element(launches.begin(), launches.end(), [](const auto& a, const auto& b) {
                          return a.tau_max < b.tau_max;
                        })->tau_max;
    for (long k = 1; k * dtau < tmax; ++k) go.sample_taus.push_back(k * dtau);
  }

  std::vector<geo::Trajectory> trs(launches.size());
  std::vector<std::string> errors(launches.size());
  parallel_for(0, static_cast<int>(launches.size()), [&](int i) {
    const auto& l = launches[static_cast<std::size_t>(i)];
    try {
      trs[static_cast<std::size_t>(i)] = geo::integrate(*provider, l.Y, l.xi, l.tau_max, go);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  });
  json per = json::array();
  double worst_norm = 0.0, min_v0 = HUGE_VAL;
  bool causal = true;
  std::string failure;
  for (std::size_t i = 0; i < trs.size(); ++i) {
    if (!errors[i].empty()) {
      failure += (failure.empty() ? "" : "; ") + names[i] + ": " + errors[i];
      continue;
    }
    std::ostringstream csv;
    geo::write_trajectory_csv(csv, trs[i], driver::format_double);
    ctx.write("geodesic_" + names[i] + ".csv", csv.str());
    const auto& tr = trs[i];
    worst_norm = std::max(worst_norm, tr.max_norm_residual);
    min_v0 = std::min(min_v0, tr.min_V0);
    for (const auto& gp : tr.points) causal = causal && gp.causal_ok;
    per.push_back({{"name", names[i]},
                   {"A2", tr.A2},
                   {"tau_end", tr.points.empty() ? 0.0 : tr.points.back().tau},
                   {"max_norm_residual", tr.max_norm_residual},
                   {"min_V0", tr.min_V0},
                   {"truncated", tr.truncated},
                   {"reason", tr.reason},
                   {"accepted", tr.accepted},
                   {"rejected", tr.rejected}});
  }
  ctx.extra["trajectories"] = per;
  if (!failure.empty()) {
    json lv = json::array();
    for (std::size_t i = 0; i < trs.size(); ++i)
      if (errors[i].empty() && !trs[i].points.empty()) {
        const auto& p = trs[i].points.back();
        lv.push_back({{"name", names[i]}, {"tau", p.tau}, {"X", p.X}, {"V", p.V}});
      }
    ctx.write("last_valid.json", lv.dump(2) + "\n");
    throw RuntimeFailure("geodesic integration failed: " + failure);
  }

  suites::SuiteResult n;
  n.name = "norm-conservation";
  n.metric("max_norm_residual", worst_norm);
  n.pass = worst_norm <= norm_check;
  n.detail = "max |g(V,V) + A^2| " + suites::detail::sci(worst_norm) + " over " + std::to_string(trs.size()) +
             " trajectories (tol " + suites::detail::sci(norm_check) + ")";
  ctx.record(n);
  suites::SuiteResult f;
  f.name = "future-directed";
  f.metric("min_V0", min_v0);
  f.pass = min_v0 > 0.0;
  f.detail = "min V^0 " + suites::detail::fixed(min_v0);
  ctx.record(f);
  suites::SuiteResult k;
  k.name = "causal-cone";
  k.pass = causal;
  k.detail = causal ? "causal inequality holds at every recorded point" : "causal inequality violated";
  ctx.record(k);
  return ctx.all_pass() ? kPass : kFail;
}

/// Aggregates every <subcommand>.json in the output directory.
inline int cmd_report(Context& ctx) {
  detail::check_keys(ctx.cfg, {"run"});
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(ctx.out_dir))
    for (const auto& e : std::filesystem::directory_iterator(ctx.out_dir))
      if (e.path().extension() == ".json" && e.path().filename() != "report.json" &&
          e.path().filename() != "last_valid.json")
        files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no run summaries found in " + ctx.out_dir.string());
  std::ostringstream csv;
  csv << "subcommand,suite,pass,exit_code\n";
  json runs = json::array();
  for (const auto& p : files) {
    json j;
    try {
      std::ifstream f(p);
      j = json::parse(f);
    } catch (const std::exception& e) {
      throw ConfigError("cannot parse " + p.string() + ": " + e.what());
    }
    const std::string sub = j.value("subcommand", p.stem().string());
    const int code = j.value("exit_code", -1);
    runs.push_back({{"subcommand", sub}, {"exit_code", code}});
    if (code == kRuntimeError || code == kConfigError) {
      suites::SuiteResult r;
      r.name = sub + "/run";
      r.pass = false;
      r.detail = j.value("error", std::string("run failed"));
      ctx.record(r);
      csv << sub << ",run,0," << code << "\n";
    }
    for (const auto& s : j.value("suites", json::array())) {
      suites::SuiteResult r;
      r.name = sub + "/" + s.value("name", std::string("?"));
      r.pass = s.value("pass", false);
      r.detail = s.value("detail", std::string());
      csv << sub << "," << s.value("name", std::string("?")) << "," << (r.pass ? 1 : 0) << "," << code << "\n";
      ctx.record(r);
    }
  }
  ctx.extra["runs"] = runs;
  ctx.write("report.csv", csv.str());
  return ctx.all_pass() ? kPass : kFail;
}

// ---------------------------------------------------------------------------

/// Parses argv, dispatches and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Wave-coordinate Einstein perturbation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "config file (key = value with [sections])");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads (default: WAVEGAUGE_THREADS or 1)")->check(CLI::NonNegativeNumber);

  std::vector<std::pair<std::string, std::string>> overrides;
  auto override_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                                           help);
  };
  auto* frame = app.add_subcommand("check-frame", "frame algebra invariant suite");
  override_opt(frame, "--samples", "frame.samples", "random tensors");
  auto* gauge = app.add_subcommand("check-gauge", "reduced-equation identity suite");
  override_opt(gauge, "--samples", "gauge.samples", "points per mass");
  auto* build = app.add_subcommand("build-data", "construct Cauchy data and check the gauge condition");
  override_opt(build, "--n", "grid.n", "grid points per axis");
  auto* evolve = app.add_subcommand("evolve", "evolve the reduced equations");
  override_opt(evolve, "--n", "grid.n", "grid points per axis");
  override_opt(evolve, "--t-final", "grid.t_final", "final time");
  auto* asymp = app.add_subcommand("asymptotic", "integrate an asymptotic system");
  override_opt(asymp, "--preset", "asymptotic.preset", "riccati, john-burgers, triangular, u-laplace-u, einstein, custom");
  override_opt(asymp, "--w0", "asymptotic.w0", "initial data amplitude");
  override_opt(asymp, "--s-max", "asymptotic.s_max", "final slow time");
  auto* geod = app.add_subcommand("geodesic", "integrate geodesics from a launch table");
  override_opt(geod, "--tau-max", "geodesic.tau_max", "default affine length");
  app.add_subcommand("report", "aggregate run summaries in the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.subcommand = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) ctx.cfg = config::Config::load(config_path);
    for (const auto& [k, v] : overrides) ctx.cfg.set(k, v);
    if (seed) ctx.cfg.set("run.seed", std::to_string(*seed));
    if (!out_dir.empty()) ctx.cfg.set("run.out", out_dir);
    ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("run.seed", 7));
    ctx.out_dir = ctx.cfg.get_string("run.out", "out");
    if (threads == 0) threads = ctx.cfg.get_int("run.threads", 0);
    if (threads < 0) throw ConfigError("run.threads must be nonnegative");
    if (threads > 0) set_thread_count(threads);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    int code = kPass;
    if (ctx.subcommand == "check-frame") code = cmd_check_frame(ctx);
    else if (ctx.subcommand == "check-gauge") code = cmd_check_gauge(ctx);
    else if (ctx.subcommand == "build-data") code = cmd_build_data(ctx);
    else if (ctx.subcommand == "evolve") code = cmd_evolve(ctx);
    else if (ctx.subcommand == "asymptotic") code = cmd_asymptotic(ctx);
    else if (ctx.subcommand == "geodesic") code = cmd_geodesic(ctx);
    else if (ctx.subcommand == "report") code = cmd_report(ctx);
    ctx.write_summary(code);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const RuntimeFailure& e) {
    err << "runtime error: " << e.what() << "\n";
    ctx.write_summary(kRuntimeError, e.what());
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    ctx.write_summary(kRuntimeError, e.what());
    return kRuntimeError;
  }
}

}  // namespace wavegauge::cli
