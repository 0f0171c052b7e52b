#pragma once

/// \file suites.hpp
/// \brief Self-checking invariant suites. Each suite runs a fixed scenario,
/// compares against closed forms or convergence rates and reports PASS/FAIL
/// with its measured metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wavegauge/asymptotic.hpp"
#include "wavegauge/data.hpp"
#include "wavegauge/diagnostics.hpp"
#include "wavegauge/driver.hpp"
#include "wavegauge/evolve.hpp"
#include "wavegauge/frame.hpp"
#include "wavegauge/gauge.hpp"
#include "wavegauge/geodesic.hpp"
#include "wavegauge/parallel.hpp"

namespace wavegauge::suites {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;

  void metric(const std::string& key, double v) { metrics.emplace_back(key, v); }
};

namespace detail {

inline bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline std::string fixed(double v, int prec = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline SymTensor2 random_tensor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymTensor2 k;
  for (int s = 0; s < 10; ++s) k[s] = u(rng);
  return k;
}

/// Uniform direction, radius uniform in [rmin, rmax].
inline Vec3 random_point(std::mt19937_64& rng, double rmin, double rmax) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(rmin, rmax);
  Vec3 d{g(rng), g(rng), g(rng)};
  const double n = norm(d);
  const double r = u(rng);
  return {d[0] / n * r, d[1] / n * r, d[2] / n * r};
}

inline GridSpec grid(int n, double extent, double t_final) {
  GridSpec g;
  g.n = n;
  g.extent = extent;
  g.t_final = t_final;
  return g;
}

inline double max_change(const MetricState& a, const MetricState& b) {
  double m = 0.0;
  for (int c = 0; c < 10; ++c)
    for (std::size_t p = 0; p < a.h[c].size(); ++p) m = std::max(m, std::fabs(a.h[c][p] - b.h[c][p]));
  return m;
}

}  // namespace detail

/// Frame traces and the P expansion against direct Minkowski contraction.
inline SuiteResult frame_suite(int samples = 1000, std::uint64_t seed = 7, double tol = 1e-12) {
  if (samples < 1) throw ConfigError("frame.samples must be positive");
  SuiteResult r;
  r.name = "frame";
  std::mt19937_64 rng(seed);
  double e_tr = 0.0, e_prod = 0.0, e_p = 0.0;
  for (int s = 0; s < samples; ++s) {
    const SymTensor2 k = detail::random_tensor(rng);
    const SymTensor2 p = detail::random_tensor(rng);
    const frame::NullFrame f = frame::build_null_frame(detail::random_point(rng, 0.1, 10.0));
    e_tr = std::max(e_tr, detail::rel_err(frame::frame_trace(k, f), minkowski_trace(k)));
    e_prod = std::max(e_prod, detail::rel_err(frame::frame_trace_of_product(p, k, f),
                                              minkowski_double_contraction(p, k)));
    e_p = std::max(e_p, detail::rel_err(frame::quadratic_P_frame(p, k, f), frame::quadratic_P(p, k)));
  }
  r.metric("samples", samples);
  r.metric("max_rel_err_trace", e_tr);
  r.metric("max_rel_err_trace_of_product", e_prod);
  r.metric("max_rel_err_P", e_p);
  r.pass = e_tr <= tol && e_prod <= tol && e_p <= tol;
  r.detail = std::to_string(samples) + " samples, max rel err trace " + detail::sci(e_tr) + ", product " +
             detail::sci(e_prod) + ", P " + detail::sci(e_p) + " (tol " + detail::sci(tol) + ")";
  return r;
}

/// Reduced-equation identity and vanishing Ricci on closed-form
/// Schwarzschild-wave jets.
inline SuiteResult gauge_suite(int samples = 100, std::uint64_t seed = 7, double tol = 1e-9) {
  if (samples < 1) throw ConfigError("gauge.samples must be positive");
  SuiteResult r;
  r.name = "gauge";
  std::mt19937_64 rng(seed);
  double e_id = 0.0, e_ric = 0.0;
  bool warned = false;
  for (double M : {0.001, 0.01, 0.1})
    for (int s = 0; s < samples; ++s) {
      const auto jet = data::schwarzschild_wave_jet(M, detail::random_point(rng, 3.0, 20.0));
      const auto res = gauge::reduced_identity_residual(jet);
      const SymTensor2 ric = gauge::ricci(jet);
      e_id = std::max(e_id, (res.residual - 2.0 * ric).max_abs());
      e_ric = std::max(e_ric, ric.max_abs());
      warned = warned || res.gauge_warning;
    }
  r.metric("samples_per_mass", samples);
  r.metric("max_identity_residual", e_id);
  r.metric("max_ricci", e_ric);
  r.pass = e_id <= tol && e_ric <= tol && !warned;
  r.detail = "M in {0.001,0.01,0.1}, " + std::to_string(samples) + " points each, identity residual " +
             detail::sci(e_id) + ", Ricci " + detail::sci(e_ric) + (warned ? ", gauge warning" : "");
  return r;
}

struct DataSuiteOptions {
  int n = 64;                          ///< grid for the gauge residual check
  std::vector<int> convergence{17, 33, 65};
  double M = 0.01;
  double gauge_tol = 1e-10;
  double min_ratio = 12.0;
};

/// Gauge residual of perturbed Cauchy data and fourth-order convergence of
/// the Hamiltonian constraint on the Schwarzschild region.
inline SuiteResult data_suite(const DataSuiteOptions& opt = {}) {
  SuiteResult r;
  r.name = "data";
  data::DataConfig cfg;
  cfg.M = opt.M;
  cfg.r_outer = 6.0;
  data::Bump b;
  b.amplitude = 0.01;
  b.width = 0.7;
  b.center = {0.1, 0.0, -0.1};
  data::Bump k;
  k.a = 2;
  k.b = 3;
  k.amplitude = 0.005;
  k.width = 0.5;
  k.time_derivative = true;
  const data::Perturbation pert{b, k};
  const MetricState s = data::build_cauchy_data(cfg, detail::grid(opt.n, 3.0, 0.0), pert);
  const double gres = data::pointwise_gauge_residual(cfg, pert, s);

  std::vector<double> err;
  for (int n : opt.convergence) {
    const GridSpec g = detail::grid(n, 3.2, 0.0);
    const auto cr = data::constraint_residuals(data::build_cauchy_data(cfg, g));
    double m = 0.0;
    for (int kk = 4; kk < n - 4; ++kk)
      for (int j = 4; j < n - 4; ++j)
        for (int i = 4; i < n - 4; ++i)
          if (norm(g.point(i, j, kk)) >= 1.6) m = std::max(m, std::fabs(cr.hamiltonian[g.index(i, j, kk)]));
    err.push_back(m);
  }
  double min_ratio = HUGE_VAL;
  std::string ratios;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double q = err[i - 1] / err[i];
    min_ratio = std::min(min_ratio, q);
    ratios += (i > 1 ? "," : "") + detail::fixed(q, 2);
  }
  r.metric("gauge_residual", gres);
  for (std::size_t i = 0; i < err.size(); ++i)
    r.metric("hamiltonian_n" + std::to_string(opt.convergence[i]), err[i]);
  r.metric("min_ratio", min_ratio);
  r.pass = gres <= opt.gauge_tol && min_ratio >= opt.min_ratio;
  r.detail = "gauge residual " + detail::sci(gres) + " at n=" + std::to_string(opt.n) +
             ", constraint error ratios " + ratios + " (need >= " + detail::fixed(opt.min_ratio, 0) + ")";
  return r;
}

struct StaticOptions {
  double M = 0.01;
  double t_final = 5.0;
  std::vector<int> n{48, 96};
  double core = 0.2;
  double mask = 1.0;
  double min_ratio = 12.0;
};

/// Static Schwarzschild evolved with an inner mask: max |h(t) - h(0)| must
/// converge at fourth order.
inline SuiteResult static_evolution_suite(const StaticOptions& opt = {}) {
  SuiteResult r;
  r.name = "static";
  std::vector<double> err, dx;
  for (int n : opt.n) {
    const GridSpec g = detail::grid(n, 4.0 + opt.t_final, opt.t_final);
    const MetricState s0 = data::static_schwarzschild(opt.M, g, opt.core);
    evolve::Options eo;
    eo.mask_radius = opt.mask;
    eo.octant_symmetry = true;
    evolve::Evolver e(s0, eo);
    e.advance_to(opt.t_final);
    err.push_back(detail::max_change(e.state(), s0));
    dx.push_back(g.spacing());
  }
  double min_ratio = HUGE_VAL, C = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    C = std::max(C, err[i] / std::pow(dx[i], 4));
    if (i > 0) min_ratio = std::min(min_ratio, err[i - 1] / err[i]);
  }
  for (std::size_t i = 0; i < err.size(); ++i) r.metric("max_change_n" + std::to_string(opt.n[i]), err[i]);
  r.metric("min_ratio", min_ratio);
  r.metric("C", C);
  r.pass = err.size() >= 2 && min_ratio >= opt.min_ratio;
  std::string errs;
  for (std::size_t i = 0; i < err.size(); ++i) errs += (i ? ", " : "") + detail::sci(err[i]);
  r.detail = "M=" + detail::fixed(opt.M, 3) + " t=" + detail::fixed(opt.t_final, 1) + " max|h(t)-h(0)| " + errs +
             ", ratio " + detail::fixed(min_ratio, 2) + ", C = " + detail::sci(C);
  return r;
}

struct LinearWaveOptions {
  int n = 96;
  double amplitude = 1e-6;
  double energy_extent = 20.0;
  double energy_sigma = 3.0;
  double energy_t = 10.0;
  double drift_tol = 1e-3;
  double decay_extent = 38.0;
  double decay_sigma = 2.0;
  double decay_t0 = 5.0;
  double decay_t1 = 30.0;
  double exponent_tol = 0.15;
};

/// Flat-space packet: E_0 drift and the 1/t decay of max |dh|.
inline SuiteResult linear_wave_suite(const LinearWaveOptions& opt = {}) {
  SuiteResult r;
  r.name = "linear-wave";
  evolve::Options eo;
  eo.octant_symmetry = true;
  diag::EnergyOptions en;

  evolve::Evolver ea(data::flat_packet(detail::grid(opt.n, opt.energy_extent, opt.energy_t), 1, 1, opt.amplitude,
                                       opt.energy_sigma),
                     eo);
  const double E0 = diag::energy(ea.state(), en).E[0];
  double drift = 0.0;
  for (int t = 1; t <= static_cast<int>(std::floor(opt.energy_t)); ++t) {
    ea.advance_to(t);
    drift = std::max(drift, std::fabs(diag::energy(ea.state(), en).E[0] - E0) / E0);
  }

  evolve::Evolver eb(data::flat_packet(detail::grid(opt.n, opt.decay_extent, opt.decay_t1), 1, 1, opt.amplitude,
                                       opt.decay_sigma),
                     eo);
  std::vector<double> t, dh;
  for (int k = static_cast<int>(std::ceil(opt.decay_t0)); k <= static_cast<int>(std::floor(opt.decay_t1)); ++k) {
    eb.advance_to(k);
    t.push_back(k);
    dh.push_back(diag::derivative_max(eb.state()).all);
  }
  const auto fit = diag::fit_power(t, dh, opt.decay_t0, opt.decay_t1);
  const double p = -fit.slope;
  r.metric("E0_initial", E0);
  r.metric("E0_max_rel_drift", drift);
  r.metric("decay_exponent", p);
  r.metric("decay_r2", fit.r2);
  r.pass = drift <= opt.drift_tol && std::fabs(p - 1.0) <= opt.exponent_tol;
  r.detail = "E0 drift " + detail::sci(drift) + " over t=" + detail::fixed(opt.energy_t, 0) +
             ", max|dh| decay exponent " + detail::fixed(p) + " (R^2 " + detail::fixed(fit.r2) + ") on [" +
             detail::fixed(opt.decay_t0, 0) + "," + detail::fixed(opt.decay_t1, 0) + "] at n=" +
             std::to_string(opt.n);
  return r;
}

namespace detail {

inline asym::AsymptoticState single(double Q, int count, const std::function<double(double)>& U0,
                                    const std::function<double(double)>& W0) {
  return asym::make_state(1, Q, count, {0.0, 0.0, 1.0}, [&](int, double q) { return U0(q); },
                          [&](int, double q) { return W0(q); });
}

inline asym::Trajectory riccati_run(double w0) {
  return asym::evolve_generic(asym::preset("riccati"), single(1.0, 5, [](double) { return 0.0; },
                                                              [&](double) { return w0; }),
                              5.0);
}

inline asym::Trajectory burgers_run() {
  return asym::evolve_generic(asym::preset("john-burgers"),
                              single(6.0, 1201, [](double q) { return -std::cos(q); },
                                     [](double q) { return std::sin(q); }),
                              4.0);
}

inline asym::Trajectory triangular_run() {
  auto st = asym::make_state(2, 4.0, 81, {1.0, 0.0, 0.0}, [](int, double) { return 0.0; },
                             [](int i, double q) { return i == 1 ? std::exp(-q * q) : 0.0; });
  return asym::evolve_generic(asym::preset("triangular"), st, 10.0);
}

inline asym::Trajectory ulaplaceu_run() {
  return asym::evolve_generic(asym::preset("u-laplace-u"),
                              single(6.0, 241, [](double q) { return std::exp(-q * q); },
                                     [](double q) { return -2.0 * q * std::exp(-q * q); }),
                              50.0);
}

}  // namespace detail

/// The four model equations against their closed forms.
inline SuiteResult asymptotic_suite() {
  SuiteResult r;
  r.name = "asymptotic";
  const auto ric = detail::riccati_run(1.0);
  const auto bur = detail::burgers_run();
  const auto tri = detail::triangular_run();
  const auto ulu = detail::ulaplaceu_run();
  double tri_err = 0.0;
  for (const auto& sn : tri.snapshots)
    for (std::size_t l = 0; l < sn.markers(); ++l)
      tri_err = std::max(tri_err, std::fabs(sn.W[0][l] - sn.s * sn.W[1][l] * sn.W[1][l]));
  const bool ok_ric = ric.report.blew_up && std::fabs(ric.report.s_star - 1.0) <= 0.02;
  const bool ok_bur = bur.report.blew_up && std::fabs(bur.report.s_star - 2.0) <= 0.04;
  const bool ok_tri = !tri.report.blew_up && tri_err <= 1e-8;
  const bool ok_ulu = !ulu.report.blew_up && std::fabs(ulu.report.s_end - 50.0) <= 1e-9;
  r.metric("riccati_s_star", ric.report.s_star);
  r.metric("burgers_s_star", bur.report.s_star);
  r.metric("triangular_max_err", tri_err);
  r.metric("ulaplaceu_s_end", ulu.report.s_end);
  r.pass = ok_ric && ok_bur && ok_tri && ok_ulu;
  r.detail = "riccati s*=" + detail::fixed(ric.report.s_star) + ", john-burgers s*=" +
             detail::fixed(bur.report.s_star) + " (" + bur.report.cause + "), triangular err " +
             detail::sci(tri_err) + ", u-laplace-u reached s=" + detail::fixed(ulu.report.s_end, 1) + " (" +
             asym::to_string(ulu.report.growth) + ")";
  return r;
}

namespace detail {

inline SymTensor2 traceless_W(const Vec3& w, double dqu) {
  frame::FrameComponents c{};
  c[frame::kS1][frame::kS1] = dqu;
  c[frame::kS2][frame::kS2] = -dqu;
  return asym::from_frame(c, w);
}

/// Compatible random data: only the Lbar and tangential frame components,
/// traceless on the sphere.
inline std::function<SymTensor2(double)> compatible_W(const Vec3& w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.1, 0.1);
  const double a = d(rng), b = d(rng), c2 = d(rng), e = d(rng), g = d(rng);
  return [=](double q) {
    const double env = std::exp(-q * q);
    frame::FrameComponents c{};
    c[frame::kLbar][frame::kLbar] = a * env;
    c[frame::kLbar][frame::kS1] = c[frame::kS1][frame::kLbar] = b * env;
    c[frame::kLbar][frame::kS2] = c[frame::kS2][frame::kLbar] = c2 * env;
    c[frame::kS1][frame::kS1] = e * env;
    c[frame::kS2][frame::kS2] = -e * env;
    c[frame::kS1][frame::kS2] = c[frame::kS2][frame::kS1] = g * env;
    return asym::from_frame(c, w);
  };
}

inline std::function<SymTensor2(double)> random_W(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  std::vector<SymTensor2> base(4);
  for (auto& t : base)
    for (int s = 0; s < 10; ++s) t[s] = d(rng);
  return [=](double q) {
    SymTensor2 W;
    for (int i = 0; i < 4; ++i) W += std::exp(-(q - i + 1.5) * (q - i + 1.5)) * base[i];
    return W;
  };
}

}  // namespace detail

/// Einstein asymptotic system: conserved components, affine growth of
/// d_q U_{Lbar Lbar} with slope 2P, and the asymptotic wave condition.
inline SuiteResult einstein_suite(std::uint64_t seed = 7) {
  SuiteResult r;
  r.name = "einstein";
  const double s_max = 10.0;
  double drift = 0.0, slope_err = 0.0, affine_err = 0.0, increase = 0.0, compat = 0.0;

  const Vec3 wz{0.0, 0.0, 1.0};
  const auto tl = asym::evolve_einstein(
      asym::make_einstein_state(2.0, 21, wz, [&](double) { return detail::traceless_W(wz, 1.0); }), s_max);
  for (const auto& smp : tl.samples)
    for (std::size_t l = 0; l < smp.W_LbLb.size(); ++l)
      slope_err = std::max(slope_err, std::fabs(smp.W_LbLb[l] - (-2.0 * smp.s)));

  const Vec3 w{0.48, 0.6, 0.64};
  const auto rd = asym::evolve_einstein(asym::make_einstein_state(5.0, 101, w, detail::random_W(seed)), s_max);
  for (std::size_t i = 0; i < rd.samples.size(); ++i) {
    const auto& smp = rd.samples[i];
    drift = std::max({drift, smp.max_ULL_drift, smp.max_WTU_drift});
    if (i > 0) increase = std::max(increase, smp.constraint - rd.samples[i - 1].constraint);
  }
  for (const auto& smp : tl.samples) drift = std::max({drift, smp.max_ULL_drift, smp.max_WTU_drift});

  const Vec3 wc{0.0, 0.6, 0.8};
  const auto cp = asym::evolve_einstein(asym::make_einstein_state(4.0, 81, wc, detail::compatible_W(wc, seed)), s_max);
  for (const auto& smp : cp.samples) {
    compat = std::max(compat, smp.constraint);
    for (std::size_t l = 0; l < smp.W_LbLb.size(); ++l)
      affine_err = std::max(affine_err, std::fabs(smp.W_LbLb[l] - cp.samples.front().W_LbLb[l] -
                                                  2.0 * cp.samples.front().P[l] * smp.s));
  }

  r.metric("max_invariant_drift", drift);
  r.metric("traceless_slope_err", slope_err);
  r.metric("affine_err", affine_err);
  r.metric("max_constraint_increase", increase);
  r.metric("compatible_max_constraint", compat);
  r.pass = drift <= 1e-8 && slope_err <= 1e-6 && affine_err <= 1e-6 && increase <= 1e-8 && compat <= 1e-8;
  r.detail = "s in [0,10]: invariant drift " + detail::sci(drift) + ", traceless slope err " + detail::sci(slope_err) +
             ", affine err " + detail::sci(affine_err) + ", constraint increase " + detail::sci(increase) +
             ", compatible data constraint " + detail::sci(compat);
  return r;
}

/// Radial null geodesic from r = 1 against the closed-form null cone.
inline SuiteResult null_cone_suite() {
  SuiteResult r;
  r.name = "null-cone";
  const double M = 0.1, R = 1.0;
  geo::SchwarzschildWaveProvider p(M);
  const Vec4 Y{0.0, R, 0.0, 0.0};
  geo::GeodesicOptions opt;
  auto radius = [](const Vec4& X) { return norm(Vec3{X[1], X[2], X[3]}); };
  opt.stop = [&](const Vec4& X, const Vec4&) { return radius(X) - 2.0; };
  const auto tr = geo::integrate(p, Y, geo::radial_null_direction(p, Y), 100.0, opt);
  double err = 0.0, below = 0.0;
  for (const auto& gp : tr.points) {
    const double rr = radius(gp.X);
    err = std::max(err, std::fabs(gp.X[0] - data::schwarzschild_null_cone(R, M, rr)));
    below = std::max(below, (rr - R) - gp.X[0]);
  }
  const double t2 = tr.points.back().X[0];
  r.metric("t_at_r2", t2);
  r.metric("max_err", err);
  r.metric("min_margin_t_minus_r_plus_R", -below);
  r.pass = tr.stopped_by_event && err <= 1e-6 && std::fabs(t2 - 1.3244) <= 5e-5 && below <= 0.0;
  r.detail = "t(2) = " + detail::fixed(t2, 6) + ", max |t - closed form| " + detail::sci(err) +
             ", t >= r - R " + (below <= 0.0 ? "holds" : "violated") + " at " + std::to_string(tr.points.size()) +
             " steps";
  return r;
}

/// Norm conservation, the causal-cone inequality and future direction.
inline SuiteResult geodesic_suite(std::uint64_t seed = 7, int causal_samples = 10000) {
  SuiteResult r;
  r.name = "geodesic";
  const double M = 0.1, r0 = 10.0;
  geo::SchwarzschildWaveProvider p(M);
  const Vec4 Y{0.0, r0, 0.0, 0.0};
  Vec4 xi{1.0, 0.0, std::sqrt(2.0 * M / r0), 0.0};
  const double nrm = contract(p.sample(Y).g, xi, xi);
  for (double& v : xi) v /= std::sqrt(-nrm);
  const auto tl = geo::integrate(p, Y, xi, 100.0);
  const Vec4 Yn{0.0, 3.0, 1.0, 0.0};
  const auto nl = geo::integrate(p, Yn, geo::radial_null_direction(p, Yn), 100.0);
  bool causal_path = true;
  for (const auto* tr : {&tl, &nl})
    for (const auto& gp : tr->points) causal_path = causal_path && gp.causal_ok;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < causal_samples; ++trial) {
    SymTensor2 h;
    for (int s = 0; s < 10; ++s) h[s] = u(rng);
    h *= 0.25 * std::fabs(u(rng)) / geo::operator_norm(h);
    const SymTensor2 g = minkowski() + h;
    Vec4 eta{0.0, u(rng), u(rng), u(rng)};
    const double A2 = trial % 10 == 0 ? 0.0 : std::fabs(u(rng));
    double b = 0.0, c = A2;
    for (int i = 1; i < 4; ++i) {
      b += 2.0 * g(0, i) * eta[i];
      for (int j = 1; j < 4; ++j) c += g(i, j) * eta[i] * eta[j];
    }
    const double a = g(0, 0);
    eta[0] = (-b - std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    if (trial % 2) eta = {-eta[0], -eta[1], -eta[2], -eta[3]};
    const auto rep = geo::causal_check(eta, g);
    if (!rep.holds) ++failures;
    worst = std::max(worst, rep.lhs_max / rep.rhs);
  }
  const double min_v0 = std::min(tl.min_V0, nl.min_V0);
  r.metric("max_norm_residual", tl.max_norm_residual);
  r.metric("min_V0", min_v0);
  r.metric("causal_samples", causal_samples);
  r.metric("causal_failures", failures);
  r.metric("causal_worst_ratio", worst);
  r.pass = !tl.truncated && tl.max_norm_residual <= 1e-8 && failures == 0 && min_v0 > 0.0 && causal_path;
  r.detail = "norm drift " + detail::sci(tl.max_norm_residual) + " over tau in [0,100], " +
             std::to_string(causal_samples - failures) + "/" + std::to_string(causal_samples) +
             " causal checks hold (worst ratio " + detail::fixed(worst) + "), min V0 " + detail::fixed(min_v0);
  return r;
}

struct EnergyGrowthOptions {
  int n = 64;
  double extent = 12.5;
  double width = 2.0;
  double t_final = 10.0;
  std::vector<double> epsilons{1e-5, 1e-4, 1e-3};
  double min_correlation = 0.9;
};

/// Growth exponent of E_0(t) = E_0(0) (1+t)^g for bump data of amplitude
/// epsilon at M = 0, and its correlation with epsilon.
inline SuiteResult energy_growth_suite(const EnergyGrowthOptions& opt = {}) {
  if (opt.epsilons.size() < 2) throw ConfigError("energy growth needs at least two amplitudes");
  SuiteResult r;
  r.name = "energy-growth";
  std::vector<double> growth;
  for (double eps : opt.epsilons) {
    data::DataConfig cfg;
    cfg.M = 0.0;
    cfg.r_outer = 2.0 * opt.extent;
    cfg.smoothing.hi = opt.width;
    data::Bump b;
    b.amplitude = eps;
    b.width = opt.width;
    evolve::Options eo;
    eo.octant_symmetry = true;
    evolve::Evolver e(data::build_cauchy_data(cfg, detail::grid(opt.n, opt.extent, opt.t_final), {b}), eo);
    std::vector<double> t, E;
    for (int k = 0; k <= static_cast<int>(std::floor(opt.t_final)); ++k) {
      e.advance_to(k);
      t.push_back(k);
      E.push_back(diag::energy(e.state(), {}).E[0]);
    }
    growth.push_back(diag::fit_power(t, E, 0.0, opt.t_final).slope);
  }
  const double corr = diag::correlation(opt.epsilons, growth);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < growth.size(); ++i) {
    mx += opt.epsilons[i];
    my += growth[i];
  }
  mx /= growth.size();
  my /= growth.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < growth.size(); ++i) {
    sxy += (opt.epsilons[i] - mx) * (growth[i] - my);
    sxx += (opt.epsilons[i] - mx) * (opt.epsilons[i] - mx);
  }
  const double slope = sxy / sxx;
  std::string gs;
  for (std::size_t i = 0; i < growth.size(); ++i) {
    r.metric("growth_eps" + detail::sci(opt.epsilons[i]), growth[i]);
    gs += (i ? ", " : "") + detail::sci(growth[i]);
  }
  r.metric("d_growth_d_eps", slope);
  r.metric("correlation", corr);
  r.pass = corr >= opt.min_correlation;
  r.detail = "growth exponents " + gs + ", d(growth)/d(eps) " + detail::fixed(slope) + ", correlation " +
             detail::fixed(corr) + " (need >= " + detail::fixed(opt.min_correlation, 2) + ")";
  return r;
}

/// CSV artifacts of short evolve, geodesic and asymptotic runs.
inline std::vector<std::pair<std::string, std::string>> sample_csvs() {
  std::vector<std::pair<std::string, std::string>> out;
  {
    data::DataConfig cfg;
    cfg.M = 0.01;
    cfg.r_outer = 6.0;
    data::Bump b;
    b.amplitude = 0.01;
    b.width = 0.7;
    b.center = {0.1, 0.0, -0.1};
    const MetricState s0 = data::build_cauchy_data(cfg, detail::grid(25, 4.0, 1.0), {b});
    driver::RunOptions ro;
    ro.t_final = 1.0;
    ro.output_every = 2;
    ro.energy.max_order = 1;
    const auto res = driver::run(s0, ro);
    std::ostringstream os;
    driver::write_csv(os, res.series);
    out.emplace_back("evolve.csv", os.str());
  }
  {
    geo::SchwarzschildWaveProvider p(0.05);
    std::vector<geo::Launch> launches;
    for (int i = 0; i < 4; ++i) {
      const Vec4 Y{0.0, 4.0 + i, 1.0, 0.0};
      launches.push_back({Y, geo::radial_null_direction(p, Y), 20.0});
    }
    const auto trs = geo::integrate_batch(p, launches);
    for (std::size_t i = 0; i < trs.size(); ++i) {
      std::ostringstream os;
      geo::write_trajectory_csv(os, trs[i], driver::format_double);
      out.emplace_back("geodesic_" + std::to_string(i) + ".csv", os.str());
    }
  }
  {
    std::ostringstream os;
    asym::write_trajectory_csv(os, detail::burgers_run(), driver::format_double);
    out.emplace_back("asymptotic.csv", os.str());
    std::ostringstream oe;
    const Vec3 w{0.48, 0.6, 0.64};
    asym::write_einstein_csv(oe, asym::evolve_einstein(asym::make_einstein_state(5.0, 101, w, detail::random_W(7)), 4.0),
                             driver::format_double);
    out.emplace_back("einstein.csv", oe.str());
  }
  return out;
}

/// Reruns sample_csvs with two thread counts and compares bytes.
inline SuiteResult determinism_suite(int threads_a = 1, int threads_b = 3) {
  SuiteResult r;
  r.name = "determinism";
  const int saved = wavegauge::detail::thread_setting();
  set_thread_count(threads_a);
  const auto a = sample_csvs();
  set_thread_count(threads_b);
  const auto b = sample_csvs();
  set_thread_count(saved);
  int differing = 0;
  std::size_t bytes = 0;
  std::string names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bytes += a[i].second.size();
    if (a[i].second != b[i].second) {
      ++differing;
      names += " " + a[i].first;
    }
  }
  r.metric("files", static_cast<double>(a.size()));
  r.metric("bytes", static_cast<double>(bytes));
  r.metric("differing", differing);
  r.pass = differing == 0;
  r.detail = std::to_string(a.size()) + " CSV files (" + std::to_string(bytes) + " bytes) at " +
             std::to_string(threads_a) + " vs " + std::to_string(threads_b) + " threads: " +
             (differing == 0 ? "byte-identical" : "differ:" + names);
  return r;
}

}  // namespace wavegauge::suites
