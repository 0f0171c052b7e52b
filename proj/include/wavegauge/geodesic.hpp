#pragma once

/// \file geodesic.hpp
/// \brief Causal geodesics X'' + Gamma(X)(X', X') = 0 in analytic or
/// interpolated metrics: adaptive Dormand-Prince 5(4) integration, the causal
/// vector inequality and finite-time completeness / escape probes.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavegauge/grid.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/schwarzschild.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::geo {

/// Raised by a provider when a point lies outside its domain.
class OutOfDomain : public DomainError {
 public:
  explicit OutOfDomain(const std::string& what) : DomainError(what) {}
};

struct MetricSample {
  SymTensor2 g;
  std::array<SymTensor2, 4> dg;  ///< dg[a] = d_a g
};

class MetricProvider {
 public:
  virtual ~MetricProvider() = default;
  virtual MetricSample sample(const Vec4& X) const = 0;
};

class MinkowskiProvider : public MetricProvider {
 public:
  MetricSample sample(const Vec4&) const override { return {minkowski(), {}}; }
};

/// Closed-form Schwarzschild metric in wave coordinates, valid for r > r_min.
class SchwarzschildWaveProvider : public MetricProvider {
 public:
  explicit SchwarzschildWaveProvider(double M, double r_min = 0.0) : M_(M), r_min_(std::max(r_min, 2.0 * M)) {
    if (!(M >= 0.0)) throw DomainError("mass must be nonnegative");
  }
  MetricSample sample(const Vec4& X) const override {
    const Vec3 x{X[1], X[2], X[3]};
    const double r = norm(x);
    if (!(r > r_min_) || (M_ > 0.0 && !(r > 0.0)))
      throw OutOfDomain("geodesic reached r = " + std::to_string(r) + " inside the provider radius");
    if (M_ == 0.0) return {minkowski(), {}};
    const auto j = data::schwarzschild_wave_jet(M_, x);
    MetricSample s;
    s.g = j.g;
    s.dg = j.dg;
    return s;
  }
  double mass() const { return M_; }

 private:
  double M_;
  double r_min_;
};

/// Lagrange weights and first-derivative weights on nodes 0..4 at position u.
inline void quartic_weights(double u, std::array<double, 5>& w, std::array<double, 5>& dw) {
  for (int k = 0; k < 5; ++k) {
    double den = 1.0, val = 1.0, der = 0.0;
    for (int m = 0; m < 5; ++m) {
      if (m == k) continue;
      den *= (k - m);
      der = der * (u - m) + val;
      val *= (u - m);
    }
    w[k] = val / den;
    dw[k] = der / den;
  }
}

/// Piecewise-static metric from evolved slices: within [t_k, t_{k+1}) the
/// metric is m + h(t_k) interpolated tri-quartically in space, with spatial
/// derivatives taken from the interpolant and d_t g = 0.
class SlabProvider : public MetricProvider {
 public:
  explicit SlabProvider(std::vector<MetricState> slabs) : slabs_(std::move(slabs)) {
    if (slabs_.empty()) throw ConfigError("slab provider needs at least one slice");
    for (const auto& s : slabs_) {
      if (s.grid.n < 5) throw ConfigError("slab grid needs at least 5 points per axis");
      if (s.h[0].size() != s.grid.size()) throw ConfigError("slab fields are not allocated");
    }
    for (std::size_t k = 1; k < slabs_.size(); ++k)
      if (!(slabs_[k].t > slabs_[k - 1].t)) throw ConfigError("slab times must increase");
  }

  MetricSample sample(const Vec4& X) const override {
    std::size_t k = 0;
    while (k + 1 < slabs_.size() && X[0] >= slabs_[k + 1].t) ++k;
    const MetricState& s = slabs_[k];
    const GridSpec& g = s.grid;
    const double dx = g.spacing();
    std::array<int, 3> base{};
    std::array<std::array<double, 5>, 3> w{}, dw{};
    for (int a = 0; a < 3; ++a) {
      const double xi = (X[a + 1] + g.extent) / dx;
      if (!(xi >= 2.0 && xi <= g.n - 3.0))
        throw OutOfDomain("geodesic left the interpolation box along axis " + std::to_string(a + 1));
      base[a] = std::clamp(static_cast<int>(std::lround(xi)) - 2, 0, g.n - 5);
      quartic_weights(xi - base[a], w[a], dw[a]);
      for (double& d : dw[a]) d /= dx;
    }
    MetricSample out;
    out.g = minkowski();
    for (int k2 = 0; k2 < 5; ++k2)
      for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
          const std::size_t p = g.index(base[0] + i, base[1] + j, base[2] + k2);
          const double c = w[0][i] * w[1][j] * w[2][k2];
          const double cx = dw[0][i] * w[1][j] * w[2][k2];
          const double cy = w[0][i] * dw[1][j] * w[2][k2];
          const double cz = w[0][i] * w[1][j] * dw[2][k2];
          for (int c10 = 0; c10 < 10; ++c10) {
            const double h = s.h[c10][p];
            out.g[c10] += c * h;
            out.dg[1][c10] += cx * h;
            out.dg[2][c10] += cy * h;
            out.dg[3][c10] += cz * h;
          }
        }
    return out;
  }

  const std::vector<MetricState>& slabs() const { return slabs_; }

 private:
  std::vector<MetricState> slabs_;
};

/// X'' = -Gamma^a_{bc} V^b V^c.
inline Vec4 geodesic_acceleration(const MetricSample& s, const Vec4& V) {
  const SymTensor2 ginv = invert(s.g).inv;
  Vec4 w{};
  for (int d = 0; d < 4; ++d) {
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
      double dgV = 0.0;  // (d_b g)_{d c} V^c
      for (int c = 0; c < 4; ++c) dgV += s.dg[b](d, c) * V[c];
      acc += dgV * V[b];
    }
    acc -= 0.5 * contract(s.dg[d], V, V);
    w[d] = acc;
  }
  Vec4 a{};
  for (int al = 0; al < 4; ++al) {
    double v = 0.0;
    for (int d = 0; d < 4; ++d) v -= ginv(al, d) * w[d];
    a[al] = v;
  }
  return a;
}

struct CausalReport {
  double A = 0.0;
  double lhs_max = 0.0;  ///< max_i (A + |eta^i|)
  double rhs = 0.0;      ///< 2 |eta^0|
  bool holds = false;
};

/// Largest |eigenvalue| of h viewed as a symmetric 4x4 array.
inline double operator_norm(const SymTensor2& h) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = h(a, b);
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(m, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

/// Checks A + |eta^i| <= 2 |eta^0| for a causal eta, A^2 = -g(eta, eta).
/// Requires the operator norm of h = g - m to be at most 1/4.
inline CausalReport causal_check(const Vec4& eta, const SymTensor2& g) {
  if (!(operator_norm(g - minkowski()) <= 0.25)) throw DomainError("causal check requires |h| <= 1/4");
  const double n = contract(g, eta, eta);
  double scale = 0.0;
  for (double e : eta) scale = std::max(scale, e * e);
  if (n > 1e-14 * scale) throw DomainError("vector is spacelike");
  CausalReport r;
  r.A = std::sqrt(std::max(0.0, -n));
  r.rhs = 2.0 * std::fabs(eta[0]);
  for (int i = 1; i < 4; ++i) r.lhs_max = std::max(r.lhs_max, r.A + std::fabs(eta[i]));
  r.holds = r.lhs_max <= r.rhs;
  return r;
}

struct GeodesicPoint {
  double tau = 0.0;
  Vec4 X{};
  Vec4 V{};
  double gVV = 0.0;
  double norm_residual = 0.0;  ///< |g(V,V) + A2|
  bool causal_ok = true;       ///< causal_check on V (true where not applicable)
};

struct GeodesicOptions {
  double tol = 1e-10;               ///< relative per-step error tolerance
  double norm_tol = 1e-9;           ///< rejection bound on |g(V,V) + A2| / max(1, (V^0)^2)
  double h_init = 1e-2;
  double h_min = 1e-12;
  double h_max = 1.0;
  std::vector<double> sample_taus;  ///< sampled in addition to every accepted step when record_steps
  bool record_steps = true;
  /// Optional event: integration stops where this changes sign from < 0 to >= 0.
  std::function<double(const Vec4& X, const Vec4& V)> stop;
};

struct Trajectory {
  std::vector<GeodesicPoint> points;   ///< accepted steps (if recorded) and samples, in tau order
  double A2 = 0.0;
  double max_norm_residual = 0.0;      ///< over every accepted step
  double min_V0 = HUGE_VAL;            ///< over every accepted step
  bool truncated = false;
  bool stopped_by_event = false;
  std::string reason;
  int accepted = 0;
  int rejected = 0;
};

/// Raised when the step size underflows (norm drift cannot be kept within tolerance).
class StepUnderflow : public std::runtime_error {
 public:
  explicit StepUnderflow(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

using Y = std::array<double, 8>;

inline Y deriv(const MetricProvider& p, const Y& y) {
  const Vec4 X{y[0], y[1], y[2], y[3]};
  const Vec4 V{y[4], y[5], y[6], y[7]};
  const Vec4 a = geodesic_acceleration(p.sample(X), V);
  return {V[0], V[1], V[2], V[3], a[0], a[1], a[2], a[3]};
}

/// One Dormand-Prince 5(4) step; returns the 5th-order solution and the error vector.
inline void dopri_step(const MetricProvider& p, const Y& y, double h, Y& y5, Y& err) {
  static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45, a42 = -56.0 / 15,
                          a43 = 32.0 / 9, a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729, a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656, b1 = 35.0 / 384, b3 = 500.0 / 1113,
                          b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84, e1 = 71.0 / 57600,
                          e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                          e7 = -1.0 / 40;
  auto comb = [&](std::initializer_list<std::pair<double, const Y*>> terms) {
    Y out = y;
    for (const auto& [c, k] : terms)
      for (int i = 0; i < 8; ++i) out[i] += h * c * (*k)[i];
    return out;
  };
  const Y k1 = deriv(p, y);
  const Y k2 = deriv(p, comb({{a21, &k1}}));
  const Y k3 = deriv(p, comb({{a31, &k1}, {a32, &k2}}));
  const Y k4 = deriv(p, comb({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Y k5 = deriv(p, comb({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Y k6 = deriv(p, comb({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  y5 = comb({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const Y k7 = deriv(p, y5);
  for (int i = 0; i < 8; ++i)
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
}

}  // namespace detail

/// Integrates from X(0) = Y0, X'(0) = xi to tau_max. A2 = -g(xi, xi) is fixed at
/// the start. Leaving the provider domain truncates the trajectory; a step
/// size underflow throws StepUnderflow.
inline Trajectory integrate(const MetricProvider& p, const Vec4& Y0, const Vec4& xi, double tau_max,
                            const GeodesicOptions& opt = {}) {
  if (!(xi[0] > 0.0)) throw DomainError("initial velocity must be future directed");
  if (!(tau_max >= 0.0)) throw ConfigError("tau_max must be nonnegative");
  const MetricSample s0 = p.sample(Y0);
  const double n0 = contract(s0.g, xi, xi);
  if (n0 > 1e-14 * xi[0] * xi[0]) throw DomainError("initial velocity is spacelike");

  Trajectory tr;
  tr.A2 = -n0;
  std::vector<double> samples = opt.sample_taus;
  std::sort(samples.begin(), samples.end());
  std::size_t next_sample = 0;
  while (next_sample < samples.size() && samples[next_sample] <= 0.0) ++next_sample;

  auto point = [&](double tau, const detail::Y& y) {
    GeodesicPoint gp;
    gp.tau = tau;
    gp.X = {y[0], y[1], y[2], y[3]};
    gp.V = {y[4], y[5], y[6], y[7]};
    const MetricSample s = p.sample(gp.X);
    gp.gVV = contract(s.g, gp.V, gp.V);
    gp.norm_residual = std::fabs(gp.gVV + tr.A2);
    try {
      gp.causal_ok = causal_check(gp.V, s.g).holds;
    } catch (const DomainError&) {
      gp.causal_ok = true;  // outside the lemma's hypotheses or numerically on the cone boundary
    }
    return gp;
  };
  auto norm_error = [&](const detail::Y& y) {
    const Vec4 X{y[0], y[1], y[2], y[3]}, V{y[4], y[5], y[6], y[7]};
    return std::fabs(contract(p.sample(X).g, V, V) + tr.A2) / std::max(1.0, V[0] * V[0]);
  };

  detail::Y y{Y0[0], Y0[1], Y0[2], Y0[3], xi[0], xi[1], xi[2], xi[3]};
  double tau = 0.0, h = std::min(opt.h_init, opt.h_max);
  tr.points.push_back(point(0.0, y));
  tr.min_V0 = xi[0];
  double ev_prev = opt.stop ? opt.stop(Y0, xi) : -1.0;

  while (tau < tau_max) {
    double target = tau_max;
    if (next_sample < samples.size()) target = std::min(target, samples[next_sample]);
    const bool hits = tau + h >= target;
    const double step = hits ? target - tau : h;
    detail::Y y5, err;
    try {
      detail::dopri_step(p, y, step, y5, err);
    } catch (const OutOfDomain& e) {
      if (step > 64 * opt.h_min) {
        h = 0.25 * step;
        ++tr.rejected;
        continue;
      }
      tr.truncated = true;
      tr.reason = e.what();
      break;
    }
    double en = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double sc = opt.tol * (1.0 + std::max(std::fabs(y[i]), std::fabs(y5[i])));
      en = std::max(en, std::fabs(err[i]) / sc);
    }
    double nerr = HUGE_VAL;
    if (std::isfinite(en)) {
      try {
        nerr = norm_error(y5);
      } catch (const OutOfDomain&) {
        en = HUGE_VAL;
      }
    }
    const bool ok = en <= 1.0 && nerr <= opt.norm_tol;
    const double factor = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
    if (!ok) {
      ++tr.rejected;
      h = step * std::clamp(std::isfinite(factor) ? factor : 0.1, 0.1, 0.5);
      if (h < opt.h_min)
        throw StepUnderflow("geodesic step size underflow at tau = " + std::to_string(tau) +
                            " (norm drift " + std::to_string(nerr) + ")");
      continue;
    }
    // event location by bisection on the step length
    if (opt.stop) {
      const Vec4 X5{y5[0], y5[1], y5[2], y5[3]}, V5{y5[4], y5[5], y5[6], y5[7]};
      const double ev = opt.stop(X5, V5);
      if (ev_prev < 0.0 && ev >= 0.0) {
        double lo = 0.0, hi = step;
        detail::Y yh = y5, e2;
        for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, tau); ++it) {
          const double mid = 0.5 * (lo + hi);
          detail::Y ym;
          detail::dopri_step(p, y, mid, ym, e2);
          const Vec4 Xm{ym[0], ym[1], ym[2], ym[3]}, Vm{ym[4], ym[5], ym[6], ym[7]};
          if (opt.stop(Xm, Vm) >= 0.0) {
            hi = mid;
            yh = ym;
          } else {
            lo = mid;
          }
        }
        y = yh;
        tau += hi;
        ++tr.accepted;
        const GeodesicPoint gp = point(tau, y);
        tr.max_norm_residual = std::max(tr.max_norm_residual, gp.norm_residual);
        tr.min_V0 = std::min(tr.min_V0, gp.V[0]);
        tr.points.push_back(gp);
        tr.stopped_by_event = true;
        tr.reason = "stop event";
        break;
      }
      ev_prev = ev;
    }
    y = y5;
    tau = hits ? target : tau + step;
    ++tr.accepted;
    const bool sampled = hits && next_sample < samples.size() && target == samples[next_sample];
    if (sampled) ++next_sample;
    const GeodesicPoint gp = point(tau, y);
    tr.max_norm_residual = std::max(tr.max_norm_residual, gp.norm_residual);
    tr.min_V0 = std::min(tr.min_V0, gp.V[0]);
    if (opt.record_steps || sampled || tau >= tau_max) tr.points.push_back(gp);
    if (!(gp.V[0] > 0.0)) throw DomainError("geodesic velocity stopped being future directed");
    if (!hits) h = std::min(opt.h_max, step * std::min(5.0, factor));
  }
  return tr;
}

struct Launch {
  Vec4 Y{};
  Vec4 xi{};
  double tau_max = 1.0;
};

/// Integrates independent geodesics in parallel; results are in launch order.
inline std::vector<Trajectory> integrate_batch(const MetricProvider& p, const std::vector<Launch>& launches,
                                               const GeodesicOptions& opt = {}) {
  std::vector<Trajectory> out(launches.size());
  parallel_for(0, static_cast<int>(launches.size()), [&](int i) {
    const auto& l = launches[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = integrate(p, l.Y, l.xi, l.tau_max, opt);
  });
  return out;
}

/// Outgoing radial null direction at spatial point x in a static metric.
inline Vec4 radial_null_direction(const MetricProvider& p, const Vec4& X) {
  const SymTensor2 g = p.sample(X).g;
  const Vec3 x{X[1], X[2], X[3]};
  const double r = norm(x);
  if (!(r > 0.0)) throw DomainError("radial direction undefined at the origin");
  const Vec4 n{0.0, x[0] / r, x[1] / r, x[2] / r};
  // g00 + 2 s g(e0, n) + s^2 g(n, n) = 0 for V = e0 + s n, outgoing root
  const Vec4 e0{1.0, 0.0, 0.0, 0.0};
  const double a = contract(g, n, n), b = 2.0 * contract(g, e0, n), c = g(0, 0);
  const double disc = b * b - 4.0 * a * c;
  if (!(a > 0.0) || !(disc >= 0.0)) throw DomainError("no outgoing null direction at this point");
  const double s = (-b + std::sqrt(disc)) / (2.0 * a);
  return {1.0, s * n[1], s * n[2], s * n[3]};
}

struct CompletenessReport {
  bool conclusive = false;
  double delta = 0.0;        ///< fitted exponent defect, max(0, 1 - 1/slope)
  double slope = 0.0;        ///< d log(1 + t - t0) / d log(1 + V0(0) tau) over the late half
  double C = 0.0;            ///< max (1 + t - t0)^(1 - delta) / (1 + V0(0) tau)
  double eps_h = 0.0;        ///< max |h| (largest entry) along the path
  bool delta_bound = false;  ///< delta <= 4 eps_h
  bool escape = false;       ///< |x| strictly increasing over the late half
  bool future = false;       ///< V0 > 0 at every point
  std::string note;
};

/// Finite-time proxies for completeness and escape on a computed trajectory.
inline CompletenessReport completeness_probe(const Trajectory& tr, const MetricProvider& p) {
  CompletenessReport rep;
  if (tr.truncated || tr.points.size() < 8) {
    rep.note = tr.truncated ? "trajectory truncated: " + tr.reason : "too few points";
    return rep;
  }
  const auto& first = tr.points.front();
  const double t0 = first.X[0], v0 = first.V[0], tau_end = tr.points.back().tau;
  std::vector<double> lx, ly;
  rep.future = true;
  for (const auto& gp : tr.points) {
    rep.future = rep.future && gp.V[0] > 0.0;
    rep.eps_h = std::max(rep.eps_h, (p.sample(gp.X).g - minkowski()).max_abs());
    if (gp.tau >= 0.5 * tau_end) {
      lx.push_back(std::log1p(v0 * gp.tau));
      ly.push_back(std::log1p(gp.X[0] - t0));
    }
  }
  if (lx.size() < 3) {
    rep.note = "too few late points";
    return rep;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  rep.slope = sxx > 0 ? sxy / sxx : 1.0;
  rep.delta = rep.slope > 1.0 ? 1.0 - 1.0 / rep.slope : 0.0;
  for (const auto& gp : tr.points)
    rep.C = std::max(rep.C, std::pow(1.0 + gp.X[0] - t0, 1.0 - rep.delta) / (1.0 + v0 * gp.tau));
  rep.delta_bound = rep.delta <= 4.0 * rep.eps_h + 1e-12;
  rep.escape = true;
  double r_prev = -1.0;
  for (const auto& gp : tr.points) {
    if (gp.tau < 0.5 * tau_end) continue;
    const double r = norm(Vec3{gp.X[1], gp.X[2], gp.X[3]});
    if (r_prev >= 0.0 && !(r > r_prev)) rep.escape = false;
    r_prev = r;
  }
  rep.conclusive = true;
  return rep;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr,
                                 const std::function<std::string(double)>& fmt) {
  os << "tau,t,x,y,z,Vt,Vx,Vy,Vz,gVV,norm_residual,future,causal\n";
  for (const auto& gp : tr.points) {
    os << fmt(gp.tau);
    for (double v : gp.X) os << "," << fmt(v);
    for (double v : gp.V) os << "," << fmt(v);
    os << "," << fmt(gp.gVV) << "," << fmt(gp.norm_residual) << "," << (gp.V[0] > 0.0 ? 1 : 0) << ","
       << (gp.causal_ok ? 1 : 0) << "\n";
  }
}

}  // namespace wavegauge::geo
