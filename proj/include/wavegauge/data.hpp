#pragma once

/// \file data.hpp
/// \brief Initial data on the t = 0 slice: a Schwarzschild exterior glued to
/// flat space (plus optional compact test bumps) inside, with the time
/// derivatives of g_{0a} completed from the wave-coordinate condition, and the
/// Hamiltonian and momentum constraint residuals of the resulting slice.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "wavegauge/gauge.hpp"
#include "wavegauge/grid.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/radial.hpp"
#include "wavegauge/rhs.hpp"
#include "wavegauge/schwarzschild.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::data {

/// Transition region of the exterior blend.
struct Smoothing {
  double lo = 0.5;
  double hi = 1.0;
};

struct DataConfig {
  double M = 0.0;
  double r_inner = 0.5;  ///< closed forms are never evaluated below this radius
  double r_outer = 4.0;  ///< radius of the domain on which data is requested
  Smoothing smoothing;

  void validate() const {
    if (!(M >= 0.0)) throw ConfigError("data.M must be nonnegative");
    if (!(r_inner > 0.0)) throw ConfigError("data.r_inner must be positive");
    if (!(M < r_inner / 4.0)) throw ConfigError("data.M must be below r_inner/4");
    if (!(r_outer > r_inner)) throw ConfigError("data.r_outer must exceed data.r_inner");
    if (!(smoothing.lo >= r_inner && smoothing.hi > smoothing.lo))
      throw ConfigError("data.smoothing must satisfy r_inner <= lo < hi");
  }
};

/// Compact C^3 bump A (1 - |x-c|^2/w^2)^4 added to one spatial component
/// g_ab (1 <= a,b <= 3) or to its time derivative.
struct Bump {
  int a = 1;
  int b = 1;
  double amplitude = 0.0;
  Vec3 center{};
  double width = 0.5;
  bool time_derivative = false;
};

using Perturbation = std::vector<Bump>;

inline SpatialJet bump_jet(const Bump& bump, const Vec3& x) {
  SpatialJet j;
  const Vec3 y{x[0] - bump.center[0], x[1] - bump.center[1], x[2] - bump.center[2]};
  const double w2 = bump.width * bump.width;
  const double u = 1.0 - dot(y, y) / w2;
  if (u <= 0.0) return j;
  const double u2 = u * u;
  j.value = bump.amplitude * u2 * u2;
  // d/dx_k u = -2 y_k / w^2
  const double f1 = bump.amplitude * 4.0 * u2 * u;
  const double f2 = bump.amplitude * 12.0 * u2;
  for (int k = 0; k < 3; ++k) {
    j.grad[k] = f1 * (-2.0 * y[k] / w2);
    for (int l = 0; l < 3; ++l)
      j.hess[k][l] = f2 * (4.0 * y[k] * y[l] / (w2 * w2)) + f1 * (k == l ? -2.0 / w2 : 0.0);
  }
  return j;
}

/// Checks support (inside |x| < support) and smallness of every bump.
inline void validate_perturbation(const Perturbation& p, double support = 1.0) {
  for (const auto& b : p) {
    if (b.a < 1 || b.a > 3 || b.b < 1 || b.b > 3)
      throw DomainError("perturbation component indices must be spatial (1..3)");
    if (!(b.width > 0.0)) throw DomainError("perturbation width must be positive");
    if (!(norm(b.center) + b.width <= support))
      throw DomainError("perturbation must be supported in r < " + std::to_string(support));
    if (!(std::fabs(b.amplitude) < 0.5 * rhs::kMaxPerturbation))
      throw DomainError("perturbation amplitude too large for the small-data regime");
  }
}

/// Metric and its first partials at a point of the t = 0 slice.
struct CauchyPoint {
  SymTensor2 g;
  std::array<SymTensor2, 4> dg;  ///< dg[0] = d_t g, dg[k] = d_k g
};

/// Profiles of the glued background: flat for r <= lo, Schwarzschild for r >= hi.
inline RadialProfiles blended_profiles(const DataConfig& cfg, double r) {
  RadialProfiles p;
  p.f0 = Dual2::constant(-1.0);
  p.A = Dual2::constant(1.0);
  p.B = Dual2::constant(0.0);
  if (r <= cfg.smoothing.lo || cfg.M == 0.0) return p;
  const RadialProfiles s = wave_profiles(cfg.M, r);
  const Dual2 chi = quintic_blend(Dual2::variable(r), cfg.smoothing.lo, cfg.smoothing.hi);
  if (chi.v == 1.0 && chi.d1 == 0.0 && chi.d2 == 0.0) return s;
  p.f0 = -1.0 + chi * (s.f0 + 1.0);
  p.A = 1.0 + chi * (s.A - 1.0);
  p.B = chi * s.B;
  return p;
}

/// Spatial jet of the slice data before the gauge completion: d_t g_{0a} = 0.
inline gauge::MetricJet slice_jet(const DataConfig& cfg, const Perturbation& pert, const Vec3& x) {
  const double r = norm(x);
  gauge::MetricJet j = r > cfg.smoothing.lo && cfg.M > 0.0 ? jet_from_profiles(blended_profiles(cfg, r), x)
                                                           : gauge::MetricJet::flat();
  for (const auto& b : pert) {
    const SpatialJet bj = bump_jet(b, x);
    if (bj.value == 0.0 && bj.grad == Vec3{}) continue;
    if (b.time_derivative) {
      j.dg[0](b.a, b.b) += bj.value;
      continue;
    }
    j.g(b.a, b.b) += bj.value;
    for (int k = 0; k < 3; ++k) {
      j.dg[k + 1](b.a, b.b) += bj.grad[k];
      for (int l = k; l < 3; ++l) j.second(k + 1, l + 1)(b.a, b.b) += bj.hess[k][l];
    }
  }
  return j;
}

/// Solves the four wave-coordinate conditions V_m = 0 for d_t g_{0a}, which
/// enter V affinely; the other entries of dg are left untouched.
inline void complete_gauge(const SymTensor2& g, std::array<SymTensor2, 4>& dg) {
  const SymTensor2 ginv = invert(g).inv;
  for (int a = 0; a < 4; ++a) dg[0](0, a) = 0.0;
  const Vec4 v0 = gauge::gauge_residual(g, ginv, dg).lowered;
  Eigen::Matrix4d J;
  for (int a = 0; a < 4; ++a) {
    auto probe = dg;
    probe[0](0, a) = 1.0;
    const Vec4 v = gauge::gauge_residual(g, ginv, probe).lowered;
    for (int m = 0; m < 4; ++m) J(m, a) = v[m] - v0[m];
  }
  Eigen::Vector4d rhs_v(-v0[0], -v0[1], -v0[2], -v0[3]);
  const Eigen::Vector4d sol = J.fullPivLu().solve(rhs_v);
  for (int a = 0; a < 4; ++a) dg[0](0, a) = sol[a];
  // one refinement pass against the linearization rounding
  const Vec4 v1 = gauge::gauge_residual(g, ginv, dg).lowered;
  rhs_v = Eigen::Vector4d(-v1[0], -v1[1], -v1[2], -v1[3]);
  const Eigen::Vector4d corr = J.fullPivLu().solve(rhs_v);
  for (int a = 0; a < 4; ++a) dg[0](0, a) += corr[a];
}

/// Completed data at one point using closed-form spatial derivatives.
inline CauchyPoint cauchy_point(const DataConfig& cfg, const Perturbation& pert, const Vec3& x) {
  const gauge::MetricJet j = slice_jet(cfg, pert, x);
  CauchyPoint c{j.g, j.dg};
  complete_gauge(c.g, c.dg);
  return c;
}

/// How the spatial derivatives in the completion are taken.
enum class Completion {
  Analytic,  ///< closed-form derivatives; the pointwise gauge residual vanishes
  Discrete,  ///< grid stencils; the grid gauge monitor vanishes
};

/// Builds the t = 0 state: h = g - m and d_t h from the completed data.
inline MetricState build_cauchy_data(const DataConfig& cfg, const GridSpec& grid,
                                     const Perturbation& pert = {},
                                     Completion mode = Completion::Analytic) {
  cfg.validate();
  validate_perturbation(pert, cfg.smoothing.hi);
  MetricState s;
  s.grid = grid;
  s.mass = cfg.M;
  s.t = 0.0;
  s.allocate();
  const int n = grid.n;
  parallel_for(0, n, [&](int k) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t p = grid.index(i, j, k);
        const CauchyPoint c = cauchy_point(cfg, pert, grid.point(i, j, k));
        const SymTensor2 h = c.g - minkowski();
        if (!(h.max_abs() < rhs::kMaxPerturbation))
          throw DomainError("initial data violates |h| < 1/4");
        for (int q = 0; q < 10; ++q) {
          s.h[q][p] = h[q];
          s.dth[q][p] = c.dg[0][q];
        }
      }
  });
  if (mode == Completion::Discrete) {
    const Stencil st(grid);
    parallel_for(2, n - 2, [&](int k) {
      for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i) {
          const std::size_t p = grid.index(i, j, k);
          const SymTensor2 g = minkowski() + s.h_at(p);
          std::array<SymTensor2, 4> dg;
          dg[0] = s.dth_at(p);
          for (int ax = 0; ax < 3; ++ax)
            for (int q = 0; q < 10; ++q) dg[ax + 1][q] = st.d1(s.h[q].data(), p, ax);
          complete_gauge(g, dg);
          for (int a = 0; a < 4; ++a) s.dth[sym_index(0, a)][p] = dg[0](0, a);
        }
    });
  }
  return s;
}

/// Max over grid points of |Gamma^l| using closed-form spatial derivatives of
/// the data together with the state's d_t h.
inline double pointwise_gauge_residual(const DataConfig& cfg, const Perturbation& pert,
                                       const MetricState& s) {
  const GridSpec& grid = s.grid;
  return parallel_max(0, grid.n, [&](int k) {
    double m = 0.0;
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i) {
        const gauge::MetricJet jet = slice_jet(cfg, pert, grid.point(i, j, k));
        auto dg = jet.dg;
        dg[0] = s.dth_at(grid.index(i, j, k));
        const auto gr = gauge::gauge_residual(jet.g, invert(jet.g).inv, dg);
        for (double v : gr.upper) m = std::fmax(m, std::fabs(v));
      }
    return m;
  });
}

/// Hamiltonian R + K^2 - K_ij K^ij and momentum D_j K^j_i - D_i K residuals.
/// Entries within 4 cells of a face are left at zero.
struct ConstraintResiduals {
  Field hamiltonian;
  std::array<Field, 3> momentum;
};

inline ConstraintResiduals constraint_residuals(const MetricState& s) {
  const GridSpec& grid = s.grid;
  const int n = grid.n;
  const Stencil st(grid);
  ConstraintResiduals out;
  out.hamiltonian.assign(grid.size(), 0.0);
  for (auto& f : out.momentum) f.assign(grid.size(), 0.0);

  // K_ij in slots 11,12,13,22,23,33 and the spatial Christoffels' ingredients
  std::array<Field, 6> K;
  for (auto& f : K) f.assign(grid.size(), 0.0);
  Field ricci_scalar(grid.size(), 0.0);
  static constexpr int kSpatialSlot[6] = {4, 5, 6, 7, 8, 9};

  auto spatial_inverse = [](const SymTensor2& g) {
    Eigen::Matrix3d m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m(a, b) = g(a + 1, b + 1);
    return Eigen::Matrix3d(m.inverse());
  };

  parallel_for(2, n - 2, [&](int k) {
    for (int j = 2; j < n - 2; ++j)
      for (int i = 2; i < n - 2; ++i) {
        const std::size_t p = grid.index(i, j, k);
        const SymTensor2 g = minkowski() + s.h_at(p);
        gauge::MetricJet sj;
        sj.g = SymTensor2::diag(-1.0, 0.0, 0.0, 0.0);
        for (int c : kSpatialSlot) sj.g[c] = g[c];
        std::array<SymTensor2, 3> dgam;
        for (int ax = 0; ax < 3; ++ax)
          for (int c = 0; c < 10; ++c) {
            const double d = st.d1(s.h[c].data(), p, ax);
            dgam[ax][c] = d;
            bool spatial = false;
            for (int q : kSpatialSlot) spatial = spatial || q == c;
            if (spatial) sj.dg[ax + 1][c] = d;
          }
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b)
            for (int c : kSpatialSlot) sj.second(a + 1, b + 1)[c] = st.second(s.h[c].data(), p, a, b);
        const Eigen::Matrix3d gi = spatial_inverse(g);
        const SymTensor2 R4 = gauge::ricci(sj);
        double R = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) R += gi(a, b) * R4(a + 1, b + 1);
        ricci_scalar[p] = R;

        // lapse and shift
        const SymTensor2 ginv = invert(g).inv;
        const double lapse = std::sqrt(-1.0 / ginv(0, 0));
        double Gam[3][3][3];  // Gamma^c_ab of the spatial metric
        for (int c = 0; c < 3; ++c)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              double v = 0.0;
              for (int d = 0; d < 3; ++d)
                v += gi(c, d) * 0.5 *
                     (dgam[a](d + 1, b + 1) + dgam[b](d + 1, a + 1) - dgam[d](a + 1, b + 1));
              Gam[c][a][b] = v;
            }
        int slot = 0;
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b, ++slot) {
            double Dab = dgam[a](0, b + 1) + dgam[b](0, a + 1);
            for (int c = 0; c < 3; ++c) Dab -= 2.0 * Gam[c][a][b] * g(0, c + 1);
            K[slot][p] = (Dab - s.dth[sym_index(a + 1, b + 1)][p]) / (2.0 * lapse);
          }
      }
  });

  auto kslot = [](int a, int b) { return sym_index(a + 1, b + 1) - 4; };
  parallel_for(4, n - 4, [&](int k) {
    for (int j = 4; j < n - 4; ++j)
      for (int i = 4; i < n - 4; ++i) {
        const std::size_t p = grid.index(i, j, k);
        const SymTensor2 g = minkowski() + s.h_at(p);
        const Eigen::Matrix3d gi = spatial_inverse(g);
        double Kd[3][3];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) Kd[a][b] = K[kslot(a, b)][p];
        double trK = 0.0;
        double KK = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            trK += gi(a, b) * Kd[a][b];
            for (int c = 0; c < 3; ++c)
              for (int d = 0; d < 3; ++d) KK += gi(a, c) * gi(b, d) * Kd[a][b] * Kd[c][d];
          }
        out.hamiltonian[p] = ricci_scalar[p] + trK * trK - KK;

        double dgam[3][3][3];  // dgam[e][a][b] = d_e gamma_ab
        double dK[3][3][3];
        for (int e = 0; e < 3; ++e)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              dgam[e][a][b] = st.d1(s.h[sym_index(a + 1, b + 1)].data(), p, e);
              dK[e][a][b] = st.d1(K[kslot(a, b)].data(), p, e);
            }
        double Gam[3][3][3];
        for (int c = 0; c < 3; ++c)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              double v = 0.0;
              for (int d = 0; d < 3; ++d)
                v += gi(c, d) * 0.5 * (dgam[a][d][b] + dgam[b][d][a] - dgam[d][a][b]);
              Gam[c][a][b] = v;
            }
        // D_e K_ab
        auto DK = [&](int e, int a, int b) {
          double v = dK[e][a][b];
          for (int c = 0; c < 3; ++c) v -= Gam[c][e][a] * Kd[c][b] + Gam[c][e][b] * Kd[a][c];
          return v;
        };
        for (int a = 0; a < 3; ++a) {
          double div = 0.0;
          double grad_tr = 0.0;
          for (int e = 0; e < 3; ++e)
            for (int b = 0; b < 3; ++b) {
              div += gi(e, b) * DK(e, b, a);
              grad_tr += gi(e, b) * DK(a, e, b);
            }
          out.momentum[a][p] = div - grad_tr;
        }
      }
  });
  return out;
}

/// Exact wave-coordinate Schwarzschild slice (h, d_t h = 0) on the grid. Inside
/// core_radius the profiles are frozen at their core_radius values.
inline MetricState static_schwarzschild(double M, const GridSpec& grid, double core_radius) {
  if (!(M >= 0.0)) throw ConfigError("mass must be nonnegative");
  if (!(core_radius > 2.0 * M)) throw ConfigError("core radius must exceed 2M");
  MetricState s;
  s.grid = grid;
  s.mass = M;
  s.allocate();
  const RadialProfiles core = wave_profiles(M, core_radius);
  const int n = grid.n;
  parallel_for(0, n, [&](int k) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec3 x = grid.point(i, j, k);
        const std::size_t p = grid.index(i, j, k);
        SymTensor2 h;
        if (norm(x) >= core_radius) {
          h = schwarzschild_wave(M, x) - minkowski();
        } else {
          h(0, 0) = core.f0.v + 1.0;
          for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
              h(a + 1, b + 1) = (a == b ? core.A.v - 1.0 : 0.0) + core.B.v * x[a] * x[b];
        }
        if (!(h.max_abs() < rhs::kMaxPerturbation)) throw DomainError("static data violates |h| < 1/4");
        for (int q = 0; q < 10; ++q) s.h[q][p] = h[q];
      }
  });
  return s;
}

/// Flat-space radial packet h_ab = amplitude exp(-|x|^2/sigma^2), d_t h = 0.
inline double packet_profile(double r, double sigma) { return std::exp(-(r * r) / (sigma * sigma)); }

inline MetricState flat_packet(const GridSpec& grid, int a, int b, double amplitude, double sigma) {
  if (a < 0 || a > 3 || b < 0 || b > 3) throw ConfigError("packet component out of range");
  if (!(sigma > 0.0)) throw ConfigError("packet width must be positive");
  if (!(std::fabs(amplitude) < 0.125)) throw ConfigError("packet amplitude must be below 1/8");
  MetricState s;
  s.grid = grid;
  s.allocate();
  const int c = sym_index(a, b);
  for (int k = 0; k < grid.n; ++k)
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i)
        s.h[c][grid.index(i, j, k)] = amplitude * packet_profile(norm(grid.point(i, j, k)), sigma);
  return s;
}

/// Exact flat wave-equation solution launched from packet_profile at rest:
/// [(r-t) f(r-t) + (r+t) f(r+t)] / (2r).
inline double packet_exact(double r, double t, double sigma) {
  if (r < 1e-8) {
    const double f = packet_profile(t, sigma);
    return f - 2.0 * t * t / (sigma * sigma) * f;
  }
  return ((r - t) * packet_profile(r - t, sigma) + (r + t) * packet_profile(r + t, sigma)) / (2.0 * r);
}

}  // namespace wavegauge::data
