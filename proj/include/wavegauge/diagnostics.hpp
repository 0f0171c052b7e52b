#pragma once

/// \file diagnostics.hpp
/// \brief Slice diagnostics of an evolved state: commuting vector fields,
/// energies E_N and their weighted spacetime companions S_N, gauge residual
/// norms, derivative maxima in the null frame, the transport form of the
/// reduced wave equation, a weighted Sobolev ratio for test functions, and
/// log-log decay fits.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavegauge/evolve.hpp"
#include "wavegauge/frame.hpp"
#include "wavegauge/gauge.hpp"
#include "wavegauge/grid.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::diag {

/// Uniform lattice with arbitrary origin; GridSpec boxes are centred at 0.
struct Lattice {
  int n = 0;
  double dx = 1.0;
  Vec3 origin{};

  static Lattice from(const GridSpec& g) {
    return {g.n, g.spacing(), {-g.extent, -g.extent, -g.extent}};
  }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(k) * n + j) * n + i; }
  Vec3 point(int i, int j, int k) const {
    return {origin[0] + i * dx, origin[1] + j * dx, origin[2] + k * dx};
  }
  double cell_volume() const { return dx * dx * dx; }
};

/// Commuting fields: d_t, d_1..d_3, Omega_12, Omega_13, Omega_23,
/// Omega_01..Omega_03, S.
enum class VectorField : int {
  D0, D1, D2, D3, O12, O13, O23, B1, B2, B3, S
};
inline constexpr int kVectorFieldCount = 11;

inline const char* name(VectorField z) {
  static const char* names[] = {"d0", "d1", "d2", "d3", "O12", "O13", "O23", "O01", "O02", "O03", "S"};
  return names[static_cast<int>(z)];
}

/// Coefficients Z = a^0 d_t + a^i d_i (affine in t, x) and their t-derivatives.
struct FieldCoefficients {
  std::array<double, 4> a{};
  std::array<double, 4> a_t{};
};

inline FieldCoefficients coefficients(VectorField z, double t, const Vec3& x) {
  FieldCoefficients c;
  const int id = static_cast<int>(z);
  if (id <= 3) {
    c.a[id] = 1.0;
  } else if (id <= 6) {
    static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    const int i = kPairs[id - 4][0], j = kPairs[id - 4][1];
    c.a[j + 1] = x[i];
    c.a[i + 1] = -x[j];
  } else if (id <= 9) {
    const int i = id - 7;
    c.a[i + 1] = t;
    c.a_t[i + 1] = 1.0;
    c.a[0] = x[i];
  } else {
    c.a[0] = t;
    c.a_t[0] = 1.0;
    for (int i = 0; i < 3; ++i) c.a[i + 1] = x[i];
  }
  return c;
}

/// A scalar grid function u with its time derivatives u_k = d_t^k u, k = 0..K,
/// valid on cells at least `margin` cells from every face.
struct TimeJet {
  std::vector<Field> level;
  int margin = 0;

  int order() const { return static_cast<int>(level.size()) - 1; }
};

namespace detail {

inline double d1(const Lattice& L, const double* f, std::size_t p, int axis) {
  const std::ptrdiff_t s = axis == 0 ? 1 : (axis == 1 ? L.n : static_cast<std::ptrdiff_t>(L.n) * L.n);
  const double* c = f + p;
  return (c[-2 * s] - 8.0 * c[-s] + 8.0 * c[s] - c[2 * s]) / (12.0 * L.dx);
}

template <class Body>
void for_interior(const Lattice& L, int margin, Body&& body) {
  parallel_for(margin, L.n - margin, [&](int k) {
    for (int j = margin; j < L.n - margin; ++j)
      for (int i = margin; i < L.n - margin; ++i) body(i, j, k, L.index(i, j, k));
  });
}

template <class Body>
double sum_interior(const Lattice& L, int margin, Body&& body) {
  return parallel_sum(margin, L.n - margin, [&](int k) {
    double s = 0.0;
    for (int j = margin; j < L.n - margin; ++j)
      for (int i = margin; i < L.n - margin; ++i) s += body(i, j, k, L.index(i, j, k));
    return s;
  });
}

}  // namespace detail

/// Z u as a TimeJet of one lower order. Time derivatives of Z u follow from
/// the Leibniz rule since the coefficients are affine in t.
inline TimeJet apply(VectorField z, const TimeJet& u, const Lattice& L, double t) {
  const int K = u.order();
  if (K < 1) throw std::invalid_argument("vector field application needs one more time derivative");
  TimeJet out;
  out.margin = u.margin + 2;
  out.level.assign(static_cast<std::size_t>(K), Field(L.size(), 0.0));
  detail::for_interior(L, out.margin, [&](int i, int j, int k, std::size_t p) {
    const FieldCoefficients c = coefficients(z, t, L.point(i, j, k));
    std::array<double, 3> grad_prev{};
    for (int lv = 0; lv < K; ++lv) {
      std::array<double, 3> grad{};
      double v = c.a[0] * u.level[lv + 1][p] + lv * c.a_t[0] * u.level[lv][p];
      for (int a = 0; a < 3; ++a) {
        if (c.a[a + 1] != 0.0 || (lv + 1 < K && c.a_t[a + 1] != 0.0)) grad[a] = detail::d1(L, u.level[lv].data(), p, a);
        v += c.a[a + 1] * grad[a] + lv * c.a_t[a + 1] * grad_prev[a];
      }
      out.level[lv][p] = v;
      grad_prev = grad;
    }
  });
  return out;
}

/// Applies a word Z^I (applied right to left: word.back() acts first).
inline TimeJet apply_word(const std::vector<VectorField>& word, TimeJet u, const Lattice& L, double t) {
  if (static_cast<int>(word.size()) > u.order())
    throw std::invalid_argument("vector field word is longer than the available time derivatives");
  for (auto it = word.rbegin(); it != word.rend(); ++it) u = apply(*it, u, L, t);
  return u;
}

/// Time derivatives d_t^k h_c, k = 0..K (K <= 3) of one component. Level 2
/// uses the equation; level 3 a centered difference of it along the flow.
struct HTower {
  std::array<std::vector<Field>, 10> comp;
  int order = 0;
};

inline HTower time_tower(const MetricState& s, int K) {
  if (K < 1 || K > 3) throw std::invalid_argument("time tower order must be 1..3");
  HTower T;
  T.order = K;
  for (int c = 0; c < 10; ++c) {
    T.comp[c].push_back(s.h[c]);
    T.comp[c].push_back(s.dth[c]);
  }
  if (K == 1) return T;
  const auto acc = evolve::acceleration_field(s);
  for (int c = 0; c < 10; ++c) T.comp[c].push_back(acc[c]);
  if (K == 2) return T;
  const double delta = 1e-3 * s.grid.spacing();
  std::array<Field, 10> hp = s.h, hm = s.h, dp = s.dth, dm = s.dth;
  for (int c = 0; c < 10; ++c)
    for (std::size_t p = 0; p < acc[c].size(); ++p) {
      hp[c][p] += delta * s.dth[c][p];
      hm[c][p] -= delta * s.dth[c][p];
      dp[c][p] += delta * acc[c][p];
      dm[c][p] -= delta * acc[c][p];
    }
  const auto ap = evolve::acceleration_field(s.grid, hp, dp);
  const auto am = evolve::acceleration_field(s.grid, hm, dm);
  for (int c = 0; c < 10; ++c) {
    Field d3(acc[c].size(), 0.0);
    for (std::size_t p = 0; p < d3.size(); ++p) d3[p] = (ap[c][p] - am[c][p]) / (2.0 * delta);
    T.comp[c].push_back(std::move(d3));
  }
  return T;
}

/// Integrals accumulated over one slice.
struct SliceEnergy {
  std::vector<double> E;   ///< E[N] = sum_{|I|<=N} int |d Z^I h|^2
  std::vector<double> S;   ///< S[N] density: sum_{|I|<=N} int |dbar Z^I h|^2 / (1+|q|)^{1+2 gamma}
};

struct EnergyOptions {
  int max_order = 0;       ///< N_max <= 2
  double gamma = 0.25;
  double mask_radius = 0.0;     ///< S_N weights vanish inside max(mask_radius, 4 dx)
  double exclude_radius = 0.0;  ///< E_N and S_N skip cells with r below this
};

/// E_N and the S_N integrand for N <= max_order. The spatial integration
/// region is the set of cells at least 2(N+1) from every face.
inline SliceEnergy energy(const MetricState& s, const EnergyOptions& opt) {
  if (opt.max_order < 0 || opt.max_order > 2) throw std::invalid_argument("energy order must be 0..2");
  if (!(opt.gamma > 0.0 && opt.gamma <= 0.5)) throw std::invalid_argument("gamma must lie in (0, 1/2]");
  const Lattice L = Lattice::from(s.grid);
  const double dV = L.cell_volume();
  const double tmask = std::max(opt.mask_radius, 4.0 * L.dx);
  const int N = opt.max_order;
  const int region = 2 * (N + 1);
  SliceEnergy out;
  out.E.assign(N + 1, 0.0);
  out.S.assign(N + 1, 0.0);
  const double t = s.t;
  const HTower tower = time_tower(s, N + 1);
  auto accumulate = [&](const TimeJet& u, int order) {
    double e = detail::sum_interior(L, region, [&](int i, int j, int k, std::size_t p) {
      if (opt.exclude_radius > 0.0 && norm(L.point(i, j, k)) < opt.exclude_radius) return 0.0;
      double v = u.level[1][p] * u.level[1][p];
      for (int a = 0; a < 3; ++a) {
        const double g = detail::d1(L, u.level[0].data(), p, a);
        v += g * g;
      }
      return v;
    });
    double w = detail::sum_interior(L, region, [&](int i, int j, int k, std::size_t p) {
      const Vec3 x = L.point(i, j, k);
      const double r = norm(x);
      if (r < tmask || r < opt.exclude_radius) return 0.0;
      const Vec3 om{x[0] / r, x[1] / r, x[2] / r};
      std::array<double, 3> g;
      for (int a = 0; a < 3; ++a) g[a] = detail::d1(L, u.level[0].data(), p, a);
      const double gr = dot(om, g);
      const double Lu = u.level[1][p] + gr;
      double ang = 0.0;
      for (int a = 0; a < 3; ++a) ang += (g[a] - om[a] * gr) * (g[a] - om[a] * gr);
      const double q = r - t;
      return (Lu * Lu + ang) / std::pow(1.0 + std::fabs(q), 1.0 + 2.0 * opt.gamma);
    });
    for (int M = order; M <= N; ++M) {
      out.E[M] += e * dV;
      out.S[M] += opt.gamma * w * dV;
    }
  };
  for (int c = 0; c < 10; ++c) {
    TimeJet u0{tower.comp[c], 0};
    accumulate(u0, 0);
    if (N == 0) continue;
    for (int z1 = 0; z1 < kVectorFieldCount; ++z1) {
      const TimeJet u1 = apply(static_cast<VectorField>(z1), u0, L, t);
      accumulate(u1, 1);
      if (N < 2) continue;
      for (int z2 = 0; z2 < kVectorFieldCount; ++z2) accumulate(apply(static_cast<VectorField>(z2), u1, L, t), 2);
    }
  }
  return out;
}

/// L2 and L-infinity norms of Gamma^lambda over cells at least 2 from a face
/// and outside exclude_radius.
struct GaugeNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

inline GaugeNorms gauge_monitor(const MetricState& s, double exclude_radius = 0.0) {
  const GridSpec& g = s.grid;
  const Lattice L = Lattice::from(g);
  const Stencil st(g);
  const int n = g.n;
  std::vector<double> l2(n, 0.0), linf(n, 0.0);
  parallel_for(2, n - 2, [&](int k) {
    for (int j = 2; j < n - 2; ++j)
      for (int i = 2; i < n - 2; ++i) {
        if (norm(g.point(i, j, k)) < exclude_radius) continue;
        const std::size_t p = g.index(i, j, k);
        const SymTensor2 gm = minkowski() + s.h_at(p);
        std::array<SymTensor2, 4> dg;
        dg[0] = s.dth_at(p);
        for (int a = 0; a < 3; ++a)
          for (int c = 0; c < 10; ++c) dg[a + 1][c] = st.d1(s.h[c].data(), p, a);
        const auto res = gauge::gauge_residual(gm, invert(gm).inv, dg);
        for (int l = 0; l < 4; ++l) {
          l2[k] += res.upper[l] * res.upper[l];
          linf[k] = std::max(linf[k], std::fabs(res.upper[l]));
        }
      }
  });
  GaugeNorms out;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += l2[k];
    out.linf = std::max(out.linf, linf[k]);
  }
  out.l2 = std::sqrt(sum * L.cell_volume());
  return out;
}

/// max over the slice of |d h| = max_a |d_a h|_UU and |d h|_TU = max_a |d_a h|_TU,
/// masked inside max(mask_radius, 4 dx).
struct DerivativeMax {
  double all = 0.0;
  double tu = 0.0;
};

inline DerivativeMax derivative_max(const MetricState& s, double mask_radius = 0.0) {
  const GridSpec& g = s.grid;
  const Stencil st(g);
  const double rmin = std::max(mask_radius, 4.0 * g.spacing());
  const int n = g.n;
  std::vector<DerivativeMax> part(n);
  parallel_for(2, n - 2, [&](int k) {
    for (int j = 2; j < n - 2; ++j)
      for (int i = 2; i < n - 2; ++i) {
        const Vec3 x = g.point(i, j, k);
        if (norm(x) < rmin) continue;
        const std::size_t p = g.index(i, j, k);
        const frame::NullFrame f = frame::build_null_frame(x);
        for (int a = 0; a < 4; ++a) {
          SymTensor2 d;
          for (int c = 0; c < 10; ++c) d[c] = a == 0 ? s.dth[c][p] : st.d1(s.h[c].data(), p, a - 1);
          const auto fc = frame::frame_components(d, f);
          part[k].all = std::max(part[k].all, frame::frame_norm(fc, frame::Family::U, frame::Family::U));
          part[k].tu = std::max(part[k].tu, frame::frame_norm(fc, frame::Family::T, frame::Family::U));
        }
      }
  });
  DerivativeMax out;
  for (const auto& d : part) {
    out.all = std::max(out.all, d.all);
    out.tu = std::max(out.tu, d.tu);
  }
  return out;
}

/// Transport form of the reduced wave equation, component by component:
/// residual = |(4 d_s - H_LL/(2 g^LLb) d_q - (trH + H_LLb)/(2 g^LLb r)) d_q(r h) + r F/(2 g^LLb)|
/// and the majorant
///   r|Lap_omega h| + |H|_LT r|dbar d h| + |H| (r|dbar^2 h| + |dbar h| + |h|/r),
/// both maximized over the 10 components. Cells with r < mask are zero.
struct TransportField {
  Field residual;
  Field majorant;
  double max_residual = 0.0;
  double max_ratio = 0.0;  ///< max residual/majorant where the majorant exceeds floor
};

inline TransportField transport_residual(const MetricState& s, double mask_radius = 0.0, double floor = 1e-300) {
  const GridSpec& g = s.grid;
  const Stencil st(g);
  const double rmin = std::max(mask_radius, 4.0 * g.spacing());
  const auto acc = evolve::acceleration_field(s);
  TransportField out;
  out.residual.assign(g.size(), 0.0);
  out.majorant.assign(g.size(), 0.0);
  const int n = g.n;
  const int w = 4;
  parallel_for(w, n - w, [&](int k) {
    for (int j = w; j < n - w; ++j)
      for (int i = w; i < n - w; ++i) {
        const Vec3 x = g.point(i, j, k);
        const double r = norm(x);
        if (r < rmin) continue;
        const std::size_t p = g.index(i, j, k);
        const frame::NullFrame f = frame::build_null_frame(x);
        const Vec3& om = f.omega;
        rhs::FieldJet jet;
        jet.h = s.h_at(p);
        jet.dh[0] = s.dth_at(p);
        for (int a = 0; a < 3; ++a)
          for (int c = 0; c < 10; ++c) jet.dh[a + 1][c] = st.d1(s.h[c].data(), p, a);
        const SymTensor2 ginv = invert(jet.metric()).inv;
        const SymTensor2 H = ginv - minkowski();
        const SymTensor2 Hlow = raise_both(H);
        const auto Hf = frame::frame_components(Hlow, f);
        const double H_LL = Hf[frame::kL][frame::kL];
        const double H_LLb = Hf[frame::kL][frame::kLbar];
        const double trH = Hf[frame::kS1][frame::kS1] + Hf[frame::kS2][frame::kS2];
        const double gLLb = -0.5 + 0.25 * H_LLb;
        const double H_LT = frame::frame_norm(Hf, frame::Family::L, frame::Family::T);
        const double H_abs = H.max_abs();
        const auto qf = gauge::quadratic_forms(ginv, jet.dh);
        double res_max = 0.0, maj_max = 0.0;
        for (int c = 0; c < 10; ++c) {
          const double* hc = s.h[c].data();
          const double* tc = s.dth[c].data();
          const double phi = hc[p];
          const double phi_t = tc[p];
          const double phi_tt = acc[c][p];
          std::array<double, 3> grad, grad_t;
          std::array<std::array<double, 3>, 3> hess;
          for (int a = 0; a < 3; ++a) {
            grad[a] = jet.dh[a + 1][c];
            grad_t[a] = st.d1(tc, p, a);
            for (int b = a; b < 3; ++b) hess[a][b] = hess[b][a] = st.second(hc, p, a, b);
          }
          const double phi_r = dot(om, grad);
          const double phi_rt = dot(om, grad_t);
          double phi_rr = 0.0, lap = 0.0;
          for (int a = 0; a < 3; ++a) {
            lap += hess[a][a];
            for (int b = 0; b < 3; ++b) phi_rr += om[a] * om[b] * hess[a][b];
          }
          const double lap_omega = lap - phi_rr - 2.0 / r * phi_r;
          const double ds_dq = 0.25 * (r * phi_rr + 2.0 * phi_r - r * phi_tt);
          const double dq = 0.5 * (phi + r * phi_r - r * phi_t);
          const double dqq = 0.25 * (2.0 * phi_r + r * phi_rr - 2.0 * phi_t - 2.0 * r * phi_rt + r * phi_tt);
          const double F = qf.P[c] + qf.Q[c];
          const double res = std::fabs(4.0 * ds_dq - H_LL / (2.0 * gLLb) * dqq -
                                       (trH + H_LLb) / (2.0 * gLLb * r) * dq + r * F / (2.0 * gLLb));
          // spacetime Hessian D_ab of the component and its frame contractions
          SymTensor2 D;
          D(0, 0) = phi_tt;
          for (int a = 0; a < 3; ++a) {
            D(0, a + 1) = grad_t[a];
            for (int b = a; b < 3; ++b) D(a + 1, b + 1) = hess[a][b];
          }
          const auto Df = frame::frame_components(D, f);
          const double dbar_d = frame::frame_norm(Df, frame::Family::T, frame::Family::U);
          const double dbar2 = frame::frame_norm(Df, frame::Family::T, frame::Family::T);
          const Vec4 dphi{phi_t, grad[0], grad[1], grad[2]};
          double dbar = 0.0;
          for (const Vec4* T : {&f.L, &f.S1, &f.S2})
            dbar += std::fabs((*T)[0] * dphi[0] + (*T)[1] * dphi[1] + (*T)[2] * dphi[2] + (*T)[3] * dphi[3]);
          const double maj = r * std::fabs(lap_omega) + H_LT * r * dbar_d +
                             H_abs * (r * dbar2 + dbar + std::fabs(phi) / r);
          res_max = std::max(res_max, res);
          maj_max = std::max(maj_max, maj);
        }
        out.residual[p] = res_max;
        out.majorant[p] = maj_max;
      }
  });
  for (std::size_t p = 0; p < g.size(); ++p) {
    out.max_residual = std::max(out.max_residual, out.residual[p]);
    if (out.majorant[p] > floor) out.max_ratio = std::max(out.max_ratio, out.residual[p] / out.majorant[p]);
  }
  return out;
}

/// Analytic scalar test function phi with its first three time derivatives.
using ScalarTower = std::function<std::array<double, 4>(double t, const Vec3& x)>;

/// Gaussian exp(-|y|^2/w^2), y = x - (c + t) e1, moving at unit speed along x1.
inline ScalarTower translated_gaussian(Vec3 c, double w, double amplitude = 1.0) {
  return [c, w, amplitude](double t, const Vec3& x) {
    const double y1 = x[0] - c[0] - t, y2 = x[1] - c[1], y3 = x[2] - c[2];
    const double b = amplitude * std::exp(-(y1 * y1 + y2 * y2 + y3 * y3) / (w * w));
    // d_t^k b = (-d_1)^k b = w^-k H_k(y1/w) b with physicists' Hermite H_k
    const double u = y1 / w;
    const double H1 = 2.0 * u, H2 = 4.0 * u * u - 2.0, H3 = 8.0 * u * u * u - 12.0 * u;
    return std::array<double, 4>{b, H1 / w * b, H2 / (w * w) * b, H3 / (w * w * w) * b};
  };
}

struct SobolevOptions {
  Vec3 center{};         ///< lattice centre
  double half_width = 4.0;
  double spacing = 0.4;
};

struct SobolevResult {
  double ratio = 0.0;     ///< sup weighted |phi| / sum_{|I|<=3} ||Z^I phi||_L2
  double numerator = 0.0;
  double denominator = 0.0;
  int words = 0;
};

/// Weighted Sobolev ratio sup |phi| (1+t+|t-r|)(1+|t-r|)^{1/2} / sum_{|I|<=3} ||Z^I phi||
/// on a local lattice; the norms are restricted to cells where all stencils fit.
inline SobolevResult sobolev_ratio(const ScalarTower& phi, double t, const SobolevOptions& opt) {
  Lattice L;
  L.dx = opt.spacing;
  const int half = static_cast<int>(std::ceil(opt.half_width / opt.spacing));
  L.n = 2 * half + 1;
  for (int a = 0; a < 3; ++a) L.origin[a] = opt.center[a] - half * opt.spacing;
  TimeJet u;
  u.level.assign(4, Field(L.size(), 0.0));
  for (int k = 0; k < L.n; ++k)
    for (int j = 0; j < L.n; ++j)
      for (int i = 0; i < L.n; ++i) {
        const auto v = phi(t, L.point(i, j, k));
        for (int lv = 0; lv < 4; ++lv) u.level[lv][L.index(i, j, k)] = v[lv];
      }
  const int region = 6;
  SobolevResult out;
  for (int k = region; k < L.n - region; ++k)
    for (int j = region; j < L.n - region; ++j)
      for (int i = region; i < L.n - region; ++i) {
        const double r = norm(L.point(i, j, k));
        const double q = std::fabs(t - r);
        out.numerator = std::max(out.numerator, std::fabs(u.level[0][L.index(i, j, k)]) * (1.0 + t + q) *
                                                     std::sqrt(1.0 + q));
      }
  auto l2 = [&](const TimeJet& v) {
    return std::sqrt(L.cell_volume() * detail::sum_interior(L, region, [&](int, int, int, std::size_t p) {
                       return v.level[0][p] * v.level[0][p];
                     }));
  };
  // depth-first over words of length <= 3
  std::function<void(const TimeJet&, int)> dfs = [&](const TimeJet& v, int depth) {
    out.denominator += l2(v);
    ++out.words;
    if (depth == 3) return;
    for (int z = 0; z < kVectorFieldCount; ++z) dfs(apply(static_cast<VectorField>(z), v, L, t), depth + 1);
  };
  dfs(u, 0);
  out.ratio = out.denominator > 0.0 ? out.numerator / out.denominator : 0.0;
  return out;
}

/// Least-squares slope of log y against log(1+t) over samples with t in [t0, t1].
struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

inline PowerFit fit_power(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t0 && t[i] <= t1 && y[i] > 0.0 && std::isfinite(y[i])) {
      X.push_back(std::log1p(t[i]));
      Y.push_back(std::log(y[i]));
    }
  if (X.size() < 3) throw std::runtime_error("power-law fit needs at least three positive samples");
  const double m = static_cast<double>(X.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sx += X[i];
    sy += Y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::runtime_error("power-law fit needs distinct sample times");
  PowerFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.samples = static_cast<int>(X.size());
  return f;
}

/// Pearson correlation of two equally long samples.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs paired samples");
  const double m = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / m;
    mb += b[i] / m;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return (saa > 0 && sbb > 0) ? sab / std::sqrt(saa * sbb) : 0.0;
}

/// One output row.
struct DiagnosticsRow {
  double t = 0.0;
  std::vector<double> E;      ///< instantaneous slice energies
  std::vector<double> E_sup;  ///< running max over earlier rows
  std::vector<double> S;      ///< accumulated weighted spacetime integrals
  double gauge_l2 = 0.0;
  double gauge_linf = 0.0;
  double max_dh = 0.0;
  double max_dh_tu = 0.0;
  double max_abs_h = 0.0;
};

struct DiagnosticsSeries {
  int max_order = 0;
  double gamma = 0.25;
  std::vector<DiagnosticsRow> rows;

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& r : rows) t.push_back(r.t);
    return t;
  }
  template <class F>
  std::vector<double> column(F&& f) const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(f(r));
    return v;
  }
};

/// Fitted exponents: max|dh| ~ (1+t)^-p_all, max|dh|_TU ~ (1+t)^-p_TU, and
/// E_k(t)/E_k(t0) ~ (1+t)^{growth_k}; C_k = growth_k / epsilon.
struct DecayReport {
  PowerFit all, tu;
  double p_all = 0.0;
  double p_tu = 0.0;
  std::vector<double> growth;
  std::vector<double> C;
};

inline DecayReport decay_fit(const DiagnosticsSeries& s, double t0, double t1, double epsilon = 0.0) {
  const auto t = s.times();
  DecayReport d;
  d.all = fit_power(t, s.column([](const DiagnosticsRow& r) { return r.max_dh; }), t0, t1);
  d.tu = fit_power(t, s.column([](const DiagnosticsRow& r) { return r.max_dh_tu; }), t0, t1);
  d.p_all = -d.all.slope;
  d.p_tu = -d.tu.slope;
  for (int k = 0; k <= s.max_order; ++k) {
    const double g = fit_power(t, s.column([k](const DiagnosticsRow& r) { return r.E[k]; }), t0, t1).slope;
    d.growth.push_back(g);
    d.C.push_back(epsilon > 0.0 ? g / epsilon : 0.0);
  }
  return d;
}

}  // namespace wavegauge::diag
