#pragma once

/// \file schwarzschild.hpp
/// \brief Closed-form Schwarzschild metric in wave and isotropic coordinates,
/// the radial map between them, and the outgoing radial null cone.

#include <array>
#include <cmath>
#include <functional>

#include "wavegauge/gauge.hpp"
#include "wavegauge/radial.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::data {

/// Radial profiles of a static spherically symmetric metric
///   g_00 = f0(r),  g_ij = A(r) delta_ij + B(r) x_i x_j,  g_0i = 0.
struct RadialProfiles {
  Dual2 f0;
  Dual2 A;
  Dual2 B;
};

inline RadialProfiles wave_profiles(double M, double r) {
  const Dual2 R = Dual2::variable(r);
  const Dual2 a_t = (R + 2.0 * M) * (R + 2.0 * M) / (R * R);
  const Dual2 a_r = (R + 2.0 * M) / (R - 2.0 * M);
  RadialProfiles p;
  p.f0 = -((R - 2.0 * M) / (R + 2.0 * M));
  p.A = a_t;
  // a_r - a_t = (r+2M) [r^2 - (r+2M)(r-2M)] / (r^2 (r-2M)) = 4M^2 (r+2M) / (r^2 (r-2M))
  p.B = 4.0 * M * M * (R + 2.0 * M) / (R * R * R * R * (R - 2.0 * M));
  return p;
}

inline RadialProfiles isotropic_profiles(double M, double rho) {
  const Dual2 R = Dual2::variable(rho);
  const Dual2 u = M / R;
  const Dual2 lapse = (1.0 - u) / (1.0 + u);
  const Dual2 psi = 1.0 + u;
  RadialProfiles p;
  p.f0 = -(lapse * lapse);
  p.A = psi * psi * psi * psi;
  p.B = Dual2::constant(0.0);
  return p;
}

/// Static metric jet (value, first and second partials) from radial profiles.
inline gauge::MetricJet jet_from_profiles(const RadialProfiles& p, const Vec3& x) {
  gauge::MetricJet j;
  const SpatialJet f0 = radial_to_cartesian(p.f0, x);
  const auto sp = isotropic_plus_radial(p.A, p.B, x);
  j.g(0, 0) = f0.value;
  for (int k = 0; k < 3; ++k) {
    j.dg[k + 1](0, 0) = f0.grad[k];
    for (int l = k; l < 3; ++l) j.second(k + 1, l + 1)(0, 0) = f0.hess[k][l];
  }
  int c = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b, ++c) {
      j.g(a + 1, b + 1) = sp[c].value;
      for (int k = 0; k < 3; ++k) {
        j.dg[k + 1](a + 1, b + 1) = sp[c].grad[k];
        for (int l = k; l < 3; ++l) j.second(k + 1, l + 1)(a + 1, b + 1) = sp[c].hess[k][l];
      }
    }
  return j;
}

inline void require_outside_horizon(double M, double r) {
  if (!(M >= 0.0)) throw DomainError("mass must be nonnegative");
  if (!(r > 2.0 * M)) throw DomainError("point lies at or inside r = 2M");
}

/// Schwarzschild metric in wave coordinates at spatial point x.
inline SymTensor2 schwarzschild_wave(double M, const Vec3& x) {
  const double r = norm(x);
  require_outside_horizon(M, r);
  if (M == 0.0) return minkowski();
  const double a_r = (r + 2.0 * M) / (r - 2.0 * M);
  const double a_t = (r + 2.0 * M) * (r + 2.0 * M) / (r * r);
  SymTensor2 g;
  g(0, 0) = -(r - 2.0 * M) / (r + 2.0 * M);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double wij = x[i] * x[j] / (r * r);
      g(i + 1, j + 1) = a_r * wij + a_t * ((i == j ? 1.0 : 0.0) - wij);
    }
  return g;
}

/// Closed-form jet of the wave-coordinate Schwarzschild metric.
inline gauge::MetricJet schwarzschild_wave_jet(double M, const Vec3& x) {
  const double r = norm(x);
  require_outside_horizon(M, r);
  if (M == 0.0) return gauge::MetricJet::flat();
  return jet_from_profiles(wave_profiles(M, r), x);
}

/// Schwarzschild metric in isotropic coordinates at spatial point x (|x| = rho).
inline SymTensor2 schwarzschild_isotropic(double M, const Vec3& x) {
  const double rho = norm(x);
  if (!(M >= 0.0)) throw DomainError("mass must be nonnegative");
  if (!(rho > M / 2.0)) throw DomainError("isotropic radius must exceed M/2");
  const double u = M / rho;
  const double lapse = (1.0 - u) / (1.0 + u);
  const double psi4 = std::pow(1.0 + u, 4);
  return SymTensor2::diag(-lapse * lapse, psi4, psi4, psi4);
}

inline gauge::MetricJet schwarzschild_isotropic_jet(double M, const Vec3& x) {
  const double rho = norm(x);
  if (!(rho > M / 2.0)) throw DomainError("isotropic radius must exceed M/2");
  return jet_from_profiles(isotropic_profiles(M, rho), x);
}

/// Fourth-order central-difference jet of an arbitrary static metric field.
inline gauge::MetricJet finite_difference_jet(const std::function<SymTensor2(const Vec3&)>& metric,
                                              const Vec3& x, double step) {
  gauge::MetricJet j;
  j.g = metric(x);
  auto at = [&](int k, double sk, int l, double sl) {
    Vec3 y = x;
    y[k] += sk * step;
    if (l >= 0) y[l] += sl * step;
    return metric(y);
  };
  constexpr double w1[4] = {1.0, -8.0, 8.0, -1.0};
  constexpr double o1[4] = {-2.0, -1.0, 1.0, 2.0};
  for (int k = 0; k < 3; ++k) {
    SymTensor2 d;
    for (int s = 0; s < 4; ++s) d += w1[s] * at(k, o1[s], -1, 0.0);
    j.dg[k + 1] = (1.0 / (12.0 * step)) * d;
    SymTensor2 dd = -30.0 * j.g;
    dd += -1.0 * at(k, -2.0, -1, 0.0);
    dd += 16.0 * at(k, -1.0, -1, 0.0);
    dd += 16.0 * at(k, 1.0, -1, 0.0);
    dd += -1.0 * at(k, 2.0, -1, 0.0);
    j.second(k + 1, k + 1) = (1.0 / (12.0 * step * step)) * dd;
    for (int l = k + 1; l < 3; ++l) {
      SymTensor2 m;
      for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) m += (w1[s] * w1[t]) * at(k, o1[s], l, o1[t]);
      j.second(k + 1, l + 1) = (1.0 / (144.0 * step * step)) * m;
    }
  }
  return j;
}

/// Radius map from isotropic to wave coordinates: identity for rho <= lo,
/// r = rho + M^2/rho for rho >= hi, quintic blend in between.
inline double iso_to_wave_radius(double rho, double M, double lo = 0.5, double hi = 1.0) {
  if (!(rho > 0.0)) throw DomainError("radius must be positive");
  const double chi = quintic_blend(Dual2::constant(rho), lo, hi).v;
  return rho + chi * M * M / rho;
}

/// Unblended map r = rho + M^2/rho.
inline double iso_to_wave_radius_pure(double rho, double M) {
  if (!(rho > 0.0)) throw DomainError("radius must be positive");
  return rho + M * M / rho;
}

/// Coordinate time at which the outgoing radial null ray leaving radius R at
/// t = 0 reaches radius r.
inline double schwarzschild_null_cone(double R, double M, double r) {
  if (!(M >= 0.0)) throw DomainError("mass must be nonnegative");
  if (!(R > 2.0 * M)) throw DomainError("launch radius must exceed 2M");
  if (!(r >= R)) throw DomainError("target radius must be at least the launch radius");
  if (M == 0.0) return r - R;
  return r - R + 4.0 * M * std::log((r - 2.0 * M) / (R - 2.0 * M));
}

}  // namespace wavegauge::data
