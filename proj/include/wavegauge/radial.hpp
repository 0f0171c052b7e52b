#pragma once

/// \file radial.hpp
/// \brief Second-order forward-mode derivatives of functions of one variable
/// and the Cartesian jets of spherically symmetric fields built from them.

#include <array>
#include <cmath>

#include "wavegauge/tensor.hpp"

namespace wavegauge {

/// Value with first and second derivative in one variable.
struct Dual2 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  static Dual2 variable(double x) { return {x, 1.0, 0.0}; }
  static Dual2 constant(double c) { return {c, 0.0, 0.0}; }
};

inline Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Dual2 operator-(Dual2 a) { return {-a.v, -a.d1, -a.d2}; }
inline Dual2 operator*(Dual2 a, Dual2 b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Dual2 operator*(double c, Dual2 a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline Dual2 operator*(Dual2 a, double c) { return c * a; }
inline Dual2 operator+(Dual2 a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Dual2 operator+(double c, Dual2 a) { return a + c; }
inline Dual2 operator-(Dual2 a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Dual2 operator-(double c, Dual2 a) { return {c - a.v, -a.d1, -a.d2}; }

inline Dual2 reciprocal(Dual2 a) {
  const double i = 1.0 / a.v;
  const double i2 = i * i;
  return {i, -a.d1 * i2, (2.0 * a.d1 * a.d1 * i - a.d2) * i2};
}
inline Dual2 operator/(Dual2 a, Dual2 b) { return a * reciprocal(b); }
inline Dual2 operator/(double c, Dual2 b) { return c * reciprocal(b); }
inline Dual2 operator/(Dual2 a, double c) { return (1.0 / c) * a; }

inline Dual2 log(Dual2 a) {
  const double i = 1.0 / a.v;
  return {std::log(a.v), a.d1 * i, a.d2 * i - a.d1 * a.d1 * i * i};
}

/// Quintic transition on [lo, hi]: 0 below, 1 above, C^2 at both ends.
inline Dual2 quintic_blend(Dual2 r, double lo, double hi) {
  if (r.v <= lo) return Dual2::constant(0.0);
  if (r.v >= hi) return Dual2::constant(1.0);
  const double w = hi - lo;
  const double s = (r.v - lo) / w;
  const double ds = r.d1 / w;
  const double dds = r.d2 / w;
  const double f = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  const double fs = 30.0 * s * s * (1.0 - s) * (1.0 - s);
  const double fss = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
  return {f, fs * ds, fss * ds * ds + fs * dds};
}

/// Value, gradient and Hessian of a scalar field on R^3.
struct SpatialJet {
  double value = 0.0;
  Vec3 grad{};
  std::array<Vec3, 3> hess{};
};

/// Cartesian jet of f(|x|) given the radial jet of f.
inline SpatialJet radial_to_cartesian(const Dual2& f, const Vec3& x) {
  const double r = norm(x);
  SpatialJet j;
  j.value = f.v;
  for (int k = 0; k < 3; ++k) j.grad[k] = f.d1 * x[k] / r;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      const double wkl = x[k] * x[l] / (r * r);
      j.hess[k][l] = f.d2 * wkl + f.d1 * ((k == l ? 1.0 : 0.0) - wkl) / r;
    }
  return j;
}

/// Jets of the 3x3 field A(r) delta_ij + B(r) x_i x_j, one per component
/// (i <= j ordering 11,12,13,22,23,33).
inline std::array<SpatialJet, 6> isotropic_plus_radial(const Dual2& A, const Dual2& B, const Vec3& x) {
  const SpatialJet a = radial_to_cartesian(A, x);
  const SpatialJet b = radial_to_cartesian(B, x);
  std::array<SpatialJet, 6> out;
  int c = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j, ++c) {
      const double dij = i == j ? 1.0 : 0.0;
      SpatialJet& o = out[c];
      o.value = a.value * dij + b.value * x[i] * x[j];
      for (int k = 0; k < 3; ++k) {
        const double dxixj = (k == i ? x[j] : 0.0) + (k == j ? x[i] : 0.0);
        o.grad[k] = a.grad[k] * dij + b.grad[k] * x[i] * x[j] + b.value * dxixj;
      }
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double dk = (k == i ? x[j] : 0.0) + (k == j ? x[i] : 0.0);
          const double dl = (l == i ? x[j] : 0.0) + (l == j ? x[i] : 0.0);
          const double dkl = ((k == i && l == j) ? 1.0 : 0.0) + ((k == j && l == i) ? 1.0 : 0.0);
          o.hess[k][l] = a.hess[k][l] * dij + b.hess[k][l] * x[i] * x[j] + b.grad[k] * dl +
                         b.grad[l] * dk + b.value * dkl;
        }
    }
  return out;
}

}  // namespace wavegauge
