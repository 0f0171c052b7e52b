#pragma once

/// \file frame.hpp
/// \brief The Minkowski null frame {L, Lbar, S1, S2} attached to a spatial
/// direction, and the pointwise tensor algebra expressed in that frame.

#include <array>
#include <cmath>

#include "wavegauge/tensor.hpp"

namespace wavegauge::frame {

/// Null frame at a spatial point x != 0, with omega = x/|x|.
///   L = (1, omega), Lbar = (1, -omega), S1, S2 orthonormal and tangent to the sphere.
struct NullFrame {
  Vec3 omega{};
  Vec4 L{};
  Vec4 Lbar{};
  Vec4 S1{};
  Vec4 S2{};

  /// Frame vector by position in U = {Lbar, L, S1, S2}.
  const Vec4& vec(int i) const {
    switch (i) {
      case 0: return Lbar;
      case 1: return L;
      case 2: return S1;
      default: return S2;
    }
  }
};

/// Frame vector slot numbers used by vec().
enum Slot : int { kLbar = 0, kL = 1, kS1 = 2, kS2 = 3 };

/// Builds the frame for direction x. S1 is the projection onto the sphere of
/// the lowest-index coordinate axis not parallel to omega, S2 = omega x S1.
inline NullFrame build_null_frame(const Vec3& x) {
  const double r = norm(x);
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("null frame requires a nonzero finite point");
  NullFrame f;
  f.omega = {x[0] / r, x[1] / r, x[2] / r};
  // renormalize once more so |omega| = 1 to rounding
  const double rn = norm(f.omega);
  for (auto& w : f.omega) w /= rn;

  Vec3 s1{};
  for (int k = 0; k < 3; ++k) {
    Vec3 e{0.0, 0.0, 0.0};
    e[k] = 1.0;
    const double c = dot(e, f.omega);
    // "not parallel": keep a healthy transverse component
    if (std::fabs(c) < 0.9) {
      for (int i = 0; i < 3; ++i) s1[i] = e[i] - c * f.omega[i];
      break;
    }
  }
  const double n1 = norm(s1);
  for (auto& v : s1) v /= n1;
  const Vec3 s2 = cross(f.omega, s1);

  f.L = {1.0, f.omega[0], f.omega[1], f.omega[2]};
  f.Lbar = {1.0, -f.omega[0], -f.omega[1], -f.omega[2]};
  f.S1 = {0.0, s1[0], s1[1], s1[2]};
  f.S2 = {0.0, s2[0], s2[1], s2[2]};
  return f;
}

/// Rotates S1, S2 by angle theta within the sphere's tangent plane.
inline NullFrame rotate_tangent(const NullFrame& f, double theta) {
  NullFrame g = f;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (int a = 0; a < 4; ++a) {
    g.S1[a] = c * f.S1[a] + s * f.S2[a];
    g.S2[a] = -s * f.S1[a] + c * f.S2[a];
  }
  return g;
}

/// All 16 frame components k_{VW}, indexed by Slot.
using FrameComponents = std::array<std::array<double, 4>, 4>;

inline FrameComponents frame_components(const SymTensor2& k, const NullFrame& f) {
  FrameComponents c{};
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      c[i][j] = contract(k, f.vec(i), f.vec(j));
      c[j][i] = c[i][j];
    }
  return c;
}

/// tr k = -1/2 (k_{L Lbar} + k_{Lbar L}) + delta^{AB} k_{AB}.
inline double frame_trace(const SymTensor2& k, const NullFrame& f) {
  const double kLLb = contract(k, f.L, f.Lbar);
  return -0.5 * (kLLb + kLLb) + contract(k, f.S1, f.S1) + contract(k, f.S2, f.S2);
}

/// p_{ab} k^{ab} assembled from frame components.
inline double frame_trace_of_product(const SymTensor2& p, const SymTensor2& k, const NullFrame& f) {
  const auto P = frame_components(p, f);
  const auto K = frame_components(k, f);
  double s = 0.25 * (P[kL][kL] * K[kLbar][kLbar] + P[kLbar][kLbar] * K[kL][kL] +
                     2.0 * P[kL][kLbar] * K[kLbar][kL]);
  for (int A = kS1; A <= kS2; ++A) s -= P[A][kL] * K[A][kLbar] + P[A][kLbar] * K[A][kL];
  for (int A = kS1; A <= kS2; ++A)
    for (int B = kS1; B <= kS2; ++B) s += P[A][B] * K[A][B];
  return s;
}

/// Families of frame vectors used by the frame norms.
enum class Family { T, U, L, S };

inline std::array<int, 4> family_slots(Family fam, int& count) {
  switch (fam) {
    case Family::T: count = 3; return {kL, kS1, kS2, 0};
    case Family::U: count = 4; return {kLbar, kL, kS1, kS2};
    case Family::L: count = 1; return {kL, 0, 0, 0};
    case Family::S: count = 2; return {kS1, kS2, 0, 0};
  }
  count = 0;
  return {};
}

/// |p|_{VW}: sum over ordered pairs (V,W) of |p(V,W)|.
inline double frame_norm(const FrameComponents& c, Family v, Family w) {
  int nv = 0;
  int nw = 0;
  const auto sv = family_slots(v, nv);
  const auto sw = family_slots(w, nw);
  double s = 0.0;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nw; ++j) s += std::fabs(c[sv[i]][sw[j]]);
  return s;
}

inline double frame_norm(const SymTensor2& p, const NullFrame& f, Family v, Family w) {
  return frame_norm(frame_components(p, f), v, w);
}

/// P(p,k) = 1/4 tr p tr k - 1/2 p_{ab} k^{ab}, indices raised with m.
inline double quadratic_P(const SymTensor2& p, const SymTensor2& k) {
  return 0.25 * minkowski_trace(p) * minkowski_trace(k) - 0.5 * minkowski_double_contraction(p, k);
}

/// The same quadratic form expanded in the null frame; every term carries at
/// least one factor with only tangential components.
inline double quadratic_P_frame(const SymTensor2& p, const SymTensor2& k, const NullFrame& f) {
  const auto P = frame_components(p, f);
  const auto K = frame_components(k, f);
  double s = -0.125 * (P[kL][kL] * K[kLbar][kLbar] + P[kLbar][kLbar] * K[kL][kL]);
  double angular = 0.0;
  const double trp = P[kS1][kS1] + P[kS2][kS2];
  const double trk = K[kS1][kS1] + K[kS2][kS2];
  for (int A = kS1; A <= kS2; ++A)
    for (int B = kS1; B <= kS2; ++B) angular += 2.0 * P[A][B] * K[A][B];
  angular -= trp * trk;
  s -= 0.25 * angular;
  double mixed = 0.0;
  for (int A = kS1; A <= kS2; ++A)
    mixed += 2.0 * P[A][kL] * K[A][kLbar] + 2.0 * P[A][kLbar] * K[A][kL] - P[A][A] * K[kL][kLbar] -
             P[kL][kLbar] * K[A][A];
  s += 0.25 * mixed;
  return s;
}

}  // namespace wavegauge::frame
