#pragma once

/// \file rhs.hpp
/// \brief The source F_{mn}(h)(dh, dh) of the reduced equations and its split
/// into the Minkowski quadratic form P, the null form Q, and a remainder G
/// that vanishes with h.

#include <array>
#include <cmath>
#include <string>

#include "wavegauge/gauge.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::rhs {

/// Largest admissible |h| entry.
inline constexpr double kMaxPerturbation = 0.25;

/// h = g - m and its first partials at a point.
struct FieldJet {
  SymTensor2 h;
  std::array<SymTensor2, 4> dh;  ///< dh[a] = d_a h

  SymTensor2 metric() const { return minkowski() + h; }

  /// H^{ab} = g^{ab} - m^{ab}.
  SymTensor2 H() const { return invert(metric()).inv - minkowski(); }

  void require_small() const {
    if (!(h.max_abs() < kMaxPerturbation) || !h.all_finite())
      throw DomainError("perturbation h exceeds the small-data bound |h| < 1/4 (max entry " +
                        std::to_string(h.max_abs()) + ")");
  }
};

/// P(d_m h, d_n h) with Minkowski contractions.
inline double P_term(const SymTensor2& dh_mu, const SymTensor2& dh_nu) {
  return 0.25 * minkowski_trace(dh_mu) * minkowski_trace(dh_nu) -
         0.5 * minkowski_double_contraction(dh_mu, dh_nu);
}

/// All ten P_{mn} = P(d_m h, d_n h).
inline SymTensor2 P_tensor(const std::array<SymTensor2, 4>& dh) {
  SymTensor2 out;
  for (int s = 0; s < 10; ++s) {
    const auto [m, n] = kSymPairs[s];
    out[s] = P_term(dh[m], dh[n]);
  }
  return out;
}

/// The null form Q_{mn}(dh, dh): the six grouped terms with m-contractions.
inline SymTensor2 Q_term(const std::array<SymTensor2, 4>& dh) {
  return gauge::quadratic_forms(minkowski(), dh).Q;
}

/// Ptilde + Qtilde evaluated with the exact inverse of g = m + h.
inline SymTensor2 F_exact(const FieldJet& j) {
  j.require_small();
  const auto qf = gauge::quadratic_forms(invert(j.metric()).inv, j.dh);
  return qf.P + qf.Q;
}

/// G := F_exact - P - Q. Vanishes when h = 0 and is cubic in (h, dh).
inline SymTensor2 G_term(const FieldJet& j) {
  const SymTensor2 f = F_exact(j);
  return f - P_tensor(j.dh) - Q_term(j.dh);
}

/// The decomposition F = P + Q + G.
struct Decomposition {
  SymTensor2 P;
  SymTensor2 Q;
  SymTensor2 G;
  SymTensor2 F;  ///< P + Q + G
};

inline Decomposition F_assemble(const FieldJet& j) {
  Decomposition d;
  const SymTensor2 f = F_exact(j);
  d.P = P_tensor(j.dh);
  d.Q = Q_term(j.dh);
  d.G = f - d.P - d.Q;
  d.F = d.P + d.Q + d.G;
  return d;
}

}  // namespace wavegauge::rhs
