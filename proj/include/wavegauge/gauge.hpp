#pragma once

/// \file gauge.hpp
/// \brief Christoffel symbols, Ricci tensor, the wave-coordinate residual and
/// the quadratic forms of the reduced Einstein equations at a single point.

#include <array>
#include <cmath>

#include "wavegauge/tensor.hpp"

namespace wavegauge::gauge {

/// Metric with first and second partial derivatives at a spacetime point.
struct MetricJet {
  SymTensor2 g;
  std::array<SymTensor2, 4> dg;    ///< dg[a] = d_a g
  std::array<SymTensor2, 10> ddg;  ///< ddg[sym_index(a,b)] = d_a d_b g

  const SymTensor2& second(int a, int b) const { return ddg[sym_index(a, b)]; }
  SymTensor2& second(int a, int b) { return ddg[sym_index(a, b)]; }

  /// Constant Minkowski metric (all derivatives zero).
  static MetricJet flat() {
    MetricJet j;
    j.g = minkowski();
    return j;
  }
};

/// Gamma[l][m][n] = Gamma_m^l_n (symmetric in m,n).
using Christoffel = std::array<std::array<std::array<double, 4>, 4>, 4>;

inline Christoffel christoffel(const SymTensor2& ginv, const std::array<SymTensor2, 4>& dg) {
  Christoffel G{};
  // lowered: Gl[d][m][n] = 1/2 (d_m g_dn + d_n g_dm - d_d g_mn)
  double Gl[4][4][4];
  for (int d = 0; d < 4; ++d)
    for (int m = 0; m < 4; ++m)
      for (int n = m; n < 4; ++n) {
        Gl[d][m][n] = 0.5 * (dg[m](d, n) + dg[n](d, m) - dg[d](m, n));
        Gl[d][n][m] = Gl[d][m][n];
      }
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m)
      for (int n = m; n < 4; ++n) {
        double s = 0.0;
        for (int d = 0; d < 4; ++d) s += ginv(l, d) * Gl[d][m][n];
        G[l][m][n] = s;
        G[l][n][m] = s;
      }
  return G;
}

inline Christoffel christoffel(const MetricJet& j) { return christoffel(invert(j.g).inv, j.dg); }

/// R_{mn} = R_m^a_{na} with R_m^l_{nd} = d_d Gamma_m^l_n - d_n Gamma_m^l_d
///          + Gamma_r^l_d Gamma_m^r_n - Gamma_r^l_n Gamma_m^r_d.
inline SymTensor2 ricci(const MetricJet& j) {
  const SymTensor2 ginv = invert(j.g).inv;
  const Christoffel G = christoffel(ginv, j.dg);

  // d_s g^{ld} = -g^{la} d_s g_{ab} g^{bd}
  std::array<SymTensor2, 4> dginv;
  for (int s = 0; s < 4; ++s) {
    const Mat4 t = matmul(matmul(ginv.matrix(), j.dg[s].matrix()), ginv.matrix());
    dginv[s] = -1.0 * SymTensor2::from_matrix(t);
  }

  // dG[s][l][m][n] = d_s Gamma_m^l_n
  auto dGamma = [&](int s, int l, int m, int n) {
    double acc = 0.0;
    for (int d = 0; d < 4; ++d) {
      const double low = 0.5 * (j.dg[m](d, n) + j.dg[n](d, m) - j.dg[d](m, n));
      const double dlow = 0.5 * (j.second(s, m)(d, n) + j.second(s, n)(d, m) - j.second(s, d)(m, n));
      acc += dginv[s](l, d) * low + ginv(l, d) * dlow;
    }
    return acc;
  };

  SymTensor2 R;
  for (int slot = 0; slot < 10; ++slot) {
    const auto [m, n] = kSymPairs[slot];
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
      s += dGamma(a, a, m, n) - dGamma(n, a, m, a);
      for (int r = 0; r < 4; ++r) s += G[a][r][a] * G[r][m][n] - G[a][r][n] * G[r][m][a];
    }
    R[slot] = s;
  }
  return R;
}

/// The wave-coordinate residual in its two algebraic forms.
struct GaugeResidual {
  Vec4 upper{};   ///< Gamma^l = g^{ab} Gamma_a^l_b
  Vec4 lowered{}; ///< V_m = g^{ab} d_a g_{bm} - 1/2 g^{ab} d_m g_{ab}
  Vec4 inverse_form{};  ///< d_a g^{an} - 1/2 g_{ab} g^{nm} d_m g^{ab}  (= -Gamma^n)
};

inline GaugeResidual gauge_residual(const SymTensor2& g, const SymTensor2& ginv,
                                    const std::array<SymTensor2, 4>& dg) {
  GaugeResidual out;
  const Christoffel G = christoffel(ginv, dg);
  for (int l = 0; l < 4; ++l) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += ginv(a, b) * G[l][a][b];
    out.upper[l] = s;
  }
  for (int m = 0; m < 4; ++m) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += ginv(a, b) * (dg[a](b, m) - 0.5 * dg[m](a, b));
    out.lowered[m] = s;
  }
  // derivatives of the inverse metric
  std::array<Mat4, 4> dgi;
  for (int s = 0; s < 4; ++s) {
    dgi[s] = matmul(matmul(ginv.matrix(), dg[s].matrix()), ginv.matrix());
    for (auto& row : dgi[s])
      for (auto& x : row) x = -x;
  }
  for (int n = 0; n < 4; ++n) {
    double div = 0.0;
    for (int a = 0; a < 4; ++a) div += dgi[a][a][n];
    double tr = 0.0;
    for (int m = 0; m < 4; ++m) {
      double gdg = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) gdg += g(a, b) * dgi[m][a][b];
      tr += ginv(n, m) * gdg;
    }
    out.inverse_form[n] = div - 0.5 * tr;
  }
  return out;
}

inline GaugeResidual gauge_residual(const MetricJet& j) {
  return gauge_residual(j.g, invert(j.g).inv, j.dg);
}

/// The two quadratic forms on the right of the reduced equations,
///   Ptilde_{mn} = P(d_m g, d_n g) and Qtilde_{mn}(dg, dg),
/// with indices contracted by the supplied inverse metric. Passing m^{-1}
/// and d h yields the Minkowski forms P and Q.
struct QuadraticForms {
  SymTensor2 P;
  SymTensor2 Q;
};

inline QuadraticForms quadratic_forms(const SymTensor2& ginv, const std::array<SymTensor2, 4>& dg) {
  double Gi[4][4];
  double D[4][4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Gi[a][b] = ginv(a, b);
      for (int c = 0; c < 4; ++c) D[c][a][b] = dg[c](a, b);
    }

  // tr[c] = g^{ab} d_c g_{ab}
  double tr[4];
  // M[c] = g^{-1} d_c g  (M[c][a][n] = g^{aa'} d_c g_{a'n})
  double M[4][4][4];
  for (int c = 0; c < 4; ++c) {
    double t = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int n = 0; n < 4; ++n) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += Gi[a][k] * D[c][k][n];
        M[c][a][n] = s;
      }
    for (int a = 0; a < 4; ++a) t += M[c][a][a];
    tr[c] = t;
  }
  // div[n] = g^{ab} d_a g_{bn}
  double div[4];
  for (int n = 0; n < 4; ++n) {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += M[a][a][n];
    div[n] = s;
  }
  // raised versions: divU[b] = g^{bb'} div[b'], trU[b] = g^{bb'} tr[b']
  double divU[4];
  double trU[4];
  for (int b = 0; b < 4; ++b) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      s1 += Gi[b][k] * div[k];
      s2 += Gi[b][k] * tr[k];
    }
    divU[b] = s1;
    trU[b] = s2;
  }
  // K[a][b][n] = g^{aa'} g^{bb'} d_{b'} g_{a'n} = sum_b' g^{bb'} M[b'][a][n]
  double K[4][4][4];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int n = 0; n < 4; ++n) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += Gi[b][k] * M[k][a][n];
        K[a][b][n] = s;
      }
  // R[m][a][b] = (g^{-1} d_m g g^{-1})^{ab}
  double R[4][4][4];
  for (int m = 0; m < 4; ++m)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += M[m][a][k] * Gi[k][b];
        R[m][a][b] = s;
      }

  QuadraticForms out;
  for (int slot = 0; slot < 10; ++slot) {
    const auto [m, n] = kSymPairs[slot];

    // P: 1/4 tr_m tr_n - 1/2 tr(M[m] M[n])
    double mm = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) mm += M[m][a][b] * M[n][b][a];
    out.P[slot] = 0.25 * tr[m] * tr[n] - 0.5 * mm;

    // group 1: d_a g_{bm} g^{aa'} g^{bb'} d_{a'} g_{b'n} = D[a][b][m] K[b][a][n]
    // group 2: -g^{aa'} g^{bb'} (d_a g_{bm} d_{b'} g_{a'n} - d_{b'} g_{bm} d_a g_{a'n})
    double q1 = 0.0;
    double q2a = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        q1 += D[a][b][m] * K[b][a][n];
        q2a += D[a][b][m] * K[a][b][n];
      }
    // sum_{b,b'} g^{bb'} d_{b'} g_{bm} = div[m]; sum_{a,a'} g^{aa'} d_a g_{a'n} = div[n]
    const double q2b = div[m] * div[n];
    const double q2 = -(q2a - q2b);

    // group 3: g^{aa'} g^{bb'} (d_m g_{a'b'} d_a g_{bn} - d_a g_{a'b'} d_m g_{bn}) + (m <-> n)
    auto group3 = [&](int mu, int nu) {
      double first = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) first += R[mu][a][b] * D[a][b][nu];
      double second = 0.0;
      for (int b = 0; b < 4; ++b) second += divU[b] * D[mu][b][nu];
      return first - second;
    };
    const double q3 = group3(m, n) + group3(n, m);

    // group 4: 1/2 g^{aa'} g^{bb'} (d_{b'} g_{aa'} d_m g_{bn} - d_m g_{aa'} d_{b'} g_{bn}) + (m <-> n)
    auto group4 = [&](int mu, int nu) {
      double first = 0.0;
      for (int b = 0; b < 4; ++b) first += trU[b] * D[mu][b][nu];
      return 0.5 * (first - tr[mu] * div[nu]);
    };
    const double q4 = group4(m, n) + group4(n, m);

    out.Q[slot] = q1 + q2 + q3 + q4;
  }
  return out;
}

/// Outcome of checking the reduced-equation identity at a point.
struct IdentityResidual {
  SymTensor2 residual;      ///< g^{ab} d_a d_b g_{mn} - Ptilde - Qtilde + 2 R_{mn}
  SymTensor2 box_g;         ///< g^{ab} d_a d_b g_{mn}
  double gauge_norm = 0.0;  ///< max |Gamma^l|
  bool gauge_warning = false;
};

/// g^{ab} d_a d_b g_{mn}.
inline SymTensor2 reduced_box(const SymTensor2& ginv, const MetricJet& j) {
  SymTensor2 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double w = ginv(a, b);
      if (w == 0.0) continue;
      out += w * j.second(a, b);
    }
  return out;
}

/// The identity holds exactly for metrics in wave coordinates; a gauge
/// residual above gauge_tol is flagged rather than rejected.
inline IdentityResidual reduced_identity_residual(const MetricJet& j, double gauge_tol = 1e-8) {
  IdentityResidual out;
  const SymTensor2 ginv = invert(j.g).inv;
  const auto gr = gauge_residual(j.g, ginv, j.dg);
  for (double x : gr.upper) out.gauge_norm = std::fmax(out.gauge_norm, std::fabs(x));
  out.gauge_warning = out.gauge_norm > gauge_tol;
  out.box_g = reduced_box(ginv, j);
  const auto qf = quadratic_forms(ginv, j.dg);
  out.residual = out.box_g - qf.P - qf.Q + 2.0 * ricci(j);
  return out;
}

}  // namespace wavegauge::gauge
