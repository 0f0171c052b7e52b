#pragma once

/// \file asymptotic.hpp
/// \brief Asymptotic (slow-time) systems of quadratic wave equations,
///   2 d_s d_q U_i = A_{i,mn}^{jk}(omega) (d_q^m U_j)(d_q^n U_k),
/// and the Einstein asymptotic system, integrated along characteristics with
/// Lagrangian markers.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavegauge/frame.hpp"
#include "wavegauge/rhs.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::asym {

/// One quadratic term a * d^alpha u_j * d^beta u_k in equation i. alpha and
/// beta list spacetime derivative indices (0 = t).
struct Term {
  int i = 0;
  int j = 0;
  int k = 0;
  std::vector<int> alpha;
  std::vector<int> beta;
  double a = 0.0;
};

struct QuadraticSpec {
  int unknowns = 1;
  std::vector<Term> terms;

  void validate() const {
    if (unknowns < 1) throw std::invalid_argument("spec needs at least one unknown");
    for (const auto& t : terms) {
      for (int idx : {t.i, t.j, t.k})
        if (idx < 0 || idx >= unknowns) throw std::invalid_argument("spec term refers to a missing unknown");
      if (!(t.alpha.size() <= t.beta.size() && t.beta.size() <= 2 && !t.beta.empty()))
        throw std::invalid_argument("spec term needs |alpha| <= |beta| <= 2 and |beta| >= 1");
      for (const auto* mi : {&t.alpha, &t.beta})
        for (int d : *mi)
          if (d < 0 || d > 3) throw std::invalid_argument("derivative index out of range");
      if (!std::isfinite(t.a)) throw std::invalid_argument("spec coefficient is not finite");
    }
  }
};

/// A_{i,mn}^{jk}(omega) for m, n in 0..2.
struct Reduced {
  int N = 0;
  std::vector<double> A;

  explicit Reduced(int n = 0) : N(n), A(static_cast<std::size_t>(n) * n * n * 9, 0.0) {}
  double& at(int i, int j, int k, int m, int n) { return A[(((static_cast<std::size_t>(i) * N + j) * N + k) * 3 + m) * 3 + n]; }
  double at(int i, int j, int k, int m, int n) const {
    return A[(((static_cast<std::size_t>(i) * N + j) * N + k) * 3 + m) * 3 + n];
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : A) m = std::max(m, std::fabs(v));
    return m;
  }
};

inline Reduced reduce_coefficients(const QuadraticSpec& spec, const Vec3& omega) {
  spec.validate();
  const std::array<double, 4> w{-1.0, omega[0], omega[1], omega[2]};
  Reduced R(spec.unknowns);
  for (const auto& t : spec.terms) {
    double c = t.a;
    for (int d : t.alpha) c *= w[d];
    for (int d : t.beta) c *= w[d];
    R.at(t.i, t.j, t.k, static_cast<int>(t.alpha.size()), static_cast<int>(t.beta.size())) += c;
  }
  return R;
}

/// Deterministic Fibonacci lattice on the unit sphere.
inline std::vector<Vec3> fibonacci_sphere(int count) {
  std::vector<Vec3> pts;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return pts;
}

inline bool is_classical_null(const QuadraticSpec& spec, int omega_samples = 200) {
  if (omega_samples < 1) throw std::invalid_argument("need at least one direction sample");
  for (const Vec3& w : fibonacci_sphere(omega_samples))
    if (reduce_coefficients(spec, w).max_abs() > 1e-12) return false;
  return true;
}

/// Helpers to build multi-indices.
inline std::vector<int> laplacian_index(int axis) { return {axis, axis}; }

/// Named model presets. Each is normalized so that its reduced system is the
/// displayed model:
///   riccati:      d_s W = W^2                  (box u = 2 u_t^2)
///   john-burgers: (2 d_s - W d_q) W = 0        (box u = -u_t Lap u)
///   triangular:   d_s W_u = W_v^2, d_s W_v = 0 (box u = 2 v_t^2, box v = 0)
///   u-laplace-u:  (2 d_s - U d_q) W = 0        (box u = u Lap u)
inline QuadraticSpec preset(const std::string& name) {
  QuadraticSpec s;
  if (name == "riccati") {
    s.terms.push_back({0, 0, 0, {0}, {0}, 2.0});
  } else if (name == "john-burgers") {
    for (int a = 1; a <= 3; ++a) s.terms.push_back({0, 0, 0, {0}, laplacian_index(a), -1.0});
  } else if (name == "triangular") {
    s.unknowns = 2;
    s.terms.push_back({0, 1, 1, {0}, {0}, 2.0});
  } else if (name == "u-laplace-u") {
    for (int a = 1; a <= 3; ++a) s.terms.push_back({0, 0, 0, {}, laplacian_index(a), 1.0});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return s;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"riccati", "john-burgers", "triangular", "u-laplace-u"};
  return names;
}

/// Raised when the integration cannot proceed; carries the last valid slow time.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double s_last) : std::runtime_error(what), s_last_(s_last) {}
  double last_valid_s() const { return s_last_; }

 private:
  double s_last_;
};

/// Marker state of the generic system. Markers are stored as the position
/// of the rightmost one plus the gaps between neighbours, so that strongly
/// compressed markers far from the origin keep their relative precision.
/// W_i = d_q U_i at each marker; U_i is recovered by integrating W_i from the
/// right end, where it keeps its initial value.
struct AsymptoticState {
  double s = 0.0;
  Vec3 omega{0.0, 0.0, 1.0};
  double q_right = 0.0;
  std::vector<double> gap;             ///< q_{l+1} - q_l
  std::vector<std::vector<double>> W;  ///< W[i][l]
  std::vector<double> U_right;         ///< U_i at the rightmost marker

  int unknowns() const { return static_cast<int>(W.size()); }
  std::size_t markers() const { return gap.size() + 1; }

  std::vector<double> q() const {
    std::vector<double> out(markers());
    out.back() = q_right;
    for (std::size_t l = gap.size(); l-- > 0;) out[l] = out[l + 1] - gap[l];
    return out;
  }

  std::vector<std::vector<double>> U() const {
    const std::size_t M = markers();
    std::vector<std::vector<double>> u(W.size(), std::vector<double>(M, 0.0));
    for (std::size_t i = 0; i < W.size(); ++i) {
      u[i][M - 1] = U_right[i];
      for (std::size_t l = M - 1; l-- > 0;) u[i][l] = u[i][l + 1] - 0.5 * (W[i][l] + W[i][l + 1]) * gap[l];
    }
    return u;
  }

  double max_abs_W() const {
    double m = 0.0;
    for (const auto& w : W)
      for (double v : w) m = std::max(m, std::fabs(v));
    return m;
  }

  void validate() const {
    if (gap.empty()) throw std::invalid_argument("need at least two markers");
    for (double g : gap)
      if (!(g > 0.0)) throw std::invalid_argument("markers must be strictly increasing");
    if (W.empty() || U_right.size() != W.size()) throw std::invalid_argument("state has no unknowns");
    for (const auto& w : W)
      if (w.size() != markers()) throw std::invalid_argument("W does not match the markers");
  }
};

/// Uniform markers on [-Q, Q]; W0 gives d_q U_i and U0 the values used at q = Q.
inline AsymptoticState make_state(int unknowns, double Q, int count, const Vec3& omega,
                                  const std::function<double(int, double)>& U0,
                                  const std::function<double(int, double)>& W0) {
  if (count < 2 || !(Q > 0.0) || unknowns < 1) throw std::invalid_argument("need Q > 0, two markers and one unknown");
  AsymptoticState st;
  st.omega = omega;
  st.q_right = Q;
  st.gap.assign(count - 1, 2.0 * Q / (count - 1));
  st.W.assign(unknowns, std::vector<double>(count, 0.0));
  st.U_right.assign(unknowns, 0.0);
  for (int i = 0; i < unknowns; ++i) {
    for (int l = 0; l < count; ++l) st.W[i][l] = W0(i, -Q + 2.0 * Q * l / (count - 1));
    st.U_right[i] = U0(i, Q);
  }
  return st;
}


enum class Growth { Bounded, Polynomial, Exponential };

inline const char* to_string(Growth g) {
  switch (g) {
    case Growth::Bounded: return "bounded";
    case Growth::Polynomial: return "polynomial";
    case Growth::Exponential: return "exponential";
  }
  return "unknown";
}

struct LinearFit {
  double slope = 0.0;
  double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 3) return {};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 0.0;
  return f;
}

/// Classifies growth of max|W|(s) over the second half of the run:
/// exponential if log max|W| is linear in s (slope > 0.01, R^2 > 0.99),
/// polynomial if linear in log(1+s), else bounded. When both fits qualify the
/// better R^2 wins.
inline Growth classify_growth(const std::vector<double>& s, const std::vector<double>& wmax) {
  std::vector<double> xs, xl, y;
  if (s.empty()) return Growth::Bounded;
  const double s_mid = 0.5 * (s.front() + s.back());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= s_mid && wmax[i] > 0.0 && std::isfinite(wmax[i])) {
      xs.push_back(s[i]);
      xl.push_back(std::log1p(s[i]));
      y.push_back(std::log(wmax[i]));
    }
  const LinearFit fe = linear_fit(xs, y);
  const LinearFit fp = linear_fit(xl, y);
  const bool expo = fe.slope > 0.01 && fe.r2 > 0.99;
  const bool poly = fp.slope > 0.01 && fp.r2 > 0.99;
  if (expo && (!poly || fe.r2 >= fp.r2)) return Growth::Exponential;
  if (poly) return Growth::Polynomial;
  return Growth::Bounded;
}

struct BlowupReport {
  bool blew_up = false;
  double s_star = 0.0;        ///< first event time when blew_up
  std::string cause;          ///< "value" or "crossing"
  Growth growth = Growth::Bounded;
  double s_end = 0.0;
};

struct Trajectory {
  std::vector<AsymptoticState> snapshots;
  std::vector<double> s;      ///< accepted step times
  std::vector<double> wmax;   ///< max |W| after each accepted step
  BlowupReport report;
};

struct GenericOptions {
  double ds_max = 0.01;
  double output_every = 0.5;   ///< slow-time spacing of stored snapshots
  double blowup_value = 1e6;
  double courant = 0.5;        ///< bound on |dc| ds / (2 dq) between neighbours
  double growth_step = 0.05;   ///< bound on relative change of W per step
};

namespace detail {

/// Reduced system split into one characteristic speed and sources:
///   (2 d_s - c d_q) W_i = S_i,  c = sum_j a0_j U_j + a1_j W_j.
struct SplitSystem {
  Reduced R;
  int N = 0;
  std::vector<double> a0, a1;

  explicit SplitSystem(const Reduced& r) : R(r), N(r.N), a0(r.N), a1(r.N) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          if (R.at(i, j, k, 0, 0) != 0.0)
            throw std::invalid_argument("terms with A_{i00} are excluded from the asymptotic system");
          if (R.at(i, j, k, 2, 2) != 0.0)
            throw std::invalid_argument("products of two second q-derivatives are not supported");
          for (int m = 0; m < 2; ++m)
            if (R.at(i, j, k, m, 2) != 0.0 && k != i)
              throw std::invalid_argument("transport of one unknown by the q-derivative of another is not supported");
        }
    for (int j = 0; j < N; ++j) {
      a0[j] = R.at(0, j, 0, 0, 2);
      a1[j] = R.at(0, j, 0, 1, 2);
    }
    for (int i = 1; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (R.at(i, j, i, 0, 2) != a0[j] || R.at(i, j, i, 1, 2) != a1[j])
          throw std::invalid_argument("unknowns with distinct characteristic speeds are not supported");
  }

  /// d/ds of (q_right, gap, W).
  void derivative(const AsymptoticState& a, double& dq_right, std::vector<double>& dgap,
                  std::vector<std::vector<double>>& dW) const {
    const std::size_t M = a.markers();
    const auto U = a.U();
    double c_right = 0.0;
    for (int j = 0; j < N; ++j) c_right += a0[j] * U[j][M - 1] + a1[j] * a.W[j][M - 1];
    dq_right = -0.5 * c_right;
    dgap.assign(M - 1, 0.0);
    for (std::size_t l = 0; l + 1 < M; ++l) {
      double dc = 0.0;
      for (int j = 0; j < N; ++j) {
        const double dU = 0.5 * (a.W[j][l] + a.W[j][l + 1]) * a.gap[l];
        dc += a0[j] * dU + a1[j] * (a.W[j][l + 1] - a.W[j][l]);
      }
      dgap[l] = -0.5 * dc;
    }
    dW.assign(N, std::vector<double>(M, 0.0));
    for (std::size_t l = 0; l < M; ++l)
      for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            s += (R.at(i, j, k, 0, 1) * U[j][l] + R.at(i, j, k, 1, 1) * a.W[j][l]) * a.W[k][l];
        dW[i][l] = 0.5 * s;
      }
  }
};

}  // namespace detail

/// Integrates the generic asymptotic system to s_max or to the first blow-up
/// event (|W| > blowup_value or two neighbouring characteristics meeting).
/// The step is the smaller of a Courant bound fixed from the initial data and
/// a bound on the relative change of W per step.
inline Trajectory evolve_generic(const QuadraticSpec& spec, AsymptoticState st, double s_max,
                                 const GenericOptions& opt = {}) {
  st.validate();
  if (st.unknowns() != spec.unknowns) throw std::invalid_argument("state and spec disagree on the unknowns");
  const detail::SplitSystem sys(reduce_coefficients(spec, st.omega));
  const std::size_t M = st.markers();
  const int N = st.unknowns();

  auto rk4 = [&](const AsymptoticState& a, double h) {
    double r1, r2, r3, r4;
    std::vector<double> g1, g2, g3, g4;
    std::vector<std::vector<double>> w1, w2, w3, w4;
    auto shifted = [&](double c, double dr, const std::vector<double>& dg, const std::vector<std::vector<double>>& dw) {
      AsymptoticState b = a;
      b.q_right += c * dr;
      for (std::size_t l = 0; l + 1 < M; ++l) b.gap[l] += c * dg[l];
      for (int i = 0; i < N; ++i)
        for (std::size_t l = 0; l < M; ++l) b.W[i][l] += c * dw[i][l];
      return b;
    };
    sys.derivative(a, r1, g1, w1);
    sys.derivative(shifted(0.5 * h, r1, g1, w1), r2, g2, w2);
    sys.derivative(shifted(0.5 * h, r2, g2, w2), r3, g3, w3);
    sys.derivative(shifted(h, r3, g3, w3), r4, g4, w4);
    AsymptoticState out = a;
    out.q_right += h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4);
    for (std::size_t l = 0; l + 1 < M; ++l) out.gap[l] += h / 6.0 * (g1[l] + 2 * g2[l] + 2 * g3[l] + g4[l]);
    for (int i = 0; i < N; ++i)
      for (std::size_t l = 0; l < M; ++l)
        out.W[i][l] += h / 6.0 * (w1[i][l] + 2 * w2[i][l] + 2 * w3[i][l] + w4[i][l]);
    out.s = a.s + h;
    return out;
  };
  auto event = [&](const AsymptoticState& a) -> std::string {
    for (const auto& w : a.W)
      for (double v : w)
        if (!std::isfinite(v) || std::fabs(v) > opt.blowup_value) return "value";
    for (double g : a.gap)
      if (!(g > 0.0)) return "crossing";
    return "";
  };

  double h_courant = opt.ds_max;
  {
    double r;
    std::vector<double> dg;
    std::vector<std::vector<double>> dw;
    sys.derivative(st, r, dg, dw);
    for (std::size_t l = 0; l + 1 < M; ++l)
      if (dg[l] != 0.0) h_courant = std::min(h_courant, opt.courant * st.gap[l] / std::fabs(dg[l]));
  }
  auto step_size = [&](const AsymptoticState& a) {
    double h = h_courant, r;
    std::vector<double> dg;
    std::vector<std::vector<double>> dw;
    sys.derivative(a, r, dg, dw);
    for (int i = 0; i < N; ++i)
      for (std::size_t l = 0; l < M; ++l) {
        const double rate = std::fabs(dw[i][l]), w = std::fabs(a.W[i][l]);
        if (rate > 0.0 && w > 0.0) h = std::min(h, opt.growth_step * w / rate);
      }
    return h;
  };

  Trajectory tr;
  tr.snapshots.push_back(st);
  tr.s.push_back(st.s);
  tr.wmax.push_back(st.max_abs_W());
  double next_out = st.s + opt.output_every;
  while (st.s < s_max - 1e-12) {
    const double h = std::min(step_size(st), s_max - st.s);
    if (!(h > 1e-14)) throw IntegrationError("slow-time step underflow", st.s);
    AsymptoticState next = rk4(st, h);
    const std::string ev = event(next);
    if (!ev.empty()) {
      double lo = 0.0, hi = h;
      for (int it = 0; it < 60 && hi - lo > 1e-12 * std::max(1.0, st.s); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (event(rk4(st, mid)).empty()) lo = mid;
        else hi = mid;
      }
      tr.report.blew_up = true;
      tr.report.cause = ev;
      tr.report.s_star = st.s + hi;
      tr.report.s_end = st.s + lo;
      break;
    }
    st = next;
    tr.s.push_back(st.s);
    tr.wmax.push_back(st.max_abs_W());
    if (st.s >= next_out - 1e-12 || st.s >= s_max - 1e-12) {
      tr.snapshots.push_back(st);
      next_out += opt.output_every;
    }
  }
  if (!tr.report.blew_up) tr.report.s_end = st.s;
  tr.report.growth = classify_growth(tr.s, tr.wmax);
  return tr;
}

// ---------------------------------------------------------------------------
// Einstein asymptotic system

/// Null frame covectors at omega: X_mu = m_{mu nu} X^nu.
struct FrameCovectors {
  frame::NullFrame f;
  Vec4 L, Lbar, S1, S2;  ///< lowered
};

inline FrameCovectors frame_covectors(const Vec3& omega) {
  FrameCovectors c;
  c.f = frame::build_null_frame(omega);
  c.L = lower(c.f.L);
  c.Lbar = lower(c.f.Lbar);
  c.S1 = lower(c.f.S1);
  c.S2 = lower(c.f.S2);
  return c;
}

/// Tensor with prescribed frame components W(X, Y) for X, Y in {Lbar, L, S1, S2}.
inline SymTensor2 from_frame(const frame::FrameComponents& comp, const Vec3& omega) {
  const auto c = frame_covectors(omega);
  // dual basis: L* = -1/2 Lbar_mu, Lbar* = -1/2 L_mu, S_A* = S_A mu
  std::array<Vec4, 4> dual;
  for (int a = 0; a < 4; ++a) {
    dual[frame::kLbar][a] = -0.5 * c.L[a];
    dual[frame::kL][a] = -0.5 * c.Lbar[a];
    dual[frame::kS1][a] = c.S1[a];
    dual[frame::kS2][a] = c.S2[a];
  }
  SymTensor2 W;
  for (int m = 0; m < 4; ++m)
    for (int n = m; n < 4; ++n) {
      double v = 0.0;
      for (int X = 0; X < 4; ++X)
        for (int Y = 0; Y < 4; ++Y) v += comp[X][Y] * dual[X][m] * dual[Y][n];
      W(m, n) = v;
    }
  return W;
}

/// P(d_q U, d_q U) in the null frame assuming d_q U_{LT} = 0.
inline double asymptotic_P_frame(const SymTensor2& W, const Vec3& omega) {
  const auto f = frame::build_null_frame(omega);
  const auto c = frame::frame_components(W, f);
  using frame::kS1;
  using frame::kS2;
  double quad = 0.0, tr = 0.0;
  for (int A = kS1; A <= kS2; ++A) {
    tr += c[A][A];
    for (int B = kS1; B <= kS2; ++B) quad += c[A][B] * c[A][B];
  }
  return -0.25 * (2.0 * quad - tr * tr) - 0.5 * tr * c[frame::kL][frame::kLbar];
}

struct EinsteinState {
  double s = 0.0;
  Vec3 omega{0.0, 0.0, 1.0};
  std::vector<double> q;
  std::vector<double> U_LL;      ///< transported unchanged
  std::vector<SymTensor2> W;     ///< d_q U_{mu nu}
};

/// Markers on [-Q, Q] with W(q) given; U_LL from integrating W_LL with U_LL = 0 beyond q = Q.
inline EinsteinState make_einstein_state(double Q, int count, const Vec3& omega,
                                         const std::function<SymTensor2(double)>& W0) {
  if (count < 2 || !(Q > 0.0)) throw std::invalid_argument("need Q > 0 and at least two markers");
  EinsteinState st;
  st.omega = omega;
  const auto f = frame::build_null_frame(omega);
  for (int l = 0; l < count; ++l) {
    st.q.push_back(-Q + 2.0 * Q * l / (count - 1));
    st.W.push_back(W0(st.q.back()));
  }
  st.U_LL.assign(count, 0.0);
  for (int l = count - 1; l-- > 0;) {
    const double a = contract(st.W[l], f.L, f.L), b = contract(st.W[l + 1], f.L, f.L);
    st.U_LL[l] = st.U_LL[l + 1] - 0.5 * (a + b) * (st.q[l + 1] - st.q[l]);
  }
  return st;
}

/// max_mu |2 d_q U_{L mu} - L_mu d_q tr U| over the markers.
inline double wave_condition_residual(const EinsteinState& st) {
  const auto f = frame::build_null_frame(st.omega);
  const Vec4 Ll = lower(f.L);
  double m = 0.0;
  for (const auto& W : st.W) {
    const double tr = minkowski_trace(W);
    for (int mu = 0; mu < 4; ++mu) {
      double WL = 0.0;
      for (int a = 0; a < 4; ++a) WL += f.L[a] * W(a, mu);
      m = std::max(m, std::fabs(2.0 * WL - Ll[mu] * tr));
    }
  }
  return m;
}

struct EinsteinSample {
  double s = 0.0;
  double constraint = 0.0;       ///< wave_condition_residual
  double max_ULL_drift = 0.0;    ///< max |U_LL(s) - U_LL(0)|
  double max_WTU_drift = 0.0;    ///< max |d_q U_TU(s) - d_q U_TU(0)|
  std::vector<double> W_LbLb;    ///< d_q U_{Lbar Lbar} at each marker
  std::vector<double> P;         ///< P(d_q U, d_q U) at each marker
};

struct EinsteinTrajectory {
  std::vector<EinsteinState> snapshots;
  std::vector<EinsteinSample> samples;
};

struct EinsteinOptions {
  double ds = 0.01;
  double output_every = 0.5;
  double courant = 0.5;  ///< max |U_LL| ds / dq
};

/// Integrates (2 d_s - U_LL d_q) d_q U = L L P(d_q U, d_q U) along
/// dq/ds = -U_LL/2 with fixed steps. Throws IntegrationError when two
/// characteristics meet.
inline EinsteinTrajectory evolve_einstein(EinsteinState st, double s_max, const EinsteinOptions& opt = {}) {
  const std::size_t M = st.q.size();
  if (M < 2 || st.W.size() != M || st.U_LL.size() != M) throw std::invalid_argument("inconsistent Einstein state");
  const auto f = frame::build_null_frame(st.omega);
  const Vec4 Ll = lower(f.L);
  SymTensor2 LL;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) LL(a, b) = Ll[a] * Ll[b];
  double dq_min = HUGE_VAL, ull_max = 0.0;
  for (std::size_t l = 0; l + 1 < M; ++l) dq_min = std::min(dq_min, st.q[l + 1] - st.q[l]);
  for (double u : st.U_LL) ull_max = std::max(ull_max, std::fabs(u));
  if (!(dq_min > 0.0)) throw std::invalid_argument("markers must be strictly increasing");
  double ds = opt.ds;
  if (ull_max > 0.0) ds = std::min(ds, opt.courant * dq_min / ull_max);
  const long steps = static_cast<long>(std::ceil(s_max / ds - 1e-9));
  ds = steps > 0 ? s_max / steps : 0.0;

  const EinsteinState initial = st;
  auto frame_tu = [&](const SymTensor2& W) {
    const auto c = frame::frame_components(W, f);
    std::array<double, 12> out{};
    int n = 0;
    for (int T : {frame::kL, frame::kS1, frame::kS2})
      for (int U = 0; U < 4; ++U) out[n++] = c[T][U];
    return out;
  };
  EinsteinTrajectory tr;
  auto sample = [&](const EinsteinState& a) {
    EinsteinSample smp;
    smp.s = a.s;
    smp.constraint = wave_condition_residual(a);
    for (std::size_t l = 0; l < M; ++l) {
      smp.max_ULL_drift = std::max(smp.max_ULL_drift, std::fabs(a.U_LL[l] - initial.U_LL[l]));
      const auto t0 = frame_tu(initial.W[l]), t1 = frame_tu(a.W[l]);
      for (int c = 0; c < 12; ++c) smp.max_WTU_drift = std::max(smp.max_WTU_drift, std::fabs(t1[c] - t0[c]));
      smp.W_LbLb.push_back(contract(a.W[l], f.Lbar, f.Lbar));
      smp.P.push_back(rhs::P_term(a.W[l], a.W[l]));
    }
    tr.samples.push_back(smp);
    tr.snapshots.push_back(a);
  };
  auto dW = [&](const SymTensor2& W) { return (0.5 * rhs::P_term(W, W)) * LL; };
  sample(st);
  double next_out = opt.output_every;
  for (long i = 1; i <= steps; ++i) {
    EinsteinState next = st;
    for (std::size_t l = 0; l < M; ++l) {
      // U_LL is constant along the characteristic, so q moves linearly
      next.q[l] = st.q[l] - 0.5 * st.U_LL[l] * ds;
      const SymTensor2 k1 = dW(st.W[l]);
      const SymTensor2 k2 = dW(st.W[l] + (0.5 * ds) * k1);
      const SymTensor2 k3 = dW(st.W[l] + (0.5 * ds) * k2);
      const SymTensor2 k4 = dW(st.W[l] + ds * k3);
      next.W[l] = st.W[l] + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    next.s = initial.s + i * ds;
    for (std::size_t l = 1; l < M; ++l)
      if (!(next.q[l] > next.q[l - 1]))
        throw IntegrationError("characteristics crossed near q = " + std::to_string(st.q[l]), st.s);
    for (const auto& W : next.W)
      if (!W.all_finite()) throw IntegrationError("non-finite asymptotic field", st.s);
    st = next;
    if (st.s >= initial.s + next_out - 1e-12 || i == steps) {
      sample(st);
      next_out += opt.output_every;
    }
  }
  return tr;
}

/// One row per accepted step: s, max |W|.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr,
                                 const std::function<std::string(double)>& fmt) {
  os << "s,max_abs_W\n";
  for (std::size_t i = 0; i < tr.s.size(); ++i) os << fmt(tr.s[i]) << "," << fmt(tr.wmax[i]) << "\n";
}

/// One row per Einstein sample with the invariants and the extremes of
/// d_q U_{Lbar Lbar} and P over the markers.
inline void write_einstein_csv(std::ostream& os, const EinsteinTrajectory& tr,
                               const std::function<std::string(double)>& fmt) {
  os << "s,constraint,max_ULL_drift,max_WTU_drift,min_W_LbLb,max_W_LbLb,min_P,max_P\n";
  for (const auto& smp : tr.samples) {
    const auto [wlo, whi] = std::minmax_element(smp.W_LbLb.begin(), smp.W_LbLb.end());
    const auto [plo, phi] = std::minmax_element(smp.P.begin(), smp.P.end());
    os << fmt(smp.s) << "," << fmt(smp.constraint) << "," << fmt(smp.max_ULL_drift) << ","
       << fmt(smp.max_WTU_drift) << "," << fmt(*wlo) << "," << fmt(*whi) << "," << fmt(*plo) << ","
       << fmt(*phi) << "\n";
  }
}

}  // namespace wavegauge::asym
