#pragma once

/// \file evolve.hpp
/// \brief Method-of-lines evolution of g^{ab} d_a d_b h_{mn} = F_{mn}(h)(dh, dh)
/// with fourth-order centered stencils and the classic four-stage explicit
/// Runge-Kutta scheme. The outer three-cell shell (and optionally a ball
/// around the origin) is held at its initial values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "wavegauge/gauge.hpp"
#include "wavegauge/grid.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/rhs.hpp"
#include "wavegauge/tensor.hpp"

namespace wavegauge::evolve {

struct Options {
  /// Evolve only x,y,z >= 0 and fill the rest by reflection; the data must be
  /// even under each coordinate reflection (with the tensor parity of h).
  bool octant_symmetry = false;
  /// Cells with |x| < mask_radius keep their initial values.
  double mask_radius = 0.0;
  /// Sixth-difference dissipation with strength sigma (off by default).
  bool dissipation = false;
  double dissipation_sigma = 0.02;
  /// Largest admissible (characteristic speed) * dt / dx.
  double max_courant = 0.5;
};

enum class FailureKind { Courant, Amplitude, NonFinite, Domain };

inline const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::Courant: return "courant";
    case FailureKind::Amplitude: return "amplitude";
    case FailureKind::NonFinite: return "non-finite";
    case FailureKind::Domain: return "domain";
  }
  return "unknown";
}

/// Raised when a step cannot be completed; carries the last accepted state.
class EvolutionError : public std::runtime_error {
 public:
  EvolutionError(FailureKind kind, const std::string& what, MetricState last)
      : std::runtime_error(what), kind_(kind), last_(std::move(last)) {}
  FailureKind kind() const { return kind_; }
  const MetricState& last_valid() const { return last_; }

 private:
  FailureKind kind_;
  MetricState last_;
};

/// Sign of component slot c under x_axis -> -x_axis (axis = 1..3).
inline double reflection_parity(int slot, int axis) {
  const auto [a, b] = kSymPairs[slot];
  return ((a == axis) + (b == axis)) % 2 == 0 ? 1.0 : -1.0;
}

/// Pointwise second time derivative from the reduced equations plus the
/// largest coordinate characteristic speed along the axes.
struct CellUpdate {
  std::array<double, 10> acc{};
  double speed = 0.0;
};

/// Evaluates the equations at grid index p. h and dth point to the 10
/// component arrays. Throws DomainError when g is degenerate or |g^00| < 1/2.
inline CellUpdate cell_update(const std::array<const double*, 10>& h, const std::array<const double*, 10>& dth,
                              std::size_t p, const Stencil& st) {
  rhs::FieldJet j;
  std::array<std::array<double, 10>, 3> ddth{};
  std::array<std::array<double, 10>, 6> dd{};
  for (int c = 0; c < 10; ++c) {
    j.h[c] = h[c][p];
    j.dh[0][c] = dth[c][p];
    for (int a = 0; a < 3; ++a) {
      j.dh[a + 1][c] = st.d1(h[c], p, a);
      ddth[a][c] = st.d1(dth[c], p, a);
    }
    dd[0][c] = st.d2(h[c], p, 0);
    dd[1][c] = st.mixed(h[c], p, 0, 1);
    dd[2][c] = st.mixed(h[c], p, 0, 2);
    dd[3][c] = st.d2(h[c], p, 1);
    dd[4][c] = st.mixed(h[c], p, 1, 2);
    dd[5][c] = st.d2(h[c], p, 2);
  }
  const SymTensor2 ginv = invert(j.metric()).inv;
  const double g00 = ginv(0, 0);
  if (!(g00 <= -0.5)) throw DomainError("g^00 left the admissible range g^00 <= -1/2");
  const auto qf = gauge::quadratic_forms(ginv, j.dh);
  CellUpdate out;
  static constexpr int kPair[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  for (int c = 0; c < 10; ++c) {
    double lhs = 0.0;
    for (int a = 0; a < 3; ++a) lhs += 2.0 * ginv(0, a + 1) * ddth[a][c];
    for (int q = 0; q < 6; ++q) {
      const double w = kPair[q][0] == kPair[q][1] ? 1.0 : 2.0;
      lhs += w * ginv(kPair[q][0] + 1, kPair[q][1] + 1) * dd[q][c];
    }
    out.acc[c] = (qf.P[c] + qf.Q[c] - lhs) / g00;
  }
  for (int a = 1; a < 4; ++a) {
    const double b = ginv(0, a);
    const double disc = b * b - g00 * ginv(a, a);
    const double v = (std::fabs(b) + std::sqrt(std::fmax(disc, 0.0))) / std::fabs(g00);
    out.speed = std::max(out.speed, v);
  }
  return out;
}

/// d_t^2 h from the reduced equations on all cells at least 2 from a face
/// (zero elsewhere).
inline std::array<Field, 10> acceleration_field(const GridSpec& g, const std::array<Field, 10>& h,
                                                const std::array<Field, 10>& dth) {
  const Stencil st(g);
  std::array<Field, 10> out;
  for (auto& f : out) f.assign(g.size(), 0.0);
  std::array<const double*, 10> hp, dp;
  for (int c = 0; c < 10; ++c) {
    hp[c] = h[c].data();
    dp[c] = dth[c].data();
  }
  parallel_for(2, g.n - 2, [&](int k) {
    for (int j = 2; j < g.n - 2; ++j)
      for (int i = 2; i < g.n - 2; ++i) {
        const std::size_t p = g.index(i, j, k);
        const CellUpdate u = cell_update(hp, dp, p, st);
        for (int c = 0; c < 10; ++c) out[c][p] = u.acc[c];
      }
  });
  return out;
}

inline std::array<Field, 10> acceleration_field(const MetricState& s) {
  return acceleration_field(s.grid, s.h, s.dth);
}

/// RK4 driver holding the work buffers.
class Evolver {
 public:
  explicit Evolver(MetricState initial, Options opt = {}) : s_(std::move(initial)), opt_(opt), st_(s_.grid) {
    const GridSpec& g = s_.grid;
    if (static_cast<int>(s_.h[0].size()) != static_cast<int>(g.size()))
      throw ConfigError("state arrays do not match the grid");
    if (!s_.all_finite()) throw ConfigError("initial state is not finite");
    if (!(s_.max_abs_h() < rhs::kMaxPerturbation)) throw ConfigError("initial state violates |h| < 1/4");
    lo_ = opt_.octant_symmetry ? g.n / 2 : 0;
    active_.assign(g.size(), 0);
    for (int k = 0; k < g.n; ++k)
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          const bool in_shell = !interior(g, i, j, k, GridSpec::kShell);
          const bool masked = norm(g.point(i, j, k)) < opt_.mask_radius;
          active_[g.index(i, j, k)] = (!in_shell && !masked) ? 1 : 0;
        }
    if (opt_.octant_symmetry) check_symmetry();
    for (auto* set : {&y0_, &ys_, &k_, &acc_})
      for (auto& f : *set) f.assign(g.size(), 0.0);
  }

  const MetricState& state() const { return s_; }
  const Options& options() const { return opt_; }
  bool active(std::size_t p) const { return active_[p] != 0; }
  double last_courant() const { return courant_; }

  /// One step of size dt (default: the grid's dt).
  void step(double dt = -1.0) {
    const GridSpec& g = s_.grid;
    if (dt <= 0.0) dt = g.dt();
    if (!(dt <= 0.25 * g.spacing() * (1.0 + 1e-12)))
      throw EvolutionError(FailureKind::Courant, "time step exceeds 0.25 dx", s_);
    auto field_of = [&](int c) -> Field& { return c < 10 ? s_.h[c] : s_.dth[c - 10]; };
    parallel_for(0, 20, [&](int c) {
      const Field& f = field_of(c);
      for_box([&](std::size_t b, std::size_t e) {
        std::copy(f.begin() + b, f.begin() + e, y0_[c].begin() + b);
        std::copy(f.begin() + b, f.begin() + e, ys_[c].begin() + b);
        std::copy(f.begin() + b, f.begin() + e, acc_[c].begin() + b);
      });
    });
    static constexpr double kWeight[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    static constexpr double kNext[4] = {0.5, 0.5, 1.0, 0.0};
    double speed = 0.0;
    try {
      for (int stage = 0; stage < 4; ++stage) {
        speed = std::max(speed, evaluate(ys_, k_));
        if (opt_.octant_symmetry) mirror(k_, box_begin());
        const double w = kWeight[stage] * dt;
        const double nx = kNext[stage] * dt;
        const bool last = stage == 3;
        parallel_for(0, 20, [&](int c) {
          double* a = acc_[c].data();
          double* y = ys_[c].data();
          const double* y0 = y0_[c].data();
          const double* kk = k_[c].data();
          for_box([&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
              a[p] += w * kk[p];
              if (!last) y[p] = y0[p] + nx * kk[p];
            }
          });
        });
      }
    } catch (const DomainError& e) {
      throw EvolutionError(FailureKind::Domain, e.what(), s_);
    }
    courant_ = speed * dt / g.spacing();
    if (courant_ > opt_.max_courant) {
      std::ostringstream os;
      os << "Courant number " << courant_ << " exceeds " << opt_.max_courant;
      throw EvolutionError(FailureKind::Courant, os.str(), s_);
    }
    const int n = g.n;
    const int b0 = box_begin();
    const double hmax = parallel_max(b0, n, [&](int k) {
      double m = 0.0;
      for (int c = 0; c < 20; ++c)
        for (int j = b0; j < n; ++j) {
          const std::size_t row = g.index(0, j, k);
          for (std::size_t q = row + b0; q < row + n; ++q) {
            const double v = acc_[c][q];
            if (!std::isfinite(v)) return HUGE_VAL;
            if (c < 10) m = std::max(m, std::fabs(v));
          }
        }
      return m;
    });
    if (!std::isfinite(hmax)) throw EvolutionError(FailureKind::NonFinite, "non-finite field values", s_);
    if (!(hmax < rhs::kMaxPerturbation)) {
      std::ostringstream os;
      os << "max |h| = " << hmax << " reached the small-data bound 1/4";
      throw EvolutionError(FailureKind::Amplitude, os.str(), s_);
    }
    for (int c = 0; c < 10; ++c) {
      s_.h[c].swap(acc_[c]);
      s_.dth[c].swap(acc_[10 + c]);
    }
    if (opt_.octant_symmetry) {
      std::array<Field*, 20> f;
      for (int c = 0; c < 10; ++c) {
        f[c] = &s_.h[c];
        f[10 + c] = &s_.dth[c];
      }
      mirror(f, 0);
    }
    s_.t += dt;
  }

  /// Steps with uniform dt <= grid dt so that t lands exactly on t_end.
  void advance_to(double t_end) {
    const double remaining = t_end - s_.t;
    if (remaining <= 1e-14) return;
    const double dtg = s_.grid.dt();
    const long steps = static_cast<long>(std::ceil(remaining / dtg - 1e-9));
    const double dt = remaining / static_cast<double>(steps);
    const double t0 = s_.t;
    for (long i = 1; i <= steps; ++i) {
      step(dt);
      s_.t = t0 + i * dt;
    }
  }

  /// d_t^2 h of the current state (see acceleration_field).
  std::array<Field, 10> acceleration() const;

 private:
  /// Fills k with the time derivative of y on active cells (zero on frozen
  /// cells). Returns the largest characteristic speed seen.
  double evaluate(const std::array<Field, 20>& y, std::array<Field, 20>& k) const {
    const GridSpec& g = s_.grid;
    const int n = g.n;
    std::array<const double*, 10> hp, dp;
    for (int c = 0; c < 10; ++c) {
      hp[c] = y[c].data();
      dp[c] = y[10 + c].data();
    }
    const int kmin = std::max(lo_, GridSpec::kShell);
    const int kmax = n - GridSpec::kShell;
    const double sigma = opt_.dissipation ? opt_.dissipation_sigma / (64.0 * g.spacing()) : 0.0;
    return parallel_max(kmin, kmax, [&](int kz) {
      double vmax = 0.0;
      for (int j = kmin; j < kmax; ++j)
        for (int i = kmin; i < kmax; ++i) {
          const std::size_t p = g.index(i, j, kz);
          if (!active_[p]) continue;
          const CellUpdate u = cell_update(hp, dp, p, st_);
          vmax = std::max(vmax, u.speed);
          for (int c = 0; c < 10; ++c) {
            k[c][p] = dp[c][p];
            k[10 + c][p] = u.acc[c];
          }
          if (sigma > 0.0)
            for (int c = 0; c < 20; ++c) {
              const double* f = y[c].data();
              double d = 0.0;
              for (int ax = 0; ax < 3; ++ax) {
                const std::ptrdiff_t s = st_.stride[ax];
                const double* q = f + p;
                d += q[-3 * s] - 6.0 * q[-2 * s] + 15.0 * q[-s] - 20.0 * q[0] + 15.0 * q[s] -
                     6.0 * q[2 * s] + q[3 * s];
              }
              k[c][p] += sigma * d;
            }
        }
      return vmax;
    });
  }

  /// First index of the region touched by a step: the evolved octant plus
  /// a three-cell reflected margin for the stencils.
  int box_begin() const { return opt_.octant_symmetry ? std::max(lo_ - 3, 0) : 0; }

  /// Calls fn(begin, end) for every contiguous x-row of the box, in parallel
  /// over z-planes.
  template <class Fn>
  void for_box(Fn&& fn) const {
    const GridSpec& g = s_.grid;
    const int b0 = box_begin();
    for (int k = b0; k < g.n; ++k)
      for (int j = b0; j < g.n; ++j) {
        const std::size_t row = g.index(0, j, k);
        fn(row + b0, row + g.n);
      }
  }

  /// Copies the octant x,y,z >= lo into cells with all indices >= from and
  /// at least one index < lo, with tensor parity.
  template <class Fields>
  void mirror(Fields& f, int from) const {
    const GridSpec& g = s_.grid;
    const int n = g.n;
    std::array<std::array<double, 8>, 20> sign{};
    for (int c = 0; c < 20; ++c)
      for (int m = 0; m < 8; ++m) {
        double s = 1.0;
        for (int ax = 0; ax < 3; ++ax)
          if (m & (1 << ax)) s *= reflection_parity(c % 10, ax + 1);
        sign[c][m] = s;
      }
    auto at = [&](int c) -> Field& {
      if constexpr (std::is_pointer_v<std::remove_reference_t<decltype(f[0])>>)
        return *f[c];
      else
        return f[c];
    };
    parallel_for(from, n, [&](int k) {
      for (int j = from; j < n; ++j)
        for (int i = from; i < n; ++i) {
          const int mask = (i < lo_ ? 1 : 0) | (j < lo_ ? 2 : 0) | (k < lo_ ? 4 : 0);
          if (mask == 0) {
            if (k >= lo_ && j >= lo_) break;
            continue;
          }
          const std::size_t src =
              g.index(i < lo_ ? n - 1 - i : i, j < lo_ ? n - 1 - j : j, k < lo_ ? n - 1 - k : k);
          const std::size_t dst = g.index(i, j, k);
          for (int c = 0; c < 20; ++c) at(c)[dst] = sign[c][mask] * at(c)[src];
        }
    });
  }

  void check_symmetry() const {
    const GridSpec& g = s_.grid;
    const int n = g.n;
    const double scale = std::max(1e-300, s_.max_abs_h());
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::size_t p = g.index(i, j, k);
          for (int ax = 0; ax < 3; ++ax) {
            const int ii = ax == 0 ? n - 1 - i : i;
            const int jj = ax == 1 ? n - 1 - j : j;
            const int kk = ax == 2 ? n - 1 - k : k;
            const std::size_t q = g.index(ii, jj, kk);
            for (int c = 0; c < 10; ++c) {
              const double s = reflection_parity(c, ax + 1);
              worst = std::max(worst, std::fabs(s_.h[c][q] - s * s_.h[c][p]));
              worst = std::max(worst, std::fabs(s_.dth[c][q] - s * s_.dth[c][p]));
            }
          }
        }
    if (worst > 1e-12 * std::max(1.0, scale))
      throw ConfigError("octant symmetry requested but the data is not reflection symmetric");
  }

  MetricState s_;
  Options opt_;
  Stencil st_;
  int lo_ = 0;
  std::vector<std::uint8_t> active_;
  std::array<Field, 20> y0_, ys_, k_, acc_;
  double courant_ = 0.0;
};

inline std::array<Field, 10> Evolver::acceleration() const { return acceleration_field(s_); }

/// Single RK4 step of a state.
inline MetricState step(const MetricState& s, const Options& opt = {}) {
  Evolver e(s, opt);
  e.step();
  return e.state();
}

}  // namespace wavegauge::evolve
