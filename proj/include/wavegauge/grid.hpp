#pragma once

/// \file grid.hpp
/// \brief Uniform cubic grid, grid fields of the metric perturbation, and
/// fourth-order centered difference stencils.

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavegauge/tensor.hpp"

namespace wavegauge {

/// Raised when a configuration violates a stated invariant.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Points x_i = -extent + i*dx, i = 0..n-1, along each axis.
struct GridSpec {
  int n = 64;
  double extent = 4.0;     ///< half-width of the box
  double dt_factor = 0.25; ///< dt / dx
  double t_final = 1.0;

  double spacing() const { return 2.0 * extent / (n - 1); }
  double dt() const { return dt_factor * spacing(); }
  double coord(int i) const { return -extent + i * spacing(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * n + j) * n + i;
  }
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }

  /// Number of frozen cells on each face.
  static constexpr int kShell = 3;

  /// Checks the grid invariants. support is the radius outside of which the
  /// initial data is exactly the static exterior solution.
  void validate(double support = 1.0) const {
    if (n < 2 * kShell + 3) throw ConfigError("grid.n must be at least 9");
    if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid.extent must be positive");
    if (!(dt_factor > 0.0 && dt_factor <= 0.25))
      throw ConfigError("grid.dt_factor must lie in (0, 0.25]");
    if (!(t_final >= 0.0)) throw ConfigError("grid.t_final must be nonnegative");
    const double margin = kShell * spacing();
    if (!(extent > t_final + support + margin)) {
      std::ostringstream os;
      os << "grid.extent = " << extent << " must exceed t_final + support + stencil margin = "
         << t_final + support + margin;
      throw ConfigError(os.str());
    }
  }
};

using Field = std::vector<double>;

/// Grid fields (h, d_t h) on a time slice. The 10 components are stored in
/// SymTensor2 slot order.
struct MetricState {
  double t = 0.0;
  GridSpec grid;
  double mass = 0.0;
  std::array<Field, 10> h;
  std::array<Field, 10> dth;

  void allocate() {
    for (auto& f : h) f.assign(grid.size(), 0.0);
    for (auto& f : dth) f.assign(grid.size(), 0.0);
  }

  SymTensor2 h_at(std::size_t p) const {
    SymTensor2 s;
    for (int c = 0; c < 10; ++c) s[c] = h[c][p];
    return s;
  }
  SymTensor2 dth_at(std::size_t p) const {
    SymTensor2 s;
    for (int c = 0; c < 10; ++c) s[c] = dth[c][p];
    return s;
  }

  double max_abs_h() const {
    double m = 0.0;
    for (const auto& f : h)
      for (double x : f) m = std::fmax(m, std::fabs(x));
    return m;
  }

  bool all_finite() const {
    for (const auto* arr : {&h, &dth})
      for (const auto& f : *arr)
        for (double x : f)
          if (!std::isfinite(x)) return false;
    return true;
  }
};

/// Fourth-order centered differences with a fixed spacing.
struct Stencil {
  double inv12 = 0.0;     ///< 1/(12 dx)
  double inv12sq = 0.0;   ///< 1/(12 dx^2)
  double inv144sq = 0.0;  ///< 1/(144 dx^2)
  std::array<std::ptrdiff_t, 3> stride{};

  Stencil() = default;
  explicit Stencil(const GridSpec& g) {
    const double dx = g.spacing();
    inv12 = 1.0 / (12.0 * dx);
    inv12sq = 1.0 / (12.0 * dx * dx);
    inv144sq = 1.0 / (144.0 * dx * dx);
    stride = {1, g.n, static_cast<std::ptrdiff_t>(g.n) * g.n};
  }

  double d1(const double* f, std::size_t p, int axis) const {
    const std::ptrdiff_t s = stride[axis];
    const double* c = f + p;
    return (c[-2 * s] - 8.0 * c[-s] + 8.0 * c[s] - c[2 * s]) * inv12;
  }

  double d2(const double* f, std::size_t p, int axis) const {
    const std::ptrdiff_t s = stride[axis];
    const double* c = f + p;
    return (-c[-2 * s] + 16.0 * c[-s] - 30.0 * c[0] + 16.0 * c[s] - c[2 * s]) * inv12sq;
  }

  double mixed(const double* f, std::size_t p, int a, int b) const {
    const std::ptrdiff_t sa = stride[a];
    const std::ptrdiff_t sb = stride[b];
    static constexpr double w[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    const double* c = f + p;
    double acc = 0.0;
    for (int u = 0; u < 5; ++u) {
      if (u == 2) continue;
      double row = 0.0;
      for (int v = 0; v < 5; ++v) {
        if (v == 2) continue;
        row += w[v] * c[(u - 2) * sa + (v - 2) * sb];
      }
      acc += w[u] * row;
    }
    return acc * inv144sq;
  }

  /// Second derivative d_a d_b along spatial axes a, b.
  double second(const double* f, std::size_t p, int a, int b) const {
    return a == b ? d2(f, p, a) : mixed(f, p, a, b);
  }
};

/// True when the cell is at least `width` cells away from every face.
inline bool interior(const GridSpec& g, int i, int j, int k, int width) {
  return i >= width && j >= width && k >= width && i < g.n - width && j < g.n - width &&
         k < g.n - width;
}

}  // namespace wavegauge
