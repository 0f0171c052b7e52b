#pragma once

/// \file tensor.hpp
/// \brief Small fixed-size vectors and symmetric 4x4 tensors used at a single
/// spacetime point. Index 0 is time throughout.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace wavegauge {

/// Raised when an input lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Storage slot of the (a,b) entry of a symmetric 4x4 array in the order
/// 00,01,02,03,11,12,13,22,23,33.
constexpr int sym_index(int a, int b) {
  if (a > b) {
    const int t = a;
    a = b;
    b = t;
  }
  // rows start at 0,4,7,9
  constexpr int row_start[4] = {0, 4, 7, 9};
  return row_start[a] + (b - a);
}

/// Row/column pair of each storage slot.
inline constexpr std::array<std::array<int, 2>, 10> kSymPairs = {{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

/// A symmetric 4x4 real tensor at a point; symmetry holds by construction
/// because only the 10 independent entries are stored.
class SymTensor2 {
 public:
  SymTensor2() { v_.fill(0.0); }

  static SymTensor2 from_components(const std::array<double, 10>& c) {
    SymTensor2 t;
    t.v_ = c;
    return t;
  }

  /// Symmetrizes an arbitrary 4x4 array.
  static SymTensor2 from_matrix(const Mat4& m) {
    SymTensor2 t;
    for (int s = 0; s < 10; ++s) {
      const auto [a, b] = kSymPairs[s];
      t.v_[s] = 0.5 * (m[a][b] + m[b][a]);
    }
    return t;
  }

  static SymTensor2 diag(double d0, double d1, double d2, double d3) {
    SymTensor2 t;
    t(0, 0) = d0;
    t(1, 1) = d1;
    t(2, 2) = d2;
    t(3, 3) = d3;
    return t;
  }

  double& operator()(int a, int b) { return v_[sym_index(a, b)]; }
  double operator()(int a, int b) const { return v_[sym_index(a, b)]; }

  double& operator[](std::size_t slot) { return v_[slot]; }
  double operator[](std::size_t slot) const { return v_[slot]; }

  const std::array<double, 10>& components() const { return v_; }

  Mat4 matrix() const {
    Mat4 m{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m[a][b] = (*this)(a, b);
    return m;
  }

  SymTensor2& operator+=(const SymTensor2& o) {
    for (int s = 0; s < 10; ++s) v_[s] += o.v_[s];
    return *this;
  }
  SymTensor2& operator-=(const SymTensor2& o) {
    for (int s = 0; s < 10; ++s) v_[s] -= o.v_[s];
    return *this;
  }
  SymTensor2& operator*=(double c) {
    for (auto& x : v_) x *= c;
    return *this;
  }

  friend SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
  friend SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
  friend SymTensor2 operator*(double c, SymTensor2 a) { return a *= c; }
  friend SymTensor2 operator*(SymTensor2 a, double c) { return a *= c; }

  /// Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::fmax(m, std::fabs(x));
    return m;
  }

  /// Frobenius norm over all 16 entries of the full array.
  double frobenius() const {
    double s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += (*this)(a, b) * (*this)(a, b);
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  std::array<double, 10> v_;
};

/// Minkowski metric m = diag(-1,1,1,1); it is its own inverse.
inline SymTensor2 minkowski() { return SymTensor2::diag(-1.0, 1.0, 1.0, 1.0); }

/// Diagonal entry of m (and of m^{-1}).
constexpr double eta(int a) { return a == 0 ? -1.0 : 1.0; }

/// k_{ab} U^a V^b.
inline double contract(const SymTensor2& k, const Vec4& u, const Vec4& v) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += k(a, b) * v[b];
    s += u[a] * row;
  }
  return s;
}

/// Lowers (or raises) a vector index with m.
inline Vec4 lower(const Vec4& v) { return {-v[0], v[1], v[2], v[3]}; }

/// m^{ab} k_{ab}.
inline double minkowski_trace(const SymTensor2& k) { return -k(0, 0) + k(1, 1) + k(2, 2) + k(3, 3); }

/// m^{aa'} m^{bb'} p_{ab} k_{a'b'}.
inline double minkowski_double_contraction(const SymTensor2& p, const SymTensor2& k) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += eta(a) * eta(b) * p(a, b) * k(a, b);
  return s;
}

/// Both-index raise with m: k^{ab} = m^{aa'} m^{bb'} k_{a'b'}.
inline SymTensor2 raise_both(const SymTensor2& k) {
  SymTensor2 r;
  for (int s = 0; s < 10; ++s) {
    const auto [a, b] = kSymPairs[s];
    r[s] = eta(a) * eta(b) * k[s];
  }
  return r;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double aik = a[i][k];
      for (int j = 0; j < 4; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

/// Result of a guarded 4x4 inversion.
struct Inverse4 {
  SymTensor2 inv;
  double det = 0.0;
  double condition = 0.0;  ///< infinity-norm condition estimate
};

/// Inverts a symmetric 4x4 array by cofactors. Throws DomainError when the
/// array is singular or its infinity-norm condition number exceeds max_condition.
inline Inverse4 invert(const SymTensor2& g, double max_condition = 1e12) {
  const Mat4 m = g.matrix();
  // 2x2 sub-determinants of the top and bottom row pairs
  const double s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
  const double s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
  const double s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
  const double s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
  const double s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
  const double s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
  const double c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
  const double c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
  const double c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
  const double c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
  const double c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
  const double c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
  const double det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
  if (!std::isfinite(det) || det == 0.0) throw DomainError("metric is singular");
  const double id = 1.0 / det;
  Mat4 r{};
  r[0][0] = (m[1][1] * c5 - m[1][2] * c4 + m[1][3] * c3) * id;
  r[0][1] = (-m[0][1] * c5 + m[0][2] * c4 - m[0][3] * c3) * id;
  r[0][2] = (m[3][1] * s5 - m[3][2] * s4 + m[3][3] * s3) * id;
  r[0][3] = (-m[2][1] * s5 + m[2][2] * s4 - m[2][3] * s3) * id;
  r[1][1] = (m[0][0] * c5 - m[0][2] * c2 + m[0][3] * c1) * id;
  r[1][2] = (-m[3][0] * s5 + m[3][2] * s2 - m[3][3] * s1) * id;
  r[1][3] = (m[2][0] * s5 - m[2][2] * s2 + m[2][3] * s1) * id;
  r[2][2] = (m[3][0] * s4 - m[3][1] * s2 + m[3][3] * s0) * id;
  r[2][3] = (-m[2][0] * s4 + m[2][1] * s2 - m[2][3] * s0) * id;
  r[3][3] = (m[2][0] * s3 - m[2][1] * s1 + m[2][2] * s0) * id;

  Inverse4 out;
  out.det = det;
  double norm_g = 0.0;
  double norm_inv = 0.0;
  for (int a = 0; a < 4; ++a) {
    double rg = 0.0;
    double ri = 0.0;
    for (int b = 0; b < 4; ++b) {
      const int lo = a < b ? a : b;
      const int hi = a < b ? b : a;
      rg += std::fabs(m[a][b]);
      ri += std::fabs(r[lo][hi]);
    }
    norm_g = std::fmax(norm_g, rg);
    norm_inv = std::fmax(norm_inv, ri);
  }
  out.condition = norm_g * norm_inv;
  if (!(out.condition <= max_condition)) throw DomainError("metric inverse is ill-conditioned");
  for (int s = 0; s < 10; ++s) {
    const auto [a, b] = kSymPairs[s];
    out.inv[s] = r[a][b];
  }
  return out;
}

}  // namespace wavegauge
