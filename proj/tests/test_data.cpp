#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wavegauge/data.hpp"

using namespace wavegauge;
using namespace wavegauge::data;

namespace {

GridSpec small_grid(int n = 33, double extent = 3.0) {
  GridSpec g;
  g.n = n;
  g.extent = extent;
  g.t_final = 0.0;
  return g;
}

DataConfig config(double M) {
  DataConfig c;
  c.M = M;
  c.r_outer = 6.0;
  return c;
}

double max_abs_masked(const Field& f, const GridSpec& g, double rmin, int width) {
  double m = 0.0;
  for (int k = width; k < g.n - width; ++k)
    for (int j = width; j < g.n - width; ++j)
      for (int i = width; i < g.n - width; ++i)
        if (norm(g.point(i, j, k)) >= rmin) m = std::max(m, std::fabs(f[g.index(i, j, k)]));
  return m;
}

}  // namespace

TEST(DataConfig, Validation) {
  DataConfig c = config(0.01);
  EXPECT_NO_THROW(c.validate());
  c.M = 0.2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(0.01);
  c.r_outer = 0.4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(-1.0);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SchwarzschildWave, HandSubstitution) {
  const SymTensor2 g = schwarzschild_wave(1.0, {4, 0, 0});
  EXPECT_NEAR(g(0, 0), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g(1, 1), 3.0, 1e-15);
  EXPECT_NEAR(g(2, 2), 2.25, 1e-15);
  EXPECT_NEAR(g(3, 3), 2.25, 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
  EXPECT_NEAR(g(1, 2), 0.0, 1e-15);
}

TEST(SchwarzschildWave, MassZeroIsMinkowski) {
  const SymTensor2 g = schwarzschild_wave(0.0, {0.3, 2, -1});
  EXPECT_EQ((g - minkowski()).max_abs(), 0.0);
}

TEST(SchwarzschildWave, HorizonRejected) {
  EXPECT_THROW(schwarzschild_wave(1.0, {2, 0, 0}), DomainError);
  EXPECT_THROW(schwarzschild_wave(1.0, {0.5, 0.5, 0}), DomainError);
}

TEST(SchwarzschildWave, FarFieldIsLinearizedMass) {
  const double M = 1e-3;
  const Vec3 x = {10.0 / std::sqrt(3.0), 10.0 / std::sqrt(3.0), 10.0 / std::sqrt(3.0)};  // r = 1e4 M
  const SymTensor2 h = schwarzschild_wave(M, x) - minkowski();
  const double c = 4.0 * M / norm(x);
  EXPECT_NEAR(h(0, 0), c, 0.01 * c);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(h(i, i), c, 0.01 * c);
  EXPECT_LE(std::fabs(h(1, 2)), 0.01 * c);
}

TEST(IsoToWave, Examples) {
  EXPECT_DOUBLE_EQ(iso_to_wave_radius(2.0, 1.0), 2.5);
  EXPECT_DOUBLE_EQ(iso_to_wave_radius_pure(2.0, 1.0), 2.5);
  EXPECT_EQ(iso_to_wave_radius(0.25, 0.3), 0.25);
  EXPECT_EQ(iso_to_wave_radius(0.5, 0.1), 0.5);
  EXPECT_THROW(iso_to_wave_radius(0.0, 0.1), DomainError);
  EXPECT_THROW(iso_to_wave_radius(-1.0, 0.1), DomainError);
}

TEST(IsoToWave, StrictlyIncreasing) {
  for (double M : {0.0, 0.01, 0.05, 0.1}) {
    double prev = 0.0;
    for (int s = 1; s <= 1000; ++s) {
      const double rho = 10.0 * s / 1000.0;
      const double r = iso_to_wave_radius(rho, M);
      if (M > 0.0)
        EXPECT_GT(r, prev);
      else
        EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

TEST(IsoToWave, PullbackOfWaveFormIsIsotropicForm) {
  const double M = 0.1;
  for (int s = 0; s < 100; ++s) {
    const double rho = 1.01 + 0.2 * s;
    const Vec3 x{rho * 0.6, rho * 0.0, rho * 0.8};
    const double r = iso_to_wave_radius_pure(rho, M);
    const double dr = 1.0 - M * M / (rho * rho);
    const Vec3 y{x[0] * r / rho, x[1] * r / rho, x[2] * r / rho};
    const SymTensor2 gw = schwarzschild_wave(M, y);
    const SymTensor2 gi = schwarzschild_isotropic(M, x);
    Eigen::Matrix3d J, Gw;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        J(a, b) = (r / rho) * (a == b) + (dr - r / rho) * x[a] * x[b] / (rho * rho);
        Gw(a, b) = gw(a + 1, b + 1);
      }
    const Eigen::Matrix3d pulled = J.transpose() * Gw * J;
    EXPECT_NEAR(gw(0, 0), gi(0, 0), 1e-10);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) EXPECT_NEAR(pulled(a, b), gi(a + 1, b + 1), 1e-10);
  }
}

TEST(NullCone, Values) {
  EXPECT_DOUBLE_EQ(schwarzschild_null_cone(1.0, 0.0, 3.5), 2.5);
  EXPECT_NEAR(schwarzschild_null_cone(1.0, 0.1, 2.0), 1.0 + 0.4 * std::log(1.8 / 0.8), 1e-15);
  EXPECT_NEAR(schwarzschild_null_cone(1.0, 0.1, 2.0), 1.3244, 1e-4);
  EXPECT_THROW(schwarzschild_null_cone(1.0, 0.1, 0.5), DomainError);
  EXPECT_THROW(schwarzschild_null_cone(0.2, 0.1, 0.5), DomainError);
}

TEST(NullCone, InsideMinkowskiCone) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> um(0.0, 0.2), ur(0.0, 50.0);
  for (int s = 0; s < 1000; ++s) {
    const double M = um(rng);
    const double R = 2.0 * M + 0.1 + ur(rng) * 0.1;
    const double r = R + ur(rng);
    EXPECT_GE(schwarzschild_null_cone(R, M, r), r - R);
  }
}

TEST(Bump, JetMatchesFiniteDifferences) {
  Bump b;
  b.amplitude = 0.01;
  b.center = {0.1, -0.2, 0.05};
  b.width = 0.6;
  const Vec3 x{0.3, 0.1, -0.2};
  const SpatialJet j = bump_jet(b, x);
  const double h = 1e-4;
  for (int k = 0; k < 3; ++k) {
    Vec3 p = x, m = x;
    p[k] += h;
    m[k] -= h;
    EXPECT_NEAR(j.grad[k], (bump_jet(b, p).value - bump_jet(b, m).value) / (2 * h), 1e-8);
    for (int l = 0; l < 3; ++l)
      EXPECT_NEAR(j.hess[k][l], (bump_jet(b, p).grad[l] - bump_jet(b, m).grad[l]) / (2 * h), 1e-7);
  }
  EXPECT_EQ(bump_jet(b, {2, 0, 0}).value, 0.0);
}

TEST(Perturbation, Validation) {
  Bump b;
  b.amplitude = 1e-3;
  b.width = 0.5;
  EXPECT_NO_THROW(validate_perturbation({b}));
  b.center = {0.7, 0, 0};
  EXPECT_THROW(validate_perturbation({b}), DomainError);
  b.center = {};
  b.amplitude = 0.2;
  EXPECT_THROW(validate_perturbation({b}), DomainError);
  b.amplitude = 1e-3;
  b.a = 0;
  EXPECT_THROW(validate_perturbation({b}), DomainError);
  GridSpec g = small_grid();
  Bump far;
  far.center = {0.9, 0, 0};
  far.amplitude = 1e-3;
  EXPECT_THROW(build_cauchy_data(config(0.01), g, {far}), DomainError);
}

TEST(CauchyData, FlatDataIsExactlyMinkowski) {
  const GridSpec g = small_grid();
  const MetricState s = build_cauchy_data(config(0.0), g);
  EXPECT_EQ(s.max_abs_h(), 0.0);
  for (const auto& f : s.dth)
    for (double v : f) EXPECT_EQ(v, 0.0);
  const auto cr = constraint_residuals(s);
  for (double v : cr.hamiltonian) EXPECT_EQ(v, 0.0);
  for (const auto& m : cr.momentum)
    for (double v : m) EXPECT_EQ(v, 0.0);
}

TEST(CauchyData, SchwarzschildExteriorAndGauge) {
  const double M = 0.01;
  const GridSpec g = small_grid();
  const DataConfig cfg = config(M);
  const MetricState s = build_cauchy_data(cfg, g);
  EXPECT_LE(pointwise_gauge_residual(cfg, {}, s), 1e-10);
  double diff = 0.0;
  double dt = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 x = g.point(i, j, k);
        const std::size_t p = g.index(i, j, k);
        if (norm(x) > 1.0) {
          diff = std::max(diff, (s.h_at(p) - (schwarzschild_wave(M, x) - minkowski())).max_abs());
          dt = std::max(dt, s.dth_at(p).max_abs());
        }
        EXPECT_EQ(s.h[sym_index(0, 1)][p], 0.0);
        if (norm(x) <= 0.5) EXPECT_EQ(s.h[0][p], 0.0);
      }
  EXPECT_LE(diff, 1e-15);
  EXPECT_LE(dt, 1e-15);
}

TEST(CauchyData, BumpKeepsWaveGauge) {
  const double M = 0.01;
  const GridSpec g = small_grid();
  const DataConfig cfg = config(M);
  Bump b;
  b.a = b.b = 1;
  b.amplitude = 0.01;
  b.width = 0.7;
  b.center = {0.1, 0.0, -0.1};
  Bump k;
  k.a = 2;
  k.b = 3;
  k.amplitude = 0.005;
  k.width = 0.5;
  k.time_derivative = true;
  const Perturbation pert{b, k};
  const MetricState s = build_cauchy_data(cfg, g, pert);
  EXPECT_LE(pointwise_gauge_residual(cfg, pert, s), 1e-10);
  EXPECT_GT(s.dth_at(g.index(g.n / 2, g.n / 2, g.n / 2)).max_abs(), 0.0);
}

TEST(ConstraintResiduals, SchwarzschildConvergesAtFourthOrder) {
  const double M = 0.01;
  std::vector<double> err;
  for (int n : {17, 33, 65}) {
    GridSpec g = small_grid(n, 3.2);
    const MetricState s = build_cauchy_data(config(M), g);
    const auto cr = constraint_residuals(s);
    err.push_back(max_abs_masked(cr.hamiltonian, g, 1.6, 4));
    // static data: no extrinsic curvature
    for (const auto& m : cr.momentum) EXPECT_LE(max_abs_masked(m, g, 0.0, 4), 1e-14);
  }
  EXPECT_GT(err[0] / err[1], 12.0);
  EXPECT_GT(err[1] / err[2], 12.0);
}

TEST(ConstraintResiduals, BumpResidualIsLinearInAmplitude) {
  const GridSpec g = small_grid(33, 2.0);
  std::vector<double> res;
  for (double eps : {1e-4, 2e-4}) {
    Bump b;
    b.amplitude = eps;
    b.width = 0.8;
    const MetricState s = build_cauchy_data(config(0.0), g, {b});
    res.push_back(max_abs_masked(constraint_residuals(s).hamiltonian, g, 0.0, 4));
  }
  EXPECT_GT(res[0], 0.0);
  EXPECT_NEAR(res[1] / res[0], 2.0, 0.01);
}
