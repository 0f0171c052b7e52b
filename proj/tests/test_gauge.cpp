#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wavegauge/gauge.hpp"
#include "wavegauge/schwarzschild.hpp"

using namespace wavegauge;
using gauge::MetricJet;

namespace {

/// Christoffel symbols from an Eigen inverse and explicit index loops.
std::array<std::array<std::array<double, 4>, 4>, 4> christoffel_oracle(const SymTensor2& g,
                                                                       const std::array<SymTensor2, 4>& dg) {
  const Eigen::Matrix4d gi = oracle::to_eigen(g).inverse();
  std::array<std::array<std::array<double, 4>, 4>, 4> G{};
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n)
        for (int d = 0; d < 4; ++d)
          G[l][m][n] += 0.5 * gi(l, d) * (dg[m](d, n) + dg[n](d, m) - dg[d](m, n));
  return G;
}

MetricJet fd6_jet(const std::function<SymTensor2(const Vec3&)>& f, const Vec3& x, double h) {
  oracle::FiniteDifference6 fd{f, h};
  MetricJet j;
  j.g = f(x);
  for (int a = 0; a < 3; ++a) {
    j.dg[a + 1] = fd.first(x, a);
    for (int b = a; b < 3; ++b) j.second(a + 1, b + 1) = fd.second(x, a, b);
  }
  return j;
}

MetricJet random_jet(std::mt19937_64& rng, double hscale, double dscale) {
  MetricJet j;
  j.g = minkowski() + oracle::random_tensor(rng, hscale);
  for (auto& d : j.dg) d = oracle::random_tensor(rng, dscale);
  for (auto& d : j.ddg) d = oracle::random_tensor(rng, dscale);
  return j;
}

}  // namespace

TEST(Christoffel, FlatAndConstantMetricsVanish) {
  const auto G = gauge::christoffel(MetricJet::flat());
  MetricJet c = MetricJet::flat();
  c.g = 3.5 * minkowski();
  const auto Gc = gauge::christoffel(c);
  for (int l = 0; l < 4; ++l)
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) {
        EXPECT_EQ(G[l][m][n], 0.0);
        EXPECT_EQ(Gc[l][m][n], 0.0);
      }
}

TEST(Christoffel, SingularMetricThrows) {
  MetricJet j;
  j.g = SymTensor2::diag(-1, 1, 1, 0);
  EXPECT_THROW(gauge::christoffel(j), DomainError);
  EXPECT_THROW(gauge::ricci(j), DomainError);
  EXPECT_THROW(gauge::gauge_residual(j), DomainError);
}

TEST(Christoffel, SchwarzschildMatchesFiniteDifferenceOracle) {
  const double M = 1.0;
  const Vec3 x{4.0, 0.0, 0.0};
  const MetricJet j = data::schwarzschild_wave_jet(M, x);
  const auto G = gauge::christoffel(j);
  for (int k = 0; k < 4; ++k)
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) EXPECT_EQ(G[k][m][n], G[k][n][m]);
  oracle::SchwarzschildWaveOracle so{M};
  auto metric = [&](const Vec3& y) { return so.metric(y); };
  double prev = 0.0;
  for (double h : {0.02, 0.01}) {
    std::array<SymTensor2, 4> dg;
    oracle::FiniteDifference6 fd{metric, h};
    for (int a = 0; a < 3; ++a) dg[a + 1] = fd.first(x, a);
    const auto Go = christoffel_oracle(so.metric(x), dg);
    double err = 0.0;
    for (int l = 0; l < 4; ++l)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) err = std::max(err, std::fabs(G[l][m][n] - Go[l][m][n]));
    EXPECT_LT(err, 1e-7);
    if (prev > 0.0) EXPECT_GT(prev / err, 16.0);
    prev = err;
  }
}

TEST(SchwarzschildJet, MatchesHandDerivatives) {
  std::mt19937_64 rng(5);
  for (double M : {0.001, 0.1, 1.0}) {
    oracle::SchwarzschildWaveOracle so{M};
    for (int s = 0; s < 50; ++s) {
      const Vec3 x = oracle::random_point(rng, 3.0 * M + 0.5, 20.0);
      const MetricJet j = data::schwarzschild_wave_jet(M, x);
      const SymTensor2 g0 = so.metric(x);
      for (int c = 0; c < 10; ++c) EXPECT_TRUE(oracle::close(j.g[c], g0[c], 1e-13));
      for (int k = 0; k < 3; ++k) {
        const SymTensor2 d = so.first(x, k);
        for (int c = 0; c < 10; ++c) EXPECT_TRUE(oracle::close(j.dg[k + 1][c], d[c], 1e-12));
      }
      const MetricJet f = fd6_jet([&](const Vec3& y) { return so.metric(y); }, x, 1e-2);
      for (int c = 0; c < 10; ++c)
        for (int q = 0; q < 10; ++q) EXPECT_NEAR(j.ddg[q][c], f.ddg[q][c], 1e-7);
      const SymTensor2 direct = data::schwarzschild_wave(M, x);
      for (int c = 0; c < 10; ++c) EXPECT_TRUE(oracle::close(direct[c], g0[c], 1e-13));
    }
  }
}

TEST(Ricci, FlatVanishes) {
  const SymTensor2 R = gauge::ricci(MetricJet::flat());
  EXPECT_EQ(R.max_abs(), 0.0);
}

TEST(Ricci, SchwarzschildVanishes) {
  std::mt19937_64 rng(31);
  for (double M : {0.001, 0.01, 0.1, 1.0}) {
    for (int s = 0; s < 50; ++s) {
      const Vec3 x = oracle::random_point(rng, 3.0, 20.0);
      EXPECT_LE(gauge::ricci(data::schwarzschild_wave_jet(M, x)).max_abs(), 1e-9);
      EXPECT_LE(gauge::ricci(data::schwarzschild_isotropic_jet(M, x)).max_abs(), 1e-9);
    }
  }
}

TEST(Ricci, FiniteDifferenceJetsConvergeAtFourthOrder) {
  const double M = 0.1;
  const Vec3 x{2.0, -1.0, 1.5};
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05}) {
    const MetricJet j =
        data::finite_difference_jet([&](const Vec3& y) { return data::schwarzschild_wave(M, y); }, x, h);
    err.push_back(gauge::ricci(j).max_abs());
  }
  EXPECT_GT(err[0] / err[1], 12.0);
  EXPECT_GT(err[1] / err[2], 12.0);
}

TEST(Ricci, ConformallyFlatMatchesLinearizedOracle) {
  const Vec3 x{0.3, -0.4, 0.5};
  // phi = exp(-|x|^2), static
  const double r2 = dot(x, x);
  const double phi = std::exp(-r2);
  Vec3 grad;
  std::array<Vec3, 3> hess;
  for (int a = 0; a < 3; ++a) {
    grad[a] = -2.0 * x[a] * phi;
    for (int b = 0; b < 3; ++b) hess[a][b] = (4.0 * x[a] * x[b] - 2.0 * (a == b)) * phi;
  }
  std::vector<double> diffs;
  for (double eps : {1e-3, 5e-4}) {
    MetricJet j;
    j.g = (1.0 + eps * phi) * minkowski();
    std::array<std::array<SymTensor2, 4>, 4> dd{};
    for (int a = 0; a < 3; ++a) {
      j.dg[a + 1] = (eps * grad[a]) * minkowski();
      for (int b = 0; b < 3; ++b) {
        dd[a + 1][b + 1] = (eps * hess[a][b]) * minkowski();
        if (b >= a) j.second(a + 1, b + 1) = dd[a + 1][b + 1];
      }
    }
    const SymTensor2 lin = oracle::linearized_ricci(dd);
    const SymTensor2 R = gauge::ricci(j);
    EXPECT_GT(lin.max_abs(), 1e-4);
    diffs.push_back((R - lin).max_abs());
  }
  // quadratic remainder: halving eps quarters the difference
  EXPECT_NEAR(diffs[0] / diffs[1], 4.0, 0.2);
}

TEST(GaugeResidual, FlatAndSchwarzschildWave) {
  const auto f = gauge::gauge_residual(MetricJet::flat());
  for (double v : f.upper) EXPECT_EQ(v, 0.0);
  std::mt19937_64 rng(8);
  for (double M : {0.001, 0.01, 0.1, 1.0})
    for (int s = 0; s < 50; ++s) {
      const auto gr = gauge::gauge_residual(data::schwarzschild_wave_jet(M, oracle::random_point(rng, 3.0, 20.0)));
      for (double v : gr.upper) EXPECT_LE(std::fabs(v), 1e-9);
    }
}

TEST(GaugeResidual, IsotropicSchwarzschildIsNotInWaveGauge) {
  const double M = 1.0;
  const Vec3 x{4.0, 0.0, 0.0};
  const auto gr = gauge::gauge_residual(data::schwarzschild_isotropic_jet(M, x));
  // oracle: finite-difference jet of the closed-form isotropic metric
  const MetricJet fj = fd6_jet([&](const Vec3& y) { return data::schwarzschild_isotropic(M, y); }, x, 1e-2);
  const auto go = christoffel_oracle(fj.g, fj.dg);
  const Eigen::Matrix4d gi = oracle::to_eigen(fj.g).inverse();
  for (int l = 0; l < 4; ++l) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) v += gi(a, b) * go[l][a][b];
    EXPECT_NEAR(gr.upper[l], v, 1e-9);
  }
  // static form: Gamma^i = -(N psi^6)^{-1} d_i(N psi^2) with N psi^2 = 1 - M^2/rho^2,
  // so at rho = 4, M = 1 on the x axis Gamma^1 = -128/9375
  EXPECT_NEAR(gr.upper[1], -128.0 / 9375.0, 1e-12);
  EXPECT_GT(std::fabs(gr.upper[1]), 1e-3);
}

TEST(GaugeResidual, AlgebraicFormsAgree) {
  std::mt19937_64 rng(41);
  for (int s = 0; s < 1000; ++s) {
    const MetricJet j = random_jet(rng, 0.2, 1.0);
    const auto gr = gauge::gauge_residual(j);
    const Eigen::Matrix4d gi = oracle::to_eigen(j.g).inverse();
    for (int l = 0; l < 4; ++l) {
      double raised = 0.0;
      for (int m = 0; m < 4; ++m) raised += gi(l, m) * gr.lowered[m];
      EXPECT_TRUE(oracle::close(gr.upper[l], raised, 1e-12));
      EXPECT_TRUE(oracle::close(gr.inverse_form[l], -gr.upper[l], 1e-12));
    }
  }
}

TEST(ReducedIdentity, MinkowskiVanishes) {
  const auto r = gauge::reduced_identity_residual(MetricJet::flat());
  EXPECT_EQ(r.residual.max_abs(), 0.0);
  EXPECT_FALSE(r.gauge_warning);
}

TEST(ReducedIdentity, SchwarzschildClosedFormJets) {
  std::mt19937_64 rng(2024);
  for (double M : {0.001, 0.01, 0.1}) {
    for (int s = 0; s < 100; ++s) {
      const Vec3 x = oracle::random_point(rng, 3.0, 20.0);
      const auto r = gauge::reduced_identity_residual(data::schwarzschild_wave_jet(M, x));
      EXPECT_LE(r.residual.max_abs(), 1e-9);
      EXPECT_FALSE(r.gauge_warning);
      EXPECT_GT(r.box_g.max_abs(), 0.0);
    }
  }
  const auto ex = gauge::reduced_identity_residual(data::schwarzschild_wave_jet(0.01, {4.0, 0.0, 0.0}));
  EXPECT_LE(ex.residual.max_abs(), 1e-9);
}

TEST(ReducedIdentity, SchwarzschildFiniteDifferenceJets) {
  std::mt19937_64 rng(77);
  for (double M : {0.001, 0.01, 0.1}) {
    for (int s = 0; s < 20; ++s) {
      const Vec3 x = oracle::random_point(rng, 3.0, 20.0);
      const MetricJet j =
          data::finite_difference_jet([&](const Vec3& y) { return data::schwarzschild_wave(M, y); }, x, 0.05);
      const auto r = gauge::reduced_identity_residual(j);
      EXPECT_LE(r.residual.max_abs(), 1e-6);
    }
  }
}

TEST(ReducedIdentity, ResidualScalesWithGaugeViolation) {
  const MetricJet base = data::schwarzschild_wave_jet(0.1, {3.0, 1.0, -2.0});
  std::mt19937_64 rng(3);
  const SymTensor2 dir = oracle::random_tensor(rng);
  std::vector<double> ratio;
  for (double d : {1e-4, 1e-5}) {
    MetricJet j = base;
    j.dg[0] += d * dir;
    const auto r = gauge::reduced_identity_residual(j, 1e-8);
    EXPECT_TRUE(r.gauge_warning);
    ratio.push_back(r.residual.max_abs() / r.gauge_norm);
  }
  EXPECT_NEAR(ratio[0] / ratio[1], 1.0, 0.05);
}
