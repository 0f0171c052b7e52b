#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "wavegauge/data.hpp"
#include "wavegauge/geodesic.hpp"

using namespace wavegauge;
using namespace wavegauge::geo;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double radius(const Vec4& X) { return norm(Vec3{X[1], X[2], X[3]}); }

}  // namespace

TEST(Geodesic, MinkowskiStraightLine) {
  MinkowskiProvider p;
  const Vec4 Y{0.5, 1.0, -2.0, 0.25}, xi{1.3, 0.4, -0.2, 0.7};
  const auto tr = integrate(p, Y, xi, 20.0);
  ASSERT_FALSE(tr.truncated);
  for (const auto& gp : tr.points)
    for (int a = 0; a < 4; ++a) {
      EXPECT_NEAR(gp.X[a], Y[a] + gp.tau * xi[a], 1e-12);
      EXPECT_EQ(gp.V[a], xi[a]);
    }
  EXPECT_DOUBLE_EQ(tr.points.back().tau, 20.0);
}

TEST(Geodesic, RejectsBadInitialData) {
  MinkowskiProvider p;
  EXPECT_THROW(integrate(p, {0, 0, 0, 0}, {1.0, 2.0, 0, 0}, 1.0), DomainError);
  EXPECT_THROW(integrate(p, {0, 0, 0, 0}, {-1.0, 0, 0, 0}, 1.0), DomainError);
}

TEST(Geodesic, SampleTimesAreHit) {
  MinkowskiProvider p;
  GeodesicOptions opt;
  opt.record_steps = false;
  opt.sample_taus = {0.5, 1.25, 3.0};
  const auto tr = integrate(p, {0, 0, 0, 0}, {1, 0, 0, 0}, 4.0, opt);
  ASSERT_EQ(tr.points.size(), 5u);
  EXPECT_EQ(tr.points[1].tau, 0.5);
  EXPECT_EQ(tr.points[2].tau, 1.25);
  EXPECT_EQ(tr.points[3].tau, 3.0);
  EXPECT_EQ(tr.points[4].tau, 4.0);
}

TEST(CausalCheck, WorkedExamples) {
  const auto r1 = causal_check({1.0, 0.5, 0.0, 0.0}, minkowski());
  EXPECT_NEAR(r1.A, std::sqrt(0.75), 1e-15);
  EXPECT_NEAR(r1.lhs_max, std::sqrt(0.75) + 0.5, 1e-15);
  EXPECT_TRUE(r1.holds);
  const auto r2 = causal_check({1.0, 1.0, 0.0, 0.0}, minkowski());
  EXPECT_EQ(r2.A, 0.0);
  EXPECT_TRUE(r2.holds);
  const auto r3 = causal_check({1.0, 0.0, 0.0, 0.0}, data::schwarzschild_wave(0.1, {3.0, 0.0, 0.0}));
  EXPECT_TRUE(r3.holds);
  EXPECT_THROW(causal_check({1.0, 2.0, 0.0, 0.0}, minkowski()), DomainError);
  EXPECT_THROW(causal_check({1.0, 0.0, 0.0, 0.0}, SymTensor2::diag(-1.5, 1, 1, 1)), DomainError);
  EXPECT_NEAR(operator_norm(SymTensor2::diag(0.1, -0.2, 0.05, 0.0)), 0.2, 1e-15);
}

TEST(CausalCheck, RandomCausalVectors) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    SymTensor2 h;
    for (int s = 0; s < 10; ++s) h[s] = u(rng);
    h *= 0.25 * std::fabs(u(rng)) / operator_norm(h);
    const SymTensor2 g = minkowski() + h;
    // spatial part random, eta^0 from g(eta, eta) = -A^2
    Vec4 eta{0.0, u(rng), u(rng), u(rng)};
    const double A2 = trial % 10 == 0 ? 0.0 : std::fabs(u(rng));
    double b = 0.0, c = A2;
    for (int i = 1; i < 4; ++i) {
      b += 2.0 * g(0, i) * eta[i];
      for (int j = 1; j < 4; ++j) c += g(i, j) * eta[i] * eta[j];
    }
    const double a = g(0, 0);
    eta[0] = (-b - std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
    if (trial % 2) eta = {-eta[0], -eta[1], -eta[2], -eta[3]};
    const auto rep = causal_check(eta, g);
    EXPECT_TRUE(rep.holds) << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Geodesic, NullConeMatchesClosedForm) {
  const double M = 0.1, R = 1.0;
  SchwarzschildWaveProvider p(M);
  const Vec4 Y{0.0, R, 0.0, 0.0};
  GeodesicOptions opt;
  opt.stop = [](const Vec4& X, const Vec4&) { return radius(X) - 2.0; };
  const auto tr = integrate(p, Y, radial_null_direction(p, Y), 100.0, opt);
  ASSERT_TRUE(tr.stopped_by_event);
  const auto& end = tr.points.back();
  EXPECT_NEAR(radius(end.X), 2.0, 1e-12);
  EXPECT_NEAR(end.X[0], data::schwarzschild_null_cone(R, M, 2.0), 1e-6);
  EXPECT_NEAR(end.X[0], 1.3244, 5e-5);
  for (const auto& gp : tr.points) {
    const double r = radius(gp.X);
    EXPECT_GE(gp.X[0], r - R);
    EXPECT_NEAR(gp.X[0], data::schwarzschild_null_cone(R, M, r), 1e-6);
    EXPECT_GT(gp.V[0], 0.0);
  }
}

TEST(Geodesic, TimelikeNormConservation) {
  const double M = 0.1, r0 = 10.0;
  SchwarzschildWaveProvider p(M);
  const Vec4 Y{0.0, r0, 0.0, 0.0};
  Vec4 xi{1.0, 0.0, std::sqrt(2.0 * M / r0), 0.0};
  const double n = contract(p.sample(Y).g, xi, xi);
  for (double& v : xi) v /= std::sqrt(-n);
  const auto tr = integrate(p, Y, xi, 100.0);
  ASSERT_FALSE(tr.truncated);
  EXPECT_NEAR(tr.A2, 1.0, 1e-14);
  EXPECT_LE(tr.max_norm_residual, 1e-8);
  EXPECT_GT(tr.min_V0, 0.0);
  for (const auto& gp : tr.points) EXPECT_TRUE(gp.causal_ok);
}

TEST(Completeness, MinkowskiIsAffine) {
  MinkowskiProvider p;
  const auto tr = integrate(p, {0, 0, 0, 0}, {1.25, 0.75, 0, 0}, 50.0);
  const auto rep = completeness_probe(tr, p);
  ASSERT_TRUE(rep.conclusive);
  EXPECT_NEAR(rep.slope, 1.0, 1e-10);
  EXPECT_LE(rep.delta, 1e-10);
  EXPECT_TRUE(rep.escape);
  EXPECT_TRUE(rep.future);
}

TEST(Completeness, SchwarzschildTimelikeEscapes) {
  SchwarzschildWaveProvider p(0.01);
  const Vec4 Y{0.0, 5.0, 0.0, 0.0};
  Vec4 xi{1.0, 0.5, 0.0, 0.0};
  const double n = contract(p.sample(Y).g, xi, xi);
  for (double& v : xi) v /= std::sqrt(-n);
  const auto tr = integrate(p, Y, xi, 200.0);
  const auto rep = completeness_probe(tr, p);
  ASSERT_TRUE(rep.conclusive);
  EXPECT_LE(rep.delta, 0.05);
  EXPECT_TRUE(rep.delta_bound) << rep.delta << " " << rep.eps_h;
  EXPECT_TRUE(rep.escape);
  EXPECT_TRUE(rep.future);
}

TEST(Completeness, SchwarzschildNullIsFutureDirected) {
  SchwarzschildWaveProvider p(0.01);
  const Vec4 Y{0.0, 3.0, 1.0, 0.0};
  const auto tr = integrate(p, Y, radial_null_direction(p, Y), 100.0);
  const auto rep = completeness_probe(tr, p);
  ASSERT_TRUE(rep.conclusive);
  EXPECT_TRUE(rep.future);
  EXPECT_TRUE(rep.escape);
  EXPECT_LE(rep.delta, 4.0 * rep.eps_h);
}

TEST(Completeness, TruncatedIsInconclusive) {
  SchwarzschildWaveProvider p(0.1, 1.0);
  const Vec4 Y{0.0, 3.0, 0.0, 0.0};
  const auto tr = integrate(p, Y, {1.0, -0.5, 0.0, 0.0}, 100.0);
  EXPECT_TRUE(tr.truncated);
  EXPECT_FALSE(tr.reason.empty());
  EXPECT_FALSE(completeness_probe(tr, p).conclusive);
}

TEST(SlabProvider, InterpolantConvergesAtFourthOrder) {
  const double M = 0.01;
  std::vector<double> err_g, err_dg;
  for (int n : {41, 81}) {
    GridSpec g;
    g.n = n;
    g.extent = 8.0;
    g.t_final = 1.0;
    SlabProvider p({data::static_schwarzschild(M, g, 0.5)});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(2.0, 5.0);
    double eg = 0.0, ed = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Vec4 X{0.0, u(rng), -u(rng), 0.5 * u(rng)};
      const auto s = p.sample(X);
      const auto exact = data::schwarzschild_wave_jet(M, {X[1], X[2], X[3]});
      eg = std::max(eg, (s.g - exact.g).max_abs());
      for (int a = 1; a < 4; ++a) ed = std::max(ed, (s.dg[a] - exact.dg[a]).max_abs());
      EXPECT_EQ(s.dg[0].max_abs(), 0.0);
    }
    err_g.push_back(eg);
    err_dg.push_back(ed);
  }
  EXPECT_GT(err_g[0] / err_g[1], 12.0) << err_g[0] << " " << err_g[1];
  EXPECT_GT(err_dg[0] / err_dg[1], 10.0) << err_dg[0] << " " << err_dg[1];
}

TEST(SlabProvider, LeavingTheBoxTruncates) {
  GridSpec g;
  g.n = 21;
  g.extent = 4.0;
  g.t_final = 1.0;
  MetricState s;
  s.grid = g;
  s.allocate();
  SlabProvider p({s});
  const auto tr = integrate(p, {0, 0, 0, 0}, {1.0, 0.5, 0, 0}, 100.0);
  EXPECT_TRUE(tr.truncated);
  EXPECT_LE(tr.points.back().X[1], g.extent);
  EXPECT_GT(tr.points.back().X[1], 2.5);
  EXPECT_THROW(SlabProvider({}), ConfigError);
}

TEST(Geodesic, BatchIsThreadIndependent) {
  SchwarzschildWaveProvider p(0.05);
  std::vector<Launch> launches;
  for (int i = 0; i < 6; ++i) {
    const Vec4 Y{0.0, 4.0 + i, 1.0, 0.0};
    launches.push_back({Y, radial_null_direction(p, Y), 20.0});
  }
  set_thread_count(1);
  const auto a = integrate_batch(p, launches);
  set_thread_count(3);
  const auto b = integrate_batch(p, launches);
  set_thread_count(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::ostringstream sa, sb;
    write_trajectory_csv(sa, a[i], fmt);
    write_trajectory_csv(sb, b[i], fmt);
    EXPECT_EQ(sa.str(), sb.str());
  }
}
