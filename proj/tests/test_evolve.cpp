#include <gtest/gtest.h>

#include <cstdio>

#include "wavegauge/data.hpp"
#include "wavegauge/evolve.hpp"

using namespace wavegauge;

namespace {

GridSpec grid(int n, double extent, double t_final) {
  GridSpec g;
  g.n = n;
  g.extent = extent;
  g.t_final = t_final;
  return g;
}

double max_change(const MetricState& a, const MetricState& b) {
  double m = 0.0;
  for (int c = 0; c < 10; ++c)
    for (std::size_t p = 0; p < a.h[c].size(); ++p) m = std::max(m, std::fabs(a.h[c][p] - b.h[c][p]));
  return m;
}

double static_error(int n, double t_final, bool octant) {
  const GridSpec g = grid(n, 4.0 + t_final, t_final);
  const MetricState s0 = data::static_schwarzschild(0.01, g, 0.2);
  evolve::Options opt;
  opt.mask_radius = 1.0;
  opt.octant_symmetry = octant;
  evolve::Evolver e(s0, opt);
  e.advance_to(t_final);
  return max_change(e.state(), s0);
}

}  // namespace

TEST(Evolve, FlatStaysFlat) {
  MetricState s;
  s.grid = grid(16, 3.0, 0.5);
  s.allocate();
  evolve::Evolver e(s);
  for (int i = 0; i < 5; ++i) e.step();
  EXPECT_EQ(e.state().max_abs_h(), 0.0);
  EXPECT_NEAR(e.state().t, 5 * s.grid.dt(), 1e-15);
}

TEST(Evolve, FunctionalStepMatchesEvolver) {
  const MetricState s0 = data::static_schwarzschild(0.01, grid(20, 3.0, 0.5), 0.2);
  evolve::Options opt;
  opt.mask_radius = 1.0;
  const MetricState s1 = evolve::step(s0, opt);
  EXPECT_NEAR(s1.t, s0.grid.dt(), 1e-15);
  EXPECT_LT(max_change(s1, s0), 1e-5);
}

TEST(Evolve, ReflectionParity) {
  EXPECT_EQ(evolve::reflection_parity(sym_index(0, 0), 1), 1.0);
  EXPECT_EQ(evolve::reflection_parity(sym_index(0, 1), 1), -1.0);
  EXPECT_EQ(evolve::reflection_parity(sym_index(1, 1), 1), 1.0);
  EXPECT_EQ(evolve::reflection_parity(sym_index(1, 2), 2), -1.0);
  EXPECT_EQ(evolve::reflection_parity(sym_index(2, 3), 1), 1.0);
}

TEST(Evolve, OctantSymmetryMatchesFullGrid) {
  for (int n : {20, 21}) {
    const MetricState s0 = data::static_schwarzschild(0.01, grid(n, 3.0, 0.5), 0.2);
    evolve::Options full;
    full.mask_radius = 1.0;
    evolve::Options oct = full;
    oct.octant_symmetry = true;
    evolve::Evolver a(s0, full), b(s0, oct);
    for (int i = 0; i < 3; ++i) {
      a.step();
      b.step();
    }
    EXPECT_LE(max_change(a.state(), b.state()), 1e-15) << "n=" << n;
  }
}

TEST(Evolve, OctantSymmetryRejectsAsymmetricData) {
  data::DataConfig cfg;
  cfg.M = 0.01;
  data::Bump bump;
  bump.amplitude = 0.01;
  bump.center = {0.2, 0.0, 0.0};
  bump.width = 0.3;
  const MetricState s = data::build_cauchy_data(cfg, grid(16, 3.0, 0.5), {bump});
  evolve::Options opt;
  opt.octant_symmetry = true;
  EXPECT_THROW(evolve::Evolver(s, opt), ConfigError);
}

TEST(Evolve, StaticSchwarzschildConvergesAtFourthOrder) {
  const double e1 = static_error(24, 1.0, true);
  const double e2 = static_error(48, 1.0, true);
  RecordProperty("ratio", std::to_string(e1 / e2));
  std::printf("static errors %.3e %.3e ratio %.2f\n", e1, e2, e1 / e2);
  EXPECT_GT(e1 / e2, 12.0) << e1 << " " << e2;
}

TEST(Evolve, LinearPacketMatchesExactSolution) {
  const double sigma = 1.0, eps = 1e-6, t_final = 1.0;
  std::vector<double> errors;
  for (int n : {33, 65}) {
    const GridSpec g = grid(n, 6.0, t_final);
    evolve::Options opt;
    opt.octant_symmetry = true;
    evolve::Evolver e(data::flat_packet(g, 1, 1, eps, sigma), opt);
    e.advance_to(t_final);
    double err = 0.0;
    const int c = sym_index(1, 1);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double r = norm(g.point(i, j, k));
          if (r > 4.0) continue;
          err = std::max(err, std::fabs(e.state().h[c][g.index(i, j, k)] -
                                        eps * data::packet_exact(r, t_final, sigma)));
        }
    errors.push_back(err / eps);
  }
  EXPECT_LT(errors[1], 1e-3);
  EXPECT_GT(errors[0] / errors[1], 12.0) << errors[0] << " " << errors[1];
}

TEST(Evolve, AmplitudeBoundRaisesWithLastValidState) {
  const GridSpec g = grid(16, 3.0, 0.5);
  MetricState s = data::flat_packet(g, 1, 1, 0.1, 0.5);
  // a large time derivative drives |h| past the bound
  const int c = sym_index(1, 1);
  for (std::size_t p = 0; p < s.dth[c].size(); ++p) s.dth[c][p] = 40.0 * s.h[c][p];
  evolve::Evolver k(s);
  try {
    for (int i = 0; i < 50; ++i) k.step();
    FAIL() << "expected an evolution error";
  } catch (const evolve::EvolutionError& err) {
    EXPECT_LT(err.last_valid().max_abs_h(), 0.25);
    EXPECT_TRUE(err.last_valid().all_finite());
  }
}

TEST(Evolve, InvalidInitialStateRejected) {
  MetricState s;
  s.grid = grid(16, 3.0, 0.5);
  s.allocate();
  s.h[0][100] = 0.3;
  EXPECT_THROW(evolve::Evolver{s}, ConfigError);
  s.h[0][100] = std::nan("");
  EXPECT_THROW(evolve::Evolver{s}, ConfigError);
}

TEST(Evolve, ThreadCountDoesNotChangeResults) {
  const MetricState s0 = data::flat_packet(grid(20, 4.0, 0.5), 1, 1, 1e-3, 0.8);
  set_thread_count(1);
  evolve::Evolver a(s0);
  for (int i = 0; i < 3; ++i) a.step();
  set_thread_count(3);
  evolve::Evolver b(s0);
  for (int i = 0; i < 3; ++i) b.step();
  set_thread_count(0);
  EXPECT_EQ(max_change(a.state(), b.state()), 0.0);
  for (int c = 0; c < 10; ++c) EXPECT_EQ(a.state().dth[c], b.state().dth[c]);
}
