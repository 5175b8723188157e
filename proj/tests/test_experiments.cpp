#include <cmath>

#include <gtest/gtest.h>

#include "jch/experiments.hpp"

using namespace jch;

namespace {

// Photon straight into the sink with no Hamiltonian: each step keeps a factor
// (1 − rate² δt) of the photon.
ChainConfig bare_decay(double rate) {
  ChainConfig c;
  c.n_atoms = 1;
  c.omega_a = c.omega_p = 0.0;
  c.rate_out = rate;
  c.sink_coupling = SinkCoupling::PhotonOfLastCavity;
  return c;
}

ChainConfig small_chain() {
  ChainConfig c;
  c.k = 1.0;
  c.mu = 0.6;
  c.rate_out = 1.0;
  return c;
}

}  // namespace

TEST(TimeToReach, InterpolatesBetweenSteps) {
  const double rate = 0.8, dt = 0.01, target = 0.5;
  const double keep = 1 - rate * rate * dt;
  std::size_t n = 0;
  double prev = 0.0, cur = 0.0;
  while (cur < target) {
    prev = cur;
    cur = 1 - std::pow(keep, double(++n));
  }
  const double expected = (n - 1) * dt + dt * (target - prev) / (cur - prev);
  const auto r = time_to_reach(bare_decay(rate), target, 100.0, dt);
  EXPECT_FALSE(r.capped);
  EXPECT_NEAR(r.time, expected, 1e-12);
  EXPECT_NEAR(r.time, std::log(2.0) / (rate * rate), 5e-3);
}

TEST(TimeToReach, CapsAtTmax) {
  const auto r = time_to_reach(bare_decay(0.1), 0.995, 5.0, 0.01);
  EXPECT_TRUE(r.capped);
  EXPECT_DOUBLE_EQ(r.time, 5.0);
  EXPECT_THROW(time_to_reach(bare_decay(0.1), 1.0, 5.0, 0.01), std::invalid_argument);
}

TEST(SinkAtTime, MatchesClosedForm) {
  const double rate = 0.5, dt = 0.01;
  const ChainModel m(bare_decay(rate));
  Integrator integ(m, dt);
  EXPECT_NEAR(sink_at_time(integ, 3.0), 1 - std::pow(1 - rate * rate * dt, 300.0), 1e-12);
}

TEST(Sweep, GridLayoutAndValues) {
  SweepSpec spec{small_chain(), Axis{SweepParam::RateOut, {0.5, 1.0, 2.0}}, Axis{SweepParam::Mu, {0.3, 0.6}},
                 SinkAtTime{4.0}, 0.01};
  const auto res = run_sweep(spec, SweepOptions(1));
  ASSERT_EQ(res.rows, 3u);
  ASSERT_EQ(res.cols, 2u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      ChainConfig c = small_chain();
      c.rate_out = spec.axis1.values[i];
      c.mu = spec.axis2->values[j];
      const ChainModel m(c);
      Integrator integ(m, 0.01);
      EXPECT_EQ(res.value(i, j), sink_at_time(integ, 4.0)) << i << ',' << j;
      EXPECT_FALSE(res.capped(i, j));
    }
  EXPECT_LT(res.max_trace_drift, 1e-12);
}

TEST(Sweep, InvariantUnderThreadsAndOrder) {
  SweepSpec spec{small_chain(), Axis{SweepParam::RateOut, {0.5, 1.0, 1.5, 2.0, 3.0}},
                 Axis{SweepParam::K, {0.5, 1.0, 2.0}}, TimeToReach{0.9, 50.0}, 0.02};
  const auto base = run_sweep(spec, SweepOptions(1));
  for (unsigned threads : {2u, 4u, 7u})
    for (std::uint64_t seed : {1u, 99u}) {
      const auto res = run_sweep(spec, SweepOptions(threads, seed));
      EXPECT_EQ(res.grid, base.grid);
      EXPECT_EQ(res.cap_mask, base.cap_mask);
    }
}

TEST(Sweep, ValidationErrors) {
  SweepSpec spec{small_chain(), Axis{SweepParam::RateOut, {}}, std::nullopt, TimeToReach{}, 0.01};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.axis1.values = {1.0, 1.0};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.axis1.values = {1.0, 2.0};
  spec.axis2 = Axis{SweepParam::RateOut, {1.0}};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.axis2.reset();
  spec.axis1.values = {-1.0, 2.0};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
  spec.axis1.values = {1.0, 2.0};
  spec.objective = TimeToReach{1.5, 10.0};
  EXPECT_THROW(run_sweep(spec), std::invalid_argument);
}

TEST(Sweep, ScanShapeChecks) {
  SweepSpec spec{small_chain(), Axis{SweepParam::RateOut, {1.0}}, Axis{SweepParam::G, {0.0}}, SinkAtTime{1.0},
                 0.01};
  EXPECT_THROW(bottleneck_scan(spec), std::invalid_argument);
  EXPECT_THROW(dat_scan(spec), std::invalid_argument);  // dephasing none
  spec.base.dephasing = Dephasing::LindbladLike;
  EXPECT_NO_THROW(dat_scan(spec));
  spec.objective = TimeToReach{};
  EXPECT_THROW(dat_scan(spec), std::invalid_argument);
}

TEST(Sweep, InvalidCellRejectedBeforeRunning) {
  SweepSpec spec{small_chain(), Axis{SweepParam::G, {-1.0, 0.5}}, std::nullopt, SinkAtTime{1.0}, 0.01};
  EXPECT_THROW(run_sweep(spec, SweepOptions(2)), std::invalid_argument);
}

TEST(OptimalRate, PicksFastestAndBreaksTiesLow) {
  // Pure decay gets faster with rate: the largest candidate wins.
  const auto best = optimal_rate(bare_decay(1.0), SweepParam::RateOut, {0.5, 2.0, 1.0}, 0.9, 50.0, 0.01);
  EXPECT_DOUBLE_EQ(best.rate, 2.0);
  EXPECT_FALSE(best.capped);
  const auto capped = optimal_rate(bare_decay(1.0), SweepParam::RateOut, {0.01, 0.02}, 0.9, 1.0, 0.01);
  EXPECT_TRUE(capped.capped);
  EXPECT_DOUBLE_EQ(capped.rate, 0.01);
  EXPECT_THROW(optimal_rate(bare_decay(1.0), SweepParam::K, {1.0}, 0.9, 1.0, 0.01), std::invalid_argument);
}

TEST(OptimalRate, InteriorOptimumForChain) {
  // Too strong an output coupling freezes the last exciton (Zeno-like), so the
  // optimum sits inside the grid.
  ChainConfig c = small_chain();
  c.mu = 1.0;
  const auto best = optimal_rate(c, SweepParam::RateOut, {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}, 0.9, 200.0, 0.01);
  EXPECT_GT(best.rate, 0.25);
  EXPECT_LT(best.rate, 8.0);
}

TEST(DatSummary, OnSyntheticGrid) {
  SweepResult res;
  res.spec.axis1 = Axis{SweepParam::RateOut, {0.5, 1.0, 2.0}};
  res.spec.axis2 = Axis{SweepParam::G, {0.0, 0.1, 0.2}};
  res.rows = 3;
  res.cols = 3;
  res.grid = {0.3, 0.4, 0.35,  //
              0.8, 0.7, 0.6,   //
              0.5, 0.5, 0.52};
  res.cap_mask.assign(9, 0);
  const auto s = summarize_dat(res);
  EXPECT_EQ(s.optimal_row, 1u);
  EXPECT_DOUBLE_EQ(s.optimal_out, 1.0);
  EXPECT_NEAR(s.improvement[0], 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(s.best_g[0], 0.1);
  EXPECT_DOUBLE_EQ(s.improvement[1], 0.0);
  EXPECT_NEAR(s.improvement[2], 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(s.best_g[2], 0.2);
  res.spec.axis2->values[0] = 0.05;
  EXPECT_THROW(summarize_dat(res), std::invalid_argument);
}

TEST(Grids, Defaults) {
  const auto r = default_rate_grid();
  ASSERT_EQ(r.size(), 40u);
  EXPECT_DOUBLE_EQ(r.front(), 0.1);
  EXPECT_DOUBLE_EQ(r.back(), 4.0);
  const auto g = default_g_grid();
  ASSERT_EQ(g.size(), 41u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.back(), 2.0);
}

TEST(Params, ParseAndSet) {
  for (auto p : {SweepParam::RateIn, SweepParam::RateOut, SweepParam::K, SweepParam::Mu, SweepParam::G})
    EXPECT_EQ(parse_sweep_param(to_string(p)), p);
  EXPECT_FALSE(parse_sweep_param("omega"));
  ChainConfig c;
  set_param(c, SweepParam::Mu, 0.25);
  EXPECT_EQ(c.mu, 0.25);
}
