#include "mssf/bcrw.hpp"
#include "mssf/circular.hpp"
#include "mssf/errors.hpp"
#include "mssf/hmm.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace mssf;

TEST(Scenario, ReferenceValues) {
  const auto s = BcrwScenario::two_state_reference();
  EXPECT_NO_THROW(s.validate());
  ASSERT_EQ(s.num_states(), 2);
  EXPECT_DOUBLE_EQ(s.hmm.transition(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(s.hmm.transition(1, 0), 0.2);
  EXPECT_DOUBLE_EQ(s.states[0].kappas(0), 20.0);
  EXPECT_DOUBLE_EQ(s.states[0].kappas(1), 15.0);
  EXPECT_DOUBLE_EQ(s.states[1].kappas(0), 10.0);
  EXPECT_DOUBLE_EQ(s.states[1].kappas(1), -2.0);
  EXPECT_NEAR(s.states[0].gamma.mean(), 3.5, 1e-15);
  EXPECT_NEAR(s.states[1].gamma.mean(), 0.5, 1e-15);
  ASSERT_EQ(s.targets.size(), 1u);
}

TEST(Scenario, ValidationRejectsMismatchedKappas) {
  auto s = BcrwScenario::two_state_reference();
  s.states[1].kappas.resize(3);
  EXPECT_THROW(s.validate(), Error);
}

TEST(StateChain, TransitionFrequencies) {
  Rng rng(1);
  HmmParams h;
  h.transition.resize(2, 2);
  h.transition << 0.9, 0.1, 0.2, 0.8;
  h.initial = Eigen::Vector2d(0.5, 0.5);
  const auto chain = simulate_state_chain(rng, h, 200000);
  ASSERT_EQ(chain.size(), 200001u);
  Eigen::Matrix2d counts = Eigen::Matrix2d::Zero();
  for (std::size_t t = 1; t < chain.size(); ++t) counts(chain[t - 1], chain[t]) += 1.0;
  const double p12 = counts(0, 1) / counts.row(0).sum();
  const double p21 = counts(1, 0) / counts.row(1).sum();
  EXPECT_NEAR(p12, 0.1, 0.005);
  EXPECT_NEAR(p21, 0.2, 0.008);
  // stationary share of state 1 is q2 / (q1 + q2) = 2/3
  const double share = static_cast<double>(std::count(chain.begin(), chain.end(), 0)) / chain.size();
  EXPECT_NEAR(share, stationary_distribution(h.transition)(0), 0.01);
  EXPECT_NEAR(stationary_distribution(h.transition)(0), 2.0 / 3.0, 1e-12);
}

TEST(Simulation, StrongAttractionReachesTarget) {
  BcrwScenario s;
  s.hmm = HmmParams::uniform(1);
  BcrwState st;
  st.kappas = Eigen::Vector2d(0.0, 50.0);
  st.gamma = {5.0, 0.7};
  s.states = {st};
  s.targets = {{"goal", {300.0, 300.0}}};
  Rng rng(4);
  const auto track = simulate_trajectory(rng, s);
  EXPECT_FALSE(track.truncated);
  const Point& last = track.trajectory.points.back();
  EXPECT_LE(std::hypot(last.x - 300.0, last.y - 300.0), s.stop_radius);
  const auto n = track.trajectory.points.size();
  const Point& before = track.trajectory.points[n - 2];
  EXPECT_GT(std::hypot(before.x - 300.0, before.y - 300.0), s.stop_radius);
}

TEST(Simulation, MaxStepsTruncates) {
  auto s = BcrwScenario::two_state_reference();
  s.max_steps = 1;
  Rng rng(2);
  const auto track = simulate_trajectory(rng, s);
  EXPECT_TRUE(track.truncated);
  EXPECT_EQ(track.trajectory.num_steps(), 1);
  EXPECT_EQ(track.step_states.size(), 1u);
}

TEST(Simulation, DeterministicUnderSeed) {
  const auto s = BcrwScenario::two_state_reference();
  Rng a = make_rng(17, "simulate");
  Rng b = make_rng(17, "simulate");
  const auto ta = simulate_trajectory(a, s);
  const auto tb = simulate_trajectory(b, s);
  ASSERT_EQ(ta.trajectory.points.size(), tb.trajectory.points.size());
  EXPECT_EQ(ta.trajectory.angles, tb.trajectory.angles);
  EXPECT_EQ(ta.step_states, tb.step_states);
}

TEST(Simulation, ReferenceTrajectoryStatistics) {
  const auto s = BcrwScenario::two_state_reference();
  double mean_len[2] = {0, 0};
  int count[2] = {0, 0};
  int total_steps = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng = make_rng(99, "simulate", rep);
    const auto tr = simulate_trajectory(rng, s);
    EXPECT_FALSE(tr.truncated);
    total_steps += static_cast<int>(tr.trajectory.num_steps());
    for (Eigen::Index t = 0; t < tr.trajectory.num_steps(); ++t) {
      mean_len[tr.step_states[t]] += tr.trajectory.distances(t);
      ++count[tr.step_states[t]];
    }
  }
  EXPECT_NEAR(mean_len[0] / count[0], 3.5, 0.15);
  EXPECT_NEAR(mean_len[1] / count[1], 0.5, 0.05);
  // the default geometry gives trajectories of a few hundred steps
  EXPECT_GT(total_steps / 20, 250);
  EXPECT_LT(total_steps / 20, 600);
}

TEST(StepLoglik, MatchesComponents) {
  BcrwState st;
  st.kappas = Eigen::Vector2d(20.0, 15.0);
  st.gamma = {5.0, 0.7};
  const std::vector<double> bearings{1.0};
  const Step step{0.4, 2.0};
  const double prev = 0.2;
  const std::array<double, 2> k{20.0, 15.0};
  const auto c = consensus_vector<double>(prev, bearings, k);
  const double expected =
      gamma_logpdf(2.0, st.gamma) + vonmises_logpdf(0.4, c.mean_direction, c.concentration);
  EXPECT_NEAR(bcrw_step_loglik(step, prev, bearings, st), expected, 1e-12);
}
