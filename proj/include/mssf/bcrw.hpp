#pragma once

#include "mssf/distance_family.hpp"
#include "mssf/random.hpp"
#include "mssf/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace mssf {

struct Target {
  std::string name;
  Point location;
};

/// Movement parameters of one behavioural state: consensus weights
/// (persistence first, then one per target) and the step-length law.
struct BcrwState {
  Eigen::VectorXd kappas;
  GammaParams gamma;
};

struct Box {
  double x_min{0.0};
  double y_min{0.0};
  double x_max{10.0};
  double y_max{10.0};
};

struct BcrwScenario {
  HmmParams hmm;
  std::vector<BcrwState> states;
  std::vector<Target> targets;
  Box start_region;
  double stop_radius{30.0};
  int max_steps{5000};

  Eigen::Index num_states() const { return static_cast<Eigen::Index>(states.size()); }
  void validate() const;

  /// Two-state scenario: persistent and attracted (state 1) versus persistent
  /// and mildly repelled (state 2), single target at the map centre.
  static BcrwScenario two_state_reference(double map_size = kDefaultMapSize);

  static constexpr double kDefaultMapSize = 1250.0;
};

struct SimulatedTrack {
  Trajectory trajectory;
  /// State that generated each step (0-based), length num_steps().
  std::vector<int> step_states;
  int initial_state{};
  double initial_heading{};
  bool truncated{false};
};

/// S_0 from `initial`, then T transitions; returns T + 1 states.
std::vector<int> simulate_state_chain(Rng& rng, const HmmParams& hmm, int num_transitions);

/// Simulates until a target is within stop_radius or max_steps is reached
/// (`truncated` is then set when targets exist).
SimulatedTrack simulate_trajectory(Rng& rng, const BcrwScenario& scenario);

/// Direct per-step log-likelihood: gamma log-density of the length plus the
/// consensus von Mises log-density of the heading.
double bcrw_step_loglik(const Step& step, double prev_angle, std::span<const double> target_bearings,
                        const BcrwState& state);

/// Bearings from `from` to every target, in target order.
std::vector<double> target_bearings(const Point& from, std::span<const Target> targets);

}  // namespace mssf
