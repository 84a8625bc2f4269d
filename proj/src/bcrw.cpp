#include "mssf/bcrw.hpp"

#include "mssf/circular.hpp"
#include "mssf/errors.hpp"
#include "mssf/trajectory.hpp"

#include <cmath>
#include <limits>

namespace mssf {

namespace {

int draw_categorical(Rng& rng, const Eigen::Ref<const Eigen::RowVectorXd>& probs) {
  const double u = uniform_open(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs(k);
    if (u < acc) return static_cast<int>(k);
  }
  // rounding: fall back to the last state with positive mass
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k) {
    if (probs(k) > 0.0) return static_cast<int>(k);
  }
  return 0;
}

}  // namespace

void BcrwScenario::validate() const {
  hmm.validate();
  if (states.empty() || static_cast<Eigen::Index>(states.size()) != hmm.num_states()) {
    throw Error(ErrorCode::InvalidArgument, "scenario needs one movement block per hidden state");
  }
  for (const auto& s : states) {
    if (s.kappas.size() != static_cast<Eigen::Index>(targets.size()) + 1) {
      throw Error(ErrorCode::InvalidArgument, "each state needs 1 + (number of targets) kappas");
    }
    if (!(s.gamma.shape > 0.0) || !(s.gamma.scale > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "gamma shape and scale must be positive");
    }
  }
  if (!(stop_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "stop_radius must be positive");
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 1");
  if (!(start_region.x_max >= start_region.x_min) || !(start_region.y_max >= start_region.y_min)) {
    throw Error(ErrorCode::InvalidArgument, "start region bounds are inverted");
  }
}

BcrwScenario BcrwScenario::two_state_reference(double map_size) {
  BcrwScenario sc;
  sc.hmm.transition.resize(2, 2);
  sc.hmm.transition << 0.9, 0.1, 0.2, 0.8;
  sc.hmm.initial = Eigen::Vector2d(0.5, 0.5);
  BcrwState s1;
  s1.kappas = Eigen::Vector2d(20.0, 15.0);
  s1.gamma = {5.0, 0.7};
  BcrwState s2;
  s2.kappas = Eigen::Vector2d(10.0, -2.0);
  s2.gamma = {1.0, 0.5};
  sc.states = {s1, s2};
  sc.targets = {{"target", {map_size / 2.0, map_size / 2.0}}};
  sc.start_region = {0.0, 0.0, 10.0, 10.0};
  sc.stop_radius = 30.0;
  sc.max_steps = 5000;
  return sc;
}

std::vector<int> simulate_state_chain(Rng& rng, const HmmParams& hmm, int num_transitions) {
  std::vector<int> s;
  s.reserve(static_cast<std::size_t>(num_transitions) + 1);
  s.push_back(draw_categorical(rng, hmm.initial.transpose()));
  for (int t = 0; t < num_transitions; ++t) {
    s.push_back(draw_categorical(rng, hmm.transition.row(s.back())));
  }
  return s;
}

std::vector<double> target_bearings(const Point& from, std::span<const Target> targets) {
  std::vector<double> out;
  out.reserve(targets.size());
  for (const auto& tg : targets) out.push_back(bearing(from, tg.location));
  return out;
}

SimulatedTrack simulate_trajectory(Rng& rng, const BcrwScenario& scenario) {
  scenario.validate();
  const auto& box = scenario.start_region;
  Point p{box.x_min + (box.x_max - box.x_min) * uniform_open(rng),
          box.y_min + (box.y_max - box.y_min) * uniform_open(rng)};

  auto near_target = [&](const Point& q) {
    for (const auto& tg : scenario.targets) {
      if (std::hypot(q.x - tg.location.x, q.y - tg.location.y) <= scenario.stop_radius) return true;
    }
    return false;
  };

  SimulatedTrack out;
  out.initial_state = draw_categorical(rng, scenario.hmm.initial.transpose());
  out.initial_heading = uniform_angle(rng);

  std::vector<Point> pts{p};
  std::vector<double> angles;
  std::vector<double> dists;
  int state = out.initial_state;
  double heading = out.initial_heading;
  while (static_cast<int>(angles.size()) < scenario.max_steps && !near_target(p)) {
    state = draw_categorical(rng, scenario.hmm.transition.row(state));
    const BcrwState& st = scenario.states[static_cast<std::size_t>(state)];
    const std::vector<double> bearings = target_bearings(p, scenario.targets);
    const auto cons = consensus_vector<double>(heading, bearings,
                                               std::span<const double>(st.kappas.data(), st.kappas.size()));
    heading = vonmises_sample(rng, cons.mean_direction, cons.concentration);
    const double d = gamma_sample(rng, st.gamma);
    p = advance(p, heading, d);
    pts.push_back(p);
    angles.push_back(heading);
    dists.push_back(d);
    out.step_states.push_back(state);
  }
  out.truncated = !scenario.targets.empty() && !near_target(p);

  out.trajectory.points = std::move(pts);
  out.trajectory.angles = Eigen::Map<const Eigen::VectorXd>(angles.data(), static_cast<Eigen::Index>(angles.size()));
  out.trajectory.distances =
      Eigen::Map<const Eigen::VectorXd>(dists.data(), static_cast<Eigen::Index>(dists.size()));
  return out;
}

double bcrw_step_loglik(const Step& step, double prev_angle, std::span<const double> target_bearings,
                        const BcrwState& state) {
  const auto cons = consensus_vector<double>(prev_angle, target_bearings,
                                             std::span<const double>(state.kappas.data(), state.kappas.size()));
  return gamma_logpdf(step.distance, state.gamma) +
         vonmises_logpdf(step.angle, cons.mean_direction, cons.concentration);
}

}  // namespace mssf
