#pragma once

#include "mssf/emission.hpp"
#include "mssf/hmm.hpp"
#include "mssf/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mssf {

/// How fitted states are relabelled to remove label switching.
struct StateOrdering {
  bool enabled{true};
  /// Added to the (log_distance, neg_distance) coefficients before computing
  /// the mean step length; the control-sampling tilt under parametric sampling.
  Eigen::Vector2d distance_shift{Eigen::Vector2d::Zero()};
};

struct EmConfig {
  int num_states{2};
  int n_short_runs{20};
  int short_iters{10};
  int long_max_iters{500};
  /// Convergence when |l_{s+1} - l_s| < tol * |l_s|.
  double tol{1e-8};
  std::uint64_t seed{0};
  StateOrdering ordering;
  /// Initial state distribution; uniform when unset. Never estimated.
  std::optional<Eigen::VectorXd> initial_distribution;
  int threads{1};
  bool compute_std_errors{true};

  void validate() const;
};

/// Multistart EM: short runs from randomized starts around the pooled
/// single-state fit, then a long run from the best of them.
FitResult em_fit(const EmissionModel& model, const EmConfig& config);

/// Single EM run from given parameters; useful for refits and tests.
struct EmRun {
  std::vector<StateParams> states;
  HmmParams hmm;
  PosteriorBundle posterior;
  std::vector<double> trace;  // observed log-likelihood, starting value first
  int iterations{};
  bool converged{false};
  double min_increment{0.0};
  std::vector<std::string> warnings;
};
EmRun run_em(const EmissionModel& model, std::vector<StateParams> states, HmmParams hmm, int max_iters, double tol);

double observed_loglik(const EmissionModel& model, std::span<const StateParams> states, const HmmParams& hmm);

/// Mean step length per state used by the canonical ordering; falls back to
/// monotone proxies when the distance coefficients are not a valid gamma law.
std::vector<double> ordering_keys(std::span<const StateParams> states, const std::vector<std::string>& names,
                                  const StateOrdering& ordering);

struct StdErrors {
  Eigen::MatrixXd beta;        // K x r
  Eigen::MatrixXd transition;  // K x K
  Eigen::MatrixXd covariance;  // of (betas, transition logits)
  bool ok{false};
  std::string message;
};

/// Inverse negative numerical Hessian of the observed log-likelihood, with
/// transitions differentiated through per-row logits (diagonal as reference)
/// and mapped back by the delta method. NaN marks withheld coordinates.
StdErrors standard_errors(const EmissionModel& model, std::span<const StateParams> states, const HmmParams& hmm);

/// Reorders states so that ordering_keys are ascending.
void reorder_states(FitResult& fit, const std::vector<int>& order);

}  // namespace mssf
