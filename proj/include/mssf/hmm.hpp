#pragma once

#include "mssf/types.hpp"

#include <vector>

namespace mssf {

/// T x K log emission probabilities log p_t^(k).
struct EmissionMatrix {
  Eigen::MatrixXd log_p;

  Eigen::Index num_steps() const { return log_p.rows(); }
  Eigen::Index num_states() const { return log_p.cols(); }
  Eigen::MatrixXd probabilities() const { return log_p.array().exp(); }
};

/// Posterior quantities of the hidden chain S_0..S_T given emissions at t = 1..T.
/// Row t of the T x K matrices refers to S_{t+1}; pairwise[t](h, k) is
/// E[S_{h,t} S_{k,t+1}], so pairwise[0] covers the S_0 -> S_1 transition.
struct PosteriorBundle {
  Eigen::MatrixXd filtered;
  Eigen::MatrixXd predictive;
  Eigen::MatrixXd smoothed;
  Eigen::VectorXd initial_smoothed;  // P(S_0 | F_T)
  std::vector<Eigen::MatrixXd> pairwise;
  double loglik{};
};

/// Scaled forward filter and backward smoother.
PosteriorBundle filter_smooth(const EmissionMatrix& emissions, const HmmParams& hmm);

/// Forward pass only: log of the observed-data likelihood.
double forward_loglik(const EmissionMatrix& emissions, const HmmParams& hmm);

struct TransitionUpdate {
  Eigen::MatrixXd transition;
  /// Rows whose expected occupancy was below 1e-8; left at their previous value.
  std::vector<int> degenerate_rows;
};

/// pi_hk = sum_t E[S_{h,t-1} S_{k,t}] / sum_t E[S_{h,t-1}].
TransitionUpdate update_transition(const PosteriorBundle& bundle, const Eigen::MatrixXd& previous);

struct DecodedState {
  int state{};
  double probability{};
};

/// Most probable state per step; ties go to the lower index.
std::vector<DecodedState> decode_states(const Eigen::MatrixXd& smoothed);
inline std::vector<DecodedState> decode_states(const PosteriorBundle& bundle) {
  return decode_states(bundle.smoothed);
}

/// Stationary distribution of a row-stochastic matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

}  // namespace mssf
