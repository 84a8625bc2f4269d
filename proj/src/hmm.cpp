#include "mssf/hmm.hpp"

#include "mssf/errors.hpp"

#include <cmath>

namespace mssf {

namespace {

void check_shapes(const EmissionMatrix& em, const HmmParams& hmm) {
  if (em.num_states() != hmm.num_states() || hmm.initial.size() != hmm.num_states()) {
    throw Error(ErrorCode::InvalidArgument, "emission columns must match the number of states");
  }
  if (em.num_steps() < 1) throw Error(ErrorCode::InvalidArgument, "no emissions");
}

// Filtered row t from the predictive row and log emissions, scaled by the
// row max; returns log of the normalizing constant.
double filter_row(const Eigen::Ref<const Eigen::RowVectorXd>& log_p, const Eigen::RowVectorXd& predictive,
                  Eigen::RowVectorXd& filtered, Eigen::Index t) {
  const double m = log_p.maxCoeff();
  filtered = predictive.array() * (log_p.array() - m).exp();
  const double c = filtered.sum();
  if (!(c > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorCode::NumericalUnderflow, "all emissions vanish at step " + std::to_string(t));
  }
  filtered /= c;
  return m + std::log(c);
}

}  // namespace

double forward_loglik(const EmissionMatrix& emissions, const HmmParams& hmm) {
  check_shapes(emissions, hmm);
  Eigen::RowVectorXd prev = hmm.initial.transpose();
  Eigen::RowVectorXd filtered;
  double ll = 0.0;
  for (Eigen::Index t = 0; t < emissions.num_steps(); ++t) {
    const Eigen::RowVectorXd pred = prev * hmm.transition;
    ll += filter_row(emissions.log_p.row(t), pred, filtered, t);
    prev = filtered;
  }
  return ll;
}

PosteriorBundle filter_smooth(const EmissionMatrix& emissions, const HmmParams& hmm) {
  check_shapes(emissions, hmm);
  const Eigen::Index n = emissions.num_steps();
  const Eigen::Index k = hmm.num_states();
  const Eigen::MatrixXd& P = hmm.transition;

  PosteriorBundle b;
  b.filtered.resize(n, k);
  b.predictive.resize(n, k);
  b.smoothed.resize(n, k);
  b.pairwise.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(k, k));

  Eigen::RowVectorXd prev = hmm.initial.transpose();
  Eigen::RowVectorXd filtered;
  for (Eigen::Index t = 0; t < n; ++t) {
    b.predictive.row(t) = prev * P;
    b.loglik += filter_row(emissions.log_p.row(t), b.predictive.row(t), filtered, t);
    b.filtered.row(t) = filtered;
    prev = filtered;
  }

  // backward: ratio(k) = P(S_{t+1}=k | F_T) / P(S_{t+1}=k | F_t)
  b.smoothed.row(n - 1) = b.filtered.row(n - 1);
  auto backward = [&](const Eigen::RowVectorXd& filt_t, Eigen::Index next) {
    Eigen::RowVectorXd ratio(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double pred = b.predictive(next, j);
      ratio(j) = pred > 0.0 ? b.smoothed(next, j) / pred : 0.0;
    }
    Eigen::MatrixXd joint(k, k);
    for (Eigen::Index h = 0; h < k; ++h) joint.row(h) = filt_t(h) * P.row(h).cwiseProduct(ratio);
    return joint;
  };
  for (Eigen::Index t = n - 1; t >= 1; --t) {
    Eigen::MatrixXd joint = backward(b.filtered.row(t - 1), t);
    b.smoothed.row(t - 1) = joint.rowwise().sum().transpose();
    const double s = b.smoothed.row(t - 1).sum();
    b.smoothed.row(t - 1) /= s;
    joint /= s;
    b.pairwise[static_cast<std::size_t>(t)] = joint;
  }
  Eigen::MatrixXd joint0 = backward(hmm.initial.transpose(), 0);
  const double s0 = joint0.sum();
  joint0 /= s0;
  b.initial_smoothed = joint0.rowwise().sum();
  b.pairwise[0] = joint0;
  return b;
}

TransitionUpdate update_transition(const PosteriorBundle& bundle, const Eigen::MatrixXd& previous) {
  const Eigen::Index k = previous.rows();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
  for (const auto& pw : bundle.pairwise) counts += pw;
  TransitionUpdate up;
  up.transition = previous;
  for (Eigen::Index h = 0; h < k; ++h) {
    const double occupancy = counts.row(h).sum();
    if (occupancy < 1e-8) {
      up.degenerate_rows.push_back(static_cast<int>(h));
      continue;
    }
    up.transition.row(h) = counts.row(h) / occupancy;
  }
  return up;
}

std::vector<DecodedState> decode_states(const Eigen::MatrixXd& smoothed) {
  std::vector<DecodedState> out;
  out.reserve(static_cast<std::size_t>(smoothed.rows()));
  for (Eigen::Index t = 0; t < smoothed.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < smoothed.cols(); ++j) {
      if (smoothed(t, j) > smoothed(t, best)) best = j;
    }
    out.push_back({static_cast<int>(best), smoothed(t, best)});
  }
  return out;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const Eigen::Index k = transition.rows();
  // solve pi (P - I) = 0 with sum(pi) = 1
  Eigen::MatrixXd a(k + 1, k);
  a.topRows(k) = (transition - Eigen::MatrixXd::Identity(k, k)).transpose();
  a.row(k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  return a.colPivHouseholderQr().solve(rhs);
}

}  // namespace mssf
