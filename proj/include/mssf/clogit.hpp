#pragma once

#include "mssf/types.hpp"

#include <span>
#include <vector>

namespace mssf {

/// Choice sets packed into one design matrix; rows of stratum t are
/// [starts[t], starts[t+1]) and the first of them is the case.
class ClogitDesign {
 public:
  ClogitDesign() = default;
  explicit ClogitDesign(std::span<const ChoiceSet> sets);

  Eigen::Index num_sets() const { return static_cast<Eigen::Index>(starts_.size()) - 1; }
  Eigen::Index dimension() const { return covariates_.cols(); }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  Eigen::Index start(Eigen::Index t) const { return starts_[static_cast<std::size_t>(t)]; }
  Eigen::Index size(Eigen::Index t) const { return start(t + 1) - start(t); }

 private:
  Eigen::MatrixXd covariates_;
  Eigen::VectorXd offsets_;
  std::vector<Eigen::Index> starts_{0};
};

/// log p = (x_0'beta + o_0) - logsumexp_j (x_j'beta + o_j)
double clogit_logprob(const ChoiceSet& cs, const Eigen::VectorXd& beta);

/// Per-stratum log choice probability of the case.
Eigen::VectorXd clogit_logprobs(const ClogitDesign& design, const Eigen::VectorXd& beta);

struct ClogitObjective {
  double value{};
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Weighted log-likelihood sum_t w_t log p_t with gradient and Hessian.
/// Strata with weight below kMinWeight are skipped.
ClogitObjective clogit_objective(const ClogitDesign& design, const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& beta);
double clogit_value(const ClogitDesign& design, const Eigen::VectorXd& weights, const Eigen::VectorXd& beta);

struct ClogitOptions {
  double gradient_tol{1e-8};
  int max_iterations{100};
  double separation_norm{1e3};
};

struct ClogitFit {
  Eigen::VectorXd beta;
  bool converged{false};
  double gradient_norm{};
  double value{};
  int iterations{};
};

/// Newton-Raphson with step halving. Throws NotIdentified when the weighted
/// within-stratum covariance is singular and Separation when the likelihood
/// keeps increasing along a direction.
ClogitFit clogit_fit(const ClogitDesign& design, const Eigen::VectorXd& weights, const Eigen::VectorXd& init,
                     const ClogitOptions& options = {});

inline constexpr double kMinWeight = 1e-12;

}  // namespace mssf
