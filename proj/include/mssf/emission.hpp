#pragma once

#include "mssf/bcrw.hpp"
#include "mssf/clogit.hpp"
#include "mssf/hmm.hpp"
#include "mssf/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace mssf {

/// Per-state observation model plugged into the EM fitter: log p_t^(k) for a
/// coefficient vector, and the weighted maximization of the M-step.
class EmissionModel {
 public:
  virtual ~EmissionModel() = default;

  virtual Eigen::Index num_steps() const = 0;
  virtual const std::vector<std::string>& coefficient_names() const = 0;
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(coefficient_names().size()); }

  virtual Eigen::VectorXd log_emissions(const Eigen::VectorXd& beta) const = 0;

  struct MStep {
    Eigen::VectorXd beta;
    bool converged{false};
  };
  /// Maximizes sum_t w_t log p_t(beta), starting at `init`; the result never
  /// scores below `init`.
  virtual MStep fit_weighted(const Eigen::VectorXd& weights, const Eigen::VectorXd& init) const = 0;

  virtual Eigen::VectorXd default_start() const { return Eigen::VectorXd::Zero(dimension()); }
  virtual bool in_domain(const Eigen::VectorXd& /*beta*/) const { return true; }
};

EmissionMatrix emissions(const EmissionModel& model, std::span<const StateParams> states);

/// Conditional-logit emissions over matched choice sets.
class SsfEmission final : public EmissionModel {
 public:
  SsfEmission(std::span<const ChoiceSet> sets, std::vector<std::string> names, ClogitOptions options = {});

  Eigen::Index num_steps() const override { return design_.num_sets(); }
  const std::vector<std::string>& coefficient_names() const override { return names_; }
  Eigen::VectorXd log_emissions(const Eigen::VectorXd& beta) const override;
  MStep fit_weighted(const Eigen::VectorXd& weights, const Eigen::VectorXd& init) const override;

  const ClogitDesign& design() const { return design_; }

 private:
  ClogitDesign design_;
  std::vector<std::string> names_;
  ClogitOptions options_;
};

/// Direct BCRW emissions: gamma step length times consensus von Mises heading.
/// Coefficients are (eta1, eta2, kappa_0, ..., kappa_p), the same layout as the
/// BCRW-equivalent SSF formula.
class BcrwEmission final : public EmissionModel {
 public:
  /// Uses steps 1..n-1 of the trajectory, each with its previous heading.
  BcrwEmission(const Trajectory& trajectory, std::span<const Target> targets);

  Eigen::Index num_steps() const override { return log_distance_.size(); }
  const std::vector<std::string>& coefficient_names() const override { return names_; }
  Eigen::VectorXd log_emissions(const Eigen::VectorXd& beta) const override;
  MStep fit_weighted(const Eigen::VectorXd& weights, const Eigen::VectorXd& init) const override;
  Eigen::VectorXd default_start() const override;
  bool in_domain(const Eigen::VectorXd& beta) const override;

  double weighted_loglik(const Eigen::VectorXd& weights, const Eigen::VectorXd& beta) const;

 private:
  std::vector<std::string> names_;
  Eigen::VectorXd log_distance_;
  Eigen::VectorXd distance_;
  Eigen::MatrixXd cos_terms_;   // T x (p+1): cos(phi_t - direction_i)
  Eigen::MatrixXd directions_;  // T x (p+1): previous heading, then target bearings
};

}  // namespace mssf
