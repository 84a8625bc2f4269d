#pragma once

#include "mssf/bcrw.hpp"
#include "mssf/em.hpp"
#include "mssf/sampler.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mssf {

enum class Estimator { Ssf, BcrwDirect };
const char* estimator_label(Estimator e);

struct StudyConfig {
  BcrwScenario scenario;
  int replicates{50};
  int num_controls{500};
  std::vector<SamplingScheme> schemes{UniformScheme{15.0}};
  bool estimate_ssf{true};
  bool estimate_bcrw{false};
  std::uint64_t seed{1};
  EmConfig em;
  int threads{1};

  void validate() const;
};

/// Replicate estimates and their bias / Sd summary for one (scheme, estimator).
struct StudyCell {
  std::string scheme;  // "none" for the direct BCRW fit
  Estimator estimator{Estimator::Ssf};
  Eigen::MatrixXd estimates;  // N x P, NaN rows for failed replicates
  std::vector<std::string> errors;  // empty string when the replicate succeeded
  std::vector<double> min_loglik_increments;
  Eigen::VectorXd bias;
  Eigen::VectorXd sd;
  int n_ok{};

  int n_failed() const { return static_cast<int>(estimates.rows()) - n_ok; }
  /// More than 5% of the replicates failed.
  bool quality_flag() const { return n_failed() * 20 > static_cast<int>(estimates.rows()); }
};

struct StudyReport {
  std::vector<std::string> parameters;
  Eigen::VectorXd truth;
  std::vector<StudyCell> cells;
  std::vector<int> trajectory_lengths;
  int truncated_trajectories{};

  bool any_quality_flag() const;
};

/// Names and true values of the compared parameters: off-diagonal transition
/// probabilities (row-major) then each state's coefficients in formula order.
std::vector<std::string> study_parameter_names(const BcrwScenario& scenario);
Eigen::VectorXd study_truth(const BcrwScenario& scenario);

/// Bias divides by N and Sd by N - 1, over the successful replicates.
void summarize(StudyCell& cell, const Eigen::VectorXd& truth);

StudyReport run_study(const StudyConfig& config);

void write_study_csv(std::ostream& out, const StudyReport& report);
nlohmann::ordered_json study_to_json(const StudyReport& report);

struct EquivalenceColumn {
  std::string label;
  Eigen::VectorXd estimates;
  Eigen::VectorXd std_errors;
  double loglik{};
  double min_loglik_increment{};
};

struct EquivalenceReport {
  std::vector<std::string> parameters;
  std::vector<EquivalenceColumn> columns;
};

/// Fits the direct BCRW model and the BCRW-equivalent SSF under each scheme
/// (parametric fits bias-corrected) to one trajectory; states are in the
/// canonical order.
EquivalenceReport equivalence_report(const Trajectory& trajectory, const std::vector<Target>& targets,
                                     int num_controls, const std::vector<SamplingScheme>& schemes,
                                     std::uint64_t seed, const EmConfig& em);

void write_equivalence_csv(std::ostream& out, const EquivalenceReport& report);

/// Flattens a fit into the study parameter layout (transitions, then states).
Eigen::VectorXd flatten_fit(const FitResult& fit, const std::vector<int>& state_for_slot);
Eigen::VectorXd flatten_fit_std_errors(const FitResult& fit, const std::vector<int>& state_for_slot);

}  // namespace mssf
