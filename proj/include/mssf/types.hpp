#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mssf {

struct Point {
  double x{};
  double y{};
};

inline Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }

/// Polar decomposition of one step: heading in (-pi, pi] and positive length.
struct Step {
  double angle{};
  double distance{};
};

/// Ordered planar locations plus the per-step headings and lengths.
///
/// `angles[t]` and `distances[t]` describe the move from `points[t]` to
/// `points[t + 1]`, so there is one fewer step than points.
struct Trajectory {
  std::vector<Point> points;
  Eigen::VectorXd angles;
  Eigen::VectorXd distances;

  Eigen::Index num_steps() const { return angles.size(); }
  Step step(Eigen::Index t) const { return {angles(t), distances(t)}; }
};

/// One matched case-control stratum. Row 0 is the observed step.
struct ChoiceSet {
  int time_index{};
  Eigen::VectorXd angles;
  Eigen::VectorXd distances;
  Eigen::MatrixXd covariates;  // (J + 1) x r
  Eigen::VectorXd offsets;

  Eigen::Index num_alternatives() const { return covariates.rows(); }
  Eigen::Index dimension() const { return covariates.cols(); }
};

/// Selection coefficients of one hidden state, ordered as the covariate formula.
struct StateParams {
  Eigen::VectorXd beta;
};

struct HmmParams {
  Eigen::MatrixXd transition;  // K x K, row-stochastic
  Eigen::VectorXd initial;     // length K

  Eigen::Index num_states() const { return transition.rows(); }

  static HmmParams uniform(Eigen::Index k);
  /// Throws InvalidArgument unless rows and `initial` are probability vectors.
  void validate() const;
};

/// Land-cover raster. Row 0 of `classes` is the northern-most row.
struct LandscapeGrid {
  Point origin;  // south-west corner
  double cell_size{1.0};
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> classes;
  std::map<std::int32_t, std::string> legend;
  std::map<std::string, Point> targets;

  bool contains(const Point& p) const;
  /// Class code of the cell holding `p`; throws OutOfGrid outside the raster.
  std::int32_t class_at(const Point& p) const;
  std::int32_t code_for(const std::string& label) const;
};

struct FitResult {
  std::vector<std::string> coefficient_names;
  std::vector<StateParams> state_params;
  HmmParams hmm;
  /// Per-state SEs of the coefficients (K x r) and of the transition matrix
  /// (K x K, every entry by the delta method). NaN marks a withheld SE.
  Eigen::MatrixXd beta_std_errors;
  Eigen::MatrixXd transition_std_errors;
  bool std_errors_ok{false};
  double loglik{};
  Eigen::MatrixXd smooth_probs;  // T x K
  int n_em_iterations{};
  bool converged{false};
  /// Observed log-likelihood after each EM iteration of the long run.
  std::vector<double> loglik_trace;
  /// Smallest l_{s+1} - l_s seen across every run of the multistart.
  double min_loglik_increment{0.0};
  std::vector<std::string> warnings;
};

}  // namespace mssf
