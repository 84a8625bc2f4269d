#pragma once

#include "mssf/bcrw.hpp"
#include "mssf/random.hpp"
#include "mssf/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mssf {

/// Control distances uniform on [0, M].
struct UniformScheme {
  double max_distance{15.0};
};

/// Control distances from the gamma family with natural parameter eta_tilde.
struct ParametricScheme {
  Eigen::Vector2d eta_tilde{0.0, 1.0};
};

using SamplingScheme = std::variant<UniformScheme, ParametricScheme>;

std::string scheme_label(const SamplingScheme& scheme);
bool is_parametric(const SamplingScheme& scheme);

enum class TermKind { LogDistance, NegDistance, CosPersistence, CosTarget, Landcover };

struct CovariateTerm {
  TermKind kind{};
  std::string target;  // CosTarget
  std::string label;   // Landcover

  std::string name() const;
  /// Inverse of name(): "log_distance", "cos_target:<name>", "landcover:<label>", ...
  static CovariateTerm parse(const std::string& name);
};

/// Ordered covariate terms; position i gives beta coordinate i its meaning.
struct CovariateFormula {
  std::vector<CovariateTerm> terms;

  std::vector<std::string> names() const;
  std::optional<Eigen::Index> index_of(TermKind kind) const;
  bool needs_landscape() const;

  /// (log h, -h, cos persistence, cos to each target): the BCRW-equivalent formula.
  static CovariateFormula bcrw(std::span<const Target> targets);
};

/// Where CosTarget terms find their targets and Landcover terms their raster.
struct CovariateContext {
  const LandscapeGrid* landscape{nullptr};
  std::vector<Target> targets;

  Point target(const std::string& name) const;
};

/// J i.i.d. control steps: uniform headings, distances from the scheme.
std::vector<Step> sample_controls(Rng& rng, const SamplingScheme& scheme, int num_controls);

/// Alternative 0 is the observed step. Controls whose endpoint falls off the
/// landscape are dropped; an off-grid observed endpoint throws OutOfGrid.
ChoiceSet build_choice_set(int time_index, const Step& observed, std::span<const Step> controls,
                           double prev_angle, const Point& origin, const CovariateContext& context,
                           const CovariateFormula& formula, const SamplingScheme& scheme);

/// Choice sets for steps 1..n-1 of a trajectory (step 0 has no previous
/// heading). Controls of step t come from sub-stream ("controls", t) of `seed`.
std::vector<ChoiceSet> build_choice_sets(const Trajectory& trajectory, const CovariateContext& context,
                                         const CovariateFormula& formula, const SamplingScheme& scheme,
                                         int num_controls, std::uint64_t seed);

/// eta_hat = eta_ssf + eta_tilde for every state.
std::vector<Eigen::Vector2d> correct_parametric_bias(std::span<const Eigen::Vector2d> eta_ssf,
                                                     const Eigen::Vector2d& eta_tilde);

/// Long-format CSV: t,alt_id,is_case,angle,distance,<covariates>,offset.
void write_choice_sets_csv(std::ostream& out, std::span<const ChoiceSet> sets,
                           const std::vector<std::string>& covariate_names);
std::vector<ChoiceSet> read_choice_sets_csv(std::istream& in, std::vector<std::string>* covariate_names);

}  // namespace mssf

namespace mssf {

/// Under parametric sampling, adds eta_tilde to every state's
/// (log_distance, neg_distance) coefficients; a no-op for uniform sampling.
void correct_fit_for_sampling(FitResult& fit, const SamplingScheme& scheme);

}  // namespace mssf
