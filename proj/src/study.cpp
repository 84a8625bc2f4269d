#include "mssf/study.hpp"

#include "mssf/emission.hpp"
#include "mssf/errors.hpp"
#include "mssf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

namespace mssf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> bcrw_coefficient_names(const BcrwScenario& scenario) {
  return CovariateFormula::bcrw(scenario.targets).names();
}

// Slot s (truth state s) -> canonical fitted index: the rank of s by mean step length.
std::vector<int> truth_slots(const BcrwScenario& scenario) {
  const auto k = static_cast<int>(scenario.states.size());
  std::vector<int> by_mean(k);
  std::iota(by_mean.begin(), by_mean.end(), 0);
  std::stable_sort(by_mean.begin(), by_mean.end(), [&](int a, int b) {
    return scenario.states[a].gamma.mean() < scenario.states[b].gamma.mean();
  });
  std::vector<int> slot(k);
  for (int r = 0; r < k; ++r) slot[by_mean[r]] = r;
  return slot;
}

struct CellSpec {
  Estimator estimator;
  std::optional<SamplingScheme> scheme;
  std::string label;
};

struct ReplicateOutcome {
  Eigen::VectorXd estimate;
  std::string error;
  double min_increment{0.0};
};

EmConfig em_for(const EmConfig& base, std::uint64_t seed, const std::optional<SamplingScheme>& scheme) {
  EmConfig em = base;
  em.seed = seed;
  em.threads = 1;
  em.ordering.distance_shift.setZero();
  if (scheme) {
    if (const auto* p = std::get_if<ParametricScheme>(&*scheme)) em.ordering.distance_shift = p->eta_tilde;
  }
  return em;
}

FitResult fit_one(const Trajectory& trajectory, const std::vector<Target>& targets, const CellSpec& spec,
                  int num_controls, std::uint64_t root, const EmConfig& em) {
  const auto em_seed = derive_seed(root, "multistart");
  if (spec.estimator == Estimator::BcrwDirect) {
    const BcrwEmission model(trajectory, targets);
    return em_fit(model, em_for(em, em_seed, std::nullopt));
  }
  const CovariateFormula formula = CovariateFormula::bcrw(targets);
  CovariateContext context;
  context.targets = targets;
  const auto sets = build_choice_sets(trajectory, context, formula, *spec.scheme, num_controls,
                                      derive_seed(root, "controls:" + spec.label));
  const SsfEmission model(sets, formula.names());
  FitResult fit = em_fit(model, em_for(em, em_seed, spec.scheme));
  correct_fit_for_sampling(fit, *spec.scheme);
  return fit;
}

std::vector<CellSpec> cell_specs(const StudyConfig& config) {
  std::vector<CellSpec> specs;
  if (config.estimate_ssf) {
    for (const auto& s : config.schemes) specs.push_back({Estimator::Ssf, s, scheme_label(s)});
  }
  if (config.estimate_bcrw) specs.push_back({Estimator::BcrwDirect, std::nullopt, "none"});
  return specs;
}

}  // namespace

const char* estimator_label(Estimator e) { return e == Estimator::Ssf ? "ssf" : "bcrw_direct"; }

void StudyConfig::validate() const {
  scenario.validate();
  if (replicates < 2) throw Error(ErrorCode::InvalidArgument, "study: replicates must be >= 2");
  if (num_controls < 1) throw Error(ErrorCode::InvalidArgument, "study: num_controls must be >= 1");
  if (!estimate_ssf && !estimate_bcrw) throw Error(ErrorCode::InvalidArgument, "study: no estimator selected");
  if (estimate_ssf && schemes.empty()) throw Error(ErrorCode::InvalidArgument, "study: no sampling scheme");
  if (em.num_states != scenario.num_states()) {
    throw Error(ErrorCode::InvalidArgument, "study: em.num_states differs from the scenario");
  }
  em.validate();
}

bool StudyReport::any_quality_flag() const {
  return std::any_of(cells.begin(), cells.end(), [](const StudyCell& c) { return c.quality_flag(); });
}

std::vector<std::string> study_parameter_names(const BcrwScenario& scenario) {
  const auto k = scenario.num_states();
  std::vector<std::string> names;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a != b) names.push_back("P_" + std::to_string(a + 1) + std::to_string(b + 1));
    }
  }
  const auto coefs = bcrw_coefficient_names(scenario);
  for (Eigen::Index s = 0; s < k; ++s) {
    for (const auto& c : coefs) names.push_back(c + "[" + std::to_string(s + 1) + "]");
  }
  return names;
}

Eigen::VectorXd study_truth(const BcrwScenario& scenario) {
  const auto names = study_parameter_names(scenario);
  Eigen::VectorXd truth(static_cast<Eigen::Index>(names.size()));
  const auto k = scenario.num_states();
  Eigen::Index i = 0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a != b) truth(i++) = scenario.hmm.transition(a, b);
    }
  }
  for (const auto& s : scenario.states) {
    const auto eta = gamma_to_natural(s.gamma);
    truth(i++) = eta(0);
    truth(i++) = eta(1);
    for (Eigen::Index j = 0; j < s.kappas.size(); ++j) truth(i++) = s.kappas(j);
  }
  return truth;
}

Eigen::VectorXd flatten_fit(const FitResult& fit, const std::vector<int>& state_for_slot) {
  const auto k = static_cast<Eigen::Index>(state_for_slot.size());
  const Eigen::Index r = fit.state_params.front().beta.size();
  Eigen::VectorXd out(k * (k - 1) + k * r);
  Eigen::Index i = 0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a != b) out(i++) = fit.hmm.transition(state_for_slot[a], state_for_slot[b]);
    }
  }
  for (Eigen::Index s = 0; s < k; ++s) {
    out.segment(i, r) = fit.state_params[state_for_slot[s]].beta;
    i += r;
  }
  return out;
}

Eigen::VectorXd flatten_fit_std_errors(const FitResult& fit, const std::vector<int>& state_for_slot) {
  const auto k = static_cast<Eigen::Index>(state_for_slot.size());
  const Eigen::Index r = fit.state_params.front().beta.size();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(k * (k - 1) + k * r, kNaN);
  if (fit.transition_std_errors.rows() != k || fit.beta_std_errors.rows() != k) return out;
  Eigen::Index i = 0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a != b) out(i++) = fit.transition_std_errors(state_for_slot[a], state_for_slot[b]);
    }
  }
  for (Eigen::Index s = 0; s < k; ++s) {
    out.segment(i, r) = fit.beta_std_errors.row(state_for_slot[s]).transpose();
    i += r;
  }
  return out;
}

void summarize(StudyCell& cell, const Eigen::VectorXd& truth) {
  const Eigen::Index p = truth.size();
  cell.n_ok = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < cell.estimates.rows(); ++i) {
    if (cell.errors[i].empty()) {
      sum += cell.estimates.row(i).transpose();
      ++cell.n_ok;
    }
  }
  cell.bias = Eigen::VectorXd::Constant(p, kNaN);
  cell.sd = Eigen::VectorXd::Constant(p, kNaN);
  if (cell.n_ok == 0) return;
  const Eigen::VectorXd mean = sum / cell.n_ok;
  cell.bias = mean - truth;
  if (cell.n_ok < 2) return;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < cell.estimates.rows(); ++i) {
    if (cell.errors[i].empty()) ss += (cell.estimates.row(i).transpose() - mean).array().square().matrix();
  }
  cell.sd = (ss / (cell.n_ok - 1)).cwiseSqrt();
}

StudyReport run_study(const StudyConfig& config) {
  config.validate();
  const auto specs = cell_specs(config);
  const auto slots = truth_slots(config.scenario);
  const auto n = static_cast<std::size_t>(config.replicates);

  StudyReport report;
  report.parameters = study_parameter_names(config.scenario);
  report.truth = study_truth(config.scenario);
  const auto p = report.truth.size();

  std::vector<std::vector<ReplicateOutcome>> outcomes(n, std::vector<ReplicateOutcome>(specs.size()));
  std::vector<int> lengths(n);
  std::vector<char> truncated(n);

  parallel_for(n, config.threads, [&](std::size_t rep) {
    const auto root = derive_seed(config.seed, "replicate", rep);
    Rng rng = make_rng(root, "simulate");
    SimulatedTrack track;
    std::string sim_error;
    try {
      track = simulate_trajectory(rng, config.scenario);
      lengths[rep] = static_cast<int>(track.trajectory.num_steps());
      truncated[rep] = track.truncated;
      if (track.trajectory.num_steps() < 3) sim_error = "trajectory too short to fit";
    } catch (const std::exception& e) {
      sim_error = e.what();
    }
    for (std::size_t c = 0; c < specs.size(); ++c) {
      auto& out = outcomes[rep][c];
      out.estimate = Eigen::VectorXd::Constant(p, kNaN);
      if (!sim_error.empty()) {
        out.error = sim_error;
        continue;
      }
      try {
        const FitResult fit =
            fit_one(track.trajectory, config.scenario.targets, specs[c], config.num_controls, root, config.em);
        out.estimate = flatten_fit(fit, slots);
        out.min_increment = fit.min_loglik_increment;
      } catch (const std::exception& e) {
        out.error = e.what();
        if (out.error.empty()) out.error = "fit failed";
      }
    }
  });

  report.trajectory_lengths = lengths;
  report.truncated_trajectories = static_cast<int>(std::count(truncated.begin(), truncated.end(), 1));
  for (std::size_t c = 0; c < specs.size(); ++c) {
    StudyCell cell;
    cell.scheme = specs[c].label;
    cell.estimator = specs[c].estimator;
    cell.estimates.resize(static_cast<Eigen::Index>(n), p);
    for (std::size_t rep = 0; rep < n; ++rep) {
      const auto& o = outcomes[rep][c];
      cell.estimates.row(static_cast<Eigen::Index>(rep)) = o.estimate.transpose();
      cell.errors.push_back(o.error);
      cell.min_loglik_increments.push_back(o.min_increment);
    }
    summarize(cell, report.truth);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

void write_study_csv(std::ostream& out, const StudyReport& report) {
  out << "parameter,scheme,estimator,bias,sd,n_ok\n" << std::setprecision(17);
  for (const auto& cell : report.cells) {
    for (std::size_t i = 0; i < report.parameters.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      out << report.parameters[i] << ',' << cell.scheme << ',' << estimator_label(cell.estimator) << ','
          << cell.bias(j) << ',' << cell.sd(j) << ',' << cell.n_ok << '\n';
    }
  }
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v(i)));
  return a;
}

}  // namespace

nlohmann::ordered_json study_to_json(const StudyReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "mssf-study";
  j["version"] = 1;
  j["parameters"] = report.parameters;
  j["truth"] = vector_json(report.truth);
  j["trajectory_lengths"] = report.trajectory_lengths;
  j["truncated_trajectories"] = report.truncated_trajectories;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& cell : report.cells) {
    nlohmann::ordered_json c;
    c["scheme"] = cell.scheme;
    c["estimator"] = estimator_label(cell.estimator);
    c["n_ok"] = cell.n_ok;
    c["n_failed"] = cell.n_failed();
    c["quality_flag"] = cell.quality_flag();
    c["bias"] = vector_json(cell.bias);
    c["sd"] = vector_json(cell.sd);
    auto reps = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < cell.estimates.rows(); ++i) {
      nlohmann::ordered_json r;
      r["estimate"] = vector_json(cell.estimates.row(i).transpose());
      r["error"] = cell.errors[i].empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(cell.errors[i]);
      r["min_loglik_increment"] = number_or_null(cell.min_loglik_increments[i]);
      reps.push_back(std::move(r));
    }
    c["replicates"] = std::move(reps);
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  j["notes"] = {
      "bias divides by the number of successful replicates, sd by that number minus one",
      "a reference bias b with reference sd s is matched when |bias| <= |b| + 3 s / sqrt(N); "
      "this Monte Carlo tolerance is our own construction",
      "failed replicates are excluded, never retried; quality_flag marks more than 5% failures",
  };
  return j;
}

EquivalenceReport equivalence_report(const Trajectory& trajectory, const std::vector<Target>& targets,
                                     int num_controls, const std::vector<SamplingScheme>& schemes,
                                     std::uint64_t seed, const EmConfig& em) {
  if (num_controls < 1) throw Error(ErrorCode::InvalidArgument, "equivalence: num_controls must be >= 1");
  std::vector<CellSpec> specs{{Estimator::BcrwDirect, std::nullopt, "bcrw_direct"}};
  for (const auto& s : schemes) specs.push_back({Estimator::Ssf, s, scheme_label(s)});

  EmConfig base = em;
  base.compute_std_errors = true;
  std::vector<int> identity(static_cast<std::size_t>(em.num_states));
  std::iota(identity.begin(), identity.end(), 0);

  EquivalenceReport report;
  std::vector<EquivalenceColumn> columns(specs.size());
  parallel_for(specs.size(), em.threads, [&](std::size_t c) {
    const FitResult fit = fit_one(trajectory, targets, specs[c], num_controls, seed, base);
    auto& col = columns[c];
    col.label = specs[c].estimator == Estimator::BcrwDirect ? "bcrw_direct" : "ssf_" + specs[c].label;
    col.estimates = flatten_fit(fit, identity);
    col.std_errors = flatten_fit_std_errors(fit, identity);
    col.loglik = fit.loglik;
    col.min_loglik_increment = fit.min_loglik_increment;
  });
  report.columns = std::move(columns);

  const auto coefs = CovariateFormula::bcrw(targets).names();
  for (int a = 0; a < em.num_states; ++a) {
    for (int b = 0; b < em.num_states; ++b) {
      if (a != b) report.parameters.push_back("P_" + std::to_string(a + 1) + std::to_string(b + 1));
    }
  }
  for (int s = 0; s < em.num_states; ++s) {
    for (const auto& c : coefs) report.parameters.push_back(c + "[" + std::to_string(s + 1) + "]");
  }
  return report;
}

void write_equivalence_csv(std::ostream& out, const EquivalenceReport& report) {
  out << "parameter";
  for (const auto& c : report.columns) out << ',' << c.label << ',' << c.label << "_se";
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < report.parameters.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    out << report.parameters[i];
    for (const auto& c : report.columns) out << ',' << c.estimates(j) << ',' << c.std_errors(j);
    out << '\n';
  }
}

}  // namespace mssf
