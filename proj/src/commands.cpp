#include "mssf/commands.hpp"

#include "mssf/bcrw.hpp"
#include "mssf/config.hpp"
#include "mssf/emission.hpp"
#include "mssf/errors.hpp"
#include "mssf/fit_io.hpp"
#include "mssf/hmm.hpp"
#include "mssf/io.hpp"
#include "mssf/study.hpp"
#include "mssf/trajectory.hpp"

#include <cstdio>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mssf {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Failure {
  int code;
  std::string message;
};

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct Context {
  const RunConfig& rc;
  std::uint64_t seed;
  int threads;
  fs::path out_dir;
  std::ostream& log;
  ordered_json manifest;

  void record_input(const std::string& role, const fs::path& path, const std::string& bytes) {
    manifest["inputs"].push_back({{"role", role}, {"path", path.generic_string()}, {"fnv1a64", fnv1a_hex(bytes)}});
  }
  void write_output(const std::string& name, const std::string& contents) {
    write_text_file(out_dir / name, contents);
    manifest["outputs"].push_back(name);
  }
  void warn(const std::string& message) {
    log << "warning: " << message << '\n';
    manifest["warnings"].push_back(message);
  }
};

// Runs `fn`, mapping failures to an exit code: configuration and input
// problems are always kExitConfig, anything else gets `code`.
void guarded(int code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Failure&) {
    throw;
  } catch (const Error& e) {
    const bool config_like = e.code() == ErrorCode::Config || e.code() == ErrorCode::Io;
    throw Failure{config_like ? static_cast<int>(kExitConfig) : code, e.what()};
  } catch (const std::exception& e) {
    throw Failure{code, e.what()};
  }
}

const fs::path& require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw Failure{kExitConfig, std::string("config: input.") + key + " is required for this command"};
  return p;
}

const BcrwScenario& require_scenario(const RunConfig& rc) {
  if (!rc.scenario) throw Failure{kExitConfig, "config: a scenario block is required for this command"};
  return *rc.scenario;
}

Trajectory load_trajectory(Context& ctx) {
  const auto& path = require_path(ctx.rc.input.trajectory, "trajectory");
  const auto bytes = read_text_file(path);
  ctx.record_input("trajectory", path, bytes);
  std::istringstream in(bytes);
  const auto points = read_points_csv(in);
  return derive_steps(points);
}

CovariateFormula formula_of(const RunConfig& rc) {
  if (rc.formula.empty()) return CovariateFormula::bcrw(rc.targets);
  CovariateFormula f;
  for (const auto& name : rc.formula) f.terms.push_back(CovariateTerm::parse(name));
  return f;
}

bool has_distance_terms(const std::vector<std::string>& names) {
  return std::find(names.begin(), names.end(), "log_distance") != names.end() &&
         std::find(names.begin(), names.end(), "neg_distance") != names.end();
}

struct Sets {
  std::vector<ChoiceSet> sets;
  std::vector<std::string> names;
};

// Choice sets from input.choice_sets when given, else sampled around the
// trajectory from sub-stream "controls" of the run seed.
Sets obtain_choice_sets(Context& ctx) {
  Sets out;
  if (!ctx.rc.input.choice_sets.empty()) {
    const auto bytes = read_text_file(ctx.rc.input.choice_sets);
    ctx.record_input("choice_sets", ctx.rc.input.choice_sets, bytes);
    std::istringstream in(bytes);
    out.sets = read_choice_sets_csv(in, &out.names);
    return out;
  }
  const Trajectory traj = load_trajectory(ctx);
  const CovariateFormula formula = formula_of(ctx.rc);
  CovariateContext context;
  context.targets = ctx.rc.targets;
  std::optional<LandscapeGrid> grid;
  if (formula.needs_landscape()) {
    const auto& path = require_path(ctx.rc.input.landscape, "landscape");
    ctx.record_input("landscape", path, read_text_file(path));
    grid = load_landscape(path);
    context.landscape = &*grid;
  }
  out.sets = build_choice_sets(traj, context, formula, ctx.rc.scheme, ctx.rc.num_controls,
                               derive_seed(ctx.seed, "controls"));
  out.names = formula.names();
  return out;
}

std::vector<int> time_index_of(const std::vector<ChoiceSet>& sets) {
  std::vector<int> idx;
  idx.reserve(sets.size());
  for (const auto& s : sets) idx.push_back(s.time_index);
  return idx;
}

void cmd_simulate(Context& ctx) {
  const auto& scenario = require_scenario(ctx.rc);
  SimulatedTrack track;
  guarded(kExitSimulation, [&] {
    Rng rng = make_rng(ctx.seed, "simulate");
    track = simulate_trajectory(rng, scenario);
  });
  std::ostringstream traj, states;
  write_points_csv(traj, track.trajectory.points);
  write_states_csv(states, track.step_states);
  ctx.write_output("trajectory.csv", traj.str());
  ctx.write_output("states.csv", states.str());
  ctx.manifest["scenario"] = scenario_to_json(scenario);
  ctx.manifest["num_steps"] = track.trajectory.num_steps();
  ctx.manifest["truncated"] = track.truncated;
  if (track.truncated) ctx.warn("trajectory truncated at max_steps before reaching a target");
}

void cmd_sample_controls(Context& ctx) {
  Sets s;
  guarded(kExitFit, [&] { s = obtain_choice_sets(ctx); });
  std::ostringstream os;
  write_choice_sets_csv(os, s.sets, s.names);
  ctx.write_output("choice_sets.csv", os.str());
  ctx.manifest["sampling"] = scheme_to_json(ctx.rc.scheme);
  ctx.manifest["num_controls"] = ctx.rc.num_controls;
  ctx.manifest["formula"] = s.names;
}

void cmd_fit(Context& ctx) {
  Sets s;
  guarded(kExitFit, [&] { s = obtain_choice_sets(ctx); });
  const bool correct = is_parametric(ctx.rc.scheme) && has_distance_terms(s.names);
  FitResult fit;
  guarded(kExitFit, [&] {
    const SsfEmission model(s.sets, s.names);
    EmConfig em = ctx.rc.em;
    em.seed = ctx.seed;
    em.threads = ctx.threads;
    if (correct) em.ordering.distance_shift = std::get<ParametricScheme>(ctx.rc.scheme).eta_tilde;
    fit = em_fit(model, em);
    if (correct) correct_fit_for_sampling(fit, ctx.rc.scheme);
  });
  ordered_json j = fit_to_json(fit);
  j["sampling"] = scheme_to_json(ctx.rc.scheme);
  j["num_controls"] = ctx.rc.num_controls;
  j["bias_corrected"] = correct;
  std::ostringstream smoothed;
  write_smoothed_csv(smoothed, fit.smooth_probs, time_index_of(s.sets));
  ctx.write_output("fit.json", j.dump(2) + "\n");
  ctx.write_output("smoothed.csv", smoothed.str());
  ctx.manifest["sampling"] = j["sampling"];
  ctx.manifest["num_controls"] = ctx.rc.num_controls;
  ctx.manifest["formula"] = s.names;
  ctx.manifest["bias_corrected"] = correct;
  for (const auto& w : fit.warnings) ctx.warn(w);
}

void cmd_decode(Context& ctx) {
  const auto& fit_path = require_path(ctx.rc.input.fit, "fit");
  FitResult fit;
  nlohmann::json doc;
  guarded(kExitConfig, [&] {
    const auto bytes = read_text_file(fit_path);
    ctx.record_input("fit", fit_path, bytes);
    doc = nlohmann::json::parse(bytes);
    fit = fit_from_json(doc);
  });
  Sets s;
  guarded(kExitFit, [&] { s = obtain_choice_sets(ctx); });
  if (s.names != fit.coefficient_names) {
    throw Failure{kExitConfig, "decode: choice-set covariates do not match the fitted coefficients"};
  }
  // emissions need the raw conditional-logit coefficients
  if (doc.value("bias_corrected", false) && doc.contains("sampling")) {
    const auto scheme = parse_scheme(doc["sampling"]);
    if (const auto* p = std::get_if<ParametricScheme>(&scheme)) {
      correct_fit_for_sampling(fit, ParametricScheme{-p->eta_tilde});
    }
  }
  PosteriorBundle post;
  guarded(kExitFit, [&] {
    fit.hmm.validate();
    const SsfEmission model(s.sets, s.names);
    post = filter_smooth(emissions(model, fit.state_params), fit.hmm);
  });
  std::ostringstream os;
  write_smoothed_csv(os, post.smoothed, time_index_of(s.sets));
  ctx.write_output("smoothed.csv", os.str());
  ctx.manifest["loglik"] = post.loglik;
}

void cmd_study(Context& ctx, int& exit_code) {
  if (!ctx.rc.study) throw Failure{kExitConfig, "config: a study block is required for this command"};
  StudyConfig sc = *ctx.rc.study;
  sc.seed = ctx.seed;
  sc.threads = ctx.threads;
  StudyReport report;
  guarded(kExitFit, [&] { report = run_study(sc); });
  std::ostringstream csv;
  write_study_csv(csv, report);
  ctx.write_output("study.csv", csv.str());
  ctx.write_output("study.json", study_to_json(report).dump(2) + "\n");
  ctx.manifest["scenario"] = scenario_to_json(sc.scenario);
  for (const auto& cell : report.cells) {
    if (cell.quality_flag()) {
      ctx.warn("more than 5% of replicates failed for " + cell.scheme + "/" + estimator_label(cell.estimator));
    }
  }
  if (report.any_quality_flag()) exit_code = kExitStudyQuality;
}

void cmd_equivalence(Context& ctx) {
  Trajectory traj;
  if (!ctx.rc.input.trajectory.empty()) {
    guarded(kExitConfig, [&] { traj = load_trajectory(ctx); });
  } else {
    const auto& scenario = require_scenario(ctx.rc);
    guarded(kExitSimulation, [&] {
      Rng rng = make_rng(ctx.seed, "simulate");
      traj = simulate_trajectory(rng, scenario).trajectory;
      if (traj.num_steps() < 3) throw Error(ErrorCode::InvalidArgument, "simulated trajectory too short");
    });
  }
  std::vector<SamplingScheme> schemes{UniformScheme{15.0}, ParametricScheme{}};
  if (ctx.rc.study) schemes = ctx.rc.study->schemes;
  EquivalenceReport report;
  guarded(kExitFit, [&] {
    EmConfig em = ctx.rc.em;
    em.threads = ctx.threads;
    report = equivalence_report(traj, ctx.rc.targets, ctx.rc.num_controls, schemes, ctx.seed, em);
  });
  std::ostringstream csv;
  write_equivalence_csv(csv, report);
  ctx.write_output("equivalence.csv", csv.str());
  ctx.manifest["num_controls"] = ctx.rc.num_controls;
  auto cols = ordered_json::array();
  for (const auto& c : report.columns) {
    cols.push_back({{"label", c.label}, {"loglik", c.loglik}, {"min_loglik_increment", c.min_loglik_increment}});
  }
  ctx.manifest["columns"] = std::move(cols);
}

}  // namespace

int run_command(const CommandOptions& options, std::ostream& log) {
  static const std::vector<std::string> known{"simulate", "sample-controls", "fit", "decode", "study", "equivalence"};
  if (std::find(known.begin(), known.end(), options.command) == known.end()) {
    log << "error: unknown command '" << options.command << "'\n";
    return kExitConfig;
  }
  RunConfig rc;
  try {
    rc = load_run_config(options.config);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::uint64_t seed = options.seed.value_or(rc.seed.value_or(1));
  const int threads = options.threads.value_or(rc.threads.value_or(1));
  if (threads < 1) {
    log << "error: --threads must be >= 1\n";
    return kExitConfig;
  }
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) {
    log << "error: cannot create " << options.out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }

  Context ctx{rc, seed, threads, options.out_dir, log, ordered_json::object()};
  ctx.manifest["format"] = "mssf-manifest";
  ctx.manifest["version"] = 1;
  ctx.manifest["command"] = options.command;
  ctx.manifest["seed"] = seed;
  ctx.manifest["config"] = rc.source;
  ctx.manifest["inputs"] = ordered_json::array();
  ctx.manifest["outputs"] = ordered_json::array();
  ctx.manifest["warnings"] = ordered_json::array();

  int exit_code = kExitOk;
  try {
    guarded(kExitFit, [&] {
      if (options.command == "simulate") cmd_simulate(ctx);
      else if (options.command == "sample-controls") cmd_sample_controls(ctx);
      else if (options.command == "fit") cmd_fit(ctx);
      else if (options.command == "decode") cmd_decode(ctx);
      else if (options.command == "study") cmd_study(ctx, exit_code);
      else cmd_equivalence(ctx);
    });
    ctx.manifest["status"] = exit_code == kExitOk ? "ok" : "quality";
  } catch (const Failure& f) {
    exit_code = f.code;
    ctx.manifest["status"] = "error";
    ctx.manifest["error"] = f.message;
    log << "error: " << f.message << '\n';
  }
  ctx.manifest["exit_code"] = exit_code;
  try {
    write_text_file(options.out_dir / "manifest.json", ctx.manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    if (exit_code == kExitOk) exit_code = kExitConfig;
  }
  return exit_code;
}

}  // namespace mssf
