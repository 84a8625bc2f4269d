#include "mssf/config.hpp"

#include "mssf/errors.hpp"
#include "mssf/io.hpp"

#include <algorithm>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace mssf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Config, where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(where, "unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

int get_int(const json& j, const std::string& where) {
  const auto v = get_integer(j, where);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(where, "out of range");
  return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], where);
  return v;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = get_vector(j[static_cast<std::size_t>(r)], where);
    if (row.size() != cols) fail(where, "ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

std::vector<Target> parse_targets(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<Target> targets;
  for (const auto& t : j) {
    check_keys(t, {"name", "x", "y"}, where);
    if (!t.contains("name") || !t.contains("x") || !t.contains("y")) fail(where, "target needs name, x, y");
    targets.push_back({get_string(t["name"], where + ".name"),
                       {get_number(t["x"], where + ".x"), get_number(t["y"], where + ".y")}});
  }
  return targets;
}

std::vector<BcrwState> parse_states(const json& j) {
  const std::string where = "scenario.states";
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array");
  std::vector<BcrwState> states;
  for (const auto& s : j) {
    check_keys(s, {"kappas", "shape", "scale"}, where);
    if (!s.contains("kappas") || !s.contains("shape") || !s.contains("scale")) {
      fail(where, "state needs kappas, shape, scale");
    }
    BcrwState st;
    st.kappas = get_vector(s["kappas"], where + ".kappas");
    st.gamma = {get_number(s["shape"], where + ".shape"), get_number(s["scale"], where + ".scale")};
    states.push_back(std::move(st));
  }
  return states;
}


EmConfig parse_em(const json& j, EmConfig em) {
  check_keys(j,
             {"num_states", "short_runs", "short_iterations", "max_iterations", "tol", "std_errors",
              "initial_distribution", "canonical_order"},
             "em");
  if (j.contains("num_states")) em.num_states = get_int(j["num_states"], "em.num_states");
  if (j.contains("short_runs")) em.n_short_runs = get_int(j["short_runs"], "em.short_runs");
  if (j.contains("short_iterations")) em.short_iters = get_int(j["short_iterations"], "em.short_iterations");
  if (j.contains("max_iterations")) em.long_max_iters = get_int(j["max_iterations"], "em.max_iterations");
  if (j.contains("tol")) em.tol = get_number(j["tol"], "em.tol");
  if (j.contains("std_errors")) em.compute_std_errors = get_bool(j["std_errors"], "em.std_errors");
  if (j.contains("initial_distribution")) {
    em.initial_distribution = get_vector(j["initial_distribution"], "em.initial_distribution");
  }
  if (j.contains("canonical_order")) em.ordering.enabled = get_bool(j["canonical_order"], "em.canonical_order");
  return em;
}

}  // namespace

BcrwScenario parse_scenario(const json& j) {
  check_keys(j,
             {"preset", "map_size", "transition", "initial", "states", "targets", "start_region", "stop_radius",
              "max_steps"},
             "scenario");
  BcrwScenario s;
  if (j.contains("preset")) {
    const auto preset = get_string(j["preset"], "scenario.preset");
    if (preset != "two_state_reference") fail("scenario.preset", "unknown preset '" + preset + "'");
    const double size =
        j.contains("map_size") ? get_number(j["map_size"], "scenario.map_size") : BcrwScenario::kDefaultMapSize;
    s = BcrwScenario::two_state_reference(size);
  } else {
    if (j.contains("map_size")) fail("scenario.map_size", "only valid with a preset");
    if (!j.contains("transition") || !j.contains("states")) {
      fail("scenario", "needs a preset or both transition and states");
    }
  }
  if (j.contains("states")) s.states = parse_states(j["states"]);
  if (j.contains("transition")) {
    s.hmm.transition = get_matrix(j["transition"], "scenario.transition");
    if (!j.contains("initial")) s.hmm.initial = HmmParams::uniform(s.hmm.transition.rows()).initial;
  }
  if (j.contains("initial")) s.hmm.initial = get_vector(j["initial"], "scenario.initial");
  if (j.contains("targets")) s.targets = parse_targets(j["targets"], "scenario.targets");
  if (j.contains("start_region")) {
    const auto& b = j["start_region"];
    check_keys(b, {"x_min", "y_min", "x_max", "y_max"}, "scenario.start_region");
    if (b.contains("x_min")) s.start_region.x_min = get_number(b["x_min"], "scenario.start_region.x_min");
    if (b.contains("y_min")) s.start_region.y_min = get_number(b["y_min"], "scenario.start_region.y_min");
    if (b.contains("x_max")) s.start_region.x_max = get_number(b["x_max"], "scenario.start_region.x_max");
    if (b.contains("y_max")) s.start_region.y_max = get_number(b["y_max"], "scenario.start_region.y_max");
  }
  if (j.contains("stop_radius")) s.stop_radius = get_number(j["stop_radius"], "scenario.stop_radius");
  if (j.contains("max_steps")) s.max_steps = get_int(j["max_steps"], "scenario.max_steps");
  try {
    s.validate();
  } catch (const Error& e) {
    fail("scenario", e.what());
  }
  return s;
}

SamplingScheme parse_scheme(const json& j) {
  check_keys(j, {"scheme", "max_distance", "eta_tilde"}, "sampling");
  const auto kind = j.contains("scheme") ? get_string(j["scheme"], "sampling.scheme") : std::string("uniform");
  if (kind == "uniform") {
    if (j.contains("eta_tilde")) fail("sampling.eta_tilde", "only valid for the parametric scheme");
    UniformScheme u;
    if (j.contains("max_distance")) u.max_distance = get_number(j["max_distance"], "sampling.max_distance");
    if (!(u.max_distance > 0.0)) fail("sampling.max_distance", "must be positive");
    return u;
  }
  if (kind == "parametric") {
    if (j.contains("max_distance")) fail("sampling.max_distance", "only valid for the uniform scheme");
    ParametricScheme p;
    if (j.contains("eta_tilde")) {
      const auto v = get_vector(j["eta_tilde"], "sampling.eta_tilde");
      if (v.size() != 2) fail("sampling.eta_tilde", "expected two numbers");
      p.eta_tilde = v;
    }
    try {
      natural_to_gamma(p.eta_tilde);
    } catch (const Error& e) {
      fail("sampling.eta_tilde", e.what());
    }
    return p;
  }
  fail("sampling.scheme", "expected 'uniform' or 'parametric'");
}

nlohmann::ordered_json scheme_to_json(const SamplingScheme& scheme) {
  nlohmann::ordered_json j;
  if (const auto* u = std::get_if<UniformScheme>(&scheme)) {
    j["scheme"] = "uniform";
    j["max_distance"] = u->max_distance;
  } else {
    const auto& p = std::get<ParametricScheme>(scheme);
    j["scheme"] = "parametric";
    j["eta_tilde"] = {p.eta_tilde(0), p.eta_tilde(1)};
  }
  return j;
}

nlohmann::ordered_json scenario_to_json(const BcrwScenario& s) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < s.hmm.transition.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < s.hmm.transition.cols(); ++c) row.push_back(s.hmm.transition(r, c));
    rows.push_back(std::move(row));
  }
  j["transition"] = std::move(rows);
  j["initial"] = std::vector<double>(s.hmm.initial.data(), s.hmm.initial.data() + s.hmm.initial.size());
  auto states = nlohmann::ordered_json::array();
  for (const auto& st : s.states) {
    nlohmann::ordered_json o;
    o["kappas"] = std::vector<double>(st.kappas.data(), st.kappas.data() + st.kappas.size());
    o["shape"] = st.gamma.shape;
    o["scale"] = st.gamma.scale;
    states.push_back(std::move(o));
  }
  j["states"] = std::move(states);
  auto targets = nlohmann::ordered_json::array();
  for (const auto& t : s.targets) targets.push_back({{"name", t.name}, {"x", t.location.x}, {"y", t.location.y}});
  j["targets"] = std::move(targets);
  j["start_region"] = {{"x_min", s.start_region.x_min},
                       {"y_min", s.start_region.y_min},
                       {"x_max", s.start_region.x_max},
                       {"y_max", s.start_region.y_max}};
  j["stop_radius"] = s.stop_radius;
  j["max_steps"] = s.max_steps;
  return j;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc,
             {"version", "seed", "threads", "scenario", "sampling", "num_controls", "formula", "targets", "em",
              "study", "input"},
             "config");
  if (!doc.contains("version")) fail("config", "missing 'version'");
  if (get_int(doc["version"], "version") != kConfigVersion) {
    fail("version", "unsupported version (expected " + std::to_string(kConfigVersion) + ")");
  }
  RunConfig rc;
  rc.source = doc;
  if (doc.contains("seed")) rc.seed = get_seed(doc["seed"], "seed");
  if (doc.contains("threads")) {
    rc.threads = get_int(doc["threads"], "threads");
    if (*rc.threads < 1) fail("threads", "must be >= 1");
  }
  if (doc.contains("scenario")) rc.scenario = parse_scenario(doc["scenario"]);
  if (doc.contains("sampling")) rc.scheme = parse_scheme(doc["sampling"]);
  if (doc.contains("num_controls")) {
    rc.num_controls = get_int(doc["num_controls"], "num_controls");
    if (rc.num_controls < 1) fail("num_controls", "must be >= 1");
  }
  if (doc.contains("formula")) {
    const auto& f = doc["formula"];
    if (!f.is_array()) fail("formula", "expected an array of term names");
    for (const auto& t : f) {
      const auto name = get_string(t, "formula");
      try {
        CovariateTerm::parse(name);
      } catch (const Error& e) {
        fail("formula", e.what());
      }
      rc.formula.push_back(name);
    }
  }
  if (doc.contains("targets")) rc.targets = parse_targets(doc["targets"], "targets");
  else if (rc.scenario) rc.targets = rc.scenario->targets;

  if (rc.scenario) rc.em.num_states = static_cast<int>(rc.scenario->num_states());
  if (doc.contains("em")) rc.em = parse_em(doc["em"], rc.em);
  try {
    rc.em.validate();
  } catch (const Error& e) {
    fail("em", e.what());
  }

  if (doc.contains("study")) {
    const auto& s = doc["study"];
    check_keys(s, {"replicates", "num_controls", "schemes", "estimators"}, "study");
    if (!rc.scenario) fail("study", "requires a scenario block");
    StudyConfig sc;
    sc.scenario = *rc.scenario;
    sc.em = rc.em;
    sc.num_controls = rc.num_controls;
    if (s.contains("replicates")) sc.replicates = get_int(s["replicates"], "study.replicates");
    if (s.contains("num_controls")) sc.num_controls = get_int(s["num_controls"], "study.num_controls");
    if (s.contains("schemes")) {
      if (!s["schemes"].is_array()) fail("study.schemes", "expected an array");
      sc.schemes.clear();
      for (const auto& x : s["schemes"]) sc.schemes.push_back(parse_scheme(x));
    } else {
      sc.schemes = {rc.scheme};
    }
    if (s.contains("estimators")) {
      if (!s["estimators"].is_array()) fail("study.estimators", "expected an array");
      sc.estimate_ssf = sc.estimate_bcrw = false;
      for (const auto& e : s["estimators"]) {
        const auto name = get_string(e, "study.estimators");
        if (name == "ssf") sc.estimate_ssf = true;
        else if (name == "bcrw_direct") sc.estimate_bcrw = true;
        else fail("study.estimators", "unknown estimator '" + name + "'");
      }
    }
    try {
      sc.validate();
    } catch (const Error& e) {
      fail("study", e.what());
    }
    rc.study = std::move(sc);
  }

  if (doc.contains("input")) {
    const auto& in = doc["input"];
    check_keys(in, {"trajectory", "landscape", "choice_sets", "fit"}, "input");
    auto path_of = [&](const char* key) -> std::filesystem::path {
      if (!in.contains(key)) return {};
      std::filesystem::path p = get_string(in[key], std::string("input.") + key);
      return p.is_absolute() ? p : base_dir / p;
    };
    rc.input = {path_of("trajectory"), path_of("landscape"), path_of("choice_sets"), path_of("fit")};
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail("config", e.what());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

}  // namespace mssf
