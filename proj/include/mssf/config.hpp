#pragma once

#include "mssf/bcrw.hpp"
#include "mssf/em.hpp"
#include "mssf/sampler.hpp"
#include "mssf/study.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mssf {

inline constexpr int kConfigVersion = 1;

struct InputPaths {
  std::filesystem::path trajectory;
  std::filesystem::path landscape;
  std::filesystem::path choice_sets;
  std::filesystem::path fit;
};

/// Parsed run configuration. Every block is optional; commands check for
/// the ones they need. Relative input paths are resolved against the
/// directory of the config file.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<BcrwScenario> scenario;
  SamplingScheme scheme{UniformScheme{}};
  int num_controls{500};
  /// Covariate term names; empty means the BCRW-equivalent formula.
  std::vector<std::string> formula;
  std::vector<Target> targets;
  EmConfig em;
  std::optional<StudyConfig> study;
  InputPaths input;
  /// The document as read, echoed into manifests.
  nlohmann::json source;
};

/// Throws Error(Config) on any schema violation, including unknown keys.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

BcrwScenario parse_scenario(const nlohmann::json& j);
SamplingScheme parse_scheme(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const BcrwScenario& scenario);
nlohmann::ordered_json scheme_to_json(const SamplingScheme& scheme);

}  // namespace mssf
