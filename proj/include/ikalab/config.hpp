#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ikalab/group_action.hpp"

namespace ikalab {

enum class Scenario {
  honest,
  refresh,
  active_attack,
  attack_no_ghat,
  exit_strategy,
  refresh_failure,
  mitm_conversion,
  passive,
};

std::string_view scenario_name(Scenario scenario);
std::optional<Scenario> parse_scenario(std::string_view name);

struct ScenarioConfig {
  Scenario scenario = Scenario::honest;
  std::uint32_t n = 3;
  ActionParams params = ActionParams::preset("modexp");
  // Preset name, or "custom" for explicit parameters.
  std::string backend = "modexp";
  std::uint64_t seed = 0;

  std::optional<std::vector<std::uint64_t>> secrets;
  std::optional<std::vector<std::uint64_t>> refresh_secrets;
  std::optional<std::uint64_t> ghat;
  std::optional<std::uint64_t> hhat;
  std::optional<std::uint64_t> fhat;
  std::optional<std::uint64_t> mitm_hhat;
  // Refresh initiator for refresh, refresh-failure and mitm-conversion.
  std::optional<std::uint32_t> initiator;

  std::filesystem::path out_dir = ".";
  std::string transcript_file = "transcript.jsonl";
  std::string report_file = "report.json";
};

// Command-line overrides, applied on top of the document before validation.
struct ConfigOverrides {
  std::optional<std::string> scenario;
  std::optional<std::uint32_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::uint64_t>> fixed_secrets;
};

// Parses the YAML scenario document (see configs/scenario.schema.yaml) and
// validates it. Throws ConfigError naming the offending field.
ScenarioConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// "3,4,5" -> {3, 4, 5}. Throws ConfigError on bad input.
std::vector<std::uint64_t> parse_scalar_list(std::string_view text, const std::string& field);

}  // namespace ikalab
