#include "ikalab/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <yaml-cpp/yaml.h>

#include "ikalab/errors.hpp"

namespace ikalab {

namespace {

constexpr std::array<std::pair<Scenario, std::string_view>, 8> kScenarioNames{{
    {Scenario::honest, "honest"},
    {Scenario::refresh, "refresh"},
    {Scenario::active_attack, "active-attack"},
    {Scenario::attack_no_ghat, "attack-no-ghat"},
    {Scenario::exit_strategy, "exit-strategy"},
    {Scenario::refresh_failure, "refresh-failure"},
    {Scenario::mitm_conversion, "mitm-conversion"},
    {Scenario::passive, "passive"},
}};

void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown key");
  }
}

template <class T>
T read(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected a non-negative integer");
  }
}

std::string read_string(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, "expected a string");
  return node.as<std::string>();
}

std::vector<std::uint64_t> read_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(field, "expected a list of integers");
  std::vector<std::uint64_t> out;
  for (const auto& item : node) out.push_back(read<std::uint64_t>(item, field));
  return out;
}

ActionParams read_params(const YAML::Node& node) {
  if (!node.IsMap()) throw ConfigError("params", "expected a mapping");
  if (!node["kind"]) throw ConfigError("params.kind", "missing");
  const std::string kind = read_string(node["kind"], "params.kind");
  auto need = [&](const char* key) {
    if (!node[key]) throw ConfigError(std::string("params.") + key, "missing");
    return read<std::uint64_t>(node[key], std::string("params.") + key);
  };
  try {
    if (kind == "modexp") {
      reject_unknown_keys(node, {"kind", "p", "q", "s"}, "params.");
      return ActionParams::modexp({.p = need("p"), .q = need("q"), .s = need("s")});
    }
    if (kind == "elliptic") {
      reject_unknown_keys(node, {"kind", "p", "a", "b", "s", "q"}, "params.");
      const std::vector<std::uint64_t> s = node["s"] ? read_list(node["s"], "params.s") : std::vector<std::uint64_t>{};
      if (s.size() != 2) throw ConfigError("params.s", "expected [x, y]");
      return ActionParams::elliptic(
          {.p = need("p"), .a = need("a"), .b = need("b"), .s = {s[0], s[1]}, .q = need("q")});
    }
  } catch (const ConfigError& e) {
    if (e.field().rfind("params.", 0) == 0) throw;
    throw ConfigError("params." + e.field(), e.what());
  }
  throw ConfigError("params.kind", "expected modexp or elliptic");
}

void check_scalar(std::uint64_t value, std::uint64_t q, const std::string& field) {
  if (value < 1 || value >= q) {
    throw ConfigError(field, std::to_string(value) + " outside [1, " + std::to_string(q - 1) + "]");
  }
}

ScenarioConfig build(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("document", "expected a mapping at top level");
  reject_unknown_keys(root,
                      {"scenario", "n", "backend", "params", "seed", "secrets", "refresh_secrets", "attacker",
                       "initiator", "output"},
                      "");
  ScenarioConfig config;

  if (!root["scenario"]) throw ConfigError("scenario", "missing");
  const std::string name = read_string(root["scenario"], "scenario");
  const auto scenario = parse_scenario(name);
  if (!scenario) throw ConfigError("scenario", "unknown scenario '" + name + "'");
  config.scenario = *scenario;

  if (!root["n"]) throw ConfigError("n", "missing");
  const auto n = read<std::int64_t>(root["n"], "n");
  if (n < 3) throw ConfigError("n", "group size must be at least 3");
  if (n > 1000) throw ConfigError("n", "group size above 1000 is not supported");
  config.n = static_cast<std::uint32_t>(n);

  if (root["backend"] && root["params"]) throw ConfigError("backend", "give either backend or params, not both");
  if (root["params"]) {
    config.params = read_params(root["params"]);
    config.backend = "custom";
  } else if (root["backend"]) {
    config.backend = read_string(root["backend"], "backend");
    config.params = ActionParams::preset(config.backend);
  }
  const std::uint64_t q = config.params.order();
  if (q < 3) throw ConfigError("params.q", "q must be at least 3 so that Z_q* has a non-identity element");

  if (root["seed"]) config.seed = read<std::uint64_t>(root["seed"], "seed");

  if (root["secrets"]) {
    config.secrets = read_list(root["secrets"], "secrets");
    if (config.secrets->size() != config.n) {
      throw ConfigError("secrets", "expected " + std::to_string(config.n) + " values, got " +
                                       std::to_string(config.secrets->size()));
    }
    for (const auto v : *config.secrets) check_scalar(v, q, "secrets");
  }
  if (root["refresh_secrets"]) {
    config.refresh_secrets = read_list(root["refresh_secrets"], "refresh_secrets");
    for (const auto v : *config.refresh_secrets) check_scalar(v, q, "refresh_secrets");
  }

  if (const auto attacker = root["attacker"]) {
    if (!attacker.IsMap()) throw ConfigError("attacker", "expected a mapping");
    reject_unknown_keys(attacker, {"ghat", "hhat", "fhat", "mitm_hhat"}, "attacker.");
    auto scalar = [&](const char* key) -> std::optional<std::uint64_t> {
      if (!attacker[key]) return std::nullopt;
      const std::string field = std::string("attacker.") + key;
      const auto v = read<std::uint64_t>(attacker[key], field);
      check_scalar(v, q, field);
      return v;
    };
    config.ghat = scalar("ghat");
    config.hhat = scalar("hhat");
    config.fhat = scalar("fhat");
    config.mitm_hhat = scalar("mitm_hhat");
  }

  if (root["initiator"]) {
    const auto c = read<std::int64_t>(root["initiator"], "initiator");
    if (c < 1 || c > n) throw ConfigError("initiator", "must lie in [1, n]");
    config.initiator = static_cast<std::uint32_t>(c);
  }
  if (config.scenario == Scenario::mitm_conversion) {
    if (!config.initiator) throw ConfigError("c", "mitm-conversion requires the refresh initiator c (key 'initiator')");
    if (*config.initiator == config.n) {
      throw ConfigError("initiator", "no MITM conversion is constructed for a refresh initiated by U_n");
    }
  }
  if (config.scenario == Scenario::attack_no_ghat && config.ghat && *config.ghat != 1) {
    throw ConfigError("attacker.ghat", "attack-no-ghat forces ghat = 1");
  }

  if (const auto output = root["output"]) {
    if (!output.IsMap()) throw ConfigError("output", "expected a mapping");
    reject_unknown_keys(output, {"dir", "transcript", "report"}, "output.");
    if (output["dir"]) config.out_dir = read_string(output["dir"], "output.dir");
    if (output["transcript"]) config.transcript_file = read_string(output["transcript"], "output.transcript");
    if (output["report"]) config.report_file = read_string(output["report"], "output.report");
  }
  return config;
}

}  // namespace

std::string_view scenario_name(Scenario scenario) {
  for (const auto& [value, name] : kScenarioNames) {
    if (value == scenario) return name;
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (const auto& [value, label] : kScenarioNames) {
    if (label == name) return value;
  }
  return std::nullopt;
}

std::vector<std::uint64_t> parse_scalar_list(std::string_view text, const std::string& field) {
  std::vector<std::uint64_t> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(field, "expected comma-separated integers");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

ScenarioConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("document", e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (overrides.scenario) root["scenario"] = *overrides.scenario;
  if (overrides.n) root["n"] = *overrides.n;
  if (overrides.seed) root["seed"] = *overrides.seed;
  if (overrides.backend) {
    root.remove("params");
    root["backend"] = *overrides.backend;
  }
  if (overrides.out_dir) root["output"]["dir"] = *overrides.out_dir;
  if (overrides.fixed_secrets) {
    YAML::Node list(YAML::NodeType::Sequence);
    for (const auto v : *overrides.fixed_secrets) list.push_back(v);
    root["secrets"] = list;
  }
  return build(root);
}

ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

}  // namespace ikalab
