#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ikalab/attacker.hpp"
#include "ikalab/config.hpp"
#include "ikalab/report.hpp"
#include "ikalab/session.hpp"

namespace ikalab {

enum class StageKind { ika, exit_round1, exit_round2, refresh, mitm_refresh };

struct PlannedStage {
  std::string label;  // also the network stage annotation
  StageKind kind = StageKind::ika;
  std::uint32_t initiator = 0;  // refresh stages only
};

// Stage sequence of a scenario; the verifier walks the same plan.
//   honest, passive, active-attack, attack-no-ghat: ika
//   refresh, refresh-failure: ika, "refresh U<c>"
//   exit-strategy: ika, exit-1, exit-2, "post-exit U1" .. "post-exit U<n>"
//   mitm-conversion: ika, "mitm U<c>"
std::vector<PlannedStage> stage_plan(const ScenarioConfig& config);
bool scenario_has_attacker(Scenario scenario);

std::vector<GroupScalar> scenario_secrets(const ScenarioConfig& config, const GroupAction& action);
// Fixed refresh_secrets first, then seeded draws.
RefreshSecretSource refresh_secret_source(const ScenarioConfig& config, const GroupAction& action);
// Keys U_c held at the end of each recorded stage.
std::vector<SetPoint> held_keys(const std::vector<StageSnapshot>& stages, std::uint32_t c);
AttackerOptions attacker_options(const ScenarioConfig& config, const GroupAction& action);

// act(prod secrets . prod extra, s).
SetPoint oracle_expected_key(const GroupAction& action, std::span<const GroupScalar> secrets,
                             std::span<const GroupScalar> extra, const SetPoint& s);

struct ScenarioResult {
  RunObservation observation;
  VerificationReport report;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kVerdictMismatch = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kIoError = 3;
}  // namespace exit_code

// Writes <out_dir>/<transcript> and <out_dir>/<report>. Returns the exit
// code: kOk iff every verdict holds, kIoError if a file cannot be written.
int write_outputs(const ScenarioConfig& config, const ScenarioResult& result);

}  // namespace ikalab
