#pragma once

// Verification report shared by `ikalab run` and `ikalab verify`. Both paths
// fill a RunObservation and hand it to build_report, so a replayed transcript
// yields a byte-identical report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ikalab/config.hpp"
#include "ikalab/group_action.hpp"
#include "ikalab/network.hpp"
#include "ikalab/protocol.hpp"

namespace ikalab {

struct StageSnapshot {
  std::string stage;
  std::vector<std::optional<SetPoint>> keys;
  std::optional<SetPoint> attacker_key;
  bool memories_identical = false;
};

// Everything a scenario produced. Scalars are the ones actually used,
// whether fixed by the config or drawn from the seed.
struct RunObservation {
  std::vector<GroupScalar> secrets;
  std::vector<GroupScalar> refresh_secrets;
  std::optional<GroupScalar> ghat;
  std::optional<GroupScalar> hhat;
  std::optional<GroupScalar> fhat;
  std::optional<GroupScalar> mitm_hhat;

  std::vector<StageSnapshot> stages;
  std::vector<ParticipantState> parties;  // final states, U_1 first
  std::vector<std::vector<std::string>> violations;
  // MITM conversion from U_c, c <= n-2: the key shared with U_n alone.
  std::optional<SetPoint> attacker_key_last;
  Transcript transcript;
};

struct Verdict {
  std::string name;
  bool passed = false;
};

struct VerificationReport {
  std::string scenario;
  std::uint32_t n = 0;
  std::string backend;
  std::uint64_t seed = 0;

  std::vector<std::uint64_t> secrets;
  std::vector<std::uint64_t> refresh_secrets;
  std::optional<std::uint64_t> ghat;
  std::optional<std::uint64_t> hhat;
  std::optional<std::uint64_t> fhat;
  std::optional<std::uint64_t> mitm_hhat;

  std::vector<StageSnapshot> stages;
  std::vector<std::optional<SetPoint>> keys;
  std::optional<SetPoint> attacker_key;
  std::optional<SetPoint> attacker_key_last;
  // All user keys present and equal.
  bool agreement = false;
  std::optional<SetPoint> oracle_key;
  // Passive scenario: whether the key value itself appears in any payload.
  // In a small orbit this can happen by coincidence (C_i = K when
  // g_{i+1} ... g_n = 1 mod q), so it is reported, not judged.
  std::optional<bool> key_on_wire;
  std::vector<std::optional<CheckReport>> checks;
  std::vector<std::vector<std::string>> violations;
  std::vector<Verdict> verdicts;

  bool passed() const;
};

// (prod scalars) . s, the closed form every key in a scenario should match.
SetPoint closed_form_key(const GroupAction& action, const std::vector<GroupScalar>& scalars);

// Scalars whose product gives the expected final key of the scenario. For
// refresh-failure this is the initiator's view; for the MITM conversion it is
// the key of U_1..U_{n-1}.
std::vector<GroupScalar> expected_key_scalars(const ScenarioConfig& config, const RunObservation& observation);

VerificationReport build_report(const ScenarioConfig& config, const GroupAction& action,
                                const RunObservation& observation);

// Pretty-printed JSON with a trailing newline.
std::string render_report(const VerificationReport& report);

}  // namespace ikalab
