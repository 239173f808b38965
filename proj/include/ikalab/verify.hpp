#pragma once

// Offline verifier: replays a transcript against the configuration with
// fresh participant state machines and recomputes the attacker's keys from
// the intercepted payloads. Nothing from the original run is reused except
// the transcript itself.

#include <filesystem>

#include "ikalab/config.hpp"
#include "ikalab/network.hpp"
#include "ikalab/report.hpp"

namespace ikalab {

// Throws VerificationError when an entry contradicts the replay (a message
// no party produced, a rejected delivery logged as accepted, a forged list
// that differs from the one recomputed, stages out of order).
RunObservation replay_transcript(const ScenarioConfig& config, const Transcript& transcript);

VerificationReport verify_transcript(const ScenarioConfig& config, const Transcript& transcript);
VerificationReport verify_transcript_file(const ScenarioConfig& config, const std::filesystem::path& path);

}  // namespace ikalab
