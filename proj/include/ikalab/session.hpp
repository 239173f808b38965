#pragma once

// One simulated group: a Network plus n honest parties. The party accessors
// are the inspection hook used by reports and tests; the Attacker is handed
// the network only.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ikalab/attacker.hpp"
#include "ikalab/group_action.hpp"
#include "ikalab/network.hpp"
#include "ikalab/party.hpp"

namespace ikalab {

// Seeded secrets g_1..g_n, each from Z_q* \ {1}.
std::vector<GroupScalar> draw_user_secrets(const GroupAction& action, std::uint32_t n, std::uint64_t seed);

// Refresh secrets of one scenario, drawn in order from the refresh stream.
// The initiator redraws while the new key would repeat a key it has already
// held; in a small group a run of refreshes otherwise returns to an old key
// about once in q-1 tries.
class RefreshSecretSource {
 public:
  RefreshSecretSource(const GroupAction& action, std::uint64_t seed, std::vector<GroupScalar> fixed = {});

  GroupScalar next(const SetPoint& current_key, std::span<const SetPoint> held);

 private:
  const GroupAction& action_;
  Rng rng_;
  std::vector<GroupScalar> fixed_;
  std::size_t used_ = 0;
};

class Session {
 public:
  Session(GroupAction action, std::vector<GroupScalar> secrets);

  const GroupAction& action() const { return action_; }
  std::uint32_t n() const { return static_cast<std::uint32_t>(parties_.size()); }
  Network& network() { return *network_; }
  const Network& network() const { return *network_; }

  HonestParty& party(std::uint32_t index) { return *parties_.at(index - 1); }
  const HonestParty& party(std::uint32_t index) const { return *parties_.at(index - 1); }

  // U_1 emits C_1; run() then drives the exchange.
  void start_ika() { party(1).start(); }
  const Transcript& run() { return network_->run_until_quiescent(); }

  bool all_established() const;
  // Key of every party, U_1 first. Throws ProtocolError if any is missing.
  std::vector<SetPoint> keys() const;
  std::vector<CheckReport> checks() const;
  std::vector<std::vector<SetPoint>> memories() const;

 private:
  GroupAction action_;
  std::unique_ptr<Network> network_;
  std::vector<std::unique_ptr<HonestParty>> parties_;
};

struct AttackOutcome {
  SetPoint attacker_key;
  std::vector<SetPoint> user_keys;  // oracle view, not available to the attacker
  std::vector<CheckReport> checks;
  std::vector<std::vector<SetPoint>> memories;
  std::vector<GroupScalar> secrets;
  AttackerState attacker;
  Transcript transcript;
};

// Full attack (a)-(j) on a fresh group. Secrets default to
// draw_user_secrets(seed); options.seed is overwritten with `seed`.
AttackOutcome execute_ika_attack(std::uint32_t n, const ActionParams& params, std::uint64_t seed,
                                 AttackerOptions options = {},
                                 std::optional<std::vector<GroupScalar>> secrets = std::nullopt);

// Honest run with no interposition; only the transcript is exposed.
Transcript passive_eavesdrop(std::uint32_t n, const ActionParams& params, std::uint64_t seed,
                             std::optional<std::vector<GroupScalar>> secrets = std::nullopt);

}  // namespace ikalab
