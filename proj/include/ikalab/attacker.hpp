#pragma once

// Active attacker on IKA.2 who controls every link of U_{n-1} and U_n for
// the duration of the key exchange.
//
// The attack leaves every user, and the attacker, holding
//   K = (g_1 ... g_n) . (ghat . s)
// but with mutually inconsistent refresh memories. The exit strategy forges
// two key refreshes that restore a consistent state; the MITM conversion
// instead isolates U_n at the first honest refresh.
//
// Everything the attacker sends is computed from intercepted payloads, her
// own scalars (ghat, hhat, fhat) and random orbit points. The Attacker class
// only sees the Network, never a ParticipantState.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ikalab/group_action.hpp"
#include "ikalab/network.hpp"
#include "ikalab/protocol.hpp"

namespace ikalab {

// Fixed scalars override the seeded draws (golden runs, detection tests).
struct AttackerOptions {
  std::uint64_t seed = 0;
  std::optional<GroupScalar> ghat;
  std::optional<GroupScalar> hhat;
  std::optional<GroupScalar> fhat;
  std::optional<GroupScalar> mitm_hhat;
};

enum class AttackPhase {
  relay_chain,         // (a) waiting for the chain value addressed to U_{n-1}
  await_broadcast,     // (b)
  await_response,      // (c)
  await_key_material,  // (f)
  await_responses,     // (h)
  complete,
};

std::string_view attack_step_label(AttackPhase phase);

struct AttackerState {
  std::uint32_t n = 0;
  std::optional<GroupScalar> ghat;
  std::optional<GroupScalar> hhat;
  std::optional<GroupScalar> fhat;

  std::optional<SetPoint> c_last;  // C_{n-1}, captured in (b); equals E_n
  std::optional<SetPoint> c_prev;  // C_{n-2}, captured in (c)
  std::vector<SetPoint> decoys;    // m_1..m_{n-3}
  // U_n's step-(5) list captured in (f): g_n m_1.., E_{n-1}, C_n, ghat C_{n-1}.
  std::optional<std::vector<SetPoint>> captured_material;
  // Step-(4) responses of U_1..U_{n-2} captured in (h).
  std::vector<std::optional<SetPoint>> low_responses;
  // ghat E_1 .. ghat E_{n-1} as handed out in (i).
  std::optional<std::vector<SetPoint>> ghat_e;

  std::optional<SetPoint> attack_key;
  // Key the attacker currently shares with the group.
  std::optional<SetPoint> current_key;

  AttackPhase phase = AttackPhase::relay_chain;
  int exit_rounds = 0;
};

// Seeded choice of ghat from Z_q* \ {1}. Draws again while ghat . C_{n-1}
// would equal C_{n-2}, since U_n would then see its step-(2) value among
// the step-(4) responses.
GroupScalar select_ghat(const GroupAction& action, std::uint64_t seed, const SetPoint& c_last, const SetPoint& c_prev);

// Decoy responses m_1..m_count, none equal to `avoid`.
std::vector<SetPoint> draw_decoys(const GroupAction& action, std::uint64_t seed, std::uint32_t count,
                                  const SetPoint& avoid);

struct ExitScalars {
  GroupScalar hhat;
  GroupScalar fhat;
};

ExitScalars exit_scalars(const GroupAction& action, const AttackerOptions& options);
// hhat for the MITM conversion, redrawn while hhat . C_n would equal the key
// she is about to share with U_1..U_{n-1}.
GroupScalar mitm_scalar(const GroupAction& action, const AttackerOptions& options, const SetPoint& c_n,
                        const SetPoint& key_with_group);

// ghat . (g_n . C_{n-1}), from the element at position n-1 of the captured
// step-(5) list.
SetPoint compute_attack_key(const GroupAction& action, const AttackerState& state);

struct StepILists {
  std::vector<SetPoint> to_low;         // U_1..U_{n-2}; last entry g_n . C_{n-1}
  std::vector<SetPoint> to_penultimate;  // U_{n-1}; last entry C_{n-1}
};

StepILists step_i_lists(const GroupAction& action, const AttackerState& state);

struct ExitRound1 {
  std::vector<SetPoint> to_low;          // claimed from U_{n-1}
  std::vector<SetPoint> to_penultimate;  // claimed from U_n
  std::vector<SetPoint> to_last;         // claimed from U_{n-1}
};

ExitRound1 exit_round1_lists(const GroupAction& action, const AttackerState& state);
// Same list for everyone: fhat hhat ghat . E_k.
std::vector<SetPoint> exit_round2_list(const GroupAction& action, const AttackerState& state);

struct MitmForward {
  std::vector<SetPoint> to_last;
  SetPoint key_with_group;  // ghat . (g_c' . C_n)
  SetPoint key_with_last;   // hhat . C_n
};

// Refresh from U_c, c <= n-2: what to hand U_n instead. `filler` supplies
// the random orbit points; positions c and n are fixed.
MitmForward convert_to_mitm(const GroupAction& action, const AttackerState& state, const RefreshMsg& refresh,
                            GroupScalar hhat, Rng& filler);

// Refresh from U_{n-1}: the list for U_n that makes it agree with everyone.
std::vector<SetPoint> mitm_apply_ghat(const GroupAction& action, const AttackerState& state,
                                      const RefreshMsg& refresh);

struct MitmOutcome {
  PartyId initiator;
  // c <= n-2: the attacker holds one key with U_1..U_{n-1} and one with U_n.
  std::optional<SetPoint> key_with_group;
  std::optional<SetPoint> key_with_last;
  std::optional<GroupScalar> hhat;
  // c = n-1: the users agree again and the attacker is locked out.
  bool key_lost = false;
};

class Attacker {
 public:
  // Registers with the network and takes control of U_{n-1} and U_n.
  Attacker(const GroupAction& action, Network& network, AttackerOptions options);

  Attacker(const Attacker&) = delete;
  Attacker& operator=(const Attacker&) = delete;

  const AttackerState& state() const { return state_; }
  const AttackerOptions& options() const { return options_; }
  bool attack_complete() const { return state_.phase == AttackPhase::complete; }
  // Throws SequencingError naming the first step whose interception is missing.
  void require_complete() const;

  void forge_exit_round1();
  void forge_exit_round2();
  void forge_exit_refreshes();

  // Wait for the next honest refresh and convert it (see MitmOutcome).
  void arm_mitm();
  const std::optional<MitmOutcome>& mitm_outcome() const { return mitm_; }

  // Relinquish control of the links.
  void withdraw();

 private:
  std::string on_intercept(const Interception& intercepted);
  std::string on_ika(const Interception& intercepted);
  std::string on_refresh(const Interception& intercepted);

  void forge(PartyId claimed, PartyId to, Message msg, const std::string& annotation);
  PartyId last() const { return PartyId{state_.n}; }
  PartyId penultimate() const { return PartyId{state_.n - 1}; }

  const GroupAction& action_;
  Network& network_;
  AttackerOptions options_;
  AttackerState state_;
  bool mitm_armed_ = false;
  std::optional<MitmOutcome> mitm_;
  std::optional<Rng> mitm_rng_;
};

}  // namespace ikalab
