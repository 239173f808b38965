#pragma once

// Honest participants of the IKA.2 initial key agreement and its key
// refresh, written as pure transition functions over ParticipantState.
//
// With secrets g_1..g_n and public base s:
//   C_i = (g_1 ... g_i) . s                  chain value after user i
//   D_i = g_i^{-1} . C_{n-1}                 step-(4) response of user i
//   E_k = (prod_{j != k} g_j) . s            k-th entry of the key material
//   K   = C_n = (g_1 ... g_n) . s
//
// Positions in key-material and refresh lists are 1-based in the protocol
// description; the vectors here are 0-based, use at_position() to index.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ikalab/group_action.hpp"

namespace ikalab {

struct PartyId {
  std::uint32_t index = 1;

  std::string label() const { return "U" + std::to_string(index); }
  friend auto operator<=>(const PartyId&, const PartyId&) = default;
};

struct ChainMsg {
  PartyId sender;
  SetPoint value;
  friend bool operator==(const ChainMsg&, const ChainMsg&) = default;
};

struct BroadcastMsg {
  SetPoint value;
  friend bool operator==(const BroadcastMsg&, const BroadcastMsg&) = default;
};

struct ResponseMsg {
  PartyId sender;
  SetPoint value;
  friend bool operator==(const ResponseMsg&, const ResponseMsg&) = default;
};

struct KeyMaterialMsg {
  std::vector<SetPoint> values;
  friend bool operator==(const KeyMaterialMsg&, const KeyMaterialMsg&) = default;
};

struct RefreshMsg {
  PartyId initiator;
  std::vector<SetPoint> values;
  friend bool operator==(const RefreshMsg&, const RefreshMsg&) = default;
};

using Message = std::variant<ChainMsg, BroadcastMsg, ResponseMsg, KeyMaterialMsg, RefreshMsg>;

// "chain", "broadcast", "response", "key-material", "refresh".
std::string_view message_type(const Message& msg);

// Payload text: "<index>:<point>" for chain/response, "<point>" for
// broadcast, space-separated points for key-material, and
// "<initiator>:<points>" for refresh.
std::string encode_payload(const Message& msg);
Message decode_message(std::string_view type, std::string_view payload, const GroupAction& action);

// Every point carried by a message, in payload order.
std::vector<SetPoint> message_points(const Message& msg);

const SetPoint& at_position(std::span<const SetPoint> list, std::uint32_t position);

enum class Phase { await_chain, await_broadcast, await_responses, await_key_material, established };

std::string_view phase_name(Phase phase);

struct Destination {
  std::optional<PartyId> party;  // nullopt means broadcast to every other party

  static Destination broadcast() { return {}; }
  static Destination to(PartyId id) { return {id}; }
  bool is_broadcast() const { return !party.has_value(); }
  friend bool operator==(const Destination&, const Destination&) = default;
};

struct Outbound {
  Destination to;
  Message message;
  friend bool operator==(const Outbound&, const Outbound&) = default;
};

struct ParticipantState {
  PartyId id;
  std::uint32_t n = 0;
  GroupScalar secret;
  Phase phase = Phase::await_chain;
  SetPoint base = SetPoint::residue(0);

  // The value this user believes is C_{n-1}: the step-(2) broadcast it
  // received, or for U_{n-1} the value it broadcast itself.
  std::optional<SetPoint> received_broadcast;
  std::optional<SetPoint> own_response;
  // U_n only: step-(4) responses indexed by claimed sender 1..n-1.
  std::vector<std::optional<SetPoint>> responses;
  // Step-(5) list as received (or, for U_n, as assembled).
  std::optional<std::vector<SetPoint>> key_material;
  std::optional<std::vector<SetPoint>> memory;
  std::optional<SetPoint> key;
  // Outcome of the position check for every refresh applied so far.
  std::vector<bool> refresh_checks;
};

// Throws ProtocolError unless n >= 3 and 1 <= id <= n.
ParticipantState make_participant(const GroupAction& action, PartyId id, std::uint32_t n, GroupScalar secret);

SetPoint compute_chain(const GroupAction& action, GroupScalar secret, const SetPoint& prev);
SetPoint compute_response(const GroupAction& action, GroupScalar secret, const SetPoint& c_last);
// responses are D_1..D_{n-1} in sender order; the result has n entries.
std::vector<SetPoint> assemble_key_material(const GroupAction& action, std::uint32_t n, GroupScalar secret_n,
                                            std::span<const SetPoint> responses, const SetPoint& c_last);
SetPoint derive_initial_key(const GroupAction& action, GroupScalar secret, const SetPoint& material);

struct RefreshBuild {
  RefreshMsg message;
  ParticipantState state;
};

RefreshBuild build_refresh(const GroupAction& action, const ParticipantState& state, GroupScalar new_secret);
ParticipantState apply_refresh(const GroupAction& action, const ParticipantState& state, const RefreshMsg& msg);

struct StepResult {
  ParticipantState state;
  std::vector<Outbound> outbound;
  // Set when the incoming message was rejected; state is then unchanged.
  std::optional<std::string> violation;
};

// One transition of the IKA.2 / refresh phase machine. incoming = nullopt
// starts the protocol at U_1.
StepResult participant_step(const GroupAction& action, const ParticipantState& state,
                            const std::optional<Message>& incoming);

// Local consistency checks a participant can run on its own view.
//   V1  last entry of the step-(5) list equals the step-(2) value it knows
//   V2  (U_n) no step-(4) response equals the step-(2) value it received
//   V3  own entry of the step-(5) list differs from its own response
//   V4  every refresh carried the previously held value at the initiator's position
// nullopt marks a check that does not apply to this participant.
struct CheckReport {
  std::optional<bool> v1;
  std::optional<bool> v2;
  std::optional<bool> v3;
  std::optional<bool> v4;

  bool all_pass() const;
  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

CheckReport run_checks(const ParticipantState& state);

}  // namespace ikalab
