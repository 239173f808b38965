#include "ikalab/protocol.hpp"

#include <algorithm>
#include <charconv>

#include "ikalab/errors.hpp"

namespace ikalab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string encode_list(std::span<const SetPoint> list) {
  std::string out;
  for (const SetPoint& pt : list) {
    if (!out.empty()) out += ' ';
    out += pt.encode();
  }
  return out;
}

std::vector<SetPoint> decode_list(std::string_view text, const GroupAction& action) {
  std::vector<SetPoint> out;
  while (!text.empty()) {
    const auto space = text.find(' ');
    out.push_back(action.decode_point(text.substr(0, space)));
    if (space == std::string_view::npos) break;
    text.remove_prefix(space + 1);
  }
  return out;
}

std::pair<PartyId, std::string_view> split_indexed(std::string_view payload) {
  const auto colon = payload.find(':');
  if (colon == std::string_view::npos) throw ProtocolError("payload '" + std::string(payload) + "' lacks an index");
  std::uint32_t index = 0;
  const auto head = payload.substr(0, colon);
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), index);
  if (ec != std::errc() || ptr != head.data() + head.size() || index == 0) {
    throw ProtocolError("bad party index in payload '" + std::string(payload) + "'");
  }
  return {PartyId{index}, payload.substr(colon + 1)};
}

void require_length(std::span<const SetPoint> list, std::uint32_t n, std::string_view what) {
  if (list.size() != n) {
    throw ProtocolError(std::string(what) + " has " + std::to_string(list.size()) + " entries, expected " +
                        std::to_string(n));
  }
}

}  // namespace

std::string_view message_type(const Message& msg) {
  return std::visit(Overloaded{
                        [](const ChainMsg&) { return std::string_view("chain"); },
                        [](const BroadcastMsg&) { return std::string_view("broadcast"); },
                        [](const ResponseMsg&) { return std::string_view("response"); },
                        [](const KeyMaterialMsg&) { return std::string_view("key-material"); },
                        [](const RefreshMsg&) { return std::string_view("refresh"); },
                    },
                    msg);
}

std::string encode_payload(const Message& msg) {
  return std::visit(
      Overloaded{
          [](const ChainMsg& m) { return std::to_string(m.sender.index) + ":" + m.value.encode(); },
          [](const BroadcastMsg& m) { return m.value.encode(); },
          [](const ResponseMsg& m) { return std::to_string(m.sender.index) + ":" + m.value.encode(); },
          [](const KeyMaterialMsg& m) { return encode_list(m.values); },
          [](const RefreshMsg& m) { return std::to_string(m.initiator.index) + ":" + encode_list(m.values); },
      },
      msg);
}

Message decode_message(std::string_view type, std::string_view payload, const GroupAction& action) {
  if (type == "chain") {
    const auto [id, rest] = split_indexed(payload);
    return ChainMsg{id, action.decode_point(rest)};
  }
  if (type == "broadcast") return BroadcastMsg{action.decode_point(payload)};
  if (type == "response") {
    const auto [id, rest] = split_indexed(payload);
    return ResponseMsg{id, action.decode_point(rest)};
  }
  if (type == "key-material") return KeyMaterialMsg{decode_list(payload, action)};
  if (type == "refresh") {
    const auto [id, rest] = split_indexed(payload);
    return RefreshMsg{id, decode_list(rest, action)};
  }
  throw ProtocolError("unknown message type '" + std::string(type) + "'");
}

std::vector<SetPoint> message_points(const Message& msg) {
  return std::visit(Overloaded{
                        [](const ChainMsg& m) { return std::vector<SetPoint>{m.value}; },
                        [](const BroadcastMsg& m) { return std::vector<SetPoint>{m.value}; },
                        [](const ResponseMsg& m) { return std::vector<SetPoint>{m.value}; },
                        [](const KeyMaterialMsg& m) { return m.values; },
                        [](const RefreshMsg& m) { return m.values; },
                    },
                    msg);
}

const SetPoint& at_position(std::span<const SetPoint> list, std::uint32_t position) {
  if (position < 1 || position > list.size()) {
    throw ProtocolError("position " + std::to_string(position) + " outside list of " + std::to_string(list.size()));
  }
  return list[position - 1];
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::await_chain:
      return "await-chain";
    case Phase::await_broadcast:
      return "await-broadcast";
    case Phase::await_responses:
      return "await-responses";
    case Phase::await_key_material:
      return "await-key-material";
    case Phase::established:
      return "established";
  }
  return "?";
}

ParticipantState make_participant(const GroupAction& action, PartyId id, std::uint32_t n, GroupScalar secret) {
  if (n < 3) throw ProtocolError("group size must be at least 3");
  if (id.index < 1 || id.index > n) throw ProtocolError("party index " + std::to_string(id.index) + " outside [1, n]");
  ParticipantState state;
  state.id = id;
  state.n = n;
  state.secret = action.scalar(secret.value);
  state.base = action.base();
  state.phase = id.index == n ? Phase::await_broadcast : Phase::await_chain;
  if (id.index == n) state.responses.assign(n - 1, std::nullopt);
  return state;
}

SetPoint compute_chain(const GroupAction& action, GroupScalar secret, const SetPoint& prev) {
  return action.act(secret, prev);
}

SetPoint compute_response(const GroupAction& action, GroupScalar secret, const SetPoint& c_last) {
  return action.act(action.invert(secret), c_last);
}

std::vector<SetPoint> assemble_key_material(const GroupAction& action, std::uint32_t n, GroupScalar secret_n,
                                            std::span<const SetPoint> responses, const SetPoint& c_last) {
  if (responses.size() + 1 != n) {
    throw ProtocolError("key material needs " + std::to_string(n - 1) + " responses, got " +
                        std::to_string(responses.size()));
  }
  if (!action.validate_point(c_last)) throw InvalidPointError("C_{n-1} '" + c_last.encode() + "' is not in the orbit");
  std::vector<SetPoint> list;
  list.reserve(responses.size() + 1);
  for (const SetPoint& d : responses) list.push_back(action.act(secret_n, d));
  list.push_back(c_last);
  return list;
}

SetPoint derive_initial_key(const GroupAction& action, GroupScalar secret, const SetPoint& material) {
  return action.act(secret, material);
}

RefreshBuild build_refresh(const GroupAction& action, const ParticipantState& state, GroupScalar new_secret) {
  if (state.phase != Phase::established || !state.memory || !state.key) {
    throw ProtocolError(state.id.label() + " cannot refresh before the key is established");
  }
  const std::vector<SetPoint>& memory = *state.memory;
  std::vector<SetPoint> list;
  list.reserve(memory.size());
  for (std::uint32_t k = 1; k <= memory.size(); ++k) {
    list.push_back(k == state.id.index ? memory[k - 1] : action.act(new_secret, memory[k - 1]));
  }
  ParticipantState next = state;
  next.secret = action.compose(new_secret, state.secret);
  next.key = action.act(new_secret, *state.key);
  next.memory = list;
  return {RefreshMsg{state.id, std::move(list)}, std::move(next)};
}

ParticipantState apply_refresh(const GroupAction& action, const ParticipantState& state, const RefreshMsg& msg) {
  if (state.phase != Phase::established || !state.memory) {
    throw ProtocolError(state.id.label() + " received a refresh before the key is established");
  }
  require_length(msg.values, state.n, "refresh list");
  if (msg.initiator.index < 1 || msg.initiator.index > state.n) {
    throw ProtocolError("refresh initiator outside [1, n]");
  }
  if (msg.initiator == state.id) throw ProtocolError(state.id.label() + " received its own refresh");
  ParticipantState next = state;
  next.refresh_checks.push_back(at_position(msg.values, msg.initiator.index) ==
                                at_position(*state.memory, msg.initiator.index));
  next.key = action.act(state.secret, at_position(msg.values, state.id.index));
  next.memory = msg.values;
  return next;
}

namespace {

StepResult reject(const ParticipantState& state, std::string why) {
  return {state, {}, state.id.label() + " (" + std::string(phase_name(state.phase)) + "): " + std::move(why)};
}

StepResult on_start(const GroupAction& action, const ParticipantState& state) {
  if (state.id.index != 1 || state.phase != Phase::await_chain) return reject(state, "nothing to start");
  ParticipantState next = state;
  const SetPoint c1 = compute_chain(action, state.secret, state.base);
  next.phase = Phase::await_broadcast;
  return {next, {{Destination::to(PartyId{2}), ChainMsg{state.id, c1}}}, std::nullopt};
}

StepResult on_chain(const GroupAction& action, const ParticipantState& state, const ChainMsg& msg) {
  const std::uint32_t i = state.id.index;
  const std::uint32_t n = state.n;
  if (state.phase != Phase::await_chain || i == 1 || i == n) return reject(state, "unexpected chain message");
  if (msg.sender.index != i - 1) return reject(state, "chain value from " + msg.sender.label());
  const SetPoint c_i = compute_chain(action, state.secret, msg.value);
  ParticipantState next = state;
  if (i + 1 < n) {
    next.phase = Phase::await_broadcast;
    return {next, {{Destination::to(PartyId{i + 1}), ChainMsg{state.id, c_i}}}, std::nullopt};
  }
  // U_{n-1}: broadcast C_{n-1} and go straight on to step (4).
  const SetPoint response = compute_response(action, state.secret, c_i);
  next.received_broadcast = c_i;
  next.own_response = response;
  next.phase = Phase::await_key_material;
  return {next,
          {{Destination::broadcast(), BroadcastMsg{c_i}},
           {Destination::to(PartyId{n}), ResponseMsg{state.id, response}}},
          std::nullopt};
}

StepResult on_broadcast(const GroupAction& action, const ParticipantState& state, const BroadcastMsg& msg) {
  if (state.phase != Phase::await_broadcast) return reject(state, "unexpected step-(2) broadcast");
  ParticipantState next = state;
  next.received_broadcast = msg.value;
  if (state.id.index == state.n) {
    next.key = derive_initial_key(action, state.secret, msg.value);
    next.phase = Phase::await_responses;
    return {next, {}, std::nullopt};
  }
  const SetPoint response = compute_response(action, state.secret, msg.value);
  next.own_response = response;
  next.phase = Phase::await_key_material;
  return {next, {{Destination::to(PartyId{state.n}), ResponseMsg{state.id, response}}}, std::nullopt};
}

StepResult on_response(const GroupAction& action, const ParticipantState& state, const ResponseMsg& msg) {
  if (state.phase != Phase::await_responses) return reject(state, "unexpected step-(4) response");
  const std::uint32_t from = msg.sender.index;
  if (from < 1 || from >= state.n) return reject(state, "response from " + msg.sender.label());
  if (state.responses[from - 1]) return reject(state, "duplicate response from " + msg.sender.label());
  if (!action.validate_point(msg.value)) return reject(state, "response carries an invalid point");
  ParticipantState next = state;
  next.responses[from - 1] = msg.value;
  const bool complete = std::all_of(next.responses.begin(), next.responses.end(),
                                    [](const auto& r) { return r.has_value(); });
  if (!complete) return {next, {}, std::nullopt};

  std::vector<SetPoint> responses;
  for (const auto& r : next.responses) responses.push_back(*r);
  std::vector<SetPoint> material = assemble_key_material(action, state.n, state.secret, responses, *next.received_broadcast);
  next.key_material = material;
  next.memory = material;
  next.phase = Phase::established;
  return {next, {{Destination::broadcast(), KeyMaterialMsg{std::move(material)}}}, std::nullopt};
}

StepResult on_key_material(const GroupAction& action, const ParticipantState& state, const KeyMaterialMsg& msg) {
  if (state.phase != Phase::await_key_material) return reject(state, "unexpected step-(5) key material");
  if (msg.values.size() != state.n) return reject(state, "key material of wrong length");
  if (!std::all_of(msg.values.begin(), msg.values.end(), [&](const SetPoint& x) { return action.validate_point(x); })) {
    return reject(state, "key material carries an invalid point");
  }
  ParticipantState next = state;
  next.key = derive_initial_key(action, state.secret, at_position(msg.values, state.id.index));
  next.key_material = msg.values;
  next.memory = msg.values;
  next.phase = Phase::established;
  return {next, {}, std::nullopt};
}

StepResult on_refresh(const GroupAction& action, const ParticipantState& state, const RefreshMsg& msg) {
  if (state.phase != Phase::established) return reject(state, "refresh before the key is established");
  if (msg.values.size() != state.n) return reject(state, "refresh list of wrong length");
  if (msg.initiator.index < 1 || msg.initiator.index > state.n || msg.initiator == state.id) {
    return reject(state, "refresh claims initiator " + msg.initiator.label());
  }
  if (!std::all_of(msg.values.begin(), msg.values.end(), [&](const SetPoint& x) { return action.validate_point(x); })) {
    return reject(state, "refresh carries an invalid point");
  }
  return {apply_refresh(action, state, msg), {}, std::nullopt};
}

}  // namespace

StepResult participant_step(const GroupAction& action, const ParticipantState& state,
                            const std::optional<Message>& incoming) {
  if (!incoming) return on_start(action, state);
  try {
    return std::visit(Overloaded{
                          [&](const ChainMsg& m) { return on_chain(action, state, m); },
                          [&](const BroadcastMsg& m) { return on_broadcast(action, state, m); },
                          [&](const ResponseMsg& m) { return on_response(action, state, m); },
                          [&](const KeyMaterialMsg& m) { return on_key_material(action, state, m); },
                          [&](const RefreshMsg& m) { return on_refresh(action, state, m); },
                      },
                      *incoming);
  } catch (const InvalidPointError& e) {
    return reject(state, e.what());
  } catch (const ContextError& e) {
    return reject(state, e.what());
  }
}

bool CheckReport::all_pass() const {
  for (const auto& check : {v1, v2, v3, v4}) {
    if (check && !*check) return false;
  }
  return true;
}

CheckReport run_checks(const ParticipantState& state) {
  if (state.phase != Phase::established || !state.key_material) {
    throw ProtocolError(state.id.label() + " has not established a key");
  }
  CheckReport report;
  const std::vector<SetPoint>& material = *state.key_material;
  if (state.id.index == state.n) {
    bool distinct = true;
    for (const auto& r : state.responses) distinct = distinct && r != state.received_broadcast;
    report.v2 = distinct;
  } else {
    report.v1 = state.received_broadcast && material.back() == *state.received_broadcast;
    report.v3 = state.own_response && at_position(material, state.id.index) != *state.own_response;
  }
  if (!state.refresh_checks.empty()) {
    report.v4 = std::all_of(state.refresh_checks.begin(), state.refresh_checks.end(), [](bool ok) { return ok; });
  }
  return report;
}

}  // namespace ikalab
