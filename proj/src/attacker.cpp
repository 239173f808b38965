#include "ikalab/attacker.hpp"

#include <algorithm>

#include "ikalab/errors.hpp"

namespace ikalab {

std::string_view attack_step_label(AttackPhase phase) {
  switch (phase) {
    case AttackPhase::relay_chain:
      return "(a)";
    case AttackPhase::await_broadcast:
      return "(b)";
    case AttackPhase::await_response:
      return "(c)";
    case AttackPhase::await_key_material:
      return "(f)";
    case AttackPhase::await_responses:
      return "(h)";
    case AttackPhase::complete:
      return "(j)";
  }
  return "?";
}

GroupScalar select_ghat(const GroupAction& action, std::uint64_t seed, const SetPoint& c_last,
                        const SetPoint& c_prev) {
  Rng rng(seed, stream::kAttackerGhat);
  GroupScalar ghat = action.random_nonidentity_scalar(rng);
  for (std::uint64_t attempt = 0; attempt < 4 * action.order() && action.act(ghat, c_last) == c_prev; ++attempt) {
    ghat = action.random_nonidentity_scalar(rng);
  }
  return ghat;
}

std::vector<SetPoint> draw_decoys(const GroupAction& action, std::uint64_t seed, std::uint32_t count,
                                  const SetPoint& avoid) {
  Rng rng(seed, stream::kAttackerDecoys);
  std::vector<SetPoint> decoys;
  for (std::uint32_t i = 0; i < count; ++i) {
    SetPoint m = action.random_orbit_point(rng, action.base());
    for (std::uint64_t attempt = 0; attempt < 4 * action.order() && m == avoid; ++attempt) {
      m = action.random_orbit_point(rng, action.base());
    }
    decoys.push_back(m);
  }
  return decoys;
}

ExitScalars exit_scalars(const GroupAction& action, const AttackerOptions& options) {
  Rng rng(options.seed, stream::kAttackerExit);
  const GroupScalar hhat = action.random_nonidentity_scalar(rng);
  const GroupScalar fhat = action.random_nonidentity_scalar(rng);
  return {options.hhat.value_or(hhat), options.fhat.value_or(fhat)};
}

GroupScalar mitm_scalar(const GroupAction& action, const AttackerOptions& options, const SetPoint& c_n,
                        const SetPoint& key_with_group) {
  if (options.mitm_hhat) return *options.mitm_hhat;
  Rng rng(options.seed, stream::kAttackerMitm);
  GroupScalar hhat = action.random_nonidentity_scalar(rng);
  for (std::uint64_t attempt = 0; attempt < 4 * action.order() && action.act(hhat, c_n) == key_with_group; ++attempt) {
    hhat = action.random_nonidentity_scalar(rng);
  }
  return hhat;
}

namespace {

const std::vector<SetPoint>& captured(const AttackerState& state, const char* step) {
  if (!state.captured_material) throw SequencingError(step, "U_n's step-(5) list was never captured");
  return *state.captured_material;
}

const std::vector<SetPoint>& ghat_e(const AttackerState& state, const char* step) {
  if (!state.ghat_e) throw SequencingError(step, "the attack has not reached step (i)");
  return *state.ghat_e;
}

}  // namespace

SetPoint compute_attack_key(const GroupAction& action, const AttackerState& state) {
  if (!state.ghat) throw SequencingError("(d)", "ghat was never chosen");
  return action.act(*state.ghat, at_position(captured(state, "(f)"), state.n - 1));
}

StepILists step_i_lists(const GroupAction& action, const AttackerState& state) {
  const std::uint32_t n = state.n;
  const auto& material = captured(state, "(f)");
  if (!state.ghat) throw SequencingError("(d)", "ghat was never chosen");
  if (!state.c_last) throw SequencingError("(b)", "C_{n-1} was never captured");
  std::vector<SetPoint> list;
  for (std::uint32_t k = 1; k + 2 <= n; ++k) {
    const auto& r = state.low_responses.at(k - 1);
    if (!r) throw SequencingError("(h)", "no step-(4) response from U" + std::to_string(k));
    list.push_back(action.act(*state.ghat, *r));
  }
  // ghat E_{n-1}, from g_n . C_{n-2} at position n-2 of U_n's list.
  list.push_back(action.act(*state.ghat, at_position(material, n - 2)));

  StepILists lists{list, list};
  lists.to_low.push_back(at_position(material, n - 1));
  lists.to_penultimate.push_back(*state.c_last);
  return lists;
}

ExitRound1 exit_round1_lists(const GroupAction& action, const AttackerState& state) {
  const std::uint32_t n = state.n;
  const auto& ge = ghat_e(state, "exit-1");
  const auto& material = captured(state, "exit-1");
  if (!state.hhat || !state.fhat || !state.ghat) throw SequencingError("exit-1", "exit scalars not chosen");
  const GroupScalar h = *state.hhat;
  const GroupScalar fh = action.compose(*state.fhat, h);
  const GroupScalar hg = action.compose(h, *state.ghat);
  const GroupScalar fhg = action.compose(fh, *state.ghat);
  const SetPoint& e_n = *state.c_last;
  const SetPoint& c_n = at_position(material, n - 1);

  ExitRound1 round;
  for (std::uint32_t k = 1; k <= n - 2; ++k) round.to_low.push_back(action.act(h, ge[k - 1]));
  round.to_low.push_back(ge[n - 2]);
  round.to_low.push_back(action.act(fhg, e_n));

  round.to_penultimate.push_back(action.act(fh, ge[0]));
  for (std::uint32_t k = 2; k <= n - 1; ++k) round.to_penultimate.push_back(action.act(h, ge[k - 1]));
  round.to_penultimate.push_back(e_n);

  round.to_last.push_back(action.act(fh, ge[0]));
  for (std::uint32_t k = 2; k <= n - 2; ++k) round.to_last.push_back(action.act(h, ge[k - 1]));
  round.to_last.push_back(c_n);
  round.to_last.push_back(action.act(hg, e_n));
  return round;
}

std::vector<SetPoint> exit_round2_list(const GroupAction& action, const AttackerState& state) {
  const auto& ge = ghat_e(state, "exit-2");
  if (!state.hhat || !state.fhat || !state.ghat) throw SequencingError("exit-2", "exit scalars not chosen");
  const GroupScalar fh = action.compose(*state.fhat, *state.hhat);
  std::vector<SetPoint> list;
  for (const SetPoint& x : ge) list.push_back(action.act(fh, x));
  list.push_back(action.act(action.compose(fh, *state.ghat), *state.c_last));
  return list;
}

MitmForward convert_to_mitm(const GroupAction& action, const AttackerState& state, const RefreshMsg& refresh,
                            GroupScalar hhat, Rng& filler) {
  const std::uint32_t n = state.n;
  const std::uint32_t c = refresh.initiator.index;
  if (c < 1 || c > n - 2) {
    throw SequencingError("mitm", "conversion needs an initiator in [1, n-2], got " + refresh.initiator.label());
  }
  if (state.exit_rounds > 0) throw SequencingError("mitm", "exit refreshes were already forged");
  if (!state.ghat || !state.c_last) throw SequencingError("mitm", "the attack did not complete");
  const auto& material = captured(state, "mitm");
  if (refresh.values.size() != n) throw ProtocolError("refresh list of wrong length");

  std::vector<SetPoint> list;
  for (std::uint32_t k = 1; k <= n; ++k) {
    if (k == c) {
      list.push_back(at_position(material, c));
    } else if (k == n) {
      list.push_back(action.act(hhat, *state.c_last));
    } else {
      list.push_back(action.random_orbit_point(filler, action.base()));
    }
  }
  return {std::move(list), action.act(*state.ghat, at_position(refresh.values, n)),
          action.act(hhat, at_position(material, n - 1))};
}

std::vector<SetPoint> mitm_apply_ghat(const GroupAction& action, const AttackerState& state,
                                      const RefreshMsg& refresh) {
  const std::uint32_t n = state.n;
  if (refresh.initiator.index != n - 1) {
    throw SequencingError("mitm", "expected a refresh from U" + std::to_string(n - 1));
  }
  if (!state.ghat) throw SequencingError("mitm", "the attack did not complete");
  const auto& material = captured(state, "mitm");
  if (refresh.values.size() != n) throw ProtocolError("refresh list of wrong length");
  std::vector<SetPoint> list = refresh.values;
  // U_n must find its own held value at the initiator's position.
  list[n - 2] = at_position(material, n - 1);
  list[n - 1] = action.act(*state.ghat, refresh.values[n - 1]);
  return list;
}

// ---------------------------------------------------------------------------
// Attacker

Attacker::Attacker(const GroupAction& action, Network& network, AttackerOptions options)
    : action_(action), network_(network), options_(options) {
  state_.n = network.group_size();
  if (state_.n < 3) throw ProtocolError("the attack needs n >= 3");
  network_.register_attacker([this](const Interception& i) { return on_intercept(i); });
  network_.set_policy({{penultimate(), last()}, true});
}

void Attacker::require_complete() const {
  if (!attack_complete()) {
    throw SequencingError(std::string(attack_step_label(state_.phase)), "expected interception did not occur");
  }
}

void Attacker::withdraw() {
  InterpositionPolicy policy = network_.policy();
  policy.active = false;
  network_.set_policy(policy);
}

void Attacker::arm_mitm() {
  require_complete();
  mitm_armed_ = true;
  mitm_rng_.emplace(options_.seed, stream::kAttackerFiller);
}

void Attacker::forge(PartyId claimed, PartyId to, Message msg, const std::string& annotation) {
  network_.forge_as(Endpoint::attacker(), claimed, to, std::move(msg), annotation);
}

std::string Attacker::on_intercept(const Interception& intercepted) {
  if (state_.phase != AttackPhase::complete) return on_ika(intercepted);
  if (mitm_armed_ && std::holds_alternative<RefreshMsg>(intercepted.message)) return on_refresh(intercepted);

  // Nothing planned for this message: pass it on untouched.
  const PartyId from = intercepted.from.party_id();
  if (intercepted.to) {
    forge(from, intercepted.to->party_id(), intercepted.message, "relay");
  } else {
    network_.forge_as(Endpoint::attacker(), from, std::nullopt, intercepted.message, "relay");
  }
  return "relay";
}

std::string Attacker::on_ika(const Interception& intercepted) {
  const std::uint32_t n = state_.n;
  const std::string step(attack_step_label(state_.phase));
  auto unexpected = [&]() {
    return SequencingError(step, "unexpected " + std::string(message_type(intercepted.message)) + " from " +
                                     intercepted.from.label());
  };
  if (intercepted.from.is_attacker()) throw unexpected();
  const PartyId from = intercepted.from.party_id();

  switch (state_.phase) {
    case AttackPhase::relay_chain: {
      // (a) Step (1) runs as usual; the last chain hop enters U_{n-1}'s link.
      if (!std::holds_alternative<ChainMsg>(intercepted.message) || from.index != n - 2) throw unexpected();
      forge(from, penultimate(), intercepted.message, "(a)");
      state_.phase = AttackPhase::await_broadcast;
      return "(a)";
    }
    case AttackPhase::await_broadcast: {
      // (b) Hold back U_{n-1}'s broadcast of C_{n-1}.
      const auto* msg = std::get_if<BroadcastMsg>(&intercepted.message);
      if (!msg || from != penultimate() || intercepted.to) throw unexpected();
      state_.c_last = msg->value;
      state_.phase = AttackPhase::await_response;
      return "(b)";
    }
    case AttackPhase::await_response: {
      // (c) U_{n-1}'s response is g_{n-1}^{-1} . C_{n-1} = C_{n-2}.
      const auto* msg = std::get_if<ResponseMsg>(&intercepted.message);
      if (!msg || from != penultimate() || msg->sender != from) throw unexpected();
      state_.c_prev = msg->value;

      // (d) U_n gets ghat . C_{n-1} as its step-(2) value.
      state_.ghat = options_.ghat ? *options_.ghat : select_ghat(action_, options_.seed, *state_.c_last, *state_.c_prev);
      const SetPoint fake_broadcast = action_.act(*state_.ghat, *state_.c_last);
      forge(penultimate(), last(), BroadcastMsg{fake_broadcast}, "(d)");

      // (e) Responses m_1..m_{n-3}, C_{n-2}, C_{n-1} in claimed-sender order.
      state_.decoys = draw_decoys(action_, options_.seed, n - 3, fake_broadcast);
      for (std::uint32_t k = 1; k <= n - 3; ++k) {
        forge(PartyId{k}, last(), ResponseMsg{PartyId{k}, state_.decoys[k - 1]}, "(e)");
      }
      forge(PartyId{n - 2}, last(), ResponseMsg{PartyId{n - 2}, *state_.c_prev}, "(e)");
      forge(penultimate(), last(), ResponseMsg{penultimate(), *state_.c_last}, "(e)");
      state_.phase = AttackPhase::await_key_material;
      return "(c)";
    }
    case AttackPhase::await_key_material: {
      // (f) U_n's step-(5) broadcast yields the key; (g) release the held
      // broadcast to U_1..U_{n-2} as g_n . C_{n-1}.
      const auto* msg = std::get_if<KeyMaterialMsg>(&intercepted.message);
      if (!msg || from != last() || intercepted.to || msg->values.size() != n) throw unexpected();
      state_.captured_material = msg->values;
      state_.attack_key = compute_attack_key(action_, state_);
      state_.current_key = state_.attack_key;
      const SetPoint c_n = at_position(msg->values, n - 1);
      for (std::uint32_t i = 1; i <= n - 2; ++i) forge(penultimate(), PartyId{i}, BroadcastMsg{c_n}, "(g)");
      state_.low_responses.assign(n - 2, std::nullopt);
      state_.phase = AttackPhase::await_responses;
      return "(f)";
    }
    case AttackPhase::await_responses: {
      // (h) Collect the responses of U_1..U_{n-2}; (i) answer with ghat
      // applied, last entry fixed per recipient.
      const auto* msg = std::get_if<ResponseMsg>(&intercepted.message);
      if (!msg || from.index > n - 2 || msg->sender != from || state_.low_responses[from.index - 1]) {
        throw unexpected();
      }
      state_.low_responses[from.index - 1] = msg->value;
      const bool all_in = std::all_of(state_.low_responses.begin(), state_.low_responses.end(),
                                      [](const auto& r) { return r.has_value(); });
      if (!all_in) return "(h)";

      StepILists lists = step_i_lists(action_, state_);
      state_.ghat_e = std::vector<SetPoint>(lists.to_low.begin(), lists.to_low.end() - 1);
      for (std::uint32_t i = 1; i <= n - 2; ++i) forge(last(), PartyId{i}, KeyMaterialMsg{lists.to_low}, "(i)");
      forge(last(), penultimate(), KeyMaterialMsg{lists.to_penultimate}, "(i)");
      state_.phase = AttackPhase::complete;
      return "(h)";
    }
    case AttackPhase::complete:
      break;
  }
  throw unexpected();
}

std::string Attacker::on_refresh(const Interception& intercepted) {
  const std::uint32_t n = state_.n;
  const auto& refresh = std::get<RefreshMsg>(intercepted.message);
  const std::uint32_t c = refresh.initiator.index;
  if (c == n) throw SequencingError("mitm", "no conversion for a refresh initiated by U" + std::to_string(n));

  if (c == n - 1) {
    for (std::uint32_t i = 1; i <= n - 2; ++i) forge(penultimate(), PartyId{i}, refresh, "mitm");
    forge(penultimate(), last(), RefreshMsg{refresh.initiator, mitm_apply_ghat(action_, state_, refresh)}, "mitm");
    mitm_ = MitmOutcome{refresh.initiator, std::nullopt, std::nullopt, std::nullopt, true};
    return "mitm";
  }

  if (!intercepted.to) throw SequencingError("mitm", "refresh from U" + std::to_string(c) + " diverted as a whole");
  const PartyId to = intercepted.to->party_id();
  if (to != last()) {
    forge(refresh.initiator, to, refresh, "mitm");
    return "mitm";
  }
  const GroupScalar hhat = mitm_scalar(action_, options_, at_position(captured(state_, "mitm"), n - 1),
                                      action_.act(*state_.ghat, at_position(refresh.values, n)));
  MitmForward forward = convert_to_mitm(action_, state_, refresh, hhat, *mitm_rng_);
  forge(refresh.initiator, last(), RefreshMsg{refresh.initiator, forward.to_last}, "mitm");
  state_.current_key = forward.key_with_group;
  mitm_ = MitmOutcome{refresh.initiator, forward.key_with_group, forward.key_with_last, hhat, false};
  return "mitm";
}

void Attacker::forge_exit_round1() {
  require_complete();
  if (state_.exit_rounds != 0) throw SequencingError("exit-1", "exit refreshes already forged");
  if (!network_.policy().controls(penultimate()) || !network_.policy().controls(last())) {
    throw SequencingError("exit-1", "control of U_{n-1} and U_n is required");
  }
  const ExitScalars scalars = exit_scalars(action_, options_);
  state_.hhat = scalars.hhat;
  state_.fhat = scalars.fhat;
  const ExitRound1 round = exit_round1_lists(action_, state_);
  const std::uint32_t n = state_.n;
  for (std::uint32_t i = 1; i <= n - 2; ++i) {
    forge(penultimate(), PartyId{i}, RefreshMsg{penultimate(), round.to_low}, "exit-1");
  }
  forge(last(), penultimate(), RefreshMsg{last(), round.to_penultimate}, "exit-1");
  forge(penultimate(), last(), RefreshMsg{penultimate(), round.to_last}, "exit-1");
  state_.current_key = action_.act(*state_.hhat, *state_.attack_key);
  state_.exit_rounds = 1;
}

void Attacker::forge_exit_round2() {
  if (state_.exit_rounds != 1) throw SequencingError("exit-2", "round 1 has not been forged");
  const std::vector<SetPoint> list = exit_round2_list(action_, state_);
  const std::uint32_t n = state_.n;
  for (std::uint32_t i = 1; i <= n - 2; ++i) forge(last(), PartyId{i}, RefreshMsg{last(), list}, "exit-2");
  forge(PartyId{1}, penultimate(), RefreshMsg{PartyId{1}, list}, "exit-2");
  forge(PartyId{1}, last(), RefreshMsg{PartyId{1}, list}, "exit-2");
  state_.current_key = action_.act(*state_.fhat, *state_.current_key);
  state_.exit_rounds = 2;
}

void Attacker::forge_exit_refreshes() {
  forge_exit_round1();
  forge_exit_round2();
}

}  // namespace ikalab
