#include "ikalab/verify.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "ikalab/attacker.hpp"
#include "ikalab/errors.hpp"
#include "ikalab/rng.hpp"
#include "ikalab/scenario.hpp"

namespace ikalab {

namespace {

std::string fingerprint(const Endpoint& from, const Message& msg) {
  return from.label() + "|" + std::string(message_type(msg)) + "|" + encode_payload(msg);
}

class Replay {
 public:
  Replay(const ScenarioConfig& config, const Transcript& transcript)
      : config_(config),
        transcript_(transcript),
        action_(config.params),
        plan_(stage_plan(config)),
        options_(attacker_options(config, action_)),
        has_attacker_(scenario_has_attacker(config.scenario)) {
    attacker_.n = config.n;
    obs_.secrets = scenario_secrets(config, action_);
    for (std::uint32_t i = 1; i <= config.n; ++i) {
      states_.push_back(make_participant(action_, PartyId{i}, config.n, obs_.secrets[i - 1]));
    }
    obs_.violations.resize(config.n);
  }

  RunObservation run() {
    for (const TranscriptEntry& entry : transcript_) {
      if (current_ < 0 || entry.stage != plan_[current_].label) enter_stage(entry);
      process(entry);
    }
    if (current_ + 1 != static_cast<int>(plan_.size())) {
      throw VerificationError("transcript ends before stage '" + plan_[current_ + 1].label + "'");
    }
    close_stage();

    obs_.ghat = attacker_.ghat;
    obs_.hhat = attacker_.hhat;
    obs_.fhat = attacker_.fhat;
    obs_.parties = states_;
    obs_.transcript = transcript_;
    return std::move(obs_);
  }

 private:
  ParticipantState& state(std::uint32_t index) { return states_.at(index - 1); }

  [[noreturn]] void fail(const TranscriptEntry& entry, const std::string& what) const {
    throw VerificationError("entry " + std::to_string(entry.seq) + ": " + what);
  }

  void close_stage() {
    StageSnapshot snap{.stage = plan_[current_].label, .keys = {}, .attacker_key = std::nullopt,
                       .memories_identical = true};
    for (const auto& s : states_) {
      snap.keys.push_back(s.key);
      if (!s.memory || s.memory != states_.front().memory) snap.memories_identical = false;
    }
    if (has_attacker_) snap.attacker_key = attacker_.current_key;
    obs_.stages.push_back(std::move(snap));
  }

  void enter_stage(const TranscriptEntry& entry) {
    if (current_ >= 0) close_stage();
    ++current_;
    forged_lists_.clear();
    if (current_ >= static_cast<int>(plan_.size()) || entry.stage != plan_[current_].label) {
      fail(entry, "unexpected stage '" + entry.stage + "'");
    }
    const PlannedStage& stage = plan_[current_];
    switch (stage.kind) {
      case StageKind::ika:
        break;
      case StageKind::exit_round1: {
        require_attack(entry);
        const ExitScalars scalars = exit_scalars(action_, options_);
        attacker_.hhat = scalars.hhat;
        attacker_.fhat = scalars.fhat;
        const ExitRound1 lists = exit_round1_lists(action_, attacker_);
        const std::uint32_t n = config_.n;
        for (std::uint32_t i = 1; i <= n - 2; ++i) expect_forged(PartyId{i}, lists.to_low);
        expect_forged(PartyId{n - 1}, lists.to_penultimate);
        expect_forged(PartyId{n}, lists.to_last);
        attacker_.current_key = action_.act(scalars.hhat, *attacker_.attack_key);
        break;
      }
      case StageKind::exit_round2: {
        const std::vector<SetPoint> list = exit_round2_list(action_, attacker_);
        for (std::uint32_t i = 1; i <= config_.n; ++i) expect_forged(PartyId{i}, list);
        attacker_.current_key = action_.act(*attacker_.fhat, *attacker_.current_key);
        break;
      }
      case StageKind::refresh:
      case StageKind::mitm_refresh: {
        if (stage.kind == StageKind::mitm_refresh) {
          require_attack(entry);
          mitm_rng_.emplace(config_.seed, stream::kAttackerFiller);
        }
        const GroupScalar secret =
            refresh_secrets_.next(*state(stage.initiator).key, held_keys(obs_.stages, stage.initiator));
        obs_.refresh_secrets.push_back(secret);
        RefreshBuild built = build_refresh(action_, state(stage.initiator), secret);
        state(stage.initiator) = std::move(built.state);
        produced_.insert(fingerprint(Endpoint::party(PartyId{stage.initiator}), built.message));
        break;
      }
    }
  }

  void require_attack(const TranscriptEntry& entry) const {
    if (!attacker_.attack_key) fail(entry, "stage '" + entry.stage + "' before the attack completed");
  }

  void expect_forged(PartyId to, const std::vector<SetPoint>& values) { forged_lists_[to.index] = values; }

  void process(const TranscriptEntry& entry) {
    if (!started_ && std::holds_alternative<ChainMsg>(entry.message) &&
        entry.from == Endpoint::party(PartyId{1})) {
      StepResult result = participant_step(action_, state(1), std::nullopt);
      state(1) = std::move(result.state);
      record_outbound(PartyId{1}, result.outbound);
      started_ = true;
    }
    if (entry.kind != EntryKind::forged && !entry.from.is_attacker() &&
        !produced_.contains(fingerprint(entry.from, entry.message))) {
      fail(entry, entry.from.label() + " never produced this " + std::string(message_type(entry.message)));
    }
    if (entry.kind == EntryKind::intercepted) {
      if (!has_attacker_) fail(entry, "interception in a scenario without an attacker");
      intercept(entry);
      return;
    }
    if (entry.kind == EntryKind::forged) check_forged(entry);
    if (!entry.to || entry.to->is_attacker()) fail(entry, "delivery without a party recipient");

    const PartyId to = entry.to->party_id();
    StepResult result = participant_step(action_, state(to.index), entry.message);
    if (entry.kind == EntryKind::dropped) {
      if (!result.violation) fail(entry, to.label() + " accepts a message logged as dropped");
      obs_.violations[to.index - 1].push_back(*result.violation);
      return;
    }
    if (result.violation) fail(entry, to.label() + " rejects a message logged as accepted: " + *result.violation);
    state(to.index) = std::move(result.state);
    record_outbound(to, result.outbound);
  }

  void record_outbound(PartyId from, const std::vector<Outbound>& outbound) {
    for (const Outbound& out : outbound) produced_.insert(fingerprint(Endpoint::party(from), out.message));
  }

  // Forged lists (step (i), exit rounds, MITM) must match the recomputation.
  void check_forged(const TranscriptEntry& entry) {
    const bool is_list = std::holds_alternative<RefreshMsg>(entry.message) ||
                         std::holds_alternative<KeyMaterialMsg>(entry.message);
    if (!is_list || !entry.to) return;
    const auto it = forged_lists_.find(entry.to->party_id().index);
    if (it == forged_lists_.end()) return;
    if (message_points(entry.message) != it->second) {
      fail(entry, "forged " + std::string(message_type(entry.message)) + " differs from the recomputed list");
    }
  }

  void intercept(const TranscriptEntry& entry) {
    const PlannedStage& stage = plan_[current_];
    const std::uint32_t n = config_.n;
    const PartyId from = entry.from.party_id();
    if (stage.kind == StageKind::ika) {
      const auto* b = std::get_if<BroadcastMsg>(&entry.message);
      const auto* r = std::get_if<ResponseMsg>(&entry.message);
      const auto* k = std::get_if<KeyMaterialMsg>(&entry.message);
      if (b && from.index == n - 1) {
        attacker_.c_last = b->value;
      } else if (r && from.index == n - 1) {
        if (!attacker_.c_last) fail(entry, "response intercepted before the broadcast");
        attacker_.c_prev = r->value;
        attacker_.ghat = options_.ghat ? *options_.ghat
                                       : select_ghat(action_, config_.seed, *attacker_.c_last, *attacker_.c_prev);
      } else if (k && from.index == n) {
        if (!attacker_.ghat) fail(entry, "key material intercepted before ghat was chosen");
        attacker_.captured_material = k->values;
        attacker_.attack_key = compute_attack_key(action_, attacker_);
        attacker_.current_key = attacker_.attack_key;
        attacker_.low_responses.assign(n - 2, std::nullopt);
      } else if (r && from.index <= n - 2) {
        if (!attacker_.captured_material) fail(entry, "response intercepted before the key material");
        attacker_.low_responses.at(from.index - 1) = r->value;
        const bool all_in = std::all_of(attacker_.low_responses.begin(), attacker_.low_responses.end(),
                                        [](const auto& x) { return x.has_value(); });
        if (all_in) {
          const StepILists lists = step_i_lists(action_, attacker_);
          attacker_.ghat_e = std::vector<SetPoint>(lists.to_low.begin(), lists.to_low.end() - 1);
          for (std::uint32_t i = 1; i <= n - 2; ++i) expect_forged(PartyId{i}, lists.to_low);
          expect_forged(PartyId{n - 1}, lists.to_penultimate);
        }
      }
      return;
    }
    if (stage.kind != StageKind::mitm_refresh) return;
    const auto* refresh = std::get_if<RefreshMsg>(&entry.message);
    if (!refresh) return;
    if (refresh->initiator.index == n - 1) {
      expect_forged(PartyId{n}, mitm_apply_ghat(action_, attacker_, *refresh));
      return;
    }
    if (!entry.to || entry.to->party_id().index != n) return;
    const GroupScalar hhat = mitm_scalar(action_, options_, at_position(*attacker_.captured_material, n - 1),
                                         action_.act(*attacker_.ghat, at_position(refresh->values, n)));
    MitmForward forward = convert_to_mitm(action_, attacker_, *refresh, hhat, *mitm_rng_);
    expect_forged(PartyId{n}, forward.to_last);
    attacker_.current_key = forward.key_with_group;
    obs_.attacker_key_last = forward.key_with_last;
    obs_.mitm_hhat = hhat;
  }

  const ScenarioConfig& config_;
  const Transcript& transcript_;
  GroupAction action_;
  std::vector<PlannedStage> plan_;
  AttackerOptions options_;
  bool has_attacker_;

  std::vector<ParticipantState> states_;
  AttackerState attacker_;
  std::optional<Rng> mitm_rng_;
  std::map<std::uint32_t, std::vector<SetPoint>> forged_lists_;
  std::set<std::string> produced_;
  RunObservation obs_;
  int current_ = -1;
  RefreshSecretSource refresh_secrets_{refresh_secret_source(config_, action_)};
  bool started_ = false;
};

}  // namespace

RunObservation replay_transcript(const ScenarioConfig& config, const Transcript& transcript) {
  return Replay(config, transcript).run();
}

VerificationReport verify_transcript(const ScenarioConfig& config, const Transcript& transcript) {
  const GroupAction action(config.params);
  return build_report(config, action, replay_transcript(config, transcript));
}

VerificationReport verify_transcript_file(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw VerificationError("cannot read transcript " + path.string());
  const GroupAction action(config.params);
  return verify_transcript(config, read_transcript(in, action));
}

}  // namespace ikalab
