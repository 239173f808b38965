#include "ikalab/scenario.hpp"

#include <fstream>
#include <memory>

#include "ikalab/errors.hpp"
#include "ikalab/session.hpp"

namespace ikalab {

namespace {

std::string refresh_label(std::string_view prefix, std::uint32_t c) {
  return std::string(prefix) + " U" + std::to_string(c);
}

StageSnapshot snapshot(const std::string& label, const Session& session, const Attacker* attacker) {
  StageSnapshot out{.stage = label, .keys = {}, .attacker_key = std::nullopt, .memories_identical = true};
  std::optional<std::vector<SetPoint>> first;
  for (std::uint32_t i = 1; i <= session.n(); ++i) {
    const ParticipantState& state = session.party(i).state();
    out.keys.push_back(state.key);
    if (!state.memory) {
      out.memories_identical = false;
    } else if (!first) {
      first = state.memory;
    } else if (*first != *state.memory) {
      out.memories_identical = false;
    }
  }
  if (attacker) out.attacker_key = attacker->state().current_key;
  return out;
}

}  // namespace

bool scenario_has_attacker(Scenario scenario) {
  switch (scenario) {
    case Scenario::honest:
    case Scenario::refresh:
    case Scenario::passive:
      return false;
    default:
      return true;
  }
}

std::vector<PlannedStage> stage_plan(const ScenarioConfig& config) {
  std::vector<PlannedStage> plan{{"ika", StageKind::ika, 0}};
  const std::uint32_t c = config.initiator.value_or(1);
  switch (config.scenario) {
    case Scenario::refresh:
    case Scenario::refresh_failure:
      plan.push_back({refresh_label("refresh", c), StageKind::refresh, c});
      break;
    case Scenario::exit_strategy:
      plan.push_back({"exit-1", StageKind::exit_round1, 0});
      plan.push_back({"exit-2", StageKind::exit_round2, 0});
      for (std::uint32_t i = 1; i <= config.n; ++i) {
        plan.push_back({refresh_label("post-exit", i), StageKind::refresh, i});
      }
      break;
    case Scenario::mitm_conversion:
      plan.push_back({refresh_label("mitm", c), StageKind::mitm_refresh, c});
      break;
    default:
      break;
  }
  return plan;
}

std::vector<GroupScalar> scenario_secrets(const ScenarioConfig& config, const GroupAction& action) {
  if (!config.secrets) return draw_user_secrets(action, config.n, config.seed);
  std::vector<GroupScalar> out;
  for (const auto v : *config.secrets) out.push_back(action.scalar(v));
  return out;
}

RefreshSecretSource refresh_secret_source(const ScenarioConfig& config, const GroupAction& action) {
  std::vector<GroupScalar> fixed;
  if (config.refresh_secrets) {
    for (const auto v : *config.refresh_secrets) fixed.push_back(action.scalar(v));
  }
  return RefreshSecretSource(action, config.seed, std::move(fixed));
}

std::vector<SetPoint> held_keys(const std::vector<StageSnapshot>& stages, std::uint32_t c) {
  std::vector<SetPoint> held;
  for (const auto& stage : stages) {
    if (const auto& key = stage.keys.at(c - 1)) held.push_back(*key);
  }
  return held;
}

AttackerOptions attacker_options(const ScenarioConfig& config, const GroupAction& action) {
  AttackerOptions options;
  options.seed = config.seed;
  auto fixed = [&](const std::optional<std::uint64_t>& v) {
    return v ? std::optional<GroupScalar>(action.scalar(*v)) : std::nullopt;
  };
  options.ghat = config.scenario == Scenario::attack_no_ghat ? action.identity() : fixed(config.ghat);
  options.hhat = fixed(config.hhat);
  options.fhat = fixed(config.fhat);
  options.mitm_hhat = fixed(config.mitm_hhat);
  return options;
}

SetPoint oracle_expected_key(const GroupAction& action, std::span<const GroupScalar> secrets,
                             std::span<const GroupScalar> extra, const SetPoint& s) {
  return action.act(action.compose(action.product(secrets), action.product(extra)), s);
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  const GroupAction action(config.params);
  Session session(action, scenario_secrets(config, action));
  std::unique_ptr<Attacker> attacker;
  if (scenario_has_attacker(config.scenario)) {
    attacker = std::make_unique<Attacker>(session.action(), session.network(), attacker_options(config, action));
  }

  RunObservation obs;
  for (std::uint32_t i = 1; i <= config.n; ++i) obs.secrets.push_back(session.party(i).state().secret);

  RefreshSecretSource refresh_secrets = refresh_secret_source(config, session.action());
  for (const PlannedStage& stage : stage_plan(config)) {
    session.network().set_stage(stage.label);
    switch (stage.kind) {
      case StageKind::ika:
        session.start_ika();
        session.run();
        if (attacker) attacker->require_complete();
        break;
      case StageKind::exit_round1:
        attacker->forge_exit_round1();
        session.run();
        break;
      case StageKind::exit_round2:
        attacker->forge_exit_round2();
        session.run();
        break;
      case StageKind::refresh:
      case StageKind::mitm_refresh: {
        if (attacker) {
          if (stage.kind == StageKind::mitm_refresh) {
            attacker->arm_mitm();
          } else {
            attacker->withdraw();
          }
        }
        const GroupScalar secret = refresh_secrets.next(*session.party(stage.initiator).state().key,
                                                        held_keys(obs.stages, stage.initiator));
        obs.refresh_secrets.push_back(secret);
        session.party(stage.initiator).initiate_refresh(secret);
        session.run();
        break;
      }
    }
    obs.stages.push_back(snapshot(stage.label, session, attacker.get()));
  }

  if (attacker) {
    const AttackerState& a = attacker->state();
    obs.ghat = a.ghat;
    obs.hhat = a.hhat;
    obs.fhat = a.fhat;
    if (const auto& mitm = attacker->mitm_outcome()) {
      obs.attacker_key_last = mitm->key_with_last;
      obs.mitm_hhat = mitm->hhat;
    }
  }
  for (std::uint32_t i = 1; i <= config.n; ++i) {
    obs.parties.push_back(session.party(i).state());
    obs.violations.push_back(session.party(i).violations());
  }
  obs.transcript = session.network().transcript();

  VerificationReport report = build_report(config, action, obs);
  return {std::move(obs), std::move(report)};
}

int write_outputs(const ScenarioConfig& config, const ScenarioResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) return exit_code::kIoError;

  std::ofstream transcript(config.out_dir / config.transcript_file, std::ios::binary);
  if (!transcript) return exit_code::kIoError;
  write_transcript(transcript, result.observation.transcript);
  transcript.close();
  if (!transcript) return exit_code::kIoError;

  std::ofstream report(config.out_dir / config.report_file, std::ios::binary);
  if (!report) return exit_code::kIoError;
  report << render_report(result.report);
  report.close();
  if (!report) return exit_code::kIoError;

  return result.report.passed() ? exit_code::kOk : exit_code::kVerdictMismatch;
}

}  // namespace ikalab
