#include "ikalab/report.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "ikalab/errors.hpp"

namespace ikalab {

using ordered_json = nlohmann::ordered_json;

namespace {

bool all_equal(const std::vector<std::optional<SetPoint>>& keys) {
  if (keys.empty() || !keys.front()) return false;
  return std::all_of(keys.begin(), keys.end(), [&](const auto& k) { return k == keys.front(); });
}

bool all_match(const std::vector<std::optional<SetPoint>>& keys, const std::optional<SetPoint>& expected) {
  return expected && std::all_of(keys.begin(), keys.end(), [&](const auto& k) { return k == expected; });
}

const StageSnapshot* find_stage(const RunObservation& obs, const std::string& label) {
  for (const auto& stage : obs.stages) {
    if (stage.stage == label) return &stage;
  }
  return nullptr;
}

std::uint32_t initiator_of(const ScenarioConfig& config) { return config.initiator.value_or(1); }

ordered_json encode_optional(const std::optional<SetPoint>& point) {
  return point ? ordered_json(point->encode()) : ordered_json(nullptr);
}

ordered_json encode_optional(const std::optional<std::uint64_t>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json encode_check(const std::optional<bool>& check) {
  return check ? ordered_json(*check) : ordered_json(nullptr);
}

std::optional<std::uint64_t> scalar_value(const std::optional<GroupScalar>& g) {
  return g ? std::optional<std::uint64_t>(g->value) : std::nullopt;
}

class VerdictList {
 public:
  void add(std::string name, bool passed) { verdicts_.push_back({std::move(name), passed}); }
  std::vector<Verdict> take() { return std::move(verdicts_); }

 private:
  std::vector<Verdict> verdicts_;
};

void common_verdicts(VerdictList& v, const VerificationReport& r) {
  v.add("all users agree", r.agreement);
  v.add("keys match the closed form", all_match(r.keys, r.oracle_key));
}

bool checks_pass(const VerificationReport& r) {
  return std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c && c->all_pass(); });
}

bool no_rejections(const VerificationReport& r) {
  return std::all_of(r.violations.begin(), r.violations.end(), [](const auto& v) { return v.empty(); });
}

// The initiator of a refresh records no V4, so absent entries are skipped.
bool v4_passes(const VerificationReport& r) {
  bool any = false;
  for (const auto& c : r.checks) {
    if (!c) return false;
    if (c->v4 && !*c->v4) return false;
    any = any || c->v4.has_value();
  }
  return any;
}

std::vector<Verdict> scenario_verdicts(const ScenarioConfig& config, const GroupAction& action,
                                       const RunObservation& obs, const VerificationReport& r) {
  VerdictList v;
  const std::uint32_t n = config.n;
  switch (config.scenario) {
    case Scenario::honest:
    case Scenario::passive:
      common_verdicts(v, r);
      v.add("V1-V3 pass at every user", checks_pass(r));
      v.add("no message rejected", no_rejections(r));
      break;
    case Scenario::refresh: {
      common_verdicts(v, r);
      v.add("V1-V4 pass at every user", checks_pass(r) && v4_passes(r));
      const StageSnapshot* last = obs.stages.empty() ? nullptr : &obs.stages.back();
      v.add("memories identical after refresh", last && last->memories_identical);
      v.add("no message rejected", no_rejections(r));
      break;
    }
    case Scenario::active_attack:
      common_verdicts(v, r);
      v.add("attacker holds the group key", r.attacker_key && r.keys.front() == r.attacker_key);
      v.add("V1-V3 pass at every user", checks_pass(r));
      v.add("no message rejected", no_rejections(r));
      break;
    case Scenario::attack_no_ghat: {
      common_verdicts(v, r);
      v.add("attacker holds the group key", r.attacker_key && r.keys.front() == r.attacker_key);
      const auto& last = r.checks.back();
      v.add("V2 fails at U" + std::to_string(n), last && last->v2 && !*last->v2);
      bool v3_fails = true;
      for (std::uint32_t i = 0; i + 2 < n; ++i) {
        const auto& c = r.checks[i];
        v3_fails = v3_fails && c && c->v3 && !*c->v3;
      }
      v.add("V3 fails at U1..U" + std::to_string(n - 2), v3_fails);
      break;
    }
    case Scenario::exit_strategy: {
      const StageSnapshot* ika = find_stage(obs, "ika");
      const StageSnapshot* round1 = find_stage(obs, "exit-1");
      const StageSnapshot* round2 = find_stage(obs, "exit-2");
      std::optional<SetPoint> key1;
      std::optional<SetPoint> key2;
      if (ika && ika->attacker_key && obs.hhat && obs.fhat) {
        key1 = action.act(*obs.hhat, *ika->attacker_key);
        key2 = action.act(*obs.fhat, *key1);
      }
      auto stage_agrees = [](const StageSnapshot* s) {
        return s && all_equal(s->keys) && s->attacker_key && s->keys.front() == s->attacker_key;
      };
      v.add("exit-1: users and attacker agree", stage_agrees(round1));
      v.add("exit-1: keys equal hhat . attack key", round1 && all_match(round1->keys, key1));
      v.add("exit-2: users and attacker agree", stage_agrees(round2));
      v.add("exit-2: keys equal fhat hhat . attack key", round2 && all_match(round2->keys, key2));
      v.add("memories identical after exit", round2 && round2->memories_identical);
      v.add("V4 passes at every refresh recipient", v4_passes(r));
      for (std::uint32_t c = 1; c <= n; ++c) {
        const StageSnapshot* post = find_stage(obs, "post-exit U" + std::to_string(c));
        const bool agree = post && all_equal(post->keys);
        v.add("post-exit U" + std::to_string(c) + ": users agree", agree);
        v.add("post-exit U" + std::to_string(c) + ": attacker excluded",
              agree && post->attacker_key != post->keys.front());
      }
      v.add("keys match the closed form", all_match(r.keys, r.oracle_key));
      break;
    }
    case Scenario::refresh_failure: {
      std::set<std::string> distinct;
      for (const auto& k : r.keys) {
        if (k) distinct.insert(k->encode());
      }
      v.add("refresh failed as expected", distinct.size() >= 2);
      break;
    }
    case Scenario::mitm_conversion: {
      const std::uint32_t c = initiator_of(config);
      if (c + 1 == n) {
        common_verdicts(v, r);
        v.add("attacker excluded", r.agreement && r.attacker_key != r.keys.front());
      } else {
        std::vector<std::optional<SetPoint>> group(r.keys.begin(), r.keys.end() - 1);
        const bool group_agrees = all_equal(group);
        v.add("U1..U" + std::to_string(n - 1) + " agree", group_agrees);
        v.add("U1..U" + std::to_string(n - 1) + " keys match the closed form", all_match(group, r.oracle_key));
        v.add("attacker shares the group key", group_agrees && r.attacker_key == group.front());
        v.add("attacker shares a second key with U" + std::to_string(n),
              r.attacker_key_last && r.keys.back() == r.attacker_key_last);
        v.add("the two attacker keys differ", r.attacker_key && r.attacker_key_last &&
                                                  *r.attacker_key != *r.attacker_key_last);
      }
      v.add("V4 passes at every refresh recipient", v4_passes(r));
      break;
    }
  }
  return v.take();
}

}  // namespace

bool VerificationReport::passed() const {
  return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

SetPoint closed_form_key(const GroupAction& action, const std::vector<GroupScalar>& scalars) {
  return action.act(action.product(scalars), action.base());
}

std::vector<GroupScalar> expected_key_scalars(const ScenarioConfig& config, const RunObservation& obs) {
  std::vector<GroupScalar> scalars = obs.secrets;
  auto push = [&](const std::optional<GroupScalar>& g) {
    if (g) scalars.push_back(*g);
  };
  switch (config.scenario) {
    case Scenario::honest:
    case Scenario::passive:
      break;
    case Scenario::refresh:
      for (const auto& g : obs.refresh_secrets) scalars.push_back(g);
      break;
    case Scenario::active_attack:
    case Scenario::attack_no_ghat:
      push(obs.ghat);
      break;
    case Scenario::exit_strategy:
      push(obs.ghat);
      push(obs.hhat);
      push(obs.fhat);
      for (const auto& g : obs.refresh_secrets) scalars.push_back(g);
      break;
    case Scenario::refresh_failure:
    case Scenario::mitm_conversion:
      push(obs.ghat);
      for (const auto& g : obs.refresh_secrets) scalars.push_back(g);
      break;
  }
  return scalars;
}

VerificationReport build_report(const ScenarioConfig& config, const GroupAction& action, const RunObservation& obs) {
  if (obs.parties.size() != config.n) throw ProtocolError("observation does not cover every party");
  VerificationReport r;
  r.scenario = std::string(scenario_name(config.scenario));
  r.n = config.n;
  r.backend = config.backend;
  r.seed = config.seed;
  for (const auto& g : obs.secrets) r.secrets.push_back(g.value);
  for (const auto& g : obs.refresh_secrets) r.refresh_secrets.push_back(g.value);
  r.ghat = scalar_value(obs.ghat);
  r.hhat = scalar_value(obs.hhat);
  r.fhat = scalar_value(obs.fhat);
  r.mitm_hhat = scalar_value(obs.mitm_hhat);

  r.stages = obs.stages;
  for (const auto& state : obs.parties) {
    r.keys.push_back(state.key);
    r.checks.push_back(state.phase == Phase::established ? std::optional<CheckReport>(run_checks(state))
                                                         : std::nullopt);
  }
  if (!obs.stages.empty()) r.attacker_key = obs.stages.back().attacker_key;
  r.attacker_key_last = obs.attacker_key_last;
  r.agreement = all_equal(r.keys);
  r.oracle_key = closed_form_key(action, expected_key_scalars(config, obs));
  r.violations = obs.violations;
  r.violations.resize(config.n);
  if (config.scenario == Scenario::passive && r.keys.front()) {
    bool seen = false;
    for (const auto& entry : obs.transcript) {
      for (const auto& point : message_points(entry.message)) seen = seen || point == *r.keys.front();
    }
    r.key_on_wire = seen;
  }
  r.verdicts = scenario_verdicts(config, action, obs, r);
  return r;
}

std::string render_report(const VerificationReport& r) {
  ordered_json doc;
  doc["scenario"] = r.scenario;
  doc["n"] = r.n;
  doc["backend"] = r.backend;
  doc["seed"] = r.seed;

  ordered_json scalars;
  scalars["secrets"] = r.secrets;
  scalars["refresh_secrets"] = r.refresh_secrets;
  scalars["ghat"] = encode_optional(r.ghat);
  scalars["hhat"] = encode_optional(r.hhat);
  scalars["fhat"] = encode_optional(r.fhat);
  scalars["mitm_hhat"] = encode_optional(r.mitm_hhat);
  doc["scalars"] = scalars;

  ordered_json stages = ordered_json::array();
  for (const auto& s : r.stages) {
    ordered_json stage;
    stage["stage"] = s.stage;
    ordered_json keys = ordered_json::array();
    for (const auto& k : s.keys) keys.push_back(encode_optional(k));
    stage["keys"] = keys;
    stage["attacker_key"] = encode_optional(s.attacker_key);
    stage["memories_identical"] = s.memories_identical;
    stages.push_back(stage);
  }
  doc["stages"] = stages;

  ordered_json parties = ordered_json::array();
  for (std::size_t i = 0; i < r.keys.size(); ++i) {
    ordered_json party;
    party["party"] = PartyId{static_cast<std::uint32_t>(i + 1)}.label();
    party["key"] = encode_optional(r.keys[i]);
    ordered_json checks;
    const auto& c = r.checks[i];
    checks["V1"] = c ? encode_check(c->v1) : nullptr;
    checks["V2"] = c ? encode_check(c->v2) : nullptr;
    checks["V3"] = c ? encode_check(c->v3) : nullptr;
    checks["V4"] = c ? encode_check(c->v4) : nullptr;
    party["checks"] = checks;
    party["rejected"] = r.violations[i];
    parties.push_back(party);
  }
  doc["parties"] = parties;

  doc["attacker_key"] = encode_optional(r.attacker_key);
  doc["attacker_key_last"] = encode_optional(r.attacker_key_last);
  doc["agreement"] = r.agreement;
  doc["oracle_key"] = encode_optional(r.oracle_key);
  if (r.key_on_wire) doc["key_on_wire"] = *r.key_on_wire;

  ordered_json verdicts = ordered_json::array();
  for (const auto& v : r.verdicts) verdicts.push_back({{"verdict", v.name}, {"passed", v.passed}});
  doc["verdicts"] = verdicts;
  doc["passed"] = r.passed();
  return doc.dump(2) + "\n";
}

}  // namespace ikalab
