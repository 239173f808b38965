#include "ikalab/session.hpp"

#include <algorithm>

#include "ikalab/errors.hpp"

namespace ikalab {

std::vector<GroupScalar> draw_user_secrets(const GroupAction& action, std::uint32_t n, std::uint64_t seed) {
  Rng rng(seed, stream::kUserSecrets);
  std::vector<GroupScalar> secrets;
  for (std::uint32_t i = 0; i < n; ++i) secrets.push_back(action.random_nonidentity_scalar(rng));
  return secrets;
}

RefreshSecretSource::RefreshSecretSource(const GroupAction& action, std::uint64_t seed, std::vector<GroupScalar> fixed)
    : action_(action), rng_(seed, stream::kRefreshSecrets), fixed_(std::move(fixed)) {}

GroupScalar RefreshSecretSource::next(const SetPoint& current_key, std::span<const SetPoint> held) {
  if (used_ < fixed_.size()) return fixed_[used_++];
  ++used_;
  auto stale = [&](GroupScalar g) {
    return std::find(held.begin(), held.end(), action_.act(g, current_key)) != held.end();
  };
  GroupScalar secret = action_.random_nonidentity_scalar(rng_);
  for (std::uint64_t attempt = 0; attempt < 4 * action_.order() && stale(secret); ++attempt) {
    secret = action_.random_nonidentity_scalar(rng_);
  }
  return secret;
}

Session::Session(GroupAction action, std::vector<GroupScalar> secrets)
    : action_(std::move(action)),
      network_(std::make_unique<Network>(static_cast<std::uint32_t>(secrets.size()))) {
  const auto n = static_cast<std::uint32_t>(secrets.size());
  if (n < 3) throw ConfigError("n", "group size must be at least 3");
  for (std::uint32_t i = 1; i <= n; ++i) {
    parties_.push_back(std::make_unique<HonestParty>(action_, *network_, PartyId{i}, n, secrets[i - 1]));
  }
}

bool Session::all_established() const {
  return std::all_of(parties_.begin(), parties_.end(),
                     [](const auto& p) { return p->state().phase == Phase::established; });
}

std::vector<SetPoint> Session::keys() const {
  std::vector<SetPoint> keys;
  for (const auto& p : parties_) {
    if (!p->state().key) throw ProtocolError(p->id().label() + " holds no key");
    keys.push_back(*p->state().key);
  }
  return keys;
}

std::vector<CheckReport> Session::checks() const {
  std::vector<CheckReport> reports;
  for (const auto& p : parties_) reports.push_back(run_checks(p->state()));
  return reports;
}

std::vector<std::vector<SetPoint>> Session::memories() const {
  std::vector<std::vector<SetPoint>> out;
  for (const auto& p : parties_) {
    if (!p->state().memory) throw ProtocolError(p->id().label() + " holds no memory");
    out.push_back(*p->state().memory);
  }
  return out;
}

AttackOutcome execute_ika_attack(std::uint32_t n, const ActionParams& params, std::uint64_t seed,
                                 AttackerOptions options, std::optional<std::vector<GroupScalar>> secrets) {
  GroupAction action(params);
  std::vector<GroupScalar> g = secrets ? *secrets : draw_user_secrets(action, n, seed);
  if (g.size() != n) throw ConfigError("secrets", "expected " + std::to_string(n) + " secrets");
  options.seed = seed;

  Session session(action, g);
  Attacker attacker(session.action(), session.network(), options);
  session.network().set_stage("ika");
  session.start_ika();
  session.run();
  attacker.require_complete();

  return AttackOutcome{
      .attacker_key = *attacker.state().attack_key,
      .user_keys = session.keys(),
      .checks = session.checks(),
      .memories = session.memories(),
      .secrets = g,
      .attacker = attacker.state(),
      .transcript = session.network().transcript(),
  };
}

Transcript passive_eavesdrop(std::uint32_t n, const ActionParams& params, std::uint64_t seed,
                             std::optional<std::vector<GroupScalar>> secrets) {
  GroupAction action(params);
  std::vector<GroupScalar> g = secrets ? *secrets : draw_user_secrets(action, n, seed);
  Session session(action, g);
  session.network().set_stage("ika");
  session.start_ika();
  return session.run();
}

}  // namespace ikalab
