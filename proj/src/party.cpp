#include "ikalab/party.hpp"

#include "ikalab/errors.hpp"

namespace ikalab {

HonestParty::HonestParty(const GroupAction& action, Network& network, PartyId id, std::uint32_t n,
                         GroupScalar secret)
    : action_(action), network_(network), state_(make_participant(action, id, n, secret)) {
  network_.register_party(id, [this](const Inbound& inbound) { return on_message(inbound); });
}

void HonestParty::start() {
  StepResult result = participant_step(action_, state_, std::nullopt);
  if (result.violation) throw ProtocolError(*result.violation);
  state_ = std::move(result.state);
  send(result.outbound);
}

void HonestParty::initiate_refresh(GroupScalar new_secret) {
  RefreshBuild built = build_refresh(action_, state_, new_secret);
  state_ = std::move(built.state);
  network_.broadcast(Endpoint::party(state_.id), std::move(built.message));
}

Receipt HonestParty::on_message(const Inbound& inbound) {
  StepResult result = participant_step(action_, state_, inbound.message);
  if (result.violation) {
    violations_.push_back(*result.violation);
    return {false};
  }
  state_ = std::move(result.state);
  send(result.outbound);
  return {true};
}

void HonestParty::send(const std::vector<Outbound>& outbound) {
  const Endpoint self = Endpoint::party(state_.id);
  for (const Outbound& out : outbound) {
    if (out.to.is_broadcast()) {
      network_.broadcast(self, out.message);
    } else {
      network_.unicast(self, Endpoint::party(*out.to.party), out.message);
    }
  }
}

}  // namespace ikalab
