#pragma once

#include <string>
#include <vector>

#include "ikalab/network.hpp"
#include "ikalab/protocol.hpp"

namespace ikalab {

// Binds one ParticipantState to a Network endpoint. Registers itself on
// construction, so the object must stay at a fixed address for the life of
// the network.
class HonestParty {
 public:
  HonestParty(const GroupAction& action, Network& network, PartyId id, std::uint32_t n, GroupScalar secret);

  HonestParty(const HonestParty&) = delete;
  HonestParty& operator=(const HonestParty&) = delete;

  PartyId id() const { return state_.id; }
  const ParticipantState& state() const { return state_; }
  const std::vector<std::string>& violations() const { return violations_; }

  // U_1 only: emit the first chain value.
  void start();
  // Broadcasts a key refresh built from the current memory.
  void initiate_refresh(GroupScalar new_secret);

 private:
  Receipt on_message(const Inbound& inbound);
  void send(const std::vector<Outbound>& outbound);

  const GroupAction& action_;
  Network& network_;
  ParticipantState state_;
  std::vector<std::string> violations_;
};

}  // namespace ikalab
