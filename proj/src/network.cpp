#include "ikalab/network.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ikalab/errors.hpp"

namespace ikalab {

using ordered_json = nlohmann::ordered_json;

Endpoint Endpoint::parse(std::string_view label) {
  if (label == "A") return attacker();
  std::uint32_t index = 0;
  if (label.size() >= 2 && label.front() == 'U') {
    const auto digits = label.substr(1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && index > 0) return party(PartyId{index});
  }
  throw ProtocolError("bad endpoint label '" + std::string(label) + "'");
}

PartyId Endpoint::party_id() const {
  if (is_attacker()) throw ProtocolError("the attacker endpoint has no party index");
  return PartyId{index_};
}

std::string Endpoint::label() const { return is_attacker() ? "A" : party_id().label(); }

std::string_view entry_kind_name(EntryKind kind) {
  switch (kind) {
    case EntryKind::delivered:
      return "delivered";
    case EntryKind::intercepted:
      return "intercepted";
    case EntryKind::forged:
      return "forged";
    case EntryKind::dropped:
      return "dropped";
  }
  return "?";
}

namespace {

EntryKind parse_kind(std::string_view name) {
  for (EntryKind kind : {EntryKind::delivered, EntryKind::intercepted, EntryKind::forged, EntryKind::dropped}) {
    if (entry_kind_name(kind) == name) return kind;
  }
  throw ProtocolError("unknown transcript entry kind '" + std::string(name) + "'");
}

}  // namespace

std::string transcript_line(const TranscriptEntry& entry) {
  ordered_json line;
  line["seq"] = entry.seq;
  line["kind"] = entry_kind_name(entry.kind);
  line["from"] = entry.from.label();
  line["claimed_from"] = entry.claimed_from.label();
  line["to"] = entry.to ? entry.to->label() : "broadcast";
  line["msg_type"] = message_type(entry.message);
  line["payload"] = encode_payload(entry.message);
  line["annotation"] = entry.annotation;
  line["stage"] = entry.stage;
  return line.dump();
}

void write_transcript(std::ostream& out, const Transcript& transcript) {
  for (const TranscriptEntry& entry : transcript) out << transcript_line(entry) << '\n';
}

Transcript read_transcript(std::istream& in, const GroupAction& action) {
  Transcript transcript;
  std::string text;
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    try {
      const auto line = ordered_json::parse(text);
      const std::string to = line.at("to").get<std::string>();
      transcript.push_back(TranscriptEntry{
          .seq = line.at("seq").get<std::uint64_t>(),
          .kind = parse_kind(line.at("kind").get<std::string>()),
          .from = Endpoint::parse(line.at("from").get<std::string>()),
          .claimed_from = Endpoint::parse(line.at("claimed_from").get<std::string>()),
          .to = to == "broadcast" ? std::nullopt : std::optional<Endpoint>(Endpoint::parse(to)),
          .message = decode_message(line.at("msg_type").get<std::string>(), line.at("payload").get<std::string>(),
                                    action),
          .annotation = line.at("annotation").get<std::string>(),
          .stage = line.at("stage").get<std::string>(),
      });
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("malformed transcript line: " + std::string(e.what()));
    }
  }
  return transcript;
}

Network::Network(std::uint32_t n) : n_(n), delivery_limit_(10 * static_cast<std::size_t>(n) * n) {}

void Network::register_party(PartyId id, PartyHandler handler) {
  if (id.index < 1 || id.index > n_) throw ConfigError("endpoint", id.label() + " outside [1, n]");
  if (!parties_.emplace(id, std::move(handler)).second) {
    throw ConfigError("endpoint", id.label() + " registered twice");
  }
}

void Network::register_attacker(AttackerHandler handler) {
  if (attacker_) throw ConfigError("endpoint", "attacker registered twice");
  attacker_ = std::move(handler);
}

std::size_t Network::endpoint_count() const { return parties_.size() + (attacker_ ? 1 : 0); }

void Network::set_policy(InterpositionPolicy policy) {
  for (const PartyId id : policy.controlled) {
    if (id.index < 1 || id.index > n_) throw ConfigError("controlled", id.label() + " outside [1, n]");
  }
  policy_ = std::move(policy);
}

void Network::require_registered(Endpoint endpoint) const {
  const bool known = endpoint.is_attacker() ? attacker_.has_value() : parties_.contains(endpoint.party_id());
  if (!known) throw ConfigError("endpoint", endpoint.label() + " is not registered");
}

void Network::enqueue_to_party(Endpoint from, PartyId to, const Message& msg) {
  const bool diverted = policy_.controls(to) || (!from.is_attacker() && policy_.controls(from.party_id()));
  if (diverted) {
    require_registered(Endpoint::attacker());
    queue_.push_back({EntryKind::intercepted, from, from, Endpoint::party(to), Endpoint::attacker(), msg, {}});
  } else {
    queue_.push_back({EntryKind::delivered, from, from, Endpoint::party(to), Endpoint::party(to), msg, {}});
  }
}

void Network::unicast(Endpoint from, Endpoint to, Message msg) {
  require_registered(from);
  require_registered(to);
  if (to.is_attacker()) throw ProtocolError("honest traffic is never addressed to the attacker");
  enqueue_to_party(from, to.party_id(), msg);
}

void Network::broadcast(Endpoint from, Message msg) {
  require_registered(from);
  if (!from.is_attacker() && policy_.controls(from.party_id())) {
    require_registered(Endpoint::attacker());
    queue_.push_back({EntryKind::intercepted, from, from, std::nullopt, Endpoint::attacker(), std::move(msg), {}});
    return;
  }
  for (const auto& [id, handler] : parties_) {
    if (Endpoint::party(id) == from) continue;
    enqueue_to_party(from, id, msg);
  }
}

void Network::forge_as(Endpoint caller, PartyId claimed_sender, std::optional<PartyId> to, Message msg,
                       std::string annotation) {
  if (!caller.is_attacker()) throw AuthorizationError(caller.label() + " may not forge messages");
  require_registered(caller);
  require_registered(Endpoint::party(claimed_sender));
  std::vector<PartyId> targets;
  if (to) {
    require_registered(Endpoint::party(*to));
    targets.push_back(*to);
  } else {
    for (const auto& [id, handler] : parties_) {
      if (id != claimed_sender) targets.push_back(id);
    }
  }
  for (const PartyId target : targets) {
    if (!policy_.controls(claimed_sender) && !policy_.controls(target)) {
      throw AuthorizationError("attacker controls neither " + claimed_sender.label() + " nor " + target.label());
    }
  }
  for (const PartyId target : targets) {
    queue_.push_back({EntryKind::forged, Endpoint::attacker(), Endpoint::party(claimed_sender), Endpoint::party(target),
                      Endpoint::party(target), msg, annotation});
  }
}

void Network::record(const Pending& item, EntryKind kind, std::string annotation) {
  transcript_.push_back(TranscriptEntry{
      .seq = transcript_.size() + 1,
      .kind = kind,
      .from = item.from,
      .claimed_from = item.claimed_from,
      .to = item.to,
      .message = item.message,
      .annotation = annotation.empty() ? stage_ : std::move(annotation),
      .stage = stage_,
  });
}

const Transcript& Network::run_until_quiescent() {
  std::size_t deliveries = 0;
  while (!queue_.empty()) {
    if (++deliveries > delivery_limit_) {
      throw NonTerminationError("more than " + std::to_string(delivery_limit_) + " deliveries without quiescence");
    }
    Pending item = std::move(queue_.front());
    queue_.pop_front();
    if (item.recipient.is_attacker()) {
      std::string annotation = (*attacker_)(Interception{item.from, item.to, item.message});
      record(item, EntryKind::intercepted, std::move(annotation));
      continue;
    }
    const Receipt receipt = parties_.at(item.recipient.party_id())(Inbound{item.claimed_from, item.message});
    record(item, receipt.accepted ? item.kind : EntryKind::dropped, item.annotation);
  }
  return transcript_;
}

}  // namespace ikalab
