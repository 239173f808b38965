#pragma once

// In-process message fabric for one scenario run.
//
// Messages are queued in a single FIFO and handed to endpoint callbacks by
// run_until_quiescent(). When the interposition policy is active, every
// message to or from a controlled party is diverted to the attacker
// endpoint instead; the attacker re-injects traffic through forge_as().
// Every hand-off is recorded in the transcript.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ikalab/protocol.hpp"

namespace ikalab {

class Endpoint {
 public:
  static Endpoint attacker() { return Endpoint(0); }
  static Endpoint party(PartyId id) { return Endpoint(id.index); }
  // "A" or "U<k>".
  static Endpoint parse(std::string_view label);

  bool is_attacker() const { return index_ == 0; }
  PartyId party_id() const;
  std::string label() const;

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;

 private:
  explicit Endpoint(std::uint32_t index) : index_(index) {}

  std::uint32_t index_;
};

enum class EntryKind { delivered, intercepted, forged, dropped };

std::string_view entry_kind_name(EntryKind kind);

struct TranscriptEntry {
  std::uint64_t seq = 0;
  EntryKind kind = EntryKind::delivered;
  Endpoint from = Endpoint::attacker();          // true origin
  Endpoint claimed_from = Endpoint::attacker();  // origin as presented to the recipient
  std::optional<Endpoint> to;                    // nullopt: whole broadcast fan-out
  Message message;
  std::string annotation;
  std::string stage;  // scenario stage in effect when the entry was logged
};

using Transcript = std::vector<TranscriptEntry>;

// One flat JSON object per line, fields in the order seq, kind, from,
// claimed_from, to, msg_type, payload, annotation, stage.
std::string transcript_line(const TranscriptEntry& entry);
void write_transcript(std::ostream& out, const Transcript& transcript);
Transcript read_transcript(std::istream& in, const GroupAction& action);

struct InterpositionPolicy {
  std::set<PartyId> controlled;
  bool active = false;

  bool controls(PartyId id) const { return active && controlled.contains(id); }
};

// What an honest party sees: the claimed sender and the message, nothing else.
struct Inbound {
  Endpoint sender;
  Message message;
};

// What the attacker sees for a diverted message.
struct Interception {
  Endpoint from;
  std::optional<Endpoint> to;  // nullopt: a broadcast diverted as a whole
  Message message;
};

// Returned by a party handler; accepted = false logs the delivery as dropped.
struct Receipt {
  bool accepted = true;
};

using PartyHandler = std::function<Receipt(const Inbound&)>;
// Returns the annotation recorded on the interception entry.
using AttackerHandler = std::function<std::string(const Interception&)>;

class Network {
 public:
  explicit Network(std::uint32_t n);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  std::uint32_t group_size() const { return n_; }

  void register_party(PartyId id, PartyHandler handler);
  void register_attacker(AttackerHandler handler);
  std::size_t endpoint_count() const;

  void set_policy(InterpositionPolicy policy);
  const InterpositionPolicy& policy() const { return policy_; }

  // Label recorded on entries that carry no attacker annotation.
  void set_stage(std::string stage) { stage_ = std::move(stage); }
  const std::string& stage() const { return stage_; }

  void set_delivery_limit(std::size_t limit) { delivery_limit_ = limit; }

  void unicast(Endpoint from, Endpoint to, Message msg);
  void broadcast(Endpoint from, Message msg);

  // Injects msg so that it appears to come from claimed_sender. to = nullopt
  // fans out to every party except claimed_sender. Only the attacker may
  // call this, only while the policy is active, and only where she controls
  // the claimed sender or the recipient.
  void forge_as(Endpoint caller, PartyId claimed_sender, std::optional<PartyId> to, Message msg,
                std::string annotation);

  // Delivers queued messages in FIFO order until none remain. Throws
  // NonTerminationError after more than the delivery limit (default 10 n^2)
  // deliveries in one call.
  const Transcript& run_until_quiescent();

  const Transcript& transcript() const { return transcript_; }
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Pending {
    EntryKind kind;
    Endpoint from;
    Endpoint claimed_from;
    std::optional<Endpoint> to;
    Endpoint recipient;
    Message message;
    std::string annotation;
  };

  void require_registered(Endpoint endpoint) const;
  void enqueue_to_party(Endpoint from, PartyId to, const Message& msg);
  void record(const Pending& item, EntryKind kind, std::string annotation);

  std::uint32_t n_;
  std::map<PartyId, PartyHandler> parties_;
  std::optional<AttackerHandler> attacker_;
  InterpositionPolicy policy_;
  std::deque<Pending> queue_;
  Transcript transcript_;
  std::string stage_;
  std::size_t delivery_limit_;
};

}  // namespace ikalab
