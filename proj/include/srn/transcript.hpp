#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srn/bits.hpp"
#include "srn/common.hpp"

namespace srn::net {

// Single logical timeline: every recorded event gets the next tick.
struct SimClock {
  uint64_t now = 0;
  uint64_t tick() { return ++now; }
};

struct TranscriptRecord {
  uint64_t time = 0;
  std::string kind;   // e.g. "eq.r1_announce", "srn.ct_frame", "trn.key1"
  std::string peer;   // counterparty for classical traffic, else empty
  char dir = '-';     // 'S' sent, 'R' received, '-' local
  Bytes data;
};

// Append-only record of everything a node held: classical traffic in both
// directions, measurement summaries, decoded frames, keys.
class NodeTranscript {
 public:
  explicit NodeTranscript(std::string node_id = "") : node_(std::move(node_id)) {}

  const std::string& node() const { return node_; }
  const std::vector<TranscriptRecord>& records() const { return records_; }

  void append(uint64_t time, std::string kind, Bytes data,
              std::string peer = "", char dir = '-');

  // True if `needle` occurs inside any single record's payload.
  bool contains_bytes(const Bytes& needle) const;
  // Records of one kind, in order.
  std::vector<const TranscriptRecord*> find_kind(const std::string& kind) const;

  // In-order concatenation of record payloads — the node's full byte view
  // (ciphertext blocks span several frame records, so containment checks
  // must run on the concatenation, not per record).
  Bytes concat_all() const;
  Bytes concat_kind(const std::string& kind) const;

  std::string render() const;  // hex log, one record per line

 private:
  std::string node_;
  std::vector<TranscriptRecord> records_;
};

// Authenticated, ordered classical message delivery between named nodes.
// Delivery is synchronous; both transcripts record the payload.
class ClassicalBus {
 public:
  ClassicalBus(SimClock& clock) : clock_(clock) {}

  void register_node(const std::string& id);
  bool knows(const std::string& id) const { return transcripts_.count(id) != 0; }

  NodeTranscript& transcript(const std::string& id);
  const NodeTranscript& transcript(const std::string& id) const;

  // Returns the delivered payload (identical bytes; the classical channel
  // is error-free and authenticated by construction).
  const Bytes& send(const std::string& from, const std::string& to,
                    const std::string& kind, Bytes payload);

  // Local (non-message) record on one node.
  void log_local(const std::string& node, const std::string& kind, Bytes data);

  SimClock& clock() { return clock_; }

  const std::map<std::string, NodeTranscript>& all() const { return transcripts_; }

 private:
  SimClock& clock_;
  std::map<std::string, NodeTranscript> transcripts_;
  Bytes last_delivered_;
};

}  // namespace srn::net
