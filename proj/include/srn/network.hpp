#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srn/bits.hpp"
#include "srn/channel.hpp"
#include "srn/common.hpp"
#include "srn/ldpc.hpp"
#include "srn/lwe.hpp"
#include "srn/qsdc.hpp"
#include "srn/rng.hpp"
#include "srn/transcript.hpp"

namespace srn::network {

enum class NodeRole : uint8_t { Endpoint = 0, Repeater = 1 };

struct Node {
  std::string id;
  NodeRole role = NodeRole::Endpoint;
};

struct Link {
  std::string a, b;
  channel::ChannelModel channel;  // channel.label is the hop id
};

struct Topology {
  std::vector<Node> nodes;
  std::vector<Link> links;

  bool has_node(const std::string& id) const;
  const Node& node(const std::string& id) const;
  const Link* link_between(const std::string& u, const std::string& v) const;
  const Link* link_by_label(const std::string& label) const;
  std::vector<std::string> neighbors(const std::string& id) const;  // sorted
  void validate() const;
};

struct Hop {
  const Link* link = nullptr;
  std::string from, to;  // data direction
  const std::string& label() const { return link->channel.label; }
};

// Shortest path by hop count; BFS expands neighbors in lexicographic
// order, which fixes the tie-break deterministically.  src == dst gives an
// empty route; a disconnected pair throws.
std::vector<Hop> find_route(const Topology& topo, const std::string& src,
                            const std::string& dst);

enum class OutcomeStatus : uint8_t { Delivered = 0, Aborted = 1, DecodeFailed = 2 };

struct HopReport {
  std::string hop;
  long label_tested = 0;
  long label_errors = 0;
  double label_rate = 0;
  bool flagged = false;
  bool inconclusive = true;  // fewer than min_bits label bits observed
  double mean_qber = 0;
  int rounds = 0;
};

struct SessionResult {
  OutcomeStatus status = OutcomeStatus::Delivered;
  std::string abort_hop;
  int abort_round = 0;  // 0 for DecodeFailed
  Bytes payload;        // delivered payload at dst
  std::vector<qsdc::QberRecord> qber_series;
  int retransmissions = 0;
  int frames_total = 0;           // logical FEC frames
  uint64_t frames_attempted = 0;  // wire attempts across hops and retries
  size_t ciphertext_block_bytes = 0;
  qsdc::LabelTally labels;
  std::vector<HopReport> hop_reports;
};

// Session wiring owned by the caller (the harness): one HopSetup per route
// hop with streams, channel, and Eve already attached.  Label tallies are
// wired per session by srn_send/trn_send.
struct SessionEnv {
  std::vector<Hop> route;
  std::vector<qsdc::HopSetup> hops;  // parallel to route
  net::ClassicalBus* bus = nullptr;
  const fec::LdpcCode* code = nullptr;
  qsdc::ProtocolParams protocol;
  lwe::LweParams lwe_params;
  lwe::PublicKey dst_pk;
  lwe::SecretKey dst_sk;
  rng::RandomStream* pqc_rng = nullptr;     // encryption randomness at src
  rng::StreamFactory* streams = nullptr;    // TRN per-hop key material
  long localization_min_bits = 500;
  uint64_t frame_counter = 0;

  void validate() const;
  const std::string& src() const { return route.front().from; }
  const std::string& dst() const { return route.back().to; }
};

// Hop-by-hop ciphertext relay: encrypt at src, FEC-protected QSDC on every
// hop, repeaters decode/log/re-encode, dst reassembles and decrypts.
SessionResult srn_send(SessionEnv& env, const Bytes& payload);

// Trusted-repeater baseline: per-hop keys over the quantum links, key1
// relayed under one-time pads, payload one-time-padded with key1 over the
// classical channel.  Every intermediate node learns key1.
SessionResult trn_send(SessionEnv& env, const Bytes& payload);

enum class CompromiseOutcome : uint8_t { Nothing = 0, CiphertextOnly = 1, RecoveredPlaintext = 2 };

struct CompromiseResult {
  CompromiseOutcome outcome = CompromiseOutcome::Nothing;
  Bytes recovered;    // plaintext when RecoveredPlaintext
  Bytes ciphertext;   // reassembled stream bytes when CiphertextOnly
};

// Replays a node's transcript as an attacker who seized the node after the
// session; dst_sk models the computational-security boundary (pass null
// for an attacker without the destination key).
CompromiseResult compromise_node(const net::ClassicalBus& bus, const std::string& node,
                                 const lwe::LweParams& params, const lwe::SecretKey* dst_sk);

std::vector<HopReport> build_hop_reports(const std::vector<Hop>& route,
                                         const qsdc::LabelTally& labels,
                                         const std::vector<qsdc::QberRecord>& qber,
                                         double threshold, long min_bits);

// Flagged hop ids (label error rate above threshold with enough bits).
std::vector<std::string> localize_eavesdropping(const std::vector<HopReport>& reports);

}  // namespace srn::network
