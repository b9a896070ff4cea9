#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srn/bits.hpp"
#include "srn/channel.hpp"
#include "srn/common.hpp"
#include "srn/quantum.hpp"
#include "srn/rng.hpp"
#include "srn/transcript.hpp"

namespace srn::qsdc {

enum class ProtocolKind : uint8_t { Eqsdc = 0, Dl04 = 1 };

struct ProtocolParams {
  ProtocolKind kind = ProtocolKind::Eqsdc;
  // efficient-QSDC: check pairs as a fraction of total sequence length,
  // unless an absolute count is given.  Round 1 tests half the surviving
  // check pairs (single-qubit compare, 1 bit each), round 2 the rest
  // (Bell compare, 2 bits each).
  double check_fraction = 0.25;
  std::optional<int> n_check;
  // DL04: forward-pass check fraction of arrived photons, return-pass
  // check fraction of encoded positions, batch oversizing slack.
  double dl04_forward_check_fraction = 0.10;
  double dl04_return_check_fraction = 0.10;
  double dl04_batch_slack = 0.15;
  double qber_threshold = 0.057;
  int max_retries = 3;  // additional attempts per frame
  int label_bits = 32;  // tail label photons per transmitted batch

  void validate() const;
  int eqsdc_check_count(int message_pairs) const;
};

struct QberEstimate {
  int tested = 0;
  int errors = 0;
  double threshold = 0.057;
  double rate() const { return tested > 0 ? static_cast<double>(errors) / tested : 0.0; }
  bool above_threshold() const { return rate() > threshold; }
};

// Pairwise compare of announced vs observed check bits; sizes must match.
QberEstimate estimate_qber(const BitVec& expected, const BitVec& observed, double threshold);

struct QberRecord {
  uint64_t frame_id = 0;
  std::string hop;
  int round = 0;  // 1 or 2
  QberEstimate est;
  bool aborted = false;
};

// Per-hop running totals of publicized-label comparisons, the data behind
// eavesdropping localization.
struct LabelTally {
  struct Hop {
    long tested = 0;
    long errors = 0;
    double rate() const { return tested > 0 ? static_cast<double>(errors) / tested : 0.0; }
  };
  std::map<std::string, Hop> by_hop;
  void add(const std::string& hop, long tested, long errors);
};

// One quantum transmission batch: check plan plus the tail label photons'
// prepared bases/values (publicized after the attempt concludes).
struct QuantumFrame {
  uint64_t frame_id = 0;
  std::vector<uint32_t> check_positions;  // sorted, subset of [0, len)
  std::vector<uint8_t> check_values;      // eqsdc: two-bit Bell values
  std::vector<uint8_t> label_bases;       // 0 = Z, 1 = X
  BitVec label_values;
};

struct EqsdcBatch {
  // Joint (a,b) pair states in position order; each contributes one half
  // to the a-sequence and one to the b-sequence.
  std::vector<quantum::PureState> pairs;
  std::vector<uint8_t> bell_values;  // prepared two-bit value per position
  QuantumFrame frame;
};

// Builds the ordered EPR-pair sequence: message bits two per pair in
// order, check pairs with random Bell values at random positions.
EqsdcBatch eqsdc_build_sequences(const BitVec& message_bits, int n_check, rng::RandomStream& rng);

// Everything a single hop's transport needs.  Quantum carriers flow
// tx_node -> rx_node for efficient-QSDC; DL04 adds the reverse forward
// pass (the data receiver prepares the photons).
struct HopSetup {
  const channel::ChannelModel* channel = nullptr;
  const channel::EveStrategy* eve = nullptr;  // optional
  std::string tx_node;
  std::string rx_node;
  rng::RandomStream* noise_rng = nullptr;
  rng::RandomStream* eve_rng = nullptr;
  rng::RandomStream* proto_rng = nullptr;
  net::ClassicalBus* bus = nullptr;
  channel::NoiseLog* noise_log = nullptr;  // optional
  LabelTally* labels = nullptr;            // optional

  const std::string& hop_label() const { return channel->label; }
  void validate() const;
};

enum class AttemptStatus : uint8_t { Delivered = 0, AbortedRound1 = 1, AbortedRound2 = 2 };

struct FrameAttempt {
  AttemptStatus status = AttemptStatus::Delivered;
  QberEstimate round1;
  QberEstimate round2;
  bool round2_ran = false;
  BitVec bits;    // receiver's payload view, message length
  BitVec erased;  // 1 = lost carrier / batch shortfall at that bit
  int carriers = 0;  // quantum transmissions this attempt, labels included
};

// Single attempt of one frame over one hop (no retry, no FEC).
FrameAttempt eqsdc_transport_frame(const HopSetup& hop, uint64_t frame_id,
                                   const BitVec& message_bits, const ProtocolParams& pp);
FrameAttempt dl04_transport_frame(const HopSetup& hop, uint64_t frame_id,
                                  const BitVec& message_bits, const ProtocolParams& pp);
FrameAttempt transport_frame(const HopSetup& hop, uint64_t frame_id,
                             const BitVec& message_bits, const ProtocolParams& pp);

enum class SessionStatus : uint8_t { Delivered = 0, Aborted = 1 };

// Single-hop session outcome (the raw protocol, FEC-free).
struct SessionOutcome {
  SessionStatus status = SessionStatus::Delivered;
  std::string hop;
  int abort_round = 0;
  BitVec payload_bits;
  BitVec erased;
  std::vector<QberRecord> qber_series;
  int retransmissions = 0;
  int attempts = 0;
};

// Retry wrapper: attempts until Delivered or the retry budget is spent.
// frame_counter advances once per wire attempt.
SessionOutcome run_session(const HopSetup& hop, const BitVec& message_bits,
                           const ProtocolParams& pp, uint64_t& frame_counter);
SessionOutcome eqsdc_run_session(const HopSetup& hop, const BitVec& message_bits,
                                 const ProtocolParams& pp, uint64_t& frame_counter);
SessionOutcome dl04_run_block(const HopSetup& hop, const BitVec& payload_bits,
                              const ProtocolParams& pp, uint64_t& frame_counter);

// DL04 batch size for a payload over a channel with the given per-pass
// survival probability (both passes incur loss).
int dl04_batch_size(int payload_bits, double survival, const ProtocolParams& pp);

}  // namespace srn::qsdc
