#include "srn/qsdc.hpp"

#include <algorithm>
#include <cmath>

namespace srn::qsdc {

using quantum::Basis;
using quantum::PureState;

void ProtocolParams::validate() const {
  if (check_fraction < 0 || check_fraction > 0.9)
    throw ContractError("ProtocolParams: check_fraction must be in [0, 0.9]");
  if (n_check && *n_check < 0) throw ContractError("ProtocolParams: n_check must be >= 0");
  if (dl04_forward_check_fraction < 0 || dl04_forward_check_fraction > 0.5 ||
      dl04_return_check_fraction < 0 || dl04_return_check_fraction > 0.5)
    throw ContractError("ProtocolParams: dl04 check fractions must be in [0, 0.5]");
  if (dl04_batch_slack < 0 || dl04_batch_slack > 4)
    throw ContractError("ProtocolParams: dl04_batch_slack must be in [0, 4]");
  if (qber_threshold <= 0 || qber_threshold >= 1)
    throw ContractError("ProtocolParams: qber_threshold must be in (0, 1)");
  if (max_retries < 0) throw ContractError("ProtocolParams: max_retries must be >= 0");
  if (label_bits < 0) throw ContractError("ProtocolParams: label_bits must be >= 0");
}

int ProtocolParams::eqsdc_check_count(int message_pairs) const {
  if (n_check) return *n_check;
  // n_check = fraction of the full sequence:  nc = f * (mp + nc).
  return static_cast<int>(std::llround(message_pairs * check_fraction / (1.0 - check_fraction)));
}

QberEstimate estimate_qber(const BitVec& expected, const BitVec& observed, double threshold) {
  if (expected.size() != observed.size())
    throw ContractError("estimate_qber: expected/observed size mismatch");
  QberEstimate est;
  est.threshold = threshold;
  est.tested = static_cast<int>(expected.size());
  for (size_t i = 0; i < expected.size(); ++i)
    if (expected[i] != observed[i]) est.errors++;
  return est;
}

void LabelTally::add(const std::string& hop, long tested, long errors) {
  auto& h = by_hop[hop];
  h.tested += tested;
  h.errors += errors;
}

void HopSetup::validate() const {
  if (!channel || !noise_rng || !eve_rng || !proto_rng || !bus)
    throw ContractError("HopSetup: missing channel, rng stream, or bus");
  if (tx_node.empty() || rx_node.empty() || tx_node == rx_node)
    throw ContractError("HopSetup: bad endpoint names");
}

EqsdcBatch eqsdc_build_sequences(const BitVec& message_bits, int n_check,
                                 rng::RandomStream& rng) {
  if (message_bits.size() % 2 != 0)
    throw ContractError("eqsdc_build_sequences: message bit count must be even");
  if (n_check < 0) throw ContractError("eqsdc_build_sequences: n_check must be >= 0");
  const int mp = static_cast<int>(message_bits.size() / 2);
  const int len = mp + n_check;

  EqsdcBatch out;
  out.frame.check_positions = rng.sample_indices(static_cast<uint32_t>(len),
                                                 static_cast<uint32_t>(n_check));
  std::vector<uint8_t> is_check(static_cast<size_t>(len), 0);
  for (uint32_t pos : out.frame.check_positions) is_check[pos] = 1;

  out.bell_values.resize(static_cast<size_t>(len));
  out.pairs.reserve(static_cast<size_t>(len));
  int msg_pair = 0;
  for (int i = 0; i < len; ++i) {
    uint8_t bell;
    if (is_check[static_cast<size_t>(i)]) {
      bell = static_cast<uint8_t>((rng.next_bit() << 1) | rng.next_bit());
      out.frame.check_values.push_back(bell);
    } else {
      bell = static_cast<uint8_t>((message_bits[static_cast<size_t>(2 * msg_pair)] << 1) |
                                  message_bits[static_cast<size_t>(2 * msg_pair + 1)]);
      msg_pair++;
    }
    out.bell_values[static_cast<size_t>(i)] = bell;
    out.pairs.push_back(quantum::prepare_bell(bell));
  }
  return out;
}

namespace {

const channel::EveStrategy kNoEve{};

const channel::EveStrategy& eve_of(const HopSetup& hop) {
  return hop.eve ? *hop.eve : kNoEve;
}

uint8_t corr_bit(Basis basis, uint8_t bell) {
  return basis == Basis::Z ? static_cast<uint8_t>((bell >> 1) & 1)
                           : static_cast<uint8_t>(bell & 1);
}

Basis bit_to_basis(uint8_t b) { return b ? Basis::X : Basis::Z; }

// One EPR pair tracked through both transits.  While entangled the joint
// (a,b) state lives in `joint`; an intercept-resend collapse splits it
// into two singles.
struct PairState {
  PureState joint;
  PureState a, b;
  bool collapsed = false;
  bool dead = false;  // lost in transit or consumed by round 1
  uint8_t bell = 0;
};

// Tail label photons of one transmitted batch.
struct LabelSet {
  std::vector<uint8_t> bases;  // 0 = Z, 1 = X
  BitVec values;
  std::vector<std::optional<PureState>> arrived;  // receiver side
  std::vector<uint32_t> lost;
};

LabelSet transmit_labels(const HopSetup& hop, uint64_t frame_id, int count) {
  LabelSet ls;
  ls.bases.reserve(static_cast<size_t>(count));
  ls.values.reserve(static_cast<size_t>(count));
  ls.arrived.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    uint8_t basis_bit = static_cast<uint8_t>(hop.proto_rng->next_bit());
    uint8_t value = static_cast<uint8_t>(hop.proto_rng->next_bit());
    PureState st = quantum::basis_eigenstate(bit_to_basis(basis_bit), value);
    auto out = channel::transmit_qubit(std::move(st), *hop.channel, eve_of(hop), frame_id,
                                       *hop.noise_rng, *hop.eve_rng, /*charge*/ true,
                                       hop.noise_log);
    if (!out) ls.lost.push_back(static_cast<uint32_t>(i));
    ls.arrived.push_back(std::move(out));
    ls.bases.push_back(basis_bit);
    ls.values.push_back(value);
  }
  return ls;
}

// Publicize the labels: the batch transmitter announces (index, basis,
// value), the receiver measures its stored label photons in the announced
// bases and reports the comparison.  Feeds the localization tally.
void publish_labels(const HopSetup& hop, const std::string& announce_kind,
                    const std::string& report_kind, const std::string& from,
                    const std::string& to, LabelSet& ls) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(ls.bases.size()));
  for (size_t i = 0; i < ls.bases.size(); ++i) {
    w.u32(static_cast<uint32_t>(i));
    w.u8(ls.bases[i]);
    w.u8(ls.values[i]);
  }
  hop.bus->send(from, to, announce_kind, w.take());

  long tested = 0, errors = 0;
  for (size_t i = 0; i < ls.arrived.size(); ++i) {
    if (!ls.arrived[i]) continue;
    uint8_t outcome =
        quantum::measure(*ls.arrived[i], bit_to_basis(ls.bases[i]), *hop.proto_rng).outcome;
    tested++;
    if (outcome != ls.values[i]) errors++;
  }
  ByteWriter r;
  r.u32(static_cast<uint32_t>(tested));
  r.u32(static_cast<uint32_t>(errors));
  hop.bus->send(to, from, report_kind, r.take());
  if (hop.labels) hop.labels->add(hop.hop_label(), tested, errors);
}

void send_abort(const HopSetup& hop, const std::string& kind, uint8_t round) {
  ByteWriter w;
  w.u8(round);
  hop.bus->send(hop.tx_node, hop.rx_node, kind, w.take());
}

}  // namespace

FrameAttempt eqsdc_transport_frame(const HopSetup& hop, uint64_t frame_id,
                                   const BitVec& message_bits, const ProtocolParams& pp) {
  hop.validate();
  pp.validate();
  const auto& ch = *hop.channel;
  const auto& eve = eve_of(hop);
  const bool eve_active = eve.active_on(ch.label, frame_id);
  auto& noise = *hop.noise_rng;
  auto& evr = *hop.eve_rng;
  auto& proto = *hop.proto_rng;
  auto& bus = *hop.bus;

  const int mp = static_cast<int>(message_bits.size() / 2);
  const int nc = pp.eqsdc_check_count(mp);
  EqsdcBatch batch = eqsdc_build_sequences(message_bits, nc, proto);
  batch.frame.frame_id = frame_id;
  const int len = static_cast<int>(batch.pairs.size());

  FrameAttempt att;
  att.bits.assign(message_bits.size(), 0);
  att.erased.assign(message_bits.size(), 0);

  std::vector<PairState> pairs(static_cast<size_t>(len));
  std::vector<uint8_t> is_check(static_cast<size_t>(len), 0);
  for (uint32_t pos : batch.frame.check_positions) is_check[pos] = 1;
  for (int i = 0; i < len; ++i) {
    pairs[static_cast<size_t>(i)].joint = std::move(batch.pairs[static_cast<size_t>(i)]);
    pairs[static_cast<size_t>(i)].bell = batch.bell_values[static_cast<size_t>(i)];
  }

  {
    ByteWriter meta;
    meta.u64(frame_id);
    meta.u32(static_cast<uint32_t>(len));
    meta.u32(static_cast<uint32_t>(nc));
    meta.u32(static_cast<uint32_t>(pp.label_bits));
    meta.u32(static_cast<uint32_t>(message_bits.size()));
    bus.send(hop.tx_node, hop.rx_node, "eq.meta", meta.take());
  }

  // (b)-sequence transit, depolarization charged (first crossing of the pair).
  std::vector<uint32_t> b_lost;
  for (int i = 0; i < len; ++i) {
    PairState& p = pairs[static_cast<size_t>(i)];
    auto d = channel::draw_transit(ch, eve_active, eve.kind, /*charge*/ true, noise, evr,
                                   hop.noise_log);
    att.carriers++;
    if (d.lost) {
      p.dead = true;
      p.joint = PureState{};
      b_lost.push_back(static_cast<uint32_t>(i));
      continue;
    }
    if (d.eve_basis) {
      auto hm = quantum::measure_half(p.joint, 1, *d.eve_basis, evr);
      p.a = std::move(hm.remainder);
      p.b = quantum::basis_eigenstate(*d.eve_basis, hm.outcome);
      p.collapsed = true;
      p.joint = PureState{};
    }
    if (d.pauli) {
      if (p.collapsed)
        p.b = quantum::apply_pauli(p.b, *d.pauli);
      else
        p.joint = quantum::apply_pauli(p.joint, *d.pauli, 1);
    }
  }
  LabelSet b_labels = transmit_labels(hop, frame_id, pp.label_bits);
  att.carriers += pp.label_bits;

  {
    ByteWriter w;
    w.u32list(b_lost);
    w.u32list(b_labels.lost);
    bus.send(hop.rx_node, hop.tx_node, "eq.b_lost", w.take());
  }

  // Round 1: a random half of the surviving check pairs, single-qubit
  // compare.  The sender measures her halves and announces the partner
  // outcome implied by the prepared Bell value.
  std::vector<uint32_t> surv_checks;
  for (int i = 0; i < len; ++i)
    if (is_check[static_cast<size_t>(i)] && !pairs[static_cast<size_t>(i)].dead)
      surv_checks.push_back(static_cast<uint32_t>(i));
  const uint32_t r1n = static_cast<uint32_t>(surv_checks.size() / 2);
  std::vector<uint32_t> pick =
      proto.sample_indices(static_cast<uint32_t>(surv_checks.size()), r1n);

  BitVec r1_expected, r1_observed;
  ByteWriter r1a;
  r1a.u32(r1n);
  for (uint32_t idx : pick) {
    const uint32_t pos = surv_checks[idx];
    PairState& p = pairs[pos];
    Basis basis = bit_to_basis(static_cast<uint8_t>(proto.next_bit()));
    uint8_t oa, ob;
    if (p.collapsed) {
      oa = quantum::measure(p.a, basis, proto).outcome;
      ob = quantum::measure(p.b, basis, proto).outcome;
    } else {
      auto hm = quantum::measure_half(p.joint, 0, basis, proto);
      oa = hm.outcome;
      ob = quantum::measure(hm.remainder, basis, proto).outcome;
      p.joint = PureState{};
    }
    p.dead = true;  // consumed by the check
    uint8_t expected = static_cast<uint8_t>(oa ^ corr_bit(basis, p.bell));
    r1a.u32(pos);
    r1a.u8(static_cast<uint8_t>(basis));
    r1a.u8(expected);
    r1_expected.push_back(expected);
    r1_observed.push_back(ob);
  }
  bus.send(hop.tx_node, hop.rx_node, "eq.r1_announce", r1a.take());
  att.round1 = estimate_qber(r1_expected, r1_observed, pp.qber_threshold);
  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(att.round1.tested));
    w.u32(static_cast<uint32_t>(att.round1.errors));
    bus.send(hop.rx_node, hop.tx_node, "eq.r1_result", w.take());
  }
  if (att.round1.above_threshold()) {
    send_abort(hop, "eq.abort", 1);
    publish_labels(hop, "eq.label_announce.b", "eq.label_report.b", hop.tx_node, hop.rx_node,
                   b_labels);
    att.status = AttemptStatus::AbortedRound1;
    return att;
  }

  // (a)-sequence transit over still-live pairs; the pair was already
  // charged with depolarization on the first crossing.
  std::vector<uint32_t> a_lost;
  for (int i = 0; i < len; ++i) {
    PairState& p = pairs[static_cast<size_t>(i)];
    if (p.dead) continue;
    auto d = channel::draw_transit(ch, eve_active, eve.kind, /*charge*/ false, noise, evr,
                                   hop.noise_log);
    att.carriers++;
    if (d.lost) {
      p.dead = true;
      p.joint = PureState{};
      p.a = PureState{};
      p.b = PureState{};
      a_lost.push_back(static_cast<uint32_t>(i));
      continue;
    }
    if (d.eve_basis) {
      if (p.collapsed) {
        p.a = quantum::measure(p.a, *d.eve_basis, evr).post;
      } else {
        auto hm = quantum::measure_half(p.joint, 0, *d.eve_basis, evr);
        p.b = std::move(hm.remainder);
        p.a = quantum::basis_eigenstate(*d.eve_basis, hm.outcome);
        p.collapsed = true;
        p.joint = PureState{};
      }
    }
    if (d.pauli) {
      if (p.collapsed)
        p.a = quantum::apply_pauli(p.a, *d.pauli);
      else
        p.joint = quantum::apply_pauli(p.joint, *d.pauli, 0);
    }
  }
  LabelSet a_labels = transmit_labels(hop, frame_id, pp.label_bits);
  att.carriers += pp.label_bits;

  {
    ByteWriter w;
    w.u32list(a_lost);
    w.u32list(a_labels.lost);
    bus.send(hop.rx_node, hop.tx_node, "eq.a_lost", w.take());
  }

  // Receiver Bell-measures every complete pair.
  std::vector<int8_t> rx_bell(static_cast<size_t>(len), -1);
  for (int i = 0; i < len; ++i) {
    PairState& p = pairs[static_cast<size_t>(i)];
    if (p.dead) continue;
    if (p.collapsed) {
      rx_bell[static_cast<size_t>(i)] =
          static_cast<int8_t>(quantum::bell_measure(quantum::tensor(p.a, p.b), proto).bits);
    } else {
      rx_bell[static_cast<size_t>(i)] =
          static_cast<int8_t>(quantum::bell_measure(p.joint, proto).bits);
    }
  }

  // Round 2: remaining check pairs, two bits per Bell compare.
  BitVec r2_expected, r2_observed;
  std::vector<uint32_t> r2_positions;
  for (int i = 0; i < len; ++i)
    if (is_check[static_cast<size_t>(i)] && !pairs[static_cast<size_t>(i)].dead)
      r2_positions.push_back(static_cast<uint32_t>(i));
  ByteWriter r2a;
  r2a.u32(static_cast<uint32_t>(r2_positions.size()));
  for (uint32_t pos : r2_positions) {
    uint8_t bell = pairs[pos].bell;
    r2a.u32(pos);
    r2a.u8(bell);
    uint8_t got = static_cast<uint8_t>(rx_bell[pos]);
    r2_expected.push_back(static_cast<uint8_t>((bell >> 1) & 1));
    r2_expected.push_back(static_cast<uint8_t>(bell & 1));
    r2_observed.push_back(static_cast<uint8_t>((got >> 1) & 1));
    r2_observed.push_back(static_cast<uint8_t>(got & 1));
  }
  bus.send(hop.tx_node, hop.rx_node, "eq.r2_announce", r2a.take());
  att.round2 = estimate_qber(r2_expected, r2_observed, pp.qber_threshold);
  att.round2_ran = true;
  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(att.round2.tested));
    w.u32(static_cast<uint32_t>(att.round2.errors));
    bus.send(hop.rx_node, hop.tx_node, "eq.r2_result", w.take());
  }
  if (att.round2.above_threshold()) {
    send_abort(hop, "eq.abort", 2);
    publish_labels(hop, "eq.label_announce.b", "eq.label_report.b", hop.tx_node, hop.rx_node,
                   b_labels);
    publish_labels(hop, "eq.label_announce.a", "eq.label_report.a", hop.tx_node, hop.rx_node,
                   a_labels);
    att.status = AttemptStatus::AbortedRound2;
    return att;
  }

  // Message readout: non-check pairs in position order carry two bits each.
  int msg_pair = 0;
  for (int i = 0; i < len; ++i) {
    if (is_check[static_cast<size_t>(i)]) continue;
    const size_t hi = static_cast<size_t>(2 * msg_pair);
    if (pairs[static_cast<size_t>(i)].dead) {
      att.erased[hi] = 1;
      att.erased[hi + 1] = 1;
    } else {
      uint8_t got = static_cast<uint8_t>(rx_bell[static_cast<size_t>(i)]);
      att.bits[hi] = static_cast<uint8_t>((got >> 1) & 1);
      att.bits[hi + 1] = static_cast<uint8_t>(got & 1);
    }
    msg_pair++;
  }

  publish_labels(hop, "eq.label_announce.b", "eq.label_report.b", hop.tx_node, hop.rx_node,
                 b_labels);
  publish_labels(hop, "eq.label_announce.a", "eq.label_report.a", hop.tx_node, hop.rx_node,
                 a_labels);
  att.status = AttemptStatus::Delivered;
  return att;
}

int dl04_batch_size(int payload_bits, double survival, const ProtocolParams& pp) {
  double usable = survival * survival * (1.0 - pp.dl04_forward_check_fraction) *
                  (1.0 - pp.dl04_return_check_fraction);
  if (usable <= 1e-6) throw ContractError("dl04_batch_size: channel too lossy");
  int n = static_cast<int>(std::ceil(payload_bits / usable * (1.0 + pp.dl04_batch_slack)));
  return std::max(n, 1);
}

FrameAttempt dl04_transport_frame(const HopSetup& hop, uint64_t frame_id,
                                  const BitVec& message_bits, const ProtocolParams& pp) {
  hop.validate();
  pp.validate();
  const auto& ch = *hop.channel;
  const auto& eve = eve_of(hop);
  auto& noise = *hop.noise_rng;
  auto& evr = *hop.eve_rng;
  auto& proto = *hop.proto_rng;
  auto& bus = *hop.bus;
  // Data sender = encoder; data receiver = photon preparer.  Forward pass
  // travels rx -> tx, the encoded return pass tx -> rx.
  const std::string& snd = hop.tx_node;
  const std::string& rcv = hop.rx_node;

  const int payload_bits = static_cast<int>(message_bits.size());
  const int batch = dl04_batch_size(payload_bits, ch.survival_probability(), pp);

  FrameAttempt att;
  att.bits.assign(message_bits.size(), 0);
  att.erased.assign(message_bits.size(), 0);

  {
    ByteWriter w;
    w.u64(frame_id);
    w.u32(static_cast<uint32_t>(payload_bits));
    bus.send(snd, rcv, "dl.req", w.take());
  }
  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(batch));
    w.u32(static_cast<uint32_t>(pp.label_bits));
    bus.send(rcv, snd, "dl.meta", w.take());
  }

  // Receiver prepares the batch, keeping its preparation record secret.
  std::vector<uint8_t> prep_basis(static_cast<size_t>(batch));
  BitVec prep_bit(static_cast<size_t>(batch));
  std::vector<std::optional<PureState>> at_sender(static_cast<size_t>(batch));
  std::vector<uint32_t> f_lost;
  for (int i = 0; i < batch; ++i) {
    prep_basis[static_cast<size_t>(i)] = static_cast<uint8_t>(proto.next_bit());
    prep_bit[static_cast<size_t>(i)] = static_cast<uint8_t>(proto.next_bit());
    PureState st = quantum::basis_eigenstate(bit_to_basis(prep_basis[static_cast<size_t>(i)]),
                                             prep_bit[static_cast<size_t>(i)]);
    auto out = channel::transmit_qubit(std::move(st), ch, eve, frame_id, noise, evr,
                                       /*charge*/ true, hop.noise_log);
    att.carriers++;
    if (!out) f_lost.push_back(static_cast<uint32_t>(i));
    at_sender[static_cast<size_t>(i)] = std::move(out);
  }
  LabelSet f_labels = transmit_labels(hop, frame_id, pp.label_bits);
  att.carriers += pp.label_bits;

  {
    ByteWriter w;
    w.u32list(f_lost);
    w.u32list(f_labels.lost);
    bus.send(snd, rcv, "dl.f_lost", w.take());
  }

  std::vector<uint32_t> arrived;
  for (int i = 0; i < batch; ++i)
    if (at_sender[static_cast<size_t>(i)]) arrived.push_back(static_cast<uint32_t>(i));

  // Forward check: the sender measures a random fraction in random bases
  // and announces; only preparation-basis matches are comparable.
  const uint32_t fc_count = static_cast<uint32_t>(
      std::floor(arrived.size() * pp.dl04_forward_check_fraction));
  std::vector<uint32_t> fc_pick =
      proto.sample_indices(static_cast<uint32_t>(arrived.size()), fc_count);
  std::vector<uint8_t> consumed(static_cast<size_t>(batch), 0);
  BitVec f_expected, f_observed;
  ByteWriter fca;
  fca.u32(fc_count);
  for (uint32_t idx : fc_pick) {
    const uint32_t pos = arrived[idx];
    Basis basis = bit_to_basis(static_cast<uint8_t>(proto.next_bit()));
    uint8_t outcome = quantum::measure(*at_sender[pos], basis, proto).outcome;
    at_sender[pos].reset();
    consumed[pos] = 1;
    fca.u32(pos);
    fca.u8(static_cast<uint8_t>(basis));
    fca.u8(outcome);
    if (bit_to_basis(prep_basis[pos]) == basis) {
      f_expected.push_back(prep_bit[pos]);
      f_observed.push_back(outcome);
    }
  }
  bus.send(snd, rcv, "dl.f_check", fca.take());
  att.round1 = estimate_qber(f_expected, f_observed, pp.qber_threshold);
  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(att.round1.tested));
    w.u32(static_cast<uint32_t>(att.round1.errors));
    bus.send(rcv, snd, "dl.f_result", w.take());
  }
  if (att.round1.above_threshold()) {
    send_abort(hop, "dl.abort", 1);
    publish_labels(hop, "dl.label_announce.f", "dl.label_report.f", rcv, snd, f_labels);
    att.status = AttemptStatus::AbortedRound1;
    return att;
  }

  // Encode the remaining photons: I for 0, Y for 1.  A random subset
  // carries fresh check bits; the rest carry message bits in order.
  std::vector<uint32_t> remaining;
  for (uint32_t pos : arrived)
    if (!consumed[pos]) remaining.push_back(pos);
  const uint32_t rc_count = static_cast<uint32_t>(
      std::floor(remaining.size() * pp.dl04_return_check_fraction));
  std::vector<uint32_t> rc_pick =
      proto.sample_indices(static_cast<uint32_t>(remaining.size()), rc_count);
  std::vector<uint8_t> is_rcheck(remaining.size(), 0);
  for (uint32_t idx : rc_pick) is_rcheck[idx] = 1;

  std::vector<int32_t> slot_msg_index(remaining.size(), -1);
  BitVec slot_bit(remaining.size(), 0);
  std::vector<std::pair<uint32_t, uint8_t>> r_checks;  // (position, bit)
  int msg_idx = 0;
  for (size_t s = 0; s < remaining.size(); ++s) {
    uint8_t bit;
    if (is_rcheck[s]) {
      bit = static_cast<uint8_t>(proto.next_bit());
      r_checks.emplace_back(remaining[s], bit);
    } else if (msg_idx < payload_bits) {
      bit = message_bits[static_cast<size_t>(msg_idx)];
      slot_msg_index[s] = msg_idx++;
    } else {
      bit = static_cast<uint8_t>(proto.next_bit());  // surplus slot, ignored
    }
    slot_bit[s] = bit;
    if (bit) {
      const uint32_t pos = remaining[s];
      at_sender[pos] = quantum::apply_pauli(*at_sender[pos], quantum::PauliOp::Y);
    }
  }

  // Return transit; the photon was charged with depolarization on the
  // forward pass.
  std::vector<std::optional<PureState>> at_receiver(static_cast<size_t>(batch));
  std::vector<uint32_t> r_lost;
  for (uint32_t pos : remaining) {
    auto out = channel::transmit_qubit(std::move(*at_sender[pos]), ch, eve, frame_id, noise,
                                       evr, /*charge*/ false, hop.noise_log);
    att.carriers++;
    at_sender[pos].reset();
    if (!out) r_lost.push_back(pos);
    at_receiver[pos] = std::move(out);
  }
  LabelSet r_labels = transmit_labels(hop, frame_id, pp.label_bits);
  att.carriers += pp.label_bits;

  {
    ByteWriter w;
    w.u32list(r_lost);
    w.u32list(r_labels.lost);
    bus.send(rcv, snd, "dl.r_lost", w.take());
  }

  // Receiver decodes in the preparation basis: bit = (measured != prepared).
  std::vector<int8_t> decoded(static_cast<size_t>(batch), -1);
  for (uint32_t pos : remaining) {
    if (!at_receiver[pos]) continue;
    uint8_t outcome =
        quantum::measure(*at_receiver[pos], bit_to_basis(prep_basis[pos]), proto).outcome;
    decoded[pos] = static_cast<int8_t>(outcome != prep_bit[pos] ? 1 : 0);
  }

  // Round 2: sender announces its check positions and bits.
  BitVec r_expected, r_observed;
  ByteWriter rca;
  rca.u32(static_cast<uint32_t>(r_checks.size()));
  for (auto [pos, bit] : r_checks) {
    rca.u32(pos);
    rca.u8(bit);
    if (decoded[pos] >= 0) {
      r_expected.push_back(bit);
      r_observed.push_back(static_cast<uint8_t>(decoded[pos]));
    }
  }
  bus.send(snd, rcv, "dl.r_check", rca.take());
  att.round2 = estimate_qber(r_expected, r_observed, pp.qber_threshold);
  att.round2_ran = true;
  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(att.round2.tested));
    w.u32(static_cast<uint32_t>(att.round2.errors));
    bus.send(rcv, snd, "dl.r_result", w.take());
  }
  if (att.round2.above_threshold()) {
    send_abort(hop, "dl.abort", 2);
    publish_labels(hop, "dl.label_announce.f", "dl.label_report.f", rcv, snd, f_labels);
    publish_labels(hop, "dl.label_announce.r", "dl.label_report.r", snd, rcv, r_labels);
    att.status = AttemptStatus::AbortedRound2;
    return att;
  }

  // Message assembly: lost return photons and batch shortfall are erasures.
  att.erased.assign(att.erased.size(), 1);
  for (size_t s = 0; s < remaining.size(); ++s) {
    if (slot_msg_index[s] < 0) continue;
    const uint32_t pos = remaining[s];
    const size_t mi = static_cast<size_t>(slot_msg_index[s]);
    if (decoded[pos] >= 0) {
      att.bits[mi] = static_cast<uint8_t>(decoded[pos]);
      att.erased[mi] = 0;
    }
  }

  publish_labels(hop, "dl.label_announce.f", "dl.label_report.f", rcv, snd, f_labels);
  publish_labels(hop, "dl.label_announce.r", "dl.label_report.r", snd, rcv, r_labels);
  att.status = AttemptStatus::Delivered;
  return att;
}

FrameAttempt transport_frame(const HopSetup& hop, uint64_t frame_id,
                             const BitVec& message_bits, const ProtocolParams& pp) {
  return pp.kind == ProtocolKind::Eqsdc
             ? eqsdc_transport_frame(hop, frame_id, message_bits, pp)
             : dl04_transport_frame(hop, frame_id, message_bits, pp);
}

SessionOutcome run_session(const HopSetup& hop, const BitVec& message_bits,
                           const ProtocolParams& pp, uint64_t& frame_counter) {
  SessionOutcome out;
  out.hop = hop.hop_label();
  for (int attempt = 0; attempt <= pp.max_retries; ++attempt) {
    const uint64_t fid = frame_counter++;
    FrameAttempt att = transport_frame(hop, fid, message_bits, pp);
    out.attempts++;
    out.qber_series.push_back(
        {fid, out.hop, 1, att.round1, att.status == AttemptStatus::AbortedRound1});
    if (att.round2_ran)
      out.qber_series.push_back(
          {fid, out.hop, 2, att.round2, att.status == AttemptStatus::AbortedRound2});
    if (att.status == AttemptStatus::Delivered) {
      out.status = SessionStatus::Delivered;
      out.payload_bits = std::move(att.bits);
      out.erased = std::move(att.erased);
      out.retransmissions = attempt;
      return out;
    }
    out.abort_round = att.status == AttemptStatus::AbortedRound1 ? 1 : 2;
  }
  out.status = SessionStatus::Aborted;
  out.retransmissions = pp.max_retries;
  return out;
}

SessionOutcome eqsdc_run_session(const HopSetup& hop, const BitVec& message_bits,
                                 const ProtocolParams& pp, uint64_t& frame_counter) {
  ProtocolParams p = pp;
  p.kind = ProtocolKind::Eqsdc;
  return run_session(hop, message_bits, p, frame_counter);
}

SessionOutcome dl04_run_block(const HopSetup& hop, const BitVec& payload_bits,
                              const ProtocolParams& pp, uint64_t& frame_counter) {
  ProtocolParams p = pp;
  p.kind = ProtocolKind::Dl04;
  return run_session(hop, payload_bits, p, frame_counter);
}

}  // namespace srn::qsdc
