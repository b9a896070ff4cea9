#include "srn/network.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace srn::network {

bool Topology::has_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return true;
  return false;
}

const Node& Topology::node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return n;
  throw ContractError("topology: unknown node " + id);
}

const Link* Topology::link_between(const std::string& u, const std::string& v) const {
  for (const auto& l : links)
    if ((l.a == u && l.b == v) || (l.a == v && l.b == u)) return &l;
  return nullptr;
}

const Link* Topology::link_by_label(const std::string& label) const {
  for (const auto& l : links)
    if (l.channel.label == label) return &l;
  return nullptr;
}

std::vector<std::string> Topology::neighbors(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& l : links) {
    if (l.a == id) out.push_back(l.b);
    if (l.b == id) out.push_back(l.a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Topology::validate() const {
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw ContractError("topology: empty node id");
    if (!ids.insert(n.id).second) throw ContractError("topology: duplicate node id " + n.id);
  }
  std::set<std::string> labels;
  for (const auto& l : links) {
    if (!has_node(l.a) || !has_node(l.b))
      throw ContractError("topology: link endpoint not a node (" + l.a + ", " + l.b + ")");
    if (l.a == l.b) throw ContractError("topology: self-loop at " + l.a);
    if (l.channel.label.empty()) throw ContractError("topology: link without a label");
    if (!labels.insert(l.channel.label).second)
      throw ContractError("topology: duplicate link label " + l.channel.label);
    l.channel.validate();
  }
}

std::vector<Hop> find_route(const Topology& topo, const std::string& src,
                            const std::string& dst) {
  if (!topo.has_node(src)) throw ContractError("find_route: unknown node " + src);
  if (!topo.has_node(dst)) throw ContractError("find_route: unknown node " + dst);
  if (src == dst) return {};

  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{src};
  parent[src] = "";
  while (!queue.empty() && !parent.count(dst)) {
    std::string u = queue.front();
    queue.pop_front();
    for (const auto& v : topo.neighbors(u)) {
      if (parent.count(v)) continue;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  if (!parent.count(dst)) throw ContractError("find_route: no route " + src + " -> " + dst);

  std::vector<std::string> path{dst};
  while (path.back() != src) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());

  std::vector<Hop> route;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const Link* l = topo.link_between(path[i], path[i + 1]);
    if (!l) throw ContractError("find_route: broken parent chain");
    route.push_back({l, path[i], path[i + 1]});
  }
  return route;
}

void SessionEnv::validate() const {
  if (route.empty()) throw ContractError("session: empty route");
  if (hops.size() != route.size()) throw ContractError("session: hops/route size mismatch");
  if (!bus || !code) throw ContractError("session: missing bus or FEC code");
  for (const auto& h : hops) h.validate();
}

namespace {

struct HopFrameOutcome {
  bool ok = false;
  OutcomeStatus fail_status = OutcomeStatus::Delivered;
  int fail_round = 0;
  BitVec decoded;
  int attempts = 0;
  std::vector<qsdc::QberRecord> records;
};

double crossover_from(const qsdc::FrameAttempt& att) {
  double p = att.round2.tested > 0 ? att.round2.rate() : att.round1.rate();
  return std::clamp(p, 0.002, 0.45);
}

// One FEC frame across one hop: encode, QSDC transport with the shared
// retry budget, sum-product decode, log the decoded frame at the receiver.
HopFrameOutcome relay_frame_over_hop(const qsdc::HopSetup& hop, const fec::LdpcCode& code,
                                     const qsdc::ProtocolParams& pp, const BitVec& message,
                                     uint64_t& frame_counter, const std::string& log_kind) {
  HopFrameOutcome out;
  const BitVec codeword = code.encode(message);
  for (int attempt = 0; attempt <= pp.max_retries; ++attempt) {
    const uint64_t fid = frame_counter++;
    qsdc::FrameAttempt att = qsdc::transport_frame(hop, fid, codeword, pp);
    out.attempts++;
    out.records.push_back({fid, hop.hop_label(), 1, att.round1,
                           att.status == qsdc::AttemptStatus::AbortedRound1});
    if (att.round2_ran)
      out.records.push_back({fid, hop.hop_label(), 2, att.round2,
                             att.status == qsdc::AttemptStatus::AbortedRound2});
    if (att.status != qsdc::AttemptStatus::Delivered) {
      out.fail_status = OutcomeStatus::Aborted;
      out.fail_round = att.status == qsdc::AttemptStatus::AbortedRound1 ? 1 : 2;
      continue;
    }
    auto decoded = code.decode(att.bits, att.erased, crossover_from(att));
    if (!decoded) {
      out.fail_status = OutcomeStatus::DecodeFailed;
      out.fail_round = 0;
      continue;
    }
    hop.bus->log_local(hop.rx_node, log_kind, bits_to_bytes(*decoded));
    out.ok = true;
    out.decoded = std::move(*decoded);
    return out;
  }
  return out;
}

void wire_labels(SessionEnv& env, qsdc::LabelTally* tally) {
  for (auto& h : env.hops) h.labels = tally;
}

void finish_reports(SessionEnv& env, SessionResult& res) {
  res.hop_reports = build_hop_reports(env.route, res.labels, res.qber_series,
                                      env.protocol.qber_threshold, env.localization_min_bits);
}

void absorb(SessionResult& res, const HopFrameOutcome& h) {
  res.frames_attempted += static_cast<uint64_t>(h.attempts);
  res.retransmissions += h.attempts - 1;
  res.qber_series.insert(res.qber_series.end(), h.records.begin(), h.records.end());
}

}  // namespace

SessionResult srn_send(SessionEnv& env, const Bytes& payload) {
  env.validate();
  if (!env.pqc_rng) throw ContractError("srn_send: missing pqc rng");
  SessionResult res;
  wire_labels(env, &res.labels);

  auto stream = lwe::encrypt_stream(env.lwe_params, env.dst_pk, payload, *env.pqc_rng);
  const Bytes raw = lwe::stream_to_bytes(stream, env.lwe_params);
  res.ciphertext_block_bytes =
      stream.blocks.size() * static_cast<size_t>(env.lwe_params.ciphertext_bytes());
  env.bus->log_local(env.src(), "srn.payload", payload);

  BitVec bits = bytes_to_bits(raw);
  const int k = env.code->k();
  const int frames = static_cast<int>((bits.size() + static_cast<size_t>(k) - 1) / k);
  bits.resize(static_cast<size_t>(frames) * k, 0);
  res.frames_total = frames;

  {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(frames));
    w.u32(static_cast<uint32_t>(raw.size()));
    Bytes meta = w.take();
    for (const auto& hop : env.route)
      env.bus->send(hop.from, hop.to, "srn.stream_meta", meta);
  }

  BitVec out_bits;
  out_bits.reserve(bits.size());
  for (int f = 0; f < frames; ++f) {
    BitVec msg(bits.begin() + static_cast<size_t>(f) * k,
               bits.begin() + static_cast<size_t>(f + 1) * k);
    for (size_t h = 0; h < env.route.size(); ++h) {
      auto hf = relay_frame_over_hop(env.hops[h], *env.code, env.protocol, msg,
                                     env.frame_counter, "srn.ct_frame");
      absorb(res, hf);
      if (!hf.ok) {
        res.status = hf.fail_status;
        res.abort_hop = env.route[h].label();
        res.abort_round = hf.fail_round;
        finish_reports(env, res);
        return res;
      }
      msg = std::move(hf.decoded);
    }
    out_bits.insert(out_bits.end(), msg.begin(), msg.end());
  }

  Bytes raw_rx = bits_to_bytes(out_bits);
  raw_rx.resize(raw.size());
  try {
    auto stream_rx = lwe::stream_from_bytes(raw_rx, env.lwe_params);
    res.payload = lwe::decrypt_stream(env.lwe_params, env.dst_sk, stream_rx);
  } catch (const lwe::PaddingError&) {
    res.status = OutcomeStatus::DecodeFailed;
    finish_reports(env, res);
    return res;
  }
  env.bus->log_local(env.dst(), "srn.payload", res.payload);
  res.status = OutcomeStatus::Delivered;
  finish_reports(env, res);
  return res;
}

SessionResult trn_send(SessionEnv& env, const Bytes& payload) {
  env.validate();
  if (!env.streams) throw ContractError("trn_send: missing stream factory");
  SessionResult res;
  wire_labels(env, &res.labels);
  env.bus->log_local(env.src(), "trn.payload", payload);

  const size_t len = payload.size();
  const int k = env.code->k();
  const size_t H = env.route.size();

  // Hop key h is generated by route[h].from and carried over hop h's
  // quantum link; both ends then share it (the receiver's view is the
  // FEC-decoded bits).
  std::vector<Bytes> key_tx(H), key_rx(H);
  for (size_t h = 0; h < H; ++h) {
    auto krng = env.streams->make("trn:key:" + std::to_string(h + 1));
    key_tx[h] = krng.next_bytes(len);

    BitVec kb = bytes_to_bits(key_tx[h]);
    const int frames = static_cast<int>((kb.size() + static_cast<size_t>(k) - 1) / k);
    kb.resize(static_cast<size_t>(frames) * k, 0);
    res.frames_total += frames;
    {
      ByteWriter w;
      w.u32(static_cast<uint32_t>(frames));
      w.u32(static_cast<uint32_t>(len));
      env.bus->send(env.route[h].from, env.route[h].to, "trn.key_meta", w.take());
    }
    BitVec got;
    got.reserve(kb.size());
    for (int f = 0; f < frames; ++f) {
      BitVec msg(kb.begin() + static_cast<size_t>(f) * k,
                 kb.begin() + static_cast<size_t>(f + 1) * k);
      auto hf = relay_frame_over_hop(env.hops[h], *env.code, env.protocol, msg,
                                     env.frame_counter, "trn.key_frame");
      absorb(res, hf);
      if (!hf.ok) {
        res.status = hf.fail_status;
        res.abort_hop = env.route[h].label();
        res.abort_round = hf.fail_round;
        finish_reports(env, res);
        return res;
      }
      got.insert(got.end(), hf.decoded.begin(), hf.decoded.end());
    }
    key_rx[h] = bits_to_bytes(got);
    key_rx[h].resize(len);
  }

  // key1 relay: each leg one-time-padded with the next hop key.  Every
  // node past the first hop recovers and logs key1.
  Bytes key1_view = key_rx[0];
  env.bus->log_local(env.route[0].to, "trn.key1", key1_view);
  for (size_t h = 1; h < H; ++h) {
    Bytes wire = xor_bytes(key1_view, key_tx[h]);
    env.bus->send(env.route[h].from, env.route[h].to, "trn.key_relay", wire);
    key1_view = xor_bytes(wire, key_rx[h]);
    env.bus->log_local(env.route[h].to, "trn.key1", key1_view);
  }

  // One-time-padded payload routed over the classical channel.
  Bytes ct = xor_bytes(payload, key_tx[0]);
  for (size_t h = 0; h < H; ++h)
    env.bus->send(env.route[h].from, env.route[h].to, "trn.otp_ct", ct);

  res.payload = xor_bytes(ct, key1_view);
  env.bus->log_local(env.dst(), "trn.payload", res.payload);
  res.status = OutcomeStatus::Delivered;
  finish_reports(env, res);
  return res;
}

CompromiseResult compromise_node(const net::ClassicalBus& bus, const std::string& node,
                                 const lwe::LweParams& params, const lwe::SecretKey* dst_sk) {
  const auto& tr = bus.transcript(node);
  if (tr.records().empty()) throw ContractError("compromise_node: node not in session");
  CompromiseResult out;

  // Endpoints hold the payload legitimately.
  for (const char* kind : {"srn.payload", "trn.payload"}) {
    auto recs = tr.find_kind(kind);
    if (!recs.empty()) {
      out.outcome = CompromiseOutcome::RecoveredPlaintext;
      out.recovered = recs.front()->data;
      return out;
    }
  }

  // TRN repeater: key1 plus the one-time-padded payload are both on file.
  {
    auto k1 = tr.find_kind("trn.key1");
    auto ct = tr.find_kind("trn.otp_ct");
    if (!k1.empty() && !ct.empty() && k1.front()->data.size() == ct.front()->data.size()) {
      out.outcome = CompromiseOutcome::RecoveredPlaintext;
      out.recovered = xor_bytes(ct.front()->data, k1.front()->data);
      return out;
    }
  }

  // SRN repeater: the full ciphertext stream, reassembled from the decoded
  // frames; plaintext only if the attacker also has the destination key.
  Bytes frames = tr.concat_kind("srn.ct_frame");
  if (!frames.empty()) {
    auto metas = tr.find_kind("srn.stream_meta");
    if (!metas.empty()) {
      ByteReader r(metas.front()->data);
      r.u32();  // frame count
      uint32_t raw_len = r.u32();
      if (frames.size() >= raw_len) frames.resize(raw_len);
    }
    if (dst_sk) {
      try {
        auto stream = lwe::stream_from_bytes(frames, params);
        out.outcome = CompromiseOutcome::RecoveredPlaintext;
        out.recovered = lwe::decrypt_stream(params, *dst_sk, stream);
        return out;
      } catch (const lwe::PaddingError&) {
        // fall through to ciphertext-only
      }
    }
    out.outcome = CompromiseOutcome::CiphertextOnly;
    out.ciphertext = std::move(frames);
    return out;
  }

  out.outcome = CompromiseOutcome::Nothing;
  return out;
}

std::vector<HopReport> build_hop_reports(const std::vector<Hop>& route,
                                         const qsdc::LabelTally& labels,
                                         const std::vector<qsdc::QberRecord>& qber,
                                         double threshold, long min_bits) {
  std::vector<HopReport> out;
  for (const auto& hop : route) {
    HopReport r;
    r.hop = hop.label();
    auto it = labels.by_hop.find(r.hop);
    if (it != labels.by_hop.end()) {
      r.label_tested = it->second.tested;
      r.label_errors = it->second.errors;
      r.label_rate = it->second.rate();
    }
    r.inconclusive = r.label_tested < min_bits;
    r.flagged = !r.inconclusive && r.label_rate > threshold;
    double sum = 0;
    for (const auto& rec : qber) {
      if (rec.hop != r.hop) continue;
      sum += rec.est.rate();
      r.rounds++;
    }
    r.mean_qber = r.rounds > 0 ? sum / r.rounds : 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> localize_eavesdropping(const std::vector<HopReport>& reports) {
  std::vector<std::string> flagged;
  for (const auto& r : reports)
    if (r.flagged) flagged.push_back(r.hop);
  return flagged;
}

}  // namespace srn::network
