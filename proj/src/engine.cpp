#include "srn/engine.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace srn::engine {
namespace {

using nlohmann::ordered_json;

const channel::EveStrategy* eve_for(const scenario::Scenario& scn, const std::string& hop) {
  for (const auto& e : scn.eves)
    if (e.target_hop == hop) return &e;
  return nullptr;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ContractError("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

ordered_json run_summary_json(const RunResult& r) {
  ordered_json j;
  j["status"] = outcome_name(r.session.status);
  j["payload_match"] = r.payload_match;
  j["frames_total"] = r.session.frames_total;
  j["frames_attempted"] = r.session.frames_attempted;
  j["retransmissions"] = r.session.retransmissions;
  return j;
}

}  // namespace

const char* outcome_name(network::OutcomeStatus s) {
  switch (s) {
    case network::OutcomeStatus::Delivered: return "delivered";
    case network::OutcomeStatus::Aborted: return "aborted";
    case network::OutcomeStatus::DecodeFailed: return "decode_failed";
  }
  return "unknown";
}

const char* compromise_name(network::CompromiseOutcome o) {
  switch (o) {
    case network::CompromiseOutcome::Nothing: return "nothing";
    case network::CompromiseOutcome::CiphertextOnly: return "ciphertext_only";
    case network::CompromiseOutcome::RecoveredPlaintext: return "recovered_plaintext";
  }
  return "unknown";
}

std::unique_ptr<Session> prepare(const scenario::Scenario& scn,
                                 std::optional<uint64_t> seed_override,
                                 const Bytes* payload_override) {
  auto s = std::make_unique<Session>();
  s->scn = scn;
  s->master = seed_override.value_or(scn.seed);
  s->scn.seed = s->master;

  s->route = network::find_route(s->scn.topology, s->scn.src, s->scn.dst);
  s->code = fec::LdpcCode::build(s->scn.fec);
  s->streams = rng::StreamFactory{s->master};
  s->pqc_rng = rng::RandomStream(rng::derive_seed(s->master, "pqc:encrypt"));

  const uint64_t key_seed =
      s->scn.pqc_key_seed ? *s->scn.pqc_key_seed : rng::derive_seed(s->master, "pqc:key");
  s->keys = lwe::keygen(s->scn.lwe, key_seed);

  for (const auto& n : s->scn.topology.nodes) s->bus.register_node(n.id);

  const uint64_t eve_master = s->scn.eve_seed.value_or(s->master);
  for (const auto& hop : s->route) {
    const std::string& lbl = hop.label();
    s->rngs.emplace_back(rng::derive_seed(s->master, "noise:" + lbl));
    rng::RandomStream* noise = &s->rngs.back();
    s->rngs.emplace_back(rng::derive_seed(eve_master, "eve:" + lbl));
    rng::RandomStream* eve = &s->rngs.back();
    s->rngs.emplace_back(rng::derive_seed(s->master, "proto:" + lbl));
    rng::RandomStream* proto = &s->rngs.back();
    s->noise_logs.emplace_back();

    qsdc::HopSetup hs;
    hs.channel = &hop.link->channel;
    hs.eve = eve_for(s->scn, lbl);
    hs.tx_node = hop.from;
    hs.rx_node = hop.to;
    hs.noise_rng = noise;
    hs.eve_rng = eve;
    hs.proto_rng = proto;
    hs.bus = &s->bus;
    hs.noise_log = &s->noise_logs.back();
    s->env.hops.push_back(hs);
  }

  s->env.route = s->route;
  s->env.bus = &s->bus;
  s->env.code = &s->code;
  s->env.protocol = s->scn.protocol;
  s->env.lwe_params = s->scn.lwe;
  s->env.dst_pk = s->keys.pk;
  s->env.dst_sk = s->keys.sk;
  s->env.pqc_rng = &s->pqc_rng;
  s->env.streams = &s->streams;
  s->env.localization_min_bits = s->scn.localization_min_bits;

  s->payload =
      payload_override ? *payload_override : scenario::materialize_payload(s->scn.payload, s->master);
  return s;
}

RunResult execute(Session& s) {
  RunResult r;
  r.master = s.master;
  r.payload_sent = s.payload;
  r.session = s.scn.mode == scenario::Mode::Trn ? network::trn_send(s.env, s.payload)
                                                : network::srn_send(s.env, s.payload);
  r.payload_match = r.session.status == network::OutcomeStatus::Delivered &&
                    r.session.payload == s.payload;
  r.throughput = (r.session.status == network::OutcomeStatus::Delivered &&
                  r.session.frames_attempted > 0)
                     ? 8.0 * static_cast<double>(s.payload.size()) /
                           static_cast<double>(r.session.frames_attempted)
                     : 0.0;
  r.flagged_hops = network::localize_eavesdropping(r.session.hop_reports);
  return r;
}

std::string report_json_text(const Session& s, const RunResult& r) {
  ordered_json j;
  j["scenario"] = s.scn.name;
  j["seed"] = s.master;
  j["mode"] = s.scn.mode == scenario::Mode::Trn ? "trn" : "srn";
  j["protocol"] = s.scn.protocol.kind == qsdc::ProtocolKind::Dl04 ? "dl04" : "eqsdc";
  j["status"] = outcome_name(r.session.status);
  j["abort_hop"] = r.session.abort_hop;
  j["abort_round"] = r.session.abort_round;
  j["payload_bytes"] = r.payload_sent.size();
  j["payload_match"] = r.payload_match;
  j["ciphertext_block_bytes"] = r.session.ciphertext_block_bytes;
  j["frames_total"] = r.session.frames_total;
  j["frames_attempted"] = r.session.frames_attempted;
  j["retransmissions"] = r.session.retransmissions;
  j["throughput_bits_per_frame"] = r.throughput;
  j["flagged_hops"] = r.flagged_hops;
  j["hops"] = ordered_json::array();
  for (const auto& h : r.session.hop_reports) {
    ordered_json hj;
    hj["hop"] = h.hop;
    hj["mean_qber"] = h.mean_qber;
    hj["rounds"] = h.rounds;
    hj["label_tested"] = h.label_tested;
    hj["label_errors"] = h.label_errors;
    hj["label_rate"] = h.label_rate;
    hj["flagged"] = h.flagged;
    hj["inconclusive"] = h.inconclusive;
    j["hops"].push_back(std::move(hj));
  }
  return j.dump(2) + "\n";
}

std::string qber_csv_text(const RunResult& r) {
  std::string out = "frame,hop,round,tested,errors,rate,aborted\n";
  char buf[64];
  for (const auto& rec : r.session.qber_series) {
    std::snprintf(buf, sizeof(buf), "%.6f", rec.est.rate());
    out += std::to_string(rec.frame_id) + "," + rec.hop + "," + std::to_string(rec.round) +
           "," + std::to_string(rec.est.tested) + "," + std::to_string(rec.est.errors) + "," +
           buf + "," + (rec.aborted ? "1" : "0") + "\n";
  }
  return out;
}

void write_outputs(const Session& s, const RunResult& r, const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_json_text(s, r));
  write_file(dir / "qber.csv", qber_csv_text(r));
  for (const auto& [node, tr] : s.bus.all())
    write_file(dir / ("transcript_" + node + ".log"), tr.render());
}

CompareResult run_compare(const scenario::Scenario& scn,
                          std::optional<uint64_t> seed_override) {
  CompareResult out;
  const uint64_t base = seed_override.value_or(scn.seed);
  const Bytes payload = scenario::materialize_payload(scn.payload, base);

  scenario::Scenario srn_scn = scn;
  srn_scn.mode = scenario::Mode::Srn;
  scenario::Scenario trn_scn = scn;
  trn_scn.mode = scenario::Mode::Trn;

  out.srn_session = prepare(srn_scn, rng::derive_seed(base, "compare:srn"), &payload);
  out.trn_session = prepare(trn_scn, rng::derive_seed(base, "compare:trn"), &payload);
  out.srn_run = execute(*out.srn_session);
  out.trn_run = execute(*out.trn_session);
  out.both_delivered =
      out.srn_run.session.status == network::OutcomeStatus::Delivered &&
      out.trn_run.session.status == network::OutcomeStatus::Delivered;

  const auto& route = out.srn_session->route;
  for (size_t i = 0; i + 1 < route.size(); ++i) {
    const std::string& node = route[i].to;
    auto cs = network::compromise_node(out.srn_session->bus, node, scn.lwe, nullptr);
    auto ct = network::compromise_node(out.trn_session->bus, node, scn.lwe, nullptr);
    CompromiseRow row;
    row.node = node;
    row.srn_outcome = cs.outcome;
    row.trn_outcome = ct.outcome;
    row.srn_ciphertext_bytes = cs.ciphertext.size();
    row.trn_plaintext_match = ct.outcome == network::CompromiseOutcome::RecoveredPlaintext &&
                              ct.recovered == payload;
    out.rows.push_back(std::move(row));
  }

  ordered_json j;
  j["scenario"] = scn.name;
  j["seed"] = base;
  j["payload_bytes"] = payload.size();
  j["srn"] = run_summary_json(out.srn_run);
  j["trn"] = run_summary_json(out.trn_run);
  j["compromise"] = ordered_json::array();
  for (const auto& row : out.rows) {
    ordered_json rj;
    rj["node"] = row.node;
    rj["srn"] = compromise_name(row.srn_outcome);
    rj["srn_ciphertext_bytes"] = row.srn_ciphertext_bytes;
    rj["trn"] = compromise_name(row.trn_outcome);
    rj["trn_plaintext_match"] = row.trn_plaintext_match;
    j["compromise"].push_back(std::move(rj));
  }
  out.report_text = j.dump(2) + "\n";
  return out;
}

void write_compare_outputs(const CompareResult& r, const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "compare.json", r.report_text);
}

}  // namespace srn::engine
