#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srn/network.hpp"
#include "srn/scenario.hpp"

namespace srn::engine {

// Fully wired session: owns every clock, stream, log, bus, and key the
// network layer points at.  Heap-only (prepare returns unique_ptr) so the
// internal pointers stay valid for the session's lifetime.
struct Session {
  scenario::Scenario scn;  // defaults applied, seed overridden if requested
  uint64_t master = 0;
  net::SimClock clock;
  net::ClassicalBus bus{clock};
  std::vector<network::Hop> route;
  fec::LdpcCode code;
  std::deque<rng::RandomStream> rngs;  // stable addresses for HopSetup
  std::deque<channel::NoiseLog> noise_logs;
  rng::StreamFactory streams{0};
  rng::RandomStream pqc_rng{0};
  lwe::Keypair keys;
  Bytes payload;
  network::SessionEnv env;

  Session() = default;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
};

// Builds topology streams, FEC code, PQC keys, and the payload.  The seed
// override replaces the scenario master seed; payload_override (compare
// mode) replaces the scenario payload.
std::unique_ptr<Session> prepare(const scenario::Scenario& scn,
                                 std::optional<uint64_t> seed_override = std::nullopt,
                                 const Bytes* payload_override = nullptr);

struct RunResult {
  network::SessionResult session;
  Bytes payload_sent;
  bool payload_match = false;
  double throughput = 0;  // delivered payload bits per wire frame attempt
  uint64_t master = 0;
  std::vector<std::string> flagged_hops;
};

RunResult execute(Session& s);

// Serialized report forms (byte-stable for a fixed seed).
std::string report_json_text(const Session& s, const RunResult& r);
std::string qber_csv_text(const RunResult& r);

// report.json, qber.csv, transcript_<node>.log under out_dir (created).
void write_outputs(const Session& s, const RunResult& r, const std::string& out_dir);

struct CompromiseRow {
  std::string node;
  network::CompromiseOutcome srn_outcome = network::CompromiseOutcome::Nothing;
  network::CompromiseOutcome trn_outcome = network::CompromiseOutcome::Nothing;
  size_t srn_ciphertext_bytes = 0;
  bool trn_plaintext_match = false;
};

struct CompareResult {
  std::unique_ptr<Session> srn_session;
  std::unique_ptr<Session> trn_session;
  RunResult srn_run, trn_run;
  std::vector<CompromiseRow> rows;  // one per intermediate route node
  std::string report_text;          // compare.json payload
  bool both_delivered = false;
};

// Runs the scenario once per mode (independent sub-seeds, same payload),
// then replays every intermediate node's transcript through the
// compromise oracle — the attacker holds no decryption key.
CompareResult run_compare(const scenario::Scenario& scn,
                          std::optional<uint64_t> seed_override = std::nullopt);
void write_compare_outputs(const CompareResult& r, const std::string& out_dir);

const char* outcome_name(network::OutcomeStatus s);
const char* compromise_name(network::CompromiseOutcome o);

}  // namespace srn::engine
