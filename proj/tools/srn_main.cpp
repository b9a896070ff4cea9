#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "srn/engine.hpp"
#include "srn/scenario.hpp"
#include "srn/version.hpp"

namespace {

int print_errors(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return 1;
}

int cmd_validate(const std::string& config) {
  auto v = srn::scenario::load_scenario_file(config);
  if (!v.ok()) return print_errors(v.errors);
  std::cout << "config ok: " << v.scenario->name << "\n";
  return 0;
}

int cmd_run(const std::string& config, std::optional<uint64_t> seed, const std::string& out) {
  auto v = srn::scenario::load_scenario_file(config);
  if (!v.ok()) return print_errors(v.errors);
  try {
    auto session = srn::engine::prepare(*v.scenario, seed);
    auto result = srn::engine::execute(*session);
    if (!out.empty()) srn::engine::write_outputs(*session, result, out);

    std::cout << "scenario=" << session->scn.name << " seed=" << session->master
              << " mode=" << (session->scn.mode == srn::scenario::Mode::Trn ? "trn" : "srn")
              << "\n";
    std::cout << "status=" << srn::engine::outcome_name(result.session.status);
    if (result.session.status != srn::network::OutcomeStatus::Delivered) {
      std::cout << " hop=" << result.session.abort_hop
                << " round=" << result.session.abort_round;
    }
    std::cout << " payload_match=" << (result.payload_match ? 1 : 0)
              << " frames_attempted=" << result.session.frames_attempted
              << " retransmissions=" << result.session.retransmissions << "\n";
    for (const auto& h : result.session.hop_reports) {
      std::cout << "hop " << h.hop << ": mean_qber=" << h.mean_qber
                << " label_rate=" << h.label_rate << " label_tested=" << h.label_tested
                << (h.inconclusive ? " (inconclusive)" : h.flagged ? " FLAGGED" : "") << "\n";
    }
    if (!result.flagged_hops.empty()) {
      std::cout << "flagged_hops=";
      for (size_t i = 0; i < result.flagged_hops.size(); ++i)
        std::cout << (i ? "," : "") << result.flagged_hops[i];
      std::cout << "\n";
    }
    if (!out.empty()) std::cout << "outputs written to " << out << "\n";
    return result.session.status == srn::network::OutcomeStatus::Delivered ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const std::string& config, std::optional<uint64_t> seed,
                const std::string& out) {
  auto v = srn::scenario::load_scenario_file(config);
  if (!v.ok()) return print_errors(v.errors);
  try {
    auto cmp = srn::engine::run_compare(*v.scenario, seed);
    if (!out.empty()) srn::engine::write_compare_outputs(cmp, out);

    std::cout << "scenario=" << v.scenario->name << " seed="
              << (seed ? *seed : v.scenario->seed) << "\n";
    std::cout << "srn: status=" << srn::engine::outcome_name(cmp.srn_run.session.status)
              << " payload_match=" << (cmp.srn_run.payload_match ? 1 : 0) << "\n";
    std::cout << "trn: status=" << srn::engine::outcome_name(cmp.trn_run.session.status)
              << " payload_match=" << (cmp.trn_run.payload_match ? 1 : 0) << "\n";
    for (const auto& row : cmp.rows) {
      std::cout << "compromise " << row.node
                << ": srn=" << srn::engine::compromise_name(row.srn_outcome)
                << " trn=" << srn::engine::compromise_name(row.trn_outcome) << "\n";
    }
    if (!out.empty()) std::cout << "outputs written to " << out << "\n";
    return cmp.both_delivered ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure-repeater network simulator"};
  app.require_subcommand(1);

  std::string config, out;
  uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "execute a scenario end to end");
  run->add_option("--config", config, "scenario JSON file")->required();
  auto* run_seed = run->add_option("--seed", seed, "master seed override");
  run->add_option("--out", out, "directory for report.json / qber.csv / transcripts");

  auto* val = app.add_subcommand("validate", "schema-check a scenario file");
  val->add_option("--config", config, "scenario JSON file")->required();

  auto* cmp = app.add_subcommand("compare",
                                 "run SRN and TRN on one scenario, compare compromise oracles");
  cmp->add_option("--config", config, "scenario JSON file")->required();
  auto* cmp_seed = cmp->add_option("--seed", seed, "master seed override");
  cmp->add_option("--out", out, "directory for compare.json");

  app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // normalize usage errors; --help stays 0
  }

  if (app.got_subcommand("version")) {
    std::cout << "srn " << srn::kVersion << "\n";
    return 0;
  }
  if (app.got_subcommand("validate")) return cmd_validate(config);

  std::optional<uint64_t> seed_opt;
  if (app.got_subcommand("run")) {
    if (run_seed->count() > 0) seed_opt = seed;
    return cmd_run(config, seed_opt, out);
  }
  if (cmp_seed->count() > 0) seed_opt = seed;
  return cmd_compare(config, seed_opt, out);
}
