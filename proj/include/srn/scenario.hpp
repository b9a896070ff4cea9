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
#include "srn/network.hpp"
#include "srn/qsdc.hpp"

namespace srn::scenario {

enum class Mode : uint8_t { Srn = 0, Trn = 1 };

enum class PayloadSource : uint8_t { Random = 0, Inline = 1, File = 2 };

struct PayloadSpec {
  PayloadSource source = PayloadSource::Random;
  size_t random_bytes = 0;
  Bytes inline_bytes;  // "hex" / "text" forms
  std::string file;    // resolved against the config file's directory
};

struct Scenario {
  std::string name;
  uint64_t seed = 0;
  std::optional<uint64_t> eve_seed;  // absent: Eve streams derive from seed
  Mode mode = Mode::Srn;
  std::string src, dst;
  network::Topology topology;
  qsdc::ProtocolParams protocol;
  fec::LdpcParams fec;
  lwe::LweParams lwe;                    // wire format, not configurable
  std::optional<uint64_t> pqc_key_seed;  // absent: derived from seed
  PayloadSpec payload;
  std::vector<channel::EveStrategy> eves;
  long localization_min_bits = 500;
};

struct ValidationResult {
  std::optional<Scenario> scenario;  // engaged iff errors is empty
  std::vector<std::string> errors;   // "field.path: constraint"
  bool ok() const { return errors.empty(); }
};

// Full schema check with defaults applied.  Errors come back as values,
// each naming the offending field path; nothing here throws on bad input.
ValidationResult validate_scenario(const std::string& json_text,
                                   const std::string& base_dir = "");
ValidationResult load_scenario_file(const std::string& path);

// Convenience for callers that want exceptions (first error message).
Scenario load_scenario_file_or_throw(const std::string& path);

// Random payloads draw from the "payload" sub-stream of the master seed;
// file payloads read here (throws ContractError on I/O failure).
Bytes materialize_payload(const PayloadSpec& spec, uint64_t master_seed);

}  // namespace srn::scenario
