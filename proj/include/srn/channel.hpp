#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srn/quantum.hpp"
#include "srn/rng.hpp"

namespace srn::channel {

enum class Medium : uint8_t { Fiber = 0, FreeSpace = 1 };

struct ChannelModel {
  Medium medium = Medium::Fiber;
  double length_km = 0;
  double attenuation_db_per_km = 0;
  double fixed_loss_db = 0;
  double depolarizing_prob = 0;  // per charged crossing, Pauli uniform from {X,Y,Z}
  std::string label;             // link id, e.g. "alice-r"

  double survival_probability() const;
  void validate() const;  // throws ContractError
};

enum class EveKind : uint8_t {
  None = 0,
  InterceptResendZ = 1,
  InterceptResendX = 2,
  InterceptResendRandom = 3,
};

struct EveStrategy {
  EveKind kind = EveKind::None;
  std::string target_hop;                 // link label
  uint64_t first_frame = 0;               // active frame window, inclusive
  std::optional<uint64_t> last_frame;     // inclusive; absent = open-ended

  bool active_on(const std::string& hop, uint64_t frame) const;
};

struct NoiseEvent {
  uint64_t seq = 0;
  bool lost = false;
  int8_t pauli = -1;  // -1 none, else static_cast<PauliOp>
};

// Channel-noise realization log, independent of Eve's stream by
// construction (used by the seed-isolation test).
struct NoiseLog {
  std::vector<NoiseEvent> events;
};

// One crossing's fate, drawn in fixed order: loss from the noise stream,
// then Eve's basis from her own stream, then depolarization from the noise
// stream.  charge_depolarization=false skips the Pauli draw entirely (the
// carrier was already charged on its first crossing).
struct TransitDraws {
  bool lost = false;
  std::optional<quantum::Basis> eve_basis;
  std::optional<quantum::PauliOp> pauli;
};
TransitDraws draw_transit(const ChannelModel& ch, bool eve_active, EveKind kind,
                          bool charge_depolarization, rng::RandomStream& noise_rng,
                          rng::RandomStream& eve_rng, NoiseLog* log = nullptr);

// Physical transmission of a single photon.  Consumes the input state
// (pass by value); returns nullopt on loss.  Eve, when active, measures in
// her basis and forwards the post-measurement state.
std::optional<quantum::PureState> transmit_qubit(quantum::PureState q, const ChannelModel& ch,
                                                 const EveStrategy& eve, uint64_t frame,
                                                 rng::RandomStream& noise_rng,
                                                 rng::RandomStream& eve_rng,
                                                 bool charge_depolarization = true,
                                                 NoiseLog* log = nullptr);

}  // namespace srn::channel
