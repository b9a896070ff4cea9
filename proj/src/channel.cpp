#include "srn/channel.hpp"

#include <cmath>

namespace srn::channel {

using quantum::Basis;
using quantum::PauliOp;
using quantum::PureState;

double ChannelModel::survival_probability() const {
  double loss_db = length_km * attenuation_db_per_km + fixed_loss_db;
  return std::pow(10.0, -loss_db / 10.0);
}

void ChannelModel::validate() const {
  if (length_km < 0) throw ContractError("ChannelModel: length_km must be >= 0");
  if (attenuation_db_per_km < 0) throw ContractError("ChannelModel: attenuation must be >= 0");
  if (fixed_loss_db < 0) throw ContractError("ChannelModel: fixed_loss_db must be >= 0");
  if (depolarizing_prob < 0 || depolarizing_prob > 1)
    throw ContractError("ChannelModel: depolarizing_prob must be in [0,1]");
}

bool EveStrategy::active_on(const std::string& hop, uint64_t frame) const {
  if (kind == EveKind::None) return false;
  if (hop != target_hop) return false;
  if (frame < first_frame) return false;
  if (last_frame && frame > *last_frame) return false;
  return true;
}

TransitDraws draw_transit(const ChannelModel& ch, bool eve_active, EveKind kind,
                          bool charge_depolarization, rng::RandomStream& noise_rng,
                          rng::RandomStream& eve_rng, NoiseLog* log) {
  TransitDraws d;
  uint64_t seq = log ? static_cast<uint64_t>(log->events.size()) : 0;
  d.lost = noise_rng.next_double() >= ch.survival_probability();
  if (!d.lost) {
    if (eve_active) {
      switch (kind) {
        case EveKind::InterceptResendZ: d.eve_basis = Basis::Z; break;
        case EveKind::InterceptResendX: d.eve_basis = Basis::X; break;
        case EveKind::InterceptResendRandom:
          d.eve_basis = eve_rng.next_bit() ? Basis::X : Basis::Z;
          break;
        case EveKind::None: break;
      }
    }
    if (charge_depolarization && ch.depolarizing_prob > 0 &&
        noise_rng.next_double() < ch.depolarizing_prob) {
      static const PauliOp kPaulis[3] = {PauliOp::X, PauliOp::Y, PauliOp::Z};
      d.pauli = kPaulis[noise_rng.next_below(3)];
    }
  }
  if (log) log->events.push_back({seq, d.lost, d.pauli ? static_cast<int8_t>(*d.pauli) : int8_t{-1}});
  return d;
}

std::optional<PureState> transmit_qubit(PureState q, const ChannelModel& ch,
                                        const EveStrategy& eve, uint64_t frame,
                                        rng::RandomStream& noise_rng, rng::RandomStream& eve_rng,
                                        bool charge_depolarization, NoiseLog* log) {
  if (q.dim() != 2) throw ContractError("transmit_qubit: expects a single qubit");
  if (!q.is_normalized()) throw ContractError("transmit_qubit: state not normalized");
  bool eve_active = eve.active_on(ch.label, frame);
  TransitDraws d = draw_transit(ch, eve_active, eve.kind, charge_depolarization,
                                noise_rng, eve_rng, log);
  if (d.lost) return std::nullopt;
  if (d.eve_basis) {
    // Intercept-resend: Eve measures and forwards the collapsed eigenstate.
    q = quantum::measure(q, *d.eve_basis, eve_rng).post;
  }
  if (d.pauli) q = quantum::apply_pauli(q, *d.pauli, 0);
  return q;
}

}  // namespace srn::channel
