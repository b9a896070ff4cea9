#include "srn/quantum.hpp"

#include <cmath>

namespace srn::quantum {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_state(const PureState& q, size_t dim, const char* op) {
  if (q.dim() != dim) throw ContractError(std::string(op) + ": wrong or consumed state");
  if (!q.is_normalized()) throw ContractError(std::string(op) + ": state not normalized");
}

void require_any_state(const PureState& q, const char* op) {
  if (q.dim() != 2 && q.dim() != 4) throw ContractError(std::string(op) + ": wrong or consumed state");
  if (!q.is_normalized()) throw ContractError(std::string(op) + ": state not normalized");
}

// H on the selected qubit of a 2- or 4-dim state.
std::vector<cd> hadamard_on(const std::vector<cd>& a, size_t dim, int target) {
  std::vector<cd> out(dim);
  if (dim == 2) {
    out[0] = kInvSqrt2 * (a[0] + a[1]);
    out[1] = kInvSqrt2 * (a[0] - a[1]);
    return out;
  }
  if (target == 0) {  // first qubit: index bit 1
    out[0] = kInvSqrt2 * (a[0] + a[2]);
    out[1] = kInvSqrt2 * (a[1] + a[3]);
    out[2] = kInvSqrt2 * (a[0] - a[2]);
    out[3] = kInvSqrt2 * (a[1] - a[3]);
  } else {  // second qubit: index bit 0
    out[0] = kInvSqrt2 * (a[0] + a[1]);
    out[1] = kInvSqrt2 * (a[0] - a[1]);
    out[2] = kInvSqrt2 * (a[2] + a[3]);
    out[3] = kInvSqrt2 * (a[2] - a[3]);
  }
  return out;
}

}  // namespace

PureState::PureState(std::vector<cd> amps) : amps_(std::move(amps)) {
  if (amps_.size() != 2 && amps_.size() != 4)
    throw ContractError("PureState: amplitude vector must have length 2 or 4");
}

double PureState::norm_sq() const {
  double s = 0;
  for (const cd& a : amps_) s += std::norm(a);
  return s;
}

bool PureState::is_normalized(double tol) const {
  if (amps_.empty()) return false;
  return std::abs(norm_sq() - 1.0) <= tol;
}

void PureState::renormalize() {
  double n = std::sqrt(norm_sq());
  if (n <= 0) throw ContractError("renormalize: zero state");
  for (cd& a : amps_) a /= n;
}

uint8_t bell_to_bits(BellState b) { return static_cast<uint8_t>(b); }

BellState bits_to_bell(uint8_t two_bits) {
  if (two_bits > 3) throw ContractError("bits_to_bell: value out of range");
  return static_cast<BellState>(two_bits);
}

PureState prepare_bell(uint8_t two_bits) {
  if (two_bits > 3) throw ContractError("prepare_bell: value out of range");
  std::vector<cd> a(4, 0.0);
  switch (static_cast<BellState>(two_bits)) {
    case BellState::PhiPlus:  a[0] = kInvSqrt2; a[3] = kInvSqrt2; break;
    case BellState::PhiMinus: a[0] = kInvSqrt2; a[3] = -kInvSqrt2; break;
    case BellState::PsiPlus:  a[1] = kInvSqrt2; a[2] = kInvSqrt2; break;
    case BellState::PsiMinus: a[1] = kInvSqrt2; a[2] = -kInvSqrt2; break;
  }
  return PureState(std::move(a));
}

PureState prepare_single(SingleState s) {
  switch (s) {
    case SingleState::Z0:     return PureState({1.0, 0.0});
    case SingleState::Z1:     return PureState({0.0, 1.0});
    case SingleState::XPlus:  return PureState({kInvSqrt2, kInvSqrt2});
    case SingleState::XMinus: return PureState({kInvSqrt2, -kInvSqrt2});
  }
  throw ContractError("prepare_single: bad state id");
}

PureState basis_eigenstate(Basis basis, uint8_t outcome) {
  if (outcome > 1) throw ContractError("basis_eigenstate: outcome must be 0/1");
  if (basis == Basis::Z) return prepare_single(outcome ? SingleState::Z1 : SingleState::Z0);
  return prepare_single(outcome ? SingleState::XMinus : SingleState::XPlus);
}

Basis state_basis(SingleState s) {
  return (s == SingleState::Z0 || s == SingleState::Z1) ? Basis::Z : Basis::X;
}

uint8_t state_bit(SingleState s) {
  return (s == SingleState::Z1 || s == SingleState::XMinus) ? 1 : 0;
}

MeasureResult measure(const PureState& q, Basis basis, rng::RandomStream& rng) {
  require_state(q, 2, "measure");
  std::vector<cd> a = q.amps();
  if (basis == Basis::X) a = hadamard_on(a, 2, 0);
  double p0 = std::norm(a[0]);
  uint8_t outcome = rng.next_double() < p0 ? 0 : 1;
  return {outcome, basis_eigenstate(basis, outcome)};
}

HalfMeasureResult measure_half(const PureState& pair, int which, Basis basis,
                               rng::RandomStream& rng) {
  require_state(pair, 4, "measure_half");
  if (which != 0 && which != 1) throw ContractError("measure_half: which must be 0/1");
  std::vector<cd> a = pair.amps();
  if (basis == Basis::X) a = hadamard_on(a, 4, which);
  // Z-measure the selected qubit of the (possibly rotated) state.
  double p0 = 0;
  if (which == 0)
    p0 = std::norm(a[0]) + std::norm(a[1]);
  else
    p0 = std::norm(a[0]) + std::norm(a[2]);
  uint8_t outcome = rng.next_double() < p0 ? 0 : 1;
  std::vector<cd> rem(2);
  if (which == 0) {
    rem[0] = a[outcome * 2 + 0];
    rem[1] = a[outcome * 2 + 1];
  } else {
    rem[0] = a[0 * 2 + outcome];
    rem[1] = a[1 * 2 + outcome];
  }
  PureState remainder(std::move(rem));
  remainder.renormalize();
  return {outcome, std::move(remainder)};
}

PureState apply_pauli(const PureState& q, PauliOp op, int target) {
  require_any_state(q, "apply_pauli");
  if (q.dim() == 2 && target != 0) throw ContractError("apply_pauli: bad target for single qubit");
  if (target != 0 && target != 1) throw ContractError("apply_pauli: target must be 0/1");
  if (op == PauliOp::I) return q;
  std::vector<cd> a = q.amps();
  size_t dim = a.size();
  // Apply the 2x2 op to the selected qubit: X=[[0,1],[1,0]], Z=[[1,0],[0,-1]],
  // Y=i*sigma_y=[[0,1],[-1,0]].
  auto apply2 = [&](size_t i0, size_t i1) {
    cd v0 = a[i0], v1 = a[i1];
    switch (op) {
      case PauliOp::X: a[i0] = v1; a[i1] = v0; break;
      case PauliOp::Z: a[i1] = -v1; break;
      case PauliOp::Y: a[i0] = v1; a[i1] = -v0; break;
      case PauliOp::I: break;
    }
  };
  if (dim == 2) {
    apply2(0, 1);
  } else if (target == 0) {
    apply2(0, 2);
    apply2(1, 3);
  } else {
    apply2(0, 1);
    apply2(2, 3);
  }
  PureState out(std::move(a));
  out.renormalize();
  return out;
}

BellMeasureResult bell_measure(const PureState& pair, rng::RandomStream& rng) {
  require_state(pair, 4, "bell_measure");
  const std::vector<cd>& a = pair.amps();
  cd c[4];
  c[0] = kInvSqrt2 * (a[0] + a[3]);  // Phi+
  c[1] = kInvSqrt2 * (a[0] - a[3]);  // Phi-
  c[2] = kInvSqrt2 * (a[1] + a[2]);  // Psi+
  c[3] = kInvSqrt2 * (a[1] - a[2]);  // Psi-
  double p[4];
  double total = 0;
  for (int i = 0; i < 4; ++i) {
    p[i] = std::norm(c[i]);
    total += p[i];
  }
  double u = rng.next_double() * total;
  int pick = 3;
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    acc += p[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  BellState which = static_cast<BellState>(pick);
  return {which, bell_to_bits(which)};
}

PureState tensor(const PureState& first, const PureState& second) {
  require_state(first, 2, "tensor");
  require_state(second, 2, "tensor");
  std::vector<cd> a(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a[i * 2 + j] = first.amp(i) * second.amp(j);
  return PureState(std::move(a));
}

double overlap_sq(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim() || a.dim() == 0) throw ContractError("overlap_sq: dimension mismatch");
  cd dot = 0;
  for (size_t i = 0; i < a.dim(); ++i) dot += std::conj(a.amp(i)) * b.amp(i);
  return std::norm(dot);
}

}  // namespace srn::quantum
