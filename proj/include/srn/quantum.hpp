#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "srn/common.hpp"
#include "srn/rng.hpp"

namespace srn::quantum {

using cd = std::complex<double>;

enum class Basis : uint8_t { Z = 0, X = 1 };
enum class BellState : uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };
enum class PauliOp : uint8_t { I = 0, X = 1, Z = 2, Y = 3 };
enum class SingleState : uint8_t { Z0 = 0, Z1 = 1, XPlus = 2, XMinus = 3 };

// Pure state of one qubit (2 amplitudes) or an ordered qubit pair
// (4 amplitudes, index = first_qubit_bit * 2 + second_qubit_bit).
// Moved-from states are empty and any operation on them throws, which is
// what enforces the send-consumes discipline at the channel boundary.
class PureState {
 public:
  PureState() = default;
  explicit PureState(std::vector<cd> amps);

  PureState(const PureState&) = default;
  PureState& operator=(const PureState&) = default;
  PureState(PureState&& other) noexcept : amps_(std::move(other.amps_)) { other.amps_.clear(); }
  PureState& operator=(PureState&& other) noexcept {
    if (this != &other) {
      amps_ = std::move(other.amps_);
      other.amps_.clear();
    }
    return *this;
  }

  size_t dim() const { return amps_.size(); }
  bool empty() const { return amps_.empty(); }
  bool is_pair() const { return amps_.size() == 4; }
  const cd& amp(size_t i) const { return amps_[i]; }

  double norm_sq() const;
  bool is_normalized(double tol = 1e-9) const;
  void renormalize();  // exact unit norm after arithmetic drift

  const std::vector<cd>& amps() const { return amps_; }
  std::vector<cd>& mutable_amps() { return amps_; }

 private:
  std::vector<cd> amps_;
};

// Two-bit value <-> Bell state, fixed convention: 00=Phi+, 01=Phi-, 10=Psi+, 11=Psi-.
uint8_t bell_to_bits(BellState b);
BellState bits_to_bell(uint8_t two_bits);

PureState prepare_bell(uint8_t two_bits);
PureState prepare_single(SingleState s);
PureState basis_eigenstate(Basis basis, uint8_t outcome);
Basis state_basis(SingleState s);
uint8_t state_bit(SingleState s);

struct MeasureResult {
  uint8_t outcome;   // 0/1 in the requested basis
  PureState post;    // corresponding eigenstate
};
MeasureResult measure(const PureState& q, Basis basis, rng::RandomStream& rng);

struct HalfMeasureResult {
  uint8_t outcome;
  PureState remainder;  // post-measurement state of the partner qubit
};
// which: 0 = first qubit of the pair, 1 = second.
HalfMeasureResult measure_half(const PureState& pair, int which, Basis basis, rng::RandomStream& rng);

// Y is the real matrix i*sigma_y = [[0,1],[-1,0]]; states equal up to
// global phase are the same physical state.  target selects the qubit for
// pair states (must be 0 for single qubits).
PureState apply_pauli(const PureState& q, PauliOp op, int target = 0);

struct BellMeasureResult {
  BellState which;
  uint8_t bits;  // bell_to_bits(which)
};
BellMeasureResult bell_measure(const PureState& pair, rng::RandomStream& rng);

PureState tensor(const PureState& first, const PureState& second);

// |<a|b>|^2 — global-phase-insensitive equality check for tests.
double overlap_sq(const PureState& a, const PureState& b);

}  // namespace srn::quantum
