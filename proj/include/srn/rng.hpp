#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "srn/bits.hpp"
#include "srn/common.hpp"

namespace srn::rng {

// Deterministic random stream.  All derived values are computed from the
// mt19937_64 sequence with fixed arithmetic (no distribution objects, whose
// algorithms vary between standard libraries), so output is reproducible
// for a given seed on any platform.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0,1)
  uint8_t next_bit() { return static_cast<uint8_t>(eng_() >> 63); }
  bool next_bool() { return next_bit() != 0; }
  uint8_t next_byte() { return static_cast<uint8_t>(eng_() >> 56); }

  // Uniform in [0, bound) via bitmask rejection.
  uint32_t next_below(uint32_t bound);

  Bytes next_bytes(size_t n);
  BitVec next_bits(size_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = next_below(static_cast<uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices drawn from [0, population), ascending order.
  std::vector<uint32_t> sample_indices(uint32_t population, uint32_t k);

 private:
  std::mt19937_64 eng_;
};

uint64_t fnv1a64(std::string_view s);
uint64_t splitmix64(uint64_t x);

// Label-derived sub-stream seed.  Independent labels give independent
// streams; the derivation is pure arithmetic on (master, label).
uint64_t derive_seed(uint64_t master, std::string_view label);

struct StreamFactory {
  uint64_t master;
  RandomStream make(std::string_view label) const { return RandomStream(derive_seed(master, label)); }
};

}  // namespace srn::rng
