#include "srn/rng.hpp"

#include <algorithm>

namespace srn::rng {

uint32_t RandomStream::next_below(uint32_t bound) {
  if (bound == 0) throw ContractError("next_below: zero bound");
  if (bound == 1) return 0;
  uint32_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  for (;;) {
    uint32_t r = static_cast<uint32_t>(eng_() >> 32) & mask;
    if (r < bound) return r;
  }
}

Bytes RandomStream::next_bytes(size_t n) {
  Bytes out(n);
  for (auto& b : out) b = next_byte();
  return out;
}

BitVec RandomStream::next_bits(size_t n) {
  BitVec out(n);
  for (auto& b : out) b = next_bit();
  return out;
}

std::vector<uint32_t> RandomStream::sample_indices(uint32_t population, uint32_t k) {
  if (k > population) throw ContractError("sample_indices: k > population");
  std::vector<uint32_t> idx(population);
  for (uint32_t i = 0; i < population; ++i) idx[i] = i;
  // Partial Fisher-Yates: first k entries end up a uniform k-subset.
  for (uint32_t i = 0; i < k; ++i) {
    uint32_t j = i + next_below(population - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, std::string_view label) {
  return splitmix64(splitmix64(master) ^ fnv1a64(label));
}

}  // namespace srn::rng
