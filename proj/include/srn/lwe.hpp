#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srn/bits.hpp"
#include "srn/common.hpp"
#include "srn/rng.hpp"

namespace srn::lwe {

// Compact ring-LWE block scheme over Z_q[x]/(x^n + 1): n = 512, q = 251,
// ternary secrets/errors with P(-1)=1/4, P(0)=1/2, P(+1)=1/4, message bits
// encoded at floor(q/2) with 2-way repetition.  One 32-byte block encrypts
// to exactly 1024 ciphertext bytes (c1 || c2, one byte per coefficient).
struct LweParams {
  int n = 512;
  int q = 251;
  int repetition = 2;
  int message_bytes = 32;
  int message_bits() const { return message_bytes * 8; }
  int ciphertext_bytes() const { return 2 * n; }
  void validate() const;
};

using Poly = std::vector<int16_t>;      // coefficients in [0, q)
using SmallPoly = std::vector<int8_t>;  // ternary coefficients {-1, 0, +1}

struct PublicKey {
  uint64_t a_seed = 0;  // expands to the public polynomial a
  Poly b;               // a*s + e
};

struct SecretKey {
  SmallPoly s;
};

struct Keypair {
  PublicKey pk;
  SecretKey sk;
};

struct CiphertextBlock {
  Bytes c1;  // n bytes
  Bytes c2;  // n bytes
  Bytes to_bytes() const;
  static CiphertextBlock from_bytes(const Bytes& raw, const LweParams& p);
};

struct CiphertextStream {
  std::vector<CiphertextBlock> blocks;
  uint32_t plaintext_len = 0;
  size_t block_bytes(const LweParams& p) const { return blocks.size() * static_cast<size_t>(p.ciphertext_bytes()); }
};

struct PaddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Poly expand_public_poly(uint64_t a_seed, const LweParams& p);
SmallPoly sample_ternary(int n, rng::RandomStream& rng);
// Negacyclic product of a general polynomial with a ternary one.
Poly negacyclic_mul(const Poly& a, const SmallPoly& t, const LweParams& p);

Keypair keygen(const LweParams& p, uint64_t seed);

CiphertextBlock encrypt_block(const LweParams& p, const PublicKey& pk,
                              const Bytes& block32, rng::RandomStream& rng);
Bytes decrypt_block(const LweParams& p, const SecretKey& sk, const CiphertextBlock& ct);

// Stream layer: blocks = max(1, ceil(len/32)); the final block is
// zero-filled and the plaintext length rides the stream (and its file
// header), which is what drives padding removal.
CiphertextStream encrypt_stream(const LweParams& p, const PublicKey& pk,
                                const Bytes& plaintext, rng::RandomStream& rng);
Bytes decrypt_stream(const LweParams& p, const SecretKey& sk, const CiphertextStream& stream);

// File/wire format: "SRNCT001" magic, u32be block count, u32be plaintext
// length, then the raw blocks.
Bytes stream_to_bytes(const CiphertextStream& stream, const LweParams& p);
CiphertextStream stream_from_bytes(const Bytes& raw, const LweParams& p);

// Key files: "SRNLWE01" magic, kind byte (0 public / 1 secret), little-
// endian coefficient bytes (secret coefficients stored mod q).
Bytes public_key_to_bytes(const PublicKey& pk, const LweParams& p);
PublicKey public_key_from_bytes(const Bytes& raw, const LweParams& p);
Bytes secret_key_to_bytes(const SecretKey& sk, const LweParams& p);
SecretKey secret_key_from_bytes(const Bytes& raw, const LweParams& p);

}  // namespace srn::lwe
