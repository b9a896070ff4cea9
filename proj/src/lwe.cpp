#include "srn/lwe.hpp"

#include <algorithm>
#include <cstring>
#include <random>

namespace srn::lwe {

namespace {

constexpr char kStreamMagic[8] = {'S', 'R', 'N', 'C', 'T', '0', '0', '1'};
constexpr char kKeyMagic[8] = {'S', 'R', 'N', 'L', 'W', 'E', '0', '1'};

int16_t mod_q(int32_t v, int q) {
  int32_t r = v % q;
  if (r < 0) r += q;
  return static_cast<int16_t>(r);
}

// Circular distance between residues.
int circ_dist(int v, int t, int q) {
  int d = std::abs(v - t) % q;
  return std::min(d, q - d);
}

}  // namespace

void LweParams::validate() const {
  if (n <= 0 || q <= 2 || q > 255) throw ContractError("LweParams: bad n/q");
  if (repetition <= 0 || message_bits() * repetition != n)
    throw ContractError("LweParams: repetition * message bits must equal n");
}

Poly expand_public_poly(uint64_t a_seed, const LweParams& p) {
  // Rejection sampling keeps coefficients uniform mod q; the dedicated
  // engine makes expansion a pure function of the stored seed.
  std::mt19937_64 eng(a_seed);
  Poly a(static_cast<size_t>(p.n));
  for (auto& c : a) {
    for (;;) {
      uint8_t byte = static_cast<uint8_t>(eng() >> 56);
      if (byte < p.q) {
        c = byte;
        break;
      }
    }
  }
  return a;
}

SmallPoly sample_ternary(int n, rng::RandomStream& rng) {
  SmallPoly t(static_cast<size_t>(n));
  for (auto& c : t) {
    uint32_t two = rng.next_below(4);
    c = two == 0 ? -1 : (two == 3 ? 1 : 0);
  }
  return t;
}

Poly negacyclic_mul(const Poly& a, const SmallPoly& t, const LweParams& p) {
  size_t n = static_cast<size_t>(p.n);
  if (a.size() != n || t.size() != n) throw ContractError("negacyclic_mul: wrong lengths");
  std::vector<int32_t> acc(n, 0);
  for (size_t j = 0; j < n; ++j) {
    int8_t tj = t[j];
    if (tj == 0) continue;
    if (tj > 0) {
      size_t i = 0;
      for (; i + j < n; ++i) acc[i + j] += a[i];
      for (; i < n; ++i) acc[i + j - n] -= a[i];
    } else {
      size_t i = 0;
      for (; i + j < n; ++i) acc[i + j] -= a[i];
      for (; i < n; ++i) acc[i + j - n] += a[i];
    }
  }
  Poly out(n);
  for (size_t i = 0; i < n; ++i) out[i] = mod_q(acc[i], p.q);
  return out;
}

Keypair keygen(const LweParams& p, uint64_t seed) {
  p.validate();
  rng::RandomStream rng(rng::derive_seed(seed, "lwe-keygen"));
  Keypair kp;
  kp.pk.a_seed = rng.next_u64();
  Poly a = expand_public_poly(kp.pk.a_seed, p);
  kp.sk.s = sample_ternary(p.n, rng);
  SmallPoly e = sample_ternary(p.n, rng);
  kp.pk.b = negacyclic_mul(a, kp.sk.s, p);
  for (int i = 0; i < p.n; ++i)
    kp.pk.b[static_cast<size_t>(i)] = mod_q(kp.pk.b[static_cast<size_t>(i)] + e[static_cast<size_t>(i)], p.q);
  return kp;
}

Bytes CiphertextBlock::to_bytes() const {
  Bytes out;
  out.reserve(c1.size() + c2.size());
  out.insert(out.end(), c1.begin(), c1.end());
  out.insert(out.end(), c2.begin(), c2.end());
  return out;
}

CiphertextBlock CiphertextBlock::from_bytes(const Bytes& raw, const LweParams& p) {
  if (static_cast<int>(raw.size()) != p.ciphertext_bytes())
    throw ContractError("CiphertextBlock: wrong size");
  CiphertextBlock b;
  b.c1.assign(raw.begin(), raw.begin() + p.n);
  b.c2.assign(raw.begin() + p.n, raw.end());
  return b;
}

CiphertextBlock encrypt_block(const LweParams& p, const PublicKey& pk,
                              const Bytes& block32, rng::RandomStream& rng) {
  p.validate();
  if (static_cast<int>(block32.size()) != p.message_bytes)
    throw ContractError("encrypt_block: block must be exactly message_bytes");
  Poly a = expand_public_poly(pk.a_seed, p);
  SmallPoly r = sample_ternary(p.n, rng);
  SmallPoly e1 = sample_ternary(p.n, rng);
  SmallPoly e2 = sample_ternary(p.n, rng);

  Poly c1 = negacyclic_mul(a, r, p);
  Poly c2 = negacyclic_mul(pk.b, r, p);
  int half = p.q / 2;  // 125
  BitVec mbits = bytes_to_bits(block32);
  for (int i = 0; i < p.n; ++i) {
    int32_t v = c1[static_cast<size_t>(i)] + e1[static_cast<size_t>(i)];
    c1[static_cast<size_t>(i)] = mod_q(v, p.q);
  }
  for (int i = 0; i < p.n; ++i) {
    int32_t v = c2[static_cast<size_t>(i)] + e2[static_cast<size_t>(i)];
    // bit j rides coefficients j and j + message_bits (repetition 2)
    int bit_index = i % p.message_bits();
    if (mbits[static_cast<size_t>(bit_index)]) v += half;
    c2[static_cast<size_t>(i)] = mod_q(v, p.q);
  }

  CiphertextBlock ct;
  ct.c1.resize(static_cast<size_t>(p.n));
  ct.c2.resize(static_cast<size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    ct.c1[static_cast<size_t>(i)] = static_cast<uint8_t>(c1[static_cast<size_t>(i)]);
    ct.c2[static_cast<size_t>(i)] = static_cast<uint8_t>(c2[static_cast<size_t>(i)]);
  }
  return ct;
}

Bytes decrypt_block(const LweParams& p, const SecretKey& sk, const CiphertextBlock& ct) {
  p.validate();
  if (static_cast<int>(ct.c1.size()) != p.n || static_cast<int>(ct.c2.size()) != p.n)
    throw ContractError("decrypt_block: wrong ciphertext size");
  Poly c1(static_cast<size_t>(p.n));
  for (int i = 0; i < p.n; ++i) c1[static_cast<size_t>(i)] = ct.c1[static_cast<size_t>(i)];
  Poly c1s = negacyclic_mul(c1, sk.s, p);
  int half = p.q / 2;
  BitVec bits(static_cast<size_t>(p.message_bits()));
  for (int j = 0; j < p.message_bits(); ++j) {
    int score0 = 0, score1 = 0;
    for (int rep = 0; rep < p.repetition; ++rep) {
      int pos = j + rep * p.message_bits();
      int d = mod_q(ct.c2[static_cast<size_t>(pos)] - c1s[static_cast<size_t>(pos)], p.q);
      score0 += circ_dist(d, 0, p.q);
      score1 += circ_dist(d, half, p.q);
    }
    bits[static_cast<size_t>(j)] = score1 < score0 ? 1 : 0;
  }
  return bits_to_bytes(bits);
}

CiphertextStream encrypt_stream(const LweParams& p, const PublicKey& pk,
                                const Bytes& plaintext, rng::RandomStream& rng) {
  size_t bs = static_cast<size_t>(p.message_bytes);
  size_t nblocks = std::max<size_t>(1, (plaintext.size() + bs - 1) / bs);
  CiphertextStream out;
  out.plaintext_len = static_cast<uint32_t>(plaintext.size());
  out.blocks.reserve(nblocks);
  for (size_t i = 0; i < nblocks; ++i) {
    Bytes chunk(bs, 0);
    size_t off = i * bs;
    size_t take = off < plaintext.size() ? std::min(bs, plaintext.size() - off) : 0;
    if (take) std::memcpy(chunk.data(), plaintext.data() + off, take);
    out.blocks.push_back(encrypt_block(p, pk, chunk, rng));
  }
  return out;
}

Bytes decrypt_stream(const LweParams& p, const SecretKey& sk, const CiphertextStream& stream) {
  size_t bs = static_cast<size_t>(p.message_bytes);
  size_t expect_blocks = std::max<size_t>(1, (static_cast<size_t>(stream.plaintext_len) + bs - 1) / bs);
  if (stream.blocks.size() != expect_blocks)
    throw PaddingError("decrypt_stream: block count inconsistent with plaintext length");
  Bytes padded;
  padded.reserve(stream.blocks.size() * bs);
  for (const auto& b : stream.blocks) {
    Bytes chunk = decrypt_block(p, sk, b);
    padded.insert(padded.end(), chunk.begin(), chunk.end());
  }
  if (padded.size() < stream.plaintext_len)
    throw PaddingError("decrypt_stream: truncated blocks");
  for (size_t i = stream.plaintext_len; i < padded.size(); ++i)
    if (padded[i] != 0) throw PaddingError("decrypt_stream: nonzero padding");
  padded.resize(stream.plaintext_len);
  return padded;
}

Bytes stream_to_bytes(const CiphertextStream& stream, const LweParams& p) {
  ByteWriter w;
  w.raw(reinterpret_cast<const uint8_t*>(kStreamMagic), 8);
  w.u32be(static_cast<uint32_t>(stream.blocks.size()));
  w.u32be(stream.plaintext_len);
  for (const auto& b : stream.blocks) {
    if (static_cast<int>(b.c1.size()) != p.n || static_cast<int>(b.c2.size()) != p.n)
      throw ContractError("stream_to_bytes: malformed block");
    w.raw(b.c1);
    w.raw(b.c2);
  }
  return w.take();
}

CiphertextStream stream_from_bytes(const Bytes& raw, const LweParams& p) {
  ByteReader r(raw);
  Bytes magic = r.raw(8);
  if (std::memcmp(magic.data(), kStreamMagic, 8) != 0)
    throw PaddingError("ciphertext stream: bad magic");
  uint32_t nblocks = r.u32be();
  uint32_t plen = r.u32be();
  if (r.remaining() != static_cast<size_t>(nblocks) * static_cast<size_t>(p.ciphertext_bytes()))
    throw PaddingError("ciphertext stream: truncated or oversized block list");
  CiphertextStream out;
  out.plaintext_len = plen;
  out.blocks.reserve(nblocks);
  for (uint32_t i = 0; i < nblocks; ++i)
    out.blocks.push_back(CiphertextBlock::from_bytes(r.raw(static_cast<size_t>(p.ciphertext_bytes())), p));
  return out;
}

Bytes public_key_to_bytes(const PublicKey& pk, const LweParams& p) {
  if (static_cast<int>(pk.b.size()) != p.n) throw ContractError("public_key_to_bytes: wrong length");
  ByteWriter w;
  w.raw(reinterpret_cast<const uint8_t*>(kKeyMagic), 8);
  w.u8(0);
  w.u64(pk.a_seed);
  for (int16_t c : pk.b) w.u8(static_cast<uint8_t>(c));
  return w.take();
}

PublicKey public_key_from_bytes(const Bytes& raw, const LweParams& p) {
  ByteReader r(raw);
  Bytes magic = r.raw(8);
  if (std::memcmp(magic.data(), kKeyMagic, 8) != 0) throw ContractError("key file: bad magic");
  if (r.u8() != 0) throw ContractError("key file: not a public key");
  PublicKey pk;
  pk.a_seed = r.u64();
  pk.b.resize(static_cast<size_t>(p.n));
  for (auto& c : pk.b) c = r.u8();
  if (!r.done()) throw ContractError("key file: trailing bytes");
  return pk;
}

Bytes secret_key_to_bytes(const SecretKey& sk, const LweParams& p) {
  if (static_cast<int>(sk.s.size()) != p.n) throw ContractError("secret_key_to_bytes: wrong length");
  ByteWriter w;
  w.raw(reinterpret_cast<const uint8_t*>(kKeyMagic), 8);
  w.u8(1);
  for (int8_t c : sk.s) w.u8(static_cast<uint8_t>(mod_q(c, p.q)));
  return w.take();
}

SecretKey secret_key_from_bytes(const Bytes& raw, const LweParams& p) {
  ByteReader r(raw);
  Bytes magic = r.raw(8);
  if (std::memcmp(magic.data(), kKeyMagic, 8) != 0) throw ContractError("key file: bad magic");
  if (r.u8() != 1) throw ContractError("key file: not a secret key");
  SecretKey sk;
  sk.s.resize(static_cast<size_t>(p.n));
  for (auto& c : sk.s) {
    uint8_t v = r.u8();
    if (v == 0)
      c = 0;
    else if (v == 1)
      c = 1;
    else if (v == p.q - 1)
      c = -1;
    else
      throw ContractError("key file: secret coefficient out of range");
  }
  if (!r.done()) throw ContractError("key file: trailing bytes");
  return sk;
}

}  // namespace srn::lwe
