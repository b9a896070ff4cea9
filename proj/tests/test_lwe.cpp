#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "srn/lwe.hpp"
#include "srn/rng.hpp"
#include "support.hpp"

using namespace srn;
using namespace srn::lwe;
using srn::rng::RandomStream;

namespace {
const LweParams kP{};
}

TEST_CASE("keygen is deterministic in the seed and distinct across seeds") {
  Keypair a = keygen(kP, 42);
  Keypair b = keygen(kP, 42);
  CHECK(a.pk.a_seed == b.pk.a_seed);
  CHECK(a.pk.b == b.pk.b);
  CHECK(a.sk.s == b.sk.s);

  std::set<Bytes> sks, pks;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Keypair kp = keygen(kP, seed);
    sks.insert(secret_key_to_bytes(kp.sk, kP));
    pks.insert(public_key_to_bytes(kp.pk, kP));
  }
  CHECK(sks.size() == 100);
  CHECK(pks.size() == 100);
}

TEST_CASE("public key hides a ternary error: b - a*s has coefficients in {-1,0,1}") {
  for (uint64_t seed : {1ull, 7ull, 123456789ull}) {
    Keypair kp = keygen(kP, seed);
    Poly a = expand_public_poly(kp.pk.a_seed, kP);
    Poly as = negacyclic_mul(a, kp.sk.s, kP);
    for (int i = 0; i < kP.n; ++i) {
      int e = (kp.pk.b[static_cast<size_t>(i)] - as[static_cast<size_t>(i)] + kP.q) % kP.q;
      bool ternary = e == 0 || e == 1 || e == kP.q - 1;
      CHECK(ternary);
    }
  }
}

TEST_CASE("secret and error sampling is ternary with the expected bias") {
  RandomStream r(5);
  SmallPoly t = sample_ternary(20000, r);
  size_t zeros = 0;
  for (int8_t v : t) {
    CHECK(v >= -1);
    CHECK(v <= 1);
    zeros += v == 0;
  }
  CHECK(testsup::binom_within(zeros, t.size(), 0.5, 4.0));
}

TEST_CASE("expand_public_poly is deterministic and in range") {
  Poly a1 = expand_public_poly(99, kP);
  Poly a2 = expand_public_poly(99, kP);
  CHECK(a1 == a2);
  CHECK(a1.size() == static_cast<size_t>(kP.n));
  for (int16_t c : a1) {
    CHECK(c >= 0);
    CHECK(c < kP.q);
  }
  CHECK(expand_public_poly(100, kP) != a1);
}

TEST_CASE("every ciphertext block is exactly 1024 bytes and encryption is randomized") {
  Keypair kp = keygen(kP, 7);
  RandomStream enc(11);
  Bytes block(32, 0xAB);
  std::set<Bytes> cts;
  for (int i = 0; i < 100; ++i) {
    CiphertextBlock ct = encrypt_block(kP, kp.pk, block, enc);
    CHECK(ct.c1.size() == 512);
    CHECK(ct.c2.size() == 512);
    Bytes raw = ct.to_bytes();
    CHECK(raw.size() == 1024);
    cts.insert(raw);
  }
  CHECK(cts.size() == 100);  // fresh randomness every call

  // Same rng seed, same block: byte-identical ciphertext.
  RandomStream e1(77), e2(77);
  CHECK(encrypt_block(kP, kp.pk, block, e1).to_bytes() ==
        encrypt_block(kP, kp.pk, block, e2).to_bytes());
}

TEST_CASE("block roundtrip over ten thousand random blocks has zero failures") {
  Keypair kp = keygen(kP, 2024);
  RandomStream msg_rng(555), enc_rng(777);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes m = msg_rng.next_bytes(32);
    CiphertextBlock ct = encrypt_block(kP, kp.pk, m, enc_rng);
    if (decrypt_block(kP, kp.sk, ct) != m) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("extreme block values roundtrip") {
  Keypair kp = keygen(kP, 3);
  RandomStream enc(4);
  Bytes ones(32, 0xFF);
  CHECK(decrypt_block(kP, kp.sk, encrypt_block(kP, kp.pk, ones, enc)) == ones);
  Bytes zeros(32, 0x00);
  CHECK(decrypt_block(kP, kp.sk, encrypt_block(kP, kp.pk, zeros, enc)) == zeros);
}

TEST_CASE("decrypting with an unrelated secret key never recovers the block") {
  Keypair good = keygen(kP, 1001);
  Keypair other = keygen(kP, 2002);
  RandomStream msg_rng(31), enc(32);
  for (int i = 0; i < 1000; ++i) {
    Bytes m = msg_rng.next_bytes(32);
    CiphertextBlock ct = encrypt_block(kP, good.pk, m, enc);
    CHECK(decrypt_block(kP, other.sk, ct) != m);
  }
}

TEST_CASE("stream layer: block counts and exact output sizes") {
  Keypair kp = keygen(kP, 8);
  RandomStream enc(9), payload_rng(10);

  Bytes big = payload_rng.next_bytes(25600);
  CiphertextStream s = encrypt_stream(kP, kp.pk, big, enc);
  CHECK(s.blocks.size() == 800);
  CHECK(s.plaintext_len == 25600);
  CHECK(s.block_bytes(kP) == 819200);
  CHECK(stream_to_bytes(s, kP).size() == 16 + 819200);
  CHECK(decrypt_stream(kP, kp.sk, s) == big);

  CiphertextStream empty = encrypt_stream(kP, kp.pk, Bytes{}, enc);
  CHECK(empty.blocks.size() == 1);  // minimum one block, fully padding
  CHECK(decrypt_stream(kP, kp.sk, empty).empty());

  CiphertextStream one = encrypt_stream(kP, kp.pk, Bytes{0x42}, enc);
  CHECK(one.blocks.size() == 1);
  CiphertextStream two = encrypt_stream(kP, kp.pk, Bytes(33, 0x42), enc);
  CHECK(two.blocks.size() == 2);
  CiphertextStream exact = encrypt_stream(kP, kp.pk, Bytes(64, 0x42), enc);
  CHECK(exact.blocks.size() == 2);
}

TEST_CASE("stream roundtrip across one thousand random payload lengths") {
  Keypair kp = keygen(kP, 12);
  RandomStream enc(13), gen(14);
  for (int i = 0; i < 1000; ++i) {
    size_t len = gen.next_below(4097);
    Bytes payload = gen.next_bytes(len);
    CiphertextStream s = encrypt_stream(kP, kp.pk, payload, enc);
    Bytes wire = stream_to_bytes(s, kP);
    CiphertextStream parsed = stream_from_bytes(wire, kP);
    CHECK(decrypt_stream(kP, kp.sk, parsed) == payload);
  }
}

TEST_CASE("wire format is framed and rejects damage") {
  Keypair kp = keygen(kP, 15);
  RandomStream enc(16), gen(17);
  Bytes payload = gen.next_bytes(100);  // 4 blocks
  CiphertextStream s = encrypt_stream(kP, kp.pk, payload, enc);
  Bytes wire = stream_to_bytes(s, kP);
  REQUIRE(wire.size() == 16 + 4 * 1024);
  CHECK(std::string(wire.begin(), wire.begin() + 8) == "SRNCT001");

  // Truncation mid-block.
  Bytes cut(wire.begin(), wire.end() - 100);
  CHECK_THROWS_AS(stream_from_bytes(cut, kP), PaddingError);
  // Truncation of whole blocks (count no longer matches).
  Bytes fewer(wire.begin(), wire.end() - 1024);
  CHECK_THROWS_AS(stream_from_bytes(fewer, kP), PaddingError);
  // Extra trailing bytes.
  Bytes extra = wire;
  extra.push_back(0);
  CHECK_THROWS_AS(stream_from_bytes(extra, kP), PaddingError);
  // Bad magic.
  Bytes bad = wire;
  bad[0] ^= 0xFF;
  CHECK_THROWS_AS(stream_from_bytes(bad, kP), PaddingError);
  // Block count inconsistent with plaintext length.
  CiphertextStream lying = s;
  lying.blocks.pop_back();
  CHECK_THROWS_AS(decrypt_stream(kP, kp.sk, lying), PaddingError);
}

TEST_CASE("reordered ciphertext blocks never decrypt to the original payload") {
  Keypair kp = keygen(kP, 18);
  RandomStream enc(19), gen(20);
  Bytes payload = gen.next_bytes(128);  // 4 full blocks, no padding
  CiphertextStream s = encrypt_stream(kP, kp.pk, payload, enc);

  CiphertextStream swapped_front = s;
  std::swap(swapped_front.blocks[0], swapped_front.blocks[1]);
  bool mismatch = false;
  try {
    mismatch = decrypt_stream(kP, kp.sk, swapped_front) != payload;
  } catch (const PaddingError&) {
    mismatch = true;
  }
  CHECK(mismatch);

  Bytes short_payload = gen.next_bytes(100);  // last block carries padding
  CiphertextStream s2 = encrypt_stream(kP, kp.pk, short_payload, enc);
  CiphertextStream swapped_tail = s2;
  std::swap(swapped_tail.blocks[0], swapped_tail.blocks[3]);
  bool rejected = false;
  try {
    rejected = decrypt_stream(kP, kp.sk, swapped_tail) != short_payload;
  } catch (const PaddingError&) {
    rejected = true;
  }
  CHECK(rejected);
}

TEST_CASE("key serialization roundtrips and rejects the wrong kind") {
  Keypair kp = keygen(kP, 21);

  Bytes pkb = public_key_to_bytes(kp.pk, kP);
  CHECK(std::string(pkb.begin(), pkb.begin() + 8) == "SRNLWE01");
  PublicKey pk2 = public_key_from_bytes(pkb, kP);
  CHECK(pk2.a_seed == kp.pk.a_seed);
  CHECK(pk2.b == kp.pk.b);

  Bytes skb = secret_key_to_bytes(kp.sk, kP);
  SecretKey sk2 = secret_key_from_bytes(skb, kP);
  CHECK(sk2.s == kp.sk.s);

  // Cross-loading the wrong kind or corrupt magic must fail loudly.
  CHECK_THROWS_AS(public_key_from_bytes(skb, kP), ContractError);
  CHECK_THROWS_AS(secret_key_from_bytes(pkb, kP), ContractError);
  Bytes bad = pkb;
  bad[3] ^= 0x01;
  CHECK_THROWS_AS(public_key_from_bytes(bad, kP), ContractError);
  Bytes trailing = skb;
  trailing.push_back(0);
  CHECK_THROWS_AS(secret_key_from_bytes(trailing, kP), ContractError);

  // The serialized keys still work.
  RandomStream enc(22);
  Bytes m(32, 0x5C);
  CHECK(decrypt_block(kP, sk2, encrypt_block(kP, pk2, m, enc)) == m);
}

TEST_CASE("parameter and size contracts") {
  LweParams bad = kP;
  bad.q = 300;  // must stay a single byte
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = kP;
  bad.n = 100;  // repetition * message bits must tile the ring
  CHECK_THROWS_AS(bad.validate(), ContractError);

  Keypair kp = keygen(kP, 23);
  RandomStream enc(24);
  Bytes short_block(31, 0);
  CHECK_THROWS_AS(encrypt_block(kP, kp.pk, short_block, enc), ContractError);
  Bytes long_block(33, 0);
  CHECK_THROWS_AS(encrypt_block(kP, kp.pk, long_block, enc), ContractError);

  CiphertextBlock ct;
  ct.c1 = Bytes(512, 0);
  ct.c2 = Bytes(100, 0);
  CHECK_THROWS_AS(decrypt_block(kP, kp.sk, ct), ContractError);
  CHECK_THROWS_AS(CiphertextBlock::from_bytes(Bytes(100, 0), kP), ContractError);
}
