#include "srn/bits.hpp"

namespace srn {

BitVec bytes_to_bits(const Bytes& bytes) {
  BitVec bits;
  bits.reserve(bytes.size() * 8);
  for (uint8_t b : bytes)
    for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1u);
  return bits;
}

Bytes bits_to_bytes(const BitVec& bits) {
  Bytes out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<uint8_t>(0x80u >> (i % 8));
  return out;
}

Bytes pack_bits(const BitVec& bits) { return bits_to_bytes(bits); }

BitVec unpack_bits(const Bytes& packed, size_t nbits) {
  if (packed.size() * 8 < nbits) throw ContractError("unpack_bits: not enough bytes");
  BitVec bits(nbits);
  for (size_t i = 0; i < nbits; ++i)
    bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
  return bits;
}

std::string to_hex(const Bytes& data) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (uint8_t b : data) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw ContractError("from_hex: odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_val(hex[i]), lo = hex_val(hex[i + 1]);
    if (hi < 0 || lo < 0) throw ContractError("from_hex: bad digit");
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

Bytes xor_bytes(const Bytes& a, const Bytes& b) {
  if (a.size() != b.size()) throw ContractError("xor_bytes: size mismatch");
  Bytes out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

void ByteWriter::u16(uint16_t v) {
  out_.push_back(static_cast<uint8_t>(v));
  out_.push_back(static_cast<uint8_t>(v >> 8));
}

void ByteWriter::u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(uint64_t v) {
  for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::u32be(uint32_t v) {
  for (int i = 3; i >= 0; --i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void ByteWriter::raw(const Bytes& data) { out_.insert(out_.end(), data.begin(), data.end()); }

void ByteWriter::raw(const uint8_t* data, size_t len) { out_.insert(out_.end(), data, data + len); }

void ByteWriter::bits(const BitVec& b) {
  u32(static_cast<uint32_t>(b.size()));
  raw(pack_bits(b));
}

void ByteWriter::u32list(const std::vector<uint32_t>& v) {
  u32(static_cast<uint32_t>(v.size()));
  for (uint32_t x : v) u32(x);
}

uint8_t ByteReader::u8() {
  if (pos_ + 1 > data_.size()) throw ContractError("ByteReader: underrun");
  return data_[pos_++];
}

uint16_t ByteReader::u16() {
  uint16_t lo = u8(), hi = u8();
  return static_cast<uint16_t>(lo | hi << 8);
}

uint32_t ByteReader::u32() {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
  return v;
}

uint64_t ByteReader::u64() {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
  return v;
}

uint32_t ByteReader::u32be() {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | u8();
  return v;
}

Bytes ByteReader::raw(size_t len) {
  if (pos_ + len > data_.size()) throw ContractError("ByteReader: underrun");
  Bytes out(data_.begin() + static_cast<long>(pos_), data_.begin() + static_cast<long>(pos_ + len));
  pos_ += len;
  return out;
}

BitVec ByteReader::bits() {
  uint32_t n = u32();
  Bytes packed = raw((n + 7) / 8);
  return unpack_bits(packed, n);
}

std::vector<uint32_t> ByteReader::u32list() {
  uint32_t n = u32();
  std::vector<uint32_t> v(n);
  for (auto& x : v) x = u32();
  return v;
}

}  // namespace srn
