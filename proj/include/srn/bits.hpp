#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "srn/common.hpp"

namespace srn {

using Bytes = std::vector<uint8_t>;
// One element per bit, values 0/1.  Desk-scale clarity over packing.
using BitVec = std::vector<uint8_t>;

BitVec bytes_to_bits(const Bytes& bytes);          // MSB-first within each byte
Bytes bits_to_bytes(const BitVec& bits);           // zero-pads the final byte

Bytes pack_bits(const BitVec& bits);               // bit-packed, MSB-first
BitVec unpack_bits(const Bytes& packed, size_t nbits);

std::string to_hex(const Bytes& data);
Bytes from_hex(const std::string& hex);            // throws ContractError

Bytes xor_bytes(const Bytes& a, const Bytes& b);   // sizes must match

// Little-endian binary writer/reader for classical message payloads and
// file formats.  Reader throws ContractError on underrun.
class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void u32be(uint32_t v);
  void raw(const Bytes& data);
  void raw(const uint8_t* data, size_t len);
  void bits(const BitVec& bits);                    // u32 count + packed bits
  void u32list(const std::vector<uint32_t>& v);     // u32 count + entries
  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(const Bytes& data) : data_(data) {}
  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  uint32_t u32be();
  Bytes raw(size_t len);
  BitVec bits();
  std::vector<uint32_t> u32list();
  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  const Bytes& data_;
  size_t pos_ = 0;
};

}  // namespace srn
