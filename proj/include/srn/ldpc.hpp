#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srn/bits.hpp"
#include "srn/common.hpp"
#include "srn/rng.hpp"

namespace srn::fec {

struct LdpcParams {
  int n = 1024;
  int k = 512;
  int col_weight = 3;
  int row_weight = 6;
  uint64_t seed = 1;
  int max_iterations = 50;
};

// Rate-1/2 regular Gallager-ensemble code.  Construction is seeded and
// deterministic: socket matching, duplicate-edge repair, 4-cycle removal by
// edge swaps between columns, then GF(2) elimination (with column swaps into
// the parity block when a pivot is missing) to derive a systematic encoder.
// Rank-deficient graphs retry construction with seed+1.
class LdpcCode {
 public:
  static LdpcCode build(const LdpcParams& params);

  int n() const { return n_; }
  int k() const { return k_; }
  int m() const { return n_ - k_; }
  int max_iterations() const { return max_iterations_; }

  // Systematic: codeword = message || parity.
  BitVec encode(const BitVec& message) const;

  // Sum-product BP over a BSC with the given crossover probability;
  // erased positions contribute zero log-likelihood.  Returns the decoded
  // message only when every parity check is satisfied.
  std::optional<BitVec> decode(const BitVec& received, const BitVec& erased,
                               double crossover) const;

  bool parity_ok(const BitVec& codeword) const;

  const std::vector<std::vector<int>>& row_cols() const { return row_cols_; }
  const std::vector<std::vector<int>>& col_rows() const { return col_rows_; }
  int count_four_cycles() const;

 private:
  int n_ = 0, k_ = 0, max_iterations_ = 50;
  std::vector<std::vector<int>> row_cols_;  // check -> variable indices
  std::vector<std::vector<int>> col_rows_;  // variable -> check indices
  std::vector<std::vector<uint64_t>> enc_rows_;  // m x words(k): parity = A * msg
};

}  // namespace srn::fec
