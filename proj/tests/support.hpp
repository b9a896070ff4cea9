#pragma once

// Shared helpers for the test binaries: binomial tolerance bands, an
// independent parity re-check for the LDPC code, and small file/CLI utilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "srn/bits.hpp"
#include "srn/ldpc.hpp"

namespace testsup {

// Half-width of a k-sigma band around the mean of Binomial(n, p), in counts.
inline double binom_sigma(std::size_t n, double p) {
  return std::sqrt(static_cast<double>(n) * p * (1.0 - p));
}

// True when `count` successes out of `n` lie within `sigmas` standard
// deviations of the binomial mean n*p.
inline bool binom_within(std::size_t count, std::size_t n, double p, double sigmas) {
  double mean = static_cast<double>(n) * p;
  double dev = std::abs(static_cast<double>(count) - mean);
  return dev <= sigmas * binom_sigma(n, p);
}

// Independent parity verification: recompute every check-row XOR directly
// from the code's row adjacency, without calling LdpcCode::parity_ok.
inline bool parity_holds(const srn::fec::LdpcCode& code, const srn::BitVec& word) {
  if (word.size() != static_cast<std::size_t>(code.n())) return false;
  for (int r = 0; r < code.m(); ++r) {
    int acc = 0;
    for (int c : code.row_cols()[static_cast<std::size_t>(r)]) acc ^= word[static_cast<std::size_t>(c)];
    if (acc != 0) return false;
  }
  return true;
}

inline std::size_t hamming(const srn::BitVec& a, const srn::BitVec& b) {
  std::size_t d = a.size() == b.size() ? 0 : SIZE_MAX;
  if (d == SIZE_MAX) return d;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

inline std::size_t popcount_bytes(const srn::Bytes& b) {
  std::size_t n = 0;
  for (uint8_t v : b) n += static_cast<std::size_t>(__builtin_popcount(v));
  return n;
}

// True when `needle` occurs as a contiguous byte run inside `hay`.
inline bool contains_run(const srn::Bytes& hay, const srn::Bytes& needle) {
  if (needle.empty()) return true;
  if (hay.size() < needle.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool file_exists(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return in.good();
}

// Runs a shell command, capturing stdout+stderr into `out` via a file in
// `tmp_dir`; returns the exit code (-1 when the process died abnormally).
inline int run_command(const std::string& cmd, std::string& out, const std::string& tmp_dir,
                       const std::string& tag) {
  std::string capture = tmp_dir + "/cmd_" + tag + ".log";
  std::string full = cmd + " > " + capture + " 2>&1";
  int rc = std::system(full.c_str());
  out = read_text_file(capture);
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace testsup
