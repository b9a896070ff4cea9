#include "srn/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

namespace srn::fec {

namespace {

struct Graph {
  int n, m, wc, wr;
  std::vector<std::vector<int>> row_cols;
  std::vector<std::vector<int>> col_rows;

  void rebuild_cols() {
    col_rows.assign(static_cast<size_t>(n), {});
    for (int r = 0; r < m; ++r)
      for (int c : row_cols[static_cast<size_t>(r)]) col_rows[static_cast<size_t>(c)].push_back(r);
  }

  bool row_has(int r, int c) const {
    const auto& v = row_cols[static_cast<size_t>(r)];
    return std::find(v.begin(), v.end(), c) != v.end();
  }
};

// Socket matching: each of the n columns appears wc times; row r takes
// sockets [wr*r, wr*r+wr).  Duplicate columns within a row are repaired by
// random socket swaps.
bool build_matching(Graph& g, rng::RandomStream& rs) {
  std::vector<int> sockets;
  sockets.reserve(static_cast<size_t>(g.n) * static_cast<size_t>(g.wc));
  for (int c = 0; c < g.n; ++c)
    for (int j = 0; j < g.wc; ++j) sockets.push_back(c);
  rs.shuffle(sockets);

  auto row_of_socket = [&](size_t s) { return static_cast<int>(s) / g.wr; };
  auto row_dup = [&](int r) {
    for (int i = 0; i < g.wr; ++i)
      for (int j = i + 1; j < g.wr; ++j)
        if (sockets[static_cast<size_t>(r * g.wr + i)] == sockets[static_cast<size_t>(r * g.wr + j)])
          return r * g.wr + j;  // socket index of a duplicate occurrence
    return -1;
  };

  for (int pass = 0; pass < 400; ++pass) {
    bool clean = true;
    for (int r = 0; r < g.m; ++r) {
      int dup = row_dup(r);
      while (dup >= 0) {
        clean = false;
        bool fixed = false;
        for (int att = 0; att < 200 && !fixed; ++att) {
          size_t t = rs.next_below(static_cast<uint32_t>(sockets.size()));
          int r2 = row_of_socket(t);
          if (r2 == r) continue;
          int a = sockets[static_cast<size_t>(dup)], b = sockets[t];
          if (a == b) continue;
          // Swap is valid if neither row ends up with a duplicate.
          bool bad = false;
          for (int j = 0; j < g.wr && !bad; ++j) {
            int s_r = sockets[static_cast<size_t>(r * g.wr + j)];
            if (r * g.wr + j != dup && s_r == b) bad = true;
          }
          for (int j = 0; j < g.wr && !bad; ++j) {
            size_t sidx = static_cast<size_t>(r2 * g.wr + j);
            if (sidx != t && sockets[sidx] == a) bad = true;
          }
          if (bad) continue;
          std::swap(sockets[static_cast<size_t>(dup)], sockets[t]);
          fixed = true;
        }
        if (!fixed) return false;
        dup = row_dup(r);
      }
    }
    if (clean) {
      g.row_cols.assign(static_cast<size_t>(g.m), {});
      for (int r = 0; r < g.m; ++r)
        for (int j = 0; j < g.wr; ++j)
          g.row_cols[static_cast<size_t>(r)].push_back(sockets[static_cast<size_t>(r * g.wr + j)]);
      g.rebuild_cols();
      return true;
    }
  }
  return false;
}

// Find one pair of rows sharing two columns; return {row, col_to_move} or
// {-1,-1} when the graph is 4-cycle free.
std::pair<int, int> find_four_cycle(const Graph& g) {
  std::unordered_map<uint64_t, int> seen;
  seen.reserve(static_cast<size_t>(g.m) * 16);
  for (int r = 0; r < g.m; ++r) {
    const auto& cols = g.row_cols[static_cast<size_t>(r)];
    for (size_t i = 0; i < cols.size(); ++i)
      for (size_t j = i + 1; j < cols.size(); ++j) {
        int c1 = std::min(cols[i], cols[j]), c2 = std::max(cols[i], cols[j]);
        uint64_t key = static_cast<uint64_t>(c1) << 32 | static_cast<uint32_t>(c2);
        auto it = seen.find(key);
        if (it != seen.end()) return {r, c2};
        seen.emplace(key, r);
      }
  }
  return {-1, -1};
}

bool remove_four_cycles(Graph& g, rng::RandomStream& rs) {
  for (int pass = 0; pass < 4000; ++pass) {
    auto [r, c] = find_four_cycle(g);
    if (r < 0) return true;
    // Swap the offending column entry with a random edge elsewhere.
    bool fixed = false;
    for (int att = 0; att < 400 && !fixed; ++att) {
      int r2 = static_cast<int>(rs.next_below(static_cast<uint32_t>(g.m)));
      if (r2 == r) continue;
      auto& row2 = g.row_cols[static_cast<size_t>(r2)];
      int slot2 = static_cast<int>(rs.next_below(static_cast<uint32_t>(row2.size())));
      int c2 = row2[static_cast<size_t>(slot2)];
      if (c2 == c || g.row_has(r, c2) || g.row_has(r2, c)) continue;
      auto& row1 = g.row_cols[static_cast<size_t>(r)];
      *std::find(row1.begin(), row1.end(), c) = c2;
      row2[static_cast<size_t>(slot2)] = c;
      fixed = true;
    }
    if (!fixed) return false;
  }
  return find_four_cycle(g).first < 0;
}

}  // namespace

int LdpcCode::count_four_cycles() const {
  int count = 0;
  std::unordered_map<uint64_t, int> seen;
  for (int r = 0; r < m(); ++r) {
    const auto& cols = row_cols_[static_cast<size_t>(r)];
    for (size_t i = 0; i < cols.size(); ++i)
      for (size_t j = i + 1; j < cols.size(); ++j) {
        int c1 = std::min(cols[i], cols[j]), c2 = std::max(cols[i], cols[j]);
        uint64_t key = static_cast<uint64_t>(c1) << 32 | static_cast<uint32_t>(c2);
        count += seen.count(key) ? 1 : 0;
        seen.emplace(key, r);
      }
  }
  return count;
}

LdpcCode LdpcCode::build(const LdpcParams& p) {
  if (p.n <= 0 || p.k <= 0 || p.k >= p.n) throw ContractError("LdpcCode: bad n/k");
  int m = p.n - p.k;
  if (p.n * p.col_weight != m * p.row_weight)
    throw ContractError("LdpcCode: weights inconsistent with rate");

  for (uint64_t attempt = 0; attempt < 64; ++attempt) {
    rng::RandomStream rs(rng::derive_seed(p.seed + attempt, "ldpc-construct"));
    Graph g{p.n, m, p.col_weight, p.row_weight, {}, {}};
    if (!build_matching(g, rs)) continue;
    if (!remove_four_cycles(g, rs)) continue;
    g.rebuild_cols();

    // GF(2) elimination to derive the systematic encoder.  Bit r of word w
    // of hrow[row] is column w*64+r.
    size_t words = (static_cast<size_t>(p.n) + 63) / 64;
    std::vector<std::vector<uint64_t>> hrow(static_cast<size_t>(m),
                                            std::vector<uint64_t>(words, 0));
    for (int r = 0; r < m; ++r)
      for (int c : g.row_cols[static_cast<size_t>(r)])
        hrow[static_cast<size_t>(r)][static_cast<size_t>(c) / 64] |= 1ull << (c % 64);

    auto get = [&](int r, int c) {
      return (hrow[static_cast<size_t>(r)][static_cast<size_t>(c) / 64] >> (c % 64)) & 1ull;
    };
    auto swap_columns = [&](int c1, int c2) {
      if (c1 == c2) return;
      for (int r = 0; r < m; ++r) {
        uint64_t b1 = get(r, c1), b2 = get(r, c2);
        if (b1 == b2) continue;
        hrow[static_cast<size_t>(r)][static_cast<size_t>(c1) / 64] ^= 1ull << (c1 % 64);
        hrow[static_cast<size_t>(r)][static_cast<size_t>(c2) / 64] ^= 1ull << (c2 % 64);
      }
      for (auto& cols : g.row_cols)
        for (int& c : cols) c = (c == c1) ? c2 : (c == c2 ? c1 : c);
    };

    bool ok = true;
    for (int piv = 0; piv < m && ok; ++piv) {
      int col = p.k + piv;
      int pivot_row = -1;
      for (int r = piv; r < m; ++r)
        if (get(r, col)) { pivot_row = r; break; }
      if (pivot_row < 0) {
        // Pull a message-block column that still has support below the pivot.
        int found = -1;
        for (int c = 0; c < p.k && found < 0; ++c)
          for (int r = piv; r < m; ++r)
            if (get(r, c)) { found = c; break; }
        if (found < 0) { ok = false; break; }  // rank deficient
        swap_columns(found, col);
        for (int r = piv; r < m; ++r)
          if (get(r, col)) { pivot_row = r; break; }
      }
      std::swap(hrow[static_cast<size_t>(piv)], hrow[static_cast<size_t>(pivot_row)]);
      for (int r = 0; r < m; ++r) {
        if (r == piv || !get(r, col)) continue;
        for (size_t w = 0; w < words; ++w)
          hrow[static_cast<size_t>(r)][w] ^= hrow[static_cast<size_t>(piv)][w];
      }
    }
    if (!ok) continue;

    LdpcCode code;
    code.n_ = p.n;
    code.k_ = p.k;
    code.max_iterations_ = p.max_iterations;
    code.row_cols_ = std::move(g.row_cols);
    for (auto& cols : code.row_cols_) std::sort(cols.begin(), cols.end());
    code.col_rows_.assign(static_cast<size_t>(p.n), {});
    for (int r = 0; r < m; ++r)
      for (int c : code.row_cols_[static_cast<size_t>(r)])
        code.col_rows_[static_cast<size_t>(c)].push_back(r);
    size_t kwords = (static_cast<size_t>(p.k) + 63) / 64;
    code.enc_rows_.assign(static_cast<size_t>(m), std::vector<uint64_t>(kwords, 0));
    for (int r = 0; r < m; ++r)
      for (size_t w = 0; w < kwords; ++w) code.enc_rows_[static_cast<size_t>(r)][w] = hrow[static_cast<size_t>(r)][w];
    return code;
  }
  throw ContractError("LdpcCode: construction failed for all seed attempts");
}

BitVec LdpcCode::encode(const BitVec& message) const {
  if (static_cast<int>(message.size()) != k_) throw ContractError("encode: message must have k bits");
  size_t kwords = (static_cast<size_t>(k_) + 63) / 64;
  std::vector<uint64_t> mw(kwords, 0);
  for (int i = 0; i < k_; ++i)
    if (message[static_cast<size_t>(i)]) mw[static_cast<size_t>(i) / 64] |= 1ull << (i % 64);
  BitVec cw(static_cast<size_t>(n_), 0);
  std::copy(message.begin(), message.end(), cw.begin());
  for (int r = 0; r < m(); ++r) {
    uint64_t acc = 0;
    for (size_t w = 0; w < kwords; ++w) acc ^= enc_rows_[static_cast<size_t>(r)][w] & mw[w];
    cw[static_cast<size_t>(k_ + r)] = static_cast<uint8_t>(__builtin_popcountll(acc) & 1);
  }
  return cw;
}

bool LdpcCode::parity_ok(const BitVec& codeword) const {
  if (static_cast<int>(codeword.size()) != n_) throw ContractError("parity_ok: wrong length");
  for (const auto& cols : row_cols_) {
    int parity = 0;
    for (int c : cols) parity ^= codeword[static_cast<size_t>(c)];
    if (parity) return false;
  }
  return true;
}

std::optional<BitVec> LdpcCode::decode(const BitVec& received, const BitVec& erased,
                                       double crossover) const {
  if (static_cast<int>(received.size()) != n_ || static_cast<int>(erased.size()) != n_)
    throw ContractError("decode: input must have n bits + n flags");
  double p = std::min(0.499, std::max(1e-4, crossover));
  double lc = std::log((1.0 - p) / p);

  std::vector<double> llr(static_cast<size_t>(n_));
  for (int c = 0; c < n_; ++c)
    llr[static_cast<size_t>(c)] = erased[static_cast<size_t>(c)] ? 0.0
                                  : (received[static_cast<size_t>(c)] ? -lc : lc);

  BitVec hard(static_cast<size_t>(n_));
  auto decide = [&](const std::vector<double>& total) {
    for (int c = 0; c < n_; ++c) hard[static_cast<size_t>(c)] = total[static_cast<size_t>(c)] < 0 ? 1 : 0;
  };
  decide(llr);
  if (parity_ok(hard)) return BitVec(hard.begin(), hard.begin() + k_);

  // Edge arrays in row-major order.
  int edges = 0;
  for (const auto& cols : row_cols_) edges += static_cast<int>(cols.size());
  std::vector<int> edge_col(static_cast<size_t>(edges));
  std::vector<int> row_start(row_cols_.size() + 1, 0);
  {
    int e = 0;
    for (size_t r = 0; r < row_cols_.size(); ++r) {
      row_start[r] = e;
      for (int c : row_cols_[r]) edge_col[static_cast<size_t>(e++)] = c;
    }
    row_start[row_cols_.size()] = e;
  }
  std::vector<double> v2c(static_cast<size_t>(edges)), c2v(static_cast<size_t>(edges), 0.0);
  for (int e = 0; e < edges; ++e) v2c[static_cast<size_t>(e)] = llr[static_cast<size_t>(edge_col[static_cast<size_t>(e)])];

  std::vector<double> total(static_cast<size_t>(n_));
  for (int iter = 0; iter < max_iterations_; ++iter) {
    // Check-node update with exclusion via forward/backward products.
    for (size_t r = 0; r < row_cols_.size(); ++r) {
      int b = row_start[r], e = row_start[r + 1];
      double fwd[16], t[16];
      int deg = e - b;
      if (deg > 16) throw ContractError("decode: row degree exceeds supported bound");
      for (int j = 0; j < deg; ++j) {
        double msg = std::max(-40.0, std::min(40.0, v2c[static_cast<size_t>(b + j)]));
        t[j] = std::tanh(0.5 * msg);
      }
      double run = 1.0;
      for (int j = 0; j < deg; ++j) { fwd[j] = run; run *= t[j]; }
      double bwd = 1.0;
      for (int j = deg - 1; j >= 0; --j) {
        double prod = fwd[j] * bwd;
        prod = std::max(-(1.0 - 1e-12), std::min(1.0 - 1e-12, prod));
        c2v[static_cast<size_t>(b + j)] = 2.0 * std::atanh(prod);
        bwd *= t[j];
      }
    }
    // Variable-node update.
    for (int c = 0; c < n_; ++c) total[static_cast<size_t>(c)] = llr[static_cast<size_t>(c)];
    for (int e = 0; e < edges; ++e) total[static_cast<size_t>(edge_col[static_cast<size_t>(e)])] += c2v[static_cast<size_t>(e)];
    for (int e = 0; e < edges; ++e)
      v2c[static_cast<size_t>(e)] = total[static_cast<size_t>(edge_col[static_cast<size_t>(e)])] - c2v[static_cast<size_t>(e)];
    decide(total);
    if (parity_ok(hard)) return BitVec(hard.begin(), hard.begin() + k_);
  }
  return std::nullopt;
}

}  // namespace srn::fec
