//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Bit-parallel truth tables for complete and partially specified Boolean
// functions. Row convention: row index i assigns input x_{j+1} the value of
// bit j of i; to_string() lists row 0 leftmost, so x_1 over three variables
// prints as "01010101".
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aigen {

/// Largest input count supported by exhaustive table evaluation.
inline constexpr uint32_t kMaxEvalInputs = 16;

enum class Trit : uint8_t { zero = 0, one = 1, unknown = 2 };

class TruthTable {
public:
  TruthTable() = default;

  explicit TruthTable(uint32_t n_vars) : n_vars_(n_vars) {
    if (n_vars > kMaxEvalInputs)
      throw std::length_error("TruthTable: variable count " + std::to_string(n_vars) +
                              " exceeds the supported maximum of " + std::to_string(kMaxEvalInputs));
    words_.assign(word_count(n_vars), 0u);
  }

  /// Table of the projection x_var (1-based variable index).
  static TruthTable projection(uint32_t n_vars, uint32_t var) {
    if (var < 1 || var > n_vars) throw std::out_of_range("TruthTable::projection: variable index out of range");
    static constexpr uint64_t patterns[6] = {
        0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
        0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
    TruthTable t(n_vars);
    const uint32_t bit = var - 1;
    for (size_t w = 0; w < t.words_.size(); ++w) {
      if (bit < 6)
        t.words_[w] = patterns[bit];
      else
        t.words_[w] = ((w >> (bit - 6)) & 1u) ? ~0ull : 0ull;
    }
    t.mask_top();
    return t;
  }

  static TruthTable constant(uint32_t n_vars, bool value) {
    TruthTable t(n_vars);
    if (value) {
      for (auto& w : t.words_) w = ~0ull;
      t.mask_top();
    }
    return t;
  }

  /// Parses a row-0-leftmost bit string; length must be a power of two.
  static TruthTable from_string(std::string_view s) {
    uint32_t n = 0;
    while ((1ull << n) < s.size()) ++n;
    if ((1ull << n) != s.size())
      throw std::invalid_argument("TruthTable::from_string: length is not a power of two");
    TruthTable t(n);
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        t.set_bit(i, true);
      else if (s[i] != '0')
        throw std::invalid_argument("TruthTable::from_string: invalid character");
    }
    return t;
  }

  uint32_t n_vars() const { return n_vars_; }
  uint64_t n_rows() const { return 1ull << n_vars_; }

  bool bit(uint64_t row) const { return (words_[row >> 6] >> (row & 63)) & 1u; }

  void set_bit(uint64_t row, bool v) {
    const uint64_t m = 1ull << (row & 63);
    if (v)
      words_[row >> 6] |= m;
    else
      words_[row >> 6] &= ~m;
  }

  std::string to_string() const {
    std::string s(n_rows(), '0');
    for (uint64_t i = 0; i < n_rows(); ++i)
      if (bit(i)) s[i] = '1';
    return s;
  }

  /// Hex digest of the raw table bits, low word first. Exact (not a hash).
  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    const uint64_t nibbles = std::max<uint64_t>(1, n_rows() / 4);
    std::string s;
    s.reserve(nibbles);
    for (uint64_t i = 0; i < nibbles; ++i) {
      const uint64_t w = words_[(i * 4) >> 6];
      s.push_back(digits[(w >> ((i * 4) & 63)) & 0xF]);
    }
    return s;
  }

  TruthTable operator&(const TruthTable& o) const {
    TruthTable t = binary_compat(o);
    for (size_t w = 0; w < words_.size(); ++w) t.words_[w] = words_[w] & o.words_[w];
    return t;
  }
  TruthTable operator|(const TruthTable& o) const {
    TruthTable t = binary_compat(o);
    for (size_t w = 0; w < words_.size(); ++w) t.words_[w] = words_[w] | o.words_[w];
    return t;
  }
  TruthTable operator^(const TruthTable& o) const {
    TruthTable t = binary_compat(o);
    for (size_t w = 0; w < words_.size(); ++w) t.words_[w] = words_[w] ^ o.words_[w];
    return t;
  }
  TruthTable operator~() const {
    TruthTable t(n_vars_);
    for (size_t w = 0; w < words_.size(); ++w) t.words_[w] = ~words_[w];
    t.mask_top();
    return t;
  }

  bool operator==(const TruthTable& o) const = default;

  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }

  /// True iff the function changes when x_var (1-based) is flipped.
  bool depends_on(uint32_t var) const {
    const TruthTable p = projection(n_vars_, var);
    // Compare the two cofactors: f restricted to x=0 vs x=1.
    const uint32_t bit = var - 1;
    if (bit < 6) {
      const uint32_t shift = 1u << bit;
      for (size_t w = 0; w < words_.size(); ++w) {
        const uint64_t hi = words_[w] & p.words_[w];
        const uint64_t lo = words_[w] & ~p.words_[w];
        if ((hi >> shift) != lo) return true;
      }
      return false;
    }
    const size_t stride = size_t{1} << (bit - 6);
    for (size_t w = 0; w < words_.size(); ++w) {
      if ((w >> (bit - 6)) & 1) continue;  // lower cofactor word
      if (words_[w] != words_[w + stride]) return true;
    }
    return false;
  }

  const std::vector<uint64_t>& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

  void mask_top() {
    if (n_vars_ < 6) words_[0] &= (1ull << n_rows()) - 1;
  }

  static size_t word_count(uint32_t n_vars) { return n_vars < 6 ? 1 : (size_t{1} << (n_vars - 6)); }

private:
  TruthTable binary_compat(const TruthTable& o) const {
    if (n_vars_ != o.n_vars_)
      throw std::invalid_argument("TruthTable: variable count mismatch in binary operation");
    return TruthTable(n_vars_);
  }

  uint32_t n_vars_ = 0;
  std::vector<uint64_t> words_;
};

/// Three-valued table used while a circuit is only partially constructed:
/// value bits are meaningful where the known mask is set, and are kept zero
/// elsewhere.
class PartialTruthTable {
public:
  PartialTruthTable() = default;

  static PartialTruthTable unknown(uint32_t n_vars) {
    PartialTruthTable p;
    p.value_ = TruthTable(n_vars);
    p.known_ = TruthTable(n_vars);
    return p;
  }

  static PartialTruthTable complete(TruthTable t) {
    PartialTruthTable p;
    p.known_ = TruthTable::constant(t.n_vars(), true);
    p.value_ = std::move(t);
    return p;
  }

  uint32_t n_vars() const { return value_.n_vars(); }

  Trit at(uint64_t row) const {
    if (!known_.bit(row)) return Trit::unknown;
    return value_.bit(row) ? Trit::one : Trit::zero;
  }

  std::string to_string() const {
    std::string s = value_.to_string();
    for (uint64_t i = 0; i < value_.n_rows(); ++i)
      if (!known_.bit(i)) s[i] = '?';
    return s;
  }

  bool is_complete() const { return known_ == TruthTable::constant(known_.n_vars(), true); }

  TruthTable to_truth_table() const {
    if (!is_complete())
      throw std::logic_error("PartialTruthTable: cannot convert with unknown entries remaining");
    return value_;
  }

  /// AND of two partial functions; 0 on either input forces 0 regardless of
  /// the other. invert_output complements determined rows.
  static PartialTruthTable and_gate(const PartialTruthTable& a, const PartialTruthTable& b,
                                    bool invert_output) {
    PartialTruthTable r = unknown(a.n_vars());
    const auto& av = a.value_.words();
    const auto& ak = a.known_.words();
    const auto& bv = b.value_.words();
    const auto& bk = b.known_.words();
    auto& rv = r.value_.words();
    auto& rk = r.known_.words();
    for (size_t w = 0; w < rv.size(); ++w) {
      const uint64_t forced_zero = (ak[w] & ~av[w]) | (bk[w] & ~bv[w]);
      rk[w] = (ak[w] & bk[w]) | forced_zero;
      rv[w] = av[w] & bv[w];
      if (invert_output) rv[w] = ~rv[w] & rk[w];
    }
    r.value_.mask_top();
    r.known_.mask_top();
    return r;
  }

  /// True iff some determined row disagrees with the target table.
  bool contradicts(const TruthTable& target) const {
    const auto& tv = target.words();
    const auto& rv = value_.words();
    const auto& rk = known_.words();
    for (size_t w = 0; w < rv.size(); ++w)
      if ((rv[w] ^ tv[w]) & rk[w]) return true;
    return false;
  }

  const TruthTable& value() const { return value_; }
  const TruthTable& known() const { return known_; }

private:
  TruthTable value_, known_;
};

}  // namespace aigen
