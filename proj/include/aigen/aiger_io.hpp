//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// ASCII AIGER ("aag") reader and writer for the combinational subset:
// no latches, maximal variable index M = I + A, gate left-hand sides even
// and consecutive, each gate defined after both of its fanins.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aigen/aig.hpp"

namespace aigen {

class ParseError : public std::runtime_error {
public:
  ParseError(size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  size_t line() const { return line_; }

private:
  size_t line_;
};

struct AagTriple {
  uint32_t lhs, rhs0, rhs1;
};

/// Syntactic form of an aag file, before conversion to an Aig.
struct AagDocument {
  uint32_t max_var = 0;
  uint32_t n_inputs = 0;
  uint32_t n_latches = 0;
  uint32_t n_outputs = 0;
  uint32_t n_ands = 0;
  std::vector<uint32_t> inputs;   // literals, canonically 2, 4, ..., 2I
  std::vector<uint32_t> outputs;  // literals
  std::vector<AagTriple> ands;
  std::vector<std::string> symbols;  // raw symbol-table lines, kept verbatim
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

inline std::vector<uint32_t> parse_uint_fields(std::string_view line, size_t line_no,
                                               size_t expected, const char* what) {
  std::vector<uint32_t> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i == line.size()) break;
    uint64_t v = 0;
    const size_t digits_start = i;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
      v = v * 10 + uint64_t(line[i] - '0');
      if (v > 0xFFFFFFFFull) throw ParseError(line_no, std::string(what) + ": number out of range");
      ++i;
    }
    if (i == digits_start || (i < line.size() && line[i] != ' '))
      throw ParseError(line_no, std::string(what) + ": expected an unsigned integer");
    out.push_back(uint32_t(v));
  }
  if (out.size() != expected)
    throw ParseError(line_no, std::string(what) + ": expected " + std::to_string(expected) +
                                  " fields, got " + std::to_string(out.size()));
  return out;
}

}  // namespace detail

inline AagDocument parse_aag_document(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(1, "empty document");

  size_t ln = 0;
  auto next_line = [&](const char* what) -> std::string_view {
    if (ln >= lines.size())
      throw ParseError(lines.size() + 1, std::string("unexpected end of file, expected ") + what);
    return lines[ln++];
  };

  AagDocument doc;
  {
    std::string_view header = next_line("header");
    if (header.substr(0, 4) != "aag ") throw ParseError(1, "header must start with \"aag\"");
    const auto f = detail::parse_uint_fields(header.substr(4), 1, 5, "header");
    doc.max_var = f[0];
    doc.n_inputs = f[1];
    doc.n_latches = f[2];
    doc.n_outputs = f[3];
    doc.n_ands = f[4];
  }
  if (doc.n_latches != 0) throw ParseError(1, "latches are not supported (combinational subset)");
  if (doc.max_var != doc.n_inputs + doc.n_ands)
    throw ParseError(1, "maximal variable index must equal inputs + ands, got " +
                            std::to_string(doc.max_var));

  for (uint32_t i = 0; i < doc.n_inputs; ++i) {
    const size_t line_no = ln + 1;
    const auto f = detail::parse_uint_fields(next_line("input literal"), line_no, 1, "input");
    if (f[0] != 2 * (i + 1))
      throw ParseError(line_no, "input literal must be " + std::to_string(2 * (i + 1)) + ", got " +
                                    std::to_string(f[0]));
    doc.inputs.push_back(f[0]);
  }
  for (uint32_t i = 0; i < doc.n_outputs; ++i) {
    const size_t line_no = ln + 1;
    const auto f = detail::parse_uint_fields(next_line("output literal"), line_no, 1, "output");
    if (f[0] > 2 * doc.max_var + 1)
      throw ParseError(line_no, "output literal " + std::to_string(f[0]) + " names no variable");
    doc.outputs.push_back(f[0]);
  }
  for (uint32_t i = 0; i < doc.n_ands; ++i) {
    const size_t line_no = ln + 1;
    const auto f = detail::parse_uint_fields(next_line("and triple"), line_no, 3, "and");
    const uint32_t expected_lhs = 2 * (doc.n_inputs + 1 + i);
    if (f[0] != expected_lhs)
      throw ParseError(line_no, "and left-hand side must be the even literal " +
                                    std::to_string(expected_lhs) + ", got " + std::to_string(f[0]));
    if (f[1] >= f[0] || f[2] >= f[0])
      throw ParseError(line_no, "and fanins must precede the gate (topological order)");
    doc.ands.push_back({f[0], f[1], f[2]});
  }

  // Optional trailing sections: symbol table then an optional comment block
  // introduced by a single "c" line. Both are preserved but not interpreted.
  bool in_comment = false;
  while (ln < lines.size()) {
    const std::string_view line = lines[ln++];
    if (in_comment) continue;
    if (line == "c") {
      in_comment = true;
      continue;
    }
    if (!line.empty() && (line[0] == 'i' || line[0] == 'o'))
      doc.symbols.emplace_back(line);
    else
      throw ParseError(ln, "unexpected content after the and section");
  }
  return doc;
}

inline Aig document_to_aig(const AagDocument& doc) {
  Aig g(doc.n_inputs);
  for (const auto& t : doc.ands)
    g.add_and_raw(Literal::from_raw(t.rhs0), Literal::from_raw(t.rhs1));
  for (uint32_t o : doc.outputs) g.add_output(Literal::from_raw(o));
  return g;
}

inline Aig parse_aag(std::string_view text) { return document_to_aig(parse_aag_document(text)); }

/// Serializes in index order; emitted fanin order is the stored fanin order,
/// which downstream traversal encoding treats as significant.
inline std::string write_aag(const Aig& g, bool with_symbols = false) {
  std::ostringstream os;
  os << "aag " << g.n_inputs() + g.n_ands() << ' ' << g.n_inputs() << " 0 " << g.n_outputs() << ' '
     << g.n_ands() << '\n';
  for (uint32_t v = 1; v <= g.n_inputs(); ++v) os << 2 * v << '\n';
  for (auto o : g.outputs()) os << o.raw() << '\n';
  for (uint32_t n = g.n_inputs() + 1; n < g.n_nodes(); ++n) {
    const AndNode& a = g.and_node(n);
    os << 2 * n << ' ' << a.in0.raw() << ' ' << a.in1.raw() << '\n';
  }
  if (with_symbols) {
    for (uint32_t v = 0; v < g.n_inputs(); ++v) os << 'i' << v << " x" << v + 1 << '\n';
    for (uint32_t o = 0; o < g.n_outputs(); ++o) os << 'o' << o << " y" << o + 1 << '\n';
  }
  return os.str();
}

}  // namespace aigen
