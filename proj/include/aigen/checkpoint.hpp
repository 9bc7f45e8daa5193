//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Versioned model checkpoint container. Layout (little-endian):
//
//   bytes 0..3    magic "AGCP"
//   bytes 4..7    uint32 format version (currently 1)
//   bytes 8..15   uint64 manifest length in bytes
//   manifest      JSON: config, training step, RNG state, section table
//   payload       concatenated float64 sections, offsets relative to payload
//
// Section names are "param/<p>", "adam_m/<p>", "adam_v/<p>". The manifest is
// serialized from sorted maps, so save -> load -> save is byte-identical.
// The full byte layout is documented in docs/checkpoint-format.md.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/transformer.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace aigen {

constexpr uint32_t kCheckpointVersion = 1;

inline std::string arch_name(Arch a) {
  return a == Arch::encoder_only ? "encoder_only" : "encoder_decoder";
}

inline Arch arch_from_name(const std::string& s) {
  if (s == "encoder_only") return Arch::encoder_only;
  if (s == "encoder_decoder") return Arch::encoder_decoder;
  throw std::runtime_error("checkpoint: unknown architecture name '" + s + "'");
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{{"n_layers", c.n_layers},       {"embed_width", c.embed_width},
                        {"ffn_width", c.ffn_width},     {"n_heads", c.n_heads},
                        {"vocab_size", c.vocab_size},   {"poscode_width", c.poscode_width},
                        {"max_len", c.max_len},         {"arch", arch_name(c.arch)}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<uint32_t>();
  c.embed_width = j.at("embed_width").get<uint32_t>();
  c.ffn_width = j.at("ffn_width").get<uint32_t>();
  c.n_heads = j.at("n_heads").get<uint32_t>();
  c.vocab_size = j.at("vocab_size").get<uint32_t>();
  c.poscode_width = j.at("poscode_width").get<uint32_t>();
  c.max_len = j.at("max_len").get<uint32_t>();
  c.arch = arch_from_name(j.at("arch").get<std::string>());
  return c;
}

struct Checkpoint {
  ModelConfig config;
  ParamStore params;
  std::map<std::string, Tensor> adam_m, adam_v;  // empty until training starts
  uint64_t step = 0;
  std::string rng_state;  // serialized std::mt19937_64 stream
};

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

inline void put_u64(std::string& out, uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

struct SectionRef {
  std::string name;
  const Tensor* tensor;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  std::vector<detail::SectionRef> sections;
  for (const auto& [name, t] : ck.params.values()) sections.push_back({"param/" + name, &t});
  for (const auto& [name, t] : ck.adam_m) sections.push_back({"adam_m/" + name, &t});
  for (const auto& [name, t] : ck.adam_v) sections.push_back({"adam_v/" + name, &t});

  nlohmann::json table = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& s : sections) {
    table.push_back({{"name", s.name},
                     {"rows", s.tensor->rows},
                     {"cols", s.tensor->cols},
                     {"offset", offset},
                     {"count", s.tensor->numel()}});
    offset += s.tensor->numel() * sizeof(double);
  }
  const nlohmann::json manifest = {{"config", config_to_json(ck.config)},
                                   {"step", ck.step},
                                   {"rng_state", ck.rng_state},
                                   {"sections", table}};
  const std::string mtext = manifest.dump();

  std::string out;
  out.reserve(16 + mtext.size() + offset);
  out.append("AGCP", 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, uint64_t(mtext.size()));
  out += mtext;
  for (const auto& s : sections) {
    const size_t bytes = s.tensor->numel() * sizeof(double);
    const size_t at = out.size();
    out.resize(at + bytes);
    std::memcpy(out.data() + at, s.tensor->data.data(), bytes);
  }
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const std::string blob = serialize_checkpoint(ck);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  f.write(blob.data(), std::streamsize(blob.size()));
  if (!f) throw std::runtime_error("checkpoint: short write to " + path.string());
}

inline Checkpoint deserialize_checkpoint(const std::string& blob) {
  if (blob.size() < 16 || blob.compare(0, 4, "AGCP") != 0)
    throw std::runtime_error("checkpoint: not a checkpoint file (bad magic)");
  uint32_t version = 0;
  std::memcpy(&version, blob.data() + 4, 4);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  uint64_t mlen = 0;
  std::memcpy(&mlen, blob.data() + 8, 8);
  if (16 + mlen > blob.size())
    throw std::runtime_error("checkpoint: truncated file (manifest extends past end)");
  Checkpoint ck;
  const size_t payload_at = 16 + size_t(mlen);
  try {
    const nlohmann::json manifest = nlohmann::json::parse(blob.substr(16, mlen));
    ck.config = config_from_json(manifest.at("config"));
    ck.step = manifest.at("step").get<uint64_t>();
    ck.rng_state = manifest.at("rng_state").get<std::string>();
    for (const auto& row : manifest.at("sections")) {
      const std::string name = row.at("name").get<std::string>();
      const size_t rows = row.at("rows").get<size_t>();
      const size_t cols = row.at("cols").get<size_t>();
      const uint64_t offset = row.at("offset").get<uint64_t>();
      const uint64_t count = row.at("count").get<uint64_t>();
      if (count != rows * cols) throw std::runtime_error("checkpoint: inconsistent section shape");
      if (payload_at + offset + count * sizeof(double) > blob.size())
        throw std::runtime_error("checkpoint: truncated file (section '" + name +
                                 "' extends past end)");
      Tensor t(rows, cols);
      std::memcpy(t.data.data(), blob.data() + payload_at + offset, count * sizeof(double));
      const auto slash = name.find('/');
      if (slash == std::string::npos)
        throw std::runtime_error("checkpoint: malformed section name '" + name + "'");
      const std::string kind = name.substr(0, slash), pname = name.substr(slash + 1);
      if (kind == "param") {
        ck.params.create(pname, rows, cols) = std::move(t);
      } else if (kind == "adam_m") {
        ck.adam_m[pname] = std::move(t);
      } else if (kind == "adam_v") {
        ck.adam_v[pname] = std::move(t);
      } else {
        throw std::runtime_error("checkpoint: unknown section kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: corrupt manifest: ") + e.what());
  }
  return ck;
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(blob);
}

/// Loads and verifies the stored configuration matches what the caller was
/// built for; any difference is an error rather than a silent reinterpret.
inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  const ModelConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  if (!(ck.config == expected))
    throw std::runtime_error("checkpoint: configuration mismatch between file and caller (" +
                             config_to_json(ck.config).dump() + " vs " +
                             config_to_json(expected).dump() + ")");
  return ck;
}

}  // namespace aigen
