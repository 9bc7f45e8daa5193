//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Dataset layout and bookkeeping: random circuits stored as individual aag
// files next to a JSON Lines manifest. The first manifest line holds the
// generator parameters; each following line describes one item:
//
//   {"id":7,"file":"aig_000007.aag","ands_original":9,"ands_target":7,
//    "digest":"3x1:8e"}
//
// Supervision targets live beside their sources as <stem>.target.aag. The
// digest is an exact encoding of the item's truth tables ("<N>x<M>:" then
// one hex table per output, '.'-separated), so digest equality is function
// equality and manifests can be checked for uniqueness and disjointness.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/aiger_io.hpp"
#include "aigen/mcts.hpp"
#include "aigen/parallel.hpp"
#include "aigen/random_aig.hpp"
#include "aigen/train.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace aigen {

inline std::string tt_digest(uint32_t n_inputs, const std::vector<TruthTable>& tables) {
  std::string d = std::to_string(n_inputs) + "x" + std::to_string(tables.size()) + ":";
  for (size_t i = 0; i < tables.size(); ++i) {
    if (i) d += ".";
    d += tables[i].to_hex();
  }
  return d;
}

inline std::string tt_digest(const Aig& g) { return tt_digest(g.n_inputs(), g.eval_truth_tables()); }

/// First (output index, row) where the two table sets disagree, or nullopt if
/// they are equivalent. Output counts and variable counts must match.
inline std::optional<std::pair<uint32_t, uint64_t>> first_table_diff(
    const std::vector<TruthTable>& a, const std::vector<TruthTable>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("first_table_diff: output count mismatch");
  for (uint32_t o = 0; o < a.size(); ++o) {
    if (a[o].n_vars() != b[o].n_vars())
      throw std::invalid_argument("first_table_diff: input count mismatch");
    for (uint64_t row = 0; row < a[o].n_rows(); ++row)
      if (a[o].bit(row) != b[o].bit(row)) return std::make_pair(o, row);
  }
  return std::nullopt;
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

struct DatasetItem {
  uint32_t id = 0;
  std::string file;
  uint32_t ands_original = 0;
  uint32_t ands_target = 0;
  std::string digest;

  bool operator==(const DatasetItem&) const = default;
};

struct DatasetManifest {
  uint32_t n_inputs = 0;
  uint32_t n_outputs = 0;
  uint32_t max_traj_len = 0;
  uint64_t seed = 0;
  std::string supervision;  // "internal-mcts" or "external-tool"
  std::vector<DatasetItem> items;

  bool operator==(const DatasetManifest&) const = default;
};

inline std::string item_filename(uint32_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "aig_%06u.aag", id);
  return buf;
}

/// Supervision target path for an item file: foo.aag -> foo.target.aag.
inline std::string target_filename(const std::string& file) {
  const std::string suffix = ".aag";
  if (file.size() < suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw std::invalid_argument("target_filename: expected a .aag file name: " + file);
  return file.substr(0, file.size() - suffix.size()) + ".target.aag";
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  nlohmann::json header = {{"n_inputs", m.n_inputs},       {"n_outputs", m.n_outputs},
                           {"max_traj_len", m.max_traj_len}, {"seed", m.seed},
                           {"count", m.items.size()},      {"supervision", m.supervision}};
  std::string text = header.dump() + "\n";
  for (const DatasetItem& it : m.items) {
    const nlohmann::json line = {{"id", it.id},
                                 {"file", it.file},
                                 {"ands_original", it.ands_original},
                                 {"ands_target", it.ands_target},
                                 {"digest", it.digest}};
    text += line.dump() + "\n";
  }
  detail::write_text_file(path, text);
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  DatasetManifest m;
  size_t line_no = 0;
  size_t declared = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      if (line_no == 1) {
        m.n_inputs = j.at("n_inputs").get<uint32_t>();
        m.n_outputs = j.at("n_outputs").get<uint32_t>();
        m.max_traj_len = j.at("max_traj_len").get<uint32_t>();
        m.seed = j.at("seed").get<uint64_t>();
        m.supervision = j.at("supervision").get<std::string>();
        declared = j.at("count").get<size_t>();
        continue;
      }
      DatasetItem it;
      it.id = j.at("id").get<uint32_t>();
      it.file = j.at("file").get<std::string>();
      it.ands_original = j.at("ands_original").get<uint32_t>();
      it.ands_target = j.at("ands_target").get<uint32_t>();
      it.digest = j.at("digest").get<std::string>();
      m.items.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path.string() + " line " + std::to_string(line_no) +
                             ": " + e.what());
  }
  if (line_no == 0) throw std::runtime_error("manifest " + path.string() + " is empty");
  if (m.items.size() != declared)
    throw std::runtime_error("manifest " + path.string() + ": header count " +
                             std::to_string(declared) + " != " + std::to_string(m.items.size()) +
                             " item lines");
  std::set<std::string> digests;
  for (const DatasetItem& it : m.items)
    if (!digests.insert(it.digest).second)
      throw std::runtime_error("manifest " + path.string() + ": duplicate digest " + it.digest);
  return m;
}

struct DatasetOptions {
  uint32_t n_inputs = 6;
  uint32_t n_outputs = 2;
  uint32_t count = 100;
  uint32_t max_traj_len = 200;
  uint64_t seed = 0;
  std::string supervision = "internal-mcts";
};

/// Builds supervision targets by uniform-policy search; keeps the original
/// circuit as its own target whenever search fails or fails to improve.
inline std::function<Aig(const Aig&)> internal_mcts_target(SearchConfig cfg, uint32_t max_len) {
  return [cfg, max_len](const Aig& original) {
    const EquivSpec spec = EquivSpec::from_aig(original);
    UniformPolicy policy;
    SearchConfig item_cfg = cfg;
    // Content-derived seed so reruns are stable no matter how work is sharded.
    item_cfg.seed = cfg.seed ^ std::hash<std::string>{}(tt_digest(original.n_inputs(), spec.tables));
    GenOptions opts;
    opts.max_len = max_len;
    const GenResult r = synthesize_mcts(policy, spec, item_cfg, opts);
    if (r.status == GenStatus::ok && r.aig->count_ands() <= original.count_ands()) return *r.aig;
    return original;
  };
}

/// Draws `count` random circuits with pairwise-distinct truth-table digests,
/// writes each next to its supervision target, and returns the manifest
/// (also written to out_dir/manifest.jsonl). Items whose target_fn throws are
/// reported to stderr and skipped. Deterministic for a fixed seed.
inline DatasetManifest generate_dataset(const DatasetOptions& opts,
                                        const std::filesystem::path& out_dir,
                                        const std::function<Aig(const Aig&)>& target_fn,
                                        uint32_t n_workers = default_workers()) {
  if (opts.count == 0) throw std::invalid_argument("generate_dataset: count must be positive");
  std::filesystem::create_directories(out_dir);

  std::vector<Aig> originals;
  std::vector<std::string> digests;
  std::set<std::string> seen;
  const uint64_t max_attempts = uint64_t(opts.count) * 50;
  for (uint64_t attempt = 0; attempt < max_attempts && originals.size() < opts.count; ++attempt) {
    Aig g = random_aig(opts.n_inputs, opts.n_outputs, opts.max_traj_len, opts.seed + attempt);
    std::string d = tt_digest(g);
    if (!seen.insert(d).second) continue;
    originals.push_back(std::move(g));
    digests.push_back(std::move(d));
  }
  if (originals.size() < opts.count)
    throw std::runtime_error("generate_dataset: could not draw " + std::to_string(opts.count) +
                             " distinct-function circuits in " + std::to_string(max_attempts) +
                             " attempts");

  std::vector<std::optional<Aig>> targets(originals.size());
  std::vector<std::string> errors(originals.size());
  parallel_for(originals.size(), n_workers, [&](size_t i) {
    try {
      Aig t = target_fn(originals[i]);
      if (t.eval_truth_tables() != originals[i].eval_truth_tables())
        throw std::runtime_error("target is not equivalent to its source");
      targets[i] = std::move(t);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  DatasetManifest m;
  m.n_inputs = opts.n_inputs;
  m.n_outputs = opts.n_outputs;
  m.max_traj_len = opts.max_traj_len;
  m.seed = opts.seed;
  m.supervision = opts.supervision;
  for (size_t i = 0; i < originals.size(); ++i) {
    if (!targets[i]) {
      std::cerr << "gen-dataset: skipping item " << i << " (digest " << digests[i]
                << "): " << errors[i] << "\n";
      continue;
    }
    DatasetItem it;
    it.id = uint32_t(m.items.size());
    it.file = item_filename(it.id);
    it.ands_original = originals[i].count_ands();
    it.ands_target = targets[i]->count_ands();
    it.digest = digests[i];
    detail::write_text_file(out_dir / it.file, write_aag(originals[i]));
    detail::write_text_file(out_dir / target_filename(it.file), write_aag(*targets[i]));
    m.items.push_back(std::move(it));
  }
  write_manifest(m, out_dir / "manifest.jsonl");
  return m;
}

/// Fails if any truth-table digest appears in both manifests (the train/eval
/// disjointness requirement).
inline void assert_disjoint(const DatasetManifest& a, const DatasetManifest& b) {
  std::set<std::string> da;
  for (const DatasetItem& it : a.items) da.insert(it.digest);
  for (const DatasetItem& it : b.items)
    if (da.count(it.digest))
      throw std::runtime_error("manifests overlap: digest " + it.digest +
                               " appears in both sets");
}

inline Aig load_item_aig(const std::filesystem::path& dir, const std::string& file) {
  return parse_aag(detail::read_text_file(dir / file));
}

/// (original trajectory, target trajectory) pairs for next-gate training.
inline std::vector<PolicySample> load_policy_samples(const std::filesystem::path& dir,
                                                     const DatasetManifest& m, uint32_t d_max) {
  std::vector<PolicySample> samples;
  samples.reserve(m.items.size());
  for (const DatasetItem& it : m.items) {
    const Aig original = load_item_aig(dir, it.file);
    const Aig target = load_item_aig(dir, target_filename(it.file));
    samples.push_back(make_policy_sample(encode(original), encode(target), d_max));
  }
  return samples;
}

/// Trajectory -> full truth table samples for the classifier task; the
/// dataset must be single-output.
inline std::vector<ClassifierSample> load_classifier_samples(const std::filesystem::path& dir,
                                                             const DatasetManifest& m,
                                                             uint32_t max_len, uint32_t d_max) {
  if (m.n_outputs != 1)
    throw std::invalid_argument("load_classifier_samples: dataset must have exactly one output");
  std::vector<ClassifierSample> samples;
  samples.reserve(m.items.size());
  for (const DatasetItem& it : m.items) {
    const Aig g = load_item_aig(dir, it.file);
    ClassifierSample s;
    s.inputs = to_model_inputs(encode(g), max_len, d_max);
    const TruthTable table = g.eval_truth_tables().at(0);
    s.labels.resize(table.n_rows());
    for (uint64_t row = 0; row < table.n_rows(); ++row) s.labels[row] = table.bit(row) ? 1.0 : 0.0;
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace aigen
