//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Batch evaluation of synthesis methods against the targets recorded in a
// dataset manifest. Each method row reports how many results beat, matched,
// or lost to the per-item baseline plus how many episodes failed outright;
// failed episodes are excluded from the mean gate count but stay visible in
// their own column.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/dataset.hpp"
#include "aigen/transformer.hpp"

#include <iomanip>
#include <memory>
#include <sstream>

namespace aigen {

struct EvalMethod {
  std::string name;
  SearchConfig search;  // search.S == 0 is plain greedy decoding
};

struct EvalRow {
  std::string method;
  uint32_t better = 0;
  uint32_t equal = 0;
  uint32_t worse = 0;
  uint32_t failures = 0;
  double mean_ands = 0.0;  // over completed episodes only

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  size_t set_size = 0;
  std::string baseline;
  uint64_t seed = 0;
  double baseline_mean_ands = 0.0;
  double original_mean_ands = 0.0;
  std::vector<EvalRow> rows;
};

/// Produces the decoding policy for one evaluation item.
using PolicyFactory = std::function<std::unique_ptr<Policy>(const Aig& original)>;

inline PolicyFactory uniform_policy_factory() {
  return [](const Aig&) { return std::make_unique<UniformPolicy>(); };
}

/// Next-gate model conditioned on each item's own trajectory. The parameter
/// store must outlive every policy the factory hands out.
inline PolicyFactory neural_policy_factory(const ModelConfig& cfg, ParamStore& params,
                                           uint32_t d_max = kDefaultMaxDepth) {
  return [&params, cfg, d_max](const Aig& original) {
    return std::make_unique<NeuralPolicy>(cfg, params, encode(original), d_max);
  };
}

inline EvalReport evaluate_methods(const DatasetManifest& manifest,
                                   const std::filesystem::path& dir, const PolicyFactory& factory,
                                   const std::vector<EvalMethod>& methods, const GenOptions& opts,
                                   uint64_t seed, uint32_t n_workers = default_workers()) {
  const size_t n = manifest.items.size();
  // result[m][i]: gate count of method m on item i, or nullopt on failure.
  std::vector<std::vector<std::optional<uint32_t>>> result(
      methods.size(), std::vector<std::optional<uint32_t>>(n));

  parallel_for(n, n_workers, [&](size_t i) {
    const Aig original = load_item_aig(dir, manifest.items[i].file);
    const EquivSpec spec = EquivSpec::from_aig(original);
    for (size_t m = 0; m < methods.size(); ++m) {
      const std::unique_ptr<Policy> policy = factory(original);
      SearchConfig cfg = methods[m].search;
      cfg.seed = seed + 1000003 * m + manifest.items[i].id;
      const GenResult r = synthesize_mcts(*policy, spec, cfg, opts);
      if (r.status == GenStatus::ok) result[m][i] = r.aig->count_ands();
    }
  });

  EvalReport report;
  report.set_size = n;
  report.baseline = "dataset-targets";
  report.seed = seed;
  for (const DatasetItem& it : manifest.items) {
    report.baseline_mean_ands += it.ands_target;
    report.original_mean_ands += it.ands_original;
  }
  if (n) {
    report.baseline_mean_ands /= double(n);
    report.original_mean_ands /= double(n);
  }
  for (size_t m = 0; m < methods.size(); ++m) {
    EvalRow row;
    row.method = methods[m].name;
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!result[m][i]) {
        ++row.failures;
        continue;
      }
      const uint32_t got = *result[m][i];
      const uint32_t ref = manifest.items[i].ands_target;
      total += got;
      if (got < ref)
        ++row.better;
      else if (got == ref)
        ++row.equal;
      else
        ++row.worse;
    }
    const uint32_t completed = row.better + row.equal + row.worse;
    row.mean_ands = completed ? total / double(completed) : 0.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& row : r.rows)
    rows.push_back({{"method", row.method},
                    {"better", row.better},
                    {"equal", row.equal},
                    {"worse", row.worse},
                    {"failures", row.failures},
                    {"mean_ands", row.mean_ands}});
  return {{"set_size", r.set_size},
          {"baseline", r.baseline},
          {"seed", r.seed},
          {"baseline_mean_ands", r.baseline_mean_ands},
          {"original_mean_ands", r.original_mean_ands},
          {"rows", rows}};
}

inline void write_report(const EvalReport& r, const std::filesystem::path& path) {
  detail::write_text_file(path, report_to_json(r).dump(2) + "\n");
}

/// Fixed-width text rendering for terminal output.
inline std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  out << "baseline: " << r.baseline << " (mean #AND " << std::fixed << std::setprecision(3)
      << r.baseline_mean_ands << ", originals " << r.original_mean_ands << ", n=" << r.set_size
      << ")\n";
  out << std::left << std::setw(24) << "method" << std::right << std::setw(8) << "better"
      << std::setw(8) << "equal" << std::setw(8) << "worse" << std::setw(10) << "failures"
      << std::setw(12) << "mean #AND" << "\n";
  for (const EvalRow& row : r.rows) {
    out << std::left << std::setw(24) << row.method << std::right << std::setw(8) << row.better
        << std::setw(8) << row.equal << std::setw(8) << row.worse << std::setw(10) << row.failures
        << std::setw(12) << std::fixed << std::setprecision(3) << row.mean_ands << "\n";
  }
  return out.str();
}

}  // namespace aigen
