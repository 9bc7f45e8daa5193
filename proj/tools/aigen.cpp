//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Command-line driver. Subcommands:
//
//   gen-dataset   write a deduplicated .aag corpus + JSONL manifest with
//                 supervision targets (internal MCTS or an external tool)
//   train         fit the truth-table classifier or the next-gate policy,
//                 checkpointing parameters and optimizer state
//   synth         resynthesize one circuit under the equivalence mask
//   eval          score methods against a manifest's targets, Table-style
//   verify        brute-force equivalence check of two .aag files
//   encode        debug dump of a circuit's trajectory and poscodes
//
// Exit codes: 0 success, 2 verification failure, 3 length/dead-end,
// 4 IO or configuration error.
//
//===----------------------------------------------------------------------===//

#include "aigen/checkpoint.hpp"
#include "aigen/dataset.hpp"
#include "aigen/eval.hpp"
#include "aigen/external_tool.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 2;
constexpr int kExitLength = 3;
constexpr int kExitConfig = 4;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("short write to " + path.string());
}

aigen::Aig load_aag(const std::filesystem::path& path) {
  return aigen::parse_aag(read_file(path));
}

size_t param_count(const aigen::ParamStore& params) {
  size_t n = 0;
  for (const auto& [name, t] : params.values()) n += t.rows * t.cols;
  return n;
}

/// Stack depth the checkpoint was trained with, recovered from the poscode
/// width (2 * d_max + n_outputs).
uint32_t d_max_from_config(const aigen::ModelConfig& cfg, uint32_t n_outputs) {
  if (cfg.poscode_width < n_outputs || (cfg.poscode_width - n_outputs) % 2 != 0)
    throw std::runtime_error("checkpoint poscode width " + std::to_string(cfg.poscode_width) +
                             " does not fit " + std::to_string(n_outputs) + " output(s)");
  return (cfg.poscode_width - n_outputs) / 2;
}

/// "greedy" or "mcts:S:R", comma-separated.
std::vector<aigen::EvalMethod> parse_methods(const std::string& csv) {
  std::vector<aigen::EvalMethod> methods;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    aigen::EvalMethod m;
    m.name = tok;
    if (tok == "greedy") {
      m.search.S = 0;
      m.search.R = 1;
    } else if (tok.rfind("mcts:", 0) == 0) {
      unsigned s = 0, r = 0;
      char trail = 0;
      if (std::sscanf(tok.c_str(), "mcts:%u:%u%c", &s, &r, &trail) != 2 || r == 0)
        throw std::runtime_error("bad method '" + tok + "' (expected mcts:S:R with R >= 1)");
      m.search.S = s;
      m.search.R = r;
    } else {
      throw std::runtime_error("unknown method '" + tok + "' (expected greedy or mcts:S:R)");
    }
    methods.push_back(std::move(m));
  }
  if (methods.empty()) throw std::runtime_error("method list is empty");
  return methods;
}

std::string format_row_assignment(uint32_t n_inputs, uint64_t row) {
  std::string s;
  for (uint32_t v = 1; v <= n_inputs; ++v) {
    if (v > 1) s += ' ';
    s += 'x' + std::to_string(v) + '=';
    s += char('0' + ((row >> (v - 1)) & 1));
  }
  return s;
}

// --- gen-dataset -----------------------------------------------------------

struct GenDatasetArgs {
  std::string out_dir;
  aigen::DatasetOptions opts;
  std::string tool_cmd;
  double tool_timeout = 60.0;
  uint32_t search_s = 0;  // 0 = search every decision
  uint32_t search_r = 5;
  uint32_t target_max_len = 100;
  uint32_t workers = aigen::default_workers();
};

int cmd_gen_dataset(const GenDatasetArgs& a) {
  std::function<aigen::Aig(const aigen::Aig&)> target_fn;
  if (a.opts.supervision == "internal-mcts") {
    aigen::SearchConfig cfg;
    // A flat policy decoded greedily rarely terminates, so unsearched tail
    // decisions are useless here; by default every decision gets rollouts.
    cfg.S = a.search_s == 0 ? a.target_max_len : a.search_s;
    cfg.R = a.search_r;
    cfg.seed = a.opts.seed;
    target_fn = aigen::internal_mcts_target(cfg, a.target_max_len);
  } else if (a.opts.supervision == "external-tool") {
    if (a.tool_cmd.empty())
      throw std::runtime_error("supervision external-tool requires --tool-cmd");
    target_fn = aigen::external_tool_target({a.tool_cmd, a.tool_timeout});
  } else {
    throw std::runtime_error("unknown supervision '" + a.opts.supervision +
                             "' (expected internal-mcts or external-tool)");
  }
  const aigen::DatasetManifest m = aigen::generate_dataset(a.opts, a.out_dir, target_fn, a.workers);
  double orig = 0, tgt = 0;
  for (const auto& it : m.items) {
    orig += it.ands_original;
    tgt += it.ands_target;
  }
  const double n = m.items.empty() ? 1.0 : double(m.items.size());
  std::cout << "wrote " << m.items.size() << " items to " << a.out_dir << " (" << m.n_inputs
            << " inputs, " << m.n_outputs << " outputs, supervision " << m.supervision << ")\n"
            << "mean #(AND): original " << orig / n << ", target " << tgt / n << "\n";
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string task;  // "tt" | "policy"
  std::string data_dir;
  std::string out_ckpt;
  std::string resume_ckpt;
  std::string eval_dir;
  std::string loss_csv;
  uint32_t layers = 2;
  uint32_t width = 32;
  uint32_t ffn = 128;
  uint32_t heads = 4;
  uint32_t max_len = 0;  // 0 = derive from the data
  uint32_t d_max = aigen::kDefaultMaxDepth;
  aigen::TrainHyper hyper;
};

int cmd_train(const TrainArgs& a) {
  namespace fs = std::filesystem;
  const aigen::DatasetManifest m = aigen::read_manifest(fs::path(a.data_dir) / "manifest.jsonl");

  aigen::ModelConfig cfg;
  aigen::ParamStore params;
  aigen::AdamState opt;
  aigen::TrainHyper hp = a.hyper;
  hp.checkpoint_path = a.out_ckpt;

  uint32_t d_max = a.d_max;
  if (!a.resume_ckpt.empty()) {
    aigen::Checkpoint ck = aigen::load_checkpoint(a.resume_ckpt);
    cfg = ck.config;
    params = std::move(ck.params);
    opt.m = std::move(ck.adam_m);
    opt.v = std::move(ck.adam_v);
    opt.t = ck.step;
    hp.start_step = ck.step;
    hp.rng_state = std::move(ck.rng_state);
    d_max = d_max_from_config(cfg, m.n_outputs);
    std::cout << "resuming from " << a.resume_ckpt << " at step " << ck.step
              << " (model shape taken from the checkpoint)\n";
  } else {
    cfg.n_layers = a.layers;
    cfg.embed_width = a.width;
    cfg.ffn_width = a.ffn;
    cfg.n_heads = a.heads;
    cfg.vocab_size = 2 * m.n_inputs + 4;
    cfg.poscode_width = 2 * d_max + m.n_outputs;
    cfg.max_len = a.max_len;  // possibly 0; fixed up per task below
  }
  if (cfg.vocab_size != 2 * m.n_inputs + 4)
    throw std::runtime_error("checkpoint was trained for " +
                             std::to_string(cfg.n_inputs_from_vocab()) + " inputs but dataset has " +
                             std::to_string(m.n_inputs));

  aigen::TrainResult res;
  if (a.task == "tt") {
    cfg.arch = aigen::Arch::encoder_only;
    if (cfg.max_len == 0) cfg.max_len = m.max_traj_len;
    const auto data = aigen::load_classifier_samples(a.data_dir, m, cfg.max_len, d_max);
    if (a.resume_ckpt.empty()) aigen::init_params(cfg, params, hp.seed);
    std::cout << "task tt: " << data.size() << " samples, " << param_count(params)
              << " parameters\n";
    res = aigen::train_tt_classifier(cfg, params, data, hp, &opt, &std::cout);
    const auto ev = aigen::eval_tt_classifier(cfg, params, data);
    std::cout << "train per-bit accuracy " << ev.per_bit_accuracy << ", exact-table "
              << ev.exact_table_accuracy << "\n";
    if (!a.eval_dir.empty()) {
      const auto em = aigen::read_manifest(fs::path(a.eval_dir) / "manifest.jsonl");
      const auto ed = aigen::load_classifier_samples(a.eval_dir, em, cfg.max_len, d_max);
      const auto hev = aigen::eval_tt_classifier(cfg, params, ed);
      std::cout << "eval per-bit accuracy " << hev.per_bit_accuracy << ", exact-table "
                << hev.exact_table_accuracy << "\n";
    }
  } else if (a.task == "policy") {
    cfg.arch = aigen::Arch::encoder_decoder;
    auto data = aigen::load_policy_samples(a.data_dir, m, d_max);
    uint32_t needed = 1;
    for (const auto& s : data) {
      needed = std::max(needed, uint32_t(s.ctx.length()));
      if (s.dec_in.length() > 0) needed = std::max(needed, uint32_t(s.dec_in.length() - 1));
    }
    if (cfg.max_len == 0) cfg.max_len = needed;
    if (cfg.max_len < needed)
      throw std::runtime_error("--max-len " + std::to_string(cfg.max_len) +
                               " is shorter than the longest trajectory (" +
                               std::to_string(needed) + ")");
    if (a.resume_ckpt.empty()) aigen::init_params(cfg, params, hp.seed);
    std::cout << "task policy: " << data.size() << " samples, " << param_count(params)
              << " parameters\n";
    res = aigen::train_policy(cfg, params, data, hp, &opt, &std::cout);
    std::cout << "train token accuracy " << aigen::policy_token_accuracy(cfg, params, data)
              << "\n";
    if (!a.eval_dir.empty()) {
      const auto em = aigen::read_manifest(fs::path(a.eval_dir) / "manifest.jsonl");
      const auto ed = aigen::load_policy_samples(a.eval_dir, em, d_max);
      std::cout << "eval token accuracy " << aigen::policy_token_accuracy(cfg, params, ed)
                << "\n";
    }
  } else {
    throw std::runtime_error("unknown task '" + a.task + "' (expected tt or policy)");
  }

  if (!a.loss_csv.empty()) aigen::write_loss_csv(a.loss_csv, res.losses, hp.start_step);
  std::cout << "final step " << hp.start_step + hp.steps << ", loss "
            << (res.losses.empty() ? 0.0 : res.losses.back()) << ", checkpoint " << a.out_ckpt
            << "\n";
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string input;
  std::string output;
  std::string checkpoint;
  bool uniform = false;
  std::string mode = "greedy";  // "greedy" | "mcts"
  uint32_t search_s = 1;
  uint32_t search_r = 5;
  uint32_t max_len = 100;
  uint64_t seed = 0;
  uint32_t d_max = aigen::kDefaultMaxDepth;
  bool length_mask = false;
};

int cmd_synth(const SynthArgs& a) {
  const aigen::Aig original = load_aag(a.input);
  const aigen::EquivSpec spec = aigen::EquivSpec::from_aig(original);

  aigen::GenOptions opts;
  opts.max_len = a.max_len;
  opts.seed = a.seed;
  opts.length_mask = a.length_mask;
  opts.d_max = a.d_max;

  std::optional<aigen::Checkpoint> ck;
  std::unique_ptr<aigen::Policy> policy;
  if (a.uniform) {
    policy = std::make_unique<aigen::UniformPolicy>();
  } else {
    ck = aigen::load_checkpoint(a.checkpoint);
    opts.d_max = d_max_from_config(ck->config, original.n_outputs());
    if (ck->config.vocab_size != 2 * original.n_inputs() + 4)
      throw std::runtime_error("checkpoint was trained for " +
                               std::to_string(ck->config.n_inputs_from_vocab()) +
                               " inputs but " + a.input + " has " +
                               std::to_string(original.n_inputs()));
    if (a.max_len > ck->config.max_len)
      throw std::runtime_error("--max-len " + std::to_string(a.max_len) +
                               " exceeds the checkpoint's sequence budget (" +
                               std::to_string(ck->config.max_len) + ")");
    policy = std::make_unique<aigen::NeuralPolicy>(ck->config, ck->params,
                                                   aigen::encode(original), opts.d_max);
  }

  aigen::SearchConfig cfg;
  cfg.S = a.mode == "mcts" ? a.search_s : 0;
  cfg.R = a.search_r;
  cfg.seed = a.seed;
  if (a.mode != "greedy" && a.mode != "mcts")
    throw std::runtime_error("unknown mode '" + a.mode + "' (expected greedy or mcts)");

  aigen::GenResult r;
  try {
    r = aigen::synthesize_mcts(*policy, spec, cfg, opts);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::logic_error& e) {
    // The decoder's own post-verification tripped; nothing was written.
    std::cerr << "synth: " << e.what() << "\n";
    return kExitVerify;
  }
  if (r.status == aigen::GenStatus::length_exceeded) {
    std::cerr << "synth: length budget " << a.max_len << " exceeded after "
              << r.traj.size() << " tokens; no output written\n";
    return kExitLength;
  }
  if (r.status == aigen::GenStatus::dead_end) {
    std::cerr << "synth: dead end after " << r.traj.size() << " tokens; no output written\n";
    return kExitLength;
  }

  // Defense in depth: re-verify against the input before anything hits disk.
  const auto diff = aigen::first_table_diff(spec.tables, r.aig->eval_truth_tables());
  if (diff) {
    std::cerr << "synth: result differs from input at output " << diff->first << ", row "
              << diff->second << "; no output written\n";
    return kExitVerify;
  }
  write_file(a.output, aigen::write_aag(*r.aig));
  std::cout << "#(AND): " << original.count_ands() << " -> " << r.aig->count_ands()
            << " (verified equivalent on all " << spec.tables.size() << " output(s), 2^"
            << original.n_inputs() << " rows each)\n";
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string data_dir;
  std::string checkpoint;
  bool uniform = false;
  std::string methods = "greedy,mcts:1:5,mcts:1:20";
  std::string train_manifest;
  std::string out_report;
  uint32_t max_len = 100;
  uint64_t seed = 0;
  uint32_t workers = aigen::default_workers();
};

int cmd_eval(const EvalArgs& a) {
  namespace fs = std::filesystem;
  const aigen::DatasetManifest m = aigen::read_manifest(fs::path(a.data_dir) / "manifest.jsonl");
  if (!a.train_manifest.empty())
    aigen::assert_disjoint(aigen::read_manifest(a.train_manifest), m);

  const std::vector<aigen::EvalMethod> methods = parse_methods(a.methods);

  aigen::GenOptions opts;
  opts.max_len = a.max_len;

  std::optional<aigen::Checkpoint> ck;
  aigen::PolicyFactory factory;
  if (a.uniform) {
    factory = aigen::uniform_policy_factory();
  } else {
    ck = aigen::load_checkpoint(a.checkpoint);
    const uint32_t d_max = d_max_from_config(ck->config, m.n_outputs);
    if (ck->config.vocab_size != 2 * m.n_inputs + 4)
      throw std::runtime_error("checkpoint was trained for " +
                               std::to_string(ck->config.n_inputs_from_vocab()) +
                               " inputs but dataset has " + std::to_string(m.n_inputs));
    if (a.max_len > ck->config.max_len)
      throw std::runtime_error("--max-len " + std::to_string(a.max_len) +
                               " exceeds the checkpoint's sequence budget (" +
                               std::to_string(ck->config.max_len) + ")");
    opts.d_max = d_max;
    factory = aigen::neural_policy_factory(ck->config, ck->params, d_max);
  }

  aigen::EvalReport report = aigen::evaluate_methods(m, a.data_dir, factory, methods, opts,
                                                     a.seed, a.workers);
  report.baseline = "dataset targets (" + m.supervision + ")";
  std::cout << aigen::format_report(report);
  if (!a.out_report.empty()) aigen::write_report(report, a.out_report);
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

int cmd_verify(const std::string& path_a, const std::string& path_b) {
  const aigen::Aig a = load_aag(path_a);
  const aigen::Aig b = load_aag(path_b);
  if (a.n_inputs() != b.n_inputs() || a.n_outputs() != b.n_outputs())
    throw std::runtime_error("signature mismatch: " + path_a + " has " +
                             std::to_string(a.n_inputs()) + " inputs / " +
                             std::to_string(a.n_outputs()) + " outputs, " + path_b + " has " +
                             std::to_string(b.n_inputs()) + " / " +
                             std::to_string(b.n_outputs()));
  const auto diff = aigen::first_table_diff(a.eval_truth_tables(), b.eval_truth_tables());
  if (diff) {
    std::cout << "not equivalent: differs at (output " << diff->first << ", row " << diff->second
              << ") [" << format_row_assignment(a.n_inputs(), diff->second) << "]\n";
    return kExitVerify;
  }
  std::cout << "equivalent: " << a.n_outputs() << " output(s), 2^" << a.n_inputs()
            << " rows each\n";
  return kExitOk;
}

// --- encode ----------------------------------------------------------------

int cmd_encode(const std::string& input, uint32_t d_max) {
  const aigen::Aig g = load_aag(input);
  const aigen::Trajectory t = aigen::encode(g);
  const aigen::Vocab vocab{t.n_inputs};
  std::cout << "inputs " << t.n_inputs << ", outputs " << t.n_outputs << ", #(AND) "
            << g.count_ands() << ", tokens " << t.items.size() << ", vocab " << vocab.size()
            << ", poscode width " << 2 * d_max + t.n_outputs << "\n";
  std::cout << std::left << std::setw(6) << "idx" << std::setw(5) << "id" << std::setw(7)
            << "token" << std::setw(4) << "po" << std::setw(7) << "depth" << "poscode\n";
  for (size_t i = 0; i < t.items.size(); ++i) {
    const auto& item = t.items[i];
    const auto bits = item.pos.to_bits(d_max, t.n_outputs);
    std::string s;
    for (uint8_t b : bits) s += char('0' + b);
    std::cout << std::left << std::setw(6) << i << std::setw(5) << item.token << std::setw(7)
              << vocab.name(item.token) << std::setw(4) << item.pos.po_index << std::setw(7)
              << item.pos.path.size() << s << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aigen: equivalence-preserving AIG synthesis"};
  app.require_subcommand(1);

  GenDatasetArgs gd;
  CLI::App* gen = app.add_subcommand("gen-dataset", "Generate a supervised circuit corpus");
  gen->add_option("--out", gd.out_dir, "Output directory")->required();
  gen->add_option("--count", gd.opts.count, "Circuits to generate");
  gen->add_option("--inputs", gd.opts.n_inputs, "Primary inputs per circuit");
  gen->add_option("--outputs", gd.opts.n_outputs, "Primary outputs per circuit");
  gen->add_option("--max-traj-len", gd.opts.max_traj_len, "Trajectory length cap for originals");
  gen->add_option("--seed", gd.opts.seed, "Generator seed");
  gen->add_option("--supervision", gd.opts.supervision, "internal-mcts or external-tool");
  gen->add_option("--tool-cmd", gd.tool_cmd, "External command template with {in}/{out}");
  gen->add_option("--tool-timeout", gd.tool_timeout, "External tool timeout in seconds");
  gen->add_option("--search-s", gd.search_s,
                  "Searched decisions for internal targets (0 = all)");
  gen->add_option("--search-r", gd.search_r, "Rollouts per searched decision");
  gen->add_option("--target-max-len", gd.target_max_len, "Length budget for targets");
  gen->add_option("--workers", gd.workers, "Worker threads (default: AIGEN_WORKERS)");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Train a model on a generated dataset");
  train->add_option("--task", tr.task, "tt (classifier) or policy (next gate)")->required();
  train->add_option("--data", tr.data_dir, "Dataset directory with manifest.jsonl")->required();
  train->add_option("--out", tr.out_ckpt, "Checkpoint to write")->required();
  train->add_option("--resume", tr.resume_ckpt, "Checkpoint to continue from");
  train->add_option("--eval-data", tr.eval_dir, "Held-out dataset to score after training");
  train->add_option("--loss-csv", tr.loss_csv, "Write per-step losses to this CSV");
  train->add_option("--layers", tr.layers, "Layers per stack");
  train->add_option("--width", tr.width, "Embedding width");
  train->add_option("--ffn", tr.ffn, "Feed-forward width");
  train->add_option("--heads", tr.heads, "Attention heads");
  train->add_option("--max-len", tr.max_len, "Model sequence budget (0 = derive from data)");
  train->add_option("--d-max", tr.d_max, "Positional-code stack depth");
  train->add_option("--batch", tr.hyper.batch, "Batch size");
  train->add_option("--lr", tr.hyper.lr, "Adam learning rate");
  train->add_option("--steps", tr.hyper.steps, "Optimizer steps to run");
  train->add_option("--seed", tr.hyper.seed, "Init/shuffle seed");
  train->add_option("--log-every", tr.hyper.log_every, "Print loss every K steps (0 = silent)");
  train->add_option("--checkpoint-every", tr.hyper.checkpoint_every,
                    "Also checkpoint every K steps");

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "Resynthesize one circuit");
  synth->add_option("--input", sy.input, "Input .aag")->required();
  synth->add_option("--out", sy.output, "Output .aag")->required();
  CLI::Option* sy_ck = synth->add_option("--checkpoint", sy.checkpoint, "Policy checkpoint");
  synth->add_flag("--uniform", sy.uniform, "Use the uniform policy instead of a checkpoint")
      ->excludes(sy_ck);
  synth->add_option("--mode", sy.mode, "greedy or mcts");
  synth->add_option("--search-s", sy.search_s, "Searched decisions (mcts mode)");
  synth->add_option("--search-r", sy.search_r, "Rollouts per searched decision")
      ->check(CLI::PositiveNumber);
  synth->add_option("--max-len", sy.max_len, "Token budget");
  synth->add_option("--seed", sy.seed, "Search/sampling seed");
  synth->add_option("--d-max", sy.d_max, "Poscode stack depth (uniform policy only)");
  synth->add_flag("--length-mask", sy.length_mask, "Mask tokens that cannot finish in budget");

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "Score methods against a dataset's targets");
  eval->add_option("--data", ev.data_dir, "Eval dataset directory")->required();
  CLI::Option* ev_ck = eval->add_option("--checkpoint", ev.checkpoint, "Policy checkpoint");
  eval->add_flag("--uniform", ev.uniform, "Use the uniform policy instead of a checkpoint")
      ->excludes(ev_ck);
  eval->add_option("--methods", ev.methods, "Comma list: greedy, mcts:S:R");
  eval->add_option("--train-manifest", ev.train_manifest,
                   "Training manifest; eval set must be digest-disjoint from it");
  eval->add_option("--out", ev.out_report, "Write the report as JSON");
  eval->add_option("--max-len", ev.max_len, "Token budget per episode");
  eval->add_option("--seed", ev.seed, "Base seed");
  eval->add_option("--workers", ev.workers, "Worker threads (default: AIGEN_WORKERS)");

  std::string va, vb;
  CLI::App* verify = app.add_subcommand("verify", "Check two .aag files for equivalence");
  verify->add_option("a", va, "First .aag")->required();
  verify->add_option("b", vb, "Second .aag")->required();

  std::string enc_input;
  uint32_t enc_d_max = aigen::kDefaultMaxDepth;
  CLI::App* enc = app.add_subcommand("encode", "Print a circuit's trajectory and poscodes");
  enc->add_option("--input", enc_input, "Input .aag")->required();
  enc->add_option("--d-max", enc_d_max, "Poscode stack depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_dataset(gd);
    if (train->parsed()) return cmd_train(tr);
    if (synth->parsed()) {
      if (!sy.uniform && sy.checkpoint.empty())
        throw std::runtime_error("synth needs --checkpoint or --uniform");
      return cmd_synth(sy);
    }
    if (eval->parsed()) {
      if (!ev.uniform && ev.checkpoint.empty())
        throw std::runtime_error("eval needs --checkpoint or --uniform");
      return cmd_eval(ev);
    }
    if (verify->parsed()) return cmd_verify(va, vb);
    if (enc->parsed()) return cmd_encode(enc_input, enc_d_max);
  } catch (const std::exception& e) {
    std::cerr << "aigen: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;  // unreachable: require_subcommand(1)
}
