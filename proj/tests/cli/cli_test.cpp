//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Black-box tests of the command-line binary: every subcommand is driven as a
// subprocess and judged on its exit code, its printed output, and the files
// it leaves behind. The documented exit-code contract (0 ok, 2 verification
// failure, 3 length/dead-end, 4 IO/config) is pinned here.
//
//===----------------------------------------------------------------------===//

#include "aigen/aiger_io.hpp"
#include "aigen/checkpoint.hpp"
#include "aigen/dataset.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace aigen;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs the installed binary with `args`, capturing combined output.
RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + AIGEN_CLI_PATH " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("aigen-cli-" + std::to_string(Catch::rngSeed()) + "-" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  REQUIRE(f.good());
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// o1 = x1 & x2
const char* kAnd2 = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n";
// o1 = x1 | x2
const char* kOr2 = "aag 3 2 0 1 1\n2\n4\n7\n6 3 5\n";
// o1 = x1 ^ x2, three gates
const char* kXor2 = "aag 5 2 0 1 3\n2\n4\n11\n6 2 5\n8 3 4\n10 7 9\n";
// o1 = (x1 & x2) & (x1 & x2), a duplicated cone totalling three gates
const char* kDup3 = "aag 5 2 0 1 3\n2\n4\n10\n6 2 4\n8 2 4\n10 6 8\n";

}  // namespace

TEST_CASE("verify: equivalence, first differing row, signature errors", "[cli]") {
  TempDir td;
  write_file(td / "and.aag", kAnd2);
  write_file(td / "or.aag", kOr2);
  write_file(td / "xor.aag", kXor2);

  // x1&x2 against itself and against x1^x2's structural cousins.
  auto same = run_cli("verify " + (td / "and.aag") + " " + (td / "and.aag"));
  CHECK(same.exit_code == 0);
  CHECK(contains(same.output, "equivalent"));

  // AND vs OR first differ on the row x1=1, x2=0 (row index 1).
  auto diff = run_cli("verify " + (td / "and.aag") + " " + (td / "or.aag"));
  CHECK(diff.exit_code == 2);
  CHECK(contains(diff.output, "(output 0, row 1)"));
  CHECK(contains(diff.output, "x1=1 x2=0"));

  write_file(td / "buf.aag", "aag 1 1 0 1 0\n2\n2\n");
  auto sig = run_cli("verify " + (td / "and.aag") + " " + (td / "buf.aag"));
  CHECK(sig.exit_code == 4);
  CHECK(contains(sig.output, "signature mismatch"));

  CHECK(run_cli("verify " + (td / "and.aag") + " /no/such/file.aag").exit_code == 4);
}

TEST_CASE("encode: trajectory dump with poscodes", "[cli]") {
  TempDir td;
  write_file(td / "and.aag", kAnd2);
  auto r = run_cli("encode --input " + (td / "and.aag") + " --d-max 2");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.output, "inputs 2, outputs 1, #(AND) 1, tokens 4"));
  // Root AND sits at the empty path: all-zero pairs plus the PO-0 one-hot.
  CHECK(contains(r.output, "and    0   0      00001"));
  // x1 fills slot 1 (bits "10"), x2 slot 2 (bits "01").
  CHECK(contains(r.output, "x1     0   1      10001"));
  CHECK(contains(r.output, "x2     0   1      01001"));
  CHECK(contains(r.output, "EOS"));

  CHECK(run_cli("encode --input /no/such/file.aag").exit_code == 4);
}

TEST_CASE("synth: optimizes, verifies, and reports budget failures", "[cli]") {
  TempDir td;
  write_file(td / "dup.aag", kDup3);
  write_file(td / "xor.aag", kXor2);

  SECTION("mcts removes the duplicated cone") {
    auto r = run_cli("synth --input " + (td / "dup.aag") + " --out " + (td / "out.aag") +
                     " --uniform --mode mcts --search-s 30 --search-r 40 --max-len 30 --seed 1");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.output, "#(AND): 3 -> 1"));
    CHECK(contains(r.output, "verified equivalent"));
    const Aig out = parse_aag(read_file(td / "out.aag"));
    CHECK(out.count_ands() == 1);
    CHECK(out.eval_truth_tables() == parse_aag(kDup3).eval_truth_tables());

    // Same seed, same bytes.
    auto again = run_cli("synth --input " + (td / "dup.aag") + " --out " + (td / "out2.aag") +
                         " --uniform --mode mcts --search-s 30 --search-r 40 --max-len 30 --seed 1");
    REQUIRE(again.exit_code == 0);
    CHECK(read_file(td / "out.aag") == read_file(td / "out2.aag"));
  }

  SECTION("pathological budget exits 3 and writes nothing") {
    // Greedy from a flat policy keeps opening gates; XOR needs lookahead.
    auto r = run_cli("synth --input " + (td / "xor.aag") + " --out " + (td / "none.aag") +
                     " --uniform --mode greedy --max-len 100");
    CHECK(r.exit_code == 3);
    CHECK(contains(r.output, "no output written"));
    CHECK(!fs::exists(td / "none.aag"));

    // With budget masking the same episode dies at the first unfillable step.
    auto masked = run_cli("synth --input " + (td / "xor.aag") + " --out " + (td / "none.aag") +
                          " --uniform --mode greedy --max-len 4 --length-mask");
    CHECK(masked.exit_code == 3);
    CHECK(!fs::exists(td / "none.aag"));
  }

  SECTION("config errors exit 4") {
    CHECK(run_cli("synth --input " + (td / "dup.aag") + " --out " + (td / "o.aag")).exit_code == 4);
    CHECK(run_cli("synth --input /no/such.aag --out " + (td / "o.aag") + " --uniform").exit_code ==
          4);
    CHECK(run_cli("synth --input " + (td / "dup.aag") + " --out " + (td / "o.aag") +
                  " --checkpoint /no/such.ckpt")
              .exit_code == 4);
  }
}

TEST_CASE("gen-dataset: deterministic corpus with verified targets", "[cli]") {
  TempDir td;
  const std::string common = " --count 10 --inputs 3 --outputs 1 --max-traj-len 60 --seed 9"
                             " --search-r 5 --target-max-len 60";

  auto r1 = run_cli("gen-dataset --out " + (td / "a") + common + " --workers 1");
  REQUIRE(r1.exit_code == 0);
  CHECK(contains(r1.output, "wrote 10 items"));

  // Reruns and worker counts do not change a byte of the manifest.
  auto r2 = run_cli("gen-dataset --out " + (td / "b") + common + " --workers 1");
  REQUIRE(r2.exit_code == 0);
  auto r3 = run_cli("gen-dataset --out " + (td / "c") + common, "AIGEN_WORKERS=3");
  REQUIRE(r3.exit_code == 0);
  CHECK(read_file(td / "a/manifest.jsonl") == read_file(td / "b/manifest.jsonl"));
  CHECK(read_file(td / "a/manifest.jsonl") == read_file(td / "c/manifest.jsonl"));

  // Every target is equivalent to its source and no larger.
  const DatasetManifest m = read_manifest(fs::path(td / "a") / "manifest.jsonl");
  REQUIRE(m.items.size() == 10);
  for (const auto& it : m.items) {
    const Aig orig = load_item_aig(td.path / "a", it.file);
    const Aig tgt = load_item_aig(td.path / "a", target_filename(it.file));
    CHECK(orig.eval_truth_tables() == tgt.eval_truth_tables());
    CHECK(tgt.count_ands() <= orig.count_ands());
    CHECK(tgt.count_ands() == it.ands_target);
  }

  // Full-coverage search on 3-input circuits finds real reductions.
  double orig_mean = 0, tgt_mean = 0;
  for (const auto& it : m.items) {
    orig_mean += it.ands_original;
    tgt_mean += it.ands_target;
  }
  CHECK(tgt_mean < orig_mean);

  SECTION("external no-op tool keeps originals; broken tool skips items") {
    auto ok = run_cli("gen-dataset --out " + (td / "ext") + common +
                      " --supervision external-tool --tool-cmd 'cp {in} {out}' --workers 1");
    REQUIRE(ok.exit_code == 0);
    const DatasetManifest em = read_manifest(fs::path(td / "ext") / "manifest.jsonl");
    REQUIRE(em.items.size() == 10);
    for (const auto& it : em.items) CHECK(it.ands_target == it.ands_original);

    auto broken = run_cli("gen-dataset --out " + (td / "broken") + common +
                          " --supervision external-tool --tool-cmd 'false {in} {out}'"
                          " --workers 1");
    REQUIRE(broken.exit_code == 0);
    CHECK(contains(broken.output, "skipping item"));
    CHECK(read_manifest(fs::path(td / "broken") / "manifest.jsonl").items.empty());
  }

  SECTION("config errors exit 4") {
    CHECK(run_cli("gen-dataset --out " + (td / "x") + " --supervision bogus").exit_code == 4);
    CHECK(run_cli("gen-dataset --out " + (td / "x") + " --supervision external-tool").exit_code ==
          4);
    CHECK(run_cli("gen-dataset --count 5").exit_code == 4);  // --out is required
  }
}

TEST_CASE("train: loss curve, checkpoint, and step-continuing resume", "[cli]") {
  TempDir td;
  auto gen = run_cli("gen-dataset --out " + (td / "ds") +
                     " --count 10 --inputs 3 --outputs 1 --max-traj-len 60 --seed 9"
                     " --search-r 5 --target-max-len 60 --workers 1");
  REQUIRE(gen.exit_code == 0);

  const std::string model = " --layers 1 --width 16 --ffn 32 --heads 2 --d-max 8 --batch 4";

  SECTION("tt task trains and reports accuracy") {
    auto r = run_cli("train --task tt --data " + (td / "ds") + " --out " + (td / "tt.ckpt") +
                     model + " --steps 8 --seed 3 --log-every 4 --loss-csv " + (td / "loss.csv") +
                     " --eval-data " + (td / "ds"));
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.output, "task tt: 10 samples"));
    CHECK(contains(r.output, "step 4 loss"));
    CHECK(contains(r.output, "train per-bit accuracy"));
    CHECK(contains(r.output, "eval per-bit accuracy"));
    CHECK(contains(r.output, "final step 8"));

    const std::string csv = read_file(td / "loss.csv");
    CHECK(contains(csv, "step,loss"));
    CHECK(contains(csv, "\n1,"));
    CHECK(contains(csv, "\n8,"));

    const Checkpoint ck = load_checkpoint(td / "tt.ckpt");
    CHECK(ck.step == 8);
    CHECK(ck.config.arch == Arch::encoder_only);
  }

  SECTION("policy resume continues steps and matches one straight run") {
    const std::string pol = "train --task policy --data " + (td / "ds") + model +
                            " --max-len 60 --seed 5";
    auto first = run_cli(pol + " --steps 6 --out " + (td / "p6.ckpt"));
    REQUIRE(first.exit_code == 0);

    auto resumed = run_cli("train --task policy --data " + (td / "ds") + " --resume " +
                           (td / "p6.ckpt") + " --steps 6 --batch 4 --out " + (td / "p12r.ckpt") +
                           " --loss-csv " + (td / "r.csv"));
    REQUIRE(resumed.exit_code == 0);
    CHECK(contains(resumed.output, "resuming from"));
    CHECK(contains(resumed.output, "final step 12"));
    const std::string csv = read_file(td / "r.csv");
    CHECK(contains(csv, "\n7,"));   // resumed losses are numbered 7..12
    CHECK(contains(csv, "\n12,"));
    CHECK(!contains(csv, "\n1,"));

    auto straight = run_cli(pol + " --steps 12 --out " + (td / "p12.ckpt"));
    REQUIRE(straight.exit_code == 0);

    // Resumed and straight-through runs land on identical parameters.
    const Checkpoint a = load_checkpoint(td / "p12r.ckpt");
    const Checkpoint b = load_checkpoint(td / "p12.ckpt");
    REQUIRE(a.step == 12);
    REQUIRE(b.step == 12);
    CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
  }

  SECTION("bad inputs exit 4") {
    CHECK(run_cli("train --task tt --data /no/such/dir --out " + (td / "x.ckpt")).exit_code == 4);
    CHECK(run_cli("train --task bogus --data " + (td / "ds") + " --out " + (td / "x.ckpt"))
              .exit_code == 4);
  }
}

TEST_CASE("eval: report shape, disjointness gate, JSON output", "[cli]") {
  TempDir td;
  auto gen = run_cli("gen-dataset --out " + (td / "ds") +
                     " --count 10 --inputs 3 --outputs 1 --max-traj-len 60 --seed 9"
                     " --search-r 5 --target-max-len 60 --workers 1");
  REQUIRE(gen.exit_code == 0);

  auto r = run_cli("eval --data " + (td / "ds") + " --uniform"
                   " --methods mcts:60:2,mcts:60:8 --max-len 60 --seed 11 --workers 1 --out " +
                   (td / "report.json"));
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.output, "baseline: dataset targets (internal-mcts)"));
  CHECK(contains(r.output, "mcts:60:2"));
  CHECK(contains(r.output, "mcts:60:8"));

  const auto j = nlohmann::json::parse(read_file(td / "report.json"));
  CHECK(j["set_size"] == 10);
  REQUIRE(j["rows"].size() == 2);
  for (const auto& row : j["rows"]) {
    const uint32_t total = row["better"].get<uint32_t>() + row["equal"].get<uint32_t>() +
                           row["worse"].get<uint32_t>() + row["failures"].get<uint32_t>();
    CHECK(total == 10);
  }

  SECTION("worker count does not change the report") {
    auto w3 = run_cli("eval --data " + (td / "ds") + " --uniform"
                      " --methods mcts:60:2,mcts:60:8 --max-len 60 --seed 11 --out " +
                      (td / "report3.json"),
                      "AIGEN_WORKERS=3");
    REQUIRE(w3.exit_code == 0);
    CHECK(read_file(td / "report.json") == read_file(td / "report3.json"));
  }

  SECTION("overlapping train manifest is rejected") {
    auto overlap = run_cli("eval --data " + (td / "ds") + " --uniform --train-manifest " +
                           (td / "ds/manifest.jsonl") + " --max-len 60");
    CHECK(overlap.exit_code == 4);
    CHECK(contains(overlap.output, "manifests overlap"));

    // A disjoint training set passes the gate.
    auto gen2 = run_cli("gen-dataset --out " + (td / "tr") +
                        " --count 6 --inputs 4 --outputs 1 --max-traj-len 60 --seed 4"
                        " --search-r 2 --target-max-len 60 --workers 1");
    REQUIRE(gen2.exit_code == 0);
    auto ok = run_cli("eval --data " + (td / "ds") + " --uniform --train-manifest " +
                      (td / "tr/manifest.jsonl") +
                      " --methods mcts:60:2 --max-len 60 --workers 1");
    CHECK(ok.exit_code == 0);
  }

  SECTION("bad method strings exit 4") {
    CHECK(run_cli("eval --data " + (td / "ds") + " --uniform --methods nonsense").exit_code == 4);
    CHECK(run_cli("eval --data " + (td / "ds") + " --uniform --methods mcts:1:0").exit_code == 4);
  }
}

TEST_CASE("trained policy flows end to end through synth and eval", "[cli]") {
  TempDir td;
  auto gen = run_cli("gen-dataset --out " + (td / "ds") +
                     " --count 8 --inputs 3 --outputs 1 --max-traj-len 60 --seed 21"
                     " --search-r 5 --target-max-len 60 --workers 1");
  REQUIRE(gen.exit_code == 0);

  auto tr = run_cli("train --task policy --data " + (td / "ds") + " --out " + (td / "p.ckpt") +
                    " --layers 1 --width 16 --ffn 32 --heads 2 --d-max 8 --max-len 60"
                    " --batch 4 --steps 8 --seed 5");
  REQUIRE(tr.exit_code == 0);

  // The checkpoint drives both single-circuit synthesis and batch eval; the
  // model is tiny and barely trained, so only plumbing is asserted, with
  // search doing the heavy lifting.
  const DatasetManifest m = read_manifest(fs::path(td / "ds") / "manifest.jsonl");
  auto sy = run_cli("synth --input " + (td.path / "ds" / m.items[0].file).string() + " --out " +
                    (td / "out.aag") + " --checkpoint " + (td / "p.ckpt") +
                    " --mode mcts --search-s 60 --search-r 8 --max-len 60 --seed 2");
  REQUIRE(sy.exit_code == 0);
  CHECK(contains(sy.output, "verified equivalent"));
  const Aig out = parse_aag(read_file(td / "out.aag"));
  const Aig orig = load_item_aig(td.path / "ds", m.items[0].file);
  CHECK(out.eval_truth_tables() == orig.eval_truth_tables());

  auto ev = run_cli("eval --data " + (td / "ds") + " --checkpoint " + (td / "p.ckpt") +
                    " --methods mcts:60:4 --max-len 60 --seed 3 --workers 1");
  REQUIRE(ev.exit_code == 0);
  CHECK(contains(ev.output, "mcts:60:4"));

  // Budget larger than the checkpoint's sequence limit is a config error.
  CHECK(run_cli("eval --data " + (td / "ds") + " --checkpoint " + (td / "p.ckpt") +
                " --methods mcts:60:4 --max-len 200")
            .exit_code == 4);
}

TEST_CASE("help and argument parsing honor the exit-code contract", "[cli]") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("synth --help").exit_code == 0);
  CHECK(run_cli("").exit_code == 4);           // a subcommand is required
  CHECK(run_cli("frobnicate").exit_code == 4); // unknown subcommand
  CHECK(run_cli("verify lonely.aag").exit_code == 4);
}
