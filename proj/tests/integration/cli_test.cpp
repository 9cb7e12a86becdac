// Copyright (c) 2026 The UTS Pipeline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "support.hpp"
#include "uts/manifest.hpp"

using testutil::TempDir;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

// Run the CLI binary, capturing stdout; stderr goes to the test log.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(UTS_CLI_PATH) + " " + args;
  std::array<char, 4096> buf{};
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    result.stdout_text.append(buf.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

const std::string kData = UTS_TEST_DATA_DIR;

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("full fixture pipeline runs green and writes valid manifests") {
  TempDir dir("cli_pipeline");
  auto f = [&](const std::string& name) { return dir.file(name); };

  RunResult r = run_cli("--seed 42 ingest --corpus " + kData + "/corpus_100.jsonl --out " +
                        f("records.jsonl") + " --report " + f("report.jsonl") +
                        " --summaries " + f("summaries.jsonl") + " 2>/dev/null");
  CHECK(r.exit_code == 0);

  r = run_cli("--seed 42 parse --records " + f("records.jsonl") + " --fixtures " + kData +
              "/fixtures_100.jsonl --out " + f("tags.jsonl") + " --failures " +
              f("failures.jsonl") + " 2>/dev/null");
  CHECK(r.exit_code == 0);

  r = run_cli("--seed 42 build-uts --tags " + f("tags.jsonl") + " --k 50 --out " +
              f("vocab.tsv") + " 2>/dev/null");
  CHECK(r.exit_code == 0);

  r = run_cli("--seed 42 label --tags " + f("tags.jsonl") + " --vocab " + f("vocab.tsv") +
              " --out " + f("labels.jsonl") + " --filtered " + f("filtered.jsonl") +
              " 2>/dev/null");
  CHECK(r.exit_code == 0);

  r = run_cli("--seed 42 stats --tags " + f("tags.jsonl") + " --freq " + f("freq.csv") +
              " --summary " + f("summary.json") + " --loglog " + f("loglog.csv") +
              " 2>/dev/null");
  CHECK(r.exit_code == 0);

  // Manifests exist, load and carry the stage wiring.
  const uts::RunManifest m = uts::RunManifest::load(f("vocab.tsv.manifest.json"));
  CHECK(m.command == "build-uts");
  CHECK(m.seed == 42);
  CHECK(m.deterministic);
  CHECK(m.inputs.at("tags") == f("tags.jsonl"));
  CHECK(m.outputs.at("vocabulary") == f("vocab.tsv"));

  const uts::RunManifest pm = uts::RunManifest::load(f("tags.jsonl.manifest.json"));
  CHECK(pm.deterministic);  // fixture mode

  // The vocabulary header pins n_records and k.
  const std::string vocab = testutil::read_file(f("vocab.tsv"));
  CHECK(vocab.rfind("# n_records=100 k=50", 0) == 0);

  // 96 labeled + 4 filtered = 100 records in.
  int labeled = 0, filtered = 0;
  for (char c : testutil::read_file(f("labels.jsonl")))
    if (c == '\n') ++labeled;
  for (char c : testutil::read_file(f("filtered.jsonl")))
    if (c == '\n') ++filtered;
  CHECK(labeled == 96);
  CHECK(filtered == 4);
}

TEST_CASE("paper-preset vocabulary sizes are accepted") {
  TempDir dir("cli_presets");
  // Build tag input ourselves: k presets exceed the fixture pool, which the
  // clamping contract handles.
  RunResult prep = run_cli("ingest --corpus " + kData + "/corpus_100.jsonl --out " +
                           dir.file("records.jsonl") + " --report " + dir.file("rep.jsonl") +
                           " 2>/dev/null");
  REQUIRE(prep.exit_code == 0);
  prep = run_cli("parse --records " + dir.file("records.jsonl") + " --fixtures " + kData +
                 "/fixtures_100.jsonl --out " + dir.file("tags.jsonl") + " --failures " +
                 dir.file("fail.jsonl") + " 2>/dev/null");
  REQUIRE(prep.exit_code == 0);
  for (int k : {800, 1000, 1500, 2000, 3000}) {
    RunResult r = run_cli("build-uts --tags " + dir.file("tags.jsonl") + " --k " +
                          std::to_string(k) + " --out " + dir.file("v.tsv") + " 2>/dev/null");
    CHECK(r.exit_code == 0);
  }
}

TEST_CASE("stats --compare writes the overlap report") {
  TempDir dir("cli_compare");
  testutil::write_file(dir, "v1.tsv",
                       "# n_records=10 k=2\n"
                       "index\ttag\tdf\tscore\n"
                       "0\tmusic\t5\t3.029653014\n"
                       "1\tdog\t2\t2.598019349\n");
  testutil::write_file(dir, "v2.tsv",
                       "# n_records=10 k=2\n"
                       "index\ttag\tdf\tscore\n"
                       "0\tmusic\t5\t3.029653014\n"
                       "1\tcat\t2\t2.598019349\n");
  RunResult r = run_cli("stats --compare " + dir.file("v1.tsv") + " " + dir.file("v2.tsv") +
                        " --overlap " + dir.file("overlap.json") + " 2>/dev/null");
  CHECK(r.exit_code == 0);
  const std::string overlap = testutil::read_file(dir.file("overlap.json"));
  CHECK(overlap.find("\"intersection\": 1") != std::string::npos);
  CHECK(overlap.find("\"only_first\": 1") != std::string::npos);
  CHECK(overlap.find("0.333") != std::string::npos);  // jaccard 1/3
}

TEST_CASE("missing upstream artifacts name the stage to run first") {
  TempDir dir("cli_order");
  RunResult r = run_cli("label --tags " + dir.file("nope.jsonl") + " --vocab " +
                        dir.file("nope.tsv") + " --out x --filtered y 2>" + dir.file("err"));
  CHECK(r.exit_code == 3);
  CHECK(testutil::read_file(dir.file("err")).find("run parse first") != std::string::npos);

  r = run_cli("build-uts --out " + dir.file("v.tsv") + " 2>" + dir.file("err2"));
  CHECK(r.exit_code == 3);
  CHECK(testutil::read_file(dir.file("err2")).find("run parse first") != std::string::npos);

  r = run_cli("parse --out x --failures y 2>" + dir.file("err3"));
  CHECK(r.exit_code == 3);
  CHECK(testutil::read_file(dir.file("err3")).find("run ingest first") != std::string::npos);
}

TEST_CASE("losses subcommand prints stable golden output") {
  TempDir dir("cli_losses");
  testutil::write_file(dir, "bce.json",
                       R"({"op": "bce_multilabel", "logits": [[0, 0]], "targets": [[1, 0]]})");
  RunResult r = run_cli("losses --bundle " + dir.file("bce.json") + " --manifest " +
                        dir.file("m.json") + " 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text ==
        "op=bce_multilabel\nloss=1.386294361\ngrad_norm[logits]=0.707106781\n");

  testutil::write_file(dir, "nll.json",
                       R"({"op": "nll_sequence", "logits": [[0,0,0,0],[0,0,0,0],[0,0,0,0]],
                           "targets": [0, 3, 1]})");
  r = run_cli("losses --bundle " + dir.file("nll.json") + " --manifest " + dir.file("m2.json") +
              " 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("loss=4.158883083\n") != std::string::npos);

  testutil::write_file(dir, "mixed.json",
                       R"({"op": "mixed_caption_loss", "ar_losses": [1.0, 2.0],
                           "par_losses": [3.0, 1.5, 0.5, 1.0, 2.0, 1.0], "ar_fraction": 0.25})");
  r = run_cli("losses --bundle " + dir.file("mixed.json") + " --manifest " + dir.file("m3.json") +
              " 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "op=mixed_caption_loss\nloss=12.000000000\n");

  // An inconsistent split is a data error.
  testutil::write_file(dir, "bad.json",
                       R"({"op": "mixed_caption_loss", "ar_losses": [1.0],
                           "par_losses": [1.0], "ar_fraction": 1.0})");
  r = run_cli("losses --bundle " + dir.file("bad.json") + " 2>/dev/null");
  CHECK(r.exit_code == 4);
}

TEST_CASE("config file drives the pipeline and env vars override it") {
  TempDir dir("cli_config");
  testutil::write_file(dir, "uts.toml",
                       "seed = 13\n"
                       "corpus = \"" + kData + "/corpus_100.jsonl\"\n");
  RunResult r = run_cli("--config " + dir.file("uts.toml") + " ingest --out " +
                        dir.file("records.jsonl") + " --report " + dir.file("rep.jsonl") +
                        " 2>/dev/null");
  CHECK(r.exit_code == 0);
  const uts::RunManifest m = uts::RunManifest::load(dir.file("records.jsonl.manifest.json"));
  CHECK(m.seed == 13);

  // UTS_SEED overrides the file value; the command runs through sh so the
  // variable can be set inline.
  const std::string cmd = "UTS_SEED=99 " + std::string(UTS_CLI_PATH) + " --config " +
                          dir.file("uts.toml") + " ingest --out " + dir.file("r2.jsonl") +
                          " --report " + dir.file("rep2.jsonl") + " 2>/dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  const uts::RunManifest m2 = uts::RunManifest::load(dir.file("r2.jsonl.manifest.json"));
  CHECK(m2.seed == 99);
}

TEST_CASE("train-toy writes a loadable checkpoint and a trace") {
  TempDir dir("cli_toy");
  RunResult r = run_cli(
      "--seed 5 train-toy --objective mtc --steps 60 --batch 16 --samples 100 --num-tags 6 "
      "--feat-dim 12 --frames 3 --hidden 8 --embed 8 --lr 0.4 --trace " +
      dir.file("trace.csv") + " --model " + dir.file("model.json") + " 2>/dev/null");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("objective=mtc") != std::string::npos);
  CHECK(r.stdout_text.find("final_map=") != std::string::npos);
  const std::string trace = testutil::read_file(dir.file("trace.csv"));
  CHECK(trace.rfind("step,loss,map", 0) == 0);
  CHECK(testutil::read_file(dir.file("model.json")).find("enc.w1") != std::string::npos);
}

TEST_SUITE_END();
