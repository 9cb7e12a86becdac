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
//
// uts: caption corpus -> parsed tags -> TF-IDF tag system -> multi-hot
// labels, plus loss-kernel inspection and the toy trainer. Stages are
// composable subcommands; each writes its declared outputs and a JSON run
// manifest, and reruns are byte-identical for fixed (inputs, seed).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uts/config.hpp"
#include "uts/corpus.hpp"
#include "uts/labeler.hpp"
#include "uts/manifest.hpp"
#include "uts/objectives.hpp"
#include "uts/parser.hpp"
#include "uts/rng.hpp"
#include "uts/stats.hpp"
#include "uts/synthetic.hpp"
#include "uts/toy_model.hpp"
#include "uts/vocab.hpp"
#include "uts/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit codes: 0 success, 2 usage/config, 3 missing upstream artifact,
// 4 data/validation error, 5 I/O error, 1 unexpected.
enum ExitCode {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kMissingArtifact = 3,
  kDataError = 4,
  kIoError = 5,
};

struct CliError : std::runtime_error {
  int code;
  CliError(int code, const std::string& message) : std::runtime_error(message), code(code) {}
};

void require_input(const std::string& path, const std::string& what,
                   const std::string& producing_stage = "") {
  if (path.empty()) {
    std::string msg = "no " + what + " path given";
    if (!producing_stage.empty()) msg += " (run " + producing_stage + " first)";
    throw CliError(kMissingArtifact, msg);
  }
  if (!fs::exists(path)) {
    std::string msg = what + " not found: " + path;
    if (!producing_stage.empty()) msg += " (run " + producing_stage + " first)";
    throw CliError(kMissingArtifact, msg);
  }
}

std::string default_manifest_path(const std::string& primary_output) {
  return primary_output + ".manifest.json";
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.version = uts::kVersion;
    manifest_.seed = seed;
  }

  void input(const std::string& name, const std::string& path) {
    if (!path.empty()) manifest_.inputs[name] = path;
  }
  void output(const std::string& name, const std::string& path) {
    if (!path.empty()) manifest_.outputs[name] = path;
  }
  void nondeterministic() { manifest_.deterministic = false; }

  void write(const std::string& path) {
    manifest_.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.save(path);
  }

 private:
  uts::RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

std::string resolve_prompt_template(const std::string& flag_path,
                                    const uts::PipelineConfig& config) {
  if (!flag_path.empty()) return flag_path;
  if (!config.prompt_template.empty()) return config.prompt_template;
#ifdef UTS_DEFAULT_PROMPT_PATH
  return UTS_DEFAULT_PROMPT_PATH;
#else
  throw CliError(kUsage, "no prompt template configured (use --prompt-template)");
#endif
}

uts::Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw CliError(kDataError, "losses bundle: " + what + " must be an array");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  for (const auto& row : j) {
    if (!row.is_array()) throw CliError(kDataError, "losses bundle: " + what + " must be 2-D");
    if (cols < 0)
      cols = static_cast<int>(row.size());
    else if (cols != static_cast<int>(row.size()))
      throw CliError(kDataError, "losses bundle: " + what + " has ragged rows");
  }
  uts::Matrix m(rows, std::max(cols, 0));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

void print_loss_result(const std::string& op, const uts::LossResult& result) {
  std::printf("op=%s\n", op.c_str());
  std::printf("loss=%.9f\n", result.loss);
  for (const auto& [name, grad] : result.grads)
    std::printf("grad_norm[%s]=%.9f\n", name.c_str(), grad.frobenius_norm());
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string corpus, out, report, summaries, manifest;
};

int cmd_ingest(const IngestArgs& args, const uts::PipelineConfig& config) {
  const std::string corpus = args.corpus.empty() ? config.corpus : args.corpus;
  require_input(corpus, "corpus file");
  ManifestWriter manifest("ingest", config.seed);
  manifest.input("corpus", corpus);

  auto [records, report] = uts::load_records(corpus);
  uts::write_records(records, args.out);
  manifest.output("records", args.out);
  uts::write_load_report(report, args.report);
  manifest.output("report", args.report);
  if (!args.summaries.empty()) {
    std::ofstream out(args.summaries);
    if (!out) throw CliError(kIoError, "cannot write summaries: " + args.summaries);
    for (const uts::CaptionRecord& rec : records) {
      json j;
      j["id"] = rec.id;
      j["summary"] = uts::extract_summary(rec.caption);
      out << j.dump() << '\n';
    }
    manifest.output("summaries", args.summaries);
  }
  manifest.write(args.manifest.empty() ? default_manifest_path(args.out) : args.manifest);
  std::fprintf(stderr, "ingest: %zu records, %zu malformed lines\n", records.size(),
               report.errors.size());
  return kOk;
}

struct ParseArgs {
  std::string records, fixtures, endpoint, prompt, out, failures, manifest;
};

int cmd_parse(const ParseArgs& args, uts::PipelineConfig config) {
  const std::string records_path = args.records.empty() ? config.records : args.records;
  require_input(records_path, "records file", "ingest");

  if (!args.fixtures.empty()) {
    config.parser.endpoint_url = "fixture";
    config.parser.fixture_path = args.fixtures;
  } else if (!args.endpoint.empty()) {
    config.parser.endpoint_url = args.endpoint;
  } else if (config.parser.fixture_mode() && !config.parser.fixture_path &&
             !config.fixtures.empty()) {
    config.parser.fixture_path = config.fixtures;
  }
  if (config.parser.fixture_mode()) {
    if (!config.parser.fixture_path)
      throw CliError(kUsage, "fixture mode needs --fixtures or a configured fixture path");
    require_input(*config.parser.fixture_path, "fixture file");
  }
  config.parser.jobs = config.jobs;

  const std::string prompt_path = resolve_prompt_template(args.prompt, config);
  require_input(prompt_path, "prompt template");
  const uts::PromptTemplate prompt = uts::PromptTemplate::load(prompt_path);

  ManifestWriter manifest("parse", config.seed);
  manifest.input("records", records_path);
  manifest.input("prompt_template", prompt_path);
  if (config.parser.fixture_mode())
    manifest.input("fixtures", *config.parser.fixture_path);
  else
    manifest.nondeterministic();  // live endpoint sampling

  auto [records, load_report] = uts::load_records(records_path);
  if (!load_report.errors.empty())
    throw CliError(kDataError, "records file has " + std::to_string(load_report.errors.size()) +
                                   " malformed lines; re-run ingest");
  uts::BatchResult result = uts::parse_batch(records, config.parser, prompt);
  uts::write_tag_pairs(result.parsed, args.out);
  manifest.output("tags", args.out);
  uts::write_parse_failures(result.failures, args.failures);
  manifest.output("failures", args.failures);
  manifest.write(args.manifest.empty() ? default_manifest_path(args.out) : args.manifest);

  for (const std::string& w : result.warnings) std::fprintf(stderr, "parse: %s\n", w.c_str());
  std::fprintf(stderr, "parse: %zu records parsed, %zu failed\n", result.parsed.size(),
               result.failures.size());
  return kOk;
}

struct BuildUtsArgs {
  std::string tags, out, manifest;
  int k = 0;
};

int cmd_build_uts(const BuildUtsArgs& args, const uts::PipelineConfig& config) {
  const std::string tags_path = args.tags.empty() ? config.tags : args.tags;
  require_input(tags_path, "tags file", "parse");
  const int k = args.k > 0 ? args.k : config.k;
  if (k < 1) throw CliError(kUsage, "k must be >= 1");

  ManifestWriter manifest("build-uts", config.seed);
  manifest.input("tags", tags_path);

  auto pairs = uts::read_tag_pairs(tags_path);
  std::vector<uts::TagList> lists;
  lists.reserve(pairs.size());
  for (auto& [id, tags] : pairs) lists.push_back(tags);
  if (lists.empty()) throw CliError(kDataError, "tags file is empty: " + tags_path);

  const uts::DfTable table = uts::accumulate_df(lists);
  const uts::Vocabulary vocab = uts::select_top_k(table, k);
  uts::save_vocabulary(vocab, args.out);
  manifest.output("vocabulary", args.out);
  manifest.write(args.manifest.empty() ? default_manifest_path(args.out) : args.manifest);

  std::fprintf(stderr, "build-uts: pool %zu tags over %lld records -> k=%d\n",
               table.counts.size(), static_cast<long long>(table.n_records), vocab.k());
  return kOk;
}

struct LabelArgs {
  std::string tags, vocab, out, filtered, manifest;
};

int cmd_label(const LabelArgs& args, const uts::PipelineConfig& config) {
  const std::string tags_path = args.tags.empty() ? config.tags : args.tags;
  const std::string vocab_path = args.vocab.empty() ? config.vocabulary : args.vocab;
  require_input(tags_path, "tags file", "parse");
  require_input(vocab_path, "vocabulary file", "build-uts");

  ManifestWriter manifest("label", config.seed);
  manifest.input("tags", tags_path);
  manifest.input("vocabulary", vocab_path);

  const uts::Vocabulary vocab = uts::load_vocabulary(vocab_path);
  const auto pairs = uts::read_tag_pairs(tags_path);
  const uts::DatasetResult dataset = uts::build_dataset(pairs, vocab);
  uts::write_labels(dataset.examples, args.out);
  manifest.output("labels", args.out);
  uts::write_filter_report(dataset.filtered, args.filtered);
  manifest.output("filtered", args.filtered);
  manifest.write(args.manifest.empty() ? default_manifest_path(args.out) : args.manifest);

  std::fprintf(stderr, "label: %zu labeled, %zu zero-vector filtered, %lld OOV tags\n",
               dataset.examples.size(), dataset.filtered.size(),
               static_cast<long long>(dataset.oov_tags_total));
  return kOk;
}

struct StatsArgs {
  std::string tags, freq, loglog, summary, manifest;
  std::vector<std::string> compare;
  std::string overlap;
};

int cmd_stats(const StatsArgs& args, const uts::PipelineConfig& config) {
  ManifestWriter manifest("stats", config.seed);
  std::string manifest_path = args.manifest;

  if (!args.compare.empty()) {
    if (args.compare.size() != 2)
      throw CliError(kUsage, "--compare takes exactly two vocabulary paths");
    require_input(args.compare[0], "vocabulary file", "build-uts");
    require_input(args.compare[1], "vocabulary file", "build-uts");
    const uts::Vocabulary v1 = uts::load_vocabulary(args.compare[0]);
    const uts::Vocabulary v2 = uts::load_vocabulary(args.compare[1]);
    const uts::OverlapReport overlap = uts::compare_vocabularies(v1, v2);
    if (args.overlap.empty()) throw CliError(kUsage, "--compare needs --overlap <path>");
    uts::write_overlap_json(overlap, args.overlap);
    manifest.input("vocabulary_a", args.compare[0]);
    manifest.input("vocabulary_b", args.compare[1]);
    manifest.output("overlap", args.overlap);
    if (manifest_path.empty()) manifest_path = default_manifest_path(args.overlap);
    manifest.write(manifest_path);
    std::fprintf(stderr, "stats: |a^b|=%lld jaccard=%.6f\n",
                 static_cast<long long>(overlap.intersection), overlap.jaccard);
    return kOk;
  }

  const std::string tags_path = args.tags.empty() ? config.tags : args.tags;
  require_input(tags_path, "tags file", "parse");
  manifest.input("tags", tags_path);

  const auto pairs = uts::read_tag_pairs(tags_path);
  std::vector<uts::TagList> lists;
  std::vector<int> per_record_counts;
  for (const auto& [id, tags] : pairs) {
    lists.push_back(tags);
    per_record_counts.push_back(static_cast<int>(tags.size()));
  }
  if (lists.empty()) throw CliError(kDataError, "tags file is empty: " + tags_path);
  const uts::DfTable table = uts::accumulate_df(lists);
  const uts::FrequencyReport report = uts::frequency_report(table, per_record_counts);

  uts::write_frequency_csv(report, args.freq);
  manifest.output("frequency", args.freq);
  uts::write_summary_json(report, args.summary);
  manifest.output("summary", args.summary);
  if (!args.loglog.empty()) {
    uts::write_loglog_csv(report, args.loglog);
    manifest.output("loglog", args.loglog);
  }
  if (manifest_path.empty()) manifest_path = default_manifest_path(args.freq);
  manifest.write(manifest_path);

  std::fprintf(stderr, "stats: pool %lld tags, mean %.3f tags/record\n",
               static_cast<long long>(report.pool_size), report.mean_tags_per_record);
  return kOk;
}

struct LossesArgs {
  std::string bundle, manifest;
};

int cmd_losses(const LossesArgs& args, const uts::PipelineConfig& config) {
  require_input(args.bundle, "tensor bundle");
  ManifestWriter manifest("losses", config.seed);
  manifest.input("bundle", args.bundle);

  std::ifstream in(args.bundle);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("op"))
    throw CliError(kDataError, "losses bundle must be a JSON object with an \"op\" key");
  const std::string op = j["op"].get<std::string>();

  if (op == "bce_multilabel") {
    const uts::LossResult r = uts::bce_multilabel(matrix_from_json(j.at("logits"), "logits"),
                                                  matrix_from_json(j.at("targets"), "targets"));
    print_loss_result(op, r);
  } else if (op == "infonce_symmetric") {
    uts::EmbeddingBatch audio{matrix_from_json(j.at("audio"), "audio")};
    uts::EmbeddingBatch text{matrix_from_json(j.at("text"), "text")};
    const uts::LossResult r = uts::infonce_symmetric(audio, text, j.value("tau", 0.07));
    print_loss_result(op, r);
  } else if (op == "nll_sequence") {
    uts::SequenceLogits seq;
    seq.logits = matrix_from_json(j.at("logits"), "logits");
    seq.targets = j.at("targets").get<std::vector<int>>();
    const uts::LossResult r = uts::nll_sequence(seq);
    print_loss_result(op, r);
  } else if (op == "mixed_caption_loss") {
    const double loss = uts::mixed_caption_loss(j.at("ar_losses").get<std::vector<double>>(),
                                                j.at("par_losses").get<std::vector<double>>(),
                                                j.at("ar_fraction").get<double>());
    std::printf("op=%s\n", op.c_str());
    std::printf("loss=%.9f\n", loss);
  } else if (op == "mtl_combine") {
    std::map<std::string, uts::Matrix> gm, gg;
    if (j.contains("grads_mtc"))
      for (const auto& [name, arr] : j["grads_mtc"].items())
        gm.emplace(name, matrix_from_json(arr, "grads_mtc." + name));
    if (j.contains("grads_gen"))
      for (const auto& [name, arr] : j["grads_gen"].items())
        gg.emplace(name, matrix_from_json(arr, "grads_gen." + name));
    const uts::LossResult r = uts::mtl_combine(j.at("l_mtc").get<double>(), gm,
                                               j.at("l_gen").get<double>(), gg,
                                               j.at("lambda").get<double>());
    print_loss_result(op, r);
  } else {
    throw CliError(kDataError, "unknown losses op: " + op);
  }

  manifest.write(args.manifest.empty() ? default_manifest_path("losses") : args.manifest);
  return kOk;
}

struct TrainToyArgs {
  std::string objective = "mtc";
  int steps = 2000;
  int batch = 32;
  double lr = 0.5;
  double lambda = 1.0;
  double tau = 0.07;
  int samples = 2000;
  int num_tags = 20;
  int feat_dim = 80;
  int frames = 8;
  int hidden = 32;
  int embed = 32;
  double noise = 0.05;
  std::string pool = "mean";
  int heads = 4;
  int map_every = 0;
  std::string trace, model, manifest;
};

int cmd_train_toy(const TrainToyArgs& args, const uts::PipelineConfig& config) {
  ManifestWriter manifest("train-toy", config.seed);

  const uts::Objective objective = uts::objective_from_string(args.objective);

  uts::PlantedConfig planted;
  planted.n_samples = args.samples;
  planted.num_tags = args.num_tags;
  planted.feat_dim = args.feat_dim;
  planted.frames = args.frames;
  planted.noise = args.noise;
  planted.seed = uts::Rng::derive(config.seed, "planted");
  const uts::PlantedDataset data = objective == uts::Objective::contrastive
                                       ? uts::make_planted_pairs(planted)
                                       : uts::make_planted_tags(planted);

  uts::ToyModelConfig model;
  model.feat_dim = args.feat_dim;
  model.hidden_dim = args.hidden;
  model.embed_dim = args.embed;
  model.pool = args.pool == "attention" ? uts::PoolKind::attention : uts::PoolKind::mean;
  model.heads = args.heads;
  model.num_tags = data.num_tags;
  model.t_max = objective == uts::Objective::contrastive ? 1 : planted.max_positives;
  model.text_rows = objective == uts::Objective::contrastive ? args.samples : 0;

  uts::TrainConfig train;
  train.steps = args.steps;
  train.batch = args.batch;
  train.learning_rate = args.lr;
  train.seed = uts::Rng::derive(config.seed, "train-toy");
  train.objective = objective;
  train.lambda = args.lambda;
  train.tau = args.tau;
  train.map_every = args.map_every;

  const uts::TrainResult result = uts::train_toy(data.clips, model, train);
  uts::write_trace_csv(result.trace, args.trace);
  manifest.output("trace", args.trace);
  if (!args.model.empty()) {
    uts::save_checkpoint(result.params, args.model);
    manifest.output("model", args.model);
  }
  manifest.write(args.manifest.empty() ? default_manifest_path(args.trace) : args.manifest);

  std::printf("objective=%s\n", uts::to_string(objective));
  std::printf("final_loss=%.9f\n", result.trace.back().loss);
  if (result.final_map) std::printf("final_map=%.9f\n", *result.final_map);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uts: unified tag system pipeline (caption ingestion, LLM tag parsing, "
               "TF-IDF vocabulary, multi-hot labels, loss kernels, toy trainer)"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  int jobs_flag = 0;
  app.add_option("--config", config_path, "TOML pipeline config (UTS_* env vars override it)");
  app.add_option("--seed", seed_flag, "root seed; stages derive named sub-seeds")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--jobs", jobs_flag, "in-flight request limit for parse");

  IngestArgs ingest;
  auto* cmd_ingest_p = app.add_subcommand("ingest", "validate a caption corpus");
  cmd_ingest_p->add_option("--corpus", ingest.corpus, "input corpus JSONL");
  cmd_ingest_p->add_option("--out", ingest.out, "validated records JSONL")->required();
  cmd_ingest_p->add_option("--report", ingest.report, "load report JSONL")->required();
  cmd_ingest_p->add_option("--summaries", ingest.summaries, "per-record summary paragraphs");
  cmd_ingest_p->add_option("--manifest", ingest.manifest, "run manifest path");

  ParseArgs parse;
  auto* cmd_parse_p = app.add_subcommand("parse", "LLM-aided tag parsing");
  cmd_parse_p->add_option("--records", parse.records, "records JSONL from ingest");
  cmd_parse_p->add_option("--fixtures", parse.fixtures, "fixture JSONL (offline replay)");
  cmd_parse_p->add_option("--endpoint", parse.endpoint, "chat-completions endpoint URL");
  cmd_parse_p->add_option("--prompt-template", parse.prompt, "prompt template asset");
  cmd_parse_p->add_option("--out", parse.out, "tags JSONL")->required();
  cmd_parse_p->add_option("--failures", parse.failures, "failure report JSONL")->required();
  cmd_parse_p->add_option("--manifest", parse.manifest, "run manifest path");

  BuildUtsArgs build_uts;
  auto* cmd_build_p = app.add_subcommand("build-uts", "select the top-k tag system");
  cmd_build_p->add_option("--tags", build_uts.tags, "tags JSONL from parse");
  cmd_build_p->add_option("--k", build_uts.k, "vocabulary size (e.g. 800, 1000, 1500, 2000, 3000)");
  cmd_build_p->add_option("--out", build_uts.out, "vocabulary TSV")->required();
  cmd_build_p->add_option("--manifest", build_uts.manifest, "run manifest path");

  LabelArgs label;
  auto* cmd_label_p = app.add_subcommand("label", "multi-hot labels against a vocabulary");
  cmd_label_p->add_option("--tags", label.tags, "tags JSONL from parse");
  cmd_label_p->add_option("--vocab", label.vocab, "vocabulary TSV from build-uts");
  cmd_label_p->add_option("--out", label.out, "labels JSONL")->required();
  cmd_label_p->add_option("--filtered", label.filtered, "zero-vector filter report")->required();
  cmd_label_p->add_option("--manifest", label.manifest, "run manifest path");

  StatsArgs stats;
  auto* cmd_stats_p = app.add_subcommand("stats", "tag frequency and overlap reports");
  cmd_stats_p->add_option("--tags", stats.tags, "tags JSONL from parse");
  cmd_stats_p->add_option("--freq", stats.freq, "rank/tag/count CSV");
  cmd_stats_p->add_option("--loglog", stats.loglog, "log10 rank/count CSV");
  cmd_stats_p->add_option("--summary", stats.summary, "summary JSON");
  cmd_stats_p->add_option("--compare", stats.compare, "two vocabulary TSVs to compare")
      ->expected(2);
  cmd_stats_p->add_option("--overlap", stats.overlap, "overlap report JSON (with --compare)");
  cmd_stats_p->add_option("--manifest", stats.manifest, "run manifest path");

  LossesArgs losses;
  auto* cmd_losses_p = app.add_subcommand("losses", "evaluate a loss kernel on a tensor bundle");
  cmd_losses_p->add_option("--bundle", losses.bundle, "JSON tensor bundle")->required();
  cmd_losses_p->add_option("--manifest", losses.manifest, "run manifest path");

  TrainToyArgs toy;
  auto* cmd_toy_p = app.add_subcommand("train-toy", "SGD on planted synthetic data");
  cmd_toy_p->add_option("--objective", toy.objective, "mtc | par | contrastive | mtl");
  cmd_toy_p->add_option("--steps", toy.steps, "SGD steps");
  cmd_toy_p->add_option("--batch", toy.batch, "batch size");
  cmd_toy_p->add_option("--lr", toy.lr, "learning rate");
  cmd_toy_p->add_option("--lambda", toy.lambda, "mtl weight on the generative term");
  cmd_toy_p->add_option("--tau", toy.tau, "contrastive temperature");
  cmd_toy_p->add_option("--samples", toy.samples, "planted dataset size");
  cmd_toy_p->add_option("--num-tags", toy.num_tags, "planted tag count");
  cmd_toy_p->add_option("--feat-dim", toy.feat_dim, "feature dimension");
  cmd_toy_p->add_option("--frames", toy.frames, "frames per clip");
  cmd_toy_p->add_option("--hidden", toy.hidden, "encoder hidden width");
  cmd_toy_p->add_option("--embed", toy.embed, "embedding dimension");
  cmd_toy_p->add_option("--noise", toy.noise, "generator noise level");
  cmd_toy_p->add_option("--pool", toy.pool, "mean | attention");
  cmd_toy_p->add_option("--heads", toy.heads, "attention heads");
  cmd_toy_p->add_option("--map-every", toy.map_every, "mAP evaluation period (0 = final only)");
  cmd_toy_p->add_option("--trace", toy.trace, "metric trace CSV")->required();
  cmd_toy_p->add_option("--model", toy.model, "model checkpoint JSON");
  cmd_toy_p->add_option("--manifest", toy.manifest, "run manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    uts::PipelineConfig config = config_path.empty()
                                     ? uts::PipelineConfig::from_environment()
                                     : uts::PipelineConfig::load(config_path);
    if (seed_given) config.seed = seed_flag;
    if (jobs_flag > 0) config.jobs = jobs_flag;

    if (*cmd_ingest_p) return cmd_ingest(ingest, config);
    if (*cmd_parse_p) return cmd_parse(parse, config);
    if (*cmd_build_p) return cmd_build_uts(build_uts, config);
    if (*cmd_label_p) return cmd_label(label, config);
    if (*cmd_stats_p) return cmd_stats(stats, config);
    if (*cmd_losses_p) return cmd_losses(losses, config);
    if (*cmd_toy_p) return cmd_train_toy(toy, config);
    return kUsage;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
}
