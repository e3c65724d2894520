// pipeline/stages.cc

// Copyright 2026 The nbest-rescore Authors
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

#include "pipeline/stages.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "bench/bench.h"
#include "common/error.h"
#include "common/rng.h"
#include "datagen/channel.h"
#include "datagen/corpus.h"
#include "metrics/report.h"
#include "metrics/wer.h"
#include "model/checkpoint.h"
#include "model/transformer.h"
#include "scoring/nbest.h"
#include "scoring/rescore.h"
#include "training/trainer.h"
#include "training/tuning.h"

namespace rescore {
namespace pipeline {

namespace fs = std::filesystem;
using scoring::NBestEntry;
using scoring::ScorerKind;

namespace {

constexpr const char *kTrainNBest = "gen/train.nbest.jsonl";
constexpr const char *kDevNBest = "gen/dev.nbest.jsonl";
constexpr const char *kTestNBest = "gen/test.nbest.jsonl";
constexpr const char *kAdaptText = "gen/adapt.txt";
constexpr const char *kDevText = "gen/dev.txt";
constexpr const char *kLexicon = "gen/lexicon.txt";

std::string Under(const PipelineConfig &c, const std::string &rel) {
  return (fs::path(c.out) / rel).string();
}

void Log(const StageOptions &o, const std::string &s) {
  if (o.log) o.log(s);
}

double Percent(double fraction) { return 100.0 * fraction; }

Json ReadJsonFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kUsage, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kParse, path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string &path, const Json &j) {
  fs::create_directories(fs::path(path).parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

// config.json, metrics.jsonl and report.json of one stage.
class StageDir {
 public:
  StageDir(const PipelineConfig &c, const std::string &name)
      : dir_(Under(c, name)) {
    fs::create_directories(dir_);
    WriteJsonFile(Path("config.json"), ToJson(c));
    metrics_.open(Path("metrics.jsonl"), std::ios::trunc);
    if (!metrics_) Fail(ErrorKind::kIo, "cannot write '" + Path("metrics.jsonl") + "'");
  }
  std::string Path(const std::string &file) const {
    return (fs::path(dir_) / file).string();
  }
  void Metric(const Json &j) { metrics_ << j.dump() << '\n' << std::flush; }
  void Report(const Json &j) { WriteJsonFile(Path("report.json"), j); }

 private:
  std::string dir_;
  std::ofstream metrics_;
};

std::vector<NBestEntry> ReadSplit(const PipelineConfig &c, const char *rel) {
  return scoring::ReadNBestFile(Under(c, rel));
}

model::Vocabulary LoadVocabulary(const PipelineConfig &c) {
  return model::Vocabulary(scoring::ReadLines(Under(c, kLexicon)));
}

std::vector<model::TokenSeq> Tokenize(const model::Vocabulary &vocab,
                                      const std::vector<std::string> &lines) {
  std::vector<model::TokenSeq> out;
  out.reserve(lines.size());
  for (const auto &l : lines) {
    model::TokenSeq t = vocab.EncodeText(l);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<model::Variant> Variants(const PipelineConfig &c) {
  std::vector<model::Variant> out;
  for (auto v : {model::Variant::kCausal, model::Variant::kBidirectional})
    for (auto k : c.scorers)
      if (scoring::RequiredVariant(k) == v) {
        out.push_back(v);
        break;
      }
  return out;
}

std::string AdaptCheckpoint(model::Variant v) {
  return std::string("adapt/") + model::VariantName(v) + "/best.ckpt";
}

System Baseline(ScorerKind kind) {
  ScorerKind base = BaselineKind(kind);
  return {base, "ce", AdaptCheckpoint(scoring::RequiredVariant(base))};
}

std::string TunePath(const PipelineConfig &c, const System &s) {
  return Under(c, "tune/" + s.name() + ".json");
}

std::shared_ptr<const model::Model> LoadShared(const PipelineConfig &c,
                                               const std::string &rel) {
  return std::make_shared<const model::Model>(model::LoadModel(Under(c, rel)));
}

Json Tune(const PipelineConfig &c, const System &s,
          const std::vector<NBestEntry> &dev, const StageOptions &o) {
  Log(o, "tune: " + s.name());
  scoring::Scorer scorer(s.kind, LoadShared(c, s.checkpoint), c.scoring);
  training::LambdaTuning t = training::TuneLambda(scorer, dev, c.tune.grid, c.threads);
  Json j;
  j["system"] = s.name();
  j["scorer"] = scoring::ScorerKindName(s.kind);
  j["loss"] = s.loss;
  j["checkpoint"] = s.checkpoint;
  j["best_lambda"] = t.best_lambda;
  j["best_dev_wer"] = Percent(t.best_wer);
  Json curve = Json::array();
  for (const auto &p : t.curve)
    curve.push_back({{"lambda", p.lambda}, {"dev_wer", Percent(p.wer)}});
  j["curve"] = curve;
  WriteJsonFile(TunePath(c, s), j);
  return j;
}

double TunedLambda(const PipelineConfig &c, const System &s) {
  const std::string path = TunePath(c, s);
  if (!fs::exists(path))
    Fail(ErrorKind::kUsage, "no tuned lambda for " + s.name() + " (run tune first)");
  return ReadJsonFile(path).at("best_lambda").get<double>();
}

double EnsureTuned(const PipelineConfig &c, const System &s,
                   const std::vector<NBestEntry> &dev, const StageOptions &o) {
  if (fs::exists(TunePath(c, s))) return TunedLambda(c, s);
  return Tune(c, s, dev, o).at("best_lambda").get<double>();
}

Json RecordsJson(const std::vector<training::CheckpointRecord> &records,
                 bool percent) {
  Json out = Json::array();
  for (const auto &r : records) {
    Json j = training::ToJson(r);
    if (percent) j["dev_metric"] = Percent(r.dev_metric);
    out.push_back(j);
  }
  return out;
}

void GuardTrainingPath(const std::string &path) {
  if (scoring::LooksLikeTestPath(path))
    Fail(ErrorKind::kUsage, "refusing to train on held-out test data '" + path + "'");
}

Json SplitStats(const std::vector<NBestEntry> &entries) {
  std::size_t hyps = 0, padding = 0, short_lists = 0;
  for (const auto &e : entries) {
    hyps += e.hyps.size();
    short_lists += e.short_list;
    for (const auto &h : e.hyps) padding += h.padding;
  }
  auto first = scoring::SelectionWer(entries, scoring::FirstPassSelections(entries));
  return {{"utterances", entries.size()},
          {"hypotheses", hyps},
          {"padding_hypotheses", padding},
          {"short_lists", short_lists},
          {"reference_words", first.reference_word_count},
          {"first_pass_wer", Percent(first.wer)},
          {"oracle_wer", Percent(scoring::OracleWer(entries).wer)}};
}

// Mean bench latency per scorer kind from a bench report.
std::map<std::string, double> BenchLatencies(const std::string &path) {
  std::map<std::string, double> out;
  Json j = ReadJsonFile(path);
  for (const auto &r : j.at("results"))
    out[r.at("scorer_kind").get<std::string>()] = r.at("mean_latency_ms").get<double>();
  return out;
}

}  // namespace

std::string System::name() const {
  return std::string(scoring::ScorerKindName(kind)) + "." + loss;
}

ScorerKind BaselineKind(ScorerKind kind) {
  return scoring::RequiredVariant(kind) == model::Variant::kCausal
             ? ScorerKind::kCausalLl
             : ScorerKind::kBidirectionalPll;
}

std::vector<System> Systems(const PipelineConfig &c) {
  std::vector<System> out;
  for (auto v : Variants(c)) {
    ScorerKind k = v == model::Variant::kCausal ? ScorerKind::kCausalLl
                                                : ScorerKind::kBidirectionalPll;
    out.push_back({k, "ce", AdaptCheckpoint(v)});
  }
  for (auto k : c.scorers)
    out.push_back({k, "mwer", std::string("mwer/") + scoring::ScorerKindName(k) + "/best.ckpt"});
  return out;
}

Json RunGen(const PipelineConfig &c, const StageOptions &o) {
  StageDir dir(c, "gen");
  Log(o, "gen: corpus");
  datagen::Corpus corpus = datagen::GenerateCorpus(c.corpus);
  datagen::ConfusionTable confusions(corpus.lexicon, c.channel.confusion_k,
                                     c.channel.confusion_temperature);
  Json splits = Json::object();
  const std::pair<const char *, const std::vector<datagen::Sentence> *> parts[] = {
      {"train", &corpus.train}, {"dev", &corpus.dev}, {"test", &corpus.test}};
  for (const auto &[name, sentences] : parts) {
    Log(o, std::string("gen: n-best ") + name);
    auto entries = datagen::GenerateNBest(*sentences, name, c.channel, confusions, c.threads);
    scoring::WriteNBestFile(dir.Path(std::string(name) + ".nbest.jsonl"), entries);
    Json stats = SplitStats(entries);
    splits[name] = stats;
    Json line = {{"split", name}};
    line.update(stats);
    dir.Metric(line);
  }

  // Adaptation text: the text-only sentences plus the training references.
  std::vector<std::string> adapt;
  adapt.reserve(corpus.adapt.size() + corpus.train.size());
  for (const auto &s : corpus.adapt) adapt.push_back(datagen::JoinSentence(s));
  for (const auto &s : corpus.train) adapt.push_back(datagen::JoinSentence(s));
  std::vector<std::string> dev;
  for (const auto &s : corpus.dev) dev.push_back(datagen::JoinSentence(s));
  scoring::WriteLines(dir.Path("adapt.txt"), adapt);
  scoring::WriteLines(dir.Path("dev.txt"), dev);
  scoring::WriteLines(dir.Path("lexicon.txt"), corpus.lexicon);

  Json report;
  report["stage"] = "gen";
  report["lexicon_size"] = corpus.lexicon.size();
  report["vocab_size"] = corpus.lexicon.size() + model::special::kCount;
  report["adapt_sentences"] = adapt.size();
  report["splits"] = splits;
  report["files"] = {kTrainNBest, kDevNBest, kTestNBest, kAdaptText, kDevText, kLexicon};
  dir.Report(report);
  return report;
}

Json RunAdapt(const PipelineConfig &c, const StageOptions &o) {
  StageDir dir(c, "adapt");
  model::Vocabulary vocab = LoadVocabulary(c);
  auto train = Tokenize(vocab, scoring::ReadLines(Under(c, kAdaptText)));
  auto dev = Tokenize(vocab, scoring::ReadLines(Under(c, kDevText)));
  Json variants = Json::object();
  for (auto v : Variants(c)) {
    const std::string name = model::VariantName(v);
    model::Model m = model::MakeModel(MakeModelConfig(c, v, 0), vocab);
    training::RunOptions ro;
    ro.out_dir = dir.Path(name);
    ro.threads = c.threads;
    ro.resume = o.resume;
    ro.log = [&](const std::string &s) { Log(o, "adapt " + name + ": " + s); };
    training::TrainResult r = training::DomainAdapt(m, train, dev, c.adapt, ro);
    for (const auto &rec : r.records)
      dir.Metric({{"variant", name}, {"step", rec.step}, {"dev_perplexity", rec.dev_metric}});
    Json j;
    j["checkpoint"] = AdaptCheckpoint(v);
    j["parameters"] = m.params.ParameterCount();
    j["steps"] = r.steps;
    j["init_dev_perplexity"] = r.records.front().dev_metric;
    j["best_step"] = r.best.step;
    j["best_dev_perplexity"] = r.best.dev_metric;
    j["final_train_loss"] = r.losses.empty() ? 0.0 : r.losses.back();
    j["records"] = RecordsJson(r.records, false);
    variants[name] = j;
  }
  Json report;
  report["stage"] = "adapt";
  report["train_sentences"] = train.size();
  report["dev_sentences"] = dev.size();
  report["variants"] = variants;
  dir.Report(report);
  return report;
}

Json RunMwer(const PipelineConfig &c, const StageOptions &o) {
  GuardTrainingPath(Under(c, kTrainNBest));
  GuardTrainingPath(Under(c, kDevNBest));
  auto train = ReadSplit(c, kTrainNBest);
  auto dev = ReadSplit(c, kDevNBest);
  StageDir dir(c, "mwer");
  Json scorers = Json::object();
  for (auto kind : c.scorers) {
    const std::string name = scoring::ScorerKindName(kind);
    const System base = Baseline(kind);
    const double lambda = EnsureTuned(c, base, dev, o);
    model::Model m = model::LoadModel(Under(c, base.checkpoint));
    const bool distill = c.distill.enabled &&
                         std::find(c.distill.scorers.begin(), c.distill.scorers.end(),
                                   kind) != c.distill.scorers.end();
    std::vector<std::vector<double>> teacher;
    std::vector<scoring::NBestEntry> distill_train;
    if (distill) {
      scoring::Scorer scorer(base.kind, std::make_shared<const model::Model>(m), c.scoring);
      const std::size_t n = std::min(c.distill.utterances, train.size());
      distill_train.assign(train.begin(), train.begin() + n);
      for (const auto &e : distill_train) {
        std::vector<std::string> texts;
        for (const auto &h : e.hyps) texts.push_back(h.text);
        teacher.push_back(scorer.ScoreTexts(texts));
      }
    }
    if (scoring::IsPooled(kind))
      model::AttachHead(m.config, m.params, scoring::RequiredPooling(kind),
                        DeriveSeed(c.seed, {0x68656164ULL, static_cast<std::uint64_t>(kind)}));
    Json distill_report;
    if (distill) {
      training::TrainRecipe dr = c.distill.recipe;
      dr.loss.lambda_train = lambda;
      training::RunOptions dro;
      dro.out_dir = dir.Path(name) + "/distill";
      dro.threads = c.threads;
      dro.resume = o.resume;
      dro.log = [&](const std::string &s) { Log(o, "distill " + name + ": " + s); };
      training::TrainResult d = training::DistillScores(m, kind, distill_train, teacher, dev,
                                                        dr, c.scoring, dro);
      distill_report = {{"teacher", base.name()},
                        {"utterances", distill_train.size()},
                        {"steps", d.steps},
                        {"best_step", d.best.step},
                        {"best_dev_wer", Percent(d.best.dev_metric)},
                        {"records", RecordsJson(d.records, true)}};
    }
    training::TrainRecipe recipe = c.mwer;
    recipe.loss.lambda_train = lambda;
    training::RunOptions ro;
    ro.out_dir = dir.Path(name);
    ro.threads = c.threads;
    ro.resume = o.resume;
    ro.log = [&](const std::string &s) { Log(o, "mwer " + name + ": " + s); };
    training::TrainResult r =
        training::MwerFinetune(m, kind, train, dev, recipe, c.scoring, ro);
    for (const auto &rec : r.records)
      dir.Metric({{"scorer", name}, {"step", rec.step}, {"dev_wer", Percent(rec.dev_metric)}});
    Json j;
    j["checkpoint"] = std::string("mwer/") + name + "/best.ckpt";
    j["initialized_from"] = base.checkpoint;
    j["baseline"] = base.name();
    j["lambda_train"] = lambda;
    j["variant"] = model::VariantName(m.config.variant);
    j["pooling"] = model::PoolingName(m.config.pooling);
    j["tied_output"] = m.config.tied_output();
    j["loss"] = loss::ToJson(recipe.loss);
    j["steps"] = r.steps;
    j["skipped_items"] = r.skipped_items;
    j["init_dev_wer"] = Percent(r.records.front().dev_metric);
    j["best_step"] = r.best.step;
    j["best_dev_wer"] = Percent(r.best.dev_metric);
    j["records"] = RecordsJson(r.records, true);
    if (distill) j["distill"] = distill_report;
    scorers[name] = j;
  }
  Json report;
  report["stage"] = "mwer";
  report["train_utterances"] = train.size();
  report["dev_utterances"] = dev.size();
  report["scorers"] = scorers;
  dir.Report(report);
  return report;
}

Json RunTune(const PipelineConfig &c, const StageOptions &o) {
  auto dev = ReadSplit(c, kDevNBest);
  StageDir dir(c, "tune");
  Json systems = Json::object();
  for (const auto &s : Systems(c)) {
    if (!fs::exists(Under(c, s.checkpoint))) {
      Log(o, "tune: skipping " + s.name() + " (no checkpoint)");
      continue;
    }
    Json t = Tune(c, s, dev, o);
    for (const auto &p : t["curve"])
      dir.Metric({{"system", s.name()}, {"lambda", p["lambda"]}, {"dev_wer", p["dev_wer"]}});
    systems[s.name()] = t;
  }
  if (systems.empty())
    Fail(ErrorKind::kUsage, "tune: no trained models under '" + c.out + "'");
  Json report;
  report["stage"] = "tune";
  report["grid"] = c.tune.grid;
  report["systems"] = systems;
  dir.Report(report);
  return report;
}

Json RunRescore(const PipelineConfig &c, const StageOptions &o) {
  const ScorerKind kind = scoring::ParseScorerKind(c.rescore.scorer);
  System sys{kind, "mwer", std::string("mwer/") + c.rescore.scorer + "/best.ckpt"};
  std::string model_path = c.rescore.model;
  std::optional<double> lambda = c.rescore.lambda;
  if (model_path.empty()) {
    if (!fs::exists(Under(c, sys.checkpoint)) && !scoring::IsPooled(kind))
      sys = Baseline(kind);
    model_path = Under(c, sys.checkpoint);
    if (!lambda) lambda = TunedLambda(c, sys);
  }
  if (!lambda)
    Fail(ErrorKind::kUsage, "rescore: lambda not set and no tuned value for '" +
                                model_path + "'");
  const std::string input = c.rescore.input.empty() ? Under(c, kDevNBest) : c.rescore.input;
  auto entries = scoring::ReadNBestFile(input);
  StageDir dir(c, "rescore");
  const std::string output =
      c.rescore.output.empty()
          ? dir.Path(fs::path(input).stem().string() + "." + c.rescore.scorer + ".jsonl")
          : c.rescore.output;
  Log(o, "rescore: " + input + " -> " + output);
  scoring::Scorer scorer(
      kind, std::make_shared<const model::Model>(model::LoadModel(model_path)), c.scoring);
  auto scores = scoring::ScoreCorpus(scorer, entries, c.threads);
  auto annotated = scoring::Annotate(entries, scores, *lambda);
  scoring::WriteNBestFile(output, annotated);

  Json report;
  report["stage"] = "rescore";
  report["scorer"] = c.rescore.scorer;
  report["lambda"] = *lambda;
  report["utterances"] = entries.size();
  report["forward_passes"] = scorer.forward_count();
  std::size_t ref_words = 0;
  for (const auto &e : entries) ref_words += !e.ref.empty();
  if (ref_words > 0) {
    std::vector<std::size_t> sel;
    for (const auto &e : annotated) sel.push_back(*e.selected);
    report["wer"] = Percent(scoring::SelectionWer(entries, sel).wer);
    report["first_pass_wer"] =
        Percent(scoring::SelectionWer(entries, scoring::FirstPassSelections(entries)).wer);
  }
  dir.Metric(report);
  dir.Report(report);
  return report;
}

Json RunEval(const PipelineConfig &c, const StageOptions &o) {
  auto test = ReadSplit(c, kTestNBest);
  StageDir dir(c, "eval");
  std::map<std::string, double> latency;
  if (!c.eval.bench.empty()) latency = BenchLatencies(c.eval.bench);

  const double first_pass =
      Percent(scoring::SelectionWer(test, scoring::FirstPassSelections(test)).wer);
  const double oracle = Percent(scoring::OracleWer(test).wer);

  metrics::ResultTable table("test WER (%)");
  table.Add({"first_pass", "-", std::nullopt, first_pass, std::nullopt});
  Json systems = Json::object();
  std::map<std::string, double> wer_of;
  double best = first_pass;
  for (const auto &s : Systems(c)) {
    if (!fs::exists(Under(c, s.checkpoint)))
      Fail(ErrorKind::kUsage, "eval: missing checkpoint '" + s.checkpoint + "'");
    const double lambda = TunedLambda(c, s);
    Log(o, "eval: " + s.name());
    scoring::Scorer scorer(s.kind, LoadShared(c, s.checkpoint), c.scoring);
    auto scores = scoring::ScoreCorpus(scorer, test, c.threads);
    auto annotated = scoring::Annotate(test, scores, lambda);
    scoring::WriteNBestFile(dir.Path(s.name() + ".test.nbest.jsonl"), annotated);
    std::vector<std::size_t> sel;
    for (const auto &e : annotated) sel.push_back(*e.selected);
    metrics::WerReport w = scoring::SelectionWer(test, sel);
    const double wer = Percent(w.wer);
    wer_of[s.name()] = wer;
    best = std::min(best, wer);
    std::optional<double> lat;
    if (auto it = latency.find(scoring::ScorerKindName(s.kind)); it != latency.end())
      lat = it->second;
    table.Add({scoring::ScorerKindName(s.kind), s.loss, lat, wer, std::nullopt});
    Json j = metrics::ToJson(w);
    j["wer"] = wer;
    j["lambda"] = lambda;
    systems[s.name()] = j;
    dir.Metric({{"system", s.name()}, {"lambda", lambda}, {"test_wer", wer}});
  }
  table.Add({"oracle", "-", std::nullopt, oracle, std::nullopt});
  table.SetBaseline(first_pass);

  Json comparisons = Json::array();
  for (auto k : c.scorers) {
    const System base = Baseline(k);
    const System tuned{k, "mwer", ""};
    const double b = wer_of.at(base.name()), m = wer_of.at(tuned.name());
    comparisons.push_back({{"scorer", scoring::ScorerKindName(k)},
                           {"baseline", base.name()},
                           {"baseline_wer", b},
                           {"mwer_wer", m},
                           {"delta_pp", m - b},
                           {"not_worse", m <= b}});
  }

  Json report;
  report["stage"] = "eval";
  report["split"] = "test";
  report["utterances"] = test.size();
  report["first_pass_wer"] = first_pass;
  report["oracle_wer"] = oracle;
  report["best_rescored_wer"] = best;
  report["table"] = table.ToJson();
  report["systems"] = systems;
  report["comparisons"] = comparisons;
  dir.Report(report);
  {
    std::ofstream txt(dir.Path("report.txt"), std::ios::trunc);
    txt << table.Format();
  }
  return report;
}

Json RunBenchStage(const PipelineConfig &c, const StageOptions &o) {
  StageDir dir(c, "bench");
  std::vector<std::string> words;
  for (std::size_t i = 0; i < c.corpus.vocab_size; ++i) words.push_back("w" + std::to_string(i));
  model::Vocabulary synthetic(words);
  Json results = Json::array();
  std::map<ScorerKind, double> mean;
  for (auto kind : c.bench.scorers) {
    std::shared_ptr<const model::Model> m;
    std::string source = "fresh";
    if (c.bench.trained_models) {
      System sys{kind, "mwer", std::string("mwer/") + scoring::ScorerKindName(kind) + "/best.ckpt"};
      if (!fs::exists(Under(c, sys.checkpoint)) && !scoring::IsPooled(kind)) sys = Baseline(kind);
      m = LoadShared(c, sys.checkpoint);
      source = sys.checkpoint;
    } else {
      model::Model fresh = model::MakeModel(
          MakeModelConfig(c, scoring::RequiredVariant(kind), 0), synthetic);
      if (scoring::IsPooled(kind))
        model::AttachHead(fresh.config, fresh.params, scoring::RequiredPooling(kind), c.seed);
      m = std::make_shared<const model::Model>(std::move(fresh));
    }
    Log(o, std::string("bench: ") + scoring::ScorerKindName(kind));
    scoring::Scorer scorer(kind, m, c.scoring);
    bench::BenchResult r = bench::RunBench(scorer, c.bench.options);
    mean[kind] = r.mean_latency_ms;
    Json j = bench::ToJson(r);
    j["model"] = source;
    dir.Metric(j);
    results.push_back(j);
  }
  Json ratios = Json::object();
  auto has = [&](ScorerKind k) { return mean.count(k) > 0; };
  for (ScorerKind p : {ScorerKind::kPooledCls, ScorerKind::kPooledLast, ScorerKind::kPooledAttention}) {
    if (!has(p)) continue;
    const std::string n = scoring::ScorerKindName(p);
    if (has(ScorerKind::kBidirectionalPll))
      ratios["bidirectional_pll/" + n] = mean[ScorerKind::kBidirectionalPll] / mean[p];
    if (has(ScorerKind::kCausalLl))
      ratios[n + "/causal_ll"] = mean[p] / mean[ScorerKind::kCausalLl];
  }
  Json report;
  report["stage"] = "bench";
  report["hardware"] = bench::HardwareNote();
  report["threads"] = 1;
  report["options"] = bench::ToJson(c.bench.options);
  report["results"] = results;
  report["ratios"] = ratios;
  dir.Report(report);
  return report;
}

Json RunPipeline(const PipelineConfig &c, const StageOptions &o) {
  StageDir dir(c, "pipeline");
  Json gen = RunGen(c, o);
  dir.Metric({{"stage", "gen"}});
  Json adapt = RunAdapt(c, o);
  dir.Metric({{"stage", "adapt"}});
  auto dev = ReadSplit(c, kDevNBest);
  for (const auto &s : Systems(c))
    if (s.loss == "ce") Tune(c, s, dev, o);
  dir.Metric({{"stage", "tune_baselines"}});
  Json mwer = RunMwer(c, o);
  dir.Metric({{"stage", "mwer"}});
  Json tune = RunTune(c, o);
  dir.Metric({{"stage", "tune"}});
  Json eval = RunEval(c, o);
  dir.Metric({{"stage", "eval"}});

  Json report;
  report["stage"] = "pipeline";
  report["data"] = gen["splits"];
  Json adapt_summary = Json::object();
  for (auto &[name, v] : adapt["variants"].items())
    adapt_summary[name] = {{"init_dev_perplexity", v["init_dev_perplexity"]},
                           {"best_dev_perplexity", v["best_dev_perplexity"]},
                           {"best_step", v["best_step"]}};
  report["adapt"] = adapt_summary;
  Json mwer_summary = Json::object();
  for (auto &[name, v] : mwer["scorers"].items())
    mwer_summary[name] = {{"lambda_train", v["lambda_train"]},
                          {"init_dev_wer", v["init_dev_wer"]},
                          {"best_dev_wer", v["best_dev_wer"]},
                          {"best_step", v["best_step"]}};
  report["mwer"] = mwer_summary;
  Json lambdas = Json::object();
  for (auto &[name, v] : tune["systems"].items()) lambdas[name] = v["best_lambda"];
  report["lambdas"] = lambdas;
  report["first_pass_wer"] = eval["first_pass_wer"];
  report["oracle_wer"] = eval["oracle_wer"];
  report["best_rescored_wer"] = eval["best_rescored_wer"];
  report["table"] = eval["table"];
  report["comparisons"] = eval["comparisons"];
  dir.Report(report);
  return report;
}

const std::vector<std::string> &StageNames() {
  static const std::vector<std::string> names = {
      "gen", "adapt", "mwer", "tune", "rescore", "eval", "bench", "pipeline"};
  return names;
}

Json RunStage(const std::string &name, const PipelineConfig &c,
              const StageOptions &o) {
  if (name == "gen") return RunGen(c, o);
  if (name == "adapt") return RunAdapt(c, o);
  if (name == "mwer") return RunMwer(c, o);
  if (name == "tune") return RunTune(c, o);
  if (name == "rescore") return RunRescore(c, o);
  if (name == "eval") return RunEval(c, o);
  if (name == "bench") return RunBenchStage(c, o);
  if (name == "pipeline") return RunPipeline(c, o);
  Fail(ErrorKind::kUsage, "unknown stage '" + name + "'");
}

}  // namespace pipeline
}  // namespace rescore
