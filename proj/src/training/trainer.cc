// training/trainer.cc

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

#include "training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "common/error.h"
#include "common/parallel.h"
#include "diffcore/tape.h"
#include "loss/loss.h"
#include "model/checkpoint.h"
#include "scoring/rescore.h"
#include "training/optimizer.h"

namespace rescore {
namespace training {

namespace fs = std::filesystem;
using model::Model;
using model::ModelParams;
using model::TokenSeq;

namespace {

using GradMap = std::map<std::string, std::vector<double>>;

std::string StepName(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step-%06zu.ckpt", step);
  return buf;
}

void CopyValues(const ModelParams &from, ModelParams &to) {
  for (const auto &[name, t] : from.tensors()) {
    auto src = t.values();
    auto dst = to.at(name).mutable_values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

class EpochOrder {
 public:
  EpochOrder(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}
  std::size_t At(std::size_t global) {
    const std::size_t epoch = global / n_;
    auto it = perms_.find(epoch);
    if (it == perms_.end()) {
      std::vector<std::size_t> p(n_);
      std::iota(p.begin(), p.end(), 0);
      Rng rng = MakeRng(seed_, {0x65706f6368ULL, epoch});
      std::shuffle(p.begin(), p.end(), rng);
      perms_.clear();
      it = perms_.emplace(epoch, std::move(p)).first;
    }
    return it->second[global % n_];
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
  std::map<std::size_t, std::vector<std::size_t>> perms_;
};

class MetricsLog {
 public:
  MetricsLog(const std::string &dir, bool resume, std::size_t keep_through) {
    if (dir.empty()) return;
    path_ = (fs::path(dir) / "metrics.jsonl").string();
    std::vector<std::string> kept;
    if (resume) {
      std::ifstream in(path_);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.value("step", std::size_t{0}) <= keep_through)
          kept.push_back(line);
      }
    }
    out_.open(path_, std::ios::trunc);
    if (!out_) Fail(ErrorKind::kIo, "cannot write '" + path_ + "'");
    for (const auto &l : kept) out_ << l << '\n';
  }
  void Write(const Json &j) {
    if (out_.is_open()) out_ << j.dump() << '\n' << std::flush;
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace

TrainResult Train(Model &model, const TrainRecipe &recipe, std::size_t num_items,
                  const ItemLossFn &item_loss, const EvalFn &eval,
                  const RunOptions &options) {
  recipe.Validate();
  if (num_items == 0) Fail(ErrorKind::kEmptyInput, "training set is empty");
  auto log = [&](const std::string &s) {
    if (options.log) options.log(s);
  };
  const bool on_disk = !options.out_dir.empty();
  if (on_disk) fs::create_directories(options.out_dir);
  const std::string last_path =
      on_disk ? (fs::path(options.out_dir) / "last.ckpt").string() : "";
  const std::string best_path =
      on_disk ? (fs::path(options.out_dir) / "best.ckpt").string() : "";

  Adam adam(recipe.adam_beta1, recipe.adam_beta2, recipe.adam_eps);
  TrainResult result;
  std::size_t step = 0;
  ModelParams best_params;
  bool resumed = false;

  if (options.resume && on_disk && fs::exists(last_path)) {
    model::Checkpoint ckpt = model::LoadCheckpoint(last_path);
    model::ValidateParams(model.config, ckpt.model.params);
    CopyValues(ckpt.model.params, model.params);
    adam.LoadState(ckpt.extras);
    const Json &meta = ckpt.metadata;
    step = meta.at("step").get<std::size_t>();
    for (const auto &r : meta.at("records")) result.records.push_back(CheckpointRecordFromJson(r));
    result.losses = meta.at("losses").get<std::vector<double>>();
    result.skipped_items = meta.value("skipped_items", std::size_t{0});
    best_params = model::LoadCheckpoint(best_path).model.params;
    resumed = true;
    log("resumed at step " + std::to_string(step));
  }
  MetricsLog metrics(options.out_dir, resumed, step);

  auto checkpoint = [&](std::size_t at_step) {
    const double metric = eval(model);
    if (!std::isfinite(metric))
      Fail(ErrorKind::kNumeric, "dev metric is not finite at step " + std::to_string(at_step));
    CheckpointRecord rec;
    rec.step = at_step;
    rec.dev_metric = metric;
    if (on_disk) {
      rec.path = StepName(at_step);
      model::SaveModel((fs::path(options.out_dir) / rec.path).string(), model, {{"step", at_step}, {"dev_metric", metric}});
    }
    const bool improved = result.records.empty() ||
                          metric < SelectCheckpoint(result.records).dev_metric;
    result.records.push_back(rec);
    MarkBest(result.records);
    if (improved) {
      best_params = model.params.Clone();
      if (on_disk) model::SaveModel(best_path, model, {{"step", at_step}, {"dev_metric", metric}});
    }
    metrics.Write({{"step", at_step}, {"dev_metric", metric}});
    log("step " + std::to_string(at_step) + " dev_metric " + std::to_string(metric));
    if (on_disk) {
      Json meta;
      meta["phase"] = PhaseName(recipe.phase);
      meta["step"] = at_step;
      Json recs = Json::array();
      for (const auto &r : result.records) recs.push_back(ToJson(r));
      meta["records"] = recs;
      meta["losses"] = result.losses;
      meta["skipped_items"] = result.skipped_items;
      meta["recipe"] = ToJson(recipe);
      model::SaveCheckpoint(last_path, {model, meta, adam.State()});
    }
  };

  if (result.records.empty()) checkpoint(0);

  const std::size_t batch = recipe.batch_size;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(batch, options.threads));
  std::vector<Model> worker_models;
  for (std::size_t w = 0; w < workers; ++w)
    worker_models.push_back({model.config, model.vocab, model.params.Clone()});
  EpochOrder order(num_items, recipe.seed);

  while (step < recipe.max_steps) {
    std::vector<std::size_t> items(batch);
    for (std::size_t i = 0; i < batch; ++i) items[i] = order.At(step * batch + i);
    for (auto &wm : worker_models) CopyValues(model.params, wm.params);

    std::vector<std::optional<GradMap>> grads(batch);
    std::vector<double> losses(batch, 0.0);
    ParallelFor(workers, static_cast<int>(workers), [&](std::size_t w) {
      Model &wm = worker_models[w];
      const std::size_t begin = batch * w / workers, end = batch * (w + 1) / workers;
      for (std::size_t i = begin; i < end; ++i) {
        wm.params.ZeroGrad();
        diff::Tape tape;
        std::optional<diff::Tensor> loss;
        {
          diff::Tape::Scope scope(tape);
          Rng rng = MakeRng(recipe.seed, {0x6974656dULL, step, i});
          loss = item_loss(wm, items[i], step, rng);
        }
        if (!loss) continue;
        tape.Backward(*loss);
        GradMap g;
        for (const auto &[name, t] : wm.params.tensors()) {
          auto src = t.has_grad() ? t.grad() : std::span<const double>();
          g[name].assign(src.begin(), src.end());
          g[name].resize(t.size(), 0.0);
        }
        losses[i] = loss->item();
        grads[i] = std::move(g);
      }
    });

    GradMap total;
    std::size_t used = 0;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      if (!grads[i]) {
        ++result.skipped_items;
        continue;
      }
      ++used;
      loss_sum += losses[i];
      for (auto &[name, g] : *grads[i]) {
        auto &acc = total[name];
        if (acc.empty()) {
          acc = std::move(g);
        } else {
          for (std::size_t k = 0; k < g.size(); ++k) acc[k] += g[k];
        }
      }
    }
    const double lr = LearningRate(recipe, step);
    double mean_loss = 0.0;
    if (used > 0) {
      const double inv = 1.0 / static_cast<double>(used);
      mean_loss = loss_sum * inv;
      double norm2 = 0.0;
      for (auto &[name, g] : total)
        for (double &v : g) {
          v *= inv;
          norm2 += v * v;
        }
      if (!std::isfinite(mean_loss) || !std::isfinite(norm2)) {
        std::ostringstream msg;
        msg << "training diverged at step " << step << " (loss " << mean_loss
            << ", squared gradient norm " << norm2 << ")";
        Fail(ErrorKind::kNumeric, msg.str());
      }
      if (recipe.max_grad_norm > 0.0 && norm2 > recipe.max_grad_norm * recipe.max_grad_norm) {
        const double scale = recipe.max_grad_norm / std::sqrt(norm2);
        for (auto &[name, g] : total)
          for (double &v : g) v *= scale;
      }
      adam.Step(model.params, total, lr);
    }
    ++step;
    result.losses.push_back(mean_loss);
    metrics.Write({{"step", step}, {"loss", mean_loss}, {"lr", lr}, {"items", used}});
    if (step % recipe.eval_every == 0 || step == recipe.max_steps) checkpoint(step);
  }

  result.steps = step;
  result.best = SelectCheckpoint(result.records);
  CopyValues(best_params, model.params);
  return result;
}

double DevPerplexity(const Model &m, const std::vector<TokenSeq> &dev,
                     std::uint64_t seed, double mask_rate, int threads) {
  if (dev.empty()) Fail(ErrorKind::kEmptyInput, "dev set is empty");
  std::vector<double> nll(dev.size());
  std::vector<std::size_t> count(dev.size());
  const bool causal = m.config.variant == model::Variant::kCausal;
  ParallelFor(dev.size(), threads, [&](std::size_t i) {
    std::span<const TokenSeq> one(&dev[i], 1);
    std::vector<std::vector<std::size_t>> masks;
    if (causal) {
      count[i] = dev[i].size() + 1;
    } else {
      Rng rng = MakeRng(seed, {0x646576ULL, i});
      masks = loss::SampleMasks(one, mask_rate, rng);
      count[i] = masks[0].size();
    }
    nll[i] = loss::CeLoss(m.config, m.params, one, &masks).item() *
             static_cast<double>(count[i]);
  });
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < dev.size(); ++i) total += nll[i], n += count[i];
  return std::exp(total / static_cast<double>(n));
}

TrainResult DomainAdapt(Model &m, const std::vector<TokenSeq> &train,
                        const std::vector<TokenSeq> &dev,
                        const TrainRecipe &recipe, const RunOptions &options) {
  if (recipe.phase != Phase::kAdapt)
    Fail(ErrorKind::kConfig, "domain_adapt needs an adapt-phase recipe");
  auto item_loss = [&](const Model &wm, std::size_t item, std::size_t,
                       Rng &rng) -> std::optional<diff::Tensor> {
    std::span<const TokenSeq> one(&train[item], 1);
    std::vector<std::vector<std::size_t>> masks;
    if (wm.config.variant == model::Variant::kBidirectional)
      masks = loss::SampleMasks(one, recipe.loss.mask_rate, rng);
    return loss::CeLoss(wm.config, wm.params, one, &masks);
  };
  auto eval = [&](const Model &cur) {
    return DevPerplexity(cur, dev, recipe.seed, recipe.loss.mask_rate, options.threads);
  };
  return Train(m, recipe, train.size(), item_loss, eval, options);
}

double DevWer(const Model &m, scoring::ScorerKind kind,
              const std::vector<scoring::NBestEntry> &dev, double lambda,
              const scoring::ScoringOptions &scoring_options, int threads) {
  auto shared = std::make_shared<const Model>(m);
  scoring::Scorer scorer(kind, shared, scoring_options);
  auto scores = scoring::ScoreCorpus(scorer, dev, threads);
  return scoring::SelectionWer(dev, scoring::SelectAll(dev, scores, lambda)).wer;
}

void RejectTestData(const std::vector<scoring::NBestEntry> &entries,
                    const std::string &what) {
  for (const auto &e : entries)
    if (e.utt_id.rfind("test-", 0) == 0)
      Fail(ErrorKind::kUsage, what + " contains held-out test utterance '" +
                                  e.utt_id + "'");
}

TrainResult MwerFinetune(Model &m, scoring::ScorerKind kind,
                         const std::vector<scoring::NBestEntry> &train,
                         const std::vector<scoring::NBestEntry> &dev,
                         const TrainRecipe &recipe,
                         const scoring::ScoringOptions &scoring_options,
                         const RunOptions &options) {
  if (recipe.phase != Phase::kMwer)
    Fail(ErrorKind::kConfig, "mwer_finetune needs an mwer-phase recipe");
  RejectTestData(train, "MWER training data");
  RejectTestData(dev, "MWER dev data");
  scoring::CheckCompatible(kind, m.config, m.params);
  std::vector<loss::NBestBatchItem> items;
  items.reserve(train.size());
  bool any = false;
  for (const auto &e : train) {
    items.push_back(loss::MakeBatchItem(e));
    any = any || e.hyps.size() >= 2;
  }
  if (!any)
    Fail(ErrorKind::kEmptyInput, "every training n-best has fewer than two hypotheses");
  auto item_loss = [&](const Model &wm, std::size_t item, std::size_t,
                       Rng &rng) {
    return loss::ItemLoss(kind, wm, items[item], recipe.loss, rng, scoring_options);
  };
  auto eval = [&](const Model &cur) {
    return DevWer(cur, kind, dev, recipe.loss.lambda_train, scoring_options,
                  options.threads);
  };
  return Train(m, recipe, items.size(), item_loss, eval, options);
}

TrainResult DistillScores(Model &m, scoring::ScorerKind kind,
                          const std::vector<scoring::NBestEntry> &train,
                          const std::vector<std::vector<double>> &teacher,
                          const std::vector<scoring::NBestEntry> &dev,
                          const TrainRecipe &recipe,
                          const scoring::ScoringOptions &scoring_options,
                          const RunOptions &options) {
  RejectTestData(train, "distillation data");
  RejectTestData(dev, "distillation dev data");
  scoring::CheckCompatible(kind, m.config, m.params);
  if (teacher.size() != train.size())
    Fail(ErrorKind::kContract, "distill: teacher scores for " +
                                   std::to_string(teacher.size()) + " of " +
                                   std::to_string(train.size()) + " utterances");
  std::vector<std::vector<model::TokenSeq>> contents(train.size());
  for (std::size_t u = 0; u < train.size(); ++u) {
    if (teacher[u].size() != train[u].hyps.size())
      Fail(ErrorKind::kContract, "distill: teacher size mismatch for '" +
                                     train[u].utt_id + "'");
    for (const auto &h : train[u].hyps) contents[u].push_back(m.vocab.EncodeText(h.text));
  }
  auto item_loss = [&](const Model &wm, std::size_t item, std::size_t,
                       Rng &) -> std::optional<diff::Tensor> {
    if (contents[item].size() < 2) return std::nullopt;
    auto scores = scoring::ScoreTensors(kind, wm.config, wm.params, contents[item],
                                        scoring_options);
    return loss::DistillLoss(scores, teacher[item]);
  };
  auto eval = [&](const Model &cur) {
    return DevWer(cur, kind, dev, recipe.loss.lambda_train, scoring_options,
                  options.threads);
  };
  return Train(m, recipe, train.size(), item_loss, eval, options);
}

}  // namespace training
}  // namespace rescore
