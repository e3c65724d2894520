// model/params.h

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

#ifndef RESCORE_MODEL_PARAMS_H_
#define RESCORE_MODEL_PARAMS_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diffcore/tensor.h"
#include "model/config.h"

namespace rescore {
namespace model {

// Parameter naming:
//   tok_emb [V x d], pos_emb [P x d]
//   layer.<l>.ln1.{gain,bias}, layer.<l>.ln2.{gain,bias}            [d]
//   layer.<l>.attn.h<h>.{wq,wk,wv} [d x dk], .{bq,bk,bv} [dk], .wo [dk x d]
//   layer.<l>.attn.bo [d]
//   layer.<l>.ff.w1 [d x d_ff], .b1 [d_ff], .w2 [d_ff x d], .b2 [d]
//   final_ln.{gain,bias} [d]
//   lm_out.bias [V], lm_out.weight [d x V] (untied models only)
//   head.wf [d x 1], head.bf [1]                       (pooling != none)
//   head.query [1 x d], head.wq [d x dk], head.wk [d x dk], head.wv [d x d]
//                                                      (pooling == attention)
using ParamLayout = std::vector<std::pair<std::string, diff::Shape>>;

ParamLayout ExpectedLayout(const ModelConfig &config);

// Closed-form count from the config alone.
std::size_t AnalyticParameterCount(const ModelConfig &config);

class ModelParams {
 public:
  // Gaussian weights (init_std), zero biases, unit layer-norm gains.
  static ModelParams Init(const ModelConfig &config);

  bool contains(const std::string &name) const {
    return tensors_.count(name) > 0;
  }
  diff::Tensor &at(const std::string &name);
  const diff::Tensor &at(const std::string &name) const;
  void Set(const std::string &name, diff::Tensor t);
  void Erase(const std::string &name) { tensors_.erase(name); }

  const std::map<std::string, diff::Tensor> &tensors() const {
    return tensors_;
  }
  std::size_t ParameterCount() const;

  // Deep copy; the copy's leaves are independent of this one's.
  ModelParams Clone() const;
  void SetRequiresGrad(bool v);
  void ZeroGrad();

 private:
  std::map<std::string, diff::Tensor> tensors_;
};

// Checks names and shapes against ExpectedLayout; throws kConfig.
void ValidateParams(const ModelConfig &config, const ModelParams &params);

// Switches `config` to `pooling` and initializes the matching head tensors,
// dropping any previous head. Body weights are untouched.
void AttachHead(ModelConfig &config, ModelParams &params, Pooling pooling,
                std::uint64_t seed);

}  // namespace model
}  // namespace rescore

#endif  // RESCORE_MODEL_PARAMS_H_
