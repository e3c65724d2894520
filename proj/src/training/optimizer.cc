// training/optimizer.cc

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

#include "training/optimizer.h"

#include <cmath>

#include "common/error.h"

namespace rescore {
namespace training {

void Adam::Step(model::ModelParams &params,
                const std::map<std::string, std::vector<double>> &grads,
                double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto &[name, g] : grads) {
    diff::Tensor &p = params.at(name);
    if (g.size() != p.size())
      Fail(ErrorKind::kDimension, "adam: gradient size mismatch for '" + name + "'");
    auto &m = m_[name];
    auto &v = v_[name];
    m.resize(g.size(), 0.0);
    v.resize(g.size(), 0.0);
    auto w = p.mutable_values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mh = m[i] / c1, vh = v[i] / c2;
      w[i] -= lr * mh / (std::sqrt(vh) + eps_);
    }
  }
}

std::map<std::string, diff::Tensor> Adam::State() const {
  std::map<std::string, diff::Tensor> s;
  for (const auto &[name, m] : m_)
    s["optim.m." + name] = diff::Tensor::Vector(m);
  for (const auto &[name, v] : v_)
    s["optim.v." + name] = diff::Tensor::Vector(v);
  s["optim.t"] = diff::Tensor::Vector({static_cast<double>(t_)});
  return s;
}

void Adam::LoadState(const std::map<std::string, diff::Tensor> &extras) {
  m_.clear();
  v_.clear();
  t_ = 0;
  for (const auto &[key, t] : extras) {
    auto values = t.values();
    if (key == "optim.t") {
      t_ = static_cast<std::size_t>(values[0]);
    } else if (key.rfind("optim.m.", 0) == 0) {
      m_[key.substr(8)].assign(values.begin(), values.end());
    } else if (key.rfind("optim.v.", 0) == 0) {
      v_[key.substr(8)].assign(values.begin(), values.end());
    }
  }
}

}  // namespace training
}  // namespace rescore
