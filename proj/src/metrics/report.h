// metrics/report.h

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

#ifndef RESCORE_METRICS_REPORT_H_
#define RESCORE_METRICS_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "common/json.h"

namespace rescore {
namespace metrics {

// One line of the results table. WERs are in percent.
struct ReportRow {
  std::string model;
  std::string loss;
  std::optional<double> latency_ms;
  double wer = 0.0;
  std::optional<double> relative_werr;
};

class ResultTable {
 public:
  explicit ResultTable(std::string title = "") : title_(std::move(title)) {}

  void Add(ReportRow row) { rows_.push_back(std::move(row)); }
  // Fills relative_werr of every row against `baseline_wer` (percent).
  void SetBaseline(double baseline_wer);

  const std::vector<ReportRow> &rows() const { return rows_; }

  // Fixed-width plain-text table, values rounded to two decimals.
  std::string Format() const;
  // {"title":..., "rows":[{model, loss, latency_ms, wer, relative_werr}]}
  Json ToJson() const;
  static ResultTable FromJson(const Json &j);

 private:
  std::string title_;
  std::vector<ReportRow> rows_;
};

}  // namespace metrics
}  // namespace rescore

#endif  // RESCORE_METRICS_REPORT_H_
