// metrics/report.cc

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

#include "metrics/report.h"

#include <cstdio>

#include "metrics/wer.h"

namespace rescore {
namespace metrics {

namespace {

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Pad(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

Json Optional(const std::optional<double> &v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void ResultTable::SetBaseline(double baseline_wer) {
  for (auto &row : rows_) row.relative_werr = RelativeWerr(baseline_wer, row.wer);
}

std::string ResultTable::Format() const {
  const std::vector<std::string> header = {"model", "loss", "latency_ms", "wer",
                                           "rel_werr"};
  std::vector<std::vector<std::string>> cells;
  for (const auto &r : rows_) {
    std::string rel = r.relative_werr ? "(" + Fixed(*r.relative_werr) + ")" : "-";
    cells.push_back({r.model, r.loss, r.latency_ms ? Fixed(*r.latency_ms) : "-",
                     Fixed(r.wer), rel});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto &row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  if (!title_.empty()) out += title_ + "\n";
  auto line = [&](const std::vector<std::string> &row) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out += (c ? "  " : "") + Pad(row[c], width[c]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  line(header);
  for (const auto &row : cells) line(row);
  return out;
}

Json ResultTable::ToJson() const {
  Json rows = Json::array();
  for (const auto &r : rows_)
    rows.push_back({{"model", r.model},
                    {"loss", r.loss},
                    {"latency_ms", Optional(r.latency_ms)},
                    {"wer", r.wer},
                    {"relative_werr", Optional(r.relative_werr)}});
  Json j;
  j["title"] = title_;
  j["rows"] = std::move(rows);
  return j;
}

ResultTable ResultTable::FromJson(const Json &j) {
  ResultTable t(j.value("title", ""));
  for (const auto &r : j.at("rows")) {
    ReportRow row;
    row.model = r.at("model").get<std::string>();
    row.loss = r.at("loss").get<std::string>();
    if (!r.at("latency_ms").is_null()) row.latency_ms = r["latency_ms"].get<double>();
    row.wer = r.at("wer").get<double>();
    if (!r.at("relative_werr").is_null())
      row.relative_werr = r["relative_werr"].get<double>();
    t.Add(std::move(row));
  }
  return t;
}

}  // namespace metrics
}  // namespace rescore
