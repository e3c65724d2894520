// scoring/nbest.cc

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

#include "scoring/nbest.h"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "common/error.h"

namespace rescore {
namespace scoring {

namespace {

[[noreturn]] void SchemaError(const std::string &where, const std::string &msg) {
  Fail(ErrorKind::kParse, where + ": " + msg);
}

const Json &Field(const Json &obj, const char *key, Json::value_t type,
                  const std::string &where, const char *type_name) {
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(where, std::string("missing field '") + key + "'");
  bool ok = it->type() == type ||
            (type == Json::value_t::number_float && it->is_number());
  if (!ok)
    SchemaError(where, std::string("field '") + key + "' must be " + type_name);
  return *it;
}

std::ofstream OpenForWrite(const std::string &path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
  return out;
}

}  // namespace

NBestEntry ParseNBestLine(const std::string &line, const std::string &where) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error &e) {
    SchemaError(where, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) SchemaError(where, "record must be a JSON object");
  NBestEntry e;
  e.utt_id = Field(j, "utt_id", Json::value_t::string, where, "a string").get<std::string>();
  e.ref = Field(j, "ref", Json::value_t::string, where, "a string").get<std::string>();
  const Json &hyps = Field(j, "hyps", Json::value_t::array, where, "an array");
  if (hyps.empty()) SchemaError(where, "'hyps' is empty");
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const Json &h = hyps[i];
    const std::string at = where + ": hyps[" + std::to_string(i) + "]";
    if (!h.is_object()) SchemaError(at, "hypothesis must be an object");
    Hypothesis hyp;
    hyp.text = Field(h, "text", Json::value_t::string, at, "a string").get<std::string>();
    hyp.am_score = Field(h, "am_score", Json::value_t::number_float, at, "a number").get<double>();
    if (!std::isfinite(hyp.am_score)) SchemaError(at, "am_score must be finite");
    hyp.padding = h.value("padding", false);
    if (h.contains("lm_score") && h["lm_score"].is_number()) hyp.lm_score = h["lm_score"].get<double>();
    if (h.contains("interp_score") && h["interp_score"].is_number())
      hyp.interp_score = h["interp_score"].get<double>();
    if (h.contains("rank") && h["rank"].is_number_unsigned()) hyp.rank = h["rank"].get<std::size_t>();
    e.hyps.push_back(std::move(hyp));
  }
  if (j.contains("selected") && j["selected"].is_number_unsigned()) {
    e.selected = j["selected"].get<std::size_t>();
    if (*e.selected >= e.hyps.size()) SchemaError(where, "'selected' out of range");
  }
  e.short_list = j.value("short", false);
  return e;
}

std::vector<NBestEntry> ReadNBestFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kUsage, "n-best file '" + path + "' not found");
  std::vector<NBestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    entries.push_back(ParseNBestLine(line, path + ":" + std::to_string(line_no)));
  }
  return entries;
}

std::string FormatNBestLine(const NBestEntry &e) {
  Json j;
  j["utt_id"] = e.utt_id;
  j["ref"] = e.ref;
  Json hyps = Json::array();
  for (const auto &h : e.hyps) {
    Json o;
    o["text"] = h.text;
    o["am_score"] = h.am_score;
    if (h.padding) o["padding"] = true;
    if (h.lm_score) o["lm_score"] = *h.lm_score;
    if (h.interp_score) o["interp_score"] = *h.interp_score;
    if (h.rank) o["rank"] = *h.rank;
    hyps.push_back(std::move(o));
  }
  j["hyps"] = std::move(hyps);
  if (e.selected) j["selected"] = *e.selected;
  if (e.short_list) j["short"] = true;
  return j.dump();
}

void WriteNBestFile(const std::string &path,
                    const std::vector<NBestEntry> &entries) {
  std::ofstream out = OpenForWrite(path);
  for (const auto &e : entries) out << FormatNBestLine(e) << '\n';
  if (!out) Fail(ErrorKind::kIo, "short write to '" + path + "'");
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kUsage, "text file '" + path + "' not found");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void WriteLines(const std::string &path, const std::vector<std::string> &lines) {
  std::ofstream out = OpenForWrite(path);
  for (const auto &l : lines) out << l << '\n';
  if (!out) Fail(ErrorKind::kIo, "short write to '" + path + "'");
}

bool LooksLikeTestPath(const std::string &path) {
  std::string name = std::filesystem::path(path).filename().string();
  for (auto &c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return name.find("test") != std::string::npos;
}

}  // namespace scoring
}  // namespace rescore
