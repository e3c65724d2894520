// model/checkpoint.cc

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

#include "model/checkpoint.h"

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "common/error.h"

namespace rescore {
namespace model {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'C', 'K', 'P', 'T', '\0', '\0'};
const char kExtraPrefix[] = "optim.";

static_assert(sizeof(double) == 8);

class Writer {
 public:
  void Bytes(const void *p, std::size_t n) {
    const char *c = static_cast<const char *>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void Le(T v) {
    unsigned char b[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = (v >> (8 * i)) & 0xff;
    Bytes(b, sizeof(T));
  }
  void F64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    Le(u);
  }
  std::string &buf() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string &buf, std::size_t end, const std::string &path)
      : buf_(buf), end_(end), path_(path) {}
  const char *Bytes(std::size_t n) {
    if (n > end_ - pos_) Fail(ErrorKind::kParse, path_ + ": truncated checkpoint");
    const char *p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename T>
  T Le() {
    const unsigned char *b = reinterpret_cast<const unsigned char *>(Bytes(sizeof(T)));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
  }
  double F64() {
    std::uint64_t u = Le<std::uint64_t>();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::string &buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
  const std::string &path_;
};

void WriteTensor(Writer &w, const std::string &name, const diff::Tensor &t) {
  w.Le<std::uint32_t>(name.size());
  w.Bytes(name.data(), name.size());
  w.Le<std::uint32_t>(t.rank());
  for (std::size_t d : t.shape()) w.Le<std::uint64_t>(d);
  for (double v : t.values()) w.F64(v);
}

}  // namespace

void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt) {
  ValidateParams(ckpt.model.config, ckpt.model.params);
  Json header;
  header["config"] = ToJson(ckpt.model.config);
  header["vocab"] = ckpt.model.vocab.words();
  header["metadata"] = ckpt.metadata;
  const std::string header_text = header.dump();

  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.Le<std::uint32_t>(kCheckpointVersion);
  w.Le<std::uint64_t>(header_text.size());
  w.Bytes(header_text.data(), header_text.size());
  w.Le<std::uint64_t>(ckpt.model.params.tensors().size() + ckpt.extras.size());
  for (const auto &[name, t] : ckpt.model.params.tensors()) WriteTensor(w, name, t);
  for (const auto &[name, t] : ckpt.extras) {
    if (name.rfind(kExtraPrefix, 0) != 0)
      Fail(ErrorKind::kContract, "checkpoint extra '" + name +
                                     "' must start with '" + kExtraPrefix + "'");
    WriteTensor(w, name, t);
  }
  const std::string &buf = w.buf();
  std::uint32_t crc = crc32(0L, reinterpret_cast<const Bytef *>(buf.data()),
                            static_cast<uInt>(buf.size()));
  w.Le<std::uint32_t>(crc);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write checkpoint '" + tmp + "'");
    out.write(w.buf().data(), static_cast<std::streamsize>(w.buf().size()));
    if (!out) Fail(ErrorKind::kIo, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename '" + tmp + "': " + ec.message());
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kUsage, "checkpoint '" + path + "' not found");
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 4 + 8 + 8 + 4 ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    Fail(ErrorKind::kParse, path + ": not a checkpoint file");

  const std::size_t body = buf.size() - 4;
  Reader crc_reader(buf, buf.size(), path);
  crc_reader.Bytes(body);
  std::uint32_t stored = crc_reader.Le<std::uint32_t>();
  std::uint32_t actual = crc32(0L, reinterpret_cast<const Bytef *>(buf.data()),
                               static_cast<uInt>(body));
  if (stored != actual)
    Fail(ErrorKind::kParse, path + ": checksum mismatch");

  Reader r(buf, body, path);
  r.Bytes(sizeof(kMagic));
  std::uint32_t version = r.Le<std::uint32_t>();
  if (version != kCheckpointVersion)
    Fail(ErrorKind::kParse, path + ": unsupported checkpoint version " +
                                std::to_string(version));
  std::uint64_t header_len = r.Le<std::uint64_t>();
  if (header_len > body) Fail(ErrorKind::kParse, path + ": truncated checkpoint");
  const char *hp = r.Bytes(header_len);
  Json header;
  try {
    header = Json::parse(hp, hp + header_len);
  } catch (const Json::exception &e) {
    Fail(ErrorKind::kParse, path + ": bad checkpoint header: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.model.config = ModelConfigFromJson(header.at("config"));
  ckpt.model.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
  if (header.contains("metadata")) ckpt.metadata = header["metadata"];

  std::uint64_t n = r.Le<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t name_len = r.Le<std::uint32_t>();
    const char *np = r.Bytes(name_len);
    std::string name(np, name_len);
    std::uint32_t rank = r.Le<std::uint32_t>();
    if (rank > 2) Fail(ErrorKind::kParse, path + ": tensor '" + name + "' has rank " + std::to_string(rank));
    diff::Shape shape(rank);
    for (auto &d : shape) d = r.Le<std::uint64_t>();
    std::size_t count = diff::NumElements(shape);
    if (count > body / 8) Fail(ErrorKind::kParse, path + ": truncated checkpoint");
    std::vector<double> values(count);
    for (double &v : values) v = r.F64();
    diff::Tensor t = diff::Tensor::FromValues(shape, std::move(values));
    if (name.rfind(kExtraPrefix, 0) == 0) {
      ckpt.extras[name] = t;
    } else {
      t.set_requires_grad(true);
      ckpt.model.params.Set(name, t);
    }
  }
  if (!r.done()) Fail(ErrorKind::kParse, path + ": trailing bytes in checkpoint");
  if (ckpt.model.vocab.size() != ckpt.model.config.vocab_size)
    Fail(ErrorKind::kParse, path + ": vocabulary size disagrees with config");
  ckpt.model.config.Validate();
  ValidateParams(ckpt.model.config, ckpt.model.params);
  return ckpt;
}

}  // namespace model
}  // namespace rescore
