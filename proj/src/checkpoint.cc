// src/checkpoint.cc

// Copyright 2026  mlctc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Layout:
//   mlctc-checkpoint 1
//   layers <n>
//   hidden <H>
//   feature_dim <F>
//   lhuc <0|1>
//   init_seed <seed>
//   phoneset_version <v>
//   phoneset_bytes <n>
//   <n bytes of phone-set text>
//   tensor <name> <rows> <cols>
//   <rows*cols little-endian float64>
//   ... one record per tensor, in Parameters::ForEachTensor order ...
//   end

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mlctc/errors.h"
#include "mlctc/io.h"
#include "mlctc/network.h"

namespace mlctc {

namespace {

constexpr std::string_view kMagic = "mlctc-checkpoint 1";

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Line() {
    const std::size_t end = bytes_.find('\n', pos_);
    if (end == std::string_view::npos) throw FormatError("checkpoint: truncated header");
    std::string_view line = bytes_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return line;
  }

  std::uint64_t KeyedInt(std::string_view key) {
    std::string_view line = Line();
    if (line.substr(0, key.size()) != key || line.size() <= key.size() + 1 ||
        line[key.size()] != ' ')
      throw FormatError("checkpoint: expected '" + std::string(key) + "', got '" +
                        std::string(line) + "'");
    try {
      return std::stoull(std::string(line.substr(key.size() + 1)));
    } catch (const std::exception&) {
      throw FormatError("checkpoint: bad value in '" + std::string(line) + "'");
    }
  }

  std::string_view Bytes(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated payload");
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Model& model) {
  model.Validate();
  std::ostringstream out;
  const std::string phones = model.phones.Serialize();
  out << kMagic << '\n'
      << "layers " << model.config.num_layers << '\n'
      << "hidden " << model.config.hidden_size << '\n'
      << "feature_dim " << model.config.feature_dim << '\n'
      << "lhuc " << (model.config.lhuc ? 1 : 0) << '\n'
      << "init_seed " << model.init_seed << '\n'
      << "phoneset_version " << model.phoneset_version << '\n'
      << "phoneset_bytes " << phones.size() << '\n'
      << phones;
  model.params.ForEachTensor([&out](const std::string& name, const Matrix& m) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    out << EncodeLittleEndian(m.values()) << '\n';
  });
  out << "end\n";
  return out.str();
}

Model ParseCheckpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.Line() != kMagic) throw FormatError("checkpoint: bad magic line");
  Model model;
  model.config.num_layers = in.KeyedInt("layers");
  model.config.hidden_size = in.KeyedInt("hidden");
  model.config.feature_dim = in.KeyedInt("feature_dim");
  model.config.lhuc = in.KeyedInt("lhuc") != 0;
  model.init_seed = in.KeyedInt("init_seed");
  model.phoneset_version = in.KeyedInt("phoneset_version");
  const std::size_t phone_bytes = in.KeyedInt("phoneset_bytes");
  model.phones = UniversalPhoneSet::Parse(in.Bytes(phone_bytes));
  if (model.phones.version() != model.phoneset_version)
    throw StaleModelError("checkpoint header says phone-set version " +
                          std::to_string(model.phoneset_version) +
                          " but embeds version " +
                          std::to_string(model.phones.version()));

  std::map<std::string, Matrix> tensors;
  for (;;) {
    std::string_view line = in.Line();
    if (line == "end") break;
    std::istringstream header{std::string(line)};
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(header >> tag >> name >> rows >> cols) || tag != "tensor")
      throw FormatError("checkpoint: bad tensor record '" + std::string(line) + "'");
    Matrix m(rows, cols, DecodeLittleEndian(in.Bytes(rows * cols * 8)));
    if (in.Bytes(1) != "\n") throw FormatError("checkpoint: missing tensor terminator");
    if (!tensors.emplace(name, std::move(m)).second)
      throw FormatError("checkpoint: duplicate tensor '" + name + "'");
  }

  // Rebuild the parameter layout from the config, then fill it by name.
  const std::size_t H = model.config.hidden_size;
  for (std::size_t k = 0; k < model.config.num_layers; ++k) {
    const std::size_t in_dim = k == 0 ? model.config.feature_dim : 2 * H;
    model.params.layers.push_back(
        {LstmCellParams::Zeros(in_dim, H), LstmCellParams::Zeros(in_dim, H)});
  }
  for (const auto& [name, _] : tensors) {
    if (name.rfind("lhuc.", 0) != 0) continue;
    const std::size_t dot = name.rfind('.');
    const std::string lang = name.substr(5, dot - 5);
    model.params.lhuc.try_emplace(lang, model.config.num_layers, Matrix(2 * H, 1));
  }
  model.params.output = {Matrix(model.phones.size(), 2 * H),
                         Matrix(model.phones.size(), 1)};
  std::size_t used = 0;
  model.params.ForEachTensor([&](const std::string& name, Matrix& m) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint: missing tensor '" + name + "'");
    if (!it->second.SameShape(m))
      throw ShapeError("checkpoint: tensor '" + name + "' has the wrong shape");
    m = std::move(it->second);
    ++used;
  });
  if (used != tensors.size()) throw FormatError("checkpoint: unexpected extra tensors");
  model.Validate();
  return model;
}

void SaveCheckpoint(const Model& model, const std::string& path) {
  WriteFile(path, SerializeCheckpoint(model));
}

Model LoadCheckpoint(const std::string& path) { return ParseCheckpoint(ReadFile(path)); }

Model LoadCheckpoint(const std::string& path, const UniversalPhoneSet& expected) {
  Model model = LoadCheckpoint(path);
  if (model.phoneset_version != expected.version() || !(model.phones == expected))
    throw StaleModelError("checkpoint '" + path + "' is bound to phone-set version " +
                          std::to_string(model.phoneset_version) + ", expected " +
                          std::to_string(expected.version()));
  return model;
}

}  // namespace mlctc
