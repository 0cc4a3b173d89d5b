// Copyright 2026 The Perspex Authors.
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

#include "perspex/tc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "perspex/error.hpp"

namespace perspex::tc {

namespace {

constexpr const char* kMagic = "PERSPEX-CKPT 1\n";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

void append_array(std::string& blob, nlohmann::json& dir, const std::string& name,
                  const std::string& group, const Matrix& m) {
  dir.push_back({{"name", name},
                 {"group", group},
                 {"shape", {m.rows(), m.cols()}},
                 {"offset", blob.size()}});
  for (double v : m.values()) put_u64(blob, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

Checkpoint make_checkpoint(std::string kind, nlohmann::json meta, const ParamStore& store,
                           const AdamW* optimizer) {
  Checkpoint c;
  c.kind = std::move(kind);
  c.meta = std::move(meta);
  for (const auto& p : store.params()) c.params.emplace(p.name, p.var.value());
  c.param_checksum = store.checksum();
  if (optimizer != nullptr) {
    c.optimizer_steps = optimizer->steps_taken();
    c.optimizer_state = optimizer->state();
  }
  // Registration order matters for the checksum; keep it in the metadata.
  nlohmann::json order = nlohmann::json::array();
  for (const auto& p : store.params()) order.push_back(p.name);
  c.meta["param_order"] = std::move(order);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string blob;
  nlohmann::json dir = nlohmann::json::array();
  for (const auto& name : ckpt.meta.at("param_order")) {
    const auto& key = name.get_ref<const std::string&>();
    append_array(blob, dir, key, "param", ckpt.params.at(key));
  }
  for (const auto& [name, mom] : ckpt.optimizer_state) {
    append_array(blob, dir, name, "adam.m", mom.m);
    append_array(blob, dir, name, "adam.v", mom.v);
  }
  nlohmann::json header{{"format_version", 1},
                        {"kind", ckpt.kind},
                        {"meta", ckpt.meta},
                        {"arrays", dir},
                        {"optimizer_steps", ckpt.optimizer_steps},
                        {"param_checksum", ckpt.param_checksum}};
  const std::string text = header.dump();
  std::string out = kMagic;
  put_u64(out, text.size());
  out += text;
  out += blob;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArtifactError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArtifactError("missing checkpoint " + path.string());
  const std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string magic = kMagic;
  if (data.compare(0, magic.size(), magic) != 0 || data.size() < magic.size() + 8) {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  const std::uint64_t hlen = get_u64(data, magic.size());
  const std::size_t hstart = magic.size() + 8;
  if (hstart + hlen > data.size()) throw ParseError("truncated checkpoint header: " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.substr(hstart, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  const std::size_t bstart = hstart + hlen;

  Checkpoint c;
  c.kind = header.at("kind").get<std::string>();
  c.meta = header.at("meta");
  c.optimizer_steps = header.at("optimizer_steps").get<std::size_t>();
  c.param_checksum = header.at("param_checksum").get<std::string>();
  for (const auto& a : header.at("arrays")) {
    const auto rows = a.at("shape")[0].get<std::size_t>();
    const auto cols = a.at("shape")[1].get<std::size_t>();
    const auto offset = a.at("offset").get<std::size_t>();
    if (bstart + offset + rows * cols * 8 > data.size()) {
      throw ParseError("truncated checkpoint payload: " + path.string());
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = std::bit_cast<double>(get_u64(data, bstart + offset + i * 8));
    }
    const auto name = a.at("name").get<std::string>();
    const auto group = a.at("group").get<std::string>();
    if (group == "param") {
      c.params.emplace(name, std::move(m));
    } else if (group == "adam.m") {
      c.optimizer_state[name].m = std::move(m);
    } else if (group == "adam.v") {
      c.optimizer_state[name].v = std::move(m);
    } else {
      throw ParseError("unknown array group '" + group + "' in " + path.string());
    }
  }
  return c;
}

void restore_params(ParamStore& store, const Checkpoint& ckpt) {
  if (store.params().size() != ckpt.params.size()) {
    throw ArtifactError("checkpoint has " + std::to_string(ckpt.params.size()) +
                        " parameters, model expects " + std::to_string(store.params().size()));
  }
  for (const auto& p : store.params()) {
    auto it = ckpt.params.find(p.name);
    if (it == ckpt.params.end()) throw ArtifactError("checkpoint lacks parameter " + p.name);
    if (!it->second.same_shape(p.var.value())) {
      throw ArtifactError("shape mismatch for parameter " + p.name);
    }
    Var v = p.var;
    v.mutable_value() = it->second;
  }
  if (store.checksum() != ckpt.param_checksum) {
    throw ArtifactError("checkpoint checksum mismatch (" + store.checksum() + " vs " +
                        ckpt.param_checksum + ")");
  }
}

}  // namespace perspex::tc
