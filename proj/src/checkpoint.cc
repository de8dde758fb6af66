/*
 * Copyright 2026 The seqdx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seqdx/checkpoint.h"

#include <algorithm>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "binary_io.h"
#include "seqdx/error.h"

namespace seqdx {

namespace {

constexpr char kMagic[] = "MODL";
constexpr char kDualHeader[] = "seqdx-dual-policy 1";

std::string encode_meta(const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw std::invalid_argument("metadata entry '" + k + "' cannot be stored");
    }
    out += k + "=" + v + "\n";
  }
  return out;
}

Metadata decode_meta(const std::string& text, const std::string& what) {
  Metadata meta;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw FormatError(what + ": bad metadata line '" + line + "'");
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

Metadata net_meta(const std::string& kind, const MlpParams& p, const Metadata& extra) {
  Metadata m = extra;
  m["kind"] = kind;
  m["d_in"] = std::to_string(p.d_in());
  m["hidden"] = std::to_string(p.hidden());
  m["d_out"] = std::to_string(p.d_out());
  if (!m.count("seed")) m["seed"] = "0";
  return m;
}

MlpParams net_of(const Checkpoint& c, const std::string& what) {
  const std::size_t d_in = c.get_size("d_in"), hidden = c.get_size("hidden"), d_out = c.get_size("d_out");
  const std::size_t expected = hidden * (d_in + 1) + d_out * (hidden + 1);
  if (c.params.size() != expected) {
    throw FormatError(what + ": " + std::to_string(c.params.size()) + " parameters for shape (" +
                      std::to_string(d_in) + ", " + std::to_string(hidden) + ", " + std::to_string(d_out) +
                      "), expected " + std::to_string(expected));
  }
  return MlpParams(d_in, hidden, d_out, c.params);
}

Checkpoint policy_checkpoint(const PolicyParams& p, const Metadata& extra) {
  Checkpoint c;
  if (p.uniform) {
    c.meta = extra;
    c.meta["kind"] = "policy";
    c.meta["uniform"] = "1";
    c.meta["cols"] = std::to_string(p.cols);
    c.meta["d_in"] = "0";
    c.meta["hidden"] = "0";
    c.meta["d_out"] = std::to_string(p.cols);
    if (!c.meta.count("seed")) c.meta["seed"] = "0";
    return c;
  }
  c.meta = net_meta("policy", p.net, extra);
  c.meta["uniform"] = "0";
  c.meta["cols"] = std::to_string(p.cols);
  c.meta["input"] = to_string(p.input);
  c.params.assign(p.net.flat().begin(), p.net.flat().end());
  return c;
}

PolicyParams policy_of(const Checkpoint& c, const std::string& what) {
  if (c.get("kind") != "policy") {
    throw IncompatibleError(what + " holds a '" + c.get("kind") + "' model, not a policy");
  }
  const std::string& uniform = c.get("uniform");
  if (uniform == "1") {
    if (!c.params.empty()) throw FormatError(what + ": uniform policy with parameters");
    return PolicyParams::uniform_policy(c.get_size("cols"));
  }
  if (uniform != "0") throw FormatError(what + ": bad 'uniform' value");
  PolicyParams p;
  p.net = net_of(c, what);
  p.cols = c.get_size("cols");
  if (p.cols != p.net.d_out()) throw FormatError(what + ": cols disagrees with d_out");
  try {
    p.input = parse_policy_input(c.get("input"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(what + ": " + e.what());
  }
  return p;
}

}  // namespace

const std::string& Checkpoint::get(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint metadata lacks '" + key + "'");
  return it->second;
}

std::size_t Checkpoint::get_size(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw FormatError("checkpoint metadata '" + key + "' is not a count");
  return static_cast<std::size_t>(n);
}

std::vector<char> encode_checkpoint(const Checkpoint& c) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u8(kCheckpointVersion);
  const std::string meta = encode_meta(c.meta);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);
  w.u64(c.params.size());
  for (double v : c.params) w.f64(v);
  return w.buffer();
}

Checkpoint decode_checkpoint(std::vector<char> bytes, const std::string& what) {
  io::ByteReader r(std::move(bytes), what);
  if (r.bytes(4) != kMagic) throw FormatError(what + ": not a MODL checkpoint (bad magic)");
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    throw FormatError(what + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  const std::uint32_t meta_len = r.u32();
  c.meta = decode_meta(r.bytes(meta_len), what);
  const std::uint64_t count = r.u64();
  if (count > r.remaining() / 8) {
    throw FormatError(what + ": truncated (" + std::to_string(count) + " parameters declared)");
  }
  c.params.resize(count);
  for (double& v : c.params) v = r.f64();
  if (r.remaining() != 0) throw FormatError(what + ": " + std::to_string(r.remaining()) + " trailing bytes");
  c.get("kind");
  return c;
}

void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(c));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path), path.string());
}

void save_classifier(const MlpParams& params, const std::string& kind, const Metadata& extra,
                     const std::filesystem::path& path) {
  if (kind != "classifier-disease" && kind != "classifier-severity") {
    throw std::invalid_argument("unknown classifier kind '" + kind + "'");
  }
  if (params.d_out() != 2) throw std::invalid_argument("classifier must have 2 outputs");
  Checkpoint c;
  c.meta = net_meta(kind, params, extra);
  c.params.assign(params.flat().begin(), params.flat().end());
  write_checkpoint(c, path);
}

MlpParams load_classifier(const std::filesystem::path& path, const std::string& kind) {
  const Checkpoint c = read_checkpoint(path);
  if (c.get("kind") != kind) {
    throw IncompatibleError(path.string() + " holds a '" + c.get("kind") + "' model, expected '" + kind + "'");
  }
  MlpParams p = net_of(c, path.string());
  if (p.d_out() != 2) throw IncompatibleError(path.string() + ": classifier must have 2 outputs");
  return p;
}

void save_policy_bundle(const PolicyBundle& bundle, const Metadata& extra,
                        const std::filesystem::path& path) {
  if (bundle.kind != PolicyBundle::Kind::kDual) {
    PolicyParams p = bundle.single;
    if (bundle.kind == PolicyBundle::Kind::kRandom) p = PolicyParams::uniform_policy(bundle.single.cols);
    write_checkpoint(policy_checkpoint(p, extra), path);
    return;
  }
  bundle.dual.check();
  const std::string stem = path.stem().string();
  const std::string d_name = stem + ".disease.modl", s_name = stem + ".severity.modl";
  Metadata d_meta = extra, s_meta = extra;
  d_meta["member"] = "disease";
  s_meta["member"] = "severity";
  write_checkpoint(policy_checkpoint(bundle.dual.disease_policy, d_meta), path.parent_path() / d_name);
  write_checkpoint(policy_checkpoint(bundle.dual.severity_policy, s_meta), path.parent_path() / s_name);
  io::write_text(path, std::string(kDualHeader) + "\ndisease=" + d_name + "\nseverity=" + s_name + "\n");
}

PolicyBundle load_policy_bundle(const std::filesystem::path& path) {
  std::vector<char> bytes = io::read_file(path);
  PolicyBundle b;
  const std::string head(bytes.begin(), bytes.begin() + std::min<std::size_t>(bytes.size(), 4));
  if (head == kMagic) {
    b.single = policy_of(decode_checkpoint(std::move(bytes), path.string()), path.string());
    b.kind = b.single.uniform ? PolicyBundle::Kind::kRandom : PolicyBundle::Kind::kSingle;
    return b;
  }
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  if (!std::getline(in, line) || line != kDualHeader) {
    throw FormatError(path.string() + ": neither a MODL checkpoint nor a dual-policy manifest");
  }
  const Metadata files = decode_meta(std::string(std::istreambuf_iterator<char>(in), {}), path.string());
  auto member = [&](const std::string& key) {
    auto it = files.find(key);
    if (it == files.end()) throw FormatError(path.string() + ": dual manifest lacks '" + key + "'");
    const std::filesystem::path p = path.parent_path() / it->second;
    return policy_of(read_checkpoint(p), p.string());
  };
  b.kind = PolicyBundle::Kind::kDual;
  b.dual = {member("disease"), member("severity")};
  b.dual.check();
  return b;
}

void check_compatible(const PolicyBundle& bundle, const MlpParams& f_d, const MlpParams& f_s,
                      std::size_t rows, std::size_t cols, std::size_t pool) {
  ClassifierPair{&f_d, &f_s, pool}.check();
  if (pool == 0 || rows % pool != 0 || cols % pool != 0 || (rows / pool) * (cols / pool) != f_d.d_in()) {
    throw IncompatibleError("classifiers expect " + std::to_string(f_d.d_in()) + " inputs, data is " +
                            std::to_string(rows) + "x" + std::to_string(cols) + " pooled by " +
                            std::to_string(pool));
  }
  if (bundle.cols() != cols) {
    throw IncompatibleError("policy acts on " + std::to_string(bundle.cols()) + " lines, data has " +
                            std::to_string(cols));
  }
  if (bundle.kind == PolicyBundle::Kind::kRandom) return;
  const std::size_t want =
      bundle.input() == PolicyInput::kFeatures ? f_d.hidden() + f_s.hidden() : f_d.d_in();
  if (bundle.obs_dim() != want) {
    throw IncompatibleError("policy expects " + std::to_string(bundle.obs_dim()) +
                            "-dim observations, classifiers give " + std::to_string(want));
  }
}

}  // namespace seqdx
