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

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "seqdx/error.h"
#include "test_util.h"

namespace seqdx {
namespace {

using testing::random_mlp;
using testing::TempDir;

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(Checkpoint, EncodeDecodeIsBitExact) {
  Checkpoint c;
  c.meta = {{"kind", "policy"}, {"d_in", "3"}, {"note", "a b=c"}};
  c.params = {0.1, -0.0, std::numeric_limits<double>::denorm_min(), 1e308, -3.25};
  const std::vector<char> bytes = encode_checkpoint(c);
  ASSERT_GE(bytes.size(), 4u);
  EXPECT_EQ(std::string(bytes.data(), 4), "MODL");
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[4]), kCheckpointVersion);
  const Checkpoint d = decode_checkpoint(bytes, "mem");
  EXPECT_EQ(d.meta, c.meta);
  EXPECT_TRUE(bit_equal(d.params, c.params));
  EXPECT_EQ(d.get("note"), "a b=c");
  EXPECT_EQ(d.get_size("d_in"), 3u);
  EXPECT_THROW(d.get("missing"), FormatError);
  EXPECT_THROW(d.get_size("kind"), FormatError);
}

TEST(Checkpoint, RejectsCorruptBytes) {
  Checkpoint c;
  c.meta = {{"kind", "policy"}};
  c.params = {1.0, 2.0};
  const std::vector<char> good = encode_checkpoint(c);
  std::vector<char> bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad, "m"), FormatError);
  bad = good;
  bad[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad, "m"), FormatError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{7}, good.size() - 1}) {
    EXPECT_THROW(decode_checkpoint(std::vector<char>(good.begin(), good.begin() + static_cast<long>(cut)), "m"),
                 FormatError)
        << cut;
  }
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_checkpoint(bad, "m"), FormatError);
}

TEST(Checkpoint, ClassifierRoundTrip) {
  TempDir dir("ckpt_cls");
  Rng rng(90);
  const MlpParams p = random_mlp(64, 8, 2, rng);
  save_classifier(p, "classifier-disease", {{"pool", "2"}}, dir / "d.modl");
  const MlpParams q = load_classifier(dir / "d.modl", "classifier-disease");
  EXPECT_TRUE(p.same_shape(q));
  EXPECT_TRUE(bit_equal(p.flat(), q.flat()));
  EXPECT_EQ(read_checkpoint(dir / "d.modl").get("pool"), "2");
  EXPECT_THROW(load_classifier(dir / "d.modl", "classifier-severity"), IncompatibleError);
  EXPECT_THROW(save_classifier(p, "policy", {}, dir / "x.modl"), std::invalid_argument);
  EXPECT_THROW(load_classifier(dir / "absent.modl", "classifier-disease"), IoError);

  std::vector<char> bytes = slurp(dir / "d.modl");
  bytes.resize(bytes.size() - 8);
  spit(dir / "t.modl", bytes);
  EXPECT_THROW(load_classifier(dir / "t.modl", "classifier-disease"), FormatError);
}

TEST(Checkpoint, PolicyBundleRoundTrips) {
  TempDir dir("ckpt_pol");
  PolicyBundle single;
  single.kind = PolicyBundle::Kind::kSingle;
  single.single = PolicyParams::init(16, 12, 32, PolicyInput::kImage, 91);
  save_policy_bundle(single, {{"variant", "recon"}}, dir / "p.modl");
  const PolicyBundle s = load_policy_bundle(dir / "p.modl");
  EXPECT_EQ(s.kind, PolicyBundle::Kind::kSingle);
  EXPECT_EQ(s.single.input, PolicyInput::kImage);
  EXPECT_EQ(s.cols(), 32u);
  EXPECT_TRUE(bit_equal(s.single.net.flat(), single.single.net.flat()));

  PolicyBundle rnd;
  rnd.kind = PolicyBundle::Kind::kRandom;
  rnd.single = PolicyParams::uniform_policy(32);
  save_policy_bundle(rnd, {}, dir / "r.modl");
  const PolicyBundle r = load_policy_bundle(dir / "r.modl");
  EXPECT_EQ(r.kind, PolicyBundle::Kind::kRandom);
  EXPECT_TRUE(r.single.uniform);
  EXPECT_EQ(r.cols(), 32u);

  PolicyBundle dual;
  dual.kind = PolicyBundle::Kind::kDual;
  dual.dual = {PolicyParams::init(16, 12, 32, PolicyInput::kFeatures, 92),
               PolicyParams::init(16, 12, 32, PolicyInput::kFeatures, 93)};
  save_policy_bundle(dual, {}, dir / "v.modl");
  const PolicyBundle v = load_policy_bundle(dir / "v.modl");
  EXPECT_EQ(v.kind, PolicyBundle::Kind::kDual);
  EXPECT_TRUE(bit_equal(v.dual.disease_policy.net.flat(), dual.dual.disease_policy.net.flat()));
  EXPECT_TRUE(bit_equal(v.dual.severity_policy.net.flat(), dual.dual.severity_policy.net.flat()));

  std::filesystem::remove(dir / "v.severity.modl");
  EXPECT_ANY_THROW(load_policy_bundle(dir / "v.modl"));
  spit(dir / "junk.modl", {'h', 'e', 'l', 'l', 'o'});
  EXPECT_THROW(load_policy_bundle(dir / "junk.modl"), FormatError);
}

TEST(Checkpoint, Compatibility) {
  Rng rng(94);
  const MlpParams f_d = random_mlp(256, 32, 2, rng), f_s = random_mlp(256, 32, 2, rng);
  PolicyBundle b;
  b.kind = PolicyBundle::Kind::kSingle;
  b.single = PolicyParams::init(64, 8, 32, PolicyInput::kFeatures, 95);
  EXPECT_NO_THROW(check_compatible(b, f_d, f_s, 32, 32, 2));
  EXPECT_THROW(check_compatible(b, f_d, f_s, 32, 16, 2), IncompatibleError);
  EXPECT_THROW(check_compatible(b, f_d, f_s, 32, 32, 4), IncompatibleError);
  const MlpParams narrow = random_mlp(256, 16, 2, rng);
  EXPECT_THROW(check_compatible(b, f_d, narrow, 32, 32, 2), IncompatibleError);
  b.single = PolicyParams::init(60, 8, 32, PolicyInput::kFeatures, 96);
  EXPECT_THROW(check_compatible(b, f_d, f_s, 32, 32, 2), IncompatibleError);
  b.kind = PolicyBundle::Kind::kRandom;
  b.single = PolicyParams::uniform_policy(32);
  EXPECT_NO_THROW(check_compatible(b, f_d, f_s, 32, 32, 2));
}

}  // namespace
}  // namespace seqdx
