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

#include "seqdx/phantom.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "binary_io.h"
#include "seqdx/error.h"
#include "seqdx/random.h"

namespace seqdx {

void validate(const Subject& s) {
  if (s.disease != 0 && s.disease != 1) throw std::invalid_argument("disease label must be 0 or 1");
  if (s.disease == 0 && s.severity.has_value()) {
    throw std::invalid_argument("subject " + s.id + " has no finding but carries a severity label");
  }
  if (s.disease == 1 && (!s.severity.has_value() || (*s.severity != 0 && *s.severity != 1))) {
    throw std::invalid_argument("diseased subject " + s.id + " needs a severity label in {0, 1}");
  }
  if (s.image.rows() != s.kspace.rows() || s.image.cols() != s.kspace.cols()) {
    throw std::invalid_argument("image and k-space shapes differ");
  }
}

void GeneratorConfig::validate() const {
  if (rows == 0 || cols == 0) throw std::invalid_argument("rows and cols must be positive");
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw std::invalid_argument("split sizes must be positive");
  }
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  prob(p_diseased, "p_diseased");
  prob(p_high_given_diseased, "p_high_given_diseased");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise_std must be a non-negative finite number");
  }
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "' (expected train, val or test)");
}

namespace {

// Coverage of a pixel by a shape whose signed inside-distance is `d` pixels;
// a one-pixel linear ramp keeps edges from aliasing at this resolution.
double coverage(double d) { return std::clamp(d + 0.5, 0.0, 1.0); }

// Lesion bands; the gap between them keeps severity learnable.
struct Band {
  double radius_lo, radius_hi, contrast_lo, contrast_hi;
};
constexpr Band kLowBand{2.0, 2.6, 0.45, 0.55};
constexpr Band kHighBand{3.2, 4.0, 0.75, 0.9};

std::uint64_t split_id(const std::string& split) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : split) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

}  // namespace

Subject generate_subject(const GeneratorConfig& cfg, const std::string& split, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, {split_id(split), index}));
  const double scale = static_cast<double>(std::min(cfg.rows, cfg.cols)) / 32.0;

  Subject s;
  char id[64];
  std::snprintf(id, sizeof(id), "%s_%05zu", split.c_str(), index);
  s.id = id;
  s.disease = rng.bernoulli(cfg.p_diseased) ? 1 : 0;
  if (s.disease) s.severity = rng.bernoulli(cfg.p_high_given_diseased) ? 1 : 0;

  // Anatomy: a rotated ellipse with a smooth two-wave intensity texture.
  const double cx = static_cast<double>(cfg.cols) / 2.0 + rng.uniform(-1.0, 1.0) * scale;
  const double cy = static_cast<double>(cfg.rows) / 2.0 + rng.uniform(-1.0, 1.0) * scale;
  const double ax = rng.uniform(11.0, 13.0) * scale;
  const double ay = rng.uniform(9.0, 11.0) * scale;
  const double theta = rng.uniform(-0.2, 0.2);
  const double base = rng.uniform(0.45, 0.55);
  struct Wave { double kx, ky, phase, amp; };
  Wave waves[2];
  for (Wave& w : waves) {
    const double period = rng.uniform(10.0, 20.0) * scale;
    const double dir = rng.uniform(0.0, std::numbers::pi);
    w.kx = 2.0 * std::numbers::pi / period * std::cos(dir);
    w.ky = 2.0 * std::numbers::pi / period * std::sin(dir);
    w.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.amp = rng.uniform(0.02, 0.04);
  }

  // Lesion: a disc near a fixed anatomical site inside the ellipse.
  double lx = 0, ly = 0, lr = 0, lc = 0;
  if (s.disease) {
    const Band& band = *s.severity ? kHighBand : kLowBand;
    lr = rng.uniform(band.radius_lo, band.radius_hi) * scale;
    lc = rng.uniform(band.contrast_lo, band.contrast_hi);
    const double rho = 1.5 * scale * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    lx = cx + 2.0 * scale + rho * std::cos(phi);
    ly = cy - 1.0 * scale + rho * std::sin(phi);
  }

  const double ct = std::cos(theta), st = std::sin(theta);
  s.image = ComplexMatrix(cfg.rows, cfg.cols);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cfg.cols; ++c) {
      const double x = static_cast<double>(c) + 0.5, y = static_cast<double>(r) + 0.5;
      const double dx = x - cx, dy = y - cy;
      const double u = (ct * dx + st * dy) / ax, v = (-st * dx + ct * dy) / ay;
      const double rho = std::sqrt(u * u + v * v);
      const double inside = coverage((1.0 - rho) * std::min(ax, ay));
      double value = base;
      for (const Wave& w : waves) value += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
      value *= inside;
      if (s.disease) {
        const double d = lr - std::hypot(x - lx, y - ly);
        value += lc * coverage(d);
      }
      value += cfg.noise_std * rng.normal();
      s.image(r, c) = cplx(value, 0.0);
    }
  }
  s.kspace = dft2(s.image);
  return s;
}

DatasetManifest generate_dataset(const GeneratorConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directory(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string() +
                  (ec ? " (" + ec.message() + ")" : ""));
  }
  std::filesystem::create_directories(out_dir / "subjects", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "subjects").string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.config = cfg;
  const std::pair<Split, std::size_t> splits[] = {
      {Split::kTrain, cfg.n_train}, {Split::kVal, cfg.n_val}, {Split::kTest, cfg.n_test}};
  for (const auto& [split, count] : splits) {
    for (std::size_t i = 0; i < count; ++i) {
      const Subject s = generate_subject(cfg, to_string(split), i);
      const std::string rel = "subjects/" + s.id + ".kspc";
      write_subject(s, out_dir / rel);
      manifest.entries.push_back({split, rel});
    }
  }
  write_manifest(manifest, out_dir / "manifest.tsv");
  return manifest;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  const GeneratorConfig& c = manifest.config;
  std::ostringstream os;
  os << "# seqdx dataset manifest\n"
     << "# rows = " << c.rows << "\n"
     << "# cols = " << c.cols << "\n"
     << "# n_train = " << c.n_train << "\n"
     << "# n_val = " << c.n_val << "\n"
     << "# n_test = " << c.n_test << "\n"
     << "# p_diseased = " << format_double(c.p_diseased) << "\n"
     << "# p_high_given_diseased = " << format_double(c.p_high_given_diseased) << "\n"
     << "# noise_std = " << format_double(c.noise_std) << "\n"
     << "# seed = " << c.seed << "\n";
  for (const ManifestEntry& e : manifest.entries) os << to_string(e.split) << '\t' << e.path << '\n';
  io::write_text(path, os.str());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::vector<char> bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  DatasetManifest m;
  m.root = path.parent_path();
  std::map<std::string, std::string> echo;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t#");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      echo[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected <split>\\t<path>");
    }
    std::string rel = line.substr(tab + 1);
    if (!rel.empty() && rel.back() == '\r') rel.pop_back();
    try {
      m.entries.push_back({parse_split(line.substr(0, tab)), rel});
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    if (echo.count("rows")) m.config.rows = std::stoul(echo["rows"]);
    if (echo.count("cols")) m.config.cols = std::stoul(echo["cols"]);
    if (echo.count("n_train")) m.config.n_train = std::stoul(echo["n_train"]);
    if (echo.count("n_val")) m.config.n_val = std::stoul(echo["n_val"]);
    if (echo.count("n_test")) m.config.n_test = std::stoul(echo["n_test"]);
    if (echo.count("p_diseased")) m.config.p_diseased = std::stod(echo["p_diseased"]);
    if (echo.count("p_high_given_diseased")) {
      m.config.p_high_given_diseased = std::stod(echo["p_high_given_diseased"]);
    }
    if (echo.count("noise_std")) m.config.noise_std = std::stod(echo["noise_std"]);
    if (echo.count("seed")) m.config.seed = std::stoull(echo["seed"]);
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed config echo");
  }
  return m;
}

void write_subject(const Subject& s, const std::filesystem::path& path) {
  validate(s);
  io::ByteWriter w;
  w.bytes("KSPC");
  w.u8(0x01);
  w.u32(static_cast<std::uint32_t>(s.image.rows()));
  w.u32(static_cast<std::uint32_t>(s.image.cols()));
  w.u8(static_cast<std::uint8_t>(s.disease));
  w.u8(s.severity ? static_cast<std::uint8_t>(*s.severity) : 255);
  for (const ComplexMatrix* m : {&s.image, &s.kspace}) {
    for (const cplx& v : m->values()) {
      w.f64(v.real());
      w.f64(v.imag());
    }
  }
  io::write_file(path, w.buffer());
}

Subject read_subject(const std::filesystem::path& path) {
  const std::string what = "subject file " + path.string();
  io::ByteReader r(io::read_file(path), what);
  const std::string magic = r.bytes(4);
  if (magic != "KSPC") throw FormatError(what + ": bad magic (expected \"KSPC\")");
  const std::uint8_t version = r.u8();
  if (version != 0x01) throw FormatError(what + ": unsupported version " + std::to_string(version));
  const std::uint32_t rows = r.u32(), cols = r.u32();
  if (rows == 0 || cols == 0) throw FormatError(what + ": zero dimension");
  const std::uint8_t gd = r.u8(), gs = r.u8();
  if (gd > 1) throw FormatError(what + ": disease label byte " + std::to_string(gd) + " not in {0,1}");
  if (gs != 0 && gs != 1 && gs != 255) {
    throw FormatError(what + ": severity label byte " + std::to_string(gs) + " not in {0,1,255}");
  }
  if ((gd == 0) != (gs == 255)) {
    throw FormatError(what + ": severity must be 255 (N/A) exactly when disease is 0");
  }
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
  if (r.remaining() < n * 32) throw FormatError(what + ": truncated payload");
  Subject s;
  s.id = path.stem().string();
  s.disease = gd;
  if (gs != 255) s.severity = gs;
  for (ComplexMatrix* m : {&s.image, &s.kspace}) {
    std::vector<cplx> data(n);
    for (cplx& v : data) {
      const double re = r.f64();
      const double im = r.f64();
      v = cplx(re, im);
    }
    *m = ComplexMatrix(rows, cols, std::move(data));
  }
  if (r.remaining() != 0) throw FormatError(what + ": trailing bytes");
  return s;
}

std::vector<Subject> load_split(const DatasetManifest& manifest, Split split) {
  std::vector<Subject> out;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.split == split) out.push_back(read_subject(manifest.root / e.path));
  }
  return out;
}

}  // namespace seqdx
