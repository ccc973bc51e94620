#include "rpeak/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "rpeak/error.hpp"

namespace rpeak {

bool is_intensity_class(const std::string& name) {
  return std::any_of(std::begin(kIntensityClasses), std::end(kIntensityClasses),
                     [&](const char* c) { return name == c; });
}

std::string ManifestEntry::subject() const { return id.substr(0, id.find('_')); }

std::filesystem::path SegmentManifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string to_hex(const unsigned char* data, unsigned len) {
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
  return os.str();
}

}  // namespace

SegmentManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  SegmentManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 4 && f.size() != 6) {
      throw FormatError(path.string() + ":" + std::to_string(row) + ": expected id,class,path,checksum");
    }
    if (!is_intensity_class(f[1])) {
      throw FormatError(path.string() + ":" + std::to_string(row) + ": unknown intensity class '" + f[1] + "'");
    }
    ManifestEntry e{f[0], f[1], f[2], f[3], {}, {}};
    if (f.size() == 6) {
      e.annotation_path = f[4];
      e.annotation_sha256 = f[5];
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const SegmentManifest& manifest) {
  std::ostringstream os;
  os << "# id,class,path,sha256,annotation_path,annotation_sha256\n";
  for (const auto& e : manifest.entries) {
    os << e.id << ',' << e.segment_class << ',' << e.path.generic_string() << ',' << e.sha256;
    if (!e.annotation_path.empty()) os << ',' << e.annotation_path.generic_string() << ',' << e.annotation_sha256;
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

std::string sha256_bytes(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IntegrityError("SHA-256 computation failed");
  }
  return to_hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IntegrityError("SHA-256 init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  return to_hex(md.data(), len);
}

void verify_manifest(const SegmentManifest& manifest) {
  for (const auto& e : manifest.entries) {
    const auto p = manifest.resolve(e.path);
    if (!std::filesystem::exists(p)) throw IntegrityError(e.id + ": missing file " + p.string());
    if (sha256_file(p) != e.sha256) throw IntegrityError(e.id + ": checksum mismatch for " + p.string());
    if (!e.annotation_path.empty()) {
      const auto a = manifest.resolve(e.annotation_path);
      if (!std::filesystem::exists(a)) throw IntegrityError(e.id + ": missing file " + a.string());
      if (sha256_file(a) != e.annotation_sha256) throw IntegrityError(e.id + ": checksum mismatch for " + a.string());
    }
  }
}

std::vector<std::pair<std::string, FixtureScenario>> fixture_plan() {
  struct Subject {
    const char* id;
    double hr;
    std::uint64_t seed;
  };
  constexpr std::array<Subject, 4> subjects{{{"S1", 150, 101}, {"S2", 160, 202}, {"S3", 140, 303}, {"S4", 170, 404}}};

  std::vector<std::pair<std::string, FixtureScenario>> plan;
  for (const auto& s : subjects) {
    SynthesisSpec base;
    base.duration_s = 25.0;
    base.fs = kCanonicalFs;
    base.noise_sd_uv = 8.0;
    base.baseline_wander_uv = 120.0;
    base.rr_jitter_s = 0.008;
    base.seed = s.seed;

    auto stationary = base;
    stationary.hr_bpm = PiecewiseLinear::constant(s.hr);
    plan.push_back({s.id, {"stationary", "before_VT2", stationary}});

    auto ramp = base;
    ramp.hr_bpm = PiecewiseLinear({{0.0, s.hr - 25}, {25.0, s.hr + 15}});
    ramp.seed = s.seed + 1;
    plan.push_back({s.id, {"hr_ramp", "after_VT2", ramp}});

    auto step = base;
    step.hr_bpm = PiecewiseLinear::constant(s.hr + 10);
    step.amplitude = PiecewiseLinear({{12.0, 1.0}, {12.001, 0.4}});
    step.amplitude_scope = AmplitudeScope::whole_beat;
    step.beat_pattern = {1.0, 0.85, 0.95, 0.75};
    step.seed = s.seed + 2;
    plan.push_back({s.id, {"amp_step", "before_VO2max", step}});

    auto burst = base;
    burst.hr_bpm = PiecewiseLinear::constant(std::min(s.hr + 20, 190.0));
    burst.bursts = {{8.0, 1.5, 60.0}, {17.0, 1.0, 100.0}};
    burst.beat_pattern = {1.0, 0.8, 0.9, 0.6};
    burst.seed = s.seed + 3;
    plan.push_back({s.id, {"noisy_burst", "VO2max", burst}});

    auto dom_t = base;
    dom_t.hr_bpm = PiecewiseLinear({{0.0, s.hr - 10}, {25.0, s.hr - 40}});
    dom_t.t_wave_gain = 1.5;
    dom_t.seed = s.seed + 4;
    plan.push_back({s.id, {"dominant_t", "recovery", dom_t}});
  }
  return plan;
}

SegmentManifest prepare_fixtures(const std::filesystem::path& dest) {
  std::filesystem::create_directories(dest);
  SegmentManifest m;
  m.base_dir = dest;
  for (const auto& [subject, sc] : fixture_plan()) {
    const auto syn = synthesize_ecg(sc.spec);
    const std::string id = subject + "_" + sc.name;
    auto rec = syn.record;
    rec.label = id;
    const std::filesystem::path ecg = id + ".csv";
    const std::filesystem::path ann = id + ".ann";
    save_ecg(dest / ecg, rec);
    save_annotations(dest / ann, syn.truth, rec.fs);
    m.entries.push_back({id, sc.segment_class, ecg, sha256_file(dest / ecg), ann, sha256_file(dest / ann)});
  }
  save_manifest(dest / "manifest.csv", m);
  return m;
}

}  // namespace rpeak
