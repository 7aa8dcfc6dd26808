#include "sdsp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "sdsp/errors.hpp"
#include "sdsp/parallel.hpp"
#include "sdsp/random.hpp"
#include "sdsp/sources.hpp"
#include "sdsp/wav.hpp"

namespace sdsp {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string frame_id(std::size_t scene, std::size_t frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%05zu_f%03zu", scene, frame);
  return buf;
}

std::string scene_stem(std::size_t scene) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", scene);
  return buf;
}

json record_to_json(const FrameRecord& r) {
  json j = {{"id", r.id},
            {"class", to_string(r.cls)},
            {"siren_kind", to_string(r.siren_kind)},
            {"snr_db", r.snr_db},
            {"alpha_deg", r.alpha_deg},
            {"seed", r.seed},
            {"scene", r.scene},
            {"frame", r.frame},
            {"offset", r.offset},
            {"length", r.length},
            {"files", {{"mixed", r.mixed}, {"clean", r.clean}, {"noise", r.noise}}}};
  if (!r.split.empty()) j["split"] = r.split;
  if (!r.features.empty()) j["features"] = r.features;
  return j;
}

FrameRecord record_from_json(const json& j) {
  FrameRecord r;
  r.id = j.at("id").get<std::string>();
  r.cls = parse_sound_class(j.at("class").get<std::string>());
  r.siren_kind = parse_siren_kind(j.value("siren_kind", std::string("none")));
  r.snr_db = j.at("snr_db").get<double>();
  r.alpha_deg = j.at("alpha_deg").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scene = j.at("scene").get<std::size_t>();
  r.frame = j.at("frame").get<std::size_t>();
  r.offset = j.at("offset").get<std::size_t>();
  r.length = j.at("length").get<std::size_t>();
  const auto& files = j.at("files");
  r.mixed = files.at("mixed").get<std::string>();
  r.clean = files.at("clean").get<std::string>();
  r.noise = files.at("noise").get<std::string>();
  r.split = j.value("split", std::string());
  if (j.contains("features")) r.features = j.at("features").get<std::map<std::string, std::string>>();
  return r;
}

json source_to_json(const SourceRef& s) {
  if (!s.file.empty()) return {{"file", s.file}};
  json j = {{"generator", s.generator}};
  if (s.duration > 0.0) j["duration"] = s.duration;
  return j;
}

SourceRef source_from_json(const json& j) {
  SourceRef s;
  s.file = j.value("file", std::string());
  s.generator = j.value("generator", std::string());
  s.duration = j.value("duration", 0.0);
  if (s.file.empty() == s.generator.empty()) throw ValidationError("source needs exactly one of 'file' or 'generator'");
  return s;
}

json entry_to_json(const SceneSpecEntry& e) {
  json wps = json::array();
  for (const auto& w : e.trajectory.waypoints)
    wps.push_back({{"time", w.time}, {"alpha", w.alpha_deg}, {"distance", w.distance}});
  json echoes = json::array();
  for (const auto& ec : e.echoes) echoes.push_back({{"delay", ec.delay}, {"gain", ec.gain}});
  return {{"class", to_string(e.target_class)},
          {"siren_kind", to_string(e.siren_kind)},
          {"target", source_to_json(e.target)},
          {"noise", source_to_json(e.noise)},
          {"snr_db", e.snr_db},
          {"trajectory", {{"velocity", e.trajectory.velocity}, {"waypoints", wps}}},
          {"echoes", echoes},
          {"ild_db", e.ild_perturbation_db},
          {"seed", e.seed}};
}

SceneSpecEntry entry_from_json(const json& j) {
  SceneSpecEntry e;
  e.target_class = parse_sound_class(j.at("class").get<std::string>());
  e.siren_kind = parse_siren_kind(j.value("siren_kind", std::string("none")));
  e.target = source_from_json(j.at("target"));
  e.noise = source_from_json(j.at("noise"));
  e.snr_db = j.at("snr_db").get<double>();
  const auto& t = j.at("trajectory");
  e.trajectory.velocity = t.value("velocity", 0.0);
  for (const auto& w : t.at("waypoints"))
    e.trajectory.waypoints.push_back(
        {w.at("time").get<double>(), w.at("alpha").get<double>(), w.at("distance").get<double>()});
  if (j.contains("echoes"))
    for (const auto& ec : j.at("echoes")) e.echoes.push_back({ec.at("delay").get<double>(), ec.at("gain").get<double>()});
  e.ild_perturbation_db = j.value("ild_db", 0.0);
  e.seed = j.value("seed", std::uint64_t{0});
  return e;
}

AudioBuffer load_source(const SourceRef& src, const fs::path& base_dir, double fs_rate, double fallback_duration,
                        std::uint64_t seed) {
  if (!src.file.empty()) {
    const fs::path p = base_dir / src.file;
    if (!fs::exists(p)) throw IoError("file '" + p.string() + "' not found");
    return read_wav(p, {fs_rate, false});
  }
  const double duration = src.duration > 0.0 ? src.duration : fallback_duration;
  return synth_by_name(src.generator, duration, fs_rate, seed);
}

// Trims the noise gain until the SNR measured on the PCM16 clean and noise
// tracks equals the recorded one, then rebuilds the mixture.
void match_stored_snr(SceneRecord& rec) {
  const AudioBuffer clean = quantize_pcm16(rec.clean_target_stereo);
  if (!(clean.power() > 0.0)) return;
  for (int it = 0; it < 8; ++it) {
    const AudioBuffer noise = quantize_pcm16(rec.noise_used);
    if (!(noise.power() > 0.0)) return;
    const double got = measure_snr_db(clean, noise);
    if (std::abs(got - rec.snr_db) <= 1e-9) break;
    rec.noise_used.scale(std::pow(10.0, (got - rec.snr_db) / 20.0));
  }
  for (std::size_t c = 0; c < rec.mixed.num_channels(); ++c) {
    const auto t = rec.clean_target_stereo.channel(c);
    const auto n = rec.noise_used.channel(c);
    auto m = rec.mixed.channel(c);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = t[k] + n[k];
  }
}

}  // namespace

const FrameRecord* Manifest::find(const std::string& id) const {
  const auto it = std::find_if(records.begin(), records.end(), [&](const FrameRecord& r) { return r.id == id; });
  return it == records.end() ? nullptr : &*it;
}

std::string serialize_manifest(const Manifest& m) {
  json recs = json::array();
  for (const auto& r : m.records) recs.push_back(record_to_json(r));
  json j = {{"schema_version", std::to_string(m.version_major) + "." + std::to_string(m.version_minor)},
            {"sample_rate", m.sample_rate},
            {"frame_length", m.frame_length},
            {"attributes", m.attributes},
            {"records", recs}};
  return j.dump(1) + "\n";
}

Manifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    Manifest m;
    const auto version = j.at("schema_version").get<std::string>();
    int major = 0, minor = 0;
    if (std::sscanf(version.c_str(), "%d.%d", &major, &minor) != 2)
      throw FormatError("malformed manifest schema_version '" + version + "'");
    if (major > kManifestMajor)
      throw FormatError("manifest schema " + version + " is newer than supported " +
                        std::to_string(kManifestMajor) + ".x");
    m.version_major = major;
    m.version_minor = minor;
    m.sample_rate = j.at("sample_rate").get<double>();
    m.frame_length = j.at("frame_length").get<double>();
    if (j.contains("attributes")) m.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    for (const auto& r : j.at("records")) m.records.push_back(record_from_json(r));
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest schema mismatch: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("manifest schema mismatch: ") + e.what());
  }
}

Manifest read_manifest(const fs::path& path) { return parse_manifest(read_text(path)); }

void write_manifest(const fs::path& path, const Manifest& m) { write_text(path, serialize_manifest(m)); }

SpecFile read_spec_file(const fs::path& path) {
  SpecFile out;
  out.base_dir = path.parent_path();
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ValidationError("spec file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("specs") || !j.at("specs").is_array()) throw ValidationError("spec file has no 'specs' array");
  std::size_t i = 0;
  for (const auto& s : j.at("specs")) {
    try {
      out.entries.push_back(entry_from_json(s));
    } catch (const std::exception& e) {
      throw ValidationError("spec " + std::to_string(i) + ": " + e.what());
    }
    ++i;
  }
  return out;
}

void write_spec_file(const fs::path& path, const std::vector<SceneSpecEntry>& entries) {
  json specs = json::array();
  for (const auto& e : entries) specs.push_back(entry_to_json(e));
  write_text(path, json{{"version", 1}, {"specs", specs}}.dump(1) + "\n");
}

void check_spec_sources(const SpecFile& specs) {
  static const std::vector<std::string> known = {"siren-yelp", "siren-wail", "siren-hilow",
                                                 "horn", "other", "traffic-noise"};
  for (std::size_t i = 0; i < specs.entries.size(); ++i) {
    const auto& e = specs.entries[i];
    for (const auto* src : {&e.target, &e.noise}) {
      const char* role = src == &e.target ? "target" : "noise";
      if (!src->file.empty()) {
        if (!fs::exists(specs.base_dir / src->file))
          throw IoError("spec " + std::to_string(i) + ": " + role + " file '" + src->file + "' not found");
      } else if (std::find(known.begin(), known.end(), src->generator) == known.end()) {
        throw ValidationError("spec " + std::to_string(i) + ": unknown " + role + " generator '" + src->generator + "'");
      }
    }
  }
}

SceneSpec materialize_spec(const SceneSpecEntry& entry, const fs::path& base_dir, double sample_rate,
                           std::optional<std::uint64_t> seed_override) {
  SceneSpec s;
  s.target_class = entry.target_class;
  s.siren_kind = entry.siren_kind;
  s.snr_db = entry.snr_db;
  s.trajectory = entry.trajectory;
  s.echoes = entry.echoes;
  s.ild_perturbation_db = entry.ild_perturbation_db;
  s.seed = seed_override.value_or(entry.seed);
  const double traj_len = entry.trajectory.end_time();
  s.target_clip = load_source(entry.target, base_dir, sample_rate, traj_len, mix_seed(s.seed, 1));
  if (s.target_clip.num_channels() != 1) throw ValidationError("target clip must be mono");
  s.noise_clip = load_source(entry.noise, base_dir, sample_rate, s.target_clip.duration(), mix_seed(s.seed, 2));
  if (s.noise_clip.num_channels() != 2) throw ValidationError("noise clip must be stereo");
  return s;
}

std::vector<SceneSpecEntry> make_balanced_specs(const SpecGenOptions& opts) {
  if (!(opts.duration > 0.0)) throw ArgumentError("spec duration must be positive");
  Rng rng(mix_seed(opts.seed, 0x5BEC));
  const int n_classes = opts.with_other ? 3 : 2;
  std::vector<SceneSpecEntry> out;
  std::size_t sirens = 0;
  for (std::size_t i = 0; i < opts.count; ++i) {
    SceneSpecEntry e;
    e.seed = mix_seed(opts.seed, i);
    e.target_class = static_cast<SoundClass>(static_cast<int>(i % static_cast<std::size_t>(n_classes)));
    switch (e.target_class) {
      case SoundClass::Siren: {
        static const SirenKind kinds[] = {SirenKind::Yelp, SirenKind::Wail, SirenKind::HiLow};
        e.siren_kind = kinds[sirens++ % 3];
        e.target.generator = "siren-" + to_string(e.siren_kind);
        break;
      }
      case SoundClass::Horn: e.target.generator = "horn"; break;
      case SoundClass::Other: e.target.generator = "other"; break;
    }
    e.target.duration = opts.duration;
    e.noise.generator = "traffic-noise";
    e.noise.duration = opts.duration;
    e.snr_db = rng.uniform(opts.snr_min_db, opts.snr_max_db);

    const double a0 = rng.uniform(0.0, 180.0);
    const double r0 = rng.uniform(8.0, 50.0);
    if (opts.static_sources) {
      e.trajectory = Trajectory::stationary(a0, r0, opts.duration);
    } else if (opts.drive_by) {
      const double v = rng.uniform(5.0, 15.0);
      const double lane = rng.uniform(10.0, 40.0);
      const double x_end = rng.uniform(10.0, 40.0);
      const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
      e.trajectory.velocity = v;
      const auto steps = static_cast<std::size_t>(std::ceil(opts.duration));
      for (std::size_t s = 0; s <= steps; ++s) {
        const double t = std::min(static_cast<double>(s), opts.duration);
        const double x = side * (x_end + v * (opts.duration - t));
        e.trajectory.waypoints.push_back({t, std::atan2(lane, x) * 180.0 / std::numbers::pi, std::hypot(x, lane)});
      }
    } else {
      const double v = rng.uniform(3.0, 20.0);
      const double sweep = rng.uniform(-30.0, 30.0);
      const double a1 = std::clamp(a0 + sweep, 0.0, 180.0);
      const double dr = v * opts.duration * rng.uniform(0.2, 0.9) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      const double r1 = std::max(3.0, r0 + dr);
      e.trajectory.velocity = v;
      e.trajectory.waypoints = {{0.0, a0, r0}, {opts.duration, a1, r1}};
    }
    const std::size_t n_echoes = opts.max_echoes == 0 ? 0 : rng.index(opts.max_echoes + 1);
    for (std::size_t k = 0; k < n_echoes; ++k)
      e.echoes.push_back({rng.uniform(0.008, 0.05), rng.uniform(0.1, 0.5)});
    e.ild_perturbation_db = rng.uniform(0.0, opts.max_ild_db);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<FrameRecord> frame_records(const SceneRecord& rec, std::size_t scene_index, double frame_length,
                                       const std::string& audio_prefix) {
  const double fs = rec.mixed.sample_rate();
  const auto frame_len = static_cast<std::size_t>(std::lround(frame_length * fs));
  std::vector<FrameRecord> out;
  for (std::size_t k = 0; k < rec.alpha_per_frame.size(); ++k) {
    FrameRecord r;
    r.id = frame_id(scene_index, k);
    r.cls = rec.class_label;
    r.siren_kind = rec.siren_kind;
    r.snr_db = rec.snr_db;
    r.alpha_deg = rec.alpha_per_frame[k];
    r.seed = rec.seed;
    r.scene = scene_index;
    r.frame = k;
    r.offset = k * frame_len;
    r.length = frame_len;
    r.mixed = audio_prefix + "_mixed.wav";
    r.clean = audio_prefix + "_clean.wav";
    r.noise = audio_prefix + "_noise.wav";
    out.push_back(std::move(r));
  }
  return out;
}

Manifest generate_dataset(std::size_t count, const std::function<SceneSpec(std::size_t)>& spec_at,
                          const DatasetOptions& opts) {
  fs::create_directories(opts.out_dir / "audio");
  std::vector<std::vector<FrameRecord>> per_scene(count);
  std::vector<std::exception_ptr> errors(count);
  double sample_rate = 0.0;

  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long li = 0; li < n; ++li) {
    const auto i = static_cast<std::size_t>(li);
    try {
      SceneRecord rec = synthesize_scene(spec_at(i), opts.scene);
      const double peak = std::max({rec.mixed.peak(), rec.clean_target_stereo.peak(), rec.noise_used.peak()});
      if (peak > 0.0) {
        const double g = opts.peak_level / peak;
        rec.mixed.scale(g);
        rec.clean_target_stereo.scale(g);
        rec.noise_used.scale(g);
      }
      match_stored_snr(rec);
      const std::string prefix = "audio/" + scene_stem(i);
      write_wav(opts.out_dir / (prefix + "_mixed.wav"), rec.mixed);
      write_wav(opts.out_dir / (prefix + "_clean.wav"), rec.clean_target_stereo);
      write_wav(opts.out_dir / (prefix + "_noise.wav"), rec.noise_used);
      per_scene[i] = frame_records(rec, i, opts.scene.frame_length, prefix);
#pragma omp critical(sdsp_dataset_rate)
      sample_rate = rec.mixed.sample_rate();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const IoError& e) {
      throw IoError("spec " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("spec " + std::to_string(i) + ": " + e.what());
    }
  }

  Manifest m;
  m.sample_rate = sample_rate > 0.0 ? sample_rate : kDefaultSampleRate;
  m.frame_length = opts.scene.frame_length;
  for (auto& recs : per_scene)
    for (auto& r : recs) m.records.push_back(std::move(r));
  write_manifest(opts.out_dir / "manifest.json", m);
  return m;
}

Manifest generate_dataset(const std::vector<SceneSpec>& specs, const DatasetOptions& opts) {
  return generate_dataset(specs.size(), [&](std::size_t i) { return specs[i]; }, opts);
}

}  // namespace sdsp
