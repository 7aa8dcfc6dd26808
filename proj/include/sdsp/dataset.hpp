#pragma once

// On-disk datasets: scene spec files, frame-level manifests and the writer
// that turns specs into PCM audio plus ground truth.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdsp/scene.hpp"

namespace sdsp {

inline constexpr int kManifestMajor = 1;
inline constexpr int kManifestMinor = 0;

struct FrameRecord {
  std::string id;
  SoundClass cls = SoundClass::Other;
  SirenKind siren_kind = SirenKind::None;
  double snr_db = 0.0;
  double alpha_deg = 90.0;
  std::uint64_t seed = 0;
  std::size_t scene = 0;
  std::size_t frame = 0;
  std::size_t offset = 0;  // first sample of the frame inside the scene files
  std::size_t length = 0;  // samples
  std::string mixed;       // paths relative to the manifest
  std::string clean;
  std::string noise;
  std::string split;       // "train", "test" or empty
  std::map<std::string, std::string> features;  // feature kind -> container path

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct Manifest {
  int version_major = kManifestMajor;
  int version_minor = kManifestMinor;
  double sample_rate = 44100.0;
  double frame_length = 0.5;
  /// Free-form provenance (config hash, feature flags); written verbatim.
  std::map<std::string, std::string> attributes;
  std::vector<FrameRecord> records;

  const FrameRecord* find(const std::string& id) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Throws FormatError for malformed documents or a newer major version.
Manifest read_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& text);
std::string serialize_manifest(const Manifest& m);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

/// Where a clip comes from: a WAV file or a named procedural generator.
struct SourceRef {
  std::string file;       // relative to the spec file
  std::string generator;  // see synth_by_name
  double duration = 0.0;  // generator length, s

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

/// A scene spec as written in a spec file; audio is loaded on demand.
struct SceneSpecEntry {
  SoundClass target_class = SoundClass::Siren;
  SirenKind siren_kind = SirenKind::None;
  SourceRef target;
  SourceRef noise;
  double snr_db = 0.0;
  Trajectory trajectory;
  std::vector<Echo> echoes;
  double ild_perturbation_db = 0.0;
  std::uint64_t seed = 0;
};

struct SpecFile {
  std::filesystem::path base_dir;
  std::vector<SceneSpecEntry> entries;
};

/// Parses a spec file. Errors name the offending spec index.
SpecFile read_spec_file(const std::filesystem::path& path);
void write_spec_file(const std::filesystem::path& path, const std::vector<SceneSpecEntry>& entries);

/// Checks that every referenced file exists and every generator is known.
void check_spec_sources(const SpecFile& specs);

/// Loads the audio for one entry. `seed_override`, when set, replaces the
/// entry's seed (and hence every generator seed).
SceneSpec materialize_spec(const SceneSpecEntry& entry, const std::filesystem::path& base_dir,
                           double sample_rate, std::optional<std::uint64_t> seed_override = std::nullopt);

struct SpecGenOptions {
  std::size_t count = 30;
  double duration = 5.0;
  std::uint64_t seed = 1;
  double snr_min_db = -40.0;
  double snr_max_db = 10.0;
  bool static_sources = false;
  /// Moving sources approach along a straight lane past the array, with a
  /// waypoint every second, instead of a short two-point sweep.
  bool drive_by = false;
  bool with_other = true;        // include the non-alerting class
  double max_ild_db = 3.0;
  std::size_t max_echoes = 2;
};

/// Class-balanced random specs using the procedural generators.
std::vector<SceneSpecEntry> make_balanced_specs(const SpecGenOptions& opts);

struct DatasetOptions {
  std::filesystem::path out_dir;
  SceneOptions scene;
  /// Peak level the written audio is normalised to (common gain per scene).
  double peak_level = 0.9;
};

/// Synthesises `count` scenes from `spec_at(i)`, writes
/// audio/scene_NNNNN_{mixed,clean,noise}.wav and manifest.json under
/// out_dir, and returns the manifest. Output is byte-identical for identical
/// inputs regardless of thread count. Failures are rethrown as IoError or
/// ValidationError prefixed with "spec <i>".
Manifest generate_dataset(std::size_t count, const std::function<SceneSpec(std::size_t)>& spec_at,
                          const DatasetOptions& opts);
Manifest generate_dataset(const std::vector<SceneSpec>& specs, const DatasetOptions& opts);

/// Frame records for one synthesised scene (no files written).
std::vector<FrameRecord> frame_records(const SceneRecord& rec, std::size_t scene_index, double frame_length,
                                       const std::string& audio_prefix);

}  // namespace sdsp
