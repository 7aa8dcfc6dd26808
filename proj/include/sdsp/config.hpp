#pragma once

// Run configuration: a small TOML-style document with [section] headers,
// `key = value` lines (numbers, booleans, "strings") and # comments.
//
//   [filterbank]    n_channels f_low f_high sample_rate filter_order ir_duration
//   [gammatonegram] frame_length hop window_span window floor_db
//   [geometry]      spacing speed_of_sound
//   [scene]         snr_min_db snr_max_db peak_level
//   [masking]       threshold_db
//   [paths]         specs data features predictions
//   [run]           seed threads train_fraction median_order
//
// Unknown sections or keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>

#include "sdsp/gammatone.hpp"
#include "sdsp/geometry.hpp"

namespace sdsp {

struct PathsConfig {
  std::string specs;
  std::string data;
  std::string features;
  std::string predictions;

  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

struct RunConfig {
  FilterbankConfig filterbank;
  GammatonegramConfig gammatonegram;
  MicGeometry geometry;
  double snr_min_db = -40.0;
  double snr_max_db = 10.0;
  double peak_level = 0.9;
  double mask_threshold_db = 0.0;
  PathsConfig paths;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: no cap beyond SDSP_THREADS
  double train_fraction = 0.9;
  int median_order = 1;

  /// Throws ConfigError on any invalid value.
  void validate() const;

  /// Canonical `section.key=value` listing of every setting that affects
  /// computed features, in fixed order.
  std::string feature_canonical() const;
  /// FNV-1a 64 of feature_canonical(), as 16 lowercase hex digits.
  std::string feature_hash() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError with the line number on malformed text, unknown keys or
/// invalid values.
RunConfig parse_run_config(const std::string& text);
RunConfig read_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace sdsp
