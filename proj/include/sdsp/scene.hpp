#pragma once

// Synthetic labelled stereo scenes: a target sound moved along a trajectory,
// spatialised onto a two-microphone array, echoed, and mixed with traffic
// noise at a requested SNR.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdsp/audio.hpp"
#include "sdsp/geometry.hpp"

namespace sdsp {

enum class SoundClass { Siren = 0, Horn = 1, Other = 2 };
inline constexpr int kNumClasses = 3;

enum class SirenKind { None, Yelp, Wail, HiLow };

std::string to_string(SoundClass c);
std::string to_string(SirenKind k);
/// Accepts "siren", "horn", "other" (case-insensitive). Throws ValidationError.
SoundClass parse_sound_class(const std::string& s);
SirenKind parse_siren_kind(const std::string& s);
/// Siren and Horn are localised; Other is not.
inline bool is_alerting(SoundClass c) { return c != SoundClass::Other; }

struct Waypoint {
  double time = 0.0;       // s
  double alpha_deg = 90.0;  // direction of arrival
  double distance = 10.0;   // m, to the array midpoint
};

/// Source path. alpha and distance vary linearly between waypoints and are
/// held constant outside them. `velocity` is the source speed; the radial
/// speed implied by the distance profile may not exceed it.
struct Trajectory {
  std::vector<Waypoint> waypoints;
  double velocity = 0.0;  // m/s

  void validate() const;
  double start_time() const;
  double end_time() const;
  double alpha_at(double t) const;
  double distance_at(double t) const;
  /// Speed toward the array midpoint, m/s (positive while approaching).
  double radial_velocity_at(double t) const;
  double min_distance() const;
  bool is_stationary() const;
  /// True when the trajectory defines the source over [0, duration].
  bool covers(double duration) const;

  static Trajectory stationary(double alpha_deg, double distance, double duration);
};

struct Echo {
  double delay = 0.0;  // s
  double gain = 0.0;   // linear, in (0, 1)
};

struct SceneSpec {
  SoundClass target_class = SoundClass::Siren;
  SirenKind siren_kind = SirenKind::None;
  AudioBuffer target_clip;  // mono
  AudioBuffer noise_clip;   // stereo, at least as long as the target
  double snr_db = 0.0;
  Trajectory trajectory;
  std::vector<Echo> echoes;
  /// Amplitude (dB) of the direction-dependent level difference.
  double ild_perturbation_db = 0.0;
  std::uint64_t seed = 0;
};

struct SceneOptions {
  MicGeometry geometry;
  double frame_length = 0.5;
  double snr_min_db = -40.0;
  double snr_max_db = 10.0;
};

/// Throws ValidationError describing the first violated constraint.
void validate_scene_spec(const SceneSpec& spec, const SceneOptions& opts);

struct SceneRecord {
  AudioBuffer mixed;
  AudioBuffer clean_target_stereo;
  /// Noise after SNR scaling; mixed == clean_target_stereo + noise_used.
  AudioBuffer noise_used;
  std::vector<double> alpha_per_frame;
  SoundClass class_label = SoundClass::Other;
  SirenKind siren_kind = SirenKind::None;
  double snr_db = 0.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Resamples x as heard at the array midpoint by a source moving along the
/// trajectory: reading speed c / (c - v_r) with v_r the radial velocity at
/// emission time. The output ends when the input is exhausted, so its length
/// differs from x when the source moves. Throws DomainError if |v_r| >= c.
Signal apply_doppler(std::span<const double> x, const Trajectory& traj, const MicGeometry& geom,
                     double sample_rate);

/// Stereo rendering of a mono source: channel 2 lags channel 1 by
/// itd_for_angle(alpha(t)) via fractional delays split evenly between the
/// channels; each channel gets a 1/r distance gain (unity at the closest
/// waypoint), a direction-dependent level offset within
/// +-ild_perturbation_db / 2 and a seeded per-channel jitter within
/// +-ild_perturbation_db / 4.
AudioBuffer spatialize(std::span<const double> x, const Trajectory& traj, const MicGeometry& geom,
                       double ild_perturbation_db, std::uint64_t seed, double sample_rate);

/// x + sum_k gain_k * shift(x, delay_k), tail truncated to len(x).
AudioBuffer add_echoes(const AudioBuffer& x, std::span<const Echo> echoes);

struct MixResult {
  AudioBuffer mixed;
  AudioBuffer scaled_noise;
  double noise_scale = 1.0;
};

/// Scales noise so that 10 log10(P_target / P_noise) == snr_db, with powers
/// taken as mean squares summed over channels, and adds it to the target.
MixResult mix_at_snr(const AudioBuffer& target, const AudioBuffer& noise, double snr_db);

double measure_snr_db(const AudioBuffer& target, const AudioBuffer& noise);

/// doppler -> spatialize -> echoes -> mix_at_snr, plus per-frame ground truth
/// (alpha at each frame's midpoint).
SceneRecord synthesize_scene(const SceneSpec& spec, const SceneOptions& opts);

}  // namespace sdsp
