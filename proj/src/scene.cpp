#include "sdsp/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "sdsp/errors.hpp"
#include "sdsp/interp.hpp"
#include "sdsp/random.hpp"

namespace sdsp {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Index of the segment [i, i+1] containing t, or npos when t lies outside.
std::size_t segment_of(const std::vector<Waypoint>& w, double t) {
  if (w.size() < 2 || t < w.front().time || t >= w.back().time) return std::string::npos;
  const auto it = std::upper_bound(w.begin(), w.end(), t,
                                   [](double v, const Waypoint& p) { return v < p.time; });
  return static_cast<std::size_t>(it - w.begin()) - 1;
}

template <typename Field>
double interpolate(const std::vector<Waypoint>& w, double t, Field field) {
  if (w.empty()) throw ValidationError("trajectory has no waypoints");
  if (t <= w.front().time) return field(w.front());
  if (t >= w.back().time) return field(w.back());
  const std::size_t i = segment_of(w, t);
  const double u = (t - w[i].time) / (w[i + 1].time - w[i].time);
  return field(w[i]) + u * (field(w[i + 1]) - field(w[i]));
}

double max_radial_speed(const Trajectory& traj) {
  double v = 0.0;
  const auto& w = traj.waypoints;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    v = std::max(v, std::abs(w[i + 1].distance - w[i].distance) / (w[i + 1].time - w[i].time));
  return v;
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

std::string to_string(SoundClass c) {
  switch (c) {
    case SoundClass::Siren: return "siren";
    case SoundClass::Horn: return "horn";
    case SoundClass::Other: return "other";
  }
  return "other";
}

std::string to_string(SirenKind k) {
  switch (k) {
    case SirenKind::None: return "none";
    case SirenKind::Yelp: return "yelp";
    case SirenKind::Wail: return "wail";
    case SirenKind::HiLow: return "hilow";
  }
  return "none";
}

SoundClass parse_sound_class(const std::string& s) {
  const auto v = lower(s);
  if (v == "siren") return SoundClass::Siren;
  if (v == "horn") return SoundClass::Horn;
  if (v == "other") return SoundClass::Other;
  throw ValidationError("unknown sound class '" + s + "'");
}

SirenKind parse_siren_kind(const std::string& s) {
  const auto v = lower(s);
  if (v == "none" || v.empty()) return SirenKind::None;
  if (v == "yelp") return SirenKind::Yelp;
  if (v == "wail") return SirenKind::Wail;
  if (v == "hilow" || v == "hi-low") return SirenKind::HiLow;
  throw ValidationError("unknown siren kind '" + s + "'");
}

void Trajectory::validate() const {
  if (waypoints.empty()) throw ValidationError("trajectory has no waypoints");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const auto& p = waypoints[i];
    if (!(p.alpha_deg >= 0.0 && p.alpha_deg <= 180.0))
      throw ValidationError("waypoint alpha must lie in [0, 180] degrees");
    if (!(p.distance > 0.0)) throw ValidationError("waypoint distance must be positive");
    if (i > 0 && !(p.time > waypoints[i - 1].time))
      throw ValidationError("waypoint times must be strictly increasing");
  }
  if (!(velocity >= 0.0)) throw ValidationError("trajectory velocity must be non-negative");
  if (max_radial_speed(*this) > velocity * (1.0 + 1e-9) + 1e-12)
    throw ValidationError("trajectory distance changes faster than its velocity");
}

double Trajectory::start_time() const { return waypoints.empty() ? 0.0 : waypoints.front().time; }
double Trajectory::end_time() const { return waypoints.empty() ? 0.0 : waypoints.back().time; }

double Trajectory::alpha_at(double t) const {
  return interpolate(waypoints, t, [](const Waypoint& p) { return p.alpha_deg; });
}

double Trajectory::distance_at(double t) const {
  return interpolate(waypoints, t, [](const Waypoint& p) { return p.distance; });
}

double Trajectory::radial_velocity_at(double t) const {
  const std::size_t i = segment_of(waypoints, t);
  if (i == std::string::npos) return 0.0;
  const auto& a = waypoints[i];
  const auto& b = waypoints[i + 1];
  return -(b.distance - a.distance) / (b.time - a.time);
}

double Trajectory::min_distance() const {
  double d = waypoints.empty() ? 1.0 : waypoints.front().distance;
  for (const auto& p : waypoints) d = std::min(d, p.distance);
  return d;
}

bool Trajectory::is_stationary() const {
  return std::all_of(waypoints.begin(), waypoints.end(),
                     [&](const Waypoint& p) { return p.distance == waypoints.front().distance; });
}

bool Trajectory::covers(double duration) const {
  if (waypoints.size() == 1) return true;
  constexpr double tol = 1e-9;
  return start_time() <= tol && end_time() >= duration - tol;
}

Trajectory Trajectory::stationary(double alpha_deg, double distance, double duration) {
  Trajectory t;
  t.waypoints = {{0.0, alpha_deg, distance}, {std::max(duration, 1e-6), alpha_deg, distance}};
  t.velocity = 0.0;
  return t;
}

Signal apply_doppler(std::span<const double> x, const Trajectory& traj, const MicGeometry& geom,
                     double sample_rate) {
  traj.validate();
  geom.validate();
  if (!traj.covers(static_cast<double>(x.size()) / sample_rate))
    throw ValidationError("trajectory does not cover the clip duration");
  const double c = geom.speed_of_sound;
  if (max_radial_speed(traj) >= c) throw DomainError("radial velocity reaches the speed of sound");
  if (traj.is_stationary()) return Signal(x.begin(), x.end());

  const SincInterpolator interp;
  Signal y;
  y.reserve(x.size() + x.size() / 8);
  const double last = static_cast<double>(x.size()) - 1.0;
  double pos = 0.0;
  while (pos <= last) {
    const double ratio = c / (c - traj.radial_velocity_at(pos / sample_rate));
    y.push_back(interp.at(x, pos, std::min(1.0, 1.0 / ratio)));
    pos += ratio;
  }
  return y;
}

AudioBuffer spatialize(std::span<const double> x, const Trajectory& traj, const MicGeometry& geom,
                       double ild_perturbation_db, std::uint64_t seed, double sample_rate) {
  traj.validate();
  geom.validate();
  if (!(ild_perturbation_db >= 0.0)) throw ValidationError("ILD perturbation must be non-negative");
  if (!traj.covers(static_cast<double>(x.size()) / sample_rate))
    throw ValidationError("trajectory does not cover the clip duration");

  Rng rng(mix_seed(seed, 0x11D));
  const double jitter1 = rng.uniform(-0.25, 0.25) * ild_perturbation_db;
  const double jitter2 = rng.uniform(-0.25, 0.25) * ild_perturbation_db;
  const double max_itd = geom.max_itd();
  const double r_min = traj.min_distance();

  const SincInterpolator interp;
  Signal left(x.size()), right(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    const double alpha = traj.alpha_at(t);
    const double itd = itd_for_angle(alpha, geom);
    const double d1 = 0.5 * (max_itd - itd) * sample_rate;
    const double d2 = 0.5 * (max_itd + itd) * sample_rate;
    // Cardioid-like sensitivity toward each end of the array.
    const double c1 = 0.5 * (1.0 + std::cos(alpha * kDegToRad));
    const double level1 = ild_perturbation_db * (c1 - 0.5) + jitter1;
    const double level2 = ild_perturbation_db * (0.5 - c1) + jitter2;
    const double g = r_min / traj.distance_at(t);
    const double pos = static_cast<double>(n);
    left[n] = g * std::pow(10.0, level1 / 20.0) * interp.at(x, pos - d1);
    right[n] = g * std::pow(10.0, level2 / 20.0) * interp.at(x, pos - d2);
  }
  return AudioBuffer::stereo(sample_rate, std::move(left), std::move(right));
}

AudioBuffer add_echoes(const AudioBuffer& x, std::span<const Echo> echoes) {
  const double duration = x.duration();
  for (const auto& e : echoes) {
    if (!(e.gain > 0.0 && e.gain < 1.0)) throw ValidationError("echo gain must lie in (0, 1)");
    if (!(e.delay > 0.0 && e.delay < duration))
      throw ValidationError("echo delay must be positive and shorter than the clip");
  }
  AudioBuffer out = x;
  for (std::size_t c = 0; c < x.num_channels(); ++c) {
    const auto src = x.channel(c);
    auto dst = out.channel(c);
    for (const auto& e : echoes) {
      const auto shift = static_cast<std::size_t>(std::lround(e.delay * x.sample_rate()));
      for (std::size_t n = shift; n < src.size(); ++n) dst[n] += e.gain * src[n - shift];
    }
  }
  return out;
}

MixResult mix_at_snr(const AudioBuffer& target, const AudioBuffer& noise, double snr_db) {
  if (target.num_frames() != noise.num_frames() || target.num_channels() != noise.num_channels())
    throw ArgumentError("target and noise must have the same shape");
  if (target.sample_rate() != noise.sample_rate())
    throw ArgumentError("target and noise must share a sample rate");
  const double pt = target.power();
  const double pn = noise.power();
  if (!(pt > 0.0) || !(pn > 0.0)) throw DomainError("SNR mixing requires non-zero target and noise power");

  const double scale = std::sqrt(pt / (pn * std::pow(10.0, snr_db / 10.0)));
  MixResult r{target, noise, scale};
  r.scaled_noise.scale(scale);
  for (std::size_t c = 0; c < target.num_channels(); ++c) {
    auto m = r.mixed.channel(c);
    const auto n = r.scaled_noise.channel(c);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += n[i];
  }
  return r;
}

double measure_snr_db(const AudioBuffer& target, const AudioBuffer& noise) {
  const double pn = noise.power();
  if (!(pn > 0.0)) throw DomainError("noise power is zero");
  return 10.0 * std::log10(target.power() / pn);
}

void validate_scene_spec(const SceneSpec& spec, const SceneOptions& opts) {
  const auto& t = spec.target_clip;
  const auto& n = spec.noise_clip;
  if (t.num_channels() != 1 || t.empty()) throw ValidationError("target clip must be non-empty mono audio");
  if (n.num_channels() != 2) throw ValidationError("noise clip must be stereo");
  if (t.sample_rate() != n.sample_rate()) throw ValidationError("target and noise sample rates differ");
  if (n.num_frames() < t.num_frames()) throw ValidationError("noise clip is shorter than the target clip");
  if (!(spec.snr_db >= opts.snr_min_db && spec.snr_db <= opts.snr_max_db))
    throw ValidationError("snr_db " + std::to_string(spec.snr_db) + " outside the configured range");
  for (const auto& e : spec.echoes) {
    if (!(e.gain > 0.0 && e.gain < 1.0)) throw ValidationError("echo gain must lie in (0, 1)");
    if (!(e.delay > 0.0 && e.delay < t.duration()))
      throw ValidationError("echo delay must be positive and shorter than the clip");
  }
  if (!(spec.ild_perturbation_db >= 0.0)) throw ValidationError("ILD perturbation must be non-negative");
  spec.trajectory.validate();
  if (!spec.trajectory.covers(t.duration())) throw ValidationError("trajectory does not cover the clip duration");
  if ((spec.target_class == SoundClass::Siren) != (spec.siren_kind != SirenKind::None))
    throw ValidationError("siren kind must be set exactly for siren targets");
}

SceneRecord synthesize_scene(const SceneSpec& spec, const SceneOptions& opts) {
  validate_scene_spec(spec, opts);
  opts.geometry.validate();
  const double fs = spec.target_clip.sample_rate();
  const std::size_t len = spec.target_clip.num_frames();

  Signal moved = apply_doppler(spec.target_clip.channel(0), spec.trajectory, opts.geometry, fs);
  moved.resize(len, 0.0);
  AudioBuffer stereo = spatialize(moved, spec.trajectory, opts.geometry, spec.ild_perturbation_db, spec.seed, fs);
  stereo = add_echoes(stereo, spec.echoes);

  Rng rng(mix_seed(spec.seed, 0x4015E));
  const std::size_t offset = rng.index(spec.noise_clip.num_frames() - len + 1);
  MixResult mix = mix_at_snr(stereo, spec.noise_clip.slice(offset, len), spec.snr_db);

  SceneRecord rec;
  rec.mixed = std::move(mix.mixed);
  rec.clean_target_stereo = std::move(stereo);
  rec.noise_used = std::move(mix.scaled_noise);
  rec.noise_scale = mix.noise_scale;
  rec.class_label = spec.target_class;
  rec.siren_kind = spec.siren_kind;
  rec.snr_db = spec.snr_db;
  rec.seed = spec.seed;
  const auto frames = static_cast<std::size_t>(std::floor(static_cast<double>(len) / fs / opts.frame_length + 1e-9));
  for (std::size_t k = 0; k < frames; ++k)
    rec.alpha_per_frame.push_back(spec.trajectory.alpha_at((static_cast<double>(k) + 0.5) * opts.frame_length));
  return rec;
}

}  // namespace sdsp
