#pragma once

// Procedural stand-ins for recorded clips: emergency sirens, car horns,
// non-alerting traffic sounds and stereo traffic background noise. All are
// fully determined by their seed.

#include <cstdint>
#include <string>

#include "sdsp/audio.hpp"
#include "sdsp/scene.hpp"

namespace sdsp {

/// Electronic siren with a band-limited square-ish waveform. Yelp sweeps
/// 650-1500 Hz a few times per second, wail sweeps the same range over
/// several seconds, hi-low alternates 960/770 Hz.
Signal synth_siren(SirenKind kind, double duration, double fs, std::uint64_t seed);

/// Two-tone horn (fundamentals near 400 Hz a third apart, rich harmonics and
/// a little broadband buzz), sounded in one or more blasts.
Signal synth_horn(double duration, double fs, std::uint64_t seed);

/// Non-alerting traffic sound: engine harmonics over tyre roar.
Signal synth_other(double duration, double fs, std::uint64_t seed);

/// Stereo background: independent pink noise per channel, low-frequency
/// rumble common to both, and vehicles passing at random directions, each
/// arriving with the inter-channel delay of the default array.
AudioBuffer synth_traffic_noise(double duration, double fs, std::uint64_t seed);

/// Looks up a generator by name: "siren-yelp", "siren-wail", "siren-hilow",
/// "horn", "other", "traffic-noise". Mono generators return one channel.
AudioBuffer synth_by_name(const std::string& name, double duration, double fs, std::uint64_t seed);

}  // namespace sdsp
