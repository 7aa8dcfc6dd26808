#include "sdsp/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + v + "'");
  return out;
}

std::string to_str(const std::string& v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw ConfigError("expected a quoted string, got '" + v + "'");
  return v.substr(1, v.size() - 2);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"filterbank.n_channels", [](RunConfig& c, const std::string& v) { c.filterbank.n_channels = static_cast<int>(to_int(v)); }},
      {"filterbank.f_low", [](RunConfig& c, const std::string& v) { c.filterbank.f_low = to_double(v); }},
      {"filterbank.f_high", [](RunConfig& c, const std::string& v) { c.filterbank.f_high = to_double(v); }},
      {"filterbank.sample_rate", [](RunConfig& c, const std::string& v) { c.filterbank.sample_rate = to_double(v); }},
      {"filterbank.filter_order", [](RunConfig& c, const std::string& v) { c.filterbank.filter_order = static_cast<int>(to_int(v)); }},
      {"filterbank.ir_duration", [](RunConfig& c, const std::string& v) { c.filterbank.ir_duration = to_double(v); }},
      {"gammatonegram.frame_length", [](RunConfig& c, const std::string& v) { c.gammatonegram.frame_length = to_double(v); }},
      {"gammatonegram.hop", [](RunConfig& c, const std::string& v) { c.gammatonegram.hop = to_double(v); }},
      {"gammatonegram.window_span", [](RunConfig& c, const std::string& v) { c.gammatonegram.window_span = to_double(v); }},
      {"gammatonegram.window",
       [](RunConfig& c, const std::string& v) {
         if (to_str(v) != "hamming") throw ConfigError("unsupported window '" + to_str(v) + "'");
         c.gammatonegram.window = AnalysisWindow::Hamming;
       }},
      {"gammatonegram.floor_db", [](RunConfig& c, const std::string& v) { c.gammatonegram.floor_db = to_double(v); }},
      {"geometry.spacing", [](RunConfig& c, const std::string& v) { c.geometry.spacing = to_double(v); }},
      {"geometry.speed_of_sound", [](RunConfig& c, const std::string& v) { c.geometry.speed_of_sound = to_double(v); }},
      {"scene.snr_min_db", [](RunConfig& c, const std::string& v) { c.snr_min_db = to_double(v); }},
      {"scene.snr_max_db", [](RunConfig& c, const std::string& v) { c.snr_max_db = to_double(v); }},
      {"scene.peak_level", [](RunConfig& c, const std::string& v) { c.peak_level = to_double(v); }},
      {"masking.threshold_db", [](RunConfig& c, const std::string& v) { c.mask_threshold_db = to_double(v); }},
      {"paths.specs", [](RunConfig& c, const std::string& v) { c.paths.specs = to_str(v); }},
      {"paths.data", [](RunConfig& c, const std::string& v) { c.paths.data = to_str(v); }},
      {"paths.features", [](RunConfig& c, const std::string& v) { c.paths.features = to_str(v); }},
      {"paths.predictions", [](RunConfig& c, const std::string& v) { c.paths.predictions = to_str(v); }},
      {"run.seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = to_int(v);
         if (s < 0) throw ConfigError("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(to_int(v)); }},
      {"run.train_fraction", [](RunConfig& c, const std::string& v) { c.train_fraction = to_double(v); }},
      {"run.median_order", [](RunConfig& c, const std::string& v) { c.median_order = static_cast<int>(to_int(v)); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  filterbank.validate();
  gammatonegram.validate();
  try {
    geometry.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(snr_min_db < snr_max_db)) throw ConfigError("scene.snr_min_db must be below snr_max_db");
  if (!(peak_level > 0.0 && peak_level <= 1.0)) throw ConfigError("scene.peak_level must lie in (0, 1]");
  if (threads < 0) throw ConfigError("run.threads must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("run.train_fraction must lie in (0, 1)");
  if (median_order < 1 || median_order % 2 == 0) throw ConfigError("run.median_order must be odd and positive");
}

std::string RunConfig::feature_canonical() const {
  std::string s;
  const auto add = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
  add("filterbank.n_channels", std::to_string(filterbank.n_channels));
  add("filterbank.f_low", fmt(filterbank.f_low));
  add("filterbank.f_high", fmt(filterbank.f_high));
  add("filterbank.sample_rate", fmt(filterbank.sample_rate));
  add("filterbank.filter_order", std::to_string(filterbank.filter_order));
  add("filterbank.ir_duration", fmt(filterbank.ir_duration));
  add("gammatonegram.frame_length", fmt(gammatonegram.frame_length));
  add("gammatonegram.hop", fmt(gammatonegram.hop));
  add("gammatonegram.window_span", fmt(gammatonegram.window_span));
  add("gammatonegram.window", "hamming");
  add("gammatonegram.floor_db", fmt(gammatonegram.floor_db));
  add("masking.threshold_db", fmt(mask_threshold_db));
  return s;
}

std::string RunConfig::feature_hash() const { return fnv1a64_hex(feature_canonical()); }

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& msg) { throw ConfigError("config line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"filterbank", "gammatonegram", "geometry", "scene", "masking", "paths", "run"};
      if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return section == k; }))
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail("unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream s;
  const auto q = [](const std::string& v) { return "\"" + v + "\""; };
  s << "[filterbank]\n"
    << "n_channels = " << c.filterbank.n_channels << "\n"
    << "f_low = " << fmt(c.filterbank.f_low) << "\n"
    << "f_high = " << fmt(c.filterbank.f_high) << "\n"
    << "sample_rate = " << fmt(c.filterbank.sample_rate) << "\n"
    << "filter_order = " << c.filterbank.filter_order << "\n"
    << "ir_duration = " << fmt(c.filterbank.ir_duration) << "\n\n"
    << "[gammatonegram]\n"
    << "frame_length = " << fmt(c.gammatonegram.frame_length) << "\n"
    << "hop = " << fmt(c.gammatonegram.hop) << "\n"
    << "window_span = " << fmt(c.gammatonegram.window_span) << "\n"
    << "window = \"hamming\"\n"
    << "floor_db = " << fmt(c.gammatonegram.floor_db) << "\n\n"
    << "[geometry]\n"
    << "spacing = " << fmt(c.geometry.spacing) << "\n"
    << "speed_of_sound = " << fmt(c.geometry.speed_of_sound) << "\n\n"
    << "[scene]\n"
    << "snr_min_db = " << fmt(c.snr_min_db) << "\n"
    << "snr_max_db = " << fmt(c.snr_max_db) << "\n"
    << "peak_level = " << fmt(c.peak_level) << "\n\n"
    << "[masking]\n"
    << "threshold_db = " << fmt(c.mask_threshold_db) << "\n\n"
    << "[paths]\n"
    << "specs = " << q(c.paths.specs) << "\n"
    << "data = " << q(c.paths.data) << "\n"
    << "features = " << q(c.paths.features) << "\n"
    << "predictions = " << q(c.paths.predictions) << "\n\n"
    << "[run]\n"
    << "seed = " << c.seed << "\n"
    << "threads = " << c.threads << "\n"
    << "train_fraction = " << fmt(c.train_fraction) << "\n"
    << "median_order = " << c.median_order << "\n";
  return s.str();
}

}  // namespace sdsp
