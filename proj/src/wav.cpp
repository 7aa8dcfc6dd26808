#include "sdsp/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "sdsp/errors.hpp"
#include "sdsp/interp.hpp"

namespace sdsp {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::int16_t to_pcm16(double v) {
  const double q = std::nearbyint(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path, const WavReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file '" + path.string() + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    return FormatError("'" + path.string() + "': " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a data chunk whose header overstates its length.
      if (std::memcmp(chunk, "data", 4) != 0) throw fail("truncated chunk");
    }
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw fail("short fmt chunk");
      format = get_u16(bytes.data() + body);
      channels = get_u16(bytes.data() + body + 2);
      rate = get_u32(bytes.data() + body + 4);
      bits = get_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && avail >= 26) format = get_u16(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (format == 0) throw fail("missing fmt chunk");
  if (data == nullptr) throw fail("missing data chunk");
  if (format != kFormatPcm || bits != 16) throw fail("only 16-bit PCM is supported");
  if (channels != 1 && channels != 2) throw fail("only mono or stereo is supported");

  const std::size_t frames = data_size / (2u * channels);
  std::vector<Signal> ch(channels, Signal(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const auto s = static_cast<std::int16_t>(get_u16(data + 2 * (i * channels + c)));
      ch[c][i] = static_cast<double>(s) / 32768.0;
    }
  }

  if (static_cast<double>(rate) != opts.expected_rate) {
    if (!opts.resample)
      throw fail("sample rate " + std::to_string(rate) + " Hz, expected " +
                 std::to_string(static_cast<long>(opts.expected_rate)) + " Hz");
    for (auto& c : ch) c = resample(c, rate, opts.expected_rate);
    return AudioBuffer(opts.expected_rate, std::move(ch));
  }
  return AudioBuffer(rate, std::move(ch));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  const auto channels = static_cast<std::uint16_t>(audio.num_channels());
  if (channels != 1 && channels != 2) throw ArgumentError("only mono or stereo WAV output is supported");
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate()));
  const std::size_t frames = audio.num_frames();
  const auto data_size = static_cast<std::uint32_t>(frames * channels * 2);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * channels * 2);
  put_u16(out, static_cast<std::uint16_t>(channels * 2));
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t c = 0; c < channels; ++c)
      put_u16(out, static_cast<std::uint16_t>(to_pcm16(audio.channel(c)[i])));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write WAV file '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

AudioBuffer quantize_pcm16(const AudioBuffer& audio) {
  std::vector<Signal> ch;
  for (std::size_t c = 0; c < audio.num_channels(); ++c) {
    Signal s(audio.num_frames());
    const auto src = audio.channel(c);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(to_pcm16(src[i])) / 32768.0;
    ch.push_back(std::move(s));
  }
  return AudioBuffer(audio.sample_rate(), std::move(ch));
}

}  // namespace sdsp
