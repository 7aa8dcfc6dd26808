#include "sdsp/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdsp/errors.hpp"

namespace sdsp {
namespace {

static_assert(sizeof(float) == 4);

template <typename T>
void put(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  U u;
  std::memcpy(&u, &v, sizeof(U));
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  if (pos + sizeof(U) > in.size()) throw FormatError("tensor container is truncated");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i));
  pos += sizeof(U);
  T v;
  std::memcpy(&v, &u, sizeof(U));
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor tensor_from_matrix(const MatrixD& m) {
  Tensor t{{static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, {}};
  t.data.reserve(m.size());
  for (double v : m.data()) t.data.push_back(static_cast<float>(v));
  return t;
}

MatrixD matrix_from_tensor(const Tensor& t) {
  if (t.shape.size() != 2) throw FormatError("expected a rank-2 tensor");
  MatrixD m(t.shape[0], t.shape[1]);
  for (std::size_t i = 0; i < t.data.size(); ++i) m.data()[i] = t.data[i];
  return m;
}

std::string serialize_tensor(const Tensor& t) {
  if (t.data.size() != t.element_count()) throw ArgumentError("tensor payload does not match its shape");
  std::string out = "SDSP";
  put(out, kTensorVersion);
  put(out, kTensorDtypeF32);
  put(out, static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) put(out, d);
  out.reserve(out.size() + 4 * t.data.size());
  for (float v : t.data) put(out, v);
  return out;
}

Tensor parse_tensor(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SDSP") != 0) throw FormatError("bad tensor magic");
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(bytes, pos);
  if (version != kTensorVersion) throw FormatError("unsupported tensor version " + std::to_string(version));
  const auto dtype = get<std::uint16_t>(bytes, pos);
  if (dtype != kTensorDtypeF32) throw FormatError("unsupported tensor dtype " + std::to_string(dtype));
  const auto rank = get<std::uint32_t>(bytes, pos);
  if (rank > 8) throw FormatError("tensor rank " + std::to_string(rank) + " is implausible");
  Tensor t;
  for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(get<std::uint32_t>(bytes, pos));
  const std::size_t n = t.element_count();
  if (bytes.size() - pos != 4 * n) throw FormatError("tensor payload size disagrees with its header");
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.data[i] = get<float>(bytes, pos);
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { dump(path, serialize_tensor(t)); }

Tensor read_tensor(const std::filesystem::path& path) { return parse_tensor(slurp(path)); }

std::string to_string(TensorKind k) {
  switch (k) {
    case TensorKind::Gammatonegram: return "gammatonegram";
    case TensorKind::Mask: return "mask";
    case TensorKind::Crossgram: return "crossgram";
  }
  return "gammatonegram";
}

TensorKind parse_tensor_kind(const std::string& s) {
  if (s == "gammatonegram") return TensorKind::Gammatonegram;
  if (s == "mask") return TensorKind::Mask;
  if (s == "crossgram") return TensorKind::Crossgram;
  throw FormatError("unknown tensor kind '" + s + "'");
}

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path) {
  auto p = tensor_path;
  p += ".json";
  return p;
}

std::string serialize_meta(const TensorMeta& meta) {
  nlohmann::json j = {{"id", meta.id},
                      {"kind", to_string(meta.kind)},
                      {"shape", meta.shape},
                      {"config_hash", meta.config_hash}};
  if (meta.channel) j["channel"] = *meta.channel;
  return j.dump() + "\n";
}

TensorMeta parse_meta(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TensorMeta m;
    m.id = j.at("id").get<std::string>();
    m.kind = parse_tensor_kind(j.at("kind").get<std::string>());
    m.shape = j.at("shape").get<std::vector<std::uint32_t>>();
    m.config_hash = j.at("config_hash").get<std::string>();
    if (j.contains("channel")) m.channel = j.at("channel").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor sidecar: ") + e.what());
  }
}

void write_tensor_with_meta(const std::filesystem::path& path, const Tensor& t, const TensorMeta& meta) {
  if (meta.shape != t.shape) throw ArgumentError("sidecar shape does not match the tensor");
  write_tensor(path, t);
  dump(sidecar_path(path), serialize_meta(meta));
}

TensorMeta read_meta(const std::filesystem::path& tensor_path) {
  return parse_meta(slurp(sidecar_path(tensor_path)));
}

}  // namespace sdsp
