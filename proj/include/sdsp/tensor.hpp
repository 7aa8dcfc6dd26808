#pragma once

// Binary tensor container shared with external consumers.
//
// Layout (all little-endian):
//   "SDSP" | u16 version (1) | u16 dtype (1 = f32) | u32 rank | u32 dims[rank]
//   | f32 payload[product(dims)], row-major
//
// Each container has a JSON sidecar at <path>.json:
//   {"id", "kind": "gammatonegram" | "mask" | "crossgram", "shape", "config_hash", "channel"?}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdsp/matrix.hpp"

namespace sdsp {

inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint16_t kTensorDtypeF32 = 1;

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

Tensor tensor_from_matrix(const MatrixD& m);
MatrixD matrix_from_tensor(const Tensor& t);

std::string serialize_tensor(const Tensor& t);
/// Throws FormatError on bad magic, unsupported version or dtype, or a
/// payload whose size disagrees with the header.
Tensor parse_tensor(const std::string& bytes);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

enum class TensorKind { Gammatonegram, Mask, Crossgram };
std::string to_string(TensorKind k);
TensorKind parse_tensor_kind(const std::string& s);

struct TensorMeta {
  std::string id;
  TensorKind kind = TensorKind::Gammatonegram;
  std::vector<std::uint32_t> shape;
  std::string config_hash;
  std::optional<int> channel;  // 1 or 2 for per-channel tensors

  friend bool operator==(const TensorMeta&, const TensorMeta&) = default;
};

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);
std::string serialize_meta(const TensorMeta& meta);
TensorMeta parse_meta(const std::string& text);
/// Writes the container and its sidecar. The sidecar shape must match.
void write_tensor_with_meta(const std::filesystem::path& path, const Tensor& t, const TensorMeta& meta);
TensorMeta read_meta(const std::filesystem::path& tensor_path);

}  // namespace sdsp
