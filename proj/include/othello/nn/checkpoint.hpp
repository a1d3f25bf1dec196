#pragma once

// Model files: "ONN1", version u16, encoding tag u8, layer count u32, then
// per layer a kind byte and its extents (in, out as u32; Dropout stores its
// rate in parts per million), then every tensor in layer order as float32
// LE (weight, bias, scale, running mean, running variance where present),
// closed by a CRC-32 of all preceding bytes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "othello/dataset.hpp"
#include "othello/nn/network.hpp"

namespace othello::nn {

inline constexpr std::uint16_t kModelVersion = 1;

struct Model {
  Network<float> net;
  dataset::Encoding encoding = dataset::Encoding::Pieces;
};

std::vector<std::uint8_t> serialize_model(const Model& m);
// Throws BadMagic, VersionMismatch, ChecksumMismatch, TruncatedFile, and
// ShapeMismatch when `expected` is given and differs from the stored spec.
Model deserialize_model(std::span<const std::uint8_t> bytes, const std::optional<NetworkSpec>& expected = {});

void save_model(const Model& m, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path, const std::optional<NetworkSpec>& expected = {});

}  // namespace othello::nn
