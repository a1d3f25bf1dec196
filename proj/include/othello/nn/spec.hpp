#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "othello/error.hpp"

namespace othello::nn {

enum class LayerKind : std::uint8_t {
  Conv2D = 1,
  ReLU = 2,
  BatchNorm = 3,
  Dropout = 4,
  Flatten = 5,
  FullyConnected = 6,
  Softmax = 7,
};

// 3x3 kernels, stride 1, one cell of zero padding: every map stays 8x8.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int in = 0;   // Conv2D input channels, FC inputs, BatchNorm/Flatten maps
  int out = 0;  // Conv2D maps, FC outputs
  double rate = 0.0;  // Dropout

  static LayerSpec conv(int in_channels, int maps) { return {LayerKind::Conv2D, in_channels, maps, 0.0}; }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 0, 0.0}; }
  static LayerSpec batch_norm(int maps) { return {LayerKind::BatchNorm, maps, maps, 0.0}; }
  static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, 0, rate}; }
  static LayerSpec flatten(int maps) { return {LayerKind::Flatten, maps, maps * 64, 0.0}; }
  static LayerSpec fc(int in, int out) { return {LayerKind::FullyConnected, in, out, 0.0}; }
  static LayerSpec softmax() { return {LayerKind::Softmax, 0, 0, 0.0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.99;
inline constexpr double kDefaultDropout = 0.5;

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  int input_channels() const;
  int outputs() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Throws ShapeMismatch unless layers chain: spatial layers (Conv2D, and
// ReLU/BatchNorm/Dropout on maps) up to one Flatten, then FC layers with
// ReLU/BatchNorm/Dropout between them and a final Softmax.
void validate(const NetworkSpec& spec);

enum class Architecture { Conv4, Conv6, Conv8 };

Architecture parse_architecture(const std::string& name);  // conv4|conv6|conv8
std::string to_string(Architecture a);

struct PresetOptions {
  bool batch_norm = false;  // after each convolution, before its ReLU
  bool dropout = false;     // on the fc128 hidden layer, rate 0.5
  int maps_override = 0;    // > 0 replaces every convolution width
  int hidden = 128;
  int outputs = 60;
};

// conv64 -> conv64 -> conv128 -> conv128 [-> conv256 x 2 | x 4] -> fc128 -> fc60
NetworkSpec make_network(Architecture arch, int input_channels, const PresetOptions& options = {});

// A single fully-connected softmax layer over the input planes.
NetworkSpec make_linear(int input_channels, int outputs = 60);

// Trainable scalars of one layer (weights, biases, BatchNorm scale/shift).
std::size_t parameter_count(const LayerSpec& layer);
std::size_t parameter_count(const NetworkSpec& spec);

std::string describe(const NetworkSpec& spec);

}  // namespace othello::nn
