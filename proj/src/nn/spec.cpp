#include "othello/nn/spec.hpp"

#include <sstream>

namespace othello::nn {

namespace {

[[noreturn]] void mismatch(std::size_t i, const std::string& why) {
  throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(i) + ": " + why);
}

}  // namespace

int NetworkSpec::input_channels() const {
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::Conv2D || l.kind == LayerKind::Flatten) return l.in;
  }
  return 0;
}

int NetworkSpec::outputs() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerKind::FullyConnected) return it->out;
  }
  return 0;
}

void validate(const NetworkSpec& spec) {
  if (spec.layers.empty()) throw Error(ErrorCode::ShapeMismatch, "empty network");
  bool spatial = true;
  int width = spec.input_channels();
  if (width <= 0) throw Error(ErrorCode::ShapeMismatch, "network has no input layer");
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::Conv2D:
        if (!spatial) mismatch(i, "convolution after flatten");
        if (l.in != width || l.out <= 0) mismatch(i, "convolution expects " + std::to_string(width) + " channels");
        width = l.out;
        break;
      case LayerKind::ReLU:
        break;
      case LayerKind::BatchNorm:
        if (l.in != width) mismatch(i, "batch norm width " + std::to_string(l.in) + " != " + std::to_string(width));
        break;
      case LayerKind::Dropout:
        if (!(l.rate >= 0.0 && l.rate < 1.0)) mismatch(i, "dropout rate outside [0, 1)");
        break;
      case LayerKind::Flatten:
        if (!spatial || l.in != width || l.out != width * 64) mismatch(i, "bad flatten");
        spatial = false;
        width = l.out;
        break;
      case LayerKind::FullyConnected:
        if (spatial) mismatch(i, "fully-connected layer before flatten");
        if (l.in != width || l.out <= 0) mismatch(i, "fully-connected expects " + std::to_string(width) + " inputs");
        width = l.out;
        break;
      case LayerKind::Softmax:
        if (spatial || i + 1 != spec.layers.size()) mismatch(i, "softmax must close a flat network");
        break;
      default:
        mismatch(i, "unknown layer kind");
    }
  }
  if (spec.layers.back().kind != LayerKind::Softmax) mismatch(spec.layers.size() - 1, "network must end in softmax");
}

Architecture parse_architecture(const std::string& name) {
  if (name == "conv4") return Architecture::Conv4;
  if (name == "conv6") return Architecture::Conv6;
  if (name == "conv8") return Architecture::Conv8;
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + name + "'");
}

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::Conv4: return "conv4";
    case Architecture::Conv6: return "conv6";
    case Architecture::Conv8: return "conv8";
  }
  return "?";
}

NetworkSpec make_network(Architecture arch, int input_channels, const PresetOptions& o) {
  std::vector<int> widths = {64, 64, 128, 128};
  if (arch == Architecture::Conv6) widths.insert(widths.end(), {256, 256});
  if (arch == Architecture::Conv8) widths.insert(widths.end(), {256, 256, 256, 256});
  if (o.maps_override > 0) {
    for (int& w : widths) w = o.maps_override;
  }
  NetworkSpec spec;
  int c = input_channels;
  for (int w : widths) {
    spec.layers.push_back(LayerSpec::conv(c, w));
    if (o.batch_norm) spec.layers.push_back(LayerSpec::batch_norm(w));
    spec.layers.push_back(LayerSpec::relu());
    c = w;
  }
  spec.layers.push_back(LayerSpec::flatten(c));
  spec.layers.push_back(LayerSpec::fc(c * 64, o.hidden));
  spec.layers.push_back(LayerSpec::relu());
  if (o.dropout) spec.layers.push_back(LayerSpec::dropout(kDefaultDropout));
  spec.layers.push_back(LayerSpec::fc(o.hidden, o.outputs));
  spec.layers.push_back(LayerSpec::softmax());
  validate(spec);
  return spec;
}

NetworkSpec make_linear(int input_channels, int outputs) {
  NetworkSpec spec;
  spec.layers = {LayerSpec::flatten(input_channels), LayerSpec::fc(input_channels * 64, outputs), LayerSpec::softmax()};
  validate(spec);
  return spec;
}

std::size_t parameter_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Conv2D: return static_cast<std::size_t>(l.out) * (9 * static_cast<std::size_t>(l.in) + 1);
    case LayerKind::FullyConnected: return static_cast<std::size_t>(l.out) * (static_cast<std::size_t>(l.in) + 1);
    case LayerKind::BatchNorm: return 2 * static_cast<std::size_t>(l.in);
    default: return 0;
  }
}

std::size_t parameter_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const LayerSpec& l : spec.layers) n += parameter_count(l);
  return n;
}

std::string describe(const NetworkSpec& spec) {
  std::ostringstream s;
  bool first = true;
  for (const LayerSpec& l : spec.layers) {
    if (!first) s << "->";
    first = false;
    switch (l.kind) {
      case LayerKind::Conv2D: s << "conv" << l.out; break;
      case LayerKind::ReLU: s << "relu"; break;
      case LayerKind::BatchNorm: s << "bn"; break;
      case LayerKind::Dropout: s << "dropout(" << l.rate << ")"; break;
      case LayerKind::Flatten: s << "flatten"; break;
      case LayerKind::FullyConnected: s << "fc" << l.out; break;
      case LayerKind::Softmax: s << "softmax"; break;
    }
  }
  return s.str();
}

}  // namespace othello::nn
