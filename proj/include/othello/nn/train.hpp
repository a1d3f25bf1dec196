#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "othello/dataset.hpp"
#include "othello/nn/network.hpp"

namespace othello::nn {

struct TrainConfig {
  double base_lr = 0.1;
  double momentum = 0.95;
  double l2 = 5e-4;
  int batch_size = 256;
  int epochs = 1;
  int halvings_per_epoch = 2;
  std::uint64_t seed = 1;
};

// base_lr * 2^-k with k the number of completed 1/halvings_per_epoch
// fractions of an epoch at `step`.
double lr_at(std::uint64_t step, std::uint64_t steps_per_epoch, const TrainConfig& config);

template <typename Scalar>
struct OptimizerState {
  std::vector<LayerParams<Scalar>> velocity;  // weight, bias, scale
};

template <typename Scalar>
OptimizerState<Scalar> make_optimizer_state(const Network<Scalar>& net) {
  OptimizerState<Scalar> s;
  s.velocity.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& p = net.layers[i];
    auto& v = s.velocity[i];
    v.weight = Matrix<Scalar>::Zero(p.weight.rows(), p.weight.cols());
    v.bias = Vector<Scalar>::Zero(p.bias.size());
    v.scale = Vector<Scalar>::Zero(p.scale.size());
  }
  return s;
}

// Classical momentum: v <- momentum * v - lr * g; p <- p + v.
template <typename Scalar>
void sgd_step(Network<Scalar>& net, const Gradients<Scalar>& g, OptimizerState<Scalar>& state, Scalar lr,
              Scalar momentum) {
  auto update = [&](auto& p, auto& v, const auto& grad) {
    if (grad.size() == 0) return;
    v = momentum * v - lr * grad;
    p += v;
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].weight, state.velocity[i].weight, g.layers[i].weight);
    update(net.layers[i].bias, state.velocity[i].bias, g.layers[i].bias);
    update(net.layers[i].scale, state.velocity[i].scale, g.layers[i].scale);
  }
}

struct EpochStats {
  int epoch = 0;  // 1-based
  double lr = 0;  // rate at the last step of the epoch
  double train_loss = 0;  // mean mini-batch loss over the epoch
  double test_top1 = 0;  // legality-masked, percent; NaN without a test set
};

struct TrainResult {
  Network<float> net;
  std::vector<EpochStats> epochs;
  std::vector<double> batch_losses;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Mini-batch SGD from He initialization; the training order is reshuffled
// every epoch from the seed, so the result is a pure function of inputs.
// Throws EmptyDataset.
TrainResult train(const NetworkSpec& spec, const dataset::Dataset& train_set, dataset::Encoding encoding,
                  const TrainConfig& config, const dataset::Dataset* test_set = nullptr,
                  const EpochCallback& on_epoch = {});

// Same, continuing from given parameters.
TrainResult train_from(Network<float> net, const dataset::Dataset& train_set, dataset::Encoding encoding,
                       const TrainConfig& config, const dataset::Dataset* test_set = nullptr,
                       const EpochCallback& on_epoch = {});

// Header line plus one tab-separated line per epoch.
std::string format_log(const std::vector<EpochStats>& epochs);

enum class Masking { None, Legal };

// Percent of examples whose target is among the k highest outputs, ties to
// the lower output index. Legal masking ranks only the board's legal moves.
double evaluate_topk(const Network<float>& net, const dataset::Dataset& d, dataset::Encoding encoding, int k,
                     Masking masking = Masking::None);

// Infer-mode output distributions, 60 x N, in batches.
Matrix<float> predict_all(const Network<float>& net, const dataset::Dataset& d, dataset::Encoding encoding,
                          int batch_size = 256);

// Output indices ranked by confidence, ties to the lower index.
std::vector<int> rank_outputs(const float* probs, std::uint64_t allowed_mask);

// 60-bit mask over output indices for the legal moves of `b`.
std::uint64_t legal_output_mask(const CanonicalBoard& b);

}  // namespace othello::nn
