#pragma once

// Dense CNN engine on Eigen matrices, templated on the scalar type: float
// for training and play, double for gradient verification.
//
// Activation layouts (column-major Eigen matrices):
//   spatial  rows = channels, column n * 64 + cell   (an 8x8 map per column block)
//   flat     rows = features, column n
// The flat image of a spatial activation is a pure reshape: feature
// cell * maps + map, so Flatten copies nothing.
//
// A Conv2D weight is maps x (9 * in) with column tap * in + channel, where
// tap = (dy + 1) * 3 + (dx + 1) indexes the 3x3 neighbourhood.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "othello/nn/spec.hpp"
#include "othello/random.hpp"

namespace othello::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using othello::Rng;

template <typename Scalar>
struct LayerParams {
  Matrix<Scalar> weight;        // Conv2D, FullyConnected
  Vector<Scalar> bias;          // Conv2D, FullyConnected; BatchNorm shift
  Vector<Scalar> scale;         // BatchNorm
  Vector<Scalar> running_mean;  // BatchNorm
  Vector<Scalar> running_var;   // BatchNorm
};

template <typename Scalar>
struct Network {
  NetworkSpec spec;
  std::vector<LayerParams<Scalar>> layers;
};

template <typename To, typename From>
Network<To> cast(const Network<From>& net) {
  Network<To> out;
  out.spec = net.spec;
  out.layers.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& a = net.layers[i];
    auto& b = out.layers[i];
    b.weight = a.weight.template cast<To>();
    b.bias = a.bias.template cast<To>();
    b.scale = a.scale.template cast<To>();
    b.running_mean = a.running_mean.template cast<To>();
    b.running_var = a.running_var.template cast<To>();
  }
  return out;
}

// Zero-mean Gaussian weights with variance 2 / fan_in, zero biases,
// BatchNorm scale 1 / shift 0 / running statistics (0, 1).
template <typename Scalar>
Network<Scalar> he_init(const NetworkSpec& spec, std::uint64_t seed) {
  validate(spec);
  Network<Scalar> net;
  net.spec = spec;
  net.layers.resize(spec.layers.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    LayerParams<Scalar>& p = net.layers[i];
    if (l.kind == LayerKind::Conv2D || l.kind == LayerKind::FullyConnected) {
      const int fan_in = l.kind == LayerKind::Conv2D ? 9 * l.in : l.in;
      const int cols = fan_in;
      const double sd = std::sqrt(2.0 / fan_in);
      p.weight.resize(l.out, cols);
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) {
        for (Eigen::Index r = 0; r < p.weight.rows(); ++r) p.weight(r, c) = static_cast<Scalar>(sd * rng.normal());
      }
      p.bias = Vector<Scalar>::Zero(l.out);
    } else if (l.kind == LayerKind::BatchNorm) {
      p.scale = Vector<Scalar>::Ones(l.in);
      p.bias = Vector<Scalar>::Zero(l.in);
      p.running_mean = Vector<Scalar>::Zero(l.in);
      p.running_var = Vector<Scalar>::Ones(l.in);
    }
  }
  return net;
}

enum class Mode { Train, Infer };

template <typename Scalar>
struct LayerCache {
  Matrix<Scalar> input;
  Matrix<Scalar> aux;       // Conv2D im2col columns, BatchNorm normalized input, Dropout mask
  Vector<Scalar> inv_std;   // BatchNorm
  Vector<Scalar> mean;      // BatchNorm batch mean
  Vector<Scalar> variance;  // BatchNorm biased batch variance
};

template <typename Scalar>
struct ForwardCache {
  std::vector<LayerCache<Scalar>> layers;
  Matrix<Scalar> output;
  Mode mode = Mode::Infer;
};

namespace detail {

// cols(tap * C + c, n * 64 + cell) = x(c, n * 64 + neighbour(cell, tap)), 0 off-board.
template <typename Scalar>
void im2col(const Matrix<Scalar>& x, Matrix<Scalar>& cols) {
  const Eigen::Index c = x.rows();
  const Eigen::Index n = x.cols() / 64;
  cols.setZero(9 * c, x.cols());
  for (Eigen::Index b = 0; b < n; ++b) {
    for (int tap = 0; tap < 9; ++tap) {
      const int dy = tap / 3 - 1;
      const int dx = tap % 3 - 1;
      const int x0 = std::max(0, -dx);
      const int width = 8 - std::abs(dx);
      for (int y = std::max(0, -dy); y < std::min(8, 8 - dy); ++y) {
        cols.block(tap * c, b * 64 + y * 8 + x0, c, width) = x.block(0, b * 64 + (y + dy) * 8 + x0 + dx, c, width);
      }
    }
  }
}

template <typename Scalar>
void col2im(const Matrix<Scalar>& cols, Eigen::Index channels, Matrix<Scalar>& x) {
  const Eigen::Index n = cols.cols() / 64;
  x.setZero(channels, cols.cols());
  for (Eigen::Index b = 0; b < n; ++b) {
    for (int tap = 0; tap < 9; ++tap) {
      const int dy = tap / 3 - 1;
      const int dx = tap % 3 - 1;
      const int x0 = std::max(0, -dx);
      const int width = 8 - std::abs(dx);
      for (int y = std::max(0, -dy); y < std::min(8, 8 - dy); ++y) {
        x.block(0, b * 64 + (y + dy) * 8 + x0 + dx, channels, width) +=
            cols.block(tap * channels, b * 64 + y * 8 + x0, channels, width);
      }
    }
  }
}

template <typename Scalar>
Matrix<Scalar> reshape(const Matrix<Scalar>& m, Eigen::Index rows) {
  return Eigen::Map<const Matrix<Scalar>>(m.data(), rows, m.size() / rows);
}

template <typename Scalar>
void softmax_columns(Matrix<Scalar>& z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    auto col = z.col(j);
    const Scalar m = col.maxCoeff();
    col = (col.array() - m).exp().matrix();
    col /= col.sum();
  }
}

}  // namespace detail

// Throws ShapeMismatch when `input` is not channels x (N * 64). In train
// mode BatchNorm normalizes with batch statistics and Dropout draws its
// mask from `rng` (required when the network has a nonzero dropout rate).
template <typename Scalar>
Matrix<Scalar> forward(const Network<Scalar>& net, const std::type_identity_t<Matrix<Scalar>>& input, Mode mode,
                       std::type_identity_t<ForwardCache<Scalar>>* cache = nullptr, Rng* rng = nullptr) {
  if (input.rows() != net.spec.input_channels() || input.cols() == 0 || input.cols() % 64 != 0) {
    throw Error(ErrorCode::ShapeMismatch, "input is " + std::to_string(input.rows()) + "x" +
                                              std::to_string(input.cols()) + ", network wants " +
                                              std::to_string(net.spec.input_channels()) + " x (N*64)");
  }
  const Eigen::Index batch = input.cols() / 64;
  if (cache) {
    cache->layers.assign(net.layers.size(), {});
    cache->mode = mode;
  }
  Matrix<Scalar> x = input;
  Matrix<Scalar> y;
  Matrix<Scalar> cols;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.spec.layers[i];
    const LayerParams<Scalar>& p = net.layers[i];
    LayerCache<Scalar>* lc = cache ? &cache->layers[i] : nullptr;
    switch (l.kind) {
      case LayerKind::Conv2D:
        detail::im2col(x, cols);
        y.noalias() = p.weight * cols;
        y.colwise() += p.bias;
        if (lc) lc->aux = std::move(cols);
        break;
      case LayerKind::ReLU:
        y = x.cwiseMax(Scalar(0));
        break;
      case LayerKind::BatchNorm: {
        const auto m = static_cast<Scalar>(x.cols());
        Vector<Scalar> mean, var;
        if (mode == Mode::Train) {
          mean = x.rowwise().sum() / m;
          var = (x.colwise() - mean).array().square().rowwise().sum().matrix() / m;
        } else {
          mean = p.running_mean;
          var = p.running_var;
        }
        const Vector<Scalar> inv_std =
            (var.array() + static_cast<Scalar>(kBatchNormEpsilon)).rsqrt().matrix();
        Matrix<Scalar> xhat = (x.colwise() - mean).array().colwise() * inv_std.array();
        y = (xhat.array().colwise() * p.scale.array()).colwise() + p.bias.array();
        if (lc) {
          lc->aux = std::move(xhat);
          lc->inv_std = inv_std;
          lc->mean = std::move(mean);
          lc->variance = std::move(var);
        }
        break;
      }
      case LayerKind::Dropout:
        if (mode == Mode::Train && l.rate > 0.0) {
          if (!rng) throw Error(ErrorCode::InvalidArgument, "train-mode dropout needs a random stream");
          const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - l.rate));
          Matrix<Scalar> mask(x.rows(), x.cols());
          for (Eigen::Index k = 0; k < mask.size(); ++k) {
            mask.data()[k] = rng->uniform() >= l.rate ? keep : Scalar(0);
          }
          y = x.cwiseProduct(mask);
          if (lc) lc->aux = std::move(mask);
        } else {
          y = x;
          if (lc) lc->aux = Matrix<Scalar>::Ones(x.rows(), x.cols());
        }
        break;
      case LayerKind::Flatten:
        y = detail::reshape(x, static_cast<Eigen::Index>(l.out));
        break;
      case LayerKind::FullyConnected:
        y.noalias() = p.weight * x;
        y.colwise() += p.bias;
        break;
      case LayerKind::Softmax:
        y = x;
        detail::softmax_columns(y);
        break;
    }
    if (lc) lc->input = std::move(x);
    x = std::move(y);
    y = Matrix<Scalar>();
  }
  (void)batch;
  if (cache) cache->output = x;
  return x;
}

template <typename Scalar>
Matrix<Scalar> predict(const Network<Scalar>& net, const std::type_identity_t<Matrix<Scalar>>& input) {
  return forward(net, input, Mode::Infer);
}

// Mean negative log-likelihood of the target columns of `probs` (K x N).
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& probs, std::span<const int> targets) {
  Scalar total = 0;
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  for (Eigen::Index n = 0; n < probs.cols(); ++n) {
    total -= std::log(std::max(probs(targets[static_cast<std::size_t>(n)], n), tiny));
  }
  return total / static_cast<Scalar>(probs.cols());
}

// (l2 / 2) * sum of squared Conv2D and FullyConnected weights.
template <typename Scalar>
Scalar l2_penalty(const Network<Scalar>& net, Scalar l2) {
  Scalar s = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerKind k = net.spec.layers[i].kind;
    if (k == LayerKind::Conv2D || k == LayerKind::FullyConnected) s += net.layers[i].weight.squaredNorm();
  }
  return l2 / 2 * s;
}

template <typename Scalar>
Scalar loss(const Matrix<Scalar>& probs, std::span<const int> targets, const Network<Scalar>& net, Scalar l2) {
  return cross_entropy(probs, targets) + l2_penalty(net, l2);
}

template <typename Scalar>
struct Gradients {
  std::vector<LayerParams<Scalar>> layers;  // weight, bias, scale are filled
  Matrix<Scalar> input;
};

// Exact gradient of loss(forward(...), targets, net, l2) with respect to
// every trainable tensor and the input, given a train-mode cache.
template <typename Scalar>
Gradients<Scalar> backward(const Network<Scalar>& net, const ForwardCache<Scalar>& cache,
                           std::span<const int> targets, Scalar l2) {
  const Eigen::Index batch = cache.output.cols();
  if (static_cast<Eigen::Index>(targets.size()) != batch) {
    throw Error(ErrorCode::ShapeMismatch, "target count does not match batch");
  }
  Gradients<Scalar> g;
  g.layers.resize(net.layers.size());

  // softmax + cross-entropy: dL/dz = (p - onehot) / N
  Matrix<Scalar> d = cache.output;
  for (Eigen::Index n = 0; n < batch; ++n) d(targets[static_cast<std::size_t>(n)], n) -= Scalar(1);
  d /= static_cast<Scalar>(batch);

  Matrix<Scalar> dcols, dx;
  for (std::size_t ii = net.layers.size(); ii-- > 0;) {
    const LayerSpec& l = net.spec.layers[ii];
    const LayerParams<Scalar>& p = net.layers[ii];
    const LayerCache<Scalar>& lc = cache.layers[ii];
    LayerParams<Scalar>& gp = g.layers[ii];
    switch (l.kind) {
      case LayerKind::Softmax:
        continue;  // folded into the loss gradient above
      case LayerKind::FullyConnected:
        gp.weight.noalias() = d * lc.input.transpose();
        gp.weight += l2 * p.weight;
        gp.bias = d.rowwise().sum();
        dx.noalias() = p.weight.transpose() * d;
        break;
      case LayerKind::Conv2D:
        gp.weight.noalias() = d * lc.aux.transpose();
        gp.weight += l2 * p.weight;
        gp.bias = d.rowwise().sum();
        dcols.noalias() = p.weight.transpose() * d;
        detail::col2im(dcols, lc.input.rows(), dx);
        break;
      case LayerKind::ReLU:
        dx = (lc.input.array() > Scalar(0)).select(d, Scalar(0));
        break;
      case LayerKind::BatchNorm: {
        const auto m = static_cast<Scalar>(d.cols());
        gp.scale = d.cwiseProduct(lc.aux).rowwise().sum();
        gp.bias = d.rowwise().sum();
        if (cache.mode == Mode::Train) {
          const Matrix<Scalar> dxhat = d.array().colwise() * p.scale.array();
          const Vector<Scalar> sum_dxhat = dxhat.rowwise().sum();
          const Vector<Scalar> sum_dxhat_xhat = dxhat.cwiseProduct(lc.aux).rowwise().sum();
          dx = ((dxhat * m).colwise() - sum_dxhat - (lc.aux.array().colwise() * sum_dxhat_xhat.array()).matrix())
                   .array()
                   .colwise() *
               (lc.inv_std.array() / m);
        } else {
          dx = d.array().colwise() * (p.scale.array() * lc.inv_std.array());
        }
        break;
      }
      case LayerKind::Dropout:
        dx = d.cwiseProduct(lc.aux);
        break;
      case LayerKind::Flatten:
        dx = detail::reshape(d, static_cast<Eigen::Index>(l.in));
        break;
    }
    d = std::move(dx);
    dx = Matrix<Scalar>();
  }
  g.input = std::move(d);
  return g;
}

// Folds the batch statistics of a train-mode pass into the running
// BatchNorm estimates (unbiased variance).
template <typename Scalar>
void absorb_batch_statistics(Network<Scalar>& net, const ForwardCache<Scalar>& cache) {
  const auto mom = static_cast<Scalar>(kBatchNormMomentum);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (net.spec.layers[i].kind != LayerKind::BatchNorm) continue;
    const LayerCache<Scalar>& lc = cache.layers[i];
    const auto m = static_cast<Scalar>(lc.input.cols());
    const Scalar correction = m > 1 ? m / (m - 1) : Scalar(1);
    auto& p = net.layers[i];
    p.running_mean = mom * p.running_mean + (1 - mom) * lc.mean;
    p.running_var = mom * p.running_var + (1 - mom) * correction * lc.variance;
  }
}

}  // namespace othello::nn
