#include "othello/nn/train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace othello::nn {

double lr_at(std::uint64_t step, std::uint64_t steps_per_epoch, const TrainConfig& config) {
  if (steps_per_epoch == 0) throw Error(ErrorCode::InvalidArgument, "steps_per_epoch must be positive");
  const std::uint64_t k = step * static_cast<std::uint64_t>(config.halvings_per_epoch) / steps_per_epoch;
  return std::ldexp(config.base_lr, -static_cast<int>(std::min<std::uint64_t>(k, 1000)));
}

std::uint64_t legal_output_mask(const CanonicalBoard& b) {
  std::uint64_t mask = 0;
  for_each_cell(legal_moves(b), [&](Cell c) { mask |= std::uint64_t{1} << dataset::target_index(c); });
  return mask;
}

std::vector<int> rank_outputs(const float* probs, std::uint64_t allowed_mask) {
  std::vector<int> idx;
  for (int i = 0; i < dataset::kOutputs; ++i) {
    if ((allowed_mask >> i) & 1) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return probs[a] > probs[b]; });
  return idx;
}

Matrix<float> predict_all(const Network<float>& net, const dataset::Dataset& d, dataset::Encoding encoding,
                          int batch_size) {
  Matrix<float> out(net.spec.outputs(), static_cast<Eigen::Index>(d.size()));
  std::vector<CanonicalBoard> boards;
  for (std::size_t start = 0; start < d.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(d.size(), start + static_cast<std::size_t>(batch_size));
    boards.clear();
    for (std::size_t i = start; i < end; ++i) boards.push_back(d[i].board);
    const Matrix<float> x = dataset::encode_batch<float>(boards, encoding);
    out.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        forward(net, x, Mode::Infer);
  }
  return out;
}

double evaluate_topk(const Network<float>& net, const dataset::Dataset& d, dataset::Encoding encoding, int k,
                     Masking masking) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "cannot evaluate on an empty dataset");
  const Matrix<float> probs = predict_all(net, d, encoding);
  const std::uint64_t all = (std::uint64_t{1} << dataset::kOutputs) - 1;
  std::size_t hits = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    const std::uint64_t allowed = masking == Masking::Legal ? legal_output_mask(d[n].board) : all;
    const std::vector<int> ranked = rank_outputs(probs.col(static_cast<Eigen::Index>(n)).data(), allowed);
    const int target = dataset::target_index(d[n].target);
    const auto top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    if (std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), target) !=
        ranked.begin() + static_cast<std::ptrdiff_t>(top)) {
      ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(d.size());
}

TrainResult train(const NetworkSpec& spec, const dataset::Dataset& train_set, dataset::Encoding encoding,
                  const TrainConfig& config, const dataset::Dataset* test_set, const EpochCallback& on_epoch) {
  return train_from(he_init<float>(spec, config.seed), train_set, encoding, config, test_set, on_epoch);
}

TrainResult train_from(Network<float> net, const dataset::Dataset& train_set, dataset::Encoding encoding,
                       const TrainConfig& config, const dataset::Dataset* test_set, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train on an empty dataset");
  if (config.batch_size < 1 || config.epochs < 0 || config.halvings_per_epoch < 0) {
    throw Error(ErrorCode::InvalidArgument, "bad training configuration");
  }
  if (net.spec.input_channels() != dataset::channels(encoding)) {
    throw Error(ErrorCode::ShapeMismatch, "network input channels do not match the encoding");
  }
#if defined(__GLIBC__)
  // Activation buffers of a few hundred MB are reallocated every step; keep
  // them on the heap rather than mapping fresh zeroed pages each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  TrainResult result;
  OptimizerState<float> state = make_optimizer_state(net);
  Rng dropout_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  const std::size_t n = train_set.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::uint64_t steps_per_epoch = (n + batch - 1) / batch;
  std::vector<std::uint32_t> order(n);
  std::vector<CanonicalBoard> boards;
  std::vector<int> targets;
  ForwardCache<float> cache;
  std::uint64_t step = 0;
  const auto l2 = static_cast<float>(config.l2);
  const auto momentum = static_cast<float>(config.momentum);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0u);
    dataset::shuffle(order, config.seed + static_cast<std::uint64_t>(epoch));
    double loss_sum = 0;
    double lr = config.base_lr;
    for (std::size_t start = 0; start < n; start += batch, ++step) {
      const std::size_t end = std::min(n, start + batch);
      boards.clear();
      targets.clear();
      for (std::size_t i = start; i < end; ++i) {
        const dataset::Triple& t = train_set[order[i]];
        boards.push_back(t.board);
        targets.push_back(dataset::target_index(t.target));
      }
      const Matrix<float> x = dataset::encode_batch<float>(boards, encoding);
      const Matrix<float> probs = forward(net, x, Mode::Train, &cache, &dropout_rng);
      const double batch_loss = loss<float>(probs, targets, net, l2);
      result.batch_losses.push_back(batch_loss);
      loss_sum += batch_loss;
      const Gradients<float> g = backward<float>(net, cache, targets, l2);
      absorb_batch_statistics(net, cache);
      lr = lr_at(step, steps_per_epoch, config);
      sgd_step<float>(net, g, state, static_cast<float>(lr), momentum);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    stats.test_top1 = test_set && !test_set->empty()
                          ? evaluate_topk(net, *test_set, encoding, 1, Masking::Legal)
                          : std::numeric_limits<double>::quiet_NaN();
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  result.net = std::move(net);
  return result;
}

std::string format_log(const std::vector<EpochStats>& epochs) {
  std::ostringstream s;
  s << "# sgd classical momentum (v <- mu*v - lr*g; p <- p + v); test_top1 legality-masked\n";
  s << "epoch\tlr\ttrain_loss\ttest_top1\n";
  for (const EpochStats& e : epochs) {
    s << e.epoch << '\t' << e.lr << '\t' << e.train_loss << '\t';
    if (std::isnan(e.test_top1)) {
      s << "nan";
    } else {
      s << e.test_top1;
    }
    s << '\n';
  }
  return s.str();
}

}  // namespace othello::nn
