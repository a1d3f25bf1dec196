#include "othello/policy.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "othello/nn/train.hpp"

namespace othello::policy {

namespace {

constexpr std::uint64_t kAllOutputs = (std::uint64_t{1} << dataset::kOutputs) - 1;

int argmax(const float* c, std::uint64_t allowed) {
  int best = -1;
  for (int i = 0; i < dataset::kOutputs; ++i) {
    if (((allowed >> i) & 1) && (best < 0 || c[i] > c[best])) best = i;
  }
  return best;
}

std::vector<Confidences> columns(const nn::Matrix<float>& probs) {
  std::vector<Confidences> out(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index n = 0; n < probs.cols(); ++n) {
    std::copy_n(probs.col(n).data(), dataset::kOutputs, out[static_cast<std::size_t>(n)].begin());
  }
  return out;
}

}  // namespace

std::optional<Confidences> Policy::confidences(const Board&) const { return std::nullopt; }

std::vector<Confidences> Policy::confidences_batch(std::span<const CanonicalBoard> boards) const {
  std::vector<Confidences> out;
  out.reserve(boards.size());
  for (const CanonicalBoard& c : boards) {
    auto conf = confidences(to_board(c));
    if (!conf) throw Error(ErrorCode::InvalidArgument, name() + " has no confidences");
    out.push_back(*conf);
  }
  return out;
}

Move choose_move(const Confidences& c, const Board& b) {
  const Bitboard legal = legal_moves(b);
  if (!legal) return Move::pass();
  const int i = argmax(c.data(), nn::legal_output_mask(canonicalize(b)));
  return Move::at(dataset::index_cell(i));
}

Move choose_move(const Policy& p, const Board& b) { return p.choose(b); }

// ---- predictor ----------------------------------------------------------

PredictorPolicy::PredictorPolicy(std::shared_ptr<const nn::Model> model, std::string label)
    : model_(std::move(model)), label_(std::move(label)) {
  if (!model_) throw Error(ErrorCode::InvalidArgument, "predictor without a model");
  nn::validate(model_->net.spec);
  if (model_->net.spec.input_channels() != dataset::channels(model_->encoding)) {
    throw Error(ErrorCode::ShapeMismatch, "network input channels do not match the encoding");
  }
  if (model_->net.spec.outputs() != dataset::kOutputs) {
    throw Error(ErrorCode::ShapeMismatch, "predictor needs 60 outputs");
  }
}

PredictorPolicy PredictorPolicy::load(const std::filesystem::path& path) {
  return PredictorPolicy(std::make_shared<nn::Model>(nn::load_model(path)), "net:" + path.filename().string());
}

std::vector<Confidences> PredictorPolicy::confidences_batch(std::span<const CanonicalBoard> boards) const {
  std::vector<Confidences> out;
  out.reserve(boards.size());
  constexpr std::size_t kBatch = 256;
  for (std::size_t start = 0; start < boards.size(); start += kBatch) {
    const auto chunk = boards.subspan(start, std::min(kBatch, boards.size() - start));
    const auto cols = columns(nn::predict(model_->net, dataset::encode_batch<float>(chunk, model_->encoding)));
    out.insert(out.end(), cols.begin(), cols.end());
  }
  return out;
}

std::optional<Confidences> PredictorPolicy::confidences(const Board& b) const { return predict_distribution(*this, b); }

Confidences predict_distribution(const PredictorPolicy& p, const Board& b) {
  const CanonicalBoard c = canonicalize(b);
  return p.confidences_batch(std::span<const CanonicalBoard>(&c, 1)).front();
}

Move PredictorPolicy::choose(const Board& b) const {
  if (!legal_moves(b)) return Move::pass();
  return choose_move(predict_distribution(*this, b), b);
}

// ---- bagging ------------------------------------------------------------

BaggedPolicy::BaggedPolicy(std::vector<PredictorPolicy> members, std::string label)
    : members_(std::move(members)), label_(std::move(label)) {
  if (members_.empty()) throw Error(ErrorCode::InvalidArgument, "empty bag");
  for (const PredictorPolicy& m : members_) {
    if (!(m.model().net.spec == members_.front().model().net.spec) ||
        m.model().encoding != members_.front().model().encoding) {
      throw Error(ErrorCode::InvalidArgument, "bag members differ in spec or encoding");
    }
  }
}

std::vector<Confidences> BaggedPolicy::confidences_batch(std::span<const CanonicalBoard> boards) const {
  std::vector<std::array<double, dataset::kOutputs>> sum(boards.size());
  for (auto& s : sum) s.fill(0.0);
  for (const PredictorPolicy& m : members_) {
    const auto c = m.confidences_batch(boards);
    for (std::size_t n = 0; n < boards.size(); ++n) {
      for (int i = 0; i < dataset::kOutputs; ++i) sum[n][i] += c[n][i];
    }
  }
  std::vector<Confidences> out(boards.size());
  const auto k = static_cast<double>(members_.size());
  for (std::size_t n = 0; n < boards.size(); ++n) {
    for (int i = 0; i < dataset::kOutputs; ++i) out[n][i] = static_cast<float>(sum[n][i] / k);
  }
  return out;
}

std::optional<Confidences> BaggedPolicy::confidences(const Board& b) const { return bagged_confidences(*this, b); }

Confidences bagged_confidences(const BaggedPolicy& bp, const Board& b) {
  const CanonicalBoard c = canonicalize(b);
  return bp.confidences_batch(std::span<const CanonicalBoard>(&c, 1)).front();
}

Move BaggedPolicy::choose(const Board& b) const {
  if (!legal_moves(b)) return Move::pass();
  return choose_move(bagged_confidences(*this, b), b);
}

// ---- hybrid -------------------------------------------------------------

HybridPolicy::HybridPolicy(std::vector<Stage> stages, std::string label)
    : stages_(std::move(stages)), label_(std::move(label)) {
  std::sort(stages_.begin(), stages_.end(), [](const Stage& a, const Stage& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (!stages_[i].policy || stages_[i].first > stages_[i].last) {
      throw Error(ErrorCode::InvalidArgument, "bad hybrid stage");
    }
    if (i > 0 && stages_[i].first <= stages_[i - 1].last) {
      throw Error(ErrorCode::InvalidArgument, "hybrid stages overlap");
    }
  }
}

const Policy& HybridPolicy::policy_for(int move_number) const {
  for (const Stage& s : stages_) {
    if (move_number >= s.first && move_number <= s.last) return *s.policy;
  }
  throw Error(ErrorCode::NoStage, "no stage covers move " + std::to_string(move_number));
}

Move HybridPolicy::choose(const Board& b, int move_number) const {
  if (!legal_moves(b)) return Move::pass();
  return policy_for(move_number).choose(b);
}

Move HybridPolicy::choose(const Board& b) const { return choose(b, move_number(b)); }

HybridPolicy make_hybrid(const std::array<PolicyPtr, 4>& per_stage, std::string label) {
  std::vector<Stage> stages;
  for (std::size_t i = 0; i < 4; ++i) stages.push_back({kDefaultStages[i].first, kDefaultStages[i].second, per_stage[i]});
  return HybridPolicy(std::move(stages), std::move(label));
}

Move hybrid_choose(const HybridPolicy& h, const Board& b, int move_number) { return h.choose(b, move_number); }

// ---- analytics ----------------------------------------------------------

double unmasked_validity_rate(const Policy& p, const dataset::Dataset& d) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "validity rate of an empty dataset");
  std::vector<CanonicalBoard> boards;
  boards.reserve(d.size());
  for (const auto& t : d) boards.push_back(t.board);
  const auto conf = p.confidences_batch(boards);
  std::size_t valid = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Cell top = dataset::index_cell(argmax(conf[n].data(), kAllOutputs));
    if (legal_moves(boards[n]) & top.bit()) ++valid;
  }
  return 100.0 * static_cast<double>(valid) / static_cast<double>(d.size());
}

std::size_t AccuracyGrid::total() const {
  std::size_t n = 0;
  for (const auto& [key, cell] : cells) n += cell.count;
  return n;
}

double AccuracyGrid::marginal(std::size_t i) const {
  std::size_t hits = 0;
  for (const auto& [key, cell] : cells) hits += cell.hits[i];
  const std::size_t n = total();
  return n ? 100.0 * static_cast<double>(hits) / static_cast<double>(n) : 0.0;
}

std::string AccuracyGrid::to_tsv() const {
  std::ostringstream s;
  s << "move_number\tlegal_moves\tcount";
  for (int k : ks) s << "\ttop" << k;
  s << '\n' << std::fixed << std::setprecision(4);
  for (const auto& [key, cell] : cells) {
    s << key.first << '\t' << key.second << '\t' << cell.count;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      s << '\t' << 100.0 * static_cast<double>(cell.hits[i]) / static_cast<double>(cell.count);
    }
    s << '\n';
  }
  return s.str();
}

AccuracyGrid accuracy_grid(const Policy& p, const dataset::Dataset& d, const std::vector<int>& ks) {
  AccuracyGrid grid;
  grid.ks = ks;
  for (int k : ks) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (k > 1 && !p.has_confidences()) throw Error(ErrorCode::InvalidArgument, p.name() + " cannot rank moves");
  }
  dataset::Dataset kept;
  for (const auto& t : d) {
    if (dataset::move_number(t.board) >= kFirstGridMove) kept.push_back(t);
  }
  std::vector<CanonicalBoard> boards;
  boards.reserve(kept.size());
  for (const auto& t : kept) boards.push_back(t.board);
  std::vector<Confidences> conf;
  if (p.has_confidences()) conf = p.confidences_batch(boards);

  for (std::size_t n = 0; n < kept.size(); ++n) {
    const CanonicalBoard& b = kept[n].board;
    const Bitboard legal = legal_moves(b);
    GridCell& cell = grid.cells[{dataset::move_number(b), std::popcount(legal)}];
    if (cell.hits.empty()) cell.hits.assign(ks.size(), 0);
    ++cell.count;
    const int target = dataset::target_index(kept[n].target);
    std::vector<int> ranked;
    if (!conf.empty()) {
      ranked = nn::rank_outputs(conf[n].data(), nn::legal_output_mask(b));
    } else {
      const Move m = p.choose(to_board(b));
      if (!m.is_pass()) ranked.push_back(dataset::target_index(m.cell()));
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto top = std::min(ranked.size(), static_cast<std::size_t>(ks[i]));
      if (std::find(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), target) !=
          ranked.begin() + static_cast<std::ptrdiff_t>(top)) {
        ++cell.hits[i];
      }
    }
  }
  return grid;
}

}  // namespace othello::policy
