#pragma once

// Players built from move predictors, and prediction-quality analytics.
// Policies are immutable and deterministic; ties go to the lowest cell.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "othello/core.hpp"
#include "othello/dataset.hpp"
#include "othello/nn/checkpoint.hpp"

namespace othello::policy {

using Confidences = std::array<float, dataset::kOutputs>;

class Policy {
 public:
  virtual ~Policy() = default;

  virtual Move choose(const Board& b) const = 0;
  virtual bool has_confidences() const { return false; }
  virtual std::optional<Confidences> confidences(const Board& b) const;
  // For dataset analytics; boards are in mover perspective.
  virtual std::vector<Confidences> confidences_batch(std::span<const CanonicalBoard> boards) const;
  virtual std::string name() const = 0;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// Masked argmax over the legal moves of `b`; Pass iff there are none.
Move choose_move(const Confidences& c, const Board& b);
Move choose_move(const Policy& p, const Board& b);

// Move number of the decision on `b`, 1 for the first move of the game.
inline int move_number(const Board& b) noexcept { return b.disc_count() - 3; }

class PredictorPolicy final : public Policy {
 public:
  explicit PredictorPolicy(std::shared_ptr<const nn::Model> model, std::string label = "net");
  static PredictorPolicy load(const std::filesystem::path& path);

  Move choose(const Board& b) const override;
  bool has_confidences() const override { return true; }
  std::optional<Confidences> confidences(const Board& b) const override;
  std::vector<Confidences> confidences_batch(std::span<const CanonicalBoard> boards) const override;
  std::string name() const override { return label_; }

  const nn::Model& model() const { return *model_; }

 private:
  std::shared_ptr<const nn::Model> model_;
  std::string label_;
};

// canonicalize -> encode -> infer-mode forward.
Confidences predict_distribution(const PredictorPolicy& p, const Board& b);

// Arithmetic mean of member outputs. Throws InvalidArgument for an empty
// bag or members whose spec or encoding differ.
class BaggedPolicy final : public Policy {
 public:
  explicit BaggedPolicy(std::vector<PredictorPolicy> members, std::string label = "bag");

  Move choose(const Board& b) const override;
  bool has_confidences() const override { return true; }
  std::optional<Confidences> confidences(const Board& b) const override;
  std::vector<Confidences> confidences_batch(std::span<const CanonicalBoard> boards) const override;
  std::string name() const override { return label_; }

  std::size_t size() const { return members_.size(); }

 private:
  std::vector<PredictorPolicy> members_;
  std::string label_;
};

Confidences bagged_confidences(const BaggedPolicy& bp, const Board& b);

struct Stage {
  int first = 1;  // inclusive move numbers
  int last = 60;
  PolicyPtr policy;
};

// Delegates each decision to the stage containing its move number. Throws
// InvalidArgument for overlapping or empty intervals; NoStage when a move
// number with a legal move falls outside every interval.
class HybridPolicy final : public Policy {
 public:
  explicit HybridPolicy(std::vector<Stage> stages, std::string label = "hybrid");

  Move choose(const Board& b) const override;
  Move choose(const Board& b, int move_number) const;
  std::string name() const override { return label_; }

  const Policy& policy_for(int move_number) const;
  const std::vector<Stage>& stages() const { return stages_; }

 private:
  std::vector<Stage> stages_;
  std::string label_;
};

inline constexpr std::array<std::pair<int, int>, 4> kDefaultStages = {{{1, 15}, {16, 30}, {31, 45}, {46, 60}}};

HybridPolicy make_hybrid(const std::array<PolicyPtr, 4>& per_stage, std::string label = "hybrid");

Move hybrid_choose(const HybridPolicy& h, const Board& b, int move_number);

// ---- analytics ----------------------------------------------------------

// Percent of boards whose globally most excited output (no legality mask,
// lowest index on ties) is a legal move.
double unmasked_validity_rate(const Policy& p, const dataset::Dataset& d);

struct GridCell {
  std::size_t count = 0;
  std::vector<std::size_t> hits;  // per k
};

struct AccuracyGrid {
  std::vector<int> ks;
  std::map<std::pair<int, int>, GridCell> cells;  // (move number, legal-move count)

  std::size_t total() const;
  // Percent over every populated cell for ks[i].
  double marginal(std::size_t i) const;
  // move_number, legal_moves, count, then one accuracy column per k.
  std::string to_tsv() const;
};

inline constexpr int kFirstGridMove = 6;

// Masked top-k accuracy by (move number, legal-move count) over triples
// with move number >= kFirstGridMove. k > 1 needs a policy with
// confidences (InvalidArgument otherwise); k = 1 uses choose().
AccuracyGrid accuracy_grid(const Policy& p, const dataset::Dataset& d, const std::vector<int>& ks);

}  // namespace othello::policy
