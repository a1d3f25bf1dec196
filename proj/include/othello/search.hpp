#pragma once

// Fixed-depth alpha-beta negamax players with simple evaluations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "othello/core.hpp"
#include "othello/policy.hpp"

namespace othello::search {

struct Wpc {
  std::array<double, 64> weights{};  // cell-index order
};

struct DiscDiff {};

struct MobilityMix {
  double disc = 1.0;
  double mobility = 4.0;
  double corner = 25.0;
};

using EvalFn = std::variant<Wpc, DiscDiff, MobilityMix>;

// Average of the table over the 8 board symmetries.
Wpc symmetrize(const std::array<double, 64>& weights);

// Corners strongly positive, their neighbours negative, edges mildly positive.
Wpc default_wpc();

// 64 whitespace-separated reals in cell-index order; '#' starts a comment.
// The result is symmetrized. Throws Io or InvalidArgument.
Wpc load_wpc(const std::filesystem::path& path);

// Mover's perspective.
double evaluate(const EvalFn& e, const Board& b);

// Largest |evaluate| any position can reach.
double heuristic_bound(const EvalFn& e);

// Terminal positions score disc differential times this; every
// heuristic_bound must stay below it.
inline constexpr double kTerminalScale = 1e6;

double terminal_value(const Board& b);

enum class Ordering { Fixed, EvalOrdered };

struct SearchConfig {
  int depth = 1;
  EvalFn eval = default_wpc();
  Ordering ordering = Ordering::Fixed;
};

struct SearchResult {
  Move best = Move::pass();
  double value = 0.0;
  std::uint64_t nodes = 0;
};

// Exact alpha-beta negamax to cfg.depth. Forced passes cost one ply, a
// double pass is terminal, and equal values go to the lowest cell index.
// Throws InvalidArgument for depth < 1 or an evaluation whose bound reaches
// kTerminalScale.
SearchResult negamax(const Board& b, const SearchConfig& cfg);

std::string to_string(const EvalFn& e);

class SearchPolicy final : public policy::Policy {
 public:
  explicit SearchPolicy(SearchConfig cfg, std::string label = "");

  Move choose(const Board& b) const override;
  std::string name() const override { return label_; }
  const SearchConfig& config() const { return cfg_; }

 private:
  SearchConfig cfg_;
  std::string label_;
};

}  // namespace othello::search
