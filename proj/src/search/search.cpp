#include "othello/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace othello::search {

namespace {

constexpr Bitboard kCorners = 0x8100000000000081ULL;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check(const SearchConfig& cfg) {
  if (cfg.depth < 1 || cfg.depth > 60) throw Error(ErrorCode::InvalidArgument, "search depth outside 1..60");
  if (!(heuristic_bound(cfg.eval) < kTerminalScale)) {
    throw Error(ErrorCode::InvalidArgument, "evaluation magnitude reaches the terminal scale");
  }
}

struct Searcher {
  const SearchConfig& cfg;
  std::uint64_t nodes = 0;

  std::vector<Move> children(const Board& b, Bitboard legal) const {
    std::vector<Move> moves;
    for_each_cell(legal, [&](Cell c) { moves.push_back(Move::at(c)); });
    if (cfg.ordering == Ordering::EvalOrdered && moves.size() > 1) {
      std::vector<std::pair<double, Move>> scored;
      for (Move m : moves) scored.emplace_back(-evaluate(cfg.eval, apply_move(b, m)), m);
      std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
      for (std::size_t i = 0; i < moves.size(); ++i) moves[i] = scored[i].second;
    }
    return moves;
  }

  double search(const Board& b, int depth, double alpha, double beta) {
    ++nodes;
    const Bitboard legal = legal_moves(b);
    if (!legal) {
      const Board passed = apply_move(b, Move::pass());
      if (!legal_moves(passed)) return terminal_value(b);
      if (depth == 0) return evaluate(cfg.eval, b);
      return -search(passed, depth - 1, -beta, -alpha);
    }
    if (depth == 0) return evaluate(cfg.eval, b);
    double best = -kInf;
    for (Move m : children(b, legal)) {
      const double v = -search(apply_move(b, m), depth - 1, -beta, -alpha);
      best = std::max(best, v);
      alpha = std::max(alpha, v);
      if (alpha >= beta) break;
    }
    return best;
  }
};

}  // namespace

Wpc symmetrize(const std::array<double, 64>& weights) {
  Wpc out;
  for (int i = 0; i < 64; ++i) {
    double s = 0;
    for (Symmetry t : kAllSymmetries) s += weights[transform_cell(Cell(i), t).index];
    out.weights[i] = s / 8.0;
  }
  return out;
}

Wpc default_wpc() {
  // rank 1 first; the table is its own mirror image in every direction
  static constexpr std::array<double, 64> kTable = {
      100, -20, 10, 5,  5,  10, -20, 100,  //
      -20, -50, -2, -2, -2, -2, -50, -20,  //
      10,  -2,  -1, -1, -1, -1, -2,  10,   //
      5,   -2,  -1, -1, -1, -1, -2,  5,    //
      5,   -2,  -1, -1, -1, -1, -2,  5,    //
      10,  -2,  -1, -1, -1, -1, -2,  10,   //
      -20, -50, -2, -2, -2, -2, -50, -20,  //
      100, -20, 10, 5,  5,  10, -20, 100,
  };
  return symmetrize(kTable);
}

Wpc load_wpc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::array<double, 64> w{};
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream fields(line);
    std::string tok;
    while (fields >> tok) {
      if (n == 64) throw Error(ErrorCode::InvalidArgument, path.string() + ": more than 64 weights");
      try {
        std::size_t used = 0;
        w[n] = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": bad weight '" + tok + "'");
      }
      ++n;
    }
  }
  if (n != 64) throw Error(ErrorCode::InvalidArgument, path.string() + ": expected 64 weights, got " + std::to_string(n));
  return symmetrize(w);
}

double evaluate(const EvalFn& e, const Board& b) {
  const Bitboard me = b.mover();
  const Bitboard opp = b.opponent_mask();
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Wpc>) {
          double s = 0;
          for_each_cell(me, [&](Cell c) { s += f.weights[c.index]; });
          for_each_cell(opp, [&](Cell c) { s -= f.weights[c.index]; });
          return s;
        } else if constexpr (std::is_same_v<T, DiscDiff>) {
          return std::popcount(me) - std::popcount(opp);
        } else {
          return f.disc * (std::popcount(me) - std::popcount(opp)) +
                 f.mobility * (std::popcount(legal_moves(me, opp)) - std::popcount(legal_moves(opp, me))) +
                 f.corner * (std::popcount(me & kCorners) - std::popcount(opp & kCorners));
        }
      },
      e);
}

double heuristic_bound(const EvalFn& e) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Wpc>) {
          double s = 0;
          for (double w : f.weights) s += std::abs(w);
          return s;
        } else if constexpr (std::is_same_v<T, DiscDiff>) {
          return 64;
        } else {
          return 64 * std::abs(f.disc) + 64 * std::abs(f.mobility) + 4 * std::abs(f.corner);
        }
      },
      e);
}

double terminal_value(const Board& b) {
  return kTerminalScale * (std::popcount(b.mover()) - std::popcount(b.opponent_mask()));
}

SearchResult negamax(const Board& b, const SearchConfig& cfg) {
  check(cfg);
  Searcher s{cfg};
  SearchResult r;
  ++s.nodes;
  const Bitboard legal = legal_moves(b);
  if (!legal) {
    const Board passed = apply_move(b, Move::pass());
    r.value = legal_moves(passed) ? -s.search(passed, cfg.depth - 1, -kInf, kInf) : terminal_value(b);
    r.nodes = s.nodes;
    return r;
  }
  double best = -kInf;
  for (Move m : s.children(b, legal)) {
    // A child below the current best's index may still take it on a tie, so
    // it is searched with a window that admits equality.
    const bool lower = !r.best.is_pass() && m.cell().index < r.best.cell().index;
    const double alpha = lower ? std::nextafter(best, -kInf) : best;
    const double v = -s.search(apply_move(b, m), cfg.depth - 1, -kInf, -alpha);
    if (r.best.is_pass() || v > best || (v == best && lower)) {
      best = v;
      r.best = m;
    }
  }
  r.value = best;
  r.nodes = s.nodes;
  return r;
}

std::string to_string(const EvalFn& e) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Wpc>) {
          return "wpc";
        } else if constexpr (std::is_same_v<T, DiscDiff>) {
          return "discdiff";
        } else {
          return "mobility";
        }
      },
      e);
}

SearchPolicy::SearchPolicy(SearchConfig cfg, std::string label) : cfg_(std::move(cfg)), label_(std::move(label)) {
  check(cfg_);
  if (label_.empty()) label_ = "search:" + to_string(cfg_.eval) + ":" + std::to_string(cfg_.depth);
}

Move SearchPolicy::choose(const Board& b) const { return negamax(b, cfg_).best; }

}  // namespace othello::search
