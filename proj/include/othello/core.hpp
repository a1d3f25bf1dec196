#pragma once

// Othello rules on bitboards.
//
// Cells are indexed row-major with a1 = 0, b1 = 1, ..., h1 = 7, a2 = 8, ...,
// h8 = 63. Bit i of a mask is cell i. Every other module reuses this mapping.

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "othello/error.hpp"

namespace othello {

using Bitboard = std::uint64_t;

enum class Player : std::uint8_t { Black = 0, White = 1 };

constexpr Player opponent(Player p) noexcept {
  return p == Player::Black ? Player::White : Player::Black;
}

struct Cell {
  std::uint8_t index = 0;

  constexpr Cell() = default;
  constexpr explicit Cell(int i) : index(static_cast<std::uint8_t>(i)) {}
  static constexpr Cell at(int row, int col) { return Cell(row * 8 + col); }

  constexpr int row() const noexcept { return index >> 3; }
  constexpr int col() const noexcept { return index & 7; }
  constexpr Bitboard bit() const noexcept { return Bitboard{1} << index; }

  friend constexpr auto operator<=>(Cell, Cell) = default;
};

// Parses "a1".."h8" (case-insensitive file letter).
std::optional<Cell> parse_cell(std::string_view text);
std::string to_string(Cell c);

class Move {
 public:
  constexpr Move() = default;
  static constexpr Move pass() noexcept { return Move(); }
  static constexpr Move at(Cell c) noexcept { return Move(c); }

  constexpr bool is_pass() const noexcept { return !has_cell_; }
  constexpr Cell cell() const noexcept { return cell_; }

  friend constexpr bool operator==(Move a, Move b) noexcept {
    return a.has_cell_ == b.has_cell_ && (!a.has_cell_ || a.cell_ == b.cell_);
  }

 private:
  constexpr explicit Move(Cell c) : cell_(c), has_cell_(true) {}
  Cell cell_{};
  bool has_cell_ = false;
};

std::string to_string(Move m);

struct Board {
  Bitboard black = 0;
  Bitboard white = 0;
  Player to_move = Player::Black;

  Bitboard mask(Player p) const noexcept { return p == Player::Black ? black : white; }
  Bitboard mover() const noexcept { return mask(to_move); }
  Bitboard opponent_mask() const noexcept { return mask(opponent(to_move)); }
  Bitboard empty() const noexcept { return ~(black | white); }
  int disc_count() const noexcept { return std::popcount(black | white); }

  friend bool operator==(const Board&, const Board&) = default;
};

// Board seen from the side to move.
struct CanonicalBoard {
  Bitboard mover = 0;
  Bitboard opponent = 0;

  friend auto operator<=>(const CanonicalBoard&, const CanonicalBoard&) = default;
};

enum class Winner : std::uint8_t { Black, White, Draw };

struct GameOutcome {
  Winner winner = Winner::Draw;
  int black_discs = 0;
  int white_discs = 0;

  friend bool operator==(const GameOutcome&, const GameOutcome&) = default;
};

// The dihedral group of the square. Rotations are clockwise when the board
// is drawn with rank 8 on top.
enum class Symmetry : std::uint8_t {
  Identity,
  Rotate90,
  Rotate180,
  Rotate270,
  FlipVertical,    // rank r <-> rank 9-r
  FlipHorizontal,  // file a <-> file h
  FlipDiagonal,    // a1-h8 diagonal fixed
  FlipAntiDiagonal // a8-h1 diagonal fixed
};

inline constexpr std::array<Symmetry, 8> kAllSymmetries = {
    Symmetry::Identity,     Symmetry::Rotate90,       Symmetry::Rotate180,
    Symmetry::Rotate270,    Symmetry::FlipVertical,   Symmetry::FlipHorizontal,
    Symmetry::FlipDiagonal, Symmetry::FlipAntiDiagonal};

// compose(a, b) is the symmetry "apply b, then a".
Symmetry compose(Symmetry a, Symmetry b) noexcept;
Symmetry inverse(Symmetry s) noexcept;

Bitboard transform(Bitboard mask, Symmetry s) noexcept;
Cell transform_cell(Cell c, Symmetry s) noexcept;
Board transform(const Board& b, Symmetry s) noexcept;
CanonicalBoard transform(const CanonicalBoard& b, Symmetry s) noexcept;

Board initial_board() noexcept;

// Moves for `mover` against `opp`; the mask of empty cells flipping >= 1 disc.
Bitboard legal_moves(Bitboard mover, Bitboard opp) noexcept;
Bitboard legal_moves(const Board& b) noexcept;
Bitboard legal_moves(const CanonicalBoard& b) noexcept;

// Discs flipped by placing a mover disc on `c`; 0 when the move is illegal.
Bitboard flips(Bitboard mover, Bitboard opp, Cell c) noexcept;

// Throws Error(IllegalMove) on an illegal cell, or on Pass while a move exists.
Board apply_move(const Board& b, Move m);

bool is_terminal(const Board& b) noexcept;
// Throws Error(NotTerminal).
GameOutcome outcome(const Board& b);

CanonicalBoard canonicalize(const Board& b) noexcept;
// Black-to-move board with the mover's discs in black.
Board to_board(const CanonicalBoard& c) noexcept;

// Leaf count of the legal game tree. A forced pass is a ply; terminal
// positions before `depth` contribute nothing.
std::uint64_t perft(const Board& b, int depth);

std::vector<Cell> cells_of(Bitboard mask);

template <typename F>
void for_each_cell(Bitboard mask, F&& f) {
  while (mask) {
    f(Cell(std::countr_zero(mask)));
    mask &= mask - 1;
  }
}

// 8 lines from rank 8 down to rank 1 ('X' black, 'O' white, '-' empty), then
// "X to move" or "O to move".
std::string to_text(const Board& b);
// Throws Error(InvalidArgument) on malformed text.
Board board_from_text(std::string_view text);

}  // namespace othello
