#include <array>

#include "othello/core.hpp"

namespace othello {

namespace {

// rank r <-> rank 7-r
constexpr Bitboard flip_vertical(Bitboard x) noexcept { return __builtin_bswap64(x); }

// file c <-> file 7-c
constexpr Bitboard mirror_horizontal(Bitboard x) noexcept {
  constexpr Bitboard k1 = 0x5555555555555555ULL;
  constexpr Bitboard k2 = 0x3333333333333333ULL;
  constexpr Bitboard k4 = 0x0f0f0f0f0f0f0f0fULL;
  x = ((x >> 1) & k1) | ((x & k1) << 1);
  x = ((x >> 2) & k2) | ((x & k2) << 2);
  x = ((x >> 4) & k4) | ((x & k4) << 4);
  return x;
}

// (r, c) -> (c, r)
constexpr Bitboard flip_diagonal(Bitboard x) noexcept {
  constexpr Bitboard k1 = 0x5500550055005500ULL;
  constexpr Bitboard k2 = 0x3333000033330000ULL;
  constexpr Bitboard k4 = 0x0f0f0f0f00000000ULL;
  Bitboard t = k4 & (x ^ (x << 28));
  x ^= t ^ (t >> 28);
  t = k2 & (x ^ (x << 14));
  x ^= t ^ (t >> 14);
  t = k1 & (x ^ (x << 7));
  x ^= t ^ (t >> 7);
  return x;
}

// (r, c) -> (7-c, 7-r)
constexpr Bitboard flip_anti_diagonal(Bitboard x) noexcept {
  constexpr Bitboard k1 = 0xaa00aa00aa00aa00ULL;
  constexpr Bitboard k2 = 0xcccc0000cccc0000ULL;
  constexpr Bitboard k4 = 0xf0f0f0f00f0f0f0fULL;
  Bitboard t = x ^ (x << 36);
  x ^= k4 & (t ^ (x >> 36));
  t = k2 & (x ^ (x << 18));
  x ^= t ^ (t >> 18);
  t = k1 & (x ^ (x << 9));
  x ^= t ^ (t >> 9);
  return x;
}

constexpr Cell map_cell(Cell c, Symmetry s) noexcept {
  const int r = c.row();
  const int col = c.col();
  switch (s) {
    case Symmetry::Identity: return Cell::at(r, col);
    case Symmetry::Rotate90: return Cell::at(col, 7 - r);
    case Symmetry::Rotate180: return Cell::at(7 - r, 7 - col);
    case Symmetry::Rotate270: return Cell::at(7 - col, r);
    case Symmetry::FlipVertical: return Cell::at(7 - r, col);
    case Symmetry::FlipHorizontal: return Cell::at(r, 7 - col);
    case Symmetry::FlipDiagonal: return Cell::at(col, r);
    case Symmetry::FlipAntiDiagonal: return Cell::at(7 - col, 7 - r);
  }
  return c;
}

// Group table derived from the cell action: two symmetries are equal iff
// they move b1 and a2 to the same places.
constexpr std::array<std::array<Symmetry, 8>, 8> make_composition_table() {
  std::array<std::array<Symmetry, 8>, 8> table{};
  for (Symmetry a : kAllSymmetries) {
    for (Symmetry b : kAllSymmetries) {
      const Cell p = map_cell(map_cell(Cell(1), b), a);
      const Cell q = map_cell(map_cell(Cell(8), b), a);
      for (Symmetry c : kAllSymmetries) {
        if (map_cell(Cell(1), c) == p && map_cell(Cell(8), c) == q) {
          table[static_cast<int>(a)][static_cast<int>(b)] = c;
        }
      }
    }
  }
  return table;
}

constexpr auto kComposition = make_composition_table();

}  // namespace

Symmetry compose(Symmetry a, Symmetry b) noexcept {
  return kComposition[static_cast<int>(a)][static_cast<int>(b)];
}

Symmetry inverse(Symmetry s) noexcept {
  switch (s) {
    case Symmetry::Rotate90: return Symmetry::Rotate270;
    case Symmetry::Rotate270: return Symmetry::Rotate90;
    default: return s;
  }
}

Cell transform_cell(Cell c, Symmetry s) noexcept { return map_cell(c, s); }

Bitboard transform(Bitboard x, Symmetry s) noexcept {
  switch (s) {
    case Symmetry::Identity: return x;
    case Symmetry::Rotate90: return mirror_horizontal(flip_diagonal(x));
    case Symmetry::Rotate180: return mirror_horizontal(flip_vertical(x));
    case Symmetry::Rotate270: return flip_vertical(flip_diagonal(x));
    case Symmetry::FlipVertical: return flip_vertical(x);
    case Symmetry::FlipHorizontal: return mirror_horizontal(x);
    case Symmetry::FlipDiagonal: return flip_diagonal(x);
    case Symmetry::FlipAntiDiagonal: return flip_anti_diagonal(x);
  }
  return x;
}

Board transform(const Board& b, Symmetry s) noexcept {
  return {transform(b.black, s), transform(b.white, s), b.to_move};
}

CanonicalBoard transform(const CanonicalBoard& b, Symmetry s) noexcept {
  return {transform(b.mover, s), transform(b.opponent, s)};
}

}  // namespace othello
