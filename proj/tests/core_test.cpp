#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracle/naive_rules.hpp"
#include "othello/core.hpp"
#include "test_util.hpp"

using namespace othello;

namespace {

Cell cell(const char* name) { return *parse_cell(name); }

std::set<std::string> names(Bitboard m) {
  std::set<std::string> out;
  for_each_cell(m, [&](Cell c) { out.insert(to_string(c)); });
  return out;
}

}  // namespace

TEST(Core, InitialBoard) {
  const Board b = initial_board();
  EXPECT_EQ(b.to_move, Player::Black);
  EXPECT_EQ(b.black, cell("d5").bit() | cell("e4").bit());
  EXPECT_EQ(b.white, cell("d4").bit() | cell("e5").bit());
  EXPECT_EQ(b.disc_count(), 4);
  EXPECT_EQ(names(legal_moves(b)), (std::set<std::string>{"d3", "c4", "f5", "e6"}));
}

TEST(Core, OpponentIsInvolution) {
  EXPECT_EQ(opponent(opponent(Player::Black)), Player::Black);
  EXPECT_EQ(opponent(opponent(Player::White)), Player::White);
  EXPECT_NE(opponent(Player::Black), Player::Black);
}

TEST(Core, CellNaming) {
  EXPECT_EQ(cell("a1").index, 0);
  EXPECT_EQ(cell("b1").index, 1);
  EXPECT_EQ(cell("h8").index, 63);
  EXPECT_EQ(cell("F5").index, 37);
  EXPECT_FALSE(parse_cell("i1"));
  EXPECT_FALSE(parse_cell("a9"));
  EXPECT_FALSE(parse_cell("a"));
}

TEST(Core, FullBoardHasNoMoves) {
  Board b{0xffffffff00000000ULL, 0x00000000ffffffffULL, Player::Black};
  EXPECT_EQ(legal_moves(b), 0u);
  EXPECT_TRUE(is_terminal(b));
}

TEST(Core, ApplyF5FromStart) {
  const Board b = apply_move(initial_board(), Move::at(cell("f5")));
  EXPECT_EQ(b.black, cell("e4").bit() | cell("d5").bit() | cell("e5").bit() | cell("f5").bit());
  EXPECT_EQ(b.white, cell("d4").bit());
  EXPECT_EQ(b.to_move, Player::White);
}

TEST(Core, IllegalMoveThrows) {
  try {
    apply_move(initial_board(), Move::at(cell("a1")));
    FAIL() << "expected IllegalMove";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllegalMove);
  }
  EXPECT_THROW(apply_move(initial_board(), Move::pass()), Error);
  EXPECT_THROW(apply_move(initial_board(), Move::at(cell("d4"))), Error);
}

TEST(Core, ForcedPassSwapsSideOnly) {
  // White's corner disc cannot be enclosed; White can capture b1 via c1.
  Board b;
  b.black = cell("b1").bit();
  b.white = cell("a1").bit();
  b.to_move = Player::Black;
  ASSERT_EQ(legal_moves(b), 0u);
  ASSERT_FALSE(is_terminal(b));
  const Board p = apply_move(b, Move::pass());
  EXPECT_EQ(p.black, b.black);
  EXPECT_EQ(p.white, b.white);
  EXPECT_EQ(p.to_move, Player::White);
}

TEST(Core, OutcomeCounts) {
  // 33 black, 31 white, full board
  Bitboard black = (~Bitboard{0}) >> 31;
  Board b{black, ~black, Player::White};
  ASSERT_EQ(std::popcount(b.black), 33);
  const GameOutcome o = outcome(b);
  EXPECT_EQ(o.winner, Winner::Black);
  EXPECT_EQ(o.black_discs, 33);
  EXPECT_EQ(o.white_discs, 31);

  Board draw{0xffffffff00000000ULL, 0x00000000ffffffffULL, Player::Black};
  EXPECT_EQ(outcome(draw).winner, Winner::Draw);

  EXPECT_FALSE(is_terminal(initial_board()));
  try {
    outcome(initial_board());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotTerminal);
  }
}

TEST(Core, MatchesNaiveGenerator) {
  for (const Board& b : testutil::random_positions(20000, 11)) {
    ASSERT_EQ(legal_moves(b), testutil::naive_move_mask(b)) << to_text(b);
    const naive::Position np = testutil::to_naive(b);
    for_each_cell(legal_moves(b), [&](Cell c) {
      const Board next = apply_move(b, Move::at(c));
      const naive::Position nn = naive::play(np, c.index);
      ASSERT_EQ(next.black, nn.mask(naive::Black));
      ASSERT_EQ(next.white, nn.mask(naive::White));
    });
  }
}

TEST(Core, FlipsLieOnEnclosedLines) {
  for (const Board& b : testutil::random_positions(2000, 12)) {
    for_each_cell(legal_moves(b), [&](Cell c) {
      const Bitboard f = flips(b.mover(), b.opponent_mask(), c);
      ASSERT_NE(f, 0u);
      for_each_cell(f, [&](Cell x) {
        ASSERT_TRUE(b.opponent_mask() & x.bit());
        const int dr = (x.row() > c.row()) - (x.row() < c.row());
        const int dc = (x.col() > c.col()) - (x.col() < c.col());
        // on a line through c
        const int ar = std::abs(x.row() - c.row());
        const int ac = std::abs(x.col() - c.col());
        ASSERT_TRUE(ar == 0 || ac == 0 || ar == ac);
        // walk past x: only opponent discs until a mover disc
        int r = x.row() + dr, col = x.col() + dc;
        bool closed = false;
        while (r >= 0 && r < 8 && col >= 0 && col < 8) {
          const Bitboard bit = Cell::at(r, col).bit();
          if (b.mover() & bit) {
            closed = true;
            break;
          }
          if (!(b.opponent_mask() & bit)) break;
          r += dr;
          col += dc;
        }
        ASSERT_TRUE(closed);
      });
    });
  }
}

TEST(Core, RandomPlayoutsPreserveInvariants) {
  std::mt19937_64 rng(5);
  for (int game = 0; game < 20000; ++game) {
    Board b = initial_board();
    while (!is_terminal(b)) {
      const Bitboard moves = legal_moves(b);
      if (!moves) {
        b = apply_move(b, Move::pass());
        continue;
      }
      const auto cs = cells_of(moves);
      const int before = b.disc_count();
      b = apply_move(b, Move::at(cs[rng() % cs.size()]));
      ASSERT_EQ(b.black & b.white, 0u);
      ASSERT_EQ(b.disc_count(), before + 1);
    }
  }
}

TEST(Core, PerftMatchesNaive) {
  const naive::Position start = naive::Position::initial();
  const std::uint64_t expected[] = {1, 4, 12, 56, 244, 1396};
  for (int d = 0; d <= 5; ++d) {
    EXPECT_EQ(naive::perft(start, d), expected[d]);
    EXPECT_EQ(perft(initial_board(), d), expected[d]) << "depth " << d;
  }
}

TEST(Symmetry, CellActionMatchesBitboardAction) {
  for (Symmetry s : kAllSymmetries) {
    for (int i = 0; i < 64; ++i) {
      EXPECT_EQ(transform(Cell(i).bit(), s), transform_cell(Cell(i), s).bit());
      EXPECT_EQ(transform_cell(Cell(i), s).index, naive::map_cell(i, static_cast<int>(s)));
    }
  }
}

TEST(Symmetry, GroupLaws) {
  const Board b = testutil::random_positions(1, 3).front();
  EXPECT_EQ(transform(b, Symmetry::Identity), b);
  Board r = b;
  for (int i = 0; i < 4; ++i) r = transform(r, Symmetry::Rotate90);
  EXPECT_EQ(r, b);

  for (Symmetry a : kAllSymmetries) {
    EXPECT_EQ(compose(a, Symmetry::Identity), a);
    EXPECT_EQ(compose(Symmetry::Identity, a), a);
    EXPECT_EQ(compose(a, inverse(a)), Symmetry::Identity);
    for (Symmetry c : kAllSymmetries) {
      // closure and agreement with sequential application
      const Symmetry ac = compose(a, c);
      EXPECT_EQ(transform(transform(b, c), a), transform(b, ac));
      for (Symmetry d : kAllSymmetries) {
        EXPECT_EQ(compose(compose(a, c), d), compose(a, compose(c, d)));
      }
    }
  }
  std::set<Symmetry> distinct;
  for (Symmetry a : kAllSymmetries) {
    for (Symmetry c : kAllSymmetries) distinct.insert(compose(a, c));
  }
  EXPECT_EQ(distinct.size(), 8u);
}

TEST(Symmetry, CommutesWithRules) {
  for (const Board& b : testutil::random_positions(10000, 21)) {
    for (Symmetry s : kAllSymmetries) {
      const Board t = transform(b, s);
      Bitboard expected = 0;
      for (int c : naive::legal_moves(testutil::to_naive(b))) {
        expected |= Bitboard{1} << naive::map_cell(c, static_cast<int>(s));
      }
      ASSERT_EQ(legal_moves(t), expected);
      ASSERT_EQ(transform(legal_moves(b), s), legal_moves(t));
    }
  }
}

TEST(Canonical, Perspective) {
  Board b = apply_move(initial_board(), Move::at(cell("f5")));
  const CanonicalBoard w = canonicalize(b);
  EXPECT_EQ(w.mover, b.white);
  EXPECT_EQ(w.opponent, b.black);
  const CanonicalBoard k = canonicalize(initial_board());
  EXPECT_EQ(k.mover, initial_board().black);
  EXPECT_EQ(k.opponent, initial_board().white);
  for (const Board& x : testutil::random_positions(500, 8)) {
    for (Symmetry s : kAllSymmetries) {
      EXPECT_EQ(canonicalize(transform(x, s)), transform(canonicalize(x), s));
    }
    EXPECT_EQ(legal_moves(canonicalize(x)), legal_moves(x));
  }
}

TEST(Text, RoundTrip) {
  const Board b = apply_move(initial_board(), Move::at(cell("f5")));
  const std::string text = to_text(b);
  EXPECT_EQ(text,
            "--------\n"
            "--------\n"
            "--------\n"
            "---XXX--\n"
            "---OX---\n"
            "--------\n"
            "--------\n"
            "--------\n"
            "O to move\n");
  EXPECT_EQ(board_from_text(text), b);
  for (const Board& x : testutil::random_positions(200, 4)) EXPECT_EQ(board_from_text(to_text(x)), x);
  EXPECT_THROW(board_from_text("garbage"), Error);
}
