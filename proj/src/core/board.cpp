#include "othello/core.hpp"

#include <cctype>
#include <sstream>

namespace othello {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IllegalMove: return "IllegalMove";
    case ErrorCode::NotTerminal: return "NotTerminal";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnsupportedBoardSize: return "UnsupportedBoardSize";
    case ErrorCode::MalformedMoveByte: return "MalformedMoveByte";
    case ErrorCode::IllegalRecordedMove: return "IllegalRecordedMove";
    case ErrorCode::CenterCell: return "CenterCell";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoStage: return "NoStage";
    case ErrorCode::InsufficientPositions: return "InsufficientPositions";
    case ErrorCode::PolicyFault: return "PolicyFault";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr Bitboard kNotFileA = 0xfefefefefefefefeULL;
constexpr Bitboard kNotFileH = 0x7f7f7f7f7f7f7f7fULL;

// Shift of every disc one step in direction `d`, dropping discs that would
// wrap across the a/h files.
enum Dir { N, S, E, W, NE, NW, SE, SW };

constexpr Bitboard shift(Bitboard x, int d) noexcept {
  switch (d) {
    case N: return x << 8;
    case S: return x >> 8;
    case E: return (x << 1) & kNotFileA;
    case W: return (x >> 1) & kNotFileH;
    case NE: return (x << 9) & kNotFileA;
    case NW: return (x << 7) & kNotFileH;
    case SE: return (x >> 7) & kNotFileA;
    case SW: return (x >> 9) & kNotFileH;
  }
  return 0;
}

}  // namespace

std::optional<Cell> parse_cell(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const int file = std::tolower(static_cast<unsigned char>(text[0])) - 'a';
  const int rank = text[1] - '1';
  if (file < 0 || file > 7 || rank < 0 || rank > 7) return std::nullopt;
  return Cell::at(rank, file);
}

std::string to_string(Cell c) {
  return {static_cast<char>('a' + c.col()), static_cast<char>('1' + c.row())};
}

std::string to_string(Move m) { return m.is_pass() ? "pass" : to_string(m.cell()); }

Board initial_board() noexcept {
  Board b;
  b.black = Cell::at(4, 3).bit() | Cell::at(3, 4).bit();  // d5, e4
  b.white = Cell::at(3, 3).bit() | Cell::at(4, 4).bit();  // d4, e5
  b.to_move = Player::Black;
  return b;
}

Bitboard legal_moves(Bitboard mover, Bitboard opp) noexcept {
  const Bitboard empty = ~(mover | opp);
  Bitboard moves = 0;
  for (int d = 0; d < 8; ++d) {
    Bitboard run = shift(mover, d) & opp;
    for (int i = 0; i < 5; ++i) run |= shift(run, d) & opp;
    moves |= shift(run, d) & empty;
  }
  return moves;
}

Bitboard legal_moves(const Board& b) noexcept { return legal_moves(b.mover(), b.opponent_mask()); }

Bitboard legal_moves(const CanonicalBoard& b) noexcept { return legal_moves(b.mover, b.opponent); }

Bitboard flips(Bitboard mover, Bitboard opp, Cell c) noexcept {
  const Bitboard placed = c.bit();
  if ((mover | opp) & placed) return 0;
  Bitboard flipped = 0;
  for (int d = 0; d < 8; ++d) {
    Bitboard run = 0;
    Bitboard x = shift(placed, d);
    while (x & opp) {
      run |= x;
      x = shift(x, d);
    }
    if (x & mover) flipped |= run;
  }
  return flipped;
}

Board apply_move(const Board& b, Move m) {
  const Bitboard moves = legal_moves(b);
  Board next = b;
  next.to_move = opponent(b.to_move);
  if (m.is_pass()) {
    if (moves) throw Error(ErrorCode::IllegalMove, "pass while a legal move exists");
    return next;
  }
  const Cell c = m.cell();
  if (c.index >= 64 || !(moves & c.bit())) {
    throw Error(ErrorCode::IllegalMove, to_string(c) + " is not legal");
  }
  const Bitboard f = flips(b.mover(), b.opponent_mask(), c);
  Bitboard mover = b.mover() | f | c.bit();
  Bitboard opp = b.opponent_mask() & ~f;
  if (b.to_move == Player::Black) {
    next.black = mover;
    next.white = opp;
  } else {
    next.white = mover;
    next.black = opp;
  }
  return next;
}

bool is_terminal(const Board& b) noexcept {
  return legal_moves(b.black, b.white) == 0 && legal_moves(b.white, b.black) == 0;
}

GameOutcome outcome(const Board& b) {
  if (!is_terminal(b)) throw Error(ErrorCode::NotTerminal, "game is still in progress");
  GameOutcome o;
  o.black_discs = std::popcount(b.black);
  o.white_discs = std::popcount(b.white);
  o.winner = o.black_discs > o.white_discs   ? Winner::Black
             : o.white_discs > o.black_discs ? Winner::White
                                             : Winner::Draw;
  return o;
}

CanonicalBoard canonicalize(const Board& b) noexcept { return {b.mover(), b.opponent_mask()}; }

Board to_board(const CanonicalBoard& c) noexcept { return {c.mover, c.opponent, Player::Black}; }

std::uint64_t perft(const Board& b, int depth) {
  if (depth <= 0) return 1;
  const Bitboard moves = legal_moves(b);
  if (!moves) {
    if (!legal_moves(b.opponent_mask(), b.mover())) return 0;
    return perft(apply_move(b, Move::pass()), depth - 1);
  }
  if (depth == 1) return static_cast<std::uint64_t>(std::popcount(moves));
  std::uint64_t total = 0;
  for_each_cell(moves, [&](Cell c) { total += perft(apply_move(b, Move::at(c)), depth - 1); });
  return total;
}

std::vector<Cell> cells_of(Bitboard mask) {
  std::vector<Cell> out;
  out.reserve(static_cast<std::size_t>(std::popcount(mask)));
  for_each_cell(mask, [&](Cell c) { out.push_back(c); });
  return out;
}

std::string to_text(const Board& b) {
  std::string out;
  out.reserve(8 * 9 + 10);
  for (int row = 7; row >= 0; --row) {
    for (int col = 0; col < 8; ++col) {
      const Bitboard bit = Cell::at(row, col).bit();
      out += (b.black & bit) ? 'X' : (b.white & bit) ? 'O' : '-';
    }
    out += '\n';
  }
  out += b.to_move == Player::Black ? "X to move\n" : "O to move\n";
  return out;
}

Board board_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Board b;
  for (int row = 7; row >= 0; --row) {
    if (!std::getline(in, line) || line.size() < 8) {
      throw Error(ErrorCode::InvalidArgument, "board text needs 8 rows of 8 cells");
    }
    for (int col = 0; col < 8; ++col) {
      const Bitboard bit = Cell::at(row, col).bit();
      switch (line[static_cast<std::size_t>(col)]) {
        case 'X': b.black |= bit; break;
        case 'O': b.white |= bit; break;
        case '-': break;
        default: throw Error(ErrorCode::InvalidArgument, "unexpected cell character in '" + line + "'");
      }
    }
  }
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "missing side-to-move line");
  if (line.rfind("X to move", 0) == 0) {
    b.to_move = Player::Black;
  } else if (line.rfind("O to move", 0) == 0) {
    b.to_move = Player::White;
  } else {
    throw Error(ErrorCode::InvalidArgument, "bad side-to-move line '" + line + "'");
  }
  return b;
}

}  // namespace othello
