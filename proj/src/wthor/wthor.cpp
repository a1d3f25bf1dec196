#include "othello/wthor.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

namespace othello::wthor {

namespace {

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

}  // namespace

Database parse_wtb(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::TruncatedFile, "file shorter than the 16-byte header");
  }
  const std::uint8_t* p = bytes.data();
  Database db;
  Header& h = db.header;
  h.created_century = p[0];
  h.created_year = p[1];
  h.created_month = p[2];
  h.created_day = p[3];
  h.record_count = read_u32(p + 4);
  h.aux_count = read_u16(p + 8);
  h.game_year = read_u16(p + 10);
  h.board_size = p[12];
  h.game_type = p[13];
  h.depth = p[14];
  h.reserved = p[15];

  if (h.board_size != 0 && h.board_size != 8) {
    throw Error(ErrorCode::UnsupportedBoardSize, "board size " + std::to_string(h.board_size));
  }
  const std::size_t expected = kHeaderSize + kRecordSize * static_cast<std::size_t>(h.record_count);
  if (bytes.size() != expected) {
    throw Error(ErrorCode::TruncatedFile, "expected " + std::to_string(expected) + " bytes for " +
                                              std::to_string(h.record_count) + " records, got " +
                                              std::to_string(bytes.size()));
  }

  db.games.resize(h.record_count);
  for (std::size_t i = 0; i < h.record_count; ++i) {
    const std::uint8_t* r = p + kHeaderSize + i * kRecordSize;
    GameRecord& g = db.games[i];
    g.tournament_id = read_u16(r);
    g.black_player_id = read_u16(r + 2);
    g.white_player_id = read_u16(r + 4);
    g.real_score = r[6];
    g.theoretical_score = r[7];
    std::copy_n(r + 8, kMovesPerRecord, g.moves.begin());
  }
  return db;
}

std::vector<std::uint8_t> encode_record(const GameRecord& g) {
  std::vector<std::uint8_t> out;
  out.reserve(kRecordSize);
  put_u16(out, g.tournament_id);
  put_u16(out, g.black_player_id);
  put_u16(out, g.white_player_id);
  out.push_back(g.real_score);
  out.push_back(g.theoretical_score);
  out.insert(out.end(), g.moves.begin(), g.moves.end());
  return out;
}

std::vector<std::uint8_t> encode_wtb(Header h, const std::vector<GameRecord>& games) {
  h.record_count = static_cast<std::uint32_t>(games.size());
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + kRecordSize * games.size());
  out.push_back(h.created_century);
  out.push_back(h.created_year);
  out.push_back(h.created_month);
  out.push_back(h.created_day);
  put_u32(out, h.record_count);
  put_u16(out, h.aux_count);
  put_u16(out, h.game_year);
  out.push_back(h.board_size);
  out.push_back(h.game_type);
  out.push_back(h.depth);
  out.push_back(h.reserved);
  for (const GameRecord& g : games) {
    const auto rec = encode_record(g);
    out.insert(out.end(), rec.begin(), rec.end());
  }
  return out;
}

std::optional<Cell> decode_move_byte(std::uint8_t b) {
  if (b == 0) return std::nullopt;
  const int row = b / 10;
  const int col = b % 10;
  if (row < 1 || row > 8 || col < 1 || col > 8) {
    throw Error(ErrorCode::MalformedMoveByte, "move byte " + std::to_string(b));
  }
  return Cell::at(row - 1, col - 1);
}

std::uint8_t encode_move_byte(Cell c) noexcept {
  return static_cast<std::uint8_t>(10 * (c.row() + 1) + c.col() + 1);
}

ReplayedGame replay(const GameRecord& g, const std::string& game_label) {
  ReplayedGame out;
  Board b = initial_board();
  std::size_t ply = 0;
  for (; ply < kMovesPerRecord; ++ply) {
    const std::optional<Cell> cell = decode_move_byte(g.moves[ply]);
    if (!cell) break;
    if (!legal_moves(b) && !is_terminal(b)) b = apply_move(b, Move::pass());
    if (!(legal_moves(b) & cell->bit())) {
      throw Error(ErrorCode::IllegalRecordedMove,
                  game_label + " ply " + std::to_string(ply + 1) + ": " + to_string(*cell));
    }
    out.plies.push_back({b, b.to_move, *cell});
    b = apply_move(b, Move::at(*cell));
  }
  for (std::size_t rest = ply; rest < kMovesPerRecord; ++rest) {
    if (g.moves[rest] != 0) {
      throw Error(ErrorCode::MalformedMoveByte,
                  game_label + ": move byte after end-of-moves at ply " + std::to_string(rest + 1));
    }
  }
  if (!legal_moves(b) && !is_terminal(b)) b = apply_move(b, Move::pass());
  out.final_board = b;
  out.complete = is_terminal(b);
  out.result.black_discs = std::popcount(b.black);
  out.result.white_discs = std::popcount(b.white);
  out.result.winner = out.result.black_discs > out.result.white_discs   ? Winner::Black
                      : out.result.white_discs > out.result.black_discs ? Winner::White
                                                                        : Winner::Draw;
  return out;
}

int black_score_with_empties(const Board& b) {
  const int black = std::popcount(b.black);
  const int white = std::popcount(b.white);
  const int empties = 64 - black - white;
  if (black > white) return black + empties;
  if (black == white) return black + empties / 2;
  return black;
}

Corpus replay_all(std::vector<GameRecord> records) {
  Corpus c;
  c.report.games = records.size();
  c.games.reserve(records.size());
  std::vector<GameRecord> kept;
  kept.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      ReplayedGame g = replay(records[i], "game " + std::to_string(i));
      const int with_empties = black_score_with_empties(g.final_board);
      if (with_empties == records[i].real_score) {
        ++c.report.score_matches;
      } else {
        c.report.score_mismatches.push_back(i);
      }
      if (g.result.black_discs == records[i].real_score) ++c.report.raw_score_matches;
      c.games.push_back(std::move(g));
      kept.push_back(records[i]);
    } catch (const Error& e) {
      c.report.failures.push_back({i, e.what()});
    }
  }
  c.report.replayed = c.games.size();
  c.records = std::move(kept);
  return c;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<GameRecord> load_records(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (entry.is_regular_file() && ext == ".wtb") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<GameRecord> all;
  for (const auto& f : files) {
    const auto bytes = read_file(f);
    Database db = parse_wtb(bytes);
    all.insert(all.end(), db.games.begin(), db.games.end());
  }
  return all;
}

std::string describe(const Header& h) {
  std::ostringstream s;
  s << "created\t" << int(h.created_century) << int(h.created_year / 10) << int(h.created_year % 10) << "-"
    << int(h.created_month) << "-" << int(h.created_day) << "\n"
    << "record_count\t" << h.record_count << "\n"
    << "game_year\t" << h.game_year << "\n"
    << "board_size\t" << int(h.board_size == 0 ? 8 : h.board_size) << "\n"
    << "game_type\t" << int(h.game_type) << "\n"
    << "depth\t" << int(h.depth) << "\n";
  return s.str();
}

std::string describe(const GameRecord& g) {
  std::ostringstream s;
  s << "tournament=" << g.tournament_id << " black=" << g.black_player_id << " white=" << g.white_player_id
    << " score=" << int(g.real_score) << " theoretical=" << int(g.theoretical_score) << " moves=";
  for (std::uint8_t b : g.moves) {
    if (b == 0) break;
    try {
      s << to_string(*decode_move_byte(b));
    } catch (const Error&) {
      s << "?" << int(b) << "?";
    }
  }
  return s.str();
}

}  // namespace othello::wthor
