#pragma once

// Reader for WThor `.wtb` game databases (8x8 only).
//
// Layout: a 16-byte header followed by `record_count` records of 68 bytes.
// Multi-byte integers are little-endian.
//
//   header   0  century      1  year        2  month     3  day
//            4  record_count (u32)          8  aux_count (u16, unused in .wtb)
//           10  game_year (u16)            12  board_size (0 or 8)
//           13  game_type   14  depth      15  reserved
//   record   0  tournament_id (u16)  2  black_player_id (u16)
//            4  white_player_id (u16)
//            6  real_score   7  theoretical_score   8..67  moves
//
// A move byte is 10 * row + column with both digits in 1..8 and column 1 = a;
// 0 pads the list after the last move.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "othello/core.hpp"

namespace othello::wthor {

inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kRecordSize = 68;
inline constexpr std::size_t kMovesPerRecord = 60;

struct Header {
  std::uint8_t created_century = 20;
  std::uint8_t created_year = 0;
  std::uint8_t created_month = 1;
  std::uint8_t created_day = 1;
  std::uint32_t record_count = 0;
  std::uint16_t aux_count = 0;
  std::uint16_t game_year = 0;
  std::uint8_t board_size = 8;
  std::uint8_t game_type = 0;
  std::uint8_t depth = 0;
  std::uint8_t reserved = 0;

  friend bool operator==(const Header&, const Header&) = default;
};

struct GameRecord {
  std::uint16_t tournament_id = 0;
  std::uint16_t black_player_id = 0;
  std::uint16_t white_player_id = 0;
  std::uint8_t real_score = 0;
  std::uint8_t theoretical_score = 0;
  std::array<std::uint8_t, kMovesPerRecord> moves{};

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

struct Database {
  Header header;
  std::vector<GameRecord> games;
};

// Throws TruncatedFile when the length is not 16 + 68 * record_count and
// UnsupportedBoardSize for anything but 8x8.
Database parse_wtb(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_record(const GameRecord& g);
// Writes header.record_count = games.size().
std::vector<std::uint8_t> encode_wtb(Header header, const std::vector<GameRecord>& games);

// nullopt is the end-of-moves sentinel (byte 0). Throws MalformedMoveByte.
std::optional<Cell> decode_move_byte(std::uint8_t b);
std::uint8_t encode_move_byte(Cell c) noexcept;

struct Ply {
  Board board;
  Player mover = Player::Black;
  Cell move;
};

struct ReplayedGame {
  std::vector<Ply> plies;  // passes are applied between plies, never listed
  Board final_board;
  bool complete = false;   // final board is terminal
  GameOutcome result;      // disc counts of the final board
};

// Replays from the initial position, auto-passing for a mover without legal
// moves. Throws IllegalRecordedMove (naming `game_label` and the ply) or
// MalformedMoveByte.
ReplayedGame replay(const GameRecord& g, const std::string& game_label = "game");

// Black's score with empty squares awarded to the winner (split on a draw).
int black_score_with_empties(const Board& final_board);

struct ReplayFailure {
  std::size_t game_index = 0;
  std::string reason;
};

struct ValidationReport {
  std::size_t games = 0;
  std::size_t replayed = 0;
  std::size_t score_matches = 0;  // empties-to-winner convention
  std::size_t raw_score_matches = 0;
  std::vector<ReplayFailure> failures;
  std::vector<std::size_t> score_mismatches;  // game indices, for inspection
};

// Replays every game; games that fail are collected, not thrown.
struct Corpus {
  std::vector<GameRecord> records;
  std::vector<ReplayedGame> games;  // successfully replayed, in record order
  ValidationReport report;
};

Corpus replay_all(std::vector<GameRecord> records);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// One file, or every *.wtb in a directory in filename order. Files are parsed
// independently and concatenated in that order.
std::vector<GameRecord> load_records(const std::filesystem::path& path);

std::string describe(const Header& h);
std::string describe(const GameRecord& g);

}  // namespace othello::wthor
