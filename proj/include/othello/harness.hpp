#pragma once

// Paired-openings tournaments, the stage-gain experiment, policy accuracy
// against recorded moves, and synthetic game generation.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "othello/core.hpp"
#include "othello/dataset.hpp"
#include "othello/policy.hpp"
#include "othello/wthor.hpp"

namespace othello::harness {

struct Opening {
  Board board;
  std::vector<Move> moves;  // from the initial position, no passes
};

struct OpeningSet {
  std::vector<Opening> openings;
  std::uint64_t seed = 0;
  int plies = 6;
};

// Seeded random move sequences of exactly `plies` moves, distinct final
// positions. Throws InsufficientPositions when fewer than `count` distinct
// positions exist at that depth (counted exactly up to 8 plies).
OpeningSet generate_openings(std::uint64_t seed, std::size_t count, int plies = 6);

// One opening per line, its moves in a1-style coordinates ("f5d6c3" or
// "f5 d6 c3"); blank lines and '#' comments are skipped. Throws
// InvalidArgument for unparsable lines, IllegalMove for illegal sequences.
OpeningSet load_openings(const std::filesystem::path& path);
std::string format_openings(const OpeningSet& set);

struct GameResult {
  Board start;
  std::vector<Move> moves;  // including forced passes
  Board final_board;
  GameOutcome outcome;
  double black_points = 0;  // 1, 0.5 or 0
};

// Alternating choices with automatic forced passes until the game ends.
// Throws PolicyFault if a policy passes with a legal move available or
// returns an illegal move.
GameResult play_game(const policy::Policy& black, const policy::Policy& white, const Board& start);

struct MatchResult {
  std::size_t opening_id = 0;
  double a_black_points = 0;  // a plays Black
  double a_white_points = 0;  // roles switched
  std::vector<Move> game_a;
  std::vector<Move> game_b;
};

struct TournamentReport {
  std::string a_name;
  std::string b_name;
  std::vector<MatchResult> matches;
  // Times in microseconds over every single-position choose() call.
  double a_mean_move_us = 0;
  double b_mean_move_us = 0;

  // Points for a, counted in half points so that totals are exact.
  std::uint64_t a_half_points() const;
  std::uint64_t games() const { return 2 * matches.size(); }
  double winning_rate() const;  // percent of points possible for a

  // One line per opening: id, a as black, a as white, both transcripts.
  std::string to_tsv() const;
  // key=value lines; timings only when asked, since they vary run to run.
  std::string summary(bool with_timing = false) const;
};

// Games run in parallel across openings; results are assembled in opening
// order, so the report does not depend on `threads`.
TournamentReport run_tournament(const policy::Policy& a, const policy::Policy& b, const OpeningSet& openings,
                                unsigned threads = 1);

struct StageGainReport {
  std::vector<std::string> opponents;
  std::vector<double> base_rates;               // per opponent
  std::vector<std::vector<double>> hybrid_rates;  // [stage][opponent]

  double gain(std::size_t stage, std::size_t opponent) const {
    return hybrid_rates[stage][opponent] - base_rates[opponent];
  }
  std::string to_tsv() const;
};

// For each of the default four stages, the hybrid that plays `strong` in
// that stage and `base` elsewhere, against every opponent.
StageGainReport stage_gain(const policy::PolicyPtr& base, const policy::PolicyPtr& strong,
                           std::span<const policy::PolicyPtr> opponents, const OpeningSet& openings,
                           unsigned threads = 1);

// Percent of triples on which choose() equals the recorded move. Throws
// EmptyDataset.
double measure_policy_accuracy(const policy::Policy& p, const dataset::Dataset& d, unsigned threads = 1);

// Games between `teacher` on both sides, each starting from a distinct
// random opening of `random_plies` moves (duplicates of a final position
// are rejected while sampling). Recorded as WThor game records.
std::vector<wthor::GameRecord> synthesize_games(const policy::Policy& teacher, std::size_t count,
                                                std::uint64_t seed, int random_plies, unsigned threads = 1);

// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f);

}  // namespace othello::harness
