#include "othello/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "othello/random.hpp"

namespace othello::harness {

namespace {

struct BoardLess {
  bool operator()(const Board& x, const Board& y) const noexcept {
    return std::tie(x.black, x.white, x.to_move) < std::tie(y.black, y.white, y.to_move);
  }
};

using BoardSet = std::set<Board, BoardLess>;

struct Timing {
  double black_us = 0;
  double white_us = 0;
  std::uint64_t black_calls = 0;
  std::uint64_t white_calls = 0;
};

GameResult play(const policy::Policy& black, const policy::Policy& white, const Board& start, Timing* timing) {
  GameResult g;
  g.start = start;
  Board b = start;
  while (!is_terminal(b)) {
    const Bitboard legal = legal_moves(b);
    if (!legal) {
      g.moves.push_back(Move::pass());
      b = apply_move(b, Move::pass());
      continue;
    }
    const bool is_black = b.to_move == Player::Black;
    const policy::Policy& p = is_black ? black : white;
    const auto t0 = std::chrono::steady_clock::now();
    const Move m = p.choose(b);
    if (timing) {
      const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
      (is_black ? timing->black_us : timing->white_us) += us;
      ++(is_black ? timing->black_calls : timing->white_calls);
    }
    if (m.is_pass() || !(legal & m.cell().bit())) {
      throw Error(ErrorCode::PolicyFault, p.name() + " chose " + to_string(m) + " on\n" + to_text(b));
    }
    g.moves.push_back(m);
    b = apply_move(b, m);
  }
  g.final_board = b;
  g.outcome = outcome(b);
  g.black_points = g.outcome.winner == Winner::Black ? 1.0 : g.outcome.winner == Winner::Draw ? 0.5 : 0.0;
  return g;
}

void collect(const Board& b, int plies, BoardSet& out, const std::size_t cap) {
  if (out.size() > cap) return;
  if (plies == 0) {
    out.insert(b);
    return;
  }
  for_each_cell(legal_moves(b), [&](Cell c) { collect(apply_move(b, Move::at(c)), plies - 1, out, cap); });
}

std::string transcript(const std::vector<Move>& moves) {
  std::string s;
  for (Move m : moves) s += to_string(m);
  return s;
}

std::string format_rate(double r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << r;
  return s.str();
}

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

OpeningSet generate_openings(std::uint64_t seed, std::size_t count, int plies) {
  if (plies < 0) throw Error(ErrorCode::InvalidArgument, "negative opening length");
  if (plies <= 8) {
    BoardSet all;
    collect(initial_board(), plies, all, count);
    if (all.size() < count) {
      throw Error(ErrorCode::InsufficientPositions, "only " + std::to_string(all.size()) +
                                                        " distinct positions after " + std::to_string(plies) +
                                                        " plies, " + std::to_string(count) + " requested");
    }
  }
  OpeningSet set;
  set.seed = seed;
  set.plies = plies;
  Rng rng(seed);
  BoardSet seen;
  const std::uint64_t max_attempts = 1000 * static_cast<std::uint64_t>(count) + 1000000;
  for (std::uint64_t attempt = 0; set.openings.size() < count; ++attempt) {
    if (attempt == max_attempts) {
      throw Error(ErrorCode::InsufficientPositions, "could not sample " + std::to_string(count) + " distinct openings");
    }
    Opening o{initial_board(), {}};
    bool ok = true;
    for (int ply = 0; ply < plies && ok; ++ply) {
      const std::vector<Cell> moves = cells_of(legal_moves(o.board));
      if (moves.empty()) {
        ok = false;
        break;
      }
      const Move m = Move::at(moves[rng.below(moves.size())]);
      o.moves.push_back(m);
      o.board = apply_move(o.board, m);
    }
    if (ok && seen.insert(o.board).second) set.openings.push_back(std::move(o));
  }
  return set;
}

OpeningSet load_openings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  OpeningSet set;
  set.plies = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    std::string compact;
    for (char ch : line) {
      if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
    }
    if (compact.empty()) continue;
    if (compact.size() % 2) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": odd move text");
    }
    Opening o{initial_board(), {}};
    for (std::size_t i = 0; i < compact.size(); i += 2) {
      const auto c = parse_cell(compact.substr(i, 2));
      if (!c) {
        throw Error(ErrorCode::InvalidArgument,
                    path.string() + ":" + std::to_string(line_no) + ": bad cell '" + compact.substr(i, 2) + "'");
      }
      o.moves.push_back(Move::at(*c));
      o.board = apply_move(o.board, o.moves.back());
    }
    const int n = static_cast<int>(o.moves.size());
    set.plies = set.plies < 0 || set.plies == n ? n : 0;
    set.openings.push_back(std::move(o));
  }
  if (set.plies < 0) set.plies = 0;
  return set;
}

std::string format_openings(const OpeningSet& set) {
  std::string s;
  for (const Opening& o : set.openings) s += transcript(o.moves) + "\n";
  return s;
}

GameResult play_game(const policy::Policy& black, const policy::Policy& white, const Board& start) {
  return play(black, white, start, nullptr);
}

std::uint64_t TournamentReport::a_half_points() const {
  std::uint64_t h = 0;
  for (const MatchResult& m : matches) h += static_cast<std::uint64_t>(2 * (m.a_black_points + m.a_white_points));
  return h;
}

double TournamentReport::winning_rate() const {
  return matches.empty() ? 0.0 : 100.0 * static_cast<double>(a_half_points()) / static_cast<double>(2 * games());
}

std::string TournamentReport::to_tsv() const {
  std::ostringstream s;
  s << "opening\ta_black_points\ta_white_points\tgame_a\tgame_b\n";
  for (const MatchResult& m : matches) {
    s << m.opening_id << '\t' << m.a_black_points << '\t' << m.a_white_points << '\t' << transcript(m.game_a) << '\t'
      << transcript(m.game_b) << '\n';
  }
  return s.str();
}

std::string TournamentReport::summary(bool with_timing) const {
  std::ostringstream s;
  s << "a=" << a_name << "\nb=" << b_name << "\nopenings=" << matches.size() << "\ngames=" << games()
    << "\na_points=" << static_cast<double>(a_half_points()) / 2.0 << "\nwinning_rate=" << format_rate(winning_rate())
    << "\n";
  if (with_timing) {
    s << "a_mean_move_us=" << a_mean_move_us << "\nb_mean_move_us=" << b_mean_move_us << "\n";
  }
  return s.str();
}

TournamentReport run_tournament(const policy::Policy& a, const policy::Policy& b, const OpeningSet& openings,
                                unsigned threads) {
  TournamentReport r;
  r.a_name = a.name();
  r.b_name = b.name();
  r.matches.resize(openings.openings.size());
  std::vector<Timing> timing(openings.openings.size() * 2);
  parallel_for(openings.openings.size(), threads, [&](std::size_t i) {
    const Board& start = openings.openings[i].board;
    const GameResult ga = play(a, b, start, &timing[2 * i]);
    const GameResult gb = play(b, a, start, &timing[2 * i + 1]);
    MatchResult& m = r.matches[i];
    m.opening_id = i;
    m.a_black_points = ga.black_points;
    m.a_white_points = 1.0 - gb.black_points;
    m.game_a = ga.moves;
    m.game_b = gb.moves;
  });
  double a_us = 0, b_us = 0;
  std::uint64_t a_n = 0, b_n = 0;
  for (std::size_t i = 0; i < openings.openings.size(); ++i) {
    a_us += timing[2 * i].black_us + timing[2 * i + 1].white_us;
    a_n += timing[2 * i].black_calls + timing[2 * i + 1].white_calls;
    b_us += timing[2 * i].white_us + timing[2 * i + 1].black_us;
    b_n += timing[2 * i].white_calls + timing[2 * i + 1].black_calls;
  }
  r.a_mean_move_us = a_n ? a_us / static_cast<double>(a_n) : 0.0;
  r.b_mean_move_us = b_n ? b_us / static_cast<double>(b_n) : 0.0;
  return r;
}

std::string StageGainReport::to_tsv() const {
  std::ostringstream s;
  s << "stage\tmoves";
  for (const std::string& o : opponents) s << '\t' << o;
  s << "\nbase\t-";
  for (double r : base_rates) s << '\t' << format_rate(r);
  s << '\n';
  for (std::size_t st = 0; st < hybrid_rates.size(); ++st) {
    s << "gain" << st + 1 << '\t' << policy::kDefaultStages[st].first << '-' << policy::kDefaultStages[st].second;
    for (std::size_t o = 0; o < opponents.size(); ++o) s << '\t' << format_rate(gain(st, o));
    s << '\n';
  }
  return s.str();
}

StageGainReport stage_gain(const policy::PolicyPtr& base, const policy::PolicyPtr& strong,
                           std::span<const policy::PolicyPtr> opponents, const OpeningSet& openings,
                           unsigned threads) {
  StageGainReport r;
  for (const auto& o : opponents) {
    r.opponents.push_back(o->name());
    r.base_rates.push_back(run_tournament(*base, *o, openings, threads).winning_rate());
  }
  for (std::size_t st = 0; st < policy::kDefaultStages.size(); ++st) {
    std::array<policy::PolicyPtr, 4> parts = {base, base, base, base};
    parts[st] = strong;
    const policy::HybridPolicy h = policy::make_hybrid(parts);
    std::vector<double> rates;
    for (const auto& o : opponents) rates.push_back(run_tournament(h, *o, openings, threads).winning_rate());
    r.hybrid_rates.push_back(std::move(rates));
  }
  return r;
}

double measure_policy_accuracy(const policy::Policy& p, const dataset::Dataset& d, unsigned threads) {
  if (d.empty()) throw Error(ErrorCode::EmptyDataset, "policy accuracy on an empty dataset");
  std::vector<char> hit(d.size(), 0);
  parallel_for(d.size(), threads, [&](std::size_t i) {
    const Move m = p.choose(to_board(d[i].board));
    hit[i] = !m.is_pass() && m.cell() == d[i].target;
  });
  const auto hits = static_cast<double>(std::count(hit.begin(), hit.end(), 1));
  return 100.0 * hits / static_cast<double>(d.size());
}

std::vector<wthor::GameRecord> synthesize_games(const policy::Policy& teacher, std::size_t count,
                                                std::uint64_t seed, int random_plies, unsigned threads) {
  const OpeningSet openings = generate_openings(seed, count, random_plies);
  std::vector<wthor::GameRecord> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const Opening& o = openings.openings[i];
    const GameResult g = play(teacher, teacher, o.board, nullptr);
    wthor::GameRecord& rec = out[i];
    std::size_t k = 0;
    for (Move m : o.moves) rec.moves[k++] = wthor::encode_move_byte(m.cell());
    for (Move m : g.moves) {
      if (!m.is_pass()) rec.moves[k++] = wthor::encode_move_byte(m.cell());
    }
    const int score = wthor::black_score_with_empties(g.final_board);
    rec.real_score = static_cast<std::uint8_t>(score);
    rec.theoretical_score = static_cast<std::uint8_t>(score);
  });
  return out;
}

}  // namespace othello::harness
