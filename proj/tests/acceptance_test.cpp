// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "fixture_util.hpp"
#include "gradient_check.hpp"
#include "oracle/minimax.hpp"
#include "oracle/naive_rules.hpp"
#include "othello/harness.hpp"
#include "othello/nn/train.hpp"
#include "othello/search.hpp"
#include "test_util.hpp"

using namespace othello;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

enum class Verdict { Pass, Fail, Skip };

struct Result {
  Verdict verdict = Verdict::Fail;
  std::string detail;
};

Result verdict(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

// State shared by the learning, search and analytics criteria.
struct Learned {
  dataset::Dataset train, test;
  std::shared_ptr<const nn::Model> conv;
  std::shared_ptr<const nn::Model> untrained;
};

// ---- 1. rules engine ----------------------------------------------------

Result rules_engine() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, moves = 0;
  for (const Board& b : testutil::random_positions(100000, 20240611)) {
    const Bitboard legal = legal_moves(b);
    if (legal != testutil::naive_move_mask(b)) {
      ++mismatches;
      continue;
    }
    const naive::Position p = testutil::to_naive(b);
    if (!legal) {
      const Board after = apply_move(b, Move::pass());
      mismatches += !(after == testutil::to_board(naive::play(p, -1)));
      continue;
    }
    for_each_cell(legal, [&](Cell c) {
      ++moves;
      mismatches += !(apply_move(b, Move::at(c)) == testutil::to_board(naive::play(p, c.index)));
    });
  }
  std::string perft_line;
  bool perft_ok = true;
  for (int d = 1; d <= 6; ++d) {
    const std::uint64_t got = perft(initial_board(), d);
    const std::uint64_t want = naive::perft(naive::Position::initial(), d);
    perft_ok = perft_ok && got == want && (d != 1 || got == 4);
    perft_line += (d > 1 ? "," : "") + std::to_string(got);
  }
  const double secs = seconds_since(t0);
  return verdict(mismatches == 0 && perft_ok && secs < 120,
                 "1e5 positions, " + std::to_string(moves) + " moves applied, " + std::to_string(mismatches) +
                     " discrepancies; perft 1..6 = " + perft_line + (perft_ok ? " (oracle agrees)" : " (MISMATCH)") +
                     "; " + num(secs, 1) + " s");
}

// ---- 2. gradients -------------------------------------------------------

Result gradients() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& s : gradcheck::suites()) {
    const auto o = gradcheck::run(s);
    ok = ok && o.failures == 0;
    std::ostringstream e;
    e << std::scientific << std::setprecision(1) << o.worst;
    detail += s.layer + " max " + e.str() + "; ";
  }
  const double secs = seconds_since(t0);
  return verdict(ok && secs < 60, std::to_string(gradcheck::kConfigsPerSuite) +
                                      " configurations per layer type, tolerance 1e-4; " + detail + num(secs, 1) +
                                      " s");
}

// ---- 3. WThor ingestion -------------------------------------------------

std::map<std::string, std::string> read_counts(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct Ingested {
  std::size_t records = 0, games = 0, original = 0, unique = 0, original_s = 0, unique_s = 0;
  double bound_original = 0, bound_unique = 0;
};

Ingested ingest(const std::vector<fs::path>& files) {
  std::vector<wthor::GameRecord> records;
  for (const fs::path& f : files) {
    auto r = wthor::load_records(f);
    records.insert(records.end(), r.begin(), r.end());
  }
  Ingested x;
  x.records = records.size();
  const wthor::Corpus c = wthor::replay_all(std::move(records));
  x.games = c.games.size();
  const dataset::Dataset original = dataset::extract(c.games);
  const dataset::Dataset unique = dataset::dedup(original);
  x.original = original.size();
  x.unique = unique.size();
  x.original_s = dataset::augment(original, false).size();
  x.unique_s = dataset::augment(original, true).size();
  x.bound_original = dataset::consistency_upper_bound(original);
  x.bound_unique = dataset::consistency_upper_bound(unique);
  return x;
}

std::string describe(const Ingested& x) {
  return std::to_string(x.games) + "/" + std::to_string(x.records) + " games replayed; original " +
         std::to_string(x.original) + ", unique " + std::to_string(x.unique) + ", original-s " +
         std::to_string(x.original_s) + ", unique-s " + std::to_string(x.unique_s) + "; bounds " +
         num(x.bound_original, 4) + "% / " + num(x.bound_unique, 4) + "%";
}

Result wthor_ingestion() {
  if (const char* dir = std::getenv("OTHELLO_WTHOR_DIR")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".wtb") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    const Ingested x = ingest(files);
    const bool ok = x.games == x.records && x.games == 119339 && x.original == 6874503 && x.unique == 4880413 &&
                    x.original_s == 54996024 && x.unique_s == 39019056 &&
                    std::abs(x.bound_original - 91.16) <= 0.05 && std::abs(x.bound_unique - 97.49) <= 0.05;
    return verdict(ok, "full corpus (" + std::to_string(files.size()) + " files): " + describe(x));
  }
  const auto want = read_counts(testutil::fixture("synthetic100.counts"));
  const Ingested x = ingest({testutil::fixture("synthetic100.wtb")});
  auto eq = [&](const char* key, std::size_t v) { return want.count(key) && std::stoull(want.at(key)) == v; };
  auto near = [&](const char* key, double v) { return want.count(key) && std::abs(std::stod(want.at(key)) - v) <= 0.05; };
  const bool ok = x.games == x.records && eq("games", x.games) && eq("original", x.original) &&
                  eq("unique", x.unique) && eq("original_s", x.original_s) && eq("unique_s", x.unique_s) &&
                  near("bound_original", x.bound_original) && near("bound_unique", x.bound_unique);
  return verdict(ok, "synthetic 100-game fixture (no WThor corpus; set OTHELLO_WTHOR_DIR for full mode), counts "
                     "checked against the independent generator: " + describe(x));
}

// ---- 4. desk-scale learning ---------------------------------------------

constexpr std::size_t kTeacherGames = 400;
constexpr std::uint64_t kTeacherSeed = 20240611;
constexpr int kRandomPlies = 8;
constexpr int kEpochs = 2;

// Masked accuracy of ranking legal moves by their training-set frequency.
double frequency_baseline(const dataset::Dataset& train, const dataset::Dataset& test) {
  std::array<std::size_t, 64> freq{};
  for (const auto& t : train) ++freq[t.target.index];
  std::size_t hits = 0;
  for (const auto& t : test) {
    int best = -1;
    for_each_cell(legal_moves(t.board), [&](Cell c) {
      if (best < 0 || freq[c.index] > freq[static_cast<std::size_t>(best)]) best = c.index;
    });
    hits += best == t.target.index;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test.size());
}

Result learning(Learned& out) {
  const auto t0 = Clock::now();
  const search::SearchPolicy teacher({1, search::default_wpc(), search::Ordering::EvalOrdered});
  const wthor::Corpus corpus =
      wthor::replay_all(harness::synthesize_games(teacher, kTeacherGames, kTeacherSeed, kRandomPlies));
  const dataset::Split split = dataset::build_split(dataset::extract(corpus.games), dataset::Variant::UniqueS,
                                                    {0.1, kTeacherSeed, dataset::SplitOrder::BeforeAugmentation});
  out.train = split.train;
  out.test = split.test;

  nn::TrainConfig cfg;
  cfg.epochs = kEpochs;
  cfg.seed = 7;
  const auto enc = dataset::Encoding::Pieces;
  const nn::NetworkSpec conv4 = nn::make_network(nn::Architecture::Conv4, 2);
  const nn::TrainResult conv = nn::train(conv4, out.train, enc, cfg);
  const nn::TrainResult linear = nn::train(nn::make_linear(2), out.train, enc, cfg);
  out.conv = std::make_shared<const nn::Model>(nn::Model{conv.net, enc});
  out.untrained = std::make_shared<const nn::Model>(nn::Model{nn::he_init<float>(conv4, cfg.seed), enc});

  const double conv_acc = nn::evaluate_topk(conv.net, out.test, enc, 1, nn::Masking::Legal);
  const double linear_acc = nn::evaluate_topk(linear.net, out.test, enc, 1, nn::Masking::Legal);
  const double base_acc = frequency_baseline(out.train, out.test);

  const dataset::Dataset memo = testutil::distinct_boards(testutil::fixture_original(), 512);
  nn::TrainConfig mc;
  mc.epochs = 200;
  mc.batch_size = 64;
  mc.halvings_per_epoch = 0;
  mc.base_lr = 0.01;
  mc.seed = 3;
  const nn::TrainResult m = nn::train(nn::make_network(nn::Architecture::Conv4, 2, {.maps_override = 8}), memo, enc, mc);
  const double memo_acc = nn::evaluate_topk(m.net, memo, enc, 1);

  const double secs = seconds_since(t0);
  const bool ok = out.train.size() >= 100000 && conv_acc >= base_acc + 5 && conv_acc >= linear_acc + 5 && memo.size() == 512 && memo_acc >= 99 &&
                  secs < 1800;
  return verdict(ok, "Conv4 pieces on " + std::to_string(out.train.size()) + " Unique-S triples from " +
                         std::to_string(corpus.games.size()) + " depth-1 WPC games, " + std::to_string(kEpochs) +
                         " epochs: held-out masked top-1 " + num(conv_acc) + "% vs frequency baseline " +
                         num(base_acc) + "% and linear softmax " + num(linear_acc) + "% (" +
                         std::to_string(out.test.size()) + " test triples); memorization " + num(memo_acc) +
                         "% on 512; " + num(secs, 0) + " s");
}

// ---- 5. full scale ------------------------------------------------------

Result full_scale() {
  const char* dir = std::getenv("OTHELLO_WTHOR_DIR");
  const char* enabled = std::getenv("OTHELLO_FULL_SCALE");
  if (!dir || !enabled || std::string(enabled) != "1") {
    return {Verdict::Skip, "optional; needs the WThor corpus (OTHELLO_WTHOR_DIR) and OTHELLO_FULL_SCALE=1 "
                           "for multi-day CPU training of Conv8 and Conv8+BN"};
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".wtb" || e.path().extension() == ".WTB") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<wthor::GameRecord> records;
  for (const fs::path& f : files) {
    auto r = wthor::load_records(f);
    records.insert(records.end(), r.begin(), r.end());
  }
  const wthor::Corpus c = wthor::replay_all(std::move(records));
  const dataset::Split s = dataset::build_split(dataset::extract(c.games), dataset::Variant::UniqueS,
                                                {0.05, 1, dataset::SplitOrder::BeforeAugmentation});
  nn::TrainConfig cfg;
  cfg.epochs = 6;
  const auto enc = dataset::Encoding::Pieces;
  const nn::TrainResult plain = nn::train(nn::make_network(nn::Architecture::Conv8, 2), s.train, enc, cfg);
  const nn::TrainResult bn = nn::train(nn::make_network(nn::Architecture::Conv8, 2, {.batch_norm = true}), s.train, enc, cfg);
  const double a = nn::evaluate_topk(plain.net, s.test, enc, 1, nn::Masking::Legal);
  const double b = nn::evaluate_topk(bn.net, s.test, enc, 1, nn::Masking::Legal);
  const policy::PredictorPolicy p(std::make_shared<const nn::Model>(nn::Model{bn.net, enc}));
  const double validity = policy::unmasked_validity_rate(p, s.test);
  return verdict(std::abs(a - 60.5) <= 1.5 && std::abs(b - 62.7) <= 1.5 && validity >= 99.9,
                 "Conv8 " + num(a) + "%, Conv8+BN " + num(b) + "%, validity " + num(validity) + "%");
}

// ---- 6. tournament protocol ---------------------------------------------

bool transcript_legal(const Board& start, const std::vector<Move>& moves) {
  naive::Position p = testutil::to_naive(start);
  for (const Move& m : moves) {
    const auto legal = naive::legal_moves(p);
    if (m.is_pass()) {
      if (!legal.empty()) return false;
      p = naive::play(p, -1);
    } else {
      if (std::find(legal.begin(), legal.end(), m.cell().index) == legal.end()) return false;
      p = naive::play(p, m.cell().index);
    }
  }
  return naive::legal_moves(p).empty() && naive::legal_moves(p, naive::other(p.to_move)).empty();
}

Result tournament_protocol(const Learned& l) {
  const auto net = std::make_shared<policy::PredictorPolicy>(l.conv, "conv4");
  const auto wpc1 = std::make_shared<search::SearchPolicy>(search::SearchConfig{1, search::default_wpc()});
  const auto mob2 = std::make_shared<search::SearchPolicy>(search::SearchConfig{2, search::MobilityMix{}});
  const auto hybrid = std::make_shared<policy::HybridPolicy>(policy::make_hybrid({net, wpc1, mob2, wpc1}));
  const std::vector<policy::PolicyPtr> players = {net, wpc1, mob2, hybrid};
  const harness::OpeningSet openings = harness::generate_openings(99, 100);

  bool self_ok = true, sums_ok = true, legal_ok = true, repeat_ok = true;
  std::size_t games = 0;
  auto check = [&](const harness::TournamentReport& r) {
    for (std::size_t i = 0; i < r.matches.size(); ++i) {
      const Board& start = openings.openings[r.matches[i].opening_id].board;
      legal_ok = legal_ok && transcript_legal(start, r.matches[i].game_a) && transcript_legal(start, r.matches[i].game_b);
      games += 2;
    }
  };
  for (const auto& p : players) {
    const auto r = harness::run_tournament(*p, *p, openings);
    self_ok = self_ok && r.winning_rate() == 50.0 && r.a_half_points() == r.games();
    check(r);
  }
  for (std::size_t i = 0; i < players.size(); ++i) {
    for (std::size_t j = i + 1; j < players.size(); ++j) {
      const auto ab = harness::run_tournament(*players[i], *players[j], openings, 1);
      const auto ba = harness::run_tournament(*players[j], *players[i], openings, 4);
      sums_ok = sums_ok && ab.winning_rate() + ba.winning_rate() == 100.0 &&
                ab.a_half_points() + ba.a_half_points() == 4 * openings.openings.size();
      const auto again = harness::run_tournament(*players[i], *players[j], harness::generate_openings(99, 100), 4);
      repeat_ok = repeat_ok && again.to_tsv() == ab.to_tsv() && again.summary() == ab.summary();
      check(ab);
      check(ba);
    }
  }
  return verdict(self_ok && sums_ok && legal_ok && repeat_ok,
                 std::string("self-play 50% for 4 policies ") + (self_ok ? "yes" : "NO") + "; A-vs-B + B-vs-A = 100 " +
                     (sums_ok ? "yes" : "NO") + "; " + std::to_string(games) + " transcripts replay legally " +
                     (legal_ok ? "yes" : "NO") + "; reports identical across runs and 1 vs 4 threads " +
                     (repeat_ok ? "yes" : "NO"));
}

// ---- 7. search sanity ---------------------------------------------------

Result search_sanity(const Learned& l) {
  const search::Wpc wpc = search::default_wpc();
  naive::Minimax oracle(
      [&](std::uint64_t me, std::uint64_t opp) {
        double s = 0;
        for (int i = 0; i < 64; ++i) s += ((me >> i) & 1) * wpc.weights[i] - ((opp >> i) & 1) * wpc.weights[i];
        return s;
      },
      search::kTerminalScale);
  std::vector<Board> mid;
  for (const Board& b : testutil::random_positions(8000, 777)) {
    if (mid.size() == 1000) break;
    if (b.disc_count() >= 12 && b.disc_count() <= 52 && legal_moves(b)) mid.push_back(b);
  }
  std::size_t disagreements = 0;
  for (const Board& b : mid) {
    for (int depth = 1; depth <= 3; ++depth) {
      const auto want = oracle.solve(testutil::to_naive(b), depth);
      for (search::Ordering o : {search::Ordering::Fixed, search::Ordering::EvalOrdered}) {
        const auto got = search::negamax(b, {depth, wpc, o});
        disagreements += (got.best.is_pass() ? -1 : got.best.cell().index) != want.best || got.value != want.value;
      }
    }
  }

  const harness::OpeningSet openings = harness::generate_openings(2024, 200);
  const search::SearchPolicy d1({1, wpc}), d2({2, wpc});
  const double deeper = harness::run_tournament(d2, d1, openings).winning_rate();
  const policy::PredictorPolicy trained(l.conv, "trained"), untrained(l.untrained, "untrained");
  const double t_rate = harness::run_tournament(trained, d1, openings).winning_rate();
  const double u_rate = harness::run_tournament(untrained, d1, openings).winning_rate();

  return verdict(mid.size() == 1000 && disagreements == 0 && deeper > 50 && t_rate - u_rate >= 20,
                 "alpha-beta vs minimax on " + std::to_string(mid.size()) + " midgames x depths 1-3 x 2 orderings: " +
                     std::to_string(disagreements) + " disagreements; depth-2 vs depth-1 WPC " + num(deeper) +
                     "% over 200 paired openings; vs depth-1 WPC trained Conv4 " + num(t_rate) + "%, untrained " +
                     num(u_rate) + "% (gap " + num(t_rate - u_rate) + " pp)");
}

// ---- 8. analytics -------------------------------------------------------

Result analytics(const Learned& l) {
  const policy::PredictorPolicy p(l.conv);
  const policy::AccuracyGrid g = policy::accuracy_grid(p, l.test, {1, 3, 60});
  dataset::Dataset kept;
  for (const auto& t : l.test) {
    if (dataset::move_number(t.board) >= policy::kFirstGridMove) kept.push_back(t);
  }
  const double top1 = nn::evaluate_topk(l.conv->net, kept, l.conv->encoding, 1, nn::Masking::Legal);
  const double top3 = nn::evaluate_topk(l.conv->net, kept, l.conv->encoding, 3, nn::Masking::Legal);
  const double top60 = nn::evaluate_topk(l.conv->net, l.test, l.conv->encoding, 60, nn::Masking::None);
  const bool grid_ok = g.total() == kept.size() && g.marginal(0) == top1 && g.marginal(1) == top3 &&
                       g.marginal(2) == 100.0 && top60 == 100.0;

  const policy::PolicyPtr base = std::make_shared<policy::PredictorPolicy>(l.conv, "conv4");
  const std::vector<policy::PolicyPtr> opponents = {
      std::make_shared<search::SearchPolicy>(search::SearchConfig{1, search::default_wpc()}),
      std::make_shared<search::SearchPolicy>(search::SearchConfig{1, search::MobilityMix{}})};
  const harness::StageGainReport sg = harness::stage_gain(base, base, opponents, harness::generate_openings(5, 50));
  std::size_t cells = 0, zero = 0;
  for (std::size_t st = 0; st < sg.hybrid_rates.size(); ++st) {
    for (std::size_t o = 0; o < sg.hybrid_rates[st].size(); ++o) {
      ++cells;
      zero += sg.gain(st, o) == 0.0;
    }
  }
  const bool gain_ok = cells == 4 * opponents.size() && zero == cells;
  return verdict(grid_ok && gain_ok, "grid marginals top1 " + num(g.marginal(0), 4) + " = " + num(top1, 4) +
                                         ", top3 " + num(g.marginal(1), 4) + " = " + num(top3, 4) + " on " +
                                         std::to_string(kept.size()) + " triples (exact " +
                                         (grid_ok ? "yes" : "NO") + "); top-60 " + num(top60) + "%; stage gain " +
                                         std::to_string(zero) + "/" + std::to_string(cells) + " cells zero");
}

}  // namespace

int main() {
  Learned learned;
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"1 rules-engine oracle equivalence", rules_engine},
      {"2 gradient verification", gradients},
      {"3 wthor ingestion", wthor_ingestion},
      {"4 desk-scale learning signal", [&] { return learning(learned); }},
      {"5 full-scale reproduction", full_scale},
      {"6 tournament protocol properties", [&] { return tournament_protocol(learned); }},
      {"7 search sanity", [&] { return search_sanity(learned); }},
      {"8 analytics", [&] { return analytics(learned); }},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Result r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Skip ? "SKIP" : "FAIL";
    failures += r.verdict == Verdict::Fail;
    std::cout << tag << "  criterion " << name << ": " << r.detail << std::endl;
  }
  return failures ? 1 : 0;
}
