// Command-line front end: WThor inspection, dataset building, training,
// evaluation and tournaments.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "othello/descriptor.hpp"
#include "othello/harness.hpp"
#include "othello/nn/checkpoint.hpp"
#include "othello/nn/train.hpp"
#include "othello/search.hpp"

namespace fs = std::filesystem;
using namespace othello;

namespace {

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Writes `text` to `path`, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw Error(ErrorCode::Io, "cannot write " + path);
  }
}

// Directories expand to their .wtb files; everything is sorted by name.
std::vector<fs::path> wtb_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (e.is_regular_file() && ext == ".wtb") files.push_back(e.path());
      }
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::InvalidArgument, "no .wtb files given");
  return files;
}

wthor::Corpus load_corpus(const std::vector<std::string>& inputs) {
  std::vector<wthor::GameRecord> records;
  for (const fs::path& f : wtb_files(inputs)) {
    auto r = wthor::load_records(f);
    records.insert(records.end(), r.begin(), r.end());
  }
  return wthor::replay_all(std::move(records));
}

harness::OpeningSet openings_from(const std::string& source, std::size_t count, int plies) {
  if (!source.empty() && std::all_of(source.begin(), source.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return harness::generate_openings(std::stoull(source), count, plies);
  }
  harness::OpeningSet set = harness::load_openings(source);
  if (count < set.openings.size()) set.openings.resize(count);
  return set;
}

struct TrainOptions {
  std::string arch = "conv4";
  bool bn = false;
  bool dropout = false;
  bool linear = false;
  int maps = 0;
  int hidden = 128;
  std::string encoding;  // empty: the dataset file's tag
  nn::TrainConfig config;
  std::string train_path;
  std::string test_path;
  unsigned threads = 1;

  void add_to(CLI::App* app) {
    app->add_option("--train", train_path, "training set (.ods)")->required();
    app->add_option("--test", test_path, "held-out set (.ods)");
    app->add_option("--arch", arch, "conv4|conv6|conv8")->check(CLI::IsMember({"conv4", "conv6", "conv8"}));
    app->add_flag("--bn", bn, "batch normalization after every convolution");
    app->add_flag("--dropout", dropout, "dropout on the hidden fully-connected layer");
    app->add_flag("--linear", linear, "single fully-connected softmax layer instead of a convolutional net");
    app->add_option("--maps", maps, "override every convolution width");
    app->add_option("--hidden", hidden, "hidden fully-connected width");
    app->add_option("--encoding", encoding, "pieces|vmoves|ones")->check(CLI::IsMember({"pieces", "vmoves", "ones"}));
    app->add_option("--seed", config.seed);
    app->add_option("--batch", config.batch_size);
    app->add_option("--epochs", config.epochs);
    app->add_option("--lr", config.base_lr);
    app->add_option("--momentum", config.momentum);
    app->add_option("--l2", config.l2);
    app->add_option("--halvings", config.halvings_per_epoch, "learning-rate halvings per epoch");
  }

  nn::NetworkSpec spec(dataset::Encoding e) const {
    const int c = dataset::channels(e);
    if (linear) return nn::make_linear(c);
    return nn::make_network(nn::parse_architecture(arch), c,
                            {.batch_norm = bn, .dropout = dropout, .maps_override = maps, .hidden = hidden});
  }
};

struct LoadedSets {
  dataset::Encoding encoding;
  dataset::Dataset train;
  std::optional<dataset::Dataset> test;
};

LoadedSets load_sets(const TrainOptions& o) {
  dataset::StoredDataset tr = dataset::load(o.train_path);
  LoadedSets s{o.encoding.empty() ? tr.encoding : dataset::parse_encoding(o.encoding), std::move(tr.examples), {}};
  if (!o.test_path.empty()) s.test = dataset::load(o.test_path).examples;
  return s;
}

void print_epoch(const nn::EpochStats& e) {
  std::cerr << "epoch " << e.epoch << " lr=" << e.lr << " train_loss=" << fixed(e.train_loss)
            << " test_top1=" << fixed(e.test_top1, 2) << "\n";
}

// ---- wthor --------------------------------------------------------------

void add_wthor(CLI::App& app) {
  auto* w = app.add_subcommand("wthor", "WThor game databases")->require_subcommand(1);

  auto* inspect = w->add_subcommand("inspect", "print the header and the first games");
  static std::string file;
  static std::size_t n = 5;
  inspect->add_option("file", file)->required();
  inspect->add_option("-n,--games", n, "games to print");
  inspect->callback([] {
    const wthor::Database db = wthor::parse_wtb(wthor::read_file(file));
    std::cout << wthor::describe(db.header) << "\n";
    for (std::size_t i = 0; i < std::min(n, db.games.size()); ++i) {
      std::cout << "game " << i << ": " << wthor::describe(db.games[i]) << "\n";
    }
  });

  auto* validate = w->add_subcommand("validate", "replay every game and check recorded scores");
  static std::vector<std::string> inputs;
  validate->add_option("files", inputs, ".wtb files or directories")->required();
  validate->callback([] {
    const wthor::Corpus c = load_corpus(inputs);
    const auto& r = c.report;
    for (const auto& f : r.failures) std::cout << "failure\t" << f.game_index << "\t" << f.reason << "\n";
    for (std::size_t g : r.score_mismatches) std::cout << "score_mismatch\t" << g << "\n";
    std::cout << "games=" << r.games << "\nreplayed=" << r.replayed << "\nfailures=" << r.failures.size()
              << "\nscore_matches=" << r.score_matches << "\nraw_score_matches=" << r.raw_score_matches << "\n";
  });

  auto* synth = w->add_subcommand("synth", "write games played by a policy against itself");
  static std::string teacher = "search:wpc:2", out;
  static std::size_t games = 1000;
  static std::uint64_t seed = 1;
  static int random_plies = 8;
  static unsigned threads = default_threads();
  synth->add_option("--teacher", teacher, "policy descriptor");
  synth->add_option("--games", games);
  synth->add_option("--seed", seed);
  synth->add_option("--random-plies", random_plies, "random opening length");
  synth->add_option("--threads", threads);
  synth->add_option("-o,--out", out)->required();
  synth->callback([] {
    const auto p = parse_policy(teacher);
    const auto records = harness::synthesize_games(*p, games, seed, random_plies, threads);
    wthor::Header h;
    h.game_year = 2000;
    const auto bytes = wthor::encode_wtb(h, records);
    emit(out, std::string(bytes.begin(), bytes.end()));
    std::cout << "games=" << records.size() << "\nteacher=" << p->name() << "\nout=" << out << "\n";
  });
}

// ---- dataset ------------------------------------------------------------

void add_dataset(CLI::App& app) {
  auto* d = app.add_subcommand("dataset", "training sets from game records")->require_subcommand(1);

  auto* build = d->add_subcommand("build", "extract, deduplicate, augment and split");
  static std::vector<std::string> inputs;
  static std::string variant = "unique-s", encoding = "pieces", order = "before", out;
  static std::uint64_t seed = 1;
  static double test_fraction = -1;
  static bool no_split = false;
  static unsigned threads = default_threads();
  build->add_option("--wtb", inputs, ".wtb files or directories")->required();
  build->add_option("--variant", variant, "original|unique|original-s|unique-s");
  build->add_option("--encoding", encoding, "pieces|vmoves|ones");
  build->add_option("--split-order", order, "before|after augmentation");
  build->add_option("--seed", seed);
  build->add_option("--test-fraction", test_fraction, "default 0.25, or 0.05 for augmented variants");
  build->add_flag("--no-split", no_split, "write the whole variant to one file");
  build->add_option("--threads", threads);
  build->add_option("-o,--out", out, "output prefix; writes <out>.train.ods and <out>.test.ods")->required();
  build->callback([] {
    const dataset::Variant v = dataset::parse_variant(variant);
    const dataset::Encoding e = dataset::parse_encoding(encoding);
    const wthor::Corpus c = load_corpus(inputs);
    const dataset::Dataset original = dataset::extract(c.games, threads);
    std::cout << "games=" << c.games.size() << "\noriginal=" << original.size() << "\nvariant=" << variant << "\n";
    if (no_split) {
      const dataset::Dataset all = dataset::build_variant(original, v);
      dataset::save(all, e, out + ".ods");
      std::cout << "examples=" << all.size() << "\n";
      return;
    }
    dataset::SplitSpec spec;
    spec.seed = seed;
    spec.order = dataset::parse_split_order(order);
    spec.test_fraction = test_fraction < 0 ? dataset::default_test_fraction(v) : test_fraction;
    const dataset::Split s = dataset::build_split(original, v, spec);
    dataset::save(s.train, e, out + ".train.ods");
    dataset::save(s.test, e, out + ".test.ods");
    std::cout << "train=" << s.train.size() << "\ntest=" << s.test.size() << "\n";
  });

  auto* stats = d->add_subcommand("stats", "summarize a stored dataset");
  static std::string file;
  stats->add_option("file", file)->required();
  stats->callback([] {
    const dataset::StoredDataset s = dataset::load(file);
    std::vector<CanonicalBoard> boards;
    boards.reserve(s.examples.size());
    for (const auto& t : s.examples) boards.push_back(t.board);
    std::sort(boards.begin(), boards.end());
    const auto distinct = std::unique(boards.begin(), boards.end()) - boards.begin();
    std::map<int, std::size_t> by_move;
    for (const auto& t : s.examples) ++by_move[dataset::move_number(t.board)];
    std::cout << "move_number\tcount\n";
    for (const auto& [m, n] : by_move) std::cout << m << '\t' << n << '\n';
    std::cout << "\nexamples=" << s.examples.size() << "\nencoding=" << dataset::to_string(s.encoding)
              << "\ndistinct_boards=" << distinct << "\n";
  });

  auto* bound = d->add_subcommand("bound", "variant sizes and perfect-classifier bounds");
  static std::vector<std::string> bound_inputs;
  static unsigned bound_threads = default_threads();
  bound->add_option("--wtb", bound_inputs, ".wtb files or directories")->required();
  bound->add_option("--threads", bound_threads);
  bound->callback([] {
    const wthor::Corpus c = load_corpus(bound_inputs);
    const dataset::Dataset original = dataset::extract(c.games, bound_threads);
    const dataset::Dataset unique = dataset::dedup(original);
    std::cout << "games=" << c.games.size() << "\noriginal=" << original.size() << "\nunique=" << unique.size()
              << "\noriginal_s=" << dataset::augment(original, false).size()
              << "\nunique_s=" << dataset::augment(original, true).size()
              << "\nbound_original=" << fixed(dataset::consistency_upper_bound(original))
              << "\nbound_unique=" << fixed(dataset::consistency_upper_bound(unique)) << "\n";
  });
}

// ---- train / bag --------------------------------------------------------

void add_train(CLI::App& app) {
  auto* t = app.add_subcommand("train", "train a move predictor");
  static TrainOptions o;
  static std::string out, log;
  o.add_to(t);
  t->add_option("-o,--out", out, "checkpoint path")->required();
  t->add_option("--log", log, "per-epoch log (tab-separated)");
  t->callback([] {
    const LoadedSets s = load_sets(o);
    const nn::NetworkSpec spec = o.spec(s.encoding);
    std::cerr << nn::describe(spec) << " (" << nn::parameter_count(spec) << " parameters)\n";
    const nn::TrainResult r =
        nn::train(spec, s.train, s.encoding, o.config, s.test ? &*s.test : nullptr, print_epoch);
    nn::save_model({r.net, s.encoding}, out);
    if (!log.empty()) emit(log, nn::format_log(r.epochs));
    std::cout << "network=" << nn::describe(spec) << "\nparameters=" << nn::parameter_count(spec)
              << "\nexamples=" << s.train.size() << "\nepochs=" << r.epochs.size()
              << "\nfinal_train_loss=" << (r.epochs.empty() ? "nan" : fixed(r.epochs.back().train_loss));
    if (s.test) {
      std::cout << "\ntest_top1=" << fixed(nn::evaluate_topk(r.net, *s.test, s.encoding, 1, nn::Masking::Legal));
    }
    std::cout << "\nout=" << out << "\n";
  });

  auto* bag = app.add_subcommand("bag", "bootstrap ensembles")->require_subcommand(1);
  auto* bt = bag->add_subcommand("train", "train members on bootstrap resamples");
  static TrainOptions bo;
  static int members = 10;
  static std::string dir;
  bo.add_to(bt);
  bt->add_option("--members", members)->check(CLI::PositiveNumber);
  bt->add_option("--out-dir", dir, "member checkpoints are written here")->required();
  bt->callback([] {
    const LoadedSets s = load_sets(bo);
    const nn::NetworkSpec spec = bo.spec(s.encoding);
    fs::create_directories(dir);
    std::vector<policy::PredictorPolicy> trained;
    std::string paths;
    for (int i = 0; i < members; ++i) {
      nn::TrainConfig cfg = bo.config;
      cfg.seed = bo.config.seed + static_cast<std::uint64_t>(i);
      const dataset::Dataset resample = dataset::bootstrap(s.train, cfg.seed);
      const nn::TrainResult r = nn::train(spec, resample, s.encoding, cfg, nullptr);
      const fs::path path = fs::path(dir) / ("member" + std::to_string(i) + ".onn");
      nn::save_model({r.net, s.encoding}, path);
      trained.emplace_back(std::make_shared<const nn::Model>(nn::Model{r.net, s.encoding}), path.string());
      paths += (i ? "," : "") + path.string();
      std::cout << "member" << i << "=" << path.string();
      if (s.test) std::cout << "\t" << fixed(nn::evaluate_topk(r.net, *s.test, s.encoding, 1, nn::Masking::Legal));
      std::cout << "\n";
    }
    if (s.test) {
      const policy::BaggedPolicy bagged(trained);
      std::cout << "bag_top1=" << fixed(harness::measure_policy_accuracy(bagged, *s.test, bo.threads)) << "\n";
    }
    std::cout << "descriptor=bag:" << paths << "\n";
  });
}

// ---- eval ---------------------------------------------------------------

void add_eval(CLI::App& app) {
  auto* e = app.add_subcommand("eval", "prediction quality on a stored dataset")->require_subcommand(1);
  static std::string desc, data, tsv;
  static unsigned threads = default_threads();
  static std::vector<int> ks = {1, 2, 3};

  auto* acc = e->add_subcommand("accuracy", "percent of recorded moves chosen");
  acc->add_option("--policy", desc, "policy descriptor")->required();
  acc->add_option("--data", data)->required();
  acc->add_option("--threads", threads);
  acc->callback([] {
    const auto p = parse_policy(desc);
    const dataset::Dataset d = dataset::load(data).examples;
    std::cout << "policy=" << p->name() << "\nexamples=" << d.size()
              << "\naccuracy=" << fixed(harness::measure_policy_accuracy(*p, d, threads)) << "\n";
    if (const auto* net = dynamic_cast<const policy::PredictorPolicy*>(p.get())) {
      const auto& m = net->model();
      for (int k : {1, 3}) {
        std::cout << "top" << k << "_unmasked=" << fixed(nn::evaluate_topk(m.net, d, m.encoding, k, nn::Masking::None))
                  << "\n";
      }
    }
  });

  auto* grid = e->add_subcommand("grid", "top-k accuracy by move number and legal-move count");
  grid->add_option("--policy", desc, "policy descriptor")->required();
  grid->add_option("--data", data)->required();
  grid->add_option("--k", ks, "ranks to report")->delimiter(',');
  grid->add_option("--tsv", tsv, "write the grid here instead of stdout");
  grid->callback([] {
    const auto p = parse_policy(desc);
    const policy::AccuracyGrid g = policy::accuracy_grid(*p, dataset::load(data).examples, ks);
    emit(tsv, g.to_tsv());
    if (tsv.empty()) std::cout << "\n";
    std::cout << "policy=" << p->name() << "\ntriples=" << g.total() << "\n";
    for (std::size_t i = 0; i < ks.size(); ++i) std::cout << "top" << ks[i] << "=" << fixed(g.marginal(i)) << "\n";
  });

  auto* validity = e->add_subcommand("validity", "percent of boards whose strongest output is legal");
  validity->add_option("--policy", desc, "policy descriptor")->required();
  validity->add_option("--data", data)->required();
  validity->callback([] {
    const auto p = parse_policy(desc);
    std::cout << "policy=" << p->name()
              << "\nvalidity=" << fixed(policy::unmasked_validity_rate(*p, dataset::load(data).examples)) << "\n";
  });
}

// ---- play ---------------------------------------------------------------

void add_play(CLI::App& app) {
  auto* t = app.add_subcommand("tournament", "paired-openings match between two policies");
  static std::string a, b, openings = "1", tsv;
  static std::size_t count = 1000;
  static int plies = 6;
  static unsigned threads = default_threads();
  static bool timing = false;
  t->add_option("--a", a, "policy descriptor")->required();
  t->add_option("--b", b, "policy descriptor")->required();
  t->add_option("--openings", openings, "generation seed or openings file");
  t->add_option("--count", count, "openings to use");
  t->add_option("--plies", plies, "length of generated openings");
  t->add_option("--threads", threads);
  t->add_option("--tsv", tsv, "per-opening results");
  t->add_flag("--timing", timing, "include per-move timings in the summary");
  t->callback([] {
    const auto pa = parse_policy(a);
    const auto pb = parse_policy(b);
    const harness::TournamentReport r = harness::run_tournament(*pa, *pb, openings_from(openings, count, plies), threads);
    if (!tsv.empty()) emit(tsv, r.to_tsv());
    std::cout << r.summary(timing);
  });

  auto* s = app.add_subcommand("stage-gain", "gain from a stronger policy in one game stage");
  static std::string base, strong;
  static std::vector<std::string> opponents;
  s->add_option("--base", base, "policy descriptor")->required();
  s->add_option("--strong", strong, "policy descriptor")->required();
  s->add_option("--opponent", opponents, "policy descriptor (repeatable)")->required();
  s->add_option("--openings", openings, "generation seed or openings file");
  s->add_option("--count", count, "openings to use");
  s->add_option("--plies", plies, "length of generated openings");
  s->add_option("--threads", threads);
  s->callback([] {
    std::vector<policy::PolicyPtr> opp;
    for (const std::string& o : opponents) opp.push_back(parse_policy(o));
    const harness::StageGainReport r =
        harness::stage_gain(parse_policy(base), parse_policy(strong), opp, openings_from(openings, count, plies), threads);
    std::cout << r.to_tsv();
  });

  auto* o = app.add_subcommand("openings", "write a generated opening set");
  static std::uint64_t seed = 1;
  static std::string out;
  o->add_option("--seed", seed);
  o->add_option("--count", count);
  o->add_option("--plies", plies);
  o->add_option("-o,--out", out, "file (default stdout)");
  o->callback([] { emit(out, harness::format_openings(harness::generate_openings(seed, count, plies))); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Othello move prediction toolkit"};
  app.require_subcommand(1);
  add_wthor(app);
  add_dataset(app);
  add_train(app);
  add_eval(app);
  add_play(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "othello: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
