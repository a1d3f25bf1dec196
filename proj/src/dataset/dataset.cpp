#include "othello/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_set>

namespace othello::dataset {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    return splitmix64(splitmix64(t.board.mover) ^ (t.board.opponent * 0x9e3779b97f4a7c15ULL) ^ t.target.index);
  }
};

constexpr std::array<std::int8_t, 64> make_index_table() {
  std::array<std::int8_t, 64> t{};
  int next = 0;
  for (int i = 0; i < 64; ++i) t[i] = is_center(Cell(i)) ? std::int8_t{-1} : static_cast<std::int8_t>(next++);
  return t;
}

constexpr std::array<std::int8_t, 64> kIndexOf = make_index_table();

constexpr std::array<std::uint8_t, kOutputs> make_cell_table() {
  std::array<std::uint8_t, kOutputs> t{};
  for (int i = 0; i < 64; ++i) {
    if (kIndexOf[i] >= 0) t[kIndexOf[i]] = static_cast<std::uint8_t>(i);
  }
  return t;
}

constexpr std::array<std::uint8_t, kOutputs> kCellOf = make_cell_table();

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(chunk));
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

// Uniform integer in [0, bound) from a 64-bit generator by rejection.
std::uint64_t bounded(std::uint64_t& state, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    state += 0x9e3779b97f4a7c15ULL;
    const std::uint64_t r = splitmix64(state);
    if (r < limit) return r % bound;
  }
}

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "original") return Variant::Original;
  if (name == "unique") return Variant::Unique;
  if (name == "original-s") return Variant::OriginalS;
  if (name == "unique-s") return Variant::UniqueS;
  throw Error(ErrorCode::InvalidArgument, "unknown dataset variant '" + std::string(name) + "'");
}

Encoding parse_encoding(std::string_view name) {
  if (name == "pieces") return Encoding::Pieces;
  if (name == "vmoves") return Encoding::VMoves;
  if (name == "ones") return Encoding::Ones;
  throw Error(ErrorCode::InvalidArgument, "unknown encoding '" + std::string(name) + "'");
}

SplitOrder parse_split_order(std::string_view name) {
  if (name == "before") return SplitOrder::BeforeAugmentation;
  if (name == "after") return SplitOrder::AfterAugmentation;
  throw Error(ErrorCode::InvalidArgument, "unknown split order '" + std::string(name) + "'");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Original: return "original";
    case Variant::Unique: return "unique";
    case Variant::OriginalS: return "original-s";
    case Variant::UniqueS: return "unique-s";
  }
  return "?";
}

std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::Pieces: return "pieces";
    case Encoding::VMoves: return "vmoves";
    case Encoding::Ones: return "ones";
  }
  return "?";
}

int target_index(Cell c) {
  if (c.index >= 64 || kIndexOf[c.index] < 0) {
    throw Error(ErrorCode::CenterCell, to_string(c) + " has no output index");
  }
  return kIndexOf[c.index];
}

Cell index_cell(int index) {
  if (index < 0 || index >= kOutputs) {
    throw Error(ErrorCode::InvalidArgument, "output index " + std::to_string(index));
  }
  return Cell(kCellOf[static_cast<std::size_t>(index)]);
}

Dataset extract(std::span<const wthor::ReplayedGame> games, unsigned threads) {
  auto run = [&](std::size_t begin, std::size_t end) {
    Dataset out;
    for (std::size_t g = begin; g < end; ++g) {
      for (const wthor::Ply& p : games[g].plies) out.push_back({canonicalize(p.board), p.move});
    }
    return out;
  };
  threads = std::max(1u, threads);
  if (threads == 1 || games.size() < 2 * threads) return run(0, games.size());

  std::vector<Dataset> parts(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (games.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = std::min(games.size(), t * chunk);
    const std::size_t e = std::min(games.size(), b + chunk);
    pool.emplace_back([&, t, b, e] { parts[t] = run(b, e); });
  }
  for (auto& th : pool) th.join();
  Dataset out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Dataset dedup(const Dataset& d) {
  std::unordered_set<Triple, TripleHash> seen;
  seen.reserve(d.size());
  Dataset out;
  out.reserve(d.size());
  for (const Triple& t : d) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

Dataset augment(const Dataset& d, bool dedup_after) {
  Dataset out;
  out.reserve(d.size() * 8);
  for (const Triple& t : d) {
    for (Symmetry s : kAllSymmetries) out.push_back({transform(t.board, s), transform_cell(t.target, s)});
  }
  return dedup_after ? dedup(out) : out;
}

Dataset build_variant(const Dataset& original, Variant v) {
  switch (v) {
    case Variant::Original: return original;
    case Variant::Unique: return dedup(original);
    case Variant::OriginalS: return augment(original, false);
    case Variant::UniqueS: return augment(dedup(original), true);
  }
  return original;
}

double consistency_upper_bound(const Dataset& d) {
  if (d.empty()) return 100.0;
  Dataset sorted = d;
  std::sort(sorted.begin(), sorted.end());
  std::size_t best_total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t best = 0;
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].board == sorted[i].board) {
      std::size_t k = j;
      while (k < sorted.size() && sorted[k].board == sorted[j].board && sorted[k].target == sorted[j].target) ++k;
      best = std::max(best, k - j);
      j = k;
    }
    best_total += best;
    i = j;
  }
  return 100.0 * static_cast<double>(best_total) / static_cast<double>(d.size());
}

CanonicalBoard orbit_key(const CanonicalBoard& b) noexcept {
  CanonicalBoard best = b;
  for (Symmetry s : kAllSymmetries) best = std::min(best, transform(b, s));
  return best;
}

std::vector<float> encode(const CanonicalBoard& b, Encoding e) {
  std::vector<float> out(static_cast<std::size_t>(channels(e)) * 64);
  encode(b, e, out.data());
  return out;
}

void shuffle(std::span<std::uint32_t> idx, std::uint64_t seed) {
  std::uint64_t state = seed;
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = bounded(state, i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Split split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  const auto target = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(d.size())));
  std::vector<char> in_test(d.size(), 0);

  if (spec.order == SplitOrder::AfterAugmentation) {
    std::vector<std::uint32_t> idx(d.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    shuffle(idx, spec.seed);
    for (std::size_t i = 0; i < target; ++i) in_test[idx[i]] = 1;
  } else {
    // group examples by board orbit; groups are numbered by first appearance
    std::vector<std::pair<CanonicalBoard, std::uint32_t>> keyed(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) keyed[i] = {orbit_key(d[i].board), static_cast<std::uint32_t>(i)};
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::uint32_t> group_of(d.size());
    std::vector<std::uint32_t> first_of_group;
    std::vector<std::uint32_t> size_of_group;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (i == 0 || keyed[i].first != keyed[i - 1].first) {
        first_of_group.push_back(keyed[i].second);
        size_of_group.push_back(0);
      }
      group_of[keyed[i].second] = static_cast<std::uint32_t>(first_of_group.size() - 1);
      ++size_of_group.back();
    }
    // order groups by first appearance so the shuffle does not depend on
    // mask values
    std::vector<std::uint32_t> order(first_of_group.size());
    for (std::size_t g = 0; g < order.size(); ++g) order[g] = static_cast<std::uint32_t>(g);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return first_of_group[a] < first_of_group[b]; });
    shuffle(order, spec.seed);
    std::vector<char> group_in_test(first_of_group.size(), 0);
    std::size_t taken = 0;
    for (std::uint32_t g : order) {
      if (taken == target) break;
      if (taken + size_of_group[g] <= target) {
        group_in_test[g] = 1;
        taken += size_of_group[g];
      }
    }
    for (std::size_t i = 0; i < d.size(); ++i) in_test[i] = group_in_test[group_of[i]];
  }

  Split out;
  out.test.reserve(target);
  out.train.reserve(d.size() - target);
  for (std::size_t i = 0; i < d.size(); ++i) (in_test[i] ? out.test : out.train).push_back(d[i]);
  return out;
}

Split build_split(const Dataset& original, Variant v, const SplitSpec& spec) {
  if (spec.order == SplitOrder::AfterAugmentation) return split(build_variant(original, v), spec);
  const bool unique = v == Variant::Unique || v == Variant::UniqueS;
  const Dataset base = unique ? dedup(original) : original;
  Split s = split(base, spec);
  if (is_symmetric(v)) {
    s.train = augment(s.train, unique);
    s.test = augment(s.test, unique);
  }
  return s;
}

Dataset bootstrap(const Dataset& d, std::uint64_t seed) {
  Dataset out;
  out.reserve(d.size());
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back(d[bounded(state, d.size())]);
  return out;
}

std::vector<std::uint8_t> serialize(const Dataset& d, Encoding e) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 2 + 1 + 8 + d.size() * 17 + 4);
  for (char ch : {'O', 'D', 'S', '1'}) out.push_back(static_cast<std::uint8_t>(ch));
  out.push_back(static_cast<std::uint8_t>(kFormatVersion & 0xff));
  out.push_back(static_cast<std::uint8_t>(kFormatVersion >> 8));
  out.push_back(static_cast<std::uint8_t>(e));
  append_u64(out, d.size());
  for (const Triple& t : d) {
    append_u64(out, t.board.mover);
    append_u64(out, t.board.opponent);
    out.push_back(static_cast<std::uint8_t>(target_index(t.target)));
  }
  const std::uint32_t crc = crc32_of(out);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));
  return out;
}

StoredDataset deserialize(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kFixed = 4 + 2 + 1 + 8;
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "ODS1")) {
    throw Error(ErrorCode::BadMagic, "not an ODS1 dataset");
  }
  if (bytes.size() < kFixed + 4) throw Error(ErrorCode::TruncatedFile, "dataset header cut short");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "dataset version " + std::to_string(version));
  }
  const std::uint32_t stored = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                               (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
                               (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  if (crc32_of(bytes.first(bytes.size() - 4)) != stored) {
    throw Error(ErrorCode::ChecksumMismatch, "dataset checksum does not match");
  }
  if (bytes[6] > 2) throw Error(ErrorCode::InvalidArgument, "unknown encoding tag");
  StoredDataset out;
  out.encoding = static_cast<Encoding>(bytes[6]);
  const std::uint64_t count = read_u64(bytes.data() + 7);
  if (bytes.size() != kFixed + count * 17 + 4) {
    throw Error(ErrorCode::TruncatedFile, "dataset length does not match its example count");
  }
  out.examples.reserve(count);
  const std::uint8_t* p = bytes.data() + kFixed;
  for (std::uint64_t i = 0; i < count; ++i, p += 17) {
    Triple t{{read_u64(p), read_u64(p + 8)}, index_cell(p[16])};
    if ((t.board.mover & t.board.opponent) || !(legal_moves(t.board) & t.target.bit())) {
      throw Error(ErrorCode::InvalidArgument, "example " + std::to_string(i) + " has an illegal target");
    }
    out.examples.push_back(t);
  }
  return out;
}

void save(const Dataset& d, Encoding e, const std::filesystem::path& path) {
  const auto bytes = serialize(d, e);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

StoredDataset load(const std::filesystem::path& path) { return deserialize(wthor::read_file(path)); }

}  // namespace othello::dataset
