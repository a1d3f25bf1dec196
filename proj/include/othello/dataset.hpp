#pragma once

// Move-prediction datasets: (canonical board, expert move) triples, the four
// corpus variants, board encodings and train/test splitting.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "othello/core.hpp"
#include "othello/wthor.hpp"

namespace othello::dataset {

struct Triple {
  CanonicalBoard board;
  Cell target;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using Dataset = std::vector<Triple>;

enum class Variant { Original, Unique, OriginalS, UniqueS };
enum class Encoding : std::uint8_t { Pieces = 0, VMoves = 1, Ones = 2 };
enum class SplitOrder { BeforeAugmentation, AfterAugmentation };

Variant parse_variant(std::string_view name);  // original|unique|original-s|unique-s
Encoding parse_encoding(std::string_view name);  // pieces|vmoves|ones
SplitOrder parse_split_order(std::string_view name);  // before|after
std::string_view to_string(Variant v);
std::string_view to_string(Encoding e);

constexpr int channels(Encoding e) noexcept { return e == Encoding::Pieces ? 2 : 3; }
constexpr bool is_symmetric(Variant v) noexcept {
  return v == Variant::OriginalS || v == Variant::UniqueS;
}

// ---- output space -------------------------------------------------------

inline constexpr int kOutputs = 60;

constexpr bool is_center(Cell c) noexcept {
  return (c.row() == 3 || c.row() == 4) && (c.col() == 3 || c.col() == 4);
}

// Row-major over the 60 non-center cells. Throws CenterCell.
int target_index(Cell c);
Cell index_cell(int index);

// Move number of the decision on `b` (1 for the first move of the game);
// passes place no disc so this is discs - 3.
inline int move_number(const CanonicalBoard& b) noexcept { return std::popcount(b.mover | b.opponent) - 3; }

// ---- construction -------------------------------------------------------

// One triple per recorded (non-pass) decision, in game order.
Dataset extract(std::span<const wthor::ReplayedGame> games, unsigned threads = 1);

// Exact dedup over (board, target), keeping first occurrences in order.
Dataset dedup(const Dataset& d);

// Each triple followed by its 7 other images; optionally deduplicated.
Dataset augment(const Dataset& d, bool dedup_after);

Dataset build_variant(const Dataset& original, Variant v);

// Group-by-board bound on the accuracy of any deterministic classifier, in
// percent. 100 for an empty dataset.
double consistency_upper_bound(const Dataset& d);

// Representative of the board's symmetry orbit (lexicographic minimum).
CanonicalBoard orbit_key(const CanonicalBoard& b) noexcept;

// ---- encoding -----------------------------------------------------------

// Writes channels(e) * 64 values, channel-major, cell index within a plane.
template <typename Scalar>
void encode(const CanonicalBoard& b, Encoding e, Scalar* out) {
  const Bitboard third = e == Encoding::VMoves ? legal_moves(b)
                         : e == Encoding::Ones ? ~Bitboard{0}
                                               : Bitboard{0};
  for (int i = 0; i < 64; ++i) {
    out[i] = static_cast<Scalar>((b.mover >> i) & 1);
    out[64 + i] = static_cast<Scalar>((b.opponent >> i) & 1);
    if (e != Encoding::Pieces) out[128 + i] = static_cast<Scalar>((third >> i) & 1);
  }
}

std::vector<float> encode(const CanonicalBoard& b, Encoding e);

// Network input layout: rows are channels, column n * 64 + cell.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> encode_batch(std::span<const CanonicalBoard> boards,
                                                                   Encoding e) {
  const int c = channels(e);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(c, static_cast<Eigen::Index>(boards.size()) * 64);
  std::array<Scalar, 192> planes{};
  for (std::size_t n = 0; n < boards.size(); ++n) {
    encode(boards[n], e, planes.data());
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < 64; ++i) m(ch, static_cast<Eigen::Index>(n) * 64 + i) = planes[ch * 64 + i];
    }
  }
  return m;
}

// ---- splitting ----------------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.25;
  std::uint64_t seed = 1;
  SplitOrder order = SplitOrder::BeforeAugmentation;
};

inline double default_test_fraction(Variant v) noexcept { return is_symmetric(v) ? 0.05 : 0.25; }

struct Split {
  Dataset train;
  Dataset test;
};

// AfterAugmentation: example-level split, round(f * N) test examples.
// BeforeAugmentation: whole symmetry orbits of boards go to one side, so no
// training board is an image of a test board; the test size is the largest
// orbit-aligned count not exceeding round(f * N). Both keep input order
// inside each side and are deterministic in the seed.
Split split(const Dataset& d, const SplitSpec& spec);

// Variant construction + split in the requested order. With
// BeforeAugmentation the base set (Original or Unique) is split first and
// each side augmented separately.
Split build_split(const Dataset& original, Variant v, const SplitSpec& spec);

// Bootstrap resample of the same size.
Dataset bootstrap(const Dataset& d, std::uint64_t seed);

// Seeded Fisher-Yates; identical output on every platform.
void shuffle(std::span<std::uint32_t> idx, std::uint64_t seed);

// ---- persistence --------------------------------------------------------
//
// "ODS1", version u16, encoding tag u8, count u64, then per example the
// mover and opponent masks (u64 LE each) and the target index (u8); a CRC-32
// of all preceding bytes closes the file.

inline constexpr std::uint16_t kFormatVersion = 1;

struct StoredDataset {
  Encoding encoding = Encoding::Pieces;
  Dataset examples;
};

std::vector<std::uint8_t> serialize(const Dataset& d, Encoding e);
// Throws BadMagic, VersionMismatch, ChecksumMismatch, TruncatedFile, or
// InvalidArgument for an example whose target is not a legal move.
StoredDataset deserialize(std::span<const std::uint8_t> bytes);

void save(const Dataset& d, Encoding e, const std::filesystem::path& path);
StoredDataset load(const std::filesystem::path& path);

}  // namespace othello::dataset
