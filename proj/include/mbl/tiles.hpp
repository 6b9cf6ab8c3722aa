#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbl/errors.hpp"

namespace mbl {

enum class Category : std::uint8_t { Characters, Dots, Bamboo, Winds, Dragons, Flowers };

inline constexpr int kNumKinds = 34;
inline constexpr int kNumKindsWithFlowers = 42;
inline constexpr int kCopiesPerKind = 4;

/// Tile identity without copy provenance. Indices: W1-9 = 0-8, B1-9 = 9-17,
/// T1-9 = 18-26, F1-4 = 27-30, J1-3 = 31-33, H1-8 = 34-41.
class TileKind {
 public:
  constexpr TileKind() = default;
  explicit constexpr TileKind(int index) : index_(static_cast<std::uint8_t>(index)) {}

  static constexpr TileKind suited(Category c, int rank) {
    return TileKind(static_cast<int>(c) * 9 + rank - 1);
  }
  static constexpr TileKind wind(int rank) { return TileKind(27 + rank - 1); }
  static constexpr TileKind dragon(int rank) { return TileKind(31 + rank - 1); }
  static constexpr TileKind flower(int rank) { return TileKind(34 + rank - 1); }
  static TileKind make(Category c, int rank);

  constexpr int index() const { return index_; }
  constexpr Category category() const {
    if (index_ < 27) return static_cast<Category>(index_ / 9);
    if (index_ < 31) return Category::Winds;
    if (index_ < 34) return Category::Dragons;
    return Category::Flowers;
  }
  constexpr int rank() const {
    if (index_ < 27) return index_ % 9 + 1;
    if (index_ < 31) return index_ - 27 + 1;
    if (index_ < 34) return index_ - 31 + 1;
    return index_ - 34 + 1;
  }
  constexpr bool is_suited() const { return index_ < 27; }
  constexpr bool is_honor() const { return index_ >= 27 && index_ < 34; }
  constexpr bool is_flower() const { return index_ >= 34; }
  constexpr bool is_terminal() const { return is_suited() && (rank() == 1 || rank() == 9); }
  constexpr bool is_terminal_or_honor() const { return is_terminal() || is_honor(); }
  /// Suit index 0-2 for suited tiles.
  constexpr int suit() const { return index_ / 9; }

  friend constexpr auto operator<=>(TileKind, TileKind) = default;

 private:
  std::uint8_t index_ = 0;
};

/// A physical tile: kind plus copy index 0-3 (flowers always copy 0).
struct Tile {
  TileKind kind;
  std::uint8_t copy = 0;

  constexpr int id() const { return kind.index() * kCopiesPerKind + copy; }
  friend constexpr auto operator<=>(const Tile&, const Tile&) = default;
};

using KindCounts = std::array<std::uint8_t, kNumKinds>;

/// Parses a two-character code such as "W1" or "F4".
TileKind parse_tile(std::string_view code);
std::string format_tile(TileKind kind);
/// Parses "W1" or "W1.3" (copy suffix); a missing suffix means copy 0.
Tile parse_physical_tile(std::string_view code);
std::string format_physical_tile(Tile tile);
/// Accepts codes concatenated ("W1W2W3") or separated by whitespace/commas.
std::vector<TileKind> parse_tiles(std::string_view text);
std::string format_tiles(std::span<const TileKind> kinds, std::string_view sep = "");

/// All legal kinds in index order; 34 entries, or 42 with flowers.
std::vector<TileKind> all_kinds(bool flowers = false);

enum class MeldType : std::uint8_t { Chow, Pung, MeldedKong, ConcealedKong, AddedKong };

std::string_view meld_type_name(MeldType t);

struct Meld {
  MeldType type = MeldType::Pung;
  std::vector<Tile> tiles;
  std::optional<int> claimed_from;
  std::optional<Tile> claimed_tile;

  bool is_kong() const {
    return type == MeldType::MeldedKong || type == MeldType::ConcealedKong || type == MeldType::AddedKong;
  }
  bool is_concealed() const { return type == MeldType::ConcealedKong; }
  /// Lowest kind in the meld (the chow start, or the pung/kong kind).
  TileKind base() const;

  /// Throws Error when the meld violates its type's shape or claim rules.
  void validate() const;
};

struct Hand {
  std::vector<Tile> concealed;
  std::vector<Meld> melds;

  /// 3 per meld (kongs included) plus concealed count.
  int equivalent_size() const { return static_cast<int>(3 * melds.size() + concealed.size()); }
  KindCounts concealed_counts() const;
};

class Wall {
 public:
  Wall() = default;
  explicit Wall(std::vector<Tile> tiles) : tiles_(std::move(tiles)) {}

  const std::vector<Tile>& tiles() const { return tiles_; }
  std::size_t size() const { return tiles_.size(); }
  std::size_t draw_cursor() const { return draw_cursor_; }
  std::size_t tail_taken() const { return tail_taken_; }
  std::size_t remaining() const { return tiles_.size() - draw_cursor_ - tail_taken_; }
  bool empty() const { return remaining() == 0; }

  Tile draw();
  /// Replacement draw from the far end of the wall.
  Tile draw_tail();

  /// Whitespace-separated codes in draw order; with_copies adds ".copy".
  std::string dump(bool with_copies = false) const;
  static Wall from_codes(std::string_view text);

 private:
  std::vector<Tile> tiles_;
  std::size_t draw_cursor_ = 0;
  std::size_t tail_taken_ = 0;
};

/// Every tile of the set in canonical order (136, or 144 with flowers).
std::vector<Tile> full_tile_set(bool flowers);
/// Fisher-Yates shuffle of the full tile set driven by Rng(seed).
Wall build_wall(std::uint64_t seed, bool flowers = false);

struct Deal {
  std::array<Hand, 4> hands;
  Wall wall;
};

/// Deals 13 tiles to each seat from the head of an untouched wall.
Deal deal(Wall wall);

}  // namespace mbl
