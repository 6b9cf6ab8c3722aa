#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbl/tiles.hpp"

namespace mbl {

/// Stable pattern identifiers, ordered from 88 points down to 1 point.
namespace fan {
enum Id : int {
  BigFourWinds = 1,
  BigThreeDragons,
  AllGreen,
  NineGates,
  FourKongs,
  SevenShiftedPairs,
  ThirteenOrphans,
  AllTerminals,
  LittleFourWinds,
  LittleThreeDragons,
  AllHonours,
  FourConcealedPungs,
  PureTerminalChows,
  QuadrupleChow,
  FourPureShiftedPungs,
  FourPureShiftedChows,
  ThreeKongs,
  AllTerminalsAndHonours,
  SevenPairs,
  GreaterHonoursAndKnittedTiles,
  AllEvenPungs,
  FullFlush,
  PureTripleChow,
  PureShiftedPungs,
  UpperTiles,
  MiddleTiles,
  LowerTiles,
  PureStraight,
  ThreeSuitedTerminalChows,
  PureShiftedChows,
  AllFives,
  TriplePung,
  ThreeConcealedPungs,
  LesserHonoursAndKnittedTiles,
  KnittedStraight,
  UpperFour,
  LowerFour,
  BigThreeWinds,
  MixedStraight,
  ReversibleTiles,
  MixedTripleChow,
  MixedShiftedPungs,
  ChickenHand,
  LastTileDraw,
  LastTileClaim,
  OutWithReplacementTile,
  RobKong,
  AllPungs,
  HalfFlush,
  MixedShiftedChows,
  AllTypes,
  MeldedHand,
  TwoConcealedKongs,
  TwoDragonPungs,
  MeldedAndConcealedKongs,
  OutsideHand,
  FullyConcealedHand,
  TwoMeldedKongs,
  LastTile,
  DragonPung,
  PrevalentWind,
  SeatWind,
  ConcealedHand,
  AllChows,
  TileHog,
  MixedDoublePung,
  TwoConcealedPungs,
  ConcealedKong,
  AllSimples,
  PureDoubleChow,
  MixedDoubleChow,
  ShortStraight,
  TwoTerminalChows,
  PungOfTerminalsOrHonours,
  MeldedKong,
  OneVoidedSuit,
  NoHonours,
  EdgeWait,
  ClosedWait,
  SingleWait,
  SelfDraw,
};
}  // namespace fan

inline constexpr int kNumPatterns = 81;
inline constexpr int kWinThreshold = 8;
inline constexpr std::array<int, 13> kPointLevels = {1, 2, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64, 88};

/// Index of `points` in kPointLevels, or -1.
int point_level(int points);

enum class FanKind : std::uint8_t { Structural, LuckContext };

struct FanPattern {
  int id = 0;
  std::string name;
  int points = 0;
  FanKind kind = FanKind::Structural;
  std::vector<int> excludes;
};

/// The 81 scoring patterns with points and exclusion lists. Immutable once
/// built; cheap to copy.
class FanTable {
 public:
  /// The standard point table with the shipped exclusion relations.
  static const FanTable& standard();
  /// Parses the fan-table text format; validates count, levels and names.
  static FanTable parse(std::string_view text);
  static FanTable load(const std::filesystem::path& path);

  std::string serialize() const;

  const FanPattern& at(int id) const { return patterns_.at(static_cast<std::size_t>(id - 1)); }
  int points(int id) const { return at(id).points; }
  std::span<const FanPattern> patterns() const { return patterns_; }
  /// Pattern id by display name; throws NotFound.
  int id_of(std::string_view name) const;

  /// Copy with some pattern points replaced (exclusions unchanged).
  FanTable with_points(const std::map<int, int>& new_points) const;
  /// (id, old, new) for every pattern whose points differ from `base`.
  std::vector<std::array<int, 3>> diff(const FanTable& base) const;

 private:
  void validate() const;

  std::vector<FanPattern> patterns_;
};

enum class WinBy : std::uint8_t { SelfDraw, Discard, RobKong, ReplacementTile };

std::string_view win_by_name(WinBy w);
WinBy parse_win_by(std::string_view s);

struct WinContext {
  WinBy win_by = WinBy::Discard;
  bool last_wall_tile = false;
  int seat_wind = 1;       // 1 = East
  int prevalent_wind = 1;  // 1 = East
  std::optional<int> discarder;
  Tile winning_tile{};
  bool concealed_throughout = true;
  /// Copies of each kind exposed on the table (discards and melds), not
  /// counting the winning tile itself.
  KindCounts visible_counts{};

  bool self_drawn() const { return win_by == WinBy::SelfDraw || win_by == WinBy::ReplacementTile; }
};

enum class SetType : std::uint8_t { Chow, Pung, Kong };

struct TileSet {
  SetType type = SetType::Pung;
  TileKind base;  // chow start, or pung/kong kind
  bool concealed = true;
  bool from_meld = false;  // declared meld (claimed or concealed kong)

  std::array<TileKind, 3> kinds() const;
  bool contains(TileKind k) const;
  friend auto operator<=>(const TileSet&, const TileSet&) = default;
};

enum class SpecialForm : std::uint8_t { SevenPairs, ThirteenOrphans, KnittedStraightForm, HonorsAndKnitted };

std::string_view special_form_name(SpecialForm f);

/// Where the winning tile sits inside a decomposition.
enum class WinSlot : std::int8_t { Pair = -1, Other = -2 };

struct Decomposition {
  std::vector<TileSet> sets;
  std::vector<TileKind> pairs;
  std::optional<SpecialForm> special_form;
  /// Suit carrying ranks 1-4-7, 2-5-8 and 3-6-9 in knitted forms.
  std::optional<std::array<int, 3>> knit;
  /// Lone tiles of Thirteen Orphans and honors-and-knitted forms.
  std::vector<TileKind> singles;
  /// Index into `sets`, or a WinSlot value.
  int winning_slot = static_cast<int>(WinSlot::Other);
};

struct ScoringOptions {
  /// Seven Pairs requires seven distinct kinds (four of a kind is not two pairs).
  bool seven_pairs_distinct = false;
};

struct FanEntry {
  int pattern_id = 0;
  int multiplicity = 1;
  int points = 0;
  friend bool operator==(const FanEntry&, const FanEntry&) = default;
};

struct FanResult {
  std::vector<FanEntry> fans;
  int total = 0;
  bool win = false;

  bool has(int pattern_id) const;
  int multiplicity(int pattern_id) const;
};

/// Raw pattern presence counts before combination rules and exclusions.
using PatternCounts = std::array<int, kNumPatterns + 1>;

/// True when kind counts (exactly 3*sets_needed + 2 tiles) split into
/// sets_needed sets plus a pair.
bool is_standard_shape(KindCounts counts, int sets_needed);
/// Any winning shape, given concealed counts (winning tile included) and
/// the number of declared melds.
bool is_winning_shape(const KindCounts& counts, int meld_count, const ScoringOptions& opts = {});

/// Every decomposition of hand+winning tile, one per placement of the
/// winning tile. Empty when the tiles form no winning shape.
std::vector<Decomposition> decompose(const Hand& hand, Tile winning_tile, const ScoringOptions& opts = {});

/// Kinds that would complete `hand` (13-tile equivalent) into a winning shape.
std::vector<TileKind> winning_kinds(const Hand& hand, const ScoringOptions& opts = {});

/// Patterns structurally present in one decomposition (no exclusions, no
/// account-once selection). `wait_unique` says whether the pre-win hand
/// waited on a single kind.
PatternCounts detect_patterns(const Decomposition& d, const Hand& hand, const WinContext& ctx,
                              bool wait_unique);

/// Applies combination rules and the exclusion table to one decomposition.
/// Never awards Chicken Hand (that depends on every decomposition).
FanResult enumerate_fans(const Decomposition& d, const Hand& hand, const WinContext& ctx, const FanTable& table,
                         bool wait_unique = false);

/// Max-total result over all decompositions; win is true iff total >= 8.
FanResult best_fan(const Hand& hand, Tile winning_tile, const WinContext& ctx, const FanTable& table,
                   const ScoringOptions& opts = {});

/// A hand written as text: concealed tiles with the winning tile last, and
/// melds such as "pung:B1B1B1 chow:W2W3W4 kong:T5T5T5T5 ckong:J1J1J1J1 akong:F1F1F1F1".
/// Copies are numbered per kind in order of appearance.
struct HandInput {
  Hand hand;
  Tile winning_tile;
};
HandInput parse_hand_input(std::string_view tiles, std::string_view melds = {});

/// Zero-sum settlement for a win worth `fan_total` points.
std::array<int, 4> settle(int fan_total, WinBy win_by, int winner, std::optional<int> discarder);

}  // namespace mbl
