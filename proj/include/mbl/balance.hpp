#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mbl/engine.hpp"
#include "mbl/scoring.hpp"
#include "mbl/simulator.hpp"

namespace mbl {

struct FrequencyTable {
  std::array<std::int64_t, kNumPatterns + 1> counts{};
  /// Patterns with a known count. Tables folded from records know every id;
  /// tables read from CSV know only the rows present.
  std::bitset<kNumPatterns + 1> known;
  std::int64_t matches = 0;
  std::int64_t wins = 0;
  bool count_multiplicity = false;

  FrequencyTable();
  explicit FrequencyTable(bool multiplicity);

  /// Throws DataError naming the record on an unknown pattern id.
  void add(const MatchRecord& r);
  FrequencyTable& operator+=(const FrequencyTable& o);
  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

FrequencyTable count_frequencies(std::span<const MatchRecord> records, bool count_multiplicity = false);
/// Reads a JSON Lines record stream; errors carry the line number.
FrequencyTable count_frequencies(std::istream& jsonl, bool count_multiplicity = false);

/// pattern_id,name,count,rank
std::string frequency_csv(const FrequencyTable& f, const FanTable& table);
FrequencyTable parse_frequency_csv(std::istream& in);

/// The k most frequent ids, descending; equal counts keep the lower id first.
std::vector<int> top_k(const FrequencyTable& f, int k);

struct AdaptOptions {
  /// Luck fans held at their points.
  std::set<int> exempt = {fan::LastTileDraw, fan::LastTileClaim, fan::OutWithReplacementTile, fan::RobKong};
  int threshold = kWinThreshold;
};

struct AdaptationResult {
  std::map<int, int> new_points;
  /// (pattern_id, old, new) in id order.
  std::vector<std::array<int, 3>> changed;
  int n = 0;
  std::vector<int> top;

  FanTable apply(const FanTable& base) const { return base.with_points(new_points); }
};

/// Frequency-driven point adaptation: the N most frequent patterns (N = the
/// number of patterns at or below the threshold) above the threshold drop a
/// level; non-members at the threshold rise a level.
AdaptationResult adapt_points(const FrequencyTable& f, const FanTable& table, const AdaptOptions& opts = {});

/// pattern,previous points,new points
std::string adaptation_report(const AdaptationResult& r, const FanTable& table);

struct CompensationVector {
  std::array<std::int64_t, 4> units{};
  double resolution = 0.1;

  std::array<double, 4> values() const;
};

/// Negated averages rounded to `resolution`, repaired to sum exactly 0 by
/// largest remainder.
CompensationVector derive_compensation(const std::array<double, 4>& averages, double resolution = 0.1);
CompensationVector derive_compensation(const SeatStats& stats, double resolution = 0.1);

using BigCount = boost::multiprecision::cpp_int;

struct PatternCount {
  int pattern_id = 0;
  BigCount exact_count;
  /// floor(log10(exact_count)), or -1 for a zero count.
  int magnitude = -1;
};

int magnitude_of(const BigCount& n);

struct EnumerationFlags {
  /// Seven Pairs needs seven different kinds.
  bool strict_seven_pairs = true;
  bool honors = true;
  /// Restricts the tile kinds hands may use; empty means all 34.
  std::vector<TileKind> kinds;
};

struct EnumerationStats {
  std::uint64_t distinct_hands = 0;
  BigCount weighted_hands;
};

/// Visits every concealed 14-tile winning hand once, with its copy-choice
/// weight prod C(4, count).
EnumerationStats for_each_winning_hand(const EnumerationFlags& flags,
                                       const std::function<void(const KindCounts&, std::uint64_t)>& visit);

/// Patterns present in at least one decomposition of a concealed,
/// self-drawn hand (no exclusions applied).
std::bitset<kNumPatterns + 1> hand_patterns(const KindCounts& counts, const ScoringOptions& opts = {});

/// False for luck fans and for patterns that depend on how the hand was won
/// (waits, concealment, Chicken Hand); enumerating those throws UnsupportedPattern.
bool enumerable_pattern(int id);

std::vector<PatternCount> enumerate_pattern_counts(const std::vector<int>& patterns, const EnumerationFlags& flags = {},
                                                   EnumerationStats* stats = nullptr);

/// pattern,name,exact count,magnitude
std::string enumeration_report(const std::vector<PatternCount>& counts, const FanTable& table);

}  // namespace mbl
