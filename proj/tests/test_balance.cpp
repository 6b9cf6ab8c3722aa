#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mbl/balance.hpp"
#include "mbl/rng.hpp"
#include "support/published_tables.hpp"

using namespace mbl;

namespace {

const FanTable& table() { return FanTable::standard(); }

MatchRecord win_record(std::string id, std::vector<std::pair<int, int>> fans) {
  MatchRecord r;
  r.match_id = std::move(id);
  r.result.winner = 0;
  for (auto [pid, mult] : fans) r.result.fans.fans.push_back(FanEntry{pid, mult, table().points(pid) * mult});
  return r;
}

FrequencyTable synthetic_top_frequent() {
  FrequencyTable f;
  // Patterns outside the list sit below every listed one, ordered by id.
  for (int id = 1; id <= kNumPatterns; ++id) f.counts[static_cast<std::size_t>(id)] = 100 - id;
  for (std::size_t i = 0; i < published::kTopFrequent.size(); ++i)
    f.counts[static_cast<std::size_t>(table().id_of(published::kTopFrequent[i]))] = 100000 - static_cast<int>(i);
  return f;
}

std::uint64_t weight(const std::vector<int>& c) {
  static const int choose[] = {1, 4, 6, 4, 1};
  std::uint64_t w = 1;
  for (int n : c) w *= static_cast<std::uint64_t>(choose[n]);
  return w;
}

// Plain recursive set check over one suit's nine ranks.
bool sets_only(std::vector<int>& c, std::size_t from) {
  while (from < c.size() && c[from] == 0) ++from;
  if (from == c.size()) return true;
  if (c[from] >= 3) {
    c[from] -= 3;
    const bool ok = sets_only(c, from);
    c[from] += 3;
    if (ok) return true;
  }
  if (from + 2 < c.size() && c[from + 1] && c[from + 2]) {
    --c[from], --c[from + 1], --c[from + 2];
    const bool ok = sets_only(c, from);
    ++c[from], ++c[from + 1], ++c[from + 2];
    if (ok) return true;
  }
  return false;
}

bool one_suit_wins(std::vector<int> c) {
  int pairs = 0;
  for (int n : c) pairs += n == 2;
  if (pairs == 7) return true;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (c[p] < 2) continue;
    c[p] -= 2;
    const bool ok = sets_only(c, 0);
    c[p] += 2;
    if (ok) return true;
  }
  return false;
}

std::vector<TileKind> kinds_range(int lo, int hi) {
  std::vector<TileKind> out;
  for (int k = lo; k < hi; ++k) out.emplace_back(k);
  return out;
}

}  // namespace

TEST(Frequencies, EmptyStreamIsAllZero) {
  const auto f = count_frequencies(std::span<const MatchRecord>{});
  EXPECT_EQ(f.matches, 0);
  for (auto n : f.counts) EXPECT_EQ(n, 0);
}

TEST(Frequencies, OncePerWinningMatch) {
  std::vector<MatchRecord> recs = {win_record("a", {{fan::SevenPairs, 1}, {fan::ConcealedHand, 1}})};
  auto f = count_frequencies(recs);
  EXPECT_EQ(f.counts[fan::SevenPairs], 1);
  EXPECT_EQ(f.counts[fan::ConcealedHand], 1);
  EXPECT_EQ(std::accumulate(f.counts.begin(), f.counts.end(), std::int64_t{0}), 2);

  recs = {win_record("b", {{fan::PureDoubleChow, 2}}), MatchRecord{}};
  EXPECT_EQ(count_frequencies(recs).counts[fan::PureDoubleChow], 1);
  EXPECT_EQ(count_frequencies(recs, true).counts[fan::PureDoubleChow], 2);
  EXPECT_EQ(count_frequencies(recs).matches, 2);
  EXPECT_EQ(count_frequencies(recs).wins, 1);
}

TEST(Frequencies, HalvesSumToTheWhole) {
  Rng rng(5);
  std::vector<MatchRecord> recs;
  for (int i = 0; i < 400; ++i) {
    std::vector<std::pair<int, int>> fans;
    for (int j = 0; j < 4; ++j) fans.push_back({1 + static_cast<int>(rng.below(81)), 1 + static_cast<int>(rng.below(2))});
    recs.push_back(win_record("m" + std::to_string(i), fans));
    if (rng.below(5) == 0) recs.push_back(MatchRecord{});
  }
  const std::span<const MatchRecord> all(recs);
  auto halves = count_frequencies(all.first(recs.size() / 2));
  halves += count_frequencies(all.subspan(recs.size() / 2));
  EXPECT_EQ(halves, count_frequencies(all));
}

TEST(Frequencies, UnknownIdNamesTheRecord) {
  std::vector<MatchRecord> recs = {win_record("good", {{fan::AllPungs, 1}}), win_record("bad-7", {})};
  recs[1].result.fans.fans.push_back(FanEntry{82, 1, 1});
  try {
    count_frequencies(recs);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad-7"), std::string::npos);
  }
}

TEST(Frequencies, JsonLinesStream) {
  std::vector<MatchRecord> recs = {win_record("x", {{fan::FullFlush, 1}}), win_record("y", {{fan::FullFlush, 1}})};
  std::stringstream ss;
  for (const auto& r : recs) ss << record_to_line(r) << "\n";
  ss << "\n";
  EXPECT_EQ(count_frequencies(ss).counts[fan::FullFlush], 2);
  std::stringstream bad("{not json}\n");
  try {
    count_frequencies(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(TopK, OrderAndTies) {
  FrequencyTable f;
  f.counts[10] = 5;
  f.counts[3] = 5;
  f.counts[50] = 9;
  EXPECT_EQ(top_k(f, 3), (std::vector<int>{50, 3, 10}));
  auto all = top_k(f, 81);
  std::sort(all.begin(), all.end());
  std::vector<int> ids(81);
  std::iota(ids.begin(), ids.end(), 1);
  EXPECT_EQ(all, ids);
  EXPECT_THROW(top_k(f, 82), std::invalid_argument);
}

TEST(TopK, SyntheticFrequencyGivesThePublishedMembership) {
  const auto top = top_k(synthetic_top_frequent(), 43);
  std::set<int> expected;
  for (std::size_t i = 0; i < 43; ++i) expected.insert(table().id_of(published::kTopFrequent[i]));
  EXPECT_EQ(std::set<int>(top.begin(), top.end()), expected);
}

TEST(Adaptation, ReproducesThePublishedDraft) {
  const auto r = adapt_points(synthetic_top_frequent(), table());
  EXPECT_EQ(r.n, 43);
  std::map<int, std::pair<int, int>> expected;
  for (const auto& c : published::kAdaptation) expected[table().id_of(c.name)] = {c.before, c.after};
  ASSERT_EQ(r.changed.size(), 11u);
  for (const auto& c : r.changed) {
    ASSERT_TRUE(expected.count(c[0])) << table().at(c[0]).name;
    EXPECT_EQ(c[1], expected[c[0]].first);
    EXPECT_EQ(c[2], expected[c[0]].second);
  }
  EXPECT_EQ(r.new_points.at(fan::SevenPairs), 16);
  EXPECT_EQ(r.new_points.at(fan::ReversibleTiles), 12);
  EXPECT_EQ(r.new_points.at(fan::LastTileDraw), 8);
  EXPECT_EQ(r.new_points.at(fan::LastTileClaim), 8);
  EXPECT_EQ(r.new_points.at(fan::OutWithReplacementTile), 8);
  EXPECT_EQ(r.new_points.at(fan::PureDoubleChow), 1);
  // The revised rule set carries exactly these points.
  EXPECT_TRUE(r.apply(table()).diff(RuleSet::revised().table).empty());
}

TEST(Adaptation, ExemptionIsConfigurable) {
  AdaptOptions opts;
  opts.exempt.erase(fan::LastTileDraw);
  const auto r = adapt_points(synthetic_top_frequent(), table(), opts);
  EXPECT_EQ(r.new_points.at(fan::LastTileDraw), 12);
  EXPECT_EQ(r.changed.size(), 12u);
}

TEST(Adaptation, NeverMovesMoreThanOneLevel) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    FrequencyTable f;
    for (auto& n : f.counts) n = static_cast<std::int64_t>(rng.below(1000));
    const auto r = adapt_points(f, table());
    EXPECT_EQ(r.n, 43);
    for (const auto& p : table().patterns()) {
      const int np = r.new_points.at(p.id);
      ASSERT_GE(point_level(np), 0);
      EXPECT_LE(std::abs(point_level(np) - point_level(p.points)), 1);
      if (p.points < 8) EXPECT_EQ(np, p.points);
    }
    const auto twice = adapt_points(f, r.apply(table()));
    for (const auto& p : table().patterns())
      EXPECT_LE(std::abs(point_level(twice.new_points.at(p.id)) - point_level(p.points)), 2);
  }
}

TEST(Adaptation, MissingStructuralCountIsAnError) {
  const FrequencyTable f = synthetic_top_frequent();
  std::stringstream csv(frequency_csv(f, table()));
  const FrequencyTable back = parse_frequency_csv(csv);
  EXPECT_EQ(back.counts, f.counts);
  EXPECT_EQ(adapt_points(back, table()).changed.size(), 11u);

  std::string text = frequency_csv(f, table());
  const auto row = text.find("\n19,Seven Pairs,");
  text.erase(row + 1, text.find('\n', row + 1) - row);
  std::stringstream partial(text);
  EXPECT_THROW(adapt_points(parse_frequency_csv(partial), table()), DataError);
}

TEST(Adaptation, ReportHasOneRowPerChange) {
  const auto r = adapt_points(synthetic_top_frequent(), table());
  const std::string rep = adaptation_report(r, table());
  EXPECT_EQ(std::count(rep.begin(), rep.end(), '\n'), 12);
  EXPECT_NE(rep.find("Seven Pairs,24,16"), std::string::npos);
}

TEST(Compensation, PublishedSeatAverages) {
  const auto v = derive_compensation(published::kSeatAverages).values();
  for (std::size_t s = 0; s < 4; ++s) EXPECT_DOUBLE_EQ(v[s], published::kCompensation[s]);
}

TEST(Compensation, ExamplesAndRepair) {
  EXPECT_EQ(derive_compensation(std::array<double, 4>{0, 0, 0, 0}).units, (std::array<std::int64_t, 4>{0, 0, 0, 0}));
  EXPECT_EQ(derive_compensation(std::array<double, 4>{0.26, -0.26, 0.0, 0.0}).units, (std::array<std::int64_t, 4>{-3, 3, 0, 0}));
  // Rounds to [-1, -1, -1, 2], one unit short; seat 0 strayed furthest down.
  EXPECT_EQ(derive_compensation(std::array<double, 4>{0.05, 0.06, 0.07, -0.18}).units,
            (std::array<std::int64_t, 4>{0, -1, -1, 2}));
  const auto sum = [](const CompensationVector& c) { return c.units[0] + c.units[1] + c.units[2] + c.units[3]; };
  EXPECT_EQ(sum(derive_compensation(std::array<double, 4>{0.05, 0.06, 0.07, -0.18})), 0);
}

TEST(Compensation, AlwaysSumsToZero) {
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 4> avg{};
    double total = 0;
    for (int s = 0; s < 3; ++s) {
      avg[static_cast<std::size_t>(s)] = (rng.uniform() - 0.5) * 8.0;
      total += avg[static_cast<std::size_t>(s)];
    }
    avg[3] = -total + (rng.uniform() - 0.5) * 0.01;  // near zero-sum, as measured averages are
    const auto c = derive_compensation(avg);
    EXPECT_EQ(c.units[0] + c.units[1] + c.units[2] + c.units[3], 0);
    for (std::size_t s = 0; s < 4; ++s) EXPECT_LT(std::abs(static_cast<double>(c.units[s]) + avg[s] / 0.1), 1.0 + 1e-9);
  }
}

TEST(Compensation, FromSeatStats) {
  SeatStats s;
  s.total = 10;
  s.matches = {10, 10, 10, 10};
  s.score_sum = {10, 4, -3, -11};
  EXPECT_EQ(derive_compensation(s).units, (std::array<std::int64_t, 4>{-10, -4, 3, 11}));
  EXPECT_THROW(derive_compensation(SeatStats{}), std::invalid_argument);
}

TEST(Enumeration, OneSuitMatchesBruteForce) {
  // Every count vector over W1-W9 with 14 tiles, checked by the local recursion.
  std::uint64_t distinct = 0, weighted = 0;
  std::vector<int> c(9);
  std::function<void(std::size_t, int)> walk = [&](std::size_t k, int left) {
    if (k == 9) {
      if (left == 0 && one_suit_wins(c)) {
        ++distinct;
        weighted += weight(c);
      }
      return;
    }
    for (int n = 0; n <= std::min(4, left); ++n) {
      c[k] = n;
      walk(k + 1, left - n);
    }
    c[k] = 0;
  };
  walk(0, 14);

  EnumerationFlags flags;
  flags.kinds = kinds_range(0, 9);
  std::uint64_t visited_weight = 0;
  const auto st = for_each_winning_hand(flags, [&](const KindCounts&, std::uint64_t w) { visited_weight += w; });
  EXPECT_EQ(st.distinct_hands, distinct);
  EXPECT_EQ(st.weighted_hands, BigCount(weighted));
  EXPECT_EQ(visited_weight, weighted);

  // Every one-suit winning hand is a Full Flush.
  const auto ff = enumerate_pattern_counts({fan::FullFlush}, flags);
  EXPECT_EQ(ff[0].exact_count, BigCount(weighted));
}

TEST(Enumeration, TwoSuitClosedFormsAndPureTripleChow) {
  EnumerationFlags flags;
  flags.kinds = kinds_range(0, 18);
  const auto counts = enumerate_pattern_counts({fan::SevenPairs, fan::FullFlush, fan::PureTripleChow}, flags);

  // Seven different kinds out of 18, two of four copies each.
  EXPECT_EQ(counts[0].exact_count, BigCount(31824) * BigCount(279936));

  EnumerationFlags one_suit;
  one_suit.kinds = kinds_range(0, 9);
  EXPECT_EQ(counts[1].exact_count, 2 * for_each_winning_hand(one_suit, [](const KindCounts&, std::uint64_t) {}).weighted_hands);

  // Three equal chows plus any set and pair, deduplicated by tile counts.
  std::set<std::vector<int>> hands;
  for (int suit = 0; suit < 2; ++suit)
    for (int r = 0; r < 7; ++r)
      for (int set = 0; set < 18 + 14; ++set)
        for (int pair = 0; pair < 18; ++pair) {
          std::vector<int> c(18);
          for (int j = 0; j < 3; ++j) c[static_cast<std::size_t>(suit * 9 + r + j)] += 3;
          if (set < 18) {
            c[static_cast<std::size_t>(set)] += 3;
          } else {
            const int s2 = (set - 18) / 7, r2 = (set - 18) % 7;
            for (int j = 0; j < 3; ++j) c[static_cast<std::size_t>(s2 * 9 + r2 + j)] += 1;
          }
          c[static_cast<std::size_t>(pair)] += 2;
          if (std::all_of(c.begin(), c.end(), [](int n) { return n <= 4; })) hands.insert(c);
        }
  BigCount ptc = 0;
  for (const auto& h : hands) ptc += weight(h);
  EXPECT_EQ(counts[2].exact_count, ptc);
}

TEST(Enumeration, SuitRelabelingKeepsPatterns) {
  EnumerationFlags flags;
  flags.kinds = kinds_range(0, 18);
  int checked = 0;
  for_each_winning_hand(flags, [&](const KindCounts& c, std::uint64_t) {
    if (++checked % 7) return;  // a fixed sample keeps the test quick
    KindCounts swapped{};
    for (int k = 0; k < 9; ++k) {
      swapped[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k + 9)];
      swapped[static_cast<std::size_t>(k + 9)] = c[static_cast<std::size_t>(k)];
    }
    auto a = hand_patterns(c), b = hand_patterns(swapped);
    // Reversible Tiles and All Green name particular suits.
    a.reset(fan::ReversibleTiles), b.reset(fan::ReversibleTiles);
    a.reset(fan::AllGreen), b.reset(fan::AllGreen);
    ASSERT_EQ(a, b);
  });
  EXPECT_GT(checked, 100000);
}

TEST(Enumeration, ContradictoryFlagsAndUnsupportedPatterns) {
  EnumerationFlags no_honors;
  no_honors.honors = false;
  no_honors.kinds = kinds_range(0, 34);
  no_honors.kinds.resize(18);  // keep it small; honours are gone either way
  const auto c = enumerate_pattern_counts({fan::ThirteenOrphans, fan::AllHonours}, no_honors);
  EXPECT_EQ(c[0].exact_count, 0);
  EXPECT_EQ(c[0].magnitude, -1);
  EXPECT_EQ(c[1].exact_count, 0);
  EXPECT_THROW(enumerate_pattern_counts({fan::LastTileDraw}), UnsupportedPattern);
  EXPECT_THROW(enumerate_pattern_counts({fan::SingleWait}), UnsupportedPattern);
  EXPECT_FALSE(enumerable_pattern(fan::SelfDraw));
  EXPECT_TRUE(enumerable_pattern(fan::SevenPairs));
}

TEST(Enumeration, HonourFormsAreCounted) {
  // Thirteen orphans: 13 ways to double one of 13 kinds, 4^12 * 6 copy choices each.
  EnumerationFlags orphans_only;
  for (int k : {0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33}) orphans_only.kinds.emplace_back(k);
  const auto c = enumerate_pattern_counts({fan::ThirteenOrphans}, orphans_only);
  EXPECT_EQ(c[0].exact_count, BigCount(13) * BigCount(16777216) * 6);
}

TEST(Enumeration, MagnitudeAndReport) {
  EXPECT_EQ(magnitude_of(BigCount(1505948184576ULL)), 12);
  EXPECT_EQ(magnitude_of(BigCount(999)), 2);
  EXPECT_EQ(magnitude_of(BigCount(1000)), 3);
  EXPECT_EQ(magnitude_of(BigCount(0)), -1);
  std::vector<PatternCount> pcs{{fan::SevenPairs, BigCount(1505948184576ULL), 12}};
  EXPECT_EQ(enumeration_report(pcs, table()), "pattern,name,exact count,magnitude\n19,Seven Pairs,1505948184576,12\n");
}
