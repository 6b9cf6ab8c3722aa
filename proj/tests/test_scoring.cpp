#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mbl/rng.hpp"
#include "mbl/scoring.hpp"
#include "support/golden.hpp"

using namespace mbl;
using namespace mbl::testing;

namespace {

// Table I as printed, row by row.
const std::map<int, std::vector<std::string>> kPrintedTable = {
    {1,
     {"Pure Double Chow", "Mixed Double Chow", "Short Straight", "Two Terminal Chows", "Pung of Terminals or Honours",
      "Melded Kong", "One Voided Suit", "No Honours", "Edge Wait", "Closed Wait", "Single Wait", "Self-Draw"}},
    {2,
     {"Dragon Pung", "Prevalent Wind", "Seat Wind", "Concealed Hand", "All Chows", "Tile Hog", "Mixed Double Pung",
      "Two Concealed Pungs", "Concealed Kong", "All Simples"}},
    {4, {"Outside Hand", "Fully Concealed Hand", "Two Melded Kongs", "Last Tile"}},
    {5, {"Melded and Concealed Kongs"}},
    {6,
     {"All Pungs", "Half Flush", "Mixed Shifted Chows", "All Types", "Melded Hand", "Two Dragon Pungs",
      "Two Concealed Kongs"}},
    {8,
     {"Mixed Straight", "Reversible Tiles", "Mixed Triple Chow", "Mixed Shifted Pungs", "Chicken Hand",
      "Last Tile Draw", "Out with Replacement Tile", "Rob Kong", "Last Tile Claim"}},
    {12, {"Lesser Honours and Knitted Tiles", "Knitted Straight", "Upper Four", "Lower Four", "Big Three Winds"}},
    {16,
     {"Pure Straight", "Three-Suited Terminal Chows", "Pure Shifted Chows", "All Fives", "Triple Pung",
      "Three Concealed Pungs"}},
    {24,
     {"Seven Pairs", "Lower Tiles", "All Even Pungs", "Full Flush", "Pure Triple Chow", "Pure Shifted Pungs",
      "Upper Tiles", "Middle Tiles", "Greater Honours and Knitted Tiles"}},
    {32, {"Four Pure Shifted Chows", "Three Kongs", "All Terminals and Honours"}},
    {48, {"Quadruple Chow", "Four Pure Shifted Pungs"}},
    {64,
     {"All Terminals", "Little Four Winds", "All Honours", "Little Three Dragons", "Pure Terminal Chows",
      "Four Concealed Pungs"}},
    {88,
     {"Big Four Winds", "Big Three Dragons", "Nine Gates", "Four Kongs", "Seven Shifted Pairs", "All Green",
      "Thirteen Orphans"}},
};

FanResult score(std::string_view tiles, std::string_view melds = {}, WinBy by = WinBy::Discard) {
  const HandInput in = parse_hand_input(tiles, melds);
  return best_fan(in.hand, in.winning_tile, context_for(in, by), FanTable::standard());
}

// Independent win oracle: remove any set from any position, memoising
// failures. Knitted and honour forms are matched against explicit lists.
bool oracle_sets(std::map<KindCounts, bool>& memo, KindCounts c, int sets, bool pair_left) {
  int n = 0;
  for (auto x : c) n += x;
  if (n == 0) return sets == 0 && !pair_left;
  if (auto it = memo.find(c); it != memo.end()) return it->second;
  bool ok = false;
  for (int k = 0; k < 34 && !ok; ++k) {
    auto& ck = c[static_cast<std::size_t>(k)];
    if (pair_left && ck >= 2) {
      ck -= 2;
      ok = oracle_sets(memo, c, sets, false);
      ck += 2;
    }
    if (!ok && sets > 0 && ck >= 3) {
      ck -= 3;
      ok = oracle_sets(memo, c, sets - 1, pair_left);
      ck += 3;
    }
    if (!ok && sets > 0 && k < 27 && k % 9 <= 6 && ck && c[static_cast<std::size_t>(k + 1)] &&
        c[static_cast<std::size_t>(k + 2)]) {
      --ck, --c[static_cast<std::size_t>(k + 1)], --c[static_cast<std::size_t>(k + 2)];
      ok = oracle_sets(memo, c, sets - 1, pair_left);
      ++ck, ++c[static_cast<std::size_t>(k + 1)], ++c[static_cast<std::size_t>(k + 2)];
    }
  }
  memo[c] = ok;
  return ok;
}

const std::vector<std::vector<std::string>> kKnitLists = {
    {"W1W4W7B2B5B8T3T6T9"}, {"W1W4W7T2T5T8B3B6B9"}, {"B1B4B7W2W5W8T3T6T9"},
    {"B1B4B7T2T5T8W3W6W9"}, {"T1T4T7W2W5W8B3B6B9"}, {"T1T4T7B2B5B8W3W6W9"},
};

bool oracle_wins(const KindCounts& c) {
  std::map<KindCounts, bool> memo;
  KindCounts copy = c;
  if (oracle_sets(memo, copy, 4, true)) return true;
  int pairs = 0, singles = 0;
  for (auto x : c) {
    pairs += x / 2;
    singles += x % 2;
  }
  if (singles == 0 && pairs == 7) return true;
  const auto orphans = parse_tiles("W1W9B1B9T1T9F1F2F3F4J1J2J3");
  int orphan_tiles = 0;
  bool all_orphans = true;
  for (auto k : orphans) {
    orphan_tiles += c[static_cast<std::size_t>(k.index())];
    all_orphans = all_orphans && c[static_cast<std::size_t>(k.index())] >= 1;
  }
  if (all_orphans && orphan_tiles == 14) return true;
  for (const auto& list : kKnitLists) {
    const auto knit = parse_tiles(list[0]);
    std::set<int> allowed;
    for (auto k : knit) allowed.insert(k.index());
    for (int k = 27; k < 34; ++k) allowed.insert(k);
    bool lone = true;
    for (int k = 0; k < 34; ++k)
      if (c[static_cast<std::size_t>(k)] > 1 || (c[static_cast<std::size_t>(k)] && !allowed.count(k))) lone = false;
    if (lone) return true;
    KindCounts rest = c;
    bool has = true;
    for (auto k : knit) {
      if (!rest[static_cast<std::size_t>(k.index())]) has = false;
      else --rest[static_cast<std::size_t>(k.index())];
    }
    std::map<KindCounts, bool> m2;
    if (has && oracle_sets(m2, rest, 1, true)) return true;
  }
  return false;
}

Hand hand_from_counts(const KindCounts& c, TileKind win) {
  Hand h;
  KindCounts rest = c;
  --rest[static_cast<std::size_t>(win.index())];
  for (int k = 0; k < 34; ++k)
    for (int i = 0; i < rest[static_cast<std::size_t>(k)]; ++i)
      h.concealed.push_back(Tile{TileKind(k), static_cast<std::uint8_t>(i)});
  return h;
}

}  // namespace

TEST(FanTable, MatchesPrintedTable) {
  const auto& t = FanTable::standard();
  ASSERT_EQ(t.patterns().size(), 81u);
  std::size_t listed = 0;
  for (const auto& [points, names] : kPrintedTable)
    for (const auto& name : names) {
      EXPECT_EQ(t.points(t.id_of(name)), points) << name;
      ++listed;
    }
  EXPECT_EQ(listed, 81u);
  std::set<int> levels;
  for (const auto& p : t.patterns()) levels.insert(p.points);
  EXPECT_EQ(levels, std::set<int>(kPointLevels.begin(), kPointLevels.end()));
}

TEST(FanTable, LuckContextSet) {
  std::set<std::string> luck;
  for (const auto& p : FanTable::standard().patterns())
    if (p.kind == FanKind::LuckContext) luck.insert(p.name);
  EXPECT_EQ(luck, (std::set<std::string>{"Self-Draw", "Last Tile", "Last Tile Draw", "Last Tile Claim",
                                         "Out with Replacement Tile", "Rob Kong"}));
}

TEST(FanTable, SerializeRoundTrip) {
  const auto text = FanTable::standard().serialize();
  EXPECT_EQ(FanTable::parse(text).serialize(), text);
}

TEST(FanTable, RejectsBadTables) {
  const auto text = FanTable::standard().serialize();
  // drop the last pattern
  const auto cut = text.rfind("81 |");
  EXPECT_THROW(FanTable::parse(text.substr(0, cut)), TableError);
  std::string dup = text;
  dup.replace(dup.find("Self-Draw"), 9, "Last Tile");
  EXPECT_THROW(FanTable::parse(dup), TableError);
  std::string bad_points = text;
  bad_points.replace(bad_points.find("| 88 |"), 6, "| 87 |");
  EXPECT_THROW(FanTable::parse(bad_points), TableError);
  EXPECT_THROW(FanTable::load("/nonexistent/table.txt"), TableError);
}

TEST(FanTable, WithPointsAndDiff) {
  const auto& base = FanTable::standard();
  const auto revised = base.with_points({{fan::SevenPairs, 16}, {fan::ReversibleTiles, 12}});
  const auto d = revised.diff(base);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0], (std::array<int, 3>{fan::SevenPairs, 24, 16}));
  EXPECT_THROW(base.with_points({{fan::SevenPairs, 23}}), TableError);
}

TEST(Decompose, SevenPairsIsSingleSpecialForm) {
  const auto in = parse_hand_input("W1W1W3W3B2B2B7B7T4T4F1F1J2J2");
  const auto ds = decompose(in.hand, in.winning_tile);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].special_form, SpecialForm::SevenPairs);
}

TEST(Decompose, StandardHandHasDecomposition) {
  const auto in = parse_hand_input("W1W1W1W2W3W4W5W6W7W9W9W9W8W8");
  EXPECT_FALSE(decompose(in.hand, in.winning_tile).empty());
}

TEST(Decompose, UnconnectedTilesHaveNone) {
  const auto in = parse_hand_input("W2W5W8B1B4B7T2T5T9F1F2J1J2J3");
  EXPECT_TRUE(decompose(in.hand, in.winning_tile).empty());
  KindCounts c = in.hand.concealed_counts();
  ++c[static_cast<std::size_t>(in.winning_tile.kind.index())];
  EXPECT_FALSE(oracle_wins(c));
}

TEST(Decompose, MalformedCountThrows) {
  const auto in = parse_hand_input("W1W1W1W2W3W4W5W6W7W9W9W9");
  EXPECT_THROW(decompose(in.hand, in.winning_tile), ShapeError);
}

TEST(Decompose, DecompositionsCoverTiles) {
  const auto in = parse_hand_input("W1W1W1W2W2W2W3W3W3W4W5W6W7W7");
  const auto ds = decompose(in.hand, in.winning_tile);
  ASSERT_GE(ds.size(), 2u);
  for (const auto& d : ds) {
    if (d.special_form) continue;
    KindCounts got{};
    for (const auto& s : d.sets)
      for (auto k : s.kinds()) ++got[static_cast<std::size_t>(k.index())];
    got[static_cast<std::size_t>(d.pairs[0].index())] += 2;
    KindCounts want = in.hand.concealed_counts();
    ++want[static_cast<std::size_t>(in.winning_tile.kind.index())];
    EXPECT_EQ(got, want);
  }
}

TEST(Decompose, AgreesWithOracleOnRandomMultisets) {
  Rng rng(2024);
  int wins = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    KindCounts c{};
    // Bias towards a few suits so winning hands actually occur.
    const int span = 9 + static_cast<int>(rng.below(26));
    for (int i = 0; i < 14;) {
      const auto k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(span)));
      if (c[k] < 4) {
        ++c[k];
        ++i;
      }
    }
    TileKind win;
    for (int k = 0; k < 34; ++k)
      if (c[static_cast<std::size_t>(k)]) win = TileKind(k);
    const Hand h = hand_from_counts(c, win);
    const bool got = !decompose(h, Tile{win, 3}).empty();
    const bool want = oracle_wins(c);
    ASSERT_EQ(got, want) << "trial " << trial;
    ASSERT_EQ(is_winning_shape(c, 0), want);
    wins += want;
  }
  EXPECT_GT(wins, 100);
}

TEST(Decompose, ConstructedWinsAreFound) {
  Rng rng(77);
  for (int trial = 0; trial < 20000; ++trial) {
    KindCounts c{};
    bool ok = true;
    for (int s = 0; s < 4 && ok; ++s) {
      if (rng.below(2)) {
        const int suit = static_cast<int>(rng.below(3)), r = static_cast<int>(rng.below(7));
        for (int i = 0; i < 3; ++i) ok = ok && ++c[static_cast<std::size_t>(suit * 9 + r + i)] <= 4;
      } else {
        ok = (c[rng.below(34)] += 3) <= 4;
      }
    }
    const auto pair = static_cast<std::size_t>(rng.below(34));
    c[pair] += 2;
    ok = ok && c[pair] <= 4;
    for (auto x : c) ok = ok && x <= 4;
    if (!ok) continue;
    EXPECT_TRUE(oracle_wins(c));
    EXPECT_FALSE(decompose(hand_from_counts(c, TileKind(static_cast<int>(pair))), Tile{TileKind(static_cast<int>(pair)), 3}).empty());
  }
}

TEST(EnumerateFans, MixedTripleChowIsEight) {
  const auto r = score("W2W3W4B2B3B4T2T3T4T7T8T9F1F1");
  EXPECT_TRUE(r.has(fan::MixedTripleChow));
  EXPECT_EQ(FanTable::standard().points(fan::MixedTripleChow), 8);
}

TEST(EnumerateFans, ThirteenOrphansIs88) {
  const auto r = score("W1W9B1B9T1T9F1F2F3F4J1J2J3J3");
  EXPECT_EQ(r.total, 88);
}

TEST(EnumerateFans, ChickenHand) {
  const auto r = score("T7T8F2F2T9", "chow:W2W3W4 pung:B6B6B6 chow:T3T4T5");
  ASSERT_EQ(r.fans.size(), 1u);
  EXPECT_EQ(r.fans[0].pattern_id, fan::ChickenHand);
  EXPECT_EQ(r.total, 8);
  EXPECT_TRUE(r.win);
}

TEST(EnumerateFans, ChickenNeverPerDecomposition) {
  const auto in = parse_hand_input("T7T8F2F2T9", "chow:W2W3W4 pung:B6B6B6 chow:T3T4T5");
  for (const auto& d : decompose(in.hand, in.winning_tile)) {
    const auto r = enumerate_fans(d, in.hand, context_for(in), FanTable::standard());
    EXPECT_FALSE(r.has(fan::ChickenHand));
  }
}

TEST(BestFan, SevenPairsAtLeast24) { EXPECT_GE(score("W1W1W3W3B2B2B7B7T4T4F1F1J2J2").total, 24); }

TEST(BestFan, FullFlushSelfDraw) {
  const auto r = score("W1W1W1W2W3W4W5W6W7W8W8W9W9W9", {}, WinBy::SelfDraw);
  EXPECT_TRUE(r.has(fan::FullFlush));
  EXPECT_EQ(r.multiplicity(fan::FullFlush), 1);
}

TEST(BestFan, FourChowsBelowThreshold) {
  const auto r = score("B1B2B3W5W6W7T6T7T8B5B5", "chow:W1W2W3");
  EXPECT_EQ(r.total, 4);
  EXPECT_FALSE(r.win);
}

TEST(BestFan, NonWinningShape) {
  const auto r = score("W2W5W8B1B4B7T2T5T9F1F2J1J2J3");
  EXPECT_FALSE(r.win);
  EXPECT_EQ(r.total, 0);
  EXPECT_TRUE(r.fans.empty());
}

TEST(BestFan, StrictSevenPairsOption) {
  const auto in = parse_hand_input("W1W1W1W1B2B2T4T4T5T5J1J1F2F2");
  ScoringOptions strict;
  strict.seven_pairs_distinct = true;
  EXPECT_FALSE(best_fan(in.hand, in.winning_tile, context_for(in), FanTable::standard(), strict).win);
  EXPECT_TRUE(best_fan(in.hand, in.winning_tile, context_for(in), FanTable::standard()).win);
}

TEST(WinningKinds, SkipsExhaustedKinds) {
  // All four W3 are held across the meld and the rack.
  const auto in = parse_hand_input("W3W4W5W3W3B6B7B8T5T5", "chow:W1W2W3");
  Hand h = in.hand;
  h.concealed.push_back(in.winning_tile);
  const auto waits = winning_kinds(h);
  EXPECT_EQ(std::count(waits.begin(), waits.end(), parse_tile("W3")), 0);
  EXPECT_EQ(std::count(waits.begin(), waits.end(), parse_tile("T5")), 1);
}

TEST(Golden, Corpus) {
  const auto cases = load_golden(std::string(MBL_TEST_DATA) + "/golden_hands.txt");
  ASSERT_GE(cases.size(), 50u);
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    const HandInput in = parse_hand_input(c.tiles, c.melds);
    const WinContext ctx = parse_golden_context(c, in);
    const FanResult r = best_fan(in.hand, in.winning_tile, ctx, FanTable::standard());
    std::map<int, int> got;
    int sum = 0;
    for (const auto& f : r.fans) {
      got[f.pattern_id] = f.multiplicity;
      sum += f.multiplicity * f.points;
    }
    auto names = [](const std::map<int, int>& m) {
      std::string s;
      for (auto [id, n] : m) s += FanTable::standard().at(id).name + "*" + std::to_string(n) + "; ";
      return s;
    };
    EXPECT_EQ(got, c.fans) << "got " << names(got) << "\nwant " << names(c.fans);
    EXPECT_EQ(r.total, c.total);
    EXPECT_EQ(sum, r.total);
    EXPECT_EQ(r.win, r.total >= 8);
  }
}

TEST(Exclusions, NeverAwardsSuppressedPair) {
  // Random winning hands from constructed sets; no awarded fan may exclude another.
  Rng rng(5);
  const auto& table = FanTable::standard();
  int checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    KindCounts c{};
    for (int s = 0; s < 4; ++s) {
      if (rng.below(2)) {
        const int suit = static_cast<int>(rng.below(3)), r = static_cast<int>(rng.below(7));
        for (int i = 0; i < 3; ++i) ++c[static_cast<std::size_t>(suit * 9 + r + i)];
      } else {
        c[rng.below(34)] += 3;
      }
    }
    const auto pair = rng.below(34);
    c[pair] += 2;
    bool ok = true;
    for (auto x : c) ok = ok && x <= 4;
    if (!ok) continue;
    const TileKind win(static_cast<int>(pair));
    const Hand h = hand_from_counts(c, win);
    WinContext ctx;
    ctx.win_by = rng.below(2) ? WinBy::SelfDraw : WinBy::Discard;
    if (ctx.win_by == WinBy::Discard) ctx.discarder = 1;
    ctx.winning_tile = Tile{win, 3};
    for (const auto& d : decompose(h, ctx.winning_tile)) {
      const auto r = enumerate_fans(d, h, ctx, table, rng.below(2));
      for (const auto& a : r.fans)
        for (int e : table.at(a.pattern_id).excludes) ASSERT_FALSE(r.has(e)) << table.at(a.pattern_id).name;
      int sum = 0;
      for (const auto& f : r.fans) sum += f.multiplicity * f.points;
      ASSERT_EQ(sum, r.total);
      ++checked;
    }
    const auto best = best_fan(h, ctx.winning_tile, ctx, table);
    ASSERT_EQ(best.win, best.total >= 8);
  }
  EXPECT_GT(checked, 1000);
}

TEST(Settle, PrintedExamples) {
  EXPECT_EQ(settle(8, WinBy::SelfDraw, 0, std::nullopt), (std::array<int, 4>{48, -16, -16, -16}));
  EXPECT_EQ(settle(10, WinBy::Discard, 1, 3), (std::array<int, 4>{-8, 34, -8, -18}));
  EXPECT_EQ(settle(8, WinBy::RobKong, 2, 0), settle(8, WinBy::Discard, 2, 0));
  EXPECT_EQ(settle(9, WinBy::ReplacementTile, 3, std::nullopt), settle(9, WinBy::SelfDraw, 3, std::nullopt));
}

TEST(Settle, ThresholdAndArguments) {
  EXPECT_THROW(settle(7, WinBy::SelfDraw, 0, std::nullopt), ThresholdError);
  EXPECT_THROW(settle(8, WinBy::Discard, 0, std::nullopt), Error);
  EXPECT_THROW(settle(8, WinBy::Discard, 0, 0), Error);
}

TEST(Settle, ZeroSumProperty) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const int n = 8 + static_cast<int>(rng.below(300));
    const int winner = static_cast<int>(rng.below(4));
    const auto by = static_cast<WinBy>(rng.below(4));
    std::optional<int> from;
    if (by == WinBy::Discard || by == WinBy::RobKong) from = (winner + 1 + static_cast<int>(rng.below(3))) % 4;
    const auto s = settle(n, by, winner, from);
    EXPECT_EQ(s[0] + s[1] + s[2] + s[3], 0);
  }
}
