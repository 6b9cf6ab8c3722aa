#include "mbl/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mbl {

namespace {

constexpr std::array<std::array<int, 3>, 6> kKnitPerms = {{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
}};

constexpr int kRedDragon = 1;
constexpr int kGreenDragon = 2;
constexpr int kWhiteDragon = 3;

std::size_t idx(TileKind k) { return static_cast<std::size_t>(k.index()); }

TileKind knitted_kind(const std::array<int, 3>& knit, int group, int step) {
  return TileKind(knit[static_cast<std::size_t>(group)] * 9 + group + 3 * step);
}

int total(const KindCounts& c) { return std::accumulate(c.begin(), c.end(), 0); }

// Lowest-tile-first set search. Each multiset partition is produced once,
// because the lowest remaining tile must start a pung or a chow.
bool can_form_sets(KindCounts& c, int need) {
  int k = 0;
  while (k < kNumKinds && c[static_cast<std::size_t>(k)] == 0) ++k;
  if (k == kNumKinds) return need == 0;
  if (need == 0) return false;
  auto& ck = c[static_cast<std::size_t>(k)];
  if (ck >= 3) {
    ck -= 3;
    const bool ok = can_form_sets(c, need - 1);
    ck += 3;
    if (ok) return true;
  }
  const TileKind kind(k);
  if (kind.is_suited() && kind.rank() <= 7 && c[static_cast<std::size_t>(k + 1)] && c[static_cast<std::size_t>(k + 2)]) {
    --c[static_cast<std::size_t>(k)];
    --c[static_cast<std::size_t>(k + 1)];
    --c[static_cast<std::size_t>(k + 2)];
    const bool ok = can_form_sets(c, need - 1);
    ++c[static_cast<std::size_t>(k)];
    ++c[static_cast<std::size_t>(k + 1)];
    ++c[static_cast<std::size_t>(k + 2)];
    if (ok) return true;
  }
  return false;
}

void enumerate_sets(KindCounts& c, int need, std::vector<TileSet>& cur, std::vector<std::vector<TileSet>>& out) {
  int k = 0;
  while (k < kNumKinds && c[static_cast<std::size_t>(k)] == 0) ++k;
  if (k == kNumKinds) {
    if (need == 0) out.push_back(cur);
    return;
  }
  if (need == 0) return;
  auto& ck = c[static_cast<std::size_t>(k)];
  if (ck >= 3) {
    ck -= 3;
    cur.push_back(TileSet{SetType::Pung, TileKind(k), true, false});
    enumerate_sets(c, need - 1, cur, out);
    cur.pop_back();
    ck += 3;
  }
  const TileKind kind(k);
  if (kind.is_suited() && kind.rank() <= 7 && c[static_cast<std::size_t>(k + 1)] && c[static_cast<std::size_t>(k + 2)]) {
    --c[static_cast<std::size_t>(k)];
    --c[static_cast<std::size_t>(k + 1)];
    --c[static_cast<std::size_t>(k + 2)];
    cur.push_back(TileSet{SetType::Chow, TileKind(k), true, false});
    enumerate_sets(c, need - 1, cur, out);
    cur.pop_back();
    ++c[static_cast<std::size_t>(k)];
    ++c[static_cast<std::size_t>(k + 1)];
    ++c[static_cast<std::size_t>(k + 2)];
  }
}

bool is_seven_pairs(const KindCounts& c, const ScoringOptions& opts) {
  if (total(c) != 14) return false;
  for (auto n : c) {
    if (n % 2 != 0) return false;
    if (n == 4 && opts.seven_pairs_distinct) return false;
  }
  return true;
}

constexpr std::array<int, 13> kOrphans = {0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33};

bool is_thirteen_orphans(const KindCounts& c) {
  if (total(c) != 14) return false;
  int doubled = 0;
  for (int k : kOrphans) {
    const auto n = c[static_cast<std::size_t>(k)];
    if (n == 0 || n > 2) return false;
    if (n == 2) ++doubled;
  }
  return doubled == 1;
}

// Suit arrangement consistent with every suited tile of an honors-and-knitted
// hand, or nullopt.
std::optional<std::array<int, 3>> honors_knitted_arrangement(const KindCounts& c) {
  if (total(c) != 14) return std::nullopt;
  for (auto n : c)
    if (n > 1) return std::nullopt;
  for (const auto& perm : kKnitPerms) {
    bool ok = true;
    for (int k = 0; k < 27 && ok; ++k) {
      if (!c[static_cast<std::size_t>(k)]) continue;
      const TileKind kind(k);
      ok = perm[static_cast<std::size_t>((kind.rank() - 1) % 3)] == kind.suit();
    }
    if (ok) return perm;
  }
  return std::nullopt;
}

bool has_knitted_straight(const KindCounts& c, const std::array<int, 3>& knit) {
  for (int g = 0; g < 3; ++g)
    for (int s = 0; s < 3; ++s)
      if (!c[idx(knitted_kind(knit, g, s))]) return false;
  return true;
}

bool wins_knitted_straight_form(KindCounts c, int meld_count) {
  if (meld_count > 1) return false;
  for (const auto& perm : kKnitPerms) {
    if (!has_knitted_straight(c, perm)) continue;
    KindCounts rest = c;
    for (int g = 0; g < 3; ++g)
      for (int s = 0; s < 3; ++s) --rest[idx(knitted_kind(perm, g, s))];
    if (is_standard_shape(rest, 1 - meld_count)) return true;
  }
  return false;
}

TileSet meld_to_set(const Meld& m) {
  TileSet s;
  s.base = m.base();
  s.from_meld = true;
  s.concealed = m.type == MeldType::ConcealedKong;
  s.type = m.type == MeldType::Chow ? SetType::Chow : (m.type == MeldType::Pung ? SetType::Pung : SetType::Kong);
  return s;
}

// Emits one decomposition per distinct slot the winning tile can occupy.
void add_placements(std::vector<TileSet> sets, TileKind pair, TileKind win, std::optional<SpecialForm> form,
                    std::optional<std::array<int, 3>> knit, bool win_in_knit, std::vector<Decomposition>& out) {
  std::sort(sets.begin(), sets.end());
  Decomposition base;
  base.sets = sets;
  base.pairs = {pair};
  base.special_form = form;
  base.knit = knit;
  if (win_in_knit) {
    base.winning_slot = static_cast<int>(WinSlot::Other);
    out.push_back(base);
  }
  if (pair == win) {
    base.winning_slot = static_cast<int>(WinSlot::Pair);
    out.push_back(base);
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].from_meld || !sets[i].contains(win)) continue;
    if (i > 0 && sets[i] == sets[i - 1]) continue;
    base.winning_slot = static_cast<int>(i);
    out.push_back(base);
  }
}

// --- set relations -----------------------------------------------------------

int chow_pair_fan(const TileSet& a, const TileSet& b) {
  const int ra = a.base.rank(), rb = b.base.rank();
  if (a.base.suit() == b.base.suit()) {
    if (ra == rb) return fan::PureDoubleChow;
    if (std::abs(ra - rb) == 3) return fan::ShortStraight;
    if (std::min(ra, rb) == 1 && std::max(ra, rb) == 7) return fan::TwoTerminalChows;
    return 0;
  }
  return ra == rb ? fan::MixedDoubleChow : 0;
}

int chow_triple_fan(TileSet a, TileSet b, TileSet c) {
  std::array<TileSet, 3> s{a, b, c};
  std::sort(s.begin(), s.end(), [](const TileSet& x, const TileSet& y) { return x.base.rank() < y.base.rank(); });
  const int r0 = s[0].base.rank(), r1 = s[1].base.rank(), r2 = s[2].base.rank();
  const int s0 = s[0].base.suit(), s1 = s[1].base.suit(), s2 = s[2].base.suit();
  if (s0 == s1 && s1 == s2) {
    if (r0 == r1 && r1 == r2) return fan::PureTripleChow;
    if (r0 == 1 && r1 == 4 && r2 == 7) return fan::PureStraight;
    if (r1 - r0 == r2 - r1 && (r1 - r0 == 1 || r1 - r0 == 2)) return fan::PureShiftedChows;
    return 0;
  }
  if (s0 != s1 && s1 != s2 && s0 != s2) {
    if (r0 == r1 && r1 == r2) return fan::MixedTripleChow;
    if (r0 == 1 && r1 == 4 && r2 == 7) return fan::MixedStraight;
    if (r1 - r0 == 1 && r2 - r1 == 1) return fan::MixedShiftedChows;
  }
  return 0;
}

int chow_quad_fan(std::span<const TileSet> s) {
  std::array<int, 4> r{};
  for (int i = 0; i < 4; ++i) {
    if (s[static_cast<std::size_t>(i)].base.suit() != s[0].base.suit()) return 0;
    r[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i)].base.rank();
  }
  std::sort(r.begin(), r.end());
  if (r[0] == r[3]) return fan::QuadrupleChow;
  const int d = r[1] - r[0];
  if ((d == 1 || d == 2) && r[2] - r[1] == d && r[3] - r[2] == d) return fan::FourPureShiftedChows;
  return 0;
}

int pung_pair_fan(const TileSet& a, const TileSet& b) {
  if (!a.base.is_suited() || !b.base.is_suited()) return 0;
  return a.base.suit() != b.base.suit() && a.base.rank() == b.base.rank() ? fan::MixedDoublePung : 0;
}

int pung_triple_fan(TileSet a, TileSet b, TileSet c) {
  std::array<TileSet, 3> s{a, b, c};
  for (const auto& x : s)
    if (!x.base.is_suited()) return 0;
  std::sort(s.begin(), s.end(), [](const TileSet& x, const TileSet& y) { return x.base.rank() < y.base.rank(); });
  const int r0 = s[0].base.rank(), r1 = s[1].base.rank(), r2 = s[2].base.rank();
  const int s0 = s[0].base.suit(), s1 = s[1].base.suit(), s2 = s[2].base.suit();
  if (s0 == s1 && s1 == s2) return r1 == r0 + 1 && r2 == r1 + 1 ? fan::PureShiftedPungs : 0;
  if (s0 != s1 && s1 != s2 && s0 != s2) {
    if (r0 == r1 && r1 == r2) return fan::TriplePung;
    if (r1 == r0 + 1 && r2 == r1 + 1) return fan::MixedShiftedPungs;
  }
  return 0;
}

int pung_quad_fan(std::span<const TileSet> s) {
  std::array<int, 4> r{};
  for (int i = 0; i < 4; ++i) {
    const auto& x = s[static_cast<std::size_t>(i)];
    if (!x.base.is_suited() || x.base.suit() != s[0].base.suit()) return 0;
    r[static_cast<std::size_t>(i)] = x.base.rank();
  }
  std::sort(r.begin(), r.end());
  return r[1] == r[0] + 1 && r[2] == r[1] + 1 && r[3] == r[2] + 1 ? fan::FourPureShiftedPungs : 0;
}

using PairFn = int (*)(const TileSet&, const TileSet&);
using TripleFn = int (*)(TileSet, TileSet, TileSet);
using QuadFn = int (*)(std::span<const TileSet>);

// Counts every pair and triple showing a relation (structural presence).
void count_relations(std::span<const TileSet> s, PairFn pair_fn, TripleFn triple_fn, QuadFn quad_fn,
                     PatternCounts& f) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (int id = pair_fn(s[i], s[j])) ++f[static_cast<std::size_t>(id)];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (int id = triple_fn(s[i], s[j], s[k])) ++f[static_cast<std::size_t>(id)];
  if (n == 4)
    if (int id = quad_fn(s)) ++f[static_cast<std::size_t>(id)];
}

// Best pair-relation fans under the account-once rule: the chosen pairs must
// form a forest over the sets, so each set joins an existing combination at
// most once.
std::vector<int> best_pair_forest(std::span<const TileSet> s, PairFn pair_fn, const FanTable& table) {
  struct Edge {
    int a, b, id;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < static_cast<int>(s.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(s.size()); ++j)
      if (int id = pair_fn(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)])) edges.push_back({i, j, id});
  std::vector<int> best;
  int best_pts = -1;
  for (unsigned mask = 0; mask < (1u << edges.size()); ++mask) {
    std::array<int, 4> parent{0, 1, 2, 3};
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
      return x;
    };
    bool acyclic = true;
    int pts = 0;
    std::vector<int> ids;
    for (std::size_t e = 0; e < edges.size() && acyclic; ++e) {
      if (!(mask & (1u << e))) continue;
      const int ra = find(edges[e].a), rb = find(edges[e].b);
      if (ra == rb) {
        acyclic = false;
      } else {
        parent[static_cast<std::size_t>(ra)] = rb;
        pts += table.points(edges[e].id);
        ids.push_back(edges[e].id);
      }
    }
    if (acyclic && pts > best_pts) {
      best_pts = pts;
      best = std::move(ids);
    }
  }
  return best;
}

std::vector<int> select_relations(std::span<const TileSet> s, PairFn pair_fn, TripleFn triple_fn, QuadFn quad_fn,
                                  const FanTable& table) {
  auto points_of = [&](const std::vector<int>& ids) {
    int p = 0;
    for (int id : ids) p += table.points(id);
    return p;
  };
  if (s.size() == 4)
    if (int id = quad_fn(s)) return {id};
  std::vector<int> best = best_pair_forest(s, pair_fn, table);
  int best_pts = points_of(best);
  const std::size_t n = s.size();
  if (n >= 3) {
    for (std::size_t skip = 0; skip < (n == 4 ? 4u : 1u); ++skip) {
      std::vector<std::size_t> tri;
      for (std::size_t i = 0; i < n; ++i)
        if (n == 3 || i != skip) tri.push_back(i);
      const int id = triple_fn(s[tri[0]], s[tri[1]], s[tri[2]]);
      if (!id) continue;
      std::vector<int> cand{id};
      if (n == 4) {
        int extra = 0, extra_pts = 0;
        for (std::size_t t : tri)
          if (int e = pair_fn(s[skip], s[t]); e && table.points(e) > extra_pts) {
            extra = e;
            extra_pts = table.points(e);
          }
        if (extra) cand.push_back(extra);
      }
      if (const int p = points_of(cand); p > best_pts) {
        best_pts = p;
        best = std::move(cand);
      }
    }
  }
  return best;
}

constexpr std::array<int, 17> kRelationFans = {
    fan::PureDoubleChow, fan::MixedDoubleChow, fan::ShortStraight,     fan::TwoTerminalChows,
    fan::PureStraight,   fan::PureShiftedChows, fan::PureTripleChow,   fan::MixedStraight,
    fan::MixedTripleChow, fan::MixedShiftedChows, fan::QuadrupleChow,  fan::FourPureShiftedChows,
    fan::MixedDoublePung, fan::TriplePung,     fan::MixedShiftedPungs, fan::PureShiftedPungs,
    fan::FourPureShiftedPungs,
};

template <typename Pred>
bool all_kinds_present(const KindCounts& all, Pred pred) {
  for (int k = 0; k < kNumKinds; ++k)
    if (all[static_cast<std::size_t>(k)] && !pred(TileKind(k))) return false;
  return true;
}

bool in_reversible(TileKind k) {
  if (k.category() == Category::Dots) return k.rank() != 6 && k.rank() != 7;
  if (k.category() == Category::Bamboo) return k.rank() != 1 && k.rank() != 3 && k.rank() != 7;
  return k.category() == Category::Dragons && k.rank() == kWhiteDragon;
}

bool in_all_green(TileKind k) {
  if (k.category() == Category::Bamboo) {
    const int r = k.rank();
    return r == 2 || r == 3 || r == 4 || r == 6 || r == 8;
  }
  return k.category() == Category::Dragons && k.rank() == kGreenDragon;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view win_by_name(WinBy w) {
  switch (w) {
    case WinBy::SelfDraw:
      return "selfdraw";
    case WinBy::Discard:
      return "discard";
    case WinBy::RobKong:
      return "robkong";
    case WinBy::ReplacementTile:
      return "replacement";
  }
  return "?";
}

WinBy parse_win_by(std::string_view s) {
  for (auto w : {WinBy::SelfDraw, WinBy::Discard, WinBy::RobKong, WinBy::ReplacementTile})
    if (win_by_name(w) == s) return w;
  throw ParseError("unknown win-by '" + std::string(s) + "'");
}

std::string_view special_form_name(SpecialForm f) {
  switch (f) {
    case SpecialForm::SevenPairs:
      return "SevenPairs";
    case SpecialForm::ThirteenOrphans:
      return "ThirteenOrphans";
    case SpecialForm::KnittedStraightForm:
      return "KnittedStraightForm";
    case SpecialForm::HonorsAndKnitted:
      return "HonorsAndKnitted";
  }
  return "?";
}

std::array<TileKind, 3> TileSet::kinds() const {
  if (type == SetType::Chow) return {base, TileKind(base.index() + 1), TileKind(base.index() + 2)};
  return {base, base, base};
}

bool TileSet::contains(TileKind k) const {
  if (type == SetType::Chow) return k.index() >= base.index() && k.index() <= base.index() + 2 && k.suit() == base.suit();
  return k == base;
}

bool FanResult::has(int pattern_id) const { return multiplicity(pattern_id) > 0; }

int FanResult::multiplicity(int pattern_id) const {
  for (const auto& f : fans)
    if (f.pattern_id == pattern_id) return f.multiplicity;
  return 0;
}

bool is_standard_shape(KindCounts counts, int sets_needed) {
  if (total(counts) != 3 * sets_needed + 2) return false;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (counts[p] < 2) continue;
    counts[p] -= 2;
    const bool ok = can_form_sets(counts, sets_needed);
    counts[p] += 2;
    if (ok) return true;
  }
  return false;
}

bool is_winning_shape(const KindCounts& counts, int meld_count, const ScoringOptions& opts) {
  if (is_standard_shape(counts, 4 - meld_count)) return true;
  if (meld_count == 0) {
    if (is_seven_pairs(counts, opts) || is_thirteen_orphans(counts) || honors_knitted_arrangement(counts))
      return true;
  }
  return wins_knitted_straight_form(counts, meld_count);
}

std::vector<Decomposition> decompose(const Hand& hand, Tile winning_tile, const ScoringOptions& opts) {
  if (hand.equivalent_size() != 13)
    throw ShapeError("hand must hold 13 tiles (kongs counted as 3) before the winning tile, found " +
                     std::to_string(hand.equivalent_size()));
  const TileKind win = winning_tile.kind;
  if (win.is_flower()) throw ShapeError("a flower cannot be a winning tile");
  KindCounts counts = hand.concealed_counts();
  ++counts[idx(win)];
  for (auto n : counts)
    if (n > 4) throw ShapeError("more than four copies of one kind");

  std::vector<TileSet> meld_sets;
  for (const auto& m : hand.melds) meld_sets.push_back(meld_to_set(m));
  const int need = 4 - static_cast<int>(hand.melds.size());

  std::vector<Decomposition> out;
  for (int p = 0; p < kNumKinds; ++p) {
    if (counts[static_cast<std::size_t>(p)] < 2) continue;
    counts[static_cast<std::size_t>(p)] -= 2;
    std::vector<std::vector<TileSet>> partitions;
    std::vector<TileSet> cur;
    enumerate_sets(counts, need, cur, partitions);
    counts[static_cast<std::size_t>(p)] += 2;
    for (auto& part : partitions) {
      part.insert(part.end(), meld_sets.begin(), meld_sets.end());
      add_placements(std::move(part), TileKind(p), win, std::nullopt, std::nullopt, false, out);
    }
  }

  if (hand.melds.empty()) {
    if (is_seven_pairs(counts, opts)) {
      Decomposition d;
      d.special_form = SpecialForm::SevenPairs;
      for (int k = 0; k < kNumKinds; ++k)
        for (int n = 0; n < counts[static_cast<std::size_t>(k)] / 2; ++n) d.pairs.emplace_back(k);
      d.winning_slot = static_cast<int>(WinSlot::Pair);
      out.push_back(std::move(d));
    }
    if (is_thirteen_orphans(counts)) {
      Decomposition d;
      d.special_form = SpecialForm::ThirteenOrphans;
      for (int k : kOrphans) {
        d.singles.emplace_back(k);
        if (counts[static_cast<std::size_t>(k)] == 2) d.pairs.emplace_back(k);
      }
      out.push_back(std::move(d));
    }
    if (auto knit = honors_knitted_arrangement(counts)) {
      Decomposition d;
      d.special_form = SpecialForm::HonorsAndKnitted;
      d.knit = knit;
      for (int k = 0; k < kNumKinds; ++k)
        if (counts[static_cast<std::size_t>(k)]) d.singles.emplace_back(k);
      out.push_back(std::move(d));
    }
  }

  if (hand.melds.size() <= 1) {
    for (const auto& perm : kKnitPerms) {
      if (!has_knitted_straight(counts, perm)) continue;
      KindCounts rest = counts;
      bool win_in_knit = false;
      for (int g = 0; g < 3; ++g)
        for (int s = 0; s < 3; ++s) {
          const TileKind k = knitted_kind(perm, g, s);
          --rest[idx(k)];
          if (k == win) win_in_knit = true;
        }
      for (int p = 0; p < kNumKinds; ++p) {
        if (rest[static_cast<std::size_t>(p)] < 2) continue;
        rest[static_cast<std::size_t>(p)] -= 2;
        std::vector<std::vector<TileSet>> partitions;
        std::vector<TileSet> cur;
        enumerate_sets(rest, need - 3, cur, partitions);
        rest[static_cast<std::size_t>(p)] += 2;
        for (auto& part : partitions) {
          part.insert(part.end(), meld_sets.begin(), meld_sets.end());
          add_placements(std::move(part), TileKind(p), win, SpecialForm::KnittedStraightForm, perm, win_in_knit, out);
        }
      }
    }
  }
  return out;
}

std::vector<TileKind> winning_kinds(const Hand& hand, const ScoringOptions& opts) {
  std::vector<TileKind> out;
  KindCounts counts = hand.concealed_counts();
  KindCounts held = counts;
  for (const auto& m : hand.melds)
    for (const auto& t : m.tiles) ++held[idx(t.kind)];
  const int melds = static_cast<int>(hand.melds.size());
  for (int k = 0; k < kNumKinds; ++k) {
    auto& n = counts[static_cast<std::size_t>(k)];
    if (held[static_cast<std::size_t>(k)] >= 4) continue;
    ++n;
    if (is_winning_shape(counts, melds, opts)) out.emplace_back(k);
    --n;
  }
  return out;
}

PatternCounts detect_patterns(const Decomposition& d, const Hand& hand, const WinContext& ctx, bool wait_unique) {
  PatternCounts f{};
  auto set = [&](int id, int n = 1) { f[static_cast<std::size_t>(id)] += n; };
  const TileKind win = ctx.winning_tile.kind;

  KindCounts all = hand.concealed_counts();
  ++all[idx(win)];
  KindCounts kong_kinds{};
  for (const auto& m : hand.melds)
    for (const auto& t : m.tiles) {
      ++all[idx(t.kind)];
      if (m.is_kong()) kong_kinds[idx(t.kind)] = 1;
    }

  // Tile-composition patterns apply to every form.
  std::array<bool, 3> suits{};
  bool winds = false, dragons = false, terminals = false, simples = false;
  for (int k = 0; k < kNumKinds; ++k) {
    if (!all[static_cast<std::size_t>(k)]) continue;
    const TileKind kind(k);
    if (kind.is_suited()) {
      suits[static_cast<std::size_t>(kind.suit())] = true;
      (kind.is_terminal() ? terminals : simples) = true;
    } else if (kind.category() == Category::Winds) {
      winds = true;
    } else {
      dragons = true;
    }
  }
  const int suit_count = suits[0] + suits[1] + suits[2];
  const bool honors = winds || dragons;

  if (all_kinds_present(all, in_all_green)) set(fan::AllGreen);
  if (all_kinds_present(all, in_reversible)) set(fan::ReversibleTiles);
  if (!suit_count) set(fan::AllHonours);
  if (!honors && !simples) set(fan::AllTerminals);
  if (!simples) set(fan::AllTerminalsAndHonours);
  if (!honors) {
    set(fan::NoHonours);
    auto ranks_within = [&](int lo, int hi) {
      return all_kinds_present(all, [&](TileKind k) { return k.rank() >= lo && k.rank() <= hi; });
    };
    if (ranks_within(7, 9)) set(fan::UpperTiles);
    if (ranks_within(4, 6)) set(fan::MiddleTiles);
    if (ranks_within(1, 3)) set(fan::LowerTiles);
    if (ranks_within(6, 9)) set(fan::UpperFour);
    if (ranks_within(1, 4)) set(fan::LowerFour);
  }
  if (!honors && !terminals) set(fan::AllSimples);
  if (suit_count == 1 && !honors) set(fan::FullFlush);
  if (suit_count == 1 && honors) set(fan::HalfFlush);
  if (suit_count == 2) set(fan::OneVoidedSuit);
  if (suit_count == 3 && winds && dragons) set(fan::AllTypes);
  for (int k = 0; k < kNumKinds; ++k)
    if (all[static_cast<std::size_t>(k)] == 4 && !kong_kinds[static_cast<std::size_t>(k)]) set(fan::TileHog);

  // Concealment and luck.
  const bool claimed_melds =
      std::any_of(hand.melds.begin(), hand.melds.end(), [](const Meld& m) { return m.type != MeldType::ConcealedKong; });
  const bool by_discard = ctx.win_by == WinBy::Discard || ctx.win_by == WinBy::RobKong;
  if (!claimed_melds) set(by_discard ? fan::ConcealedHand : fan::FullyConcealedHand);
  if (ctx.self_drawn()) set(fan::SelfDraw);
  if (ctx.last_wall_tile) set(ctx.self_drawn() ? fan::LastTileDraw : fan::LastTileClaim);
  if (ctx.win_by == WinBy::ReplacementTile) set(fan::OutWithReplacementTile);
  if (ctx.win_by == WinBy::RobKong) set(fan::RobKong);
  if (ctx.visible_counts[idx(win)] >= 3) set(fan::LastTile);

  if (d.special_form == SpecialForm::SevenPairs) {
    set(fan::SevenPairs);
    if (suit_count == 1 && !honors) {
      bool shifted = true;
      for (std::size_t i = 1; i < d.pairs.size(); ++i)
        shifted = shifted && d.pairs[i].index() == d.pairs[i - 1].index() + 1;
      if (shifted) set(fan::SevenShiftedPairs);
    }
    return f;
  }
  if (d.special_form == SpecialForm::ThirteenOrphans) {
    set(fan::ThirteenOrphans);
    return f;
  }
  if (d.special_form == SpecialForm::HonorsAndKnitted) {
    int honor_kinds = 0, knitted = 0;
    for (TileKind k : d.singles) (k.is_honor() ? honor_kinds : knitted) += 1;
    set(honor_kinds == 7 ? fan::GreaterHonoursAndKnittedTiles : fan::LesserHonoursAndKnittedTiles);
    if (knitted == 9) set(fan::KnittedStraight);
    return f;
  }

  // Standard and knitted-straight forms: sets plus one pair.
  const TileKind pair = d.pairs.front();
  std::vector<TileSet> chows, pungs;
  for (const auto& s : d.sets) (s.type == SetType::Chow ? chows : pungs).push_back(s);
  const bool knitted_form = d.special_form == SpecialForm::KnittedStraightForm;
  if (knitted_form) set(fan::KnittedStraight);

  count_relations(chows, chow_pair_fan, chow_triple_fan, chow_quad_fan, f);
  count_relations(pungs, pung_pair_fan, pung_triple_fan, pung_quad_fan, f);

  if (!knitted_form && chows.size() == 4 && pair.is_suited()) {
    std::array<int, 3> lo{}, hi{};
    for (const auto& c : chows) {
      if (c.base.rank() == 1) ++lo[static_cast<std::size_t>(c.base.suit())];
      if (c.base.rank() == 7) ++hi[static_cast<std::size_t>(c.base.suit())];
    }
    const auto ps = static_cast<std::size_t>(pair.suit());
    if (pair.rank() == 5 && lo[ps] == 2 && hi[ps] == 2) set(fan::PureTerminalChows);
    if (pair.rank() == 5 && lo[ps] == 0 && hi[ps] == 0) {
      int suits_with_both = 0;
      for (std::size_t s = 0; s < 3; ++s) suits_with_both += lo[s] == 1 && hi[s] == 1;
      if (suits_with_both == 2) set(fan::ThreeSuitedTerminalChows);
    }
  }
  if ((chows.size() == 4 || (knitted_form && chows.size() == 1)) && pair.is_suited()) set(fan::AllChows);
  if (!knitted_form && pungs.size() == 4) set(fan::AllPungs);

  // Nine Gates: a closed 1112345678999 in one suit waiting on any tile of it.
  if (hand.melds.empty() && suit_count == 1 && !honors) {
    KindCounts pre = hand.concealed_counts();
    const int base = win.suit() * 9;
    static constexpr std::array<int, 9> gates = {3, 1, 1, 1, 1, 1, 1, 1, 3};
    bool gates_ok = true;
    for (int r = 0; r < 9; ++r) gates_ok = gates_ok && pre[static_cast<std::size_t>(base + r)] == gates[static_cast<std::size_t>(r)];
    if (gates_ok) set(fan::NineGates);
  }

  // Pungs, kongs and honours.
  int wind_pungs = 0, dragon_pungs = 0, concealed_pungs = 0, melded_kongs = 0, concealed_kongs = 0;
  for (std::size_t i = 0; i < d.sets.size(); ++i) {
    const auto& s = d.sets[i];
    if (s.type == SetType::Chow) continue;
    if (s.base.category() == Category::Winds) ++wind_pungs;
    if (s.base.category() == Category::Dragons) ++dragon_pungs;
    const bool won_on_claim = by_discard && d.winning_slot == static_cast<int>(i);
    if (s.concealed && !won_on_claim) ++concealed_pungs;
    if (s.type == SetType::Kong) ++(s.concealed ? concealed_kongs : melded_kongs);
  }
  const bool wind_pair = pair.category() == Category::Winds;
  const bool dragon_pair = pair.category() == Category::Dragons;
  if (wind_pungs == 4) set(fan::BigFourWinds);
  if (wind_pungs == 3 && wind_pair) set(fan::LittleFourWinds);
  if (wind_pungs == 3) set(fan::BigThreeWinds);
  const bool wind_family = wind_pungs >= 3;
  if (dragon_pungs == 3) set(fan::BigThreeDragons);
  if (dragon_pungs == 2 && dragon_pair) set(fan::LittleThreeDragons);
  if (dragon_pungs == 2) set(fan::TwoDragonPungs);
  if (dragon_pungs == 1) set(fan::DragonPung);
  for (const auto& s : pungs) {
    if (s.base.is_terminal()) {
      set(fan::PungOfTerminalsOrHonours);
    } else if (s.base.category() == Category::Winds) {
      const int w = s.base.rank();
      if (w == ctx.prevalent_wind) set(fan::PrevalentWind);
      if (w == ctx.seat_wind) set(fan::SeatWind);
      if (w != ctx.prevalent_wind && w != ctx.seat_wind && !wind_family) set(fan::PungOfTerminalsOrHonours);
    }
  }
  if (concealed_pungs == 4) set(fan::FourConcealedPungs);
  if (concealed_pungs == 3) set(fan::ThreeConcealedPungs);
  if (concealed_pungs == 2) set(fan::TwoConcealedPungs);
  const int kongs = melded_kongs + concealed_kongs;
  if (kongs == 4) set(fan::FourKongs);
  if (kongs == 3) set(fan::ThreeKongs);
  if (kongs == 2) {
    if (melded_kongs == 2) set(fan::TwoMeldedKongs);
    if (concealed_kongs == 2) set(fan::TwoConcealedKongs);
    if (melded_kongs == 1) set(fan::MeldedAndConcealedKongs);
  }
  if (kongs == 1) set(melded_kongs ? fan::MeldedKong : fan::ConcealedKong);

  if (!knitted_form) {
    auto every_group = [&](auto pred) {
      if (!pred(pair, pair)) return false;
      return std::all_of(d.sets.begin(), d.sets.end(), [&](const TileSet& s) {
        const auto k = s.kinds();
        return pred(k[0], k[2]);
      });
    };
    if (every_group([](TileKind lo, TileKind hi) { return lo.is_terminal_or_honor() || hi.is_terminal_or_honor(); }))
      set(fan::OutsideHand);
    if (every_group([](TileKind lo, TileKind hi) {
          return lo.is_suited() && lo.rank() <= 5 && hi.rank() >= 5 && lo.suit() == hi.suit();
        }))
      set(fan::AllFives);
    if (pungs.size() == 4 && every_group([](TileKind lo, TileKind) { return lo.is_suited() && lo.rank() % 2 == 0; }))
      set(fan::AllEvenPungs);
  }

  const bool all_melded = hand.melds.size() == 4 && !std::any_of(hand.melds.begin(), hand.melds.end(), [](const Meld& m) {
    return m.type == MeldType::ConcealedKong;
  });
  if (all_melded && by_discard) set(fan::MeldedHand);

  // Waits count only when the hand had a single winning kind.
  if (wait_unique) {
    if (d.winning_slot == static_cast<int>(WinSlot::Pair)) {
      set(fan::SingleWait);
    } else if (d.winning_slot >= 0) {
      const auto& s = d.sets[static_cast<std::size_t>(d.winning_slot)];
      if (s.type == SetType::Chow) {
        const int offset = win.index() - s.base.index();
        if (offset == 1) set(fan::ClosedWait);
        if ((offset == 2 && s.base.rank() == 1) || (offset == 0 && s.base.rank() == 7)) set(fan::EdgeWait);
      }
    }
  }
  return f;
}

FanResult enumerate_fans(const Decomposition& d, const Hand& hand, const WinContext& ctx, const FanTable& table,
                         bool wait_unique) {
  PatternCounts counts = detect_patterns(d, hand, ctx, wait_unique);
  if (!d.special_form || d.special_form == SpecialForm::KnittedStraightForm) {
    for (int id : kRelationFans) counts[static_cast<std::size_t>(id)] = 0;
    std::vector<TileSet> chows, pungs;
    for (const auto& s : d.sets) (s.type == SetType::Chow ? chows : pungs).push_back(s);
    for (int id : select_relations(chows, chow_pair_fan, chow_triple_fan, chow_quad_fan, table))
      ++counts[static_cast<std::size_t>(id)];
    for (int id : select_relations(pungs, pung_pair_fan, pung_triple_fan, pung_quad_fan, table))
      ++counts[static_cast<std::size_t>(id)];
  }

  std::array<bool, kNumPatterns + 1> awarded{}, suppressed{};
  FanResult result;
  for (int id = 1; id <= kNumPatterns; ++id) {
    if (!counts[static_cast<std::size_t>(id)] || suppressed[static_cast<std::size_t>(id)]) continue;
    const auto& pattern = table.at(id);
    const bool conflicts = std::any_of(pattern.excludes.begin(), pattern.excludes.end(),
                                       [&](int e) { return awarded[static_cast<std::size_t>(e)]; });
    if (conflicts) continue;
    awarded[static_cast<std::size_t>(id)] = true;
    for (int e : pattern.excludes) suppressed[static_cast<std::size_t>(e)] = true;
  }
  for (int id = 1; id <= kNumPatterns; ++id) {
    if (!awarded[static_cast<std::size_t>(id)]) continue;
    const int n = counts[static_cast<std::size_t>(id)];
    result.fans.push_back(FanEntry{id, n, table.points(id)});
    result.total += n * table.points(id);
  }
  result.win = result.total >= kWinThreshold;
  return result;
}

FanResult best_fan(const Hand& hand, Tile winning_tile, const WinContext& ctx, const FanTable& table,
                   const ScoringOptions& opts) {
  FanResult best;
  if (hand.equivalent_size() != 13) return best;
  const auto decomps = decompose(hand, winning_tile, opts);
  if (decomps.empty()) return best;
  const auto waits = winning_kinds(hand, opts);
  const bool wait_unique = waits.size() == 1;
  bool first = true;
  for (const auto& d : decomps) {
    FanResult r = enumerate_fans(d, hand, ctx, table, wait_unique);
    if (first || r.total > best.total) {
      best = std::move(r);
      first = false;
    }
  }
  if (best.total == 0) {
    best.fans = {FanEntry{fan::ChickenHand, 1, table.points(fan::ChickenHand)}};
    best.total = table.points(fan::ChickenHand);
  }
  best.win = best.total >= kWinThreshold;
  return best;
}

std::array<int, 4> settle(int fan_total, WinBy win_by, int winner, std::optional<int> discarder) {
  if (fan_total < kWinThreshold)
    throw ThresholdError("fan total " + std::to_string(fan_total) + " is below the winning threshold");
  if (winner < 0 || winner > 3) throw Error("winner seat out of range");
  std::array<int, 4> scores{};
  const int n = fan_total;
  if (win_by == WinBy::SelfDraw || win_by == WinBy::ReplacementTile) {
    scores.fill(-n - 8);
    scores[static_cast<std::size_t>(winner)] = 3 * n + 24;
    return scores;
  }
  if (!discarder || *discarder == winner || *discarder < 0 || *discarder > 3)
    throw Error("a discard win needs a discarder distinct from the winner");
  scores.fill(-8);
  scores[static_cast<std::size_t>(winner)] = n + 24;
  scores[static_cast<std::size_t>(*discarder)] = -n - 8;
  return scores;
}

HandInput parse_hand_input(std::string_view tiles, std::string_view melds) {
  std::array<int, kNumKindsWithFlowers> seen{};
  auto physical = [&](TileKind k) {
    auto& n = seen[static_cast<std::size_t>(k.index())];
    if (n >= kCopiesPerKind) throw ParseError("more than four copies of " + format_tile(k));
    return Tile{k, static_cast<std::uint8_t>(n++)};
  };
  HandInput in;
  std::string text(melds);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream ss(text);
  std::string token;
  while (ss >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw ParseError("meld '" + token + "' needs a type prefix");
    const std::string type = token.substr(0, colon);
    Meld m;
    if (type == "chow") {
      m.type = MeldType::Chow;
    } else if (type == "pung") {
      m.type = MeldType::Pung;
    } else if (type == "kong") {
      m.type = MeldType::MeldedKong;
    } else if (type == "ckong") {
      m.type = MeldType::ConcealedKong;
    } else if (type == "akong") {
      m.type = MeldType::AddedKong;
    } else {
      throw ParseError("unknown meld type '" + type + "'");
    }
    for (TileKind k : parse_tiles(std::string_view(token).substr(colon + 1))) m.tiles.push_back(physical(k));
    if (m.type != MeldType::ConcealedKong) {
      m.claimed_from = 3;
      m.claimed_tile = m.tiles.front();
    }
    m.validate();
    in.hand.melds.push_back(std::move(m));
  }
  const auto kinds = parse_tiles(tiles);
  if (kinds.empty()) throw ParseError("no concealed tiles given");
  for (TileKind k : kinds) in.hand.concealed.push_back(physical(k));
  in.winning_tile = in.hand.concealed.back();
  in.hand.concealed.pop_back();
  return in;
}

}  // namespace mbl
