#include "mbl/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mbl {

namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

// --- frequencies -----------------------------------------------------------

FrequencyTable::FrequencyTable() : FrequencyTable(false) {}

FrequencyTable::FrequencyTable(bool multiplicity) : count_multiplicity(multiplicity) {
  for (int id = 1; id <= kNumPatterns; ++id) known.set(at(id));
}

void FrequencyTable::add(const MatchRecord& r) {
  ++matches;
  if (!r.result.winner) return;
  ++wins;
  for (const auto& f : r.result.fans.fans) {
    if (f.pattern_id < 1 || f.pattern_id > kNumPatterns)
      throw DataError("record " + r.match_id + ": unknown pattern id " + std::to_string(f.pattern_id));
    counts[at(f.pattern_id)] += count_multiplicity ? f.multiplicity : 1;
  }
}

FrequencyTable& FrequencyTable::operator+=(const FrequencyTable& o) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  known &= o.known;
  matches += o.matches;
  wins += o.wins;
  return *this;
}

FrequencyTable count_frequencies(std::span<const MatchRecord> records, bool count_multiplicity) {
  FrequencyTable f(count_multiplicity);
  for (const auto& r : records) f.add(r);
  return f;
}

FrequencyTable count_frequencies(std::istream& jsonl, bool count_multiplicity) {
  FrequencyTable f(count_multiplicity);
  std::string line;
  int line_no = 0;
  while (std::getline(jsonl, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      f.add(record_from_line(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return f;
}

std::vector<int> top_k(const FrequencyTable& f, int k) {
  if (k < 0 || k > kNumPatterns) throw std::invalid_argument("top_k needs 0 <= k <= 81");
  std::vector<int> ids(kNumPatterns);
  std::iota(ids.begin(), ids.end(), 1);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return f.counts[at(a)] > f.counts[at(b)]; });
  ids.resize(at(k));
  return ids;
}

std::string frequency_csv(const FrequencyTable& f, const FanTable& table) {
  const auto order = top_k(f, kNumPatterns);
  std::vector<int> rank(kNumPatterns + 1);
  for (std::size_t i = 0; i < order.size(); ++i) rank[at(order[i])] = static_cast<int>(i) + 1;
  std::ostringstream out;
  out << "pattern_id,name,count,rank\n";
  for (int id = 1; id <= kNumPatterns; ++id)
    out << id << ',' << table.at(id).name << ',' << f.counts[at(id)] << ',' << rank[at(id)] << '\n';
  return out.str();
}

FrequencyTable parse_frequency_csv(std::istream& in) {
  FrequencyTable f;
  f.known.reset();
  std::string line;
  int line_no = 0;
  bool with_rank = true;  // the rank column may be left out if the header says so
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("pattern_id", 0) == 0) {
      with_rank = line.find(",rank") != std::string::npos;
      continue;
    }
    const auto first = line.find(',');
    auto end = line.size();
    if (with_rank) end = line.rfind(',');
    const auto start = end == std::string::npos || end == 0 ? std::string::npos : line.rfind(',', end - 1);
    if (first == std::string::npos || start == std::string::npos || start < first)
      throw DataError("frequency csv line " + std::to_string(line_no) + ": expected pattern_id,name,count" +
                      (with_rank ? ",rank" : ""));
    try {
      const int id = std::stoi(line.substr(0, first));
      const long long count = std::stoll(line.substr(start + 1, end - start - 1));
      if (id < 1 || id > kNumPatterns) throw std::out_of_range("id");
      if (count < 0) throw std::out_of_range("count");
      f.counts[at(id)] = count;
      f.known.set(at(id));
    } catch (const std::logic_error&) {
      throw DataError("frequency csv line " + std::to_string(line_no) + ": bad id or count");
    }
  }
  return f;
}

// --- point adaptation ------------------------------------------------------

AdaptationResult adapt_points(const FrequencyTable& f, const FanTable& table, const AdaptOptions& opts) {
  for (const auto& p : table.patterns())
    if (p.kind == FanKind::Structural && !f.known.test(at(p.id)))
      throw DataError("frequency table has no count for " + p.name);
  const int threshold_level = point_level(opts.threshold);
  if (threshold_level < 1 || threshold_level + 1 >= static_cast<int>(kPointLevels.size()))
    throw std::invalid_argument("threshold must be an inner point level");

  AdaptationResult r;
  for (const auto& p : table.patterns()) r.n += p.points <= opts.threshold;
  r.top = top_k(f, r.n);
  std::vector<bool> member(kNumPatterns + 1);
  for (int id : r.top) member[at(id)] = true;

  for (const auto& p : table.patterns()) {
    int np = p.points;
    if (member[at(p.id)] && p.points > opts.threshold) {
      np = kPointLevels[at(point_level(p.points) - 1)];
    } else if (!member[at(p.id)] && p.points == opts.threshold && !opts.exempt.count(p.id)) {
      np = kPointLevels[at(threshold_level + 1)];
    }
    r.new_points[p.id] = np;
    if (np != p.points) r.changed.push_back({p.id, p.points, np});
  }
  return r;
}

std::string adaptation_report(const AdaptationResult& r, const FanTable& table) {
  std::ostringstream out;
  out << "pattern,previous points,new points\n";
  for (const auto& c : r.changed) out << table.at(c[0]).name << ',' << c[1] << ',' << c[2] << '\n';
  return out.str();
}

// --- compensation ------------------------------------------------------------

std::array<double, 4> CompensationVector::values() const {
  std::array<double, 4> out{};
  // Snap to the nearest double of the decimal value: 3 units of 0.1 is 0.3.
  for (std::size_t s = 0; s < 4; ++s) out[s] = std::round(static_cast<double>(units[s]) * resolution * 1e10) / 1e10;
  return out;
}

CompensationVector derive_compensation(const std::array<double, 4>& averages, double resolution) {
  if (!(resolution > 0)) throw std::invalid_argument("resolution must be positive");
  CompensationVector v;
  v.resolution = resolution;
  std::array<double, 4> target{};
  std::int64_t sum = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    if (!std::isfinite(averages[s])) throw std::invalid_argument("averages must be finite");
    // Snapping first lets 0.25/0.1 = 2.4999999999999996 round half away from zero.
    target[s] = -averages[s] / resolution;
    v.units[s] = std::llround(std::round(target[s] * 1e9) / 1e9);
    sum += v.units[s];
  }
  // Largest remainder: move the entries whose rounding strayed furthest in
  // the direction of the residue, lower seat first on ties.
  while (sum != 0) {
    const int dir = sum > 0 ? -1 : 1;
    std::size_t pick = 0;
    double best = -1e300;
    for (std::size_t s = 0; s < 4; ++s) {
      const double stray = (static_cast<double>(v.units[s]) - target[s]) * -dir;
      if (stray > best + 1e-12) {
        best = stray;
        pick = s;
      }
    }
    v.units[pick] += dir;
    sum += dir;
  }
  return v;
}

CompensationVector derive_compensation(const SeatStats& stats, double resolution) {
  if (stats.total < 1) throw std::invalid_argument("compensation needs at least one match");
  return derive_compensation(
      std::array<double, 4>{stats.avg_score(0), stats.avg_score(1), stats.avg_score(2), stats.avg_score(3)}, resolution);
}

// --- enumeration -------------------------------------------------------------

namespace {

constexpr std::array<std::uint64_t, 5> kChoose4 = {1, 4, 6, 4, 1};

// Set types: pungs 0-33 by kind, then chows 34 + suit*7 + (rank-1).
struct SetShape {
  std::array<int, 3> kinds;
};

const std::array<SetShape, 55>& set_shapes() {
  static const auto shapes = [] {
    std::array<SetShape, 55> s{};
    for (int k = 0; k < 34; ++k) s[at(k)] = {{k, k, k}};
    for (int suit = 0; suit < 3; ++suit)
      for (int r = 0; r < 7; ++r) {
        const int base = suit * 9 + r;
        s[at(34 + suit * 7 + r)] = {{base, base + 1, base + 2}};
      }
    return s;
  }();
  return shapes;
}

using Counts = std::array<std::int8_t, kNumKinds>;

// Fixed-order set search: the lowest remaining kind opens a pung first,
// then a chow. Fills `out` with set type indices in the order found.
bool first_sets(Counts& c, int need, std::vector<int>& out) {
  if (need == 0) return true;
  int k = 0;
  while (k < kNumKinds && c[at(k)] == 0) ++k;
  if (k == kNumKinds) return false;
  if (c[at(k)] >= 3) {
    c[at(k)] -= 3;
    out.push_back(k);
    const bool ok = first_sets(c, need - 1, out);
    c[at(k)] += 3;
    if (ok) return true;
    out.pop_back();
  }
  if (k < 27 && k % 9 <= 6 && c[at(k + 1)] > 0 && c[at(k + 2)] > 0) {
    --c[at(k)], --c[at(k + 1)], --c[at(k + 2)];
    out.push_back(34 + (k / 9) * 7 + k % 9);
    const bool ok = first_sets(c, need - 1, out);
    ++c[at(k)], ++c[at(k + 1)], ++c[at(k + 2)];
    if (ok) return true;
    out.pop_back();
  }
  return false;
}

// The one (pair, sets) a standard hand is generated from.
bool canonical(Counts c, int& pair, std::vector<int>& sets) {
  for (int p = 0; p < kNumKinds; ++p) {
    if (c[at(p)] < 2) continue;
    c[at(p)] -= 2;
    sets.clear();
    const bool ok = first_sets(c, 4, sets);
    c[at(p)] += 2;
    if (ok) {
      pair = p;
      std::sort(sets.begin(), sets.end());
      return true;
    }
  }
  return false;
}

KindCounts to_kind_counts(const Counts& c) {
  KindCounts k{};
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<std::uint8_t>(c[i]);
  return k;
}

std::uint64_t weight_of(const Counts& c) {
  std::uint64_t w = 1;
  for (auto n : c) w *= kChoose4[at(n)];
  return w;
}

std::array<bool, kNumKinds> allowed_kinds(const EnumerationFlags& flags) {
  std::array<bool, kNumKinds> ok{};
  if (flags.kinds.empty()) {
    ok.fill(true);
  } else {
    for (TileKind k : flags.kinds) {
      if (k.is_flower()) throw std::invalid_argument("enumeration is over the 34 flowerless kinds");
      ok[at(k.index())] = true;
    }
  }
  if (!flags.honors)
    for (int k = 27; k < kNumKinds; ++k) ok[at(k)] = false;
  return ok;
}

constexpr std::array<std::array<int, 3>, 6> kSuitOrders = {
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

// Kinds of the knitted straight whose rank group g (1-4-7, 2-5-8, 3-6-9) sits in suit order[g].
std::array<int, 9> knit_kinds(const std::array<int, 3>& order) {
  std::array<int, 9> out{};
  for (int g = 0; g < 3; ++g)
    for (int j = 0; j < 3; ++j) out[at(g * 3 + j)] = order[at(g)] * 9 + g + 3 * j;
  return out;
}

}  // namespace

int magnitude_of(const BigCount& n) {
  if (n <= 0) return -1;
  return static_cast<int>(n.str().size()) - 1;
}

EnumerationStats for_each_winning_hand(const EnumerationFlags& flags,
                                       const std::function<void(const KindCounts&, std::uint64_t)>& visit) {
  const auto ok = allowed_kinds(flags);
  const auto& shapes = set_shapes();
  std::vector<int> types;
  for (int t = 0; t < 55; ++t) {
    const auto& k = shapes[at(t)].kinds;
    if (ok[at(k[0])] && ok[at(k[1])] && ok[at(k[2])]) types.push_back(t);
  }

  EnumerationStats stats;
  unsigned __int128 weighted = 0;
  auto emit = [&](const Counts& c) {
    const std::uint64_t w = weight_of(c);
    ++stats.distinct_hands;
    weighted += w;
    visit(to_kind_counts(c), w);
  };

  // Standard shapes, each accepted only from its canonical decomposition.
  Counts c{};
  std::vector<int> chosen, canon;
  std::function<void(std::size_t, int)> pick = [&](std::size_t from, int pair) {
    if (chosen.size() == 4) {
      int cp = -1;
      if (canonical(c, cp, canon) && cp == pair && canon == chosen) emit(c);
      return;
    }
    for (std::size_t i = from; i < types.size(); ++i) {
      const auto& k = shapes[at(types[i])].kinds;
      ++c[at(k[0])], ++c[at(k[1])], ++c[at(k[2])];
      if (c[at(k[0])] <= 4 && c[at(k[1])] <= 4 && c[at(k[2])] <= 4) {
        chosen.push_back(types[i]);
        pick(i, pair);
        chosen.pop_back();
      }
      --c[at(k[0])], --c[at(k[1])], --c[at(k[2])];
    }
  };
  for (int p = 0; p < kNumKinds; ++p) {
    if (!ok[at(p)]) continue;
    c[at(p)] += 2;
    pick(0, p);
    c[at(p)] -= 2;
  }

  auto standard = [](const Counts& x) { return is_standard_shape(to_kind_counts(x), 4); };

  // Seven pairs that are not also standard.
  std::vector<int> kinds;
  for (int k = 0; k < kNumKinds; ++k)
    if (ok[at(k)]) kinds.push_back(k);
  std::function<void(std::size_t, int)> pairs = [&](std::size_t from, int left) {
    if (left == 0) {
      if (!standard(c)) emit(c);
      return;
    }
    for (std::size_t i = from; i < kinds.size(); ++i) {
      const int k = kinds[i];
      if (c[at(k)] + 2 > (flags.strict_seven_pairs ? 2 : 4)) continue;
      c[at(k)] += 2;
      pairs(flags.strict_seven_pairs ? i + 1 : i, left - 1);
      c[at(k)] -= 2;
    }
  };
  c = {};
  pairs(0, 7);

  // Thirteen orphans.
  static constexpr std::array<int, 13> orphans = {0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33};
  if (std::all_of(orphans.begin(), orphans.end(), [&](int k) { return ok[at(k)]; })) {
    for (int dup : orphans) {
      c = {};
      for (int k : orphans) c[at(k)] = 1;
      c[at(dup)] = 2;
      emit(c);
    }
  }

  // Knitted straight with one set and a pair, then honours and knitted
  // tiles. Neither can also be standard or seven pairs, but both are kept
  // honest with an explicit check.
  std::set<Counts> seen;
  for (const auto& order : kSuitOrders) {
    const auto knit = knit_kinds(order);
    if (std::all_of(knit.begin(), knit.end(), [&](int k) { return ok[at(k)]; })) {
      for (int t : types) {
        for (int p = 0; p < kNumKinds; ++p) {
          if (!ok[at(p)]) continue;
          c = {};
          for (int k : knit) ++c[at(k)];
          for (int k : shapes[at(t)].kinds) ++c[at(k)];
          c[at(p)] += 2;
          if (std::any_of(c.begin(), c.end(), [](std::int8_t n) { return n > 4; })) continue;
          if (standard(c) || !seen.insert(c).second) continue;
          emit(c);
        }
      }
    }
    std::vector<int> pool;
    for (int k : knit)
      if (ok[at(k)]) pool.push_back(k);
    for (int k = 27; k < kNumKinds; ++k)
      if (ok[at(k)]) pool.push_back(k);
    if (pool.size() < 14) continue;
    // Leave out pool.size() - 14 kinds (at most two).
    const std::size_t drop = pool.size() - 14;
    auto emit_without = [&](std::size_t a, std::size_t b) {
      c = {};
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (i != a && i != b) c[at(pool[i])] = 1;
      if (!seen.insert(c).second) return;
      emit(c);
    };
    const std::size_t none = pool.size();
    if (drop == 0) emit_without(none, none);
    if (drop == 1)
      for (std::size_t a = 0; a < pool.size(); ++a) emit_without(a, none);
    if (drop == 2)
      for (std::size_t a = 0; a < pool.size(); ++a)
        for (std::size_t b = a + 1; b < pool.size(); ++b) emit_without(a, b);
  }

  stats.weighted_hands = BigCount(static_cast<std::uint64_t>(weighted >> 64));
  stats.weighted_hands <<= 64;
  stats.weighted_hands += static_cast<std::uint64_t>(weighted);
  return stats;
}

bool enumerable_pattern(int id) {
  if (id < 1 || id > kNumPatterns) return false;
  if (FanTable::standard().at(id).kind == FanKind::LuckContext) return false;
  switch (id) {
    case fan::ChickenHand:
    case fan::ConcealedHand:
    case fan::FullyConcealedHand:
    case fan::MeldedHand:
    case fan::EdgeWait:
    case fan::ClosedWait:
    case fan::SingleWait:
      return false;
    default:
      return true;
  }
}

std::bitset<kNumPatterns + 1> hand_patterns(const KindCounts& counts, const ScoringOptions& opts) {
  std::bitset<kNumPatterns + 1> out;
  Hand full;
  std::array<bool, 3> suits{};
  bool honors = false;
  for (int k = 0; k < kNumKinds; ++k)
    for (int n = 0; n < counts[at(k)]; ++n) {
      full.concealed.push_back(Tile{TileKind(k), static_cast<std::uint8_t>(n)});
      if (k < 27)
        suits[at(k / 9)] = true;
      else
        honors = true;
    }
  if (full.concealed.size() != 14) throw ShapeError("hand_patterns needs 14 tiles");
  // Only Nine Gates depends on which tile completes a concealed self-drawn
  // hand, and only a one-suit hand can be Nine Gates.
  const bool try_every_tile = !honors && suits[0] + suits[1] + suits[2] == 1;
  for (std::size_t i = 0; i < full.concealed.size(); ++i) {
    if (i + 1 < full.concealed.size() && full.concealed[i + 1].kind == full.concealed[i].kind) continue;
    Hand h = full;
    const Tile win = h.concealed[i];
    h.concealed.erase(h.concealed.begin() + static_cast<std::ptrdiff_t>(i));
    WinContext ctx;
    ctx.win_by = WinBy::SelfDraw;
    ctx.winning_tile = win;
    for (const auto& d : decompose(h, win, opts)) {
      const auto f = detect_patterns(d, h, ctx, false);
      for (int id = 1; id <= kNumPatterns; ++id)
        if (f[at(id)]) out.set(at(id));
    }
    if (!try_every_tile) break;
  }
  return out;
}

std::vector<PatternCount> enumerate_pattern_counts(const std::vector<int>& patterns, const EnumerationFlags& flags,
                                                   EnumerationStats* stats) {
  for (int id : patterns)
    if (!enumerable_pattern(id))
      throw UnsupportedPattern("pattern " + std::to_string(id) +
                               (id >= 1 && id <= kNumPatterns ? " (" + FanTable::standard().at(id).name + ")" : "") +
                               " depends on how the hand is won, not on its tiles");
  ScoringOptions opts;
  opts.seven_pairs_distinct = flags.strict_seven_pairs;
  std::vector<unsigned __int128> sums(patterns.size());
  const auto st = for_each_winning_hand(flags, [&](const KindCounts& c, std::uint64_t w) {
    const auto present = hand_patterns(c, opts);
    for (std::size_t i = 0; i < patterns.size(); ++i)
      if (present.test(at(patterns[i]))) sums[i] += w;
  });
  if (stats) *stats = st;
  std::vector<PatternCount> out;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    PatternCount pc;
    pc.pattern_id = patterns[i];
    pc.exact_count = BigCount(static_cast<std::uint64_t>(sums[i] >> 64));
    pc.exact_count <<= 64;
    pc.exact_count += static_cast<std::uint64_t>(sums[i]);
    pc.magnitude = magnitude_of(pc.exact_count);
    out.push_back(std::move(pc));
  }
  return out;
}

std::string enumeration_report(const std::vector<PatternCount>& counts, const FanTable& table) {
  std::ostringstream out;
  out << "pattern,name,exact count,magnitude\n";
  for (const auto& c : counts)
    out << c.pattern_id << ',' << table.at(c.pattern_id).name << ',' << c.exact_count.str() << ',' << c.magnitude
        << '\n';
  return out.str();
}

}  // namespace mbl
