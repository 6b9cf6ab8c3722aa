#include "mbl/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mbl/rng.hpp"

namespace mbl {

namespace {

std::size_t at(int s) { return static_cast<std::size_t>(s); }

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

using Player = std::function<MatchRecord(std::int64_t)>;

// Plays matches 0..n-1 on `workers` threads. Each thread builds its own
// player (and so its own agents); records reach `consume` in index order.
void for_each_match(std::int64_t n, int workers, const std::function<Player()>& make_player,
                    const std::function<void(const MatchRecord&)>& consume) {
  if (n <= 0) return;
  const int w = static_cast<int>(std::clamp<std::int64_t>(workers < 1 ? 1 : workers, 1, n));
  if (w == 1) {
    Player play = make_player();
    for (std::int64_t i = 0; i < n; ++i) consume(play(i));
    return;
  }
  std::atomic<std::int64_t> next_index{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::map<std::int64_t, MatchRecord> pending;
  std::int64_t next_out = 0;
  std::exception_ptr error;

  auto body = [&] {
    try {
      Player play;
      {
        std::lock_guard lock(mu);
        play = make_player();
      }
      for (;;) {
        const std::int64_t i = next_index.fetch_add(1);
        if (i >= n || failed) break;
        MatchRecord rec = play(i);
        std::lock_guard lock(mu);
        pending.emplace(i, std::move(rec));
        while (!pending.empty() && pending.begin()->first == next_out) {
          consume(pending.begin()->second);
          pending.erase(pending.begin());
          ++next_out;
        }
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < w; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::array<std::unique_ptr<Agent>, 4> build(const std::array<AgentFactory, 4>& f) {
  std::array<std::unique_ptr<Agent>, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = f[i]();
  return out;
}

std::string prefix_or(const SimOptions& opts, const char* fallback) {
  return opts.id_prefix.empty() ? fallback : opts.id_prefix;
}

std::array<std::array<int, 4>, 24> all_seatings() {
  std::array<std::array<int, 4>, 24> out{};
  std::array<int, 4> p{0, 1, 2, 3};
  std::size_t k = 0;
  do {
    out[k++] = p;
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

double ci_halfwidth(double p, std::int64_t n, double z) {
  if (n < 1) throw std::domain_error("ci_halfwidth needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("ci_halfwidth needs 0 <= p <= 1");
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

void SeatStats::add(const MatchRecord& r) {
  ++total;
  for (std::size_t s = 0; s < 4; ++s) {
    ++matches[s];
    score_sum[s] += r.result.scores[s];
  }
  if (r.compensated_scores) {
    compensated = true;
    for (std::size_t s = 0; s < 4; ++s)
      compensated_tenths[s] += std::llround((*r.compensated_scores)[s] * 10.0);
  }
  if (r.result.forfeit_seat)
    ++forfeits;
  else if (r.result.winner)
    ++wins[at(*r.result.winner)];
  else
    ++draws;
}

SeatStats& SeatStats::operator+=(const SeatStats& o) {
  for (std::size_t s = 0; s < 4; ++s) {
    matches[s] += o.matches[s];
    wins[s] += o.wins[s];
    score_sum[s] += o.score_sum[s];
    compensated_tenths[s] += o.compensated_tenths[s];
  }
  total += o.total;
  draws += o.draws;
  forfeits += o.forfeits;
  compensated = compensated || o.compensated;
  return *this;
}

double SeatStats::win_rate(int seat) const {
  const auto n = matches.at(at(seat));
  return n == 0 ? 0.0 : static_cast<double>(wins[at(seat)]) / static_cast<double>(n);
}

double SeatStats::ci(int seat) const {
  const auto n = matches.at(at(seat));
  return n == 0 ? 0.0 : ci_halfwidth(win_rate(seat), n);
}

double SeatStats::avg_score(int seat) const {
  const auto n = matches.at(at(seat));
  return n == 0 ? 0.0 : static_cast<double>(score_sum[at(seat)]) / static_cast<double>(n);
}

double SeatStats::avg_compensated(int seat) const {
  const auto n = matches.at(at(seat));
  return n == 0 ? 0.0 : static_cast<double>(compensated_tenths[at(seat)]) / 10.0 / static_cast<double>(n);
}

double SeatStats::first_mover_gap() const { return win_rate(0) - win_rate(3); }

double SeatStats::first_mover_ci() const { return std::hypot(ci(0), ci(3)); }

nlohmann::json stats_json(const SeatStats& s) {
  auto seats = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json j{{"seat", i},
                     {"matches", s.matches[at(i)]},
                     {"wins", s.wins[at(i)]},
                     {"win_rate", s.win_rate(i)},
                     {"ci_halfwidth", s.ci(i)},
                     {"score_sum", s.score_sum[at(i)]},
                     {"avg_score", s.avg_score(i)}};
    if (s.compensated) j["avg_compensated"] = s.avg_compensated(i);
    seats.push_back(j);
  }
  return {{"matches", s.total},
          {"draws", s.draws},
          {"forfeits", s.forfeits},
          {"seats", seats},
          {"first_mover",
           {{"gap", s.first_mover_gap()}, {"ci_halfwidth", s.first_mover_ci()}, {"reference", kReferenceFirstMoverGap}}}};
}

std::string stats_table(const SeatStats& s) {
  std::ostringstream out;
  out << "seat  matches  wins     win rate           avg score";
  if (s.compensated) out << "  compensated";
  out << '\n';
  for (int i = 0; i < 4; ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-5d %-8lld %-8lld %6.2f%% +/- %5.2f%%  %9.3f", i + 1,
                  static_cast<long long>(s.matches[at(i)]), static_cast<long long>(s.wins[at(i)]),
                  100.0 * s.win_rate(i), 100.0 * s.ci(i), s.avg_score(i));
    out << line;
    if (s.compensated) out << "  " << fixed(s.avg_compensated(i), 3);
    out << '\n';
  }
  out << "draws " << s.draws << ", forfeits " << s.forfeits << ", matches " << s.total << '\n';
  out << "first-mover gap (seat 1 - seat 4): " << fixed(100.0 * s.first_mover_gap(), 2) << " pp +/- "
      << fixed(100.0 * s.first_mover_ci(), 2) << " pp (reference " << fixed(100.0 * kReferenceFirstMoverGap, 2)
      << " pp)\n";
  return out.str();
}

std::string stats_csv(const SeatStats& s) {
  std::ostringstream out;
  out << "seat,metric,value,ci\n";
  for (int i = 0; i < 4; ++i) {
    out << i + 1 << ",win_rate," << fixed(s.win_rate(i), 6) << ',' << fixed(s.ci(i), 6) << '\n';
    out << i + 1 << ",avg_score," << fixed(s.avg_score(i), 6) << ",\n";
    if (s.compensated) out << i + 1 << ",avg_compensated," << fixed(s.avg_compensated(i), 6) << ",\n";
  }
  return out.str();
}

AgentFactory factory_for(const AgentSpec& spec) {
  return [spec] { return make_agent(spec); };
}

SeatStats run_selfplay(const AgentFactory& agent, std::int64_t n, std::uint64_t seed, const SimOptions& opts) {
  if (n < 1) throw std::invalid_argument("self-play needs n >= 1");
  const std::string prefix = prefix_or(opts, "self");
  auto make_player = [&]() -> Player {
    auto agents = std::make_shared<std::array<std::unique_ptr<Agent>, 4>>(build({agent, agent, agent, agent}));
    return [agents, &opts, &prefix, seed](std::int64_t i) {
      const std::uint64_t wall_seed = split_seed(seed, static_cast<std::uint64_t>(i));
      std::array<Agent*, 4> seats{};
      for (std::size_t s = 0; s < 4; ++s) seats[s] = (*agents)[s].get();
      return run_match(build_wall(wall_seed, opts.rules.flowers), seats, opts.rules,
                       prefix + "-" + std::to_string(i), wall_seed);
    };
  };
  SeatStats stats;
  for_each_match(n, opts.workers, make_player, [&](const MatchRecord& r) {
    stats.add(r);
    if (opts.on_record) opts.on_record(r);
  });
  return stats;
}

std::array<double, 4> AgentAverages::average() const {
  std::array<double, 4> out{};
  for (std::size_t a = 0; a < 4; ++a)
    out[a] = matches[a] == 0 ? 0.0 : static_cast<double>(score_sum[a]) / static_cast<double>(matches[a]);
  return out;
}

DuplicateResult run_duplicate(const std::array<AgentFactory, 4>& agents, std::int64_t rounds, std::uint64_t seed,
                              const SimOptions& opts) {
  if (rounds < 1) throw std::invalid_argument("duplicate format needs rounds >= 1");
  DuplicateResult res;
  {
    auto probe = build(agents);
    std::set<std::string> seen;
    for (std::size_t a = 0; a < 4; ++a) {
      res.agents.ids[a] = probe[a]->id();
      seen.insert(res.agents.ids[a]);
    }
    if (seen.size() != 4) throw std::invalid_argument("duplicate format needs four distinct agent ids");
  }
  static const auto seatings = all_seatings();
  const std::string prefix = prefix_or(opts, "dup");
  auto make_player = [&]() -> Player {
    auto pool = std::make_shared<std::array<std::unique_ptr<Agent>, 4>>(build(agents));
    return [pool, &opts, &prefix, seed](std::int64_t i) {
      const std::int64_t round = i / 24;
      const auto& seating = seatings[static_cast<std::size_t>(i % 24)];
      const std::uint64_t wall_seed = split_seed(seed, static_cast<std::uint64_t>(round));
      std::array<Agent*, 4> seats{};
      for (std::size_t s = 0; s < 4; ++s) seats[s] = (*pool)[at(seating[s])].get();
      // Agents see the deal id only, so a seat's decisions do not depend on
      // which seating of the block is being played.
      const std::string deal = prefix + "-" + std::to_string(round);
      MatchRecord r = run_match(build_wall(wall_seed, opts.rules.flowers), seats, opts.rules, deal, wall_seed);
      r.match_id = deal + "-" + std::to_string(i % 24);
      return r;
    };
  };
  for_each_match(rounds * 24, opts.workers, make_player, [&](const MatchRecord& r) {
    res.seats.add(r);
    for (std::size_t s = 0; s < 4; ++s) {
      const auto a = static_cast<std::size_t>(
          std::find(res.agents.ids.begin(), res.agents.ids.end(), r.agents[s]) - res.agents.ids.begin());
      res.agents.score_sum[a] += r.result.scores[s];
      ++res.agents.matches[a];
    }
    if (opts.on_record) opts.on_record(r);
  });
  return res;
}

std::array<double, 4> apply_compensation(const std::array<double, 4>& raw, const std::array<int, 4>& seating,
                                         const std::array<double, 4>& compensation) {
  std::array<double, 4> out = raw;
  for (std::size_t s = 0; s < 4; ++s) out[at(seating[s])] += compensation[s];
  return out;
}

FixedSeatResult run_fixed_seat(const std::array<AgentFactory, 4>& agents, const std::array<int, 4>& seating,
                               std::int64_t rounds, std::uint64_t seed,
                               const std::optional<std::array<double, 4>>& compensation, const SimOptions& opts) {
  if (rounds < 1) throw std::invalid_argument("fixed-seat format needs rounds >= 1");
  {
    auto sorted = seating;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 4>{0, 1, 2, 3}) throw std::invalid_argument("seating must be a permutation of 0..3");
  }
  FixedSeatResult res;
  res.seating = seating;
  const std::string prefix = prefix_or(opts, "fixed");
  auto make_player = [&]() -> Player {
    auto pool = std::make_shared<std::array<std::unique_ptr<Agent>, 4>>(build(agents));
    return [pool, &opts, &prefix, &seating, seed](std::int64_t i) {
      const std::uint64_t wall_seed = split_seed(seed, static_cast<std::uint64_t>(i));
      std::array<Agent*, 4> seats{};
      for (std::size_t s = 0; s < 4; ++s) seats[s] = (*pool)[at(seating[s])].get();
      return run_match(build_wall(wall_seed, opts.rules.flowers), seats, opts.rules,
                       prefix + "-" + std::to_string(i), wall_seed);
    };
  };
  for_each_match(rounds, opts.workers, make_player, [&](const MatchRecord& r) {
    res.seats.add(r);
    for (std::size_t s = 0; s < 4; ++s) {
      const std::size_t a = at(seating[s]);
      res.agents.ids[a] = r.agents[s];
      res.agents.score_sum[a] += r.result.scores[s];
      ++res.agents.matches[a];
    }
    if (opts.on_record) opts.on_record(r);
  });
  if (compensation) res.compensated = apply_compensation(res.agents.average(), seating, *compensation);
  return res;
}

std::array<int, 4> ranking(const std::array<double, 4>& values) {
  std::array<int, 4> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values[at(a)] > values[at(b)]; });
  return idx;
}

nlohmann::json averages_json(const AgentAverages& a, const std::optional<std::array<double, 4>>& compensated) {
  const auto avg = a.average();
  const auto raw_rank = ranking(avg);
  std::optional<std::array<int, 4>> comp_rank;
  if (compensated) comp_rank = ranking(*compensated);
  auto rank_of = [](const std::array<int, 4>& order, int agent) {
    return static_cast<int>(std::find(order.begin(), order.end(), agent) - order.begin()) + 1;
  };
  auto out = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json j{{"agent", a.ids[at(i)]},
                     {"matches", a.matches[at(i)]},
                     {"score_sum", a.score_sum[at(i)]},
                     {"average", avg[at(i)]},
                     {"rank", rank_of(raw_rank, i)}};
    if (compensated) {
      j["compensated_average"] = (*compensated)[at(i)];
      j["compensated_rank"] = rank_of(*comp_rank, i);
    }
    out.push_back(j);
  }
  return out;
}

}  // namespace mbl
