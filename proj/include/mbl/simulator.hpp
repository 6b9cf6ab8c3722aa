#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "mbl/agents.hpp"
#include "mbl/engine.hpp"

namespace mbl {

/// Wald half-width z*sqrt(p(1-p)/n). Throws std::domain_error for n < 1 or p outside [0, 1].
double ci_halfwidth(double p, std::int64_t n, double z = 1.96);

/// Paper's champion-AI seat-1 minus seat-4 win-rate gap; printed as a reference only.
inline constexpr double kReferenceFirstMoverGap = 0.0374;

struct SeatStats {
  std::array<std::int64_t, 4> matches{};
  std::array<std::int64_t, 4> wins{};
  std::array<std::int64_t, 4> score_sum{};
  // Compensated scores are multiples of 0.1; summing tenths keeps the fold exact.
  std::array<std::int64_t, 4> compensated_tenths{};
  std::int64_t total = 0;
  std::int64_t draws = 0;
  std::int64_t forfeits = 0;
  bool compensated = false;

  void add(const MatchRecord& r);
  SeatStats& operator+=(const SeatStats& o);

  double win_rate(int seat) const;
  double ci(int seat) const;
  double avg_score(int seat) const;
  double avg_compensated(int seat) const;
  /// win_rate[0] - win_rate[3] and the half-width of its difference.
  double first_mover_gap() const;
  double first_mover_ci() const;

  friend bool operator==(const SeatStats&, const SeatStats&) = default;
};

nlohmann::json stats_json(const SeatStats& s);
std::string stats_table(const SeatStats& s);
/// seat,metric,value,ci
std::string stats_csv(const SeatStats& s);

using AgentFactory = std::function<std::unique_ptr<Agent>()>;
AgentFactory factory_for(const AgentSpec& spec);

struct SimOptions {
  RuleSet rules;
  int workers = 1;
  /// Receives every record in match order, whatever the worker count.
  std::function<void(const MatchRecord&)> on_record;
  std::string id_prefix;
};

/// n matches of four clones, fresh wall per match from split_seed(seed, i).
SeatStats run_selfplay(const AgentFactory& agent, std::int64_t n, std::uint64_t seed, const SimOptions& opts = {});

struct AgentAverages {
  std::array<std::string, 4> ids;
  std::array<std::int64_t, 4> score_sum{};
  std::array<std::int64_t, 4> matches{};
  std::array<double, 4> average() const;
};

struct DuplicateResult {
  AgentAverages agents;
  SeatStats seats;
};

/// Every round plays one wall under all 24 seatings. Agent ids must be distinct.
DuplicateResult run_duplicate(const std::array<AgentFactory, 4>& agents, std::int64_t rounds, std::uint64_t seed,
                              const SimOptions& opts = {});

struct FixedSeatResult {
  AgentAverages agents;
  /// seating[s] is the agent index sitting at seat s.
  std::array<int, 4> seating{0, 1, 2, 3};
  std::optional<std::array<double, 4>> compensated;
  SeatStats seats;
};

FixedSeatResult run_fixed_seat(const std::array<AgentFactory, 4>& agents, const std::array<int, 4>& seating,
                               std::int64_t rounds, std::uint64_t seed,
                               const std::optional<std::array<double, 4>>& compensation = std::nullopt,
                               const SimOptions& opts = {});

/// Per-agent averages plus the compensation of each agent's seat.
std::array<double, 4> apply_compensation(const std::array<double, 4>& raw, const std::array<int, 4>& seating,
                                         const std::array<double, 4>& compensation);

/// Agent indices ordered by descending value; ties keep the lower index first.
std::array<int, 4> ranking(const std::array<double, 4>& values);

nlohmann::json averages_json(const AgentAverages& a, const std::optional<std::array<double, 4>>& compensated = {});

}  // namespace mbl
