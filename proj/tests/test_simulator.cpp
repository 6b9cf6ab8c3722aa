#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "mbl/simulator.hpp"

using namespace mbl;

namespace {

AgentFactory agent(const std::string& text, const std::string& id = "") {
  AgentSpec spec = parse_agent_spec(text);
  if (!id.empty()) spec.id = id;
  return factory_for(spec);
}

std::array<AgentFactory, 4> clones(const std::string& text) {
  return {agent(text, "a"), agent(text, "b"), agent(text, "c"), agent(text, "d")};
}

}  // namespace

TEST(ConfidenceInterval, ChampionRowsWithinTwoHundredthsOfAPoint) {
  // Win rates with the printed +/-0.11% of every seat row.
  for (double p : {0.2619, 0.2521, 0.2385, 0.2245}) {
    const double hw = ci_halfwidth(p, 557056);
    EXPECT_LT(std::abs(hw - 0.0011), 0.0002) << p;
  }
  EXPECT_NEAR(ci_halfwidth(0.2619, 557056), 0.00115, 0.000005);
}

TEST(ConfidenceInterval, ClosedForm) {
  EXPECT_EQ(ci_halfwidth(0.0, 100), 0.0);
  EXPECT_EQ(ci_halfwidth(1.0, 100), 0.0);
  EXPECT_NEAR(ci_halfwidth(0.5, 10000), 0.0098, 1e-9);
  EXPECT_NEAR(ci_halfwidth(0.5, 10000, 1.0), 0.005, 1e-12);
  EXPECT_THROW(ci_halfwidth(0.5, 0), std::domain_error);
  EXPECT_THROW(ci_halfwidth(1.5, 10), std::domain_error);
}

TEST(SelfPlay, ZeroSumAndSeatMarginals) {
  const SeatStats s = run_selfplay(agent("random:3"), 1000, 11);
  std::int64_t sum = 0, wins = 0;
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(s.matches[static_cast<std::size_t>(i)], 1000);
    sum += s.score_sum[static_cast<std::size_t>(i)];
    wins += s.wins[static_cast<std::size_t>(i)];
  }
  EXPECT_EQ(sum, 0);
  EXPECT_EQ(s.total, 1000);
  EXPECT_EQ(wins + s.draws + s.forfeits, 1000);
  EXPECT_EQ(s.forfeits, 0);
}

TEST(SelfPlay, SameSeedSameStats) {
  EXPECT_EQ(run_selfplay(agent("random:3"), 1000, 5), run_selfplay(agent("random:3"), 1000, 5));
  EXPECT_NE(run_selfplay(agent("random:3"), 200, 5), run_selfplay(agent("random:3"), 200, 6));
}

TEST(SelfPlay, WorkerCountDoesNotChangeAnything) {
  auto run = [](int workers) {
    std::vector<std::string> lines;
    SimOptions o;
    o.workers = workers;
    o.on_record = [&](const MatchRecord& r) { lines.push_back(record_to_line(r)); };
    const SeatStats s = run_selfplay(agent("greedy:2"), 40, 9, o);
    return std::make_pair(s, lines);
  };
  const auto one = run(1);
  const auto three = run(3);
  EXPECT_EQ(one.first, three.first);
  EXPECT_EQ(one.second, three.second);
  ASSERT_EQ(one.second.size(), 40u);
}

TEST(SelfPlay, WallSeedsAreSplitFromTheRunSeed) {
  std::vector<MatchRecord> recs;
  SimOptions o;
  o.on_record = [&](const MatchRecord& r) { recs.push_back(r); };
  run_selfplay(agent("random"), 3, 42, o);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].seed, split_seed(42, i));
    EXPECT_EQ(recs[i].wall, build_wall(split_seed(42, i)).tiles());
  }
}

TEST(SelfPlay, CompensatedRuleSetIsTracked) {
  SimOptions o;
  o.rules = RuleSet::revised();
  const SeatStats s = run_selfplay(agent("random:1"), 300, 4, o);
  ASSERT_TRUE(s.compensated);
  double comp = 0;
  for (int i = 0; i < 4; ++i) comp += s.avg_compensated(i);
  EXPECT_NEAR(comp, 0.0, 1e-9);
  const double expected_first = s.avg_score(0) - 1.0;
  // Per-match rounding to 0.1 is exact for integer scores.
  EXPECT_NEAR(s.avg_compensated(0), expected_first, 1e-9);
}

TEST(Duplicate, OneRoundIsTwentyFourMatches) {
  int n = 0;
  std::map<std::string, int> ids;
  SimOptions o;
  o.on_record = [&](const MatchRecord& r) {
    ++n;
    ++ids[r.match_id];
    EXPECT_EQ(r.wall, build_wall(split_seed(8, 0)).tiles());
  };
  const auto res = run_duplicate({agent("random:1", "p"), agent("random:2", "q"), agent("random:3", "r"),
                                  agent("random:4", "s")},
                                 1, 8, o);
  EXPECT_EQ(n, 24);
  EXPECT_EQ(ids.size(), 24u);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(res.agents.matches[a], 24);
}

TEST(Duplicate, IdenticalAgentsAverageExactlyZero) {
  for (const char* kind : {"random:7", "greedy:7"}) {
    const auto res = run_duplicate(clones(kind), 2, 3);
    for (double avg : res.agents.average()) EXPECT_EQ(avg, 0.0) << kind;
    for (auto sum : res.agents.score_sum) EXPECT_EQ(sum, 0) << kind;
  }
}

TEST(Duplicate, RelabelingAgentsKeepsTheirAverages) {
  std::array<AgentFactory, 4> order{agent("random:1", "r1"), agent("greedy:1", "g1"), agent("random:2", "r2"),
                                    agent("greedy:2", "g2")};
  std::array<AgentFactory, 4> shuffled{order[2], order[0], order[3], order[1]};
  const auto a = run_duplicate(order, 2, 77);
  const auto b = run_duplicate(shuffled, 2, 77);
  std::map<std::string, double> by_id;
  for (std::size_t i = 0; i < 4; ++i) by_id[a.agents.ids[i]] = a.agents.average()[i];
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(by_id.at(b.agents.ids[i]), b.agents.average()[i]);
}

TEST(Duplicate, RejectsRepeatedIds) {
  EXPECT_THROW(run_duplicate({agent("random"), agent("random"), agent("greedy"), agent("greedy:1")}, 1, 1),
               std::invalid_argument);
}

TEST(FixedSeat, CompensationIsAddedBySeat) {
  const std::array<double, 4> raw{2.5, -0.5, 1.0, -3.0};
  const std::array<double, 4> comp{-1.0, -0.4, 0.3, 1.1};
  const auto straight = apply_compensation(raw, {0, 1, 2, 3}, comp);
  EXPECT_DOUBLE_EQ(straight[0], 1.5);
  EXPECT_DOUBLE_EQ(straight[1], -0.9);
  EXPECT_DOUBLE_EQ(straight[2], 1.3);
  EXPECT_DOUBLE_EQ(straight[3], -1.9);
  // Agent 0 sits at seat 3, so it receives the last seat's +1.1.
  const auto moved = apply_compensation(raw, {1, 2, 3, 0}, comp);
  EXPECT_DOUBLE_EQ(moved[0], 3.6);
  EXPECT_DOUBLE_EQ(moved[1], -1.5);
}

TEST(FixedSeat, AveragesFollowTheSeating) {
  const std::array<int, 4> seating{2, 0, 3, 1};
  std::vector<MatchRecord> recs;
  SimOptions o;
  o.on_record = [&](const MatchRecord& r) { recs.push_back(r); };
  const auto res = run_fixed_seat({agent("random:1", "A"), agent("random:2", "B"), agent("greedy:3", "C"),
                                   agent("greedy:4", "D")},
                                  seating, 60, 21, std::array<double, 4>{-1.0, -0.4, 0.3, 1.1}, o);
  ASSERT_EQ(recs.size(), 60u);
  EXPECT_EQ(recs[0].agents, (std::array<std::string, 4>{"C", "A", "D", "B"}));
  std::array<std::int64_t, 4> sums{};
  for (const auto& r : recs)
    for (std::size_t s = 0; s < 4; ++s) sums[static_cast<std::size_t>(seating[s])] += r.result.scores[s];
  EXPECT_EQ(res.agents.score_sum, sums);
  ASSERT_TRUE(res.compensated);
  double raw_total = 0, comp_total = 0;
  for (std::size_t a = 0; a < 4; ++a) {
    raw_total += res.agents.average()[a];
    comp_total += (*res.compensated)[a];
  }
  EXPECT_NEAR(raw_total, comp_total, 1e-9);
  EXPECT_NEAR((*res.compensated)[2], res.agents.average()[2] - 1.0, 1e-12);
  EXPECT_THROW(run_fixed_seat(clones("random"), {0, 0, 1, 2}, 1, 1), std::invalid_argument);
}

TEST(Ranking, DescendingWithStableTies) {
  EXPECT_EQ(ranking({0.2, 0.8, -1.0, 0.8}), (std::array<int, 4>{1, 3, 0, 2}));
}

TEST(Reports, JsonCsvAndTableAgree) {
  const SeatStats s = run_selfplay(agent("random:3"), 200, 1);
  const auto j = stats_json(s);
  ASSERT_EQ(j["seats"].size(), 4u);
  EXPECT_EQ(j["seats"][0]["wins"].get<std::int64_t>(), s.wins[0]);
  EXPECT_DOUBLE_EQ(j["first_mover"]["reference"].get<double>(), 0.0374);
  EXPECT_DOUBLE_EQ(j["first_mover"]["gap"].get<double>(), s.win_rate(0) - s.win_rate(3));
  const std::string csv = stats_csv(s);
  EXPECT_EQ(csv.rfind("seat,metric,value,ci\n", 0), 0u);
  EXPECT_NE(csv.find("1,win_rate,"), std::string::npos);
  const std::string table = stats_table(s);
  EXPECT_NE(table.find("reference 3.74 pp"), std::string::npos);
}
