#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mbl/engine.hpp"
#include "mbl/rng.hpp"

namespace mbl {

/// Minimum number of tile exchanges separating a hand from any winning shape
/// (threshold ignored). Works on 13- and 14-tile-equivalent hands: a tenpai
/// 13-tile hand is 1, a complete 14-tile hand is 0.
int deficiency(const Hand& hand, const ScoringOptions& opts = {});

struct DeficiencyByForm {
  int standard = 99;
  int seven_pairs = 99;
  int thirteen_orphans = 99;
  int knitted_straight = 99;
  int honors_knitted = 99;
  int best() const;
};

DeficiencyByForm deficiency_by_form(const Hand& hand, const ScoringOptions& opts = {});

/// Picks uniformly from the legal set.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed, std::string id = "random");
  std::string id() const override { return id_; }
  void begin_match(const std::string& match_id, int seat) override;
  Action act(const Observation& obs) override;

 private:
  std::uint64_t seed_;
  std::string id_;
  Rng rng_;
};

/// Wins whenever allowed, otherwise keeps deficiency as low as possible.
class GreedyAgent : public Agent {
 public:
  explicit GreedyAgent(std::uint64_t seed, std::string id = "greedy");
  std::string id() const override { return id_; }
  void begin_match(const std::string& match_id, int seat) override;
  Action act(const Observation& obs) override;

 private:
  std::uint64_t seed_;
  std::string id_;
  Rng rng_;
};

/// Replays one seat's decisions from a recorded event log.
class ScriptedAgent : public Agent {
 public:
  ScriptedAgent(std::vector<Event> events, std::string id = "scripted");
  std::string id() const override { return id_; }
  Action act(const Observation& obs) override;

 private:
  std::vector<Event> events_;
  std::string id_;
};

/// Protocol text for a legal action of `obs`, e.g. "PLAY W5" or "CHI B3 F1".
/// `follow_up` is the discard that goes with a Chow or Pung.
std::string format_protocol_action(const Action& a, const Observation& obs,
                                   std::optional<TileKind> follow_up = std::nullopt);

struct ProtocolReply {
  Action action;
  std::optional<TileKind> follow_up;  // discard after CHI / PENG
};

/// Maps one response line onto the observation's legal set. Throws
/// ParseError on bad grammar and IllegalAction when nothing legal matches.
ProtocolReply parse_protocol_reply(std::string_view line, const Observation& obs);

/// One request line (no newline) for an observation.
std::string protocol_request(const Observation& obs);

/// A child process speaking the line protocol. Restarted lazily after a failure.
class ExternalAgent : public Agent {
 public:
  ExternalAgent(std::string command, int timeout_ms = 1000, std::string id = "external");
  ~ExternalAgent() override;
  ExternalAgent(const ExternalAgent&) = delete;
  ExternalAgent& operator=(const ExternalAgent&) = delete;

  std::string id() const override { return id_; }
  void begin_match(const std::string& match_id, int seat) override;
  Action act(const Observation& obs) override;

 private:
  void start();
  void stop();
  std::string exchange(const std::string& request);

  std::string command_;
  int timeout_ms_;
  std::string id_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<TileKind> pending_discard_;
};

/// "random[:seed]", "greedy[:seed]" or "external:<command>[@timeout_ms]".
struct AgentSpec {
  enum class Kind { Random, Greedy, External } kind = Kind::Random;
  std::uint64_t seed = 0;
  std::string command;
  int timeout_ms = 1000;
  std::string id;
};

AgentSpec parse_agent_spec(std::string_view text);
std::unique_ptr<Agent> make_agent(const AgentSpec& spec);

}  // namespace mbl
