#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mbl/scoring.hpp"
#include "mbl/tiles.hpp"

namespace mbl {

enum class ActionKind : std::uint8_t {
  Draw,
  Discard,
  Chow,
  Pung,
  MeldedKong,
  ConcealedKong,
  AddedKong,
  WinSelfDraw,
  WinDiscard,
  WinRobKong,
  Pass,
  Flower,  // referee-applied: a drawn flower is exposed
};

std::string_view action_kind_name(ActionKind k);
ActionKind parse_action_kind(std::string_view s);

// Tile arguments by kind:
//   Draw, Flower, Discard, AddedKong: the single tile
//   Chow, Pung: the claimer's own two tiles; MeldedKong: own three
//   ConcealedKong: all four; wins and Pass: none
struct Action {
  ActionKind kind = ActionKind::Pass;
  std::vector<Tile> tiles;

  bool is_win() const {
    return kind == ActionKind::WinSelfDraw || kind == ActionKind::WinDiscard || kind == ActionKind::WinRobKong;
  }
  friend bool operator==(const Action&, const Action&) = default;
};

std::string format_action(const Action& a);

class IllegalAction : public Error {
 public:
  IllegalAction(const std::string& what, std::vector<Action> legal) : Error(what), legal_(std::move(legal)) {}
  const std::vector<Action>& legal() const { return legal_; }

 private:
  std::vector<Action> legal_;
};

enum class Phase : std::uint8_t { AwaitDraw, AwaitDiscard, AwaitClaims, Finished };

std::string_view phase_name(Phase p);

struct Event {
  int seat = 0;
  Action action;
  int index = 0;
  /// Tiles hidden from the observing seat (other seats' draws, concealed kongs).
  bool redacted = false;
};

struct RuleSet {
  std::string id = "classic";
  FanTable table = FanTable::standard();
  std::optional<std::array<double, 4>> compensation;
  bool flowers = false;
  int prevalent_wind = 1;
  ScoringOptions scoring;
  /// Forfeiting seat loses 3*forfeit_unit, every other seat gains forfeit_unit.
  int forfeit_unit = 8;

  static RuleSet classic();
  /// Adapted points with the compensation vector from self-play.
  static RuleSet revised();
};

struct MatchResult {
  std::optional<int> winner;
  std::optional<WinBy> win_by;
  std::optional<int> discarder;
  FanResult fans;
  std::array<int, 4> scores{};
  std::optional<int> forfeit_seat;
  std::string forfeit_reason;
};

enum class RequestKind : std::uint8_t { ActNow, ClaimOrPass };

struct PublicMeld {
  MeldType type;
  std::vector<std::optional<Tile>> tiles;  // nullopt where hidden
};

/// What one seat may legally see.
struct Observation {
  std::string match_id;
  int seat = 0;
  RequestKind request_kind = RequestKind::ActNow;
  Phase phase = Phase::AwaitDraw;
  int current_seat = 0;
  std::vector<Tile> hand;
  std::optional<Tile> last_drawn;
  std::array<std::vector<PublicMeld>, 4> melds;
  std::array<std::vector<Tile>, 4> discards;
  std::array<std::vector<Tile>, 4> flowers;
  std::array<int, 4> concealed_sizes{};
  int wall_remaining = 0;
  std::optional<Tile> pending_tile;
  std::optional<int> pending_from;
  std::vector<Event> history;
  std::vector<Action> legal;
  int seat_wind = 1;
  int prevalent_wind = 1;
};

class GameState {
 public:
  /// Deals from `wall` (untouched) and enters AwaitDraw for seat 0.
  GameState(Wall wall, RuleSet rules, std::string match_id = {});

  Phase phase() const { return phase_; }
  int current_seat() const { return current_; }
  const Wall& wall() const { return wall_; }
  const Hand& hand(int seat) const { return hands_.at(static_cast<std::size_t>(seat)); }
  const std::vector<Tile>& discards(int seat) const { return discards_.at(static_cast<std::size_t>(seat)); }
  const std::vector<Tile>& flowers(int seat) const { return flowers_.at(static_cast<std::size_t>(seat)); }
  const std::vector<Event>& events() const { return events_; }
  const KindCounts& visible_counts() const { return visible_; }
  const MatchResult& result() const { return result_; }
  const RuleSet& rules() const { return rules_; }
  const std::string& match_id() const { return match_id_; }
  const Wall& initial_wall() const { return initial_wall_; }
  std::optional<Tile> pending_tile() const { return pending_tile_; }
  std::optional<int> pending_from() const { return pending_from_; }
  bool finished() const { return phase_ == Phase::Finished; }

  /// Seats whose decision the referee is waiting for.
  std::vector<int> seats_to_act() const;
  std::vector<Action> legal_actions(int seat) const;
  /// Applies a legal action; throws IllegalAction (with the legal set) otherwise.
  void apply(int seat, const Action& action);
  /// Ends the match with the forfeit policy applied to `seat`.
  void forfeit(int seat, const std::string& reason);

  Observation observe(int seat) const;
  /// Every physical tile currently in hands, melds, discards, flowers and the undrawn wall.
  std::vector<Tile> all_tiles() const;

 private:
  enum class ClaimWindow : std::uint8_t { None, Discard, RobKong };

  void draw_for(int seat, bool from_tail);
  void log(int seat, Action a);
  void open_claims(ClaimWindow window);
  void resolve_claims();
  void finish_win(int seat, WinBy by, std::optional<int> discarder, Tile winning);
  void finish_draw();
  WinContext win_context(int seat, WinBy by, Tile tile, std::optional<int> discarder) const;
  FanResult score_with(int seat, const Hand& hand, Tile tile, const WinContext& ctx) const;
  bool can_win_with(int seat, Tile tile, WinBy by, std::optional<int> discarder) const;
  void remove_concealed(int seat, const std::vector<Tile>& tiles);

  RuleSet rules_;
  std::string match_id_;
  Wall initial_wall_;
  Wall wall_;
  std::array<Hand, 4> hands_;
  std::array<std::vector<Tile>, 4> discards_;
  std::array<std::vector<Tile>, 4> flowers_;
  std::vector<Event> events_;
  KindCounts visible_{};
  Phase phase_ = Phase::AwaitDraw;
  int current_ = 0;
  bool just_drew_ = false;
  bool drew_from_tail_ = false;
  std::optional<Tile> last_drawn_;
  ClaimWindow window_ = ClaimWindow::None;
  std::optional<Tile> pending_tile_;
  std::optional<int> pending_from_;
  std::array<std::optional<Action>, 4> responses_;
  MatchResult result_;
};

/// Free-function forms of the referee interface.
std::vector<Action> legal_actions(const GameState& state, int seat);
GameState step(GameState state, int seat, const Action& action);
Observation observation_for(const GameState& state, int seat);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  /// Called once per match before the first decision.
  virtual void begin_match(const std::string& /*match_id*/, int /*seat*/) {}
  /// Must return a member of obs.legal. Throwing forfeits the seat.
  virtual Action act(const Observation& obs) = 0;
};

struct MatchRecord {
  std::string match_id;
  std::uint64_t seed = 0;
  std::string ruleset_id;
  std::array<std::string, 4> agents;
  std::vector<Tile> wall;
  std::vector<Event> events;
  MatchResult result;
  std::optional<std::array<double, 4>> compensated_scores;
};

/// Plays a complete match. `agents[s]` decides for seat s; forced single
/// actions are applied without consulting the agent.
MatchRecord run_match(const Wall& wall, std::array<Agent*, 4> agents, const RuleSet& rules,
                      const std::string& match_id = "m0", std::uint64_t seed = 0);

/// Builds the record of a finished state.
MatchRecord make_record(const GameState& state, std::uint64_t seed, const std::array<std::string, 4>& agents);

void to_json(nlohmann::json& j, const Action& a);
void to_json(nlohmann::json& j, const Event& e);
void to_json(nlohmann::json& j, const MatchRecord& r);
void from_json(const nlohmann::json& j, MatchRecord& r);
void to_json(nlohmann::json& j, const Observation& o);

/// One JSON text, no trailing newline.
std::string record_to_line(const MatchRecord& r);
MatchRecord record_from_line(std::string_view line);

}  // namespace mbl
