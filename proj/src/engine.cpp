#include "mbl/engine.hpp"

#include <algorithm>
#include <cmath>

namespace mbl {

namespace {

constexpr std::array<std::string_view, 12> kActionNames = {
    "Draw",          "Discard",   "Chow",       "Pung",       "MeldedKong", "ConcealedKong",
    "AddedKong",     "WinSelfDraw", "WinDiscard", "WinRobKong", "Pass",       "Flower",
};

std::size_t at(int seat) { return static_cast<std::size_t>(seat); }
std::size_t at(TileKind k) { return static_cast<std::size_t>(k.index()); }

bool is_claim(ActionKind k) {
  return k == ActionKind::Pass || k == ActionKind::Chow || k == ActionKind::Pung || k == ActionKind::MeldedKong ||
         k == ActionKind::WinDiscard || k == ActionKind::WinRobKong;
}

// Lowest-id copies of `kind` in the rack.
std::vector<Tile> copies_of(const std::vector<Tile>& rack, TileKind kind, std::size_t n) {
  std::vector<Tile> out;
  for (const Tile& t : rack)
    if (t.kind == kind) out.push_back(t);
  std::sort(out.begin(), out.end());
  if (out.size() > n) out.resize(n);
  return out;
}

Hand without(const Hand& h, Tile t) {
  Hand out = h;
  auto it = std::find(out.concealed.begin(), out.concealed.end(), t);
  if (it != out.concealed.end()) out.concealed.erase(it);
  return out;
}

}  // namespace

std::string_view action_kind_name(ActionKind k) { return kActionNames.at(static_cast<std::size_t>(k)); }

ActionKind parse_action_kind(std::string_view s) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i)
    if (kActionNames[i] == s) return static_cast<ActionKind>(i);
  throw ParseError("unknown action kind '" + std::string(s) + "'");
}

std::string format_action(const Action& a) {
  std::string s(action_kind_name(a.kind));
  for (const Tile& t : a.tiles) s += " " + format_physical_tile(t);
  return s;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::AwaitDraw:
      return "AwaitDraw";
    case Phase::AwaitDiscard:
      return "AwaitDiscard";
    case Phase::AwaitClaims:
      return "AwaitClaims";
    case Phase::Finished:
      return "Finished";
  }
  return "?";
}

RuleSet RuleSet::classic() { return RuleSet{}; }

RuleSet RuleSet::revised() {
  RuleSet r;
  r.id = "revised";
  r.table = FanTable::standard().with_points({
      {fan::ReversibleTiles, 12},
      {fan::MixedShiftedPungs, 12},
      {fan::LesserHonoursAndKnittedTiles, 8},
      {fan::KnittedStraight, 8},
      {fan::UpperFour, 8},
      {fan::LowerFour, 8},
      {fan::PureStraight, 12},
      {fan::PureShiftedChows, 12},
      {fan::SevenPairs, 16},
      {fan::GreaterHonoursAndKnittedTiles, 16},
      {fan::FullFlush, 16},
  });
  r.compensation = std::array<double, 4>{-1.0, -0.4, 0.3, 1.1};
  return r;
}

GameState::GameState(Wall wall, RuleSet rules, std::string match_id)
    : rules_(std::move(rules)), match_id_(std::move(match_id)), initial_wall_(wall) {
  const bool has_flowers = std::any_of(wall.tiles().begin(), wall.tiles().end(),
                                       [](const Tile& t) { return t.kind.is_flower(); });
  if (has_flowers && !rules_.flowers) throw InvalidWall("wall contains flowers but the ruleset has them disabled");
  Deal d = deal(std::move(wall));
  hands_ = std::move(d.hands);
  wall_ = std::move(d.wall);
  if (rules_.flowers) {
    for (int seat = 0; seat < 4; ++seat) {
      auto& rack = hands_[at(seat)].concealed;
      for (std::size_t i = 0; i < rack.size();) {
        if (!rack[i].kind.is_flower()) {
          ++i;
          continue;
        }
        const Tile f = rack[i];
        rack.erase(rack.begin() + static_cast<std::ptrdiff_t>(i));
        flowers_[at(seat)].push_back(f);
        log(seat, Action{ActionKind::Flower, {f}});
        const Tile r = wall_.draw_tail();
        rack.push_back(r);
        log(seat, Action{ActionKind::Draw, {r}});
      }
    }
  }
}

void GameState::log(int seat, Action a) {
  events_.push_back(Event{seat, std::move(a), static_cast<int>(events_.size()), false});
}

void GameState::draw_for(int seat, bool from_tail) {
  Tile t = from_tail ? wall_.draw_tail() : wall_.draw();
  hands_[at(seat)].concealed.push_back(t);
  log(seat, Action{ActionKind::Draw, {t}});
  while (t.kind.is_flower()) {
    auto& rack = hands_[at(seat)].concealed;
    rack.pop_back();
    flowers_[at(seat)].push_back(t);
    log(seat, Action{ActionKind::Flower, {t}});
    if (wall_.empty()) {
      finish_draw();
      return;
    }
    t = wall_.draw_tail();
    rack.push_back(t);
    log(seat, Action{ActionKind::Draw, {t}});
  }
  current_ = seat;
  last_drawn_ = t;
  just_drew_ = true;
  drew_from_tail_ = from_tail;
  phase_ = Phase::AwaitDiscard;
}

std::vector<int> GameState::seats_to_act() const {
  switch (phase_) {
    case Phase::AwaitDraw:
    case Phase::AwaitDiscard:
      return {current_};
    case Phase::AwaitClaims: {
      std::vector<int> out;
      for (int i = 1; i < 4; ++i) {
        const int s = (*pending_from_ + i) % 4;
        if (!responses_[at(s)]) out.push_back(s);
      }
      return out;
    }
    case Phase::Finished:
      break;
  }
  return {};
}

WinContext GameState::win_context(int seat, WinBy by, Tile tile, std::optional<int> discarder) const {
  WinContext ctx;
  ctx.win_by = by;
  ctx.discarder = discarder;
  ctx.winning_tile = tile;
  ctx.seat_wind = seat + 1;
  ctx.prevalent_wind = rules_.prevalent_wind;
  ctx.last_wall_tile = wall_.empty();
  ctx.visible_counts = visible_;
  if (by == WinBy::Discard && ctx.visible_counts[at(tile.kind)] > 0) --ctx.visible_counts[at(tile.kind)];
  const auto& melds = hands_[at(seat)].melds;
  ctx.concealed_throughout =
      std::all_of(melds.begin(), melds.end(), [](const Meld& m) { return m.type == MeldType::ConcealedKong; });
  return ctx;
}

FanResult GameState::score_with(int /*seat*/, const Hand& hand, Tile tile, const WinContext& ctx) const {
  return best_fan(hand, tile, ctx, rules_.table, rules_.scoring);
}

bool GameState::can_win_with(int seat, Tile tile, WinBy by, std::optional<int> discarder) const {
  const Hand& full = hands_[at(seat)];
  const Hand hand = (by == WinBy::SelfDraw || by == WinBy::ReplacementTile) ? without(full, tile) : full;
  if (hand.equivalent_size() != 13) return false;
  KindCounts counts = hand.concealed_counts();
  ++counts[at(tile.kind)];
  if (!is_winning_shape(counts, static_cast<int>(hand.melds.size()), rules_.scoring)) return false;
  return score_with(seat, hand, tile, win_context(seat, by, tile, discarder)).win;
}

std::vector<Action> GameState::legal_actions(int seat) const {
  std::vector<Action> out;
  if (seat < 0 || seat > 3) return out;
  switch (phase_) {
    case Phase::Finished:
      return out;
    case Phase::AwaitDraw:
      if (seat == current_) out.push_back(Action{ActionKind::Draw, {}});
      return out;
    case Phase::AwaitDiscard: {
      if (seat != current_) return out;
      const Hand& h = hands_[at(seat)];
      std::vector<Tile> rack = h.concealed;
      std::sort(rack.begin(), rack.end());
      for (const Tile& t : rack) out.push_back(Action{ActionKind::Discard, {t}});
      if (!just_drew_) return out;
      if (!wall_.empty()) {
        const KindCounts counts = h.concealed_counts();
        for (int k = 0; k < kNumKinds; ++k)
          if (counts[static_cast<std::size_t>(k)] == 4)
            out.push_back(Action{ActionKind::ConcealedKong, copies_of(h.concealed, TileKind(k), 4)});
        for (const Meld& m : h.melds) {
          if (m.type != MeldType::Pung) continue;
          for (const Tile& t : rack)
            if (t.kind == m.tiles.front().kind) out.push_back(Action{ActionKind::AddedKong, {t}});
        }
      }
      const WinBy by = drew_from_tail_ ? WinBy::ReplacementTile : WinBy::SelfDraw;
      if (last_drawn_ && can_win_with(seat, *last_drawn_, by, std::nullopt))
        out.push_back(Action{ActionKind::WinSelfDraw, {}});
      return out;
    }
    case Phase::AwaitClaims: {
      if (seat == *pending_from_ || responses_[at(seat)]) return out;
      const Tile tile = *pending_tile_;
      out.push_back(Action{ActionKind::Pass, {}});
      if (window_ == ClaimWindow::RobKong) {
        if (can_win_with(seat, tile, WinBy::RobKong, pending_from_)) out.push_back(Action{ActionKind::WinRobKong, {}});
        return out;
      }
      if (!wall_.empty()) {
        const auto& rack = hands_[at(seat)].concealed;
        if (seat == (*pending_from_ + 1) % 4 && tile.kind.is_suited()) {
          const int r = tile.kind.rank();
          for (int start = std::max(1, r - 2); start <= std::min(7, r); ++start) {
            std::vector<Tile> own;
            for (int x = start; x < start + 3; ++x) {
              if (x == r) continue;
              const auto c = copies_of(rack, TileKind(tile.kind.index() + x - r), 1);
              if (c.empty()) break;
              own.push_back(c.front());
            }
            if (own.size() == 2) out.push_back(Action{ActionKind::Chow, own});
          }
        }
        const auto same = copies_of(rack, tile.kind, 3);
        if (same.size() >= 2) out.push_back(Action{ActionKind::Pung, {same[0], same[1]}});
        if (same.size() == 3) out.push_back(Action{ActionKind::MeldedKong, same});
      }
      if (can_win_with(seat, tile, WinBy::Discard, pending_from_)) out.push_back(Action{ActionKind::WinDiscard, {}});
      return out;
    }
  }
  return out;
}

void GameState::remove_concealed(int seat, const std::vector<Tile>& tiles) {
  auto& rack = hands_[at(seat)].concealed;
  for (const Tile& t : tiles) {
    auto it = std::find(rack.begin(), rack.end(), t);
    if (it == rack.end()) throw Error("tile " + format_physical_tile(t) + " not in hand");
    rack.erase(it);
  }
}

void GameState::apply(int seat, const Action& action) {
  const auto legal = legal_actions(seat);
  if (std::find(legal.begin(), legal.end(), action) == legal.end())
    throw IllegalAction("seat " + std::to_string(seat) + " cannot " + format_action(action) + " in " +
                            std::string(phase_name(phase_)),
                        legal);
  switch (action.kind) {
    case ActionKind::Draw:
      draw_for(seat, false);
      return;
    case ActionKind::Discard: {
      const Tile t = action.tiles.front();
      remove_concealed(seat, {t});
      discards_[at(seat)].push_back(t);
      ++visible_[at(t.kind)];
      log(seat, action);
      just_drew_ = false;
      last_drawn_.reset();
      pending_tile_ = t;
      pending_from_ = seat;
      open_claims(ClaimWindow::Discard);
      return;
    }
    case ActionKind::ConcealedKong: {
      remove_concealed(seat, action.tiles);
      hands_[at(seat)].melds.push_back(Meld{MeldType::ConcealedKong, action.tiles, std::nullopt, std::nullopt});
      log(seat, action);
      draw_for(seat, true);
      return;
    }
    case ActionKind::AddedKong: {
      const Tile t = action.tiles.front();
      remove_concealed(seat, {t});
      log(seat, action);
      just_drew_ = false;
      pending_tile_ = t;
      pending_from_ = seat;
      open_claims(ClaimWindow::RobKong);
      return;
    }
    case ActionKind::WinSelfDraw: {
      log(seat, action);
      finish_win(seat, drew_from_tail_ ? WinBy::ReplacementTile : WinBy::SelfDraw, std::nullopt, *last_drawn_);
      return;
    }
    default:
      if (!is_claim(action.kind)) throw IllegalAction("referee-only action " + format_action(action), legal);
      responses_[at(seat)] = action;
      if (seats_to_act().empty()) resolve_claims();
      return;
  }
}

void GameState::open_claims(ClaimWindow window) {
  window_ = window;
  phase_ = Phase::AwaitClaims;
  responses_ = {};
  responses_[at(*pending_from_)] = Action{ActionKind::Pass, {}};
  for (int i = 1; i < 4; ++i) {
    const int s = (*pending_from_ + i) % 4;
    if (legal_actions(s).size() == 1) responses_[at(s)] = Action{ActionKind::Pass, {}};
  }
  if (seats_to_act().empty()) resolve_claims();
}

void GameState::resolve_claims() {
  const int from = *pending_from_;
  const Tile tile = *pending_tile_;
  std::array<int, 3> order{(from + 1) % 4, (from + 2) % 4, (from + 3) % 4};
  auto find = [&](auto pred) -> std::optional<int> {
    for (int s : order)
      if (pred(responses_[at(s)]->kind)) return s;
    return std::nullopt;
  };
  const auto window = window_;
  window_ = ClaimWindow::None;

  if (auto w = find([](ActionKind k) { return k == ActionKind::WinDiscard || k == ActionKind::WinRobKong; })) {
    log(*w, *responses_[at(*w)]);
    if (window == ClaimWindow::Discard) {
      finish_win(*w, WinBy::Discard, from, tile);
      discards_[at(from)].pop_back();
      --visible_[at(tile.kind)];
    } else {
      finish_win(*w, WinBy::RobKong, from, tile);
    }
    return;
  }

  if (window == ClaimWindow::RobKong) {
    for (Meld& m : hands_[at(from)].melds) {
      if (m.type == MeldType::Pung && m.tiles.front().kind == tile.kind) {
        m.type = MeldType::AddedKong;
        m.tiles.push_back(tile);
        break;
      }
    }
    ++visible_[at(tile.kind)];
    pending_tile_.reset();
    pending_from_.reset();
    draw_for(from, true);
    return;
  }

  auto claim = find([](ActionKind k) { return k == ActionKind::Pung || k == ActionKind::MeldedKong; });
  if (!claim) claim = find([](ActionKind k) { return k == ActionKind::Chow; });
  pending_tile_.reset();
  pending_from_.reset();
  if (!claim) {
    if (wall_.empty()) {
      finish_draw();
    } else {
      current_ = (from + 1) % 4;
      phase_ = Phase::AwaitDraw;
    }
    return;
  }

  const int s = *claim;
  const Action a = *responses_[at(s)];
  remove_concealed(s, a.tiles);
  discards_[at(from)].pop_back();
  for (const Tile& t : a.tiles) ++visible_[at(t.kind)];
  Meld m;
  m.type = a.kind == ActionKind::Chow ? MeldType::Chow : (a.kind == ActionKind::Pung ? MeldType::Pung : MeldType::MeldedKong);
  m.tiles = a.tiles;
  m.tiles.push_back(tile);
  std::sort(m.tiles.begin(), m.tiles.end());
  m.claimed_from = from;
  m.claimed_tile = tile;
  hands_[at(s)].melds.push_back(std::move(m));
  log(s, a);
  current_ = s;
  if (a.kind == ActionKind::MeldedKong) {
    draw_for(s, true);
  } else {
    just_drew_ = false;
    last_drawn_.reset();
    phase_ = Phase::AwaitDiscard;
  }
}

void GameState::finish_win(int seat, WinBy by, std::optional<int> discarder, Tile winning) {
  const bool self = by == WinBy::SelfDraw || by == WinBy::ReplacementTile;
  const Hand hand = self ? without(hands_[at(seat)], winning) : hands_[at(seat)];
  const WinContext ctx = win_context(seat, by, winning, discarder);
  result_.fans = score_with(seat, hand, winning, ctx);
  result_.winner = seat;
  result_.win_by = by;
  result_.discarder = discarder;
  result_.scores = settle(result_.fans.total, by, seat, discarder);
  if (!self) hands_[at(seat)].concealed.push_back(winning);
  pending_tile_.reset();
  pending_from_.reset();
  phase_ = Phase::Finished;
}

void GameState::finish_draw() {
  result_.scores = {};
  pending_tile_.reset();
  pending_from_.reset();
  phase_ = Phase::Finished;
}

void GameState::forfeit(int seat, const std::string& reason) {
  if (phase_ == Phase::Finished) return;
  result_ = MatchResult{};
  result_.scores.fill(rules_.forfeit_unit);
  result_.scores[at(seat)] = -3 * rules_.forfeit_unit;
  result_.forfeit_seat = seat;
  result_.forfeit_reason = reason;
  phase_ = Phase::Finished;
}

Observation GameState::observe(int seat) const {
  Observation o;
  o.match_id = match_id_;
  o.seat = seat;
  o.phase = phase_;
  o.request_kind = phase_ == Phase::AwaitClaims ? RequestKind::ClaimOrPass : RequestKind::ActNow;
  o.current_seat = current_;
  o.hand = hands_[at(seat)].concealed;
  std::sort(o.hand.begin(), o.hand.end());
  if (seat == current_ && just_drew_ && phase_ == Phase::AwaitDiscard) o.last_drawn = last_drawn_;
  for (int s = 0; s < 4; ++s) {
    for (const Meld& m : hands_[at(s)].melds) {
      PublicMeld pm{m.type, {}};
      for (const Tile& t : m.tiles)
        pm.tiles.push_back(m.type == MeldType::ConcealedKong && s != seat ? std::nullopt : std::optional<Tile>(t));
      o.melds[at(s)].push_back(std::move(pm));
    }
    o.discards[at(s)] = discards_[at(s)];
    o.flowers[at(s)] = flowers_[at(s)];
    o.concealed_sizes[at(s)] = static_cast<int>(hands_[at(s)].concealed.size());
  }
  o.wall_remaining = static_cast<int>(wall_.remaining());
  o.pending_tile = pending_tile_;
  o.pending_from = pending_from_;
  o.history.reserve(events_.size());
  for (const Event& e : events_) {
    Event r = e;
    const bool hidden = e.seat != seat && (e.action.kind == ActionKind::Draw || e.action.kind == ActionKind::ConcealedKong);
    if (hidden) {
      r.action.tiles.clear();
      r.redacted = true;
    }
    o.history.push_back(std::move(r));
  }
  o.legal = legal_actions(seat);
  o.seat_wind = seat + 1;
  o.prevalent_wind = rules_.prevalent_wind;
  return o;
}

std::vector<Tile> GameState::all_tiles() const {
  std::vector<Tile> out;
  for (int s = 0; s < 4; ++s) {
    const Hand& h = hands_[at(s)];
    out.insert(out.end(), h.concealed.begin(), h.concealed.end());
    for (const Meld& m : h.melds) out.insert(out.end(), m.tiles.begin(), m.tiles.end());
    out.insert(out.end(), discards_[at(s)].begin(), discards_[at(s)].end());
    out.insert(out.end(), flowers_[at(s)].begin(), flowers_[at(s)].end());
  }
  if (window_ == ClaimWindow::RobKong && pending_tile_) out.push_back(*pending_tile_);
  const auto& w = wall_.tiles();
  out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(wall_.draw_cursor()),
             w.end() - static_cast<std::ptrdiff_t>(wall_.tail_taken()));
  return out;
}

std::vector<Action> legal_actions(const GameState& state, int seat) { return state.legal_actions(seat); }

GameState step(GameState state, int seat, const Action& action) {
  state.apply(seat, action);
  return state;
}

Observation observation_for(const GameState& state, int seat) { return state.observe(seat); }

MatchRecord make_record(const GameState& state, std::uint64_t seed, const std::array<std::string, 4>& agents) {
  MatchRecord r;
  r.match_id = state.match_id();
  r.seed = seed;
  r.ruleset_id = state.rules().id;
  r.agents = agents;
  r.wall = state.initial_wall().tiles();
  r.events = state.events();
  r.result = state.result();
  if (const auto& comp = state.rules().compensation) {
    std::array<double, 4> c{};
    for (std::size_t s = 0; s < 4; ++s) c[s] = std::round((r.result.scores[s] + (*comp)[s]) * 10.0) / 10.0;
    r.compensated_scores = c;
  }
  return r;
}

MatchRecord run_match(const Wall& wall, std::array<Agent*, 4> agents, const RuleSet& rules,
                      const std::string& match_id, std::uint64_t seed) {
  GameState st(wall, rules, match_id);
  std::array<std::string, 4> ids;
  for (int s = 0; s < 4; ++s) {
    ids[at(s)] = agents[at(s)]->id();
    agents[at(s)]->begin_match(match_id, s);
  }
  while (!st.finished()) {
    if (st.phase() == Phase::AwaitDraw) {
      st.apply(st.current_seat(), Action{ActionKind::Draw, {}});
      continue;
    }
    const int s = st.seats_to_act().front();
    const auto legal = st.legal_actions(s);
    Action a;
    if (legal.size() == 1) {
      a = legal.front();
    } else {
      try {
        a = agents[at(s)]->act(st.observe(s));
      } catch (const std::exception& e) {
        st.forfeit(s, e.what());
        break;
      }
      if (std::find(legal.begin(), legal.end(), a) == legal.end()) {
        st.forfeit(s, "illegal action " + format_action(a));
        break;
      }
    }
    st.apply(s, a);
  }
  return make_record(st, seed, ids);
}

// --- JSON --------------------------------------------------------------------

namespace {

nlohmann::json tiles_json(const std::vector<Tile>& tiles) {
  auto j = nlohmann::json::array();
  for (const Tile& t : tiles) j.push_back(format_physical_tile(t));
  return j;
}

std::vector<Tile> tiles_from(const nlohmann::json& j) {
  std::vector<Tile> out;
  for (const auto& x : j) out.push_back(parse_physical_tile(x.get<std::string>()));
  return out;
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const Action& a) {
  j = nlohmann::json{{"action", action_kind_name(a.kind)}, {"tiles", tiles_json(a.tiles)}};
}

void to_json(nlohmann::json& j, const Event& e) {
  j = nlohmann::json{{"seat", e.seat}, {"action", action_kind_name(e.action.kind)}, {"tiles", tiles_json(e.action.tiles)}};
  if (e.redacted) j["redacted"] = true;
}

void to_json(nlohmann::json& j, const MatchRecord& r) {
  auto fans = nlohmann::json::array();
  for (const auto& f : r.result.fans.fans)
    fans.push_back({{"pattern_id", f.pattern_id}, {"points", f.points}, {"multiplicity", f.multiplicity}});
  nlohmann::json result{
      {"winner", opt(r.result.winner)},
      {"win_by", r.result.win_by ? nlohmann::json(win_by_name(*r.result.win_by)) : nlohmann::json(nullptr)},
      {"discarder", opt(r.result.discarder)},
      {"fan_list", fans},
      {"fan_total", r.result.fans.total},
      {"scores", r.result.scores},
      {"compensated_scores", opt(r.compensated_scores)},
  };
  if (r.result.forfeit_seat) {
    result["forfeit_seat"] = *r.result.forfeit_seat;
    result["forfeit_reason"] = r.result.forfeit_reason;
  }
  auto events = nlohmann::json::array();
  for (const auto& e : r.events) events.push_back(e);
  j = nlohmann::json{
      {"match_id", r.match_id}, {"seed", r.seed},           {"ruleset_id", r.ruleset_id}, {"agents", r.agents},
      {"wall", tiles_json(r.wall)}, {"events", events}, {"result", result},
  };
}

void from_json(const nlohmann::json& j, MatchRecord& r) {
  try {
    r.match_id = j.at("match_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ruleset_id = j.at("ruleset_id").get<std::string>();
    if (j.contains("agents")) r.agents = j.at("agents").get<std::array<std::string, 4>>();
    r.wall = tiles_from(j.at("wall"));
    r.events.clear();
    for (const auto& e : j.at("events"))
      r.events.push_back(Event{e.at("seat").get<int>(),
                               Action{parse_action_kind(e.at("action").get<std::string>()), tiles_from(e.at("tiles"))},
                               static_cast<int>(r.events.size()), e.value("redacted", false)});
    const auto& res = j.at("result");
    r.result = MatchResult{};
    if (!res.at("winner").is_null()) r.result.winner = res.at("winner").get<int>();
    if (!res.at("win_by").is_null()) r.result.win_by = parse_win_by(res.at("win_by").get<std::string>());
    if (res.contains("discarder") && !res.at("discarder").is_null()) r.result.discarder = res.at("discarder").get<int>();
    for (const auto& f : res.at("fan_list"))
      r.result.fans.fans.push_back(
          FanEntry{f.at("pattern_id").get<int>(), f.value("multiplicity", 1), f.at("points").get<int>()});
    r.result.fans.total = res.at("fan_total").get<int>();
    r.result.fans.win = r.result.fans.total >= kWinThreshold;
    r.result.scores = res.at("scores").get<std::array<int, 4>>();
    if (res.contains("compensated_scores") && !res.at("compensated_scores").is_null())
      r.compensated_scores = res.at("compensated_scores").get<std::array<double, 4>>();
    if (res.contains("forfeit_seat")) {
      r.result.forfeit_seat = res.at("forfeit_seat").get<int>();
      r.result.forfeit_reason = res.value("forfeit_reason", "");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed match record: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const Observation& o) {
  auto seats = nlohmann::json::array();
  for (int s = 0; s < 4; ++s) {
    auto melds = nlohmann::json::array();
    for (const auto& m : o.melds[at(s)]) {
      auto tiles = nlohmann::json::array();
      for (const auto& t : m.tiles) tiles.push_back(t ? nlohmann::json(format_physical_tile(*t)) : nlohmann::json(nullptr));
      melds.push_back({{"type", meld_type_name(m.type)}, {"tiles", tiles}});
    }
    seats.push_back({{"melds", melds},
                     {"discards", tiles_json(o.discards[at(s)])},
                     {"flowers", tiles_json(o.flowers[at(s)])},
                     {"concealed_count", o.concealed_sizes[at(s)]}});
  }
  auto history = nlohmann::json::array();
  for (const auto& e : o.history) history.push_back(e);
  auto legal = nlohmann::json::array();
  for (const auto& a : o.legal) legal.push_back(a);
  j = nlohmann::json{
      {"match_id", o.match_id},
      {"seat", o.seat},
      {"phase", phase_name(o.phase)},
      {"current_seat", o.current_seat},
      {"hand", tiles_json(o.hand)},
      {"last_drawn", o.last_drawn ? nlohmann::json(format_physical_tile(*o.last_drawn)) : nlohmann::json(nullptr)},
      {"seats", seats},
      {"wall_remaining", o.wall_remaining},
      {"pending_tile", o.pending_tile ? nlohmann::json(format_physical_tile(*o.pending_tile)) : nlohmann::json(nullptr)},
      {"pending_from", opt(o.pending_from)},
      {"history", history},
      {"legal", legal},
      {"seat_wind", o.seat_wind},
      {"prevalent_wind", o.prevalent_wind},
  };
}

std::string record_to_line(const MatchRecord& r) { return nlohmann::json(r).dump(); }

MatchRecord record_from_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("match record is not valid JSON: ") + e.what());
  }
  return j.get<MatchRecord>();
}

}  // namespace mbl
