#include "mbl/service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "mbl/rng.hpp"

namespace mbl {

namespace {

std::size_t at(int s) { return static_cast<std::size_t>(s); }

std::int64_t steady_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string hex(std::uint64_t v, int digits) {
  static const char* d = "0123456789abcdef";
  std::string s(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i, v >>= 4) s[at(i)] = d[v & 15];
  return s;
}

std::string event_message(const std::string& table_id, const std::string& event, int seat) {
  return nlohmann::json{{"type", "event"}, {"table_id", table_id}, {"event", event}, {"seat", seat}}.dump();
}

}  // namespace

RuleSet ruleset_by_id(const std::string& id) {
  RuleSet r;
  if (id == "classic") {
    r = RuleSet::classic();
  } else if (id == "revised") {
    r = RuleSet::revised();
  } else if (id == "revised-nocomp") {
    r = RuleSet::revised();
    r.compensation.reset();
  } else if (id == "classic-comp") {
    r = RuleSet::classic();
    r.compensation = RuleSet::revised().compensation;
  } else {
    throw NotFound("unknown ruleset '" + id + "'");
  }
  r.id = id;
  return r;
}

std::vector<std::string> ruleset_ids() { return {"classic", "revised", "revised-nocomp", "classic-comp"}; }

// --- stores ----------------------------------------------------------------

void MemoryStore::append(const std::string& match_id, const std::string& line, const std::vector<std::string>& tokens) {
  std::lock_guard lock(mu_);
  if (!lines_.emplace(match_id, line).second) throw StorageError("match " + match_id + " already stored");
  for (const auto& t : tokens) by_token_.emplace(t, match_id);
}

std::optional<std::string> MemoryStore::get(const std::string& match_id) const {
  std::lock_guard lock(mu_);
  auto it = lines_.find(match_id);
  if (it == lines_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryStore::matches_for_token(const std::string& token) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  auto [b, e] = by_token_.equal_range(token);
  for (auto it = b; it != e; ++it) out.push_back(it->second);
  return out;
}

JsonlStore::JsonlStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      index_.append(nlohmann::json::parse(line).at("match_id").get<std::string>(), line, {});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path_.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::ifstream tokens(path_.string() + ".tokens");
  std::string token, match;
  while (tokens >> token >> match) {
    // Tokens are indexed separately so an unknown match is harmless.
    if (index_.get(match)) index_.append("#" + token + "#" + match, "", {token});
  }
}

void JsonlStore::append(const std::string& match_id, const std::string& line, const std::vector<std::string>& tokens) {
  std::lock_guard lock(write_mu_);
  if (index_.get(match_id)) throw StorageError("match " + match_id + " already stored");
  {
    std::ofstream out(path_, std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) throw StorageError("cannot append to " + path_.string());
  }
  {
    std::ofstream out(path_.string() + ".tokens", std::ios::app);
    for (const auto& t : tokens) out << t << ' ' << match_id << '\n';
    out.flush();
    if (!out) throw StorageError("cannot append to " + path_.string() + ".tokens");
  }
  index_.append(match_id, line, {});
  for (const auto& t : tokens) index_.append("#" + t + "#" + match_id, "", {t});
}

std::optional<std::string> JsonlStore::get(const std::string& match_id) const {
  if (match_id.empty() || match_id[0] == '#') return std::nullopt;
  return index_.get(match_id);
}

std::vector<std::string> JsonlStore::matches_for_token(const std::string& token) const {
  std::vector<std::string> out;
  for (const auto& key : index_.matches_for_token(token)) out.push_back(key.substr(token.size() + 2));
  return out;
}

// --- tables ----------------------------------------------------------------

struct Service::Table {
  struct Seat {
    bool human = false;
    std::string token;
    bool connected = false;
    std::int64_t disconnected_at = 0;
    bool taken_over = false;
    std::string bot_spec;
    std::unique_ptr<Agent> bot;
    std::optional<TileKind> follow_up;
    std::int64_t deadline = -1;
  };
  enum class Status { Waiting, Playing, Finished };

  std::mutex mu;
  std::string id;
  std::string ruleset_id;
  RuleSet rules;
  std::uint64_t seed = 0;
  std::optional<Wall> wall;
  std::array<Seat, 4> seats;
  std::optional<GameState> state;
  Status status = Status::Waiting;
  std::optional<std::string> unstored_line;
  std::vector<std::string> unstored_tokens;

  bool bot_controls(int s) const { return !seats[at(s)].human || seats[at(s)].taken_over; }
  static const char* status_name(Status s) {
    return s == Status::Waiting ? "waiting" : s == Status::Playing ? "playing" : "finished";
  }
};

Service::Service(ServiceConfig config, std::shared_ptr<RecordStore> store, Clock clock)
    : config_(std::move(config)), store_(std::move(store)), clock_(clock ? std::move(clock) : Clock(steady_ms)) {
  std::random_device rd;
  token_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (!store_) store_ = std::make_shared<MemoryStore>();
}

Service::~Service() = default;

std::string Service::new_token() {
  std::lock_guard lock(mu_);
  return hex(splitmix64(token_state_), 16) + hex(splitmix64(token_state_), 16);
}

std::unique_ptr<Agent> Service::make_bot(const std::string& spec, int seat) const {
  if (config_.bot_factory) return config_.bot_factory(spec, seat);
  AgentSpec s = parse_agent_spec(spec);
  if (s.kind != AgentSpec::Kind::External) s.seed = split_seed(config_.seed ^ s.seed, static_cast<std::uint64_t>(seat));
  return make_agent(s);
}

std::shared_ptr<Service::Table> Service::find_table(const std::string& table_id) const {
  std::lock_guard lock(mu_);
  auto it = tables_.find(table_id);
  if (it == tables_.end()) throw NotFound("no table '" + table_id + "'");
  return it->second;
}

std::string Service::create_table(const TableOptions& opts) {
  if (opts.bots < 0 || opts.bots > 4) throw ServiceError("bad_request", "bots must be between 0 and 4");
  auto t = std::make_shared<Table>();
  t->rules = ruleset_by_id(opts.ruleset_id);
  t->ruleset_id = opts.ruleset_id;
  t->wall = opts.wall;
  // Humans sit first; bots fill the later seats.
  for (int s = 0; s < 4; ++s) {
    auto& seat = t->seats[at(s)];
    seat.human = s < 4 - opts.bots;
    if (!seat.human) {
      seat.bot_spec = opts.bot;
      seat.bot = make_bot(opts.bot, s);
    }
  }
  std::uint64_t n;
  {
    std::lock_guard lock(mu_);
    n = next_table_++;
    t->id = "t" + std::to_string(n) + "-" + hex(splitmix64(token_state_), 6);
    t->seed = split_seed(config_.seed, n);
    tables_[t->id] = t;
  }
  std::vector<Outgoing> out;
  std::lock_guard lock(t->mu);
  if (opts.bots == 4) start(*t, out);
  deliver(out);
  return t->id;
}

JoinResult Service::join(const std::string& table_id, std::optional<int> seat, const std::optional<std::string>& token) {
  auto t = find_table(table_id);
  std::vector<Outgoing> out;
  JoinResult res;
  std::lock_guard lock(t->mu);
  if (token) {
    for (int s = 0; s < 4; ++s) {
      auto& st = t->seats[at(s)];
      if (!st.human || st.token != *token) continue;
      if (st.connected) throw ServiceError("duplicate_join", "seat " + std::to_string(s) + " is already connected");
      st.connected = true;
      const bool restored = st.taken_over;
      st.taken_over = false;
      res = {*token, s, true};
      out.push_back({*token, nlohmann::json{{"type", "joined"}, {"table_id", t->id}, {"seat", s}, {"token", *token},
                                             {"rejoined", true}, {"ruleset_id", t->ruleset_id}}
                                  .dump()});
      if (restored)
        for (int o = 0; o < 4; ++o)
          if (t->seats[at(o)].human) out.push_back({t->seats[at(o)].token, event_message(t->id, "seat_restored", s)});
      if (t->status == Table::Status::Playing) {
        advance(*t, out);
        broadcast_state(*t, out);
      }
      deliver(out);
      return res;
    }
    {
      std::lock_guard g(mu_);
      if (token_table_.count(*token)) throw ServiceError("duplicate_join", "token already holds a seat elsewhere");
    }
  }
  if (t->status != Table::Status::Waiting) throw ServiceError("table_full", "table " + table_id + " has started");
  int chosen = -1;
  if (seat) {
    if (*seat < 0 || *seat > 3) throw ServiceError("bad_request", "seat must be 0-3");
    const auto& st = t->seats[at(*seat)];
    if (!st.human || !st.token.empty()) throw ServiceError("seat_taken", "seat " + std::to_string(*seat) + " is taken");
    chosen = *seat;
  } else {
    for (int s = 0; s < 4 && chosen < 0; ++s)
      if (t->seats[at(s)].human && t->seats[at(s)].token.empty()) chosen = s;
  }
  if (chosen < 0) throw ServiceError("table_full", "no open seat at " + table_id);
  auto& st = t->seats[at(chosen)];
  st.token = token ? *token : new_token();
  st.connected = true;
  {
    std::lock_guard g(mu_);
    token_table_[st.token] = t->id;
  }
  res = {st.token, chosen, false};
  out.push_back({st.token, nlohmann::json{{"type", "joined"}, {"table_id", t->id}, {"seat", chosen}, {"token", st.token},
                                          {"rejoined", false}, {"ruleset_id", t->ruleset_id}}
                               .dump()});
  const bool full = std::all_of(t->seats.begin(), t->seats.end(),
                                [](const Table::Seat& x) { return !x.human || !x.token.empty(); });
  if (full) start(*t, out);
  deliver(out);
  return res;
}

void Service::start(Table& t, std::vector<Outgoing>& out) {
  Wall wall = t.wall ? *t.wall : build_wall(t.seed, t.rules.flowers);
  t.state.emplace(std::move(wall), t.rules, t.id);
  t.status = Table::Status::Playing;
  for (int s = 0; s < 4; ++s) {
    auto& st = t.seats[at(s)];
    if (st.bot) st.bot->begin_match(t.id, s);
    if (st.human) out.push_back({st.token, event_message(t.id, "started", s)});
  }
  advance(t, out);
  broadcast_state(t, out);
}

void Service::advance(Table& t, std::vector<Outgoing>& out) {
  GameState& g = *t.state;
  const std::int64_t now = clock_();
  while (!g.finished()) {
    if (g.phase() == Phase::AwaitDraw) {
      g.apply(g.current_seat(), Action{ActionKind::Draw, {}});
      continue;
    }
    bool moved = false;
    for (int s : g.seats_to_act()) {
      auto& st = t.seats[at(s)];
      const auto legal = g.legal_actions(s);
      std::optional<Action> a;
      if (legal.size() == 1) {
        a = legal.front();
      } else if (t.bot_controls(s)) {
        if (!st.bot) {
          st.bot = make_bot(config_.takeover_bot, s);
          st.bot->begin_match(t.id, s);
        }
        try {
          a = st.bot->act(g.observe(s));
        } catch (const std::exception& e) {
          g.forfeit(s, e.what());
          break;
        }
        if (std::find(legal.begin(), legal.end(), *a) == legal.end()) {
          g.forfeit(s, "illegal action " + format_action(*a));
          break;
        }
      } else if (st.follow_up && g.phase() == Phase::AwaitDiscard) {
        for (const Action& l : legal)
          if (l.kind == ActionKind::Discard && l.tiles.front().kind == *st.follow_up) a = l;
        st.follow_up.reset();
      }
      if (a) {
        st.deadline = -1;
        g.apply(s, *a);
        moved = true;
        break;
      }
      if (st.deadline < 0)
        st.deadline = now + (g.phase() == Phase::AwaitClaims ? config_.claim_timeout_ms : config_.act_timeout_ms);
    }
    if (!moved) break;
  }
  for (int s = 0; s < 4; ++s) {
    const auto waiting = g.finished() ? std::vector<int>{} : g.seats_to_act();
    if (std::find(waiting.begin(), waiting.end(), s) == waiting.end()) t.seats[at(s)].deadline = -1;
  }
  if (g.finished() && t.status == Table::Status::Playing) settle_and_store(t, out);
}

void Service::broadcast_state(Table& t, std::vector<Outgoing>& out) {
  if (!t.state || t.status != Table::Status::Playing) return;
  const std::int64_t now = clock_();
  const auto waiting = t.state->seats_to_act();
  for (int s = 0; s < 4; ++s) {
    const auto& st = t.seats[at(s)];
    if (!st.human || !st.connected) continue;
    const bool turn = std::find(waiting.begin(), waiting.end(), s) != waiting.end();
    nlohmann::json m{{"type", "observation"},
                     {"table_id", t.id},
                     {"your_turn", turn},
                     {"request", nlohmann::json::parse(protocol_request(t.state->observe(s)))},
                     {"deadline_ms", turn && st.deadline >= 0 ? nlohmann::json(std::max<std::int64_t>(0, st.deadline - now))
                                                              : nlohmann::json(nullptr)}};
    out.push_back({st.token, m.dump()});
  }
}

void Service::settle_and_store(Table& t, std::vector<Outgoing>& out) {
  std::array<std::string, 4> ids;
  std::vector<std::string> tokens;
  for (int s = 0; s < 4; ++s) {
    const auto& st = t.seats[at(s)];
    ids[at(s)] = st.human ? (st.taken_over ? "human+" + config_.takeover_bot : "human") : st.bot_spec;
    if (st.human) tokens.push_back(st.token);
  }
  const MatchRecord rec = make_record(*t.state, t.seed, ids);
  t.status = Table::Status::Finished;
  t.unstored_line = record_to_line(rec);
  t.unstored_tokens = tokens;
  try {
    store_->append(t.id, *t.unstored_line, tokens);
    t.unstored_line.reset();
  } catch (const StorageError&) {
    // Kept on the table; tick() retries.
  }
  const nlohmann::json rj = rec;
  nlohmann::json result = rj.at("result");
  for (auto& f : result["fan_list"]) f["name"] = t.rules.table.at(f["pattern_id"].get<int>()).name;
  for (const auto& token : tokens)
    out.push_back({token, nlohmann::json{{"type", "match_end"},
                                         {"table_id", t.id},
                                         {"match_id", rec.match_id},
                                         {"ruleset_id", t.ruleset_id},
                                         {"result", result},
                                         {"stored", !t.unstored_line.has_value()}}
                              .dump()});
}

void Service::apply_human(Table& t, int seat, const Action& a, std::vector<Outgoing>& out) {
  t.seats[at(seat)].deadline = -1;
  t.state->apply(seat, a);
  advance(t, out);
  broadcast_state(t, out);
}

SubmitResult Service::submit_action(const std::string& token, const std::string& line) {
  const auto table_id = table_of(token);
  if (!table_id) throw ServiceError("unknown_token", "unknown session token");
  auto t = find_table(*table_id);
  std::vector<Outgoing> out;
  SubmitResult res;
  std::lock_guard lock(t->mu);
  int seat = -1;
  for (int s = 0; s < 4; ++s)
    if (t->seats[at(s)].human && t->seats[at(s)].token == token) seat = s;
  auto reject = [&](std::string reason, const std::vector<Action>& legal) {
    res.reason = std::move(reason);
    if (t->state)
      for (const Action& a : legal) res.legal_moves.push_back(format_protocol_action(a, t->state->observe(seat)));
    out.push_back({token, nlohmann::json{{"type", "rejected"}, {"reason", res.reason}, {"legal_moves", res.legal_moves}}.dump()});
    deliver(out);
    return res;
  };
  if (t->status != Table::Status::Playing) return reject("match is not in progress", {});
  if (t->seats[at(seat)].taken_over) return reject("seat is under bot control; rejoin first", {});
  const auto waiting = t->state->seats_to_act();
  if (std::find(waiting.begin(), waiting.end(), seat) == waiting.end()) return reject("not your decision", {});
  const Observation obs = t->state->observe(seat);
  ProtocolReply reply;
  try {
    reply = parse_protocol_reply(line, obs);
  } catch (const IllegalAction& e) {
    return reject(e.what(), obs.legal);
  } catch (const ParseError& e) {
    return reject(e.what(), obs.legal);
  }
  t->seats[at(seat)].follow_up = reply.follow_up;
  res.accepted = true;
  out.push_back({token, nlohmann::json{{"type", "ack"}, {"action", line}}.dump()});
  apply_human(*t, seat, reply.action, out);
  deliver(out);
  return res;
}

std::uint64_t Service::set_listener(const std::string& token, Listener listener) {
  std::lock_guard lock(mu_);
  if (!listener) {
    listeners_.erase(token);
    return 0;
  }
  const std::uint64_t id = next_connection_++;
  listeners_[token] = {id, std::make_shared<Listener>(std::move(listener))};
  return id;
}

std::uint64_t Service::connect(const std::string& token, Listener listener) {
  const auto table_id = table_of(token);
  if (!table_id) throw ServiceError("unknown_token", "unknown session token");
  auto t = find_table(*table_id);
  std::vector<Outgoing> out;
  std::lock_guard lock(t->mu);
  const std::uint64_t id = set_listener(token, std::move(listener));
  for (int s = 0; s < 4; ++s) {
    auto& st = t->seats[at(s)];
    if (!st.human || st.token != token) continue;
    st.connected = true;
    out.push_back({token, nlohmann::json{{"type", "joined"}, {"table_id", t->id}, {"seat", s}, {"token", token},
                                         {"rejoined", true}, {"ruleset_id", t->ruleset_id}}
                              .dump()});
    if (st.taken_over) {
      st.taken_over = false;
      for (int o = 0; o < 4; ++o)
        if (t->seats[at(o)].human) out.push_back({t->seats[at(o)].token, event_message(t->id, "seat_restored", s)});
    }
  }
  if (t->status == Table::Status::Playing) {
    advance(*t, out);
    std::vector<Outgoing> state;
    broadcast_state(*t, state);
    for (auto& o : state)
      if (o.token == token) out.push_back(std::move(o));
  }
  deliver(out);
  return id;
}

void Service::disconnect(const std::string& token, std::optional<std::uint64_t> connection) {
  const auto table_id = table_of(token);
  if (!table_id) return;
  auto t = find_table(*table_id);
  std::lock_guard lock(t->mu);
  if (connection) {
    std::lock_guard g(mu_);
    auto it = listeners_.find(token);
    if (it == listeners_.end() || it->second.first != *connection) return;
  }
  for (auto& st : t->seats)
    if (st.human && st.token == token && st.connected) {
      st.connected = false;
      st.disconnected_at = clock_();
    }
  std::lock_guard g(mu_);
  listeners_.erase(token);
}

void Service::tick() {
  std::vector<std::shared_ptr<Table>> all;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, t] : tables_) all.push_back(t);
  }
  const std::int64_t now = clock_();
  for (auto& tp : all) {
    Table& t = *tp;
    std::vector<Outgoing> out;
    std::lock_guard lock(t.mu);
    if (t.unstored_line) {
      try {
        store_->append(t.id, *t.unstored_line, t.unstored_tokens);
        t.unstored_line.reset();
      } catch (const StorageError&) {
      }
    }
    if (t.status != Table::Status::Playing) continue;
    bool changed = false;
    for (int s = 0; s < 4; ++s) {
      auto& st = t.seats[at(s)];
      if (st.human && !st.connected && !st.taken_over && now - st.disconnected_at >= config_.grace_ms) {
        st.taken_over = true;
        if (!st.bot || st.bot_spec.empty()) {
          st.bot = make_bot(config_.takeover_bot, s);
          st.bot->begin_match(t.id, s);
        }
        for (int o = 0; o < 4; ++o)
          if (t.seats[at(o)].human) out.push_back({t.seats[at(o)].token, event_message(t.id, "seat_taken_over", s)});
        changed = true;
      }
    }
    // Expired human decisions: Pass in a claim window, otherwise discard the
    // drawn tile (or the rightmost one).
    for (int s : t.state->seats_to_act()) {
      auto& st = t.seats[at(s)];
      if (t.bot_controls(s) || st.deadline < 0 || now < st.deadline) continue;
      const auto legal = t.state->legal_actions(s);
      std::optional<Action> pick;
      if (t.state->phase() == Phase::AwaitClaims) {
        pick = Action{ActionKind::Pass, {}};
      } else {
        const Observation obs = t.state->observe(s);
        for (const Action& a : legal) {
          if (a.kind != ActionKind::Discard) continue;
          if (obs.last_drawn && a.tiles.front() == *obs.last_drawn) {
            pick = a;
            break;
          }
          pick = a;  // sorted by id, so the last one is the rightmost
        }
        if (!pick) pick = legal.front();
      }
      st.deadline = -1;
      st.follow_up.reset();
      t.state->apply(s, *pick);
      changed = true;
      break;  // the referee may have moved on; the next tick sees the rest
    }
    if (changed) {
      advance(t, out);
      broadcast_state(t, out);
    }
    deliver(out);
  }
}

void Service::deliver(const std::vector<Outgoing>& out) {
  for (const auto& o : out) {
    std::shared_ptr<Listener> l;
    {
      std::lock_guard lock(mu_);
      auto it = listeners_.find(o.token);
      if (it != listeners_.end()) l = it->second.second;
    }
    if (l) (*l)(o.message);
  }
}

nlohmann::json Service::table_info(const std::string& table_id) const {
  auto t = find_table(table_id);
  std::lock_guard lock(t->mu);
  auto seats = nlohmann::json::array();
  for (int s = 0; s < 4; ++s) {
    const auto& st = t->seats[at(s)];
    seats.push_back({{"seat", s},
                     {"kind", st.human ? "human" : "bot"},
                     {"occupied", !st.human || !st.token.empty()},
                     {"connected", st.human ? st.connected : true},
                     {"bot", st.human ? (st.taken_over ? nlohmann::json(config_.takeover_bot) : nlohmann::json(nullptr))
                                      : nlohmann::json(st.bot_spec)}});
  }
  const bool open = t->status == Table::Status::Waiting &&
                    std::any_of(t->seats.begin(), t->seats.end(), [](const Table::Seat& x) { return x.human && x.token.empty(); });
  return {{"table_id", t->id},
          {"ruleset_id", t->ruleset_id},
          {"status", Table::status_name(t->status)},
          {"open_seats", open},
          {"spectate_only", std::none_of(t->seats.begin(), t->seats.end(), [](const Table::Seat& x) { return x.human; })},
          {"seats", seats},
          {"match_id", t->status == Table::Status::Finished ? nlohmann::json(t->id) : nlohmann::json(nullptr)}};
}

nlohmann::json Service::list_tables() const {
  std::vector<std::string> ids;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, t] : tables_) ids.push_back(id);
  }
  auto out = nlohmann::json::array();
  for (const auto& id : ids) out.push_back(table_info(id));
  return out;
}

std::string Service::get_replay(const std::string& match_id) const {
  if (auto line = store_->get(match_id)) return *line;
  throw NotFound("no stored match '" + match_id + "'");
}

std::optional<GameState> Service::snapshot(const std::string& table_id) const {
  auto t = find_table(table_id);
  std::lock_guard lock(t->mu);
  return t->state;
}

std::optional<std::string> Service::table_of(const std::string& token) const {
  std::lock_guard lock(mu_);
  auto it = token_table_.find(token);
  if (it == token_table_.end()) return std::nullopt;
  return it->second;
}

}  // namespace mbl
