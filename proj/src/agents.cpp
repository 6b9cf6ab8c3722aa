#include "mbl/agents.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <unordered_map>

namespace mbl {

namespace {

// --- deficiency ---------------------------------------------------------------

constexpr int kNeg = -1000;
// best[s][p]: most held tiles covered by s sets and p pairs that each touch a held tile.
using Best = std::array<std::array<int, 2>, 5>;

Best empty_best() {
  Best b;
  for (auto& row : b) row.fill(kNeg);
  b[0][0] = 0;
  return b;
}

Best combine(const Best& a, const Best& b) {
  Best out;
  for (auto& row : out) row.fill(kNeg);
  for (int s1 = 0; s1 <= 4; ++s1)
    for (int p1 = 0; p1 <= 1; ++p1) {
      if (a[s1][p1] == kNeg) continue;
      for (int s2 = 0; s1 + s2 <= 4; ++s2)
        for (int p2 = 0; p1 + p2 <= 1; ++p2) {
          if (b[s2][p2] == kNeg) continue;
          out[s1 + s2][p1 + p2] = std::max(out[s1 + s2][p1 + p2], a[s1][p1] + b[s2][p2]);
        }
    }
  return out;
}

struct SuitSearch {
  std::array<int, 9> held{};
  std::array<int, 9> cap{};
  Best best = empty_best();

  void run(int i, int here, int next, int sets, int pair, int covered) {
    if (i == 9) {
      best[sets][pair] = std::max(best[sets][pair], covered);
      return;
    }
    const bool touch_chow = i <= 6 && (held[i] || held[i + 1] || held[i + 2]);
    const int max_chows = touch_chow ? 4 - sets : 0;
    for (int n = 0; n <= max_chows; ++n) {
      for (int pung = 0; pung <= (held[i] && sets + n < 4 ? 1 : 0); ++pung) {
        for (int pr = 0; pr <= (held[i] && !pair ? 1 : 0); ++pr) {
          const int w = here + n + 3 * pung + 2 * pr;
          if (w > cap[i]) continue;
          run(i + 1, next + n, n, sets + n + pung, pair + pr, covered + std::min(held[i], w));
        }
      }
    }
  }
};

Best suit_best(const std::array<int, 9>& held, const std::array<int, 9>& cap) {
  thread_local std::unordered_map<std::uint64_t, Best> memo;
  std::uint64_t key = 0;
  for (int i = 0; i < 9; ++i) key = key * 25 + static_cast<std::uint64_t>(held[i] * 5 + cap[i]);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  SuitSearch s;
  s.held = held;
  s.cap = cap;
  s.run(0, 0, 0, 0, 0, 0);
  if (memo.size() > 2'000'000) memo.clear();
  memo.emplace(key, s.best);
  return s.best;
}

Best honor_best(const KindCounts& held, const std::array<int, kNumKinds>& cap) {
  Best total = empty_best();
  for (int k = 27; k < 34; ++k) {
    const int c = held[static_cast<std::size_t>(k)];
    if (!c) continue;
    Best one = empty_best();
    if (cap[static_cast<std::size_t>(k)] >= 3) one[1][0] = std::min(c, 3);
    if (cap[static_cast<std::size_t>(k)] >= 2) one[0][1] = std::min(c, 2);
    total = combine(total, one);
  }
  return total;
}

// Most held tiles a target of `sets` sets plus one pair can cover.
int standard_cover(const KindCounts& held, const std::array<int, kNumKinds>& cap, int sets) {
  Best acc = honor_best(held, cap);
  for (int suit = 0; suit < 3; ++suit) {
    std::array<int, 9> h{}, c{};
    for (int r = 0; r < 9; ++r) {
      h[r] = held[static_cast<std::size_t>(suit * 9 + r)];
      c[r] = cap[static_cast<std::size_t>(suit * 9 + r)];
    }
    acc = combine(acc, suit_best(h, c));
  }
  int out = 0;
  for (int s = 0; s <= sets; ++s)
    for (int p = 0; p <= 1; ++p) out = std::max(out, acc[s][p]);
  return out;
}

std::vector<std::array<int, 3>> knit_perms() {
  std::vector<std::array<int, 3>> out;
  std::array<int, 3> p{0, 1, 2};
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int knit_kind(const std::array<int, 3>& perm, int group, int step) {
  return perm[static_cast<std::size_t>(group)] * 9 + group + 3 * step;
}

constexpr std::array<int, 13> kOrphanKinds = {0, 8, 9, 17, 18, 26, 27, 28, 29, 30, 31, 32, 33};

}  // namespace

int DeficiencyByForm::best() const {
  return std::min({standard, seven_pairs, thirteen_orphans, knitted_straight, honors_knitted});
}

DeficiencyByForm deficiency_by_form(const Hand& hand, const ScoringOptions& opts) {
  DeficiencyByForm out;
  const KindCounts held = hand.concealed_counts();
  std::array<int, kNumKinds> cap;
  cap.fill(4);
  for (const Meld& m : hand.melds)
    for (const Tile& t : m.tiles) --cap[static_cast<std::size_t>(t.kind.index())];
  const int m = static_cast<int>(hand.melds.size());
  const int target = 14 - 3 * m;
  out.standard = target - standard_cover(held, cap, 4 - m);

  if (m <= 1) {
    for (const auto& perm : knit_perms()) {
      KindCounts rest = held;
      auto rest_cap = cap;
      int covered = 0;
      bool possible = true;
      for (int g = 0; g < 3; ++g)
        for (int s = 0; s < 3; ++s) {
          const auto k = static_cast<std::size_t>(knit_kind(perm, g, s));
          if (rest_cap[k] < 1) possible = false;
          if (rest[k]) {
            --rest[k];
            ++covered;
          }
          --rest_cap[k];
        }
      if (!possible) continue;
      covered += standard_cover(rest, rest_cap, 1 - m);
      out.knitted_straight = std::min(out.knitted_straight, target - covered);
    }
  }
  if (m > 0) return out;

  std::vector<int> slots;
  for (auto c : held) {
    if (!c) continue;
    slots.push_back(std::min<int>(c, 2));
    if (!opts.seven_pairs_distinct && c > 2) slots.push_back(std::min(c - 2, 2));
  }
  std::sort(slots.rbegin(), slots.rend());
  int pairs_cover = 0;
  for (std::size_t i = 0; i < slots.size() && i < 7; ++i) pairs_cover += slots[i];
  out.seven_pairs = 14 - pairs_cover;

  int distinct = 0;
  bool doubled = false;
  for (int k : kOrphanKinds) {
    const int c = held[static_cast<std::size_t>(k)];
    if (c) ++distinct;
    if (c >= 2) doubled = true;
  }
  out.thirteen_orphans = 14 - distinct - (doubled ? 1 : 0);

  for (const auto& perm : knit_perms()) {
    int d = 0;
    for (int g = 0; g < 3; ++g)
      for (int s = 0; s < 3; ++s) d += held[static_cast<std::size_t>(knit_kind(perm, g, s))] ? 1 : 0;
    for (int k = 27; k < 34; ++k) d += held[static_cast<std::size_t>(k)] ? 1 : 0;
    out.honors_knitted = std::min(out.honors_knitted, 14 - std::min(d, 14));
  }
  return out;
}

int deficiency(const Hand& hand, const ScoringOptions& opts) { return deficiency_by_form(hand, opts).best(); }

// --- built-in agents ----------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::uint64_t match_seed(std::uint64_t seed, const std::string& match_id, int seat) {
  return split_seed(seed ^ fnv1a(match_id), static_cast<std::uint64_t>(seat));
}

Hand own_hand(const Observation& obs) {
  Hand h;
  h.concealed = obs.hand;
  for (const PublicMeld& pm : obs.melds[static_cast<std::size_t>(obs.seat)]) {
    Meld m;
    m.type = pm.type;
    for (const auto& t : pm.tiles)
      if (t) m.tiles.push_back(*t);
    h.melds.push_back(std::move(m));
  }
  return h;
}

void take(Hand& h, const std::vector<Tile>& tiles) {
  for (const Tile& t : tiles) {
    auto it = std::find(h.concealed.begin(), h.concealed.end(), t);
    if (it != h.concealed.end()) h.concealed.erase(it);
  }
}

// How much a held tile supports the rest of the hand; low values go first.
int usefulness(const Hand& h, Tile t) {
  const KindCounts c = h.concealed_counts();
  const int k = t.kind.index();
  int u = 4 * (c[static_cast<std::size_t>(k)] - 1);
  if (t.kind.is_suited()) {
    const int r = t.kind.rank();
    for (int d : {-2, -1, 1, 2}) {
      if (r + d < 1 || r + d > 9) continue;
      u += c[static_cast<std::size_t>(k + d)] * (std::abs(d) == 1 ? 2 : 1);
    }
    if (r == 1 || r == 9) u -= 1;
  } else {
    u -= 2;
  }
  return u;
}

// Deficiency after the best discard from a 14-equivalent hand.
int best_after_discard(const Hand& h) {
  int best = 99;
  for (std::size_t i = 0; i < h.concealed.size(); ++i) {
    if (i > 0 && h.concealed[i].kind == h.concealed[i - 1].kind) continue;
    Hand x = h;
    x.concealed.erase(x.concealed.begin() + static_cast<std::ptrdiff_t>(i));
    best = std::min(best, deficiency(x));
  }
  return best;
}

}  // namespace

RandomAgent::RandomAgent(std::uint64_t seed, std::string id) : seed_(seed), id_(std::move(id)), rng_(seed) {}

void RandomAgent::begin_match(const std::string& match_id, int seat) { rng_ = Rng(match_seed(seed_, match_id, seat)); }

Action RandomAgent::act(const Observation& obs) {
  if (obs.legal.empty()) throw Error("no legal action offered");
  return obs.legal[rng_.below(obs.legal.size())];
}

GreedyAgent::GreedyAgent(std::uint64_t seed, std::string id) : seed_(seed), id_(std::move(id)), rng_(seed) {}

void GreedyAgent::begin_match(const std::string& match_id, int seat) { rng_ = Rng(match_seed(seed_, match_id, seat)); }

Action GreedyAgent::act(const Observation& obs) {
  if (obs.legal.empty()) throw Error("no legal action offered");
  if (obs.legal.size() == 1) return obs.legal.front();
  for (const Action& a : obs.legal)
    if (a.is_win()) return a;

  Hand h = own_hand(obs);
  std::sort(h.concealed.begin(), h.concealed.end());

  if (obs.request_kind == RequestKind::ActNow) {
    // Discards grouped by kind: equal kinds give equal deficiency.
    std::vector<const Action*> best;
    int best_def = 99, best_use = 0;
    std::unordered_map<int, int> def_by_kind;
    for (const Action& a : obs.legal) {
      if (a.kind != ActionKind::Discard) continue;
      const Tile t = a.tiles.front();
      int d;
      if (auto it = def_by_kind.find(t.kind.index()); it != def_by_kind.end()) {
        d = it->second;
      } else {
        Hand x = h;
        take(x, {t});
        d = deficiency(x);
        def_by_kind.emplace(t.kind.index(), d);
      }
      const int u = usefulness(h, t);
      if (d < best_def || (d == best_def && u < best_use)) {
        best.clear();
        best_def = d;
        best_use = u;
      }
      if (d == best_def && u == best_use) best.push_back(&a);
    }
    for (const Action& a : obs.legal) {
      Hand x = h;
      if (a.kind == ActionKind::ConcealedKong) {
        take(x, a.tiles);
        x.melds.push_back(Meld{MeldType::ConcealedKong, a.tiles, std::nullopt, std::nullopt});
      } else if (a.kind == ActionKind::AddedKong) {
        take(x, a.tiles);
        for (Meld& m : x.melds)
          if (m.type == MeldType::Pung && m.tiles.front().kind == a.tiles.front().kind) {
            m.type = MeldType::AddedKong;
            m.tiles.push_back(a.tiles.front());
          }
      } else {
        continue;
      }
      if (deficiency(x) <= best_def) return a;
    }
    if (best.empty()) return obs.legal[rng_.below(obs.legal.size())];
    return *best[rng_.below(best.size())];
  }

  // Claim window: claim only when it strictly improves the hand.
  const int now = deficiency(h);
  const Action* choice = nullptr;
  int choice_def = now;
  for (const Action& a : obs.legal) {
    if (a.kind != ActionKind::Chow && a.kind != ActionKind::Pung && a.kind != ActionKind::MeldedKong) continue;
    Hand x = h;
    take(x, a.tiles);
    Meld m;
    m.type = a.kind == ActionKind::Chow ? MeldType::Chow
                                        : (a.kind == ActionKind::Pung ? MeldType::Pung : MeldType::MeldedKong);
    m.tiles = a.tiles;
    m.tiles.push_back(*obs.pending_tile);
    x.melds.push_back(std::move(m));
    const int d = a.kind == ActionKind::MeldedKong ? deficiency(x) : best_after_discard(x);
    if (d < choice_def) {
      choice_def = d;
      choice = &a;
    }
  }
  if (choice) return *choice;
  return Action{ActionKind::Pass, {}};
}

ScriptedAgent::ScriptedAgent(std::vector<Event> events, std::string id)
    : events_(std::move(events)), id_(std::move(id)) {}

Action ScriptedAgent::act(const Observation& obs) {
  const std::size_t i = obs.history.size();
  const bool mine = i < events_.size() && events_[i].seat == obs.seat;
  if (obs.request_kind == RequestKind::ClaimOrPass) {
    const ActionKind k = mine ? events_[i].action.kind : ActionKind::Pass;
    if (k == ActionKind::Chow || k == ActionKind::Pung || k == ActionKind::MeldedKong || k == ActionKind::WinDiscard ||
        k == ActionKind::WinRobKong)
      return events_[i].action;
    return Action{ActionKind::Pass, {}};
  }
  if (!mine) throw Error("script has no action for seat " + std::to_string(obs.seat) + " at event " + std::to_string(i));
  return events_[i].action;
}

// --- line protocol --------------------------------------------------------------

namespace {

TileKind chow_middle(const Action& a, TileKind claimed) {
  std::array<int, 3> ks{a.tiles.at(0).kind.index(), a.tiles.at(1).kind.index(), claimed.index()};
  std::sort(ks.begin(), ks.end());
  return TileKind(ks[1]);
}

std::string request_kind_name(RequestKind k) { return k == RequestKind::ActNow ? "ActNow" : "ClaimOrPass"; }

}  // namespace

std::string format_protocol_action(const Action& a, const Observation& obs, std::optional<TileKind> follow_up) {
  auto tail = [&] { return follow_up ? " " + format_tile(*follow_up) : std::string(); };
  switch (a.kind) {
    case ActionKind::Discard:
      return "PLAY " + format_tile(a.tiles.front().kind);
    case ActionKind::Chow:
      if (!obs.pending_tile) throw Error("CHI needs a pending tile");
      return "CHI " + format_tile(chow_middle(a, obs.pending_tile->kind)) + tail();
    case ActionKind::Pung:
      return "PENG" + tail();
    case ActionKind::MeldedKong:
      return "GANG";
    case ActionKind::ConcealedKong:
      return "GANG " + format_tile(a.tiles.front().kind);
    case ActionKind::AddedKong:
      return "BUGANG " + format_tile(a.tiles.front().kind);
    case ActionKind::WinSelfDraw:
    case ActionKind::WinDiscard:
    case ActionKind::WinRobKong:
      return "HU";
    case ActionKind::Pass:
      return "PASS";
    default:
      throw Error("action " + format_action(a) + " has no protocol form");
  }
}

ProtocolReply parse_protocol_reply(std::string_view line, const Observation& obs) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> tok;
  for (std::string w; in >> w;) tok.push_back(w);
  if (tok.empty()) throw ParseError("empty response");
  const std::string& verb = tok[0];
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (tok.size() - 1 < lo || tok.size() - 1 > hi) throw ParseError("wrong number of arguments in '" + std::string(line) + "'");
  };
  auto kind_arg = [&](std::size_t i) { return parse_tile(tok.at(i)); };
  auto pick = [&](auto pred) -> Action {
    for (const Action& a : obs.legal)
      if (pred(a)) return a;
    throw IllegalAction("response '" + std::string(line) + "' matches no legal action", obs.legal);
  };
  const bool claim = obs.request_kind == RequestKind::ClaimOrPass;

  ProtocolReply r;
  if (verb == "PLAY") {
    arity(1, 1);
    const TileKind k = kind_arg(1);
    r.action = pick([&](const Action& a) { return !claim && a.kind == ActionKind::Discard && a.tiles[0].kind == k; });
  } else if (verb == "CHI") {
    arity(1, 2);
    const TileKind mid = kind_arg(1);
    if (tok.size() == 3) r.follow_up = kind_arg(2);
    r.action = pick([&](const Action& a) {
      return a.kind == ActionKind::Chow && obs.pending_tile && chow_middle(a, obs.pending_tile->kind) == mid;
    });
  } else if (verb == "PENG") {
    arity(0, 1);
    if (tok.size() == 2) r.follow_up = kind_arg(1);
    r.action = pick([](const Action& a) { return a.kind == ActionKind::Pung; });
  } else if (verb == "GANG") {
    arity(0, 1);
    if (claim) {
      if (tok.size() == 2 && obs.pending_tile && kind_arg(1) != obs.pending_tile->kind)
        throw IllegalAction("GANG names a tile other than the discard", obs.legal);
      r.action = pick([](const Action& a) { return a.kind == ActionKind::MeldedKong; });
    } else {
      if (tok.size() != 2) throw ParseError("GANG on your own turn needs a tile");
      const TileKind k = kind_arg(1);
      r.action = pick([&](const Action& a) { return a.kind == ActionKind::ConcealedKong && a.tiles[0].kind == k; });
    }
  } else if (verb == "BUGANG") {
    arity(1, 1);
    const TileKind k = kind_arg(1);
    r.action = pick([&](const Action& a) { return a.kind == ActionKind::AddedKong && a.tiles[0].kind == k; });
  } else if (verb == "HU") {
    arity(0, 0);
    r.action = pick([](const Action& a) { return a.is_win(); });
  } else if (verb == "PASS") {
    arity(0, 0);
    r.action = pick([](const Action& a) { return a.kind == ActionKind::Pass; });
  } else {
    throw ParseError("unknown response verb '" + verb + "'");
  }
  return r;
}

std::string protocol_request(const Observation& obs) {
  nlohmann::json o = obs;
  auto moves = nlohmann::json::array();
  for (const Action& a : obs.legal) moves.push_back(format_protocol_action(a, obs));
  o["legal_moves"] = moves;
  nlohmann::json j{{"match_id", obs.match_id},
                   {"seat", obs.seat},
                   {"request_kind", request_kind_name(obs.request_kind)},
                   {"observation", o}};
  return j.dump();
}

ExternalAgent::ExternalAgent(std::string command, int timeout_ms, std::string id)
    : command_(std::move(command)), timeout_ms_(timeout_ms), id_(std::move(id)) {}

ExternalAgent::~ExternalAgent() { stop(); }

void ExternalAgent::start() {
  ::signal(SIGPIPE, SIG_IGN);
  int in[2], out[2];
  if (::pipe(in) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in[0], 0);
    ::dup2(out[1], 1);
    ::close(in[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::close(out[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::fcntl(in[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  buffer_.clear();
}

void ExternalAgent::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
  buffer_.clear();
}

std::string ExternalAgent::exchange(const std::string& request) {
  if (pid_ < 0) start();
  const std::string line = request + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::write(to_child_, line.data() + sent, line.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      stop();
      throw Error("agent process is not accepting input");
    }
    sent += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!reply.empty() && reply.back() == '\r') reply.pop_back();
      return reply;
    }
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      stop();
      throw Error("agent timed out after " + std::to_string(timeout_ms_) + " ms");
    }
    pollfd p{from_child_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(left));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n <= 0) {
      stop();
      throw Error("agent process closed its output");
    }
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

void ExternalAgent::begin_match(const std::string& /*match_id*/, int /*seat*/) { pending_discard_.reset(); }

Action ExternalAgent::act(const Observation& obs) {
  if (pending_discard_ && obs.request_kind == RequestKind::ActNow) {
    const TileKind k = *pending_discard_;
    pending_discard_.reset();
    for (const Action& a : obs.legal)
      if (a.kind == ActionKind::Discard && a.tiles[0].kind == k) return a;
    throw IllegalAction("follow-up discard " + format_tile(k) + " is not held", obs.legal);
  }
  pending_discard_.reset();
  const ProtocolReply r = parse_protocol_reply(exchange(protocol_request(obs)), obs);
  if (r.action.kind == ActionKind::Chow || r.action.kind == ActionKind::Pung) pending_discard_ = r.follow_up;
  return r.action;
}

AgentSpec parse_agent_spec(std::string_view text) {
  AgentSpec spec;
  spec.id = std::string(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto seed_of = [&](std::string_view s) -> std::uint64_t {
    if (s.empty()) return 0;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError("bad agent seed '" + std::string(s) + "'");
    }
  };
  if (head == "random") {
    spec.kind = AgentSpec::Kind::Random;
    spec.seed = seed_of(arg);
  } else if (head == "greedy") {
    spec.kind = AgentSpec::Kind::Greedy;
    spec.seed = seed_of(arg);
  } else if (head == "external") {
    spec.kind = AgentSpec::Kind::External;
    std::string cmd(arg);
    if (const auto at = cmd.rfind('@'); at != std::string::npos) {
      spec.timeout_ms = static_cast<int>(seed_of(std::string_view(cmd).substr(at + 1)));
      cmd.erase(at);
    }
    if (cmd.empty()) throw ParseError("external agent needs a command");
    spec.command = cmd;
  } else {
    throw ParseError("unknown agent '" + std::string(text) + "' (expected random, greedy or external:<cmd>)");
  }
  return spec;
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec) {
  switch (spec.kind) {
    case AgentSpec::Kind::Random:
      return std::make_unique<RandomAgent>(spec.seed, spec.id);
    case AgentSpec::Kind::Greedy:
      return std::make_unique<GreedyAgent>(spec.seed, spec.id);
    case AgentSpec::Kind::External:
      return std::make_unique<ExternalAgent>(spec.command, spec.timeout_ms, spec.id);
  }
  throw Error("unknown agent kind");
}

}  // namespace mbl
