#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mbl/agents.hpp"
#include "mbl/balance.hpp"
#include "mbl/server.hpp"
#include "mbl/service.hpp"
#include "mbl/simulator.hpp"

namespace mbl::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string ruleset = "classic";
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool rules = true) {
  sub->add_option("--seed", c.seed, "Master seed (MBL_SEED overrides)")->capture_default_str();
  sub->add_option("--workers", c.workers, "Parallel matches; results do not depend on it")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  if (rules)
    sub->add_option("--ruleset", c.ruleset, "classic, revised, revised-nocomp or classic-comp")->capture_default_str();
  sub->add_option("--out", c.out, "Directory for artifacts");
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  f << text;
  if (!f) throw Error("cannot write " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

FanTable table_named(const std::string& name) {
  if (name == "default" || name == "classic") return FanTable::standard();
  if (name == "revised") return RuleSet::revised().table;
  return FanTable::load(name);
}

std::array<AgentFactory, 4> factories(const std::vector<std::string>& specs) {
  if (specs.size() != 4) throw CLI::ValidationError("--agents", "needs exactly four agent specs");
  std::array<AgentFactory, 4> f;
  for (std::size_t i = 0; i < 4; ++i) f[i] = factory_for(parse_agent_spec(specs[i]));
  return f;
}

std::array<double, 4> four(const std::vector<double>& v, const std::string& flag) {
  if (v.size() != 4) throw CLI::ValidationError(flag, "needs four comma-separated values");
  return {v[0], v[1], v[2], v[3]};
}

std::string fmt(double x, int digits = 4) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*f", digits, x);
  return b;
}

std::string averages_text(const json& rows) {
  std::ostringstream o;
  for (const auto& r : rows) {
    o << r["agent"].get<std::string>() << "  avg " << fmt(r["average"].get<double>()) << "  rank " << r["rank"];
    if (r.contains("compensated_average"))
      o << "  compensated " << fmt(r["compensated_average"].get<double>()) << "  rank " << r["compensated_rank"];
    o << '\n';
  }
  return o.str();
}

WinBy win_by_flag(const std::string& s) {
  if (s == "selfdraw") return WinBy::SelfDraw;
  if (s == "discard") return WinBy::Discard;
  if (s == "robkong") return WinBy::RobKong;
  if (s == "replacement") return WinBy::ReplacementTile;
  return parse_win_by(s);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mahjong balance lab: simulation, point adaptation, enumeration and live play", "mbl"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file mirroring the flags ([command] sections allowed)");

  Common common;
  // The config embedded in every artifact.
  auto provenance = [&](CLI::App* sub) {
    return json{{"command", sub->get_name()}, {"flags", sub->config_to_str(true, false)}, {"seed", common.seed}};
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Self-play of four identical agents");
  std::string sim_agent = "greedy";
  std::int64_t sim_n = 0;
  bool sim_multiplicity = false;
  sim->add_option("--agent", sim_agent, "random[:seed], greedy[:seed] or external:<cmd>[@ms]")->capture_default_str();
  sim->add_option("--n", sim_n, "Number of matches")->required()->check(CLI::PositiveNumber);
  sim->add_flag("--count-multiplicity", sim_multiplicity, "Count repeated fans once per copy");
  add_common(sim, common);

  // duplicate
  auto* dup = app.add_subcommand("duplicate", "Every wall under all 24 seatings");
  std::vector<std::string> dup_agents;
  std::int64_t dup_rounds = 0;
  dup->add_option("--agents", dup_agents, "Four distinct agent specs")->delimiter(',')->required();
  dup->add_option("--rounds", dup_rounds, "Walls to play")->required()->check(CLI::PositiveNumber);
  add_common(dup, common);

  // fixed-seat
  auto* fix = app.add_subcommand("fixed-seat", "Agents keep their seats; optional per-seat compensation");
  std::vector<std::string> fix_agents;
  std::vector<int> fix_seating{0, 1, 2, 3};
  std::vector<double> fix_comp;
  std::int64_t fix_rounds = 0;
  fix->add_option("--agents", fix_agents, "Four distinct agent specs")->delimiter(',')->required();
  fix->add_option("--seating", fix_seating, "Agent index at each seat")->delimiter(',')->capture_default_str();
  fix->add_option("--compensation", fix_comp, "Per-seat compensation added to averages")->delimiter(',');
  fix->add_option("--rounds", fix_rounds, "Matches to play")->required()->check(CLI::PositiveNumber);
  add_common(fix, common);

  // analyze
  auto* ana = app.add_subcommand("analyze", "Seat statistics and fan frequencies from a match log");
  std::string ana_records;
  bool ana_multiplicity = false;
  ana->add_option("--records", ana_records, "JSON Lines match log")->required()->check(CLI::ExistingFile);
  ana->add_flag("--count-multiplicity", ana_multiplicity, "Count repeated fans once per copy");
  ana->add_option("--out", common.out, "Directory for artifacts");

  // adapt-points
  auto* adapt = app.add_subcommand("adapt-points", "Frequency-driven point adaptation");
  std::string adapt_freq, adapt_table = "default", adapt_write;
  adapt->add_option("--freq", adapt_freq, "pattern_id,name,count[,rank] CSV")->required()->check(CLI::ExistingFile);
  adapt->add_option("--table", adapt_table, "default, revised or a fan-table file")->capture_default_str();
  adapt->add_option("--write-table", adapt_write, "Write the adapted fan table here");

  // derive-compensation
  auto* der = app.add_subcommand("derive-compensation", "Seat compensation from seat averages");
  std::string der_stats;
  std::vector<double> der_avg;
  double der_resolution = 0.1;
  auto* der_stats_opt = der->add_option("--stats", der_stats, "seat_stats.json from simulate")->check(CLI::ExistingFile);
  der->add_option("--averages", der_avg, "Four seat averages")->delimiter(',')->excludes(der_stats_opt);
  der->add_option("--resolution", der_resolution, "Rounding step")->check(CLI::PositiveNumber)->capture_default_str();

  // enumerate
  auto* en = app.add_subcommand("enumerate", "Exact counts of concealed winning hands per pattern");
  std::vector<std::string> en_patterns;
  bool en_no_honors = false, en_loose_pairs = false;
  en->add_option("--patterns", en_patterns, "Pattern names or ids (default: every enumerable one)")->delimiter(',');
  en->add_flag("--no-honors", en_no_honors, "Suits only");
  en->add_flag("--loose-seven-pairs", en_loose_pairs, "Let four of a kind count as two pairs");
  en->add_option("--out", common.out, "Directory for artifacts");

  // score-hand
  auto* sh = app.add_subcommand("score-hand", "Score one winning hand");
  std::string sh_tiles, sh_melds, sh_win_by = "discard", sh_table = "default";
  int sh_seat_wind = 1, sh_prevalent = 1;
  bool sh_last = false, sh_json = false;
  sh->add_option("--tiles", sh_tiles, "Concealed tiles, winning tile last")->required();
  sh->add_option("--melds", sh_melds, "e.g. \"pung:B1B1B1 chow:W2W3W4\"");
  sh->add_option("--win-by", sh_win_by, "selfdraw, discard, robkong or replacement")->capture_default_str();
  sh->add_option("--seat-wind", sh_seat_wind, "1-4 = East..North")->check(CLI::Range(1, 4));
  sh->add_option("--prevalent-wind", sh_prevalent, "1-4 = East..North")->check(CLI::Range(1, 4));
  sh->add_flag("--last-tile", sh_last, "Won on the last tile of the wall");
  sh->add_option("--table", sh_table, "default, revised or a fan-table file")->capture_default_str();
  sh->add_flag("--json", sh_json, "JSON output");

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP lobby and WebSocket play");
  std::string srv_address = "127.0.0.1", srv_store = "matches.jsonl", srv_bot = "greedy";
  int srv_port = 8080;
  ServiceConfig srv_cfg;
  srv->add_option("--address", srv_address)->capture_default_str();
  srv->add_option("--port", srv_port)->check(CLI::Range(0, 65535))->capture_default_str();
  srv->add_option("--store", srv_store, "Match log (JSON Lines)")->capture_default_str();
  srv->add_option("--act-timeout-ms", srv_cfg.act_timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
  srv->add_option("--claim-timeout-ms", srv_cfg.claim_timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
  srv->add_option("--grace-ms", srv_cfg.grace_ms)->check(CLI::NonNegativeNumber)->capture_default_str();
  srv->add_option("--takeover-bot", srv_bot)->capture_default_str();
  srv->add_option("--seed", common.seed)->capture_default_str();

  // replay
  auto* rep = app.add_subcommand("replay", "Re-run a stored match and check it reproduces");
  std::string rep_records, rep_id;
  rep->add_option("--records", rep_records, "JSON Lines match log")->required()->check(CLI::ExistingFile);
  rep->add_option("--match-id", rep_id, "Match to replay (default: every match)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name().empty() ? "" : e.get_name());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mbl: " << e.what() << '\n';
    return 2;
  }
  if (const char* env = std::getenv("MBL_SEED")) {
    try {
      common.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "mbl: MBL_SEED is not an unsigned integer\n";
      return 2;
    }
  }

  bool validating = true;
  try {
    // Flag values that need the library to validate, checked before any work.
    RuleSet rules;
    if (*sim || *dup || *fix) rules = ruleset_by_id(common.ruleset);
    std::array<AgentFactory, 4> agents4;
    if (*dup) agents4 = factories(dup_agents);
    if (*fix) {
      agents4 = factories(fix_agents);
      if (fix_seating.size() != 4) throw CLI::ValidationError("--seating", "needs four indices");
      std::vector<int> sorted = fix_seating;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != std::vector<int>{0, 1, 2, 3}) throw CLI::ValidationError("--seating", "must permute 0,1,2,3");
    }
    std::optional<std::array<double, 4>> fix_compensation;
    if (*fix && !fix_comp.empty()) fix_compensation = four(fix_comp, "--compensation");
    if (*der && der_stats.empty() && der_avg.empty())
      throw CLI::ValidationError("derive-compensation", "give --stats or --averages");
    if (*der && !der_avg.empty()) four(der_avg, "--averages");
    WinBy win_by{};
    if (*sh) win_by = win_by_flag(sh_win_by);
    AgentFactory sim_factory;
    if (*sim) sim_factory = factory_for(parse_agent_spec(sim_agent));
    std::vector<int> en_ids;
    if (*en) {
      const auto& table = FanTable::standard();
      for (const auto& p : en_patterns) {
        const bool numeric = !p.empty() && std::all_of(p.begin(), p.end(), ::isdigit);
        en_ids.push_back(numeric ? std::stoi(p) : table.id_of(p));
      }
      if (en_ids.empty())
        for (int id = 1; id <= kNumPatterns; ++id)
          if (enumerable_pattern(id)) en_ids.push_back(id);
      for (int id : en_ids)
        if (id < 1 || id > kNumPatterns || !enumerable_pattern(id))
          throw CLI::ValidationError("--patterns", "pattern " + std::to_string(id) + " cannot be enumerated");
    }
    if (*srv) parse_agent_spec(srv_bot);
    validating = false;

    if (*sim) {
      SimOptions opts;
      opts.rules = rules;
      opts.workers = common.workers;
      FrequencyTable freq(sim_multiplicity);
      std::ofstream log;
      if (!common.out.empty()) {
        fs::create_directories(common.out);
        log.open(fs::path(common.out) / "matches.jsonl");
      }
      opts.on_record = [&](const MatchRecord& r) {
        freq.add(r);
        if (log.is_open()) log << record_to_line(r) << '\n';
      };
      const SeatStats stats = run_selfplay(sim_factory, sim_n, common.seed, opts);
      out << stats_table(stats);
      if (!common.out.empty()) {
        const fs::path dir(common.out);
        json j = stats_json(stats);
        j["config"] = provenance(sim);
        write_file(dir / "seat_stats.json", j.dump(2) + "\n");
        write_file(dir / "seat_stats.csv", stats_csv(stats));
        write_file(dir / "frequency.csv", frequency_csv(freq, rules.table));
        write_file(dir / "config.toml", sim->config_to_str(true, true));
        if (!log) throw Error("cannot write match log");
      }
      return 0;
    }

    if (*dup || *fix) {
      SimOptions opts;
      opts.rules = rules;
      opts.workers = common.workers;
      json j;
      if (*dup) {
        const auto r = run_duplicate(agents4, dup_rounds, common.seed, opts);
        j = {{"agents", averages_json(r.agents)}, {"seats", stats_json(r.seats)}, {"config", provenance(dup)}};
      } else {
        const std::array<int, 4> seating{fix_seating[0], fix_seating[1], fix_seating[2], fix_seating[3]};
        const auto r = run_fixed_seat(agents4, seating, fix_rounds, common.seed, fix_compensation, opts);
        j = {{"agents", averages_json(r.agents, r.compensated)},
             {"seating", r.seating},
             {"seats", stats_json(r.seats)},
             {"config", provenance(fix)}};
      }
      out << averages_text(j["agents"]);
      if (!common.out.empty()) write_file(fs::path(common.out) / "averages.json", j.dump(2) + "\n");
      return 0;
    }

    if (*ana) {
      std::ifstream in(ana_records);
      SeatStats stats;
      FrequencyTable freq(ana_multiplicity);
      std::string line;
      int line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        MatchRecord r;
        try {
          r = record_from_line(line);
        } catch (const std::exception& e) {
          throw DataError(ana_records + " line " + std::to_string(line_no) + ": " + e.what());
        }
        stats.add(r);
        freq.add(r);
      }
      out << stats_table(stats);
      if (!common.out.empty()) {
        const fs::path dir(common.out);
        json j = stats_json(stats);
        j["config"] = provenance(ana);
        write_file(dir / "seat_stats.json", j.dump(2) + "\n");
        write_file(dir / "seat_stats.csv", stats_csv(stats));
        write_file(dir / "frequency.csv", frequency_csv(freq, FanTable::standard()));
      }
      return 0;
    }

    if (*adapt) {
      std::ifstream in(adapt_freq);
      const FrequencyTable freq = parse_frequency_csv(in);
      const FanTable base = table_named(adapt_table);
      const auto r = adapt_points(freq, base);
      int zero = 0;
      for (int id : r.top)
        if (freq.known[static_cast<std::size_t>(id)] && freq.counts[static_cast<std::size_t>(id)] == 0) ++zero;
      if (zero > 0)
        err << "mbl: warning: " << zero << " of the top " << r.n
            << " patterns were never observed; their order falls back to pattern id\n";
      out << adaptation_report(r, base);
      if (!adapt_write.empty()) write_file(adapt_write, r.apply(base).serialize());
      return 0;
    }

    if (*der) {
      CompensationVector c;
      if (!der_stats.empty()) {
        const json j = json::parse(read_file(der_stats));
        SeatStats s;
        s.total = j.at("matches").get<std::int64_t>();
        for (int i = 0; i < 4; ++i) {
          s.matches[static_cast<std::size_t>(i)] = j.at("seats").at(i).at("matches").get<std::int64_t>();
          s.score_sum[static_cast<std::size_t>(i)] = j.at("seats").at(i).at("score_sum").get<std::int64_t>();
        }
        c = derive_compensation(s, der_resolution);
      } else {
        c = derive_compensation(four(der_avg, "--averages"), der_resolution);
      }
      const auto v = c.values();
      out << json{{"compensation", v}, {"resolution", der_resolution}}.dump() << '\n';
      return 0;
    }

    if (*en) {
      EnumerationFlags flags;
      flags.honors = !en_no_honors;
      flags.strict_seven_pairs = !en_loose_pairs;
      EnumerationStats st;
      const auto counts = enumerate_pattern_counts(en_ids, flags, &st);
      const std::string report = enumeration_report(counts, FanTable::standard());
      out << report;
      out << "# distinct hands " << st.distinct_hands << ", weighted " << st.weighted_hands.str() << '\n';
      if (!common.out.empty()) write_file(fs::path(common.out) / "enumeration.csv", report);
      return 0;
    }

    if (*sh) {
      const FanTable table = table_named(sh_table);
      const HandInput in = parse_hand_input(sh_tiles, sh_melds);
      WinContext ctx;
      ctx.win_by = win_by;
      ctx.seat_wind = sh_seat_wind;
      ctx.prevalent_wind = sh_prevalent;
      ctx.last_wall_tile = sh_last;
      ctx.winning_tile = in.winning_tile;
      ctx.concealed_throughout = std::all_of(in.hand.melds.begin(), in.hand.melds.end(),
                                             [](const Meld& m) { return m.type == MeldType::ConcealedKong; });
      if (!ctx.self_drawn()) ctx.discarder = 1;
      const FanResult r = best_fan(in.hand, in.winning_tile, ctx, table);
      if (sh_json) {
        auto fans = json::array();
        for (const auto& f : r.fans)
          fans.push_back({{"pattern_id", f.pattern_id}, {"name", table.at(f.pattern_id).name}, {"points", f.points},
                          {"multiplicity", f.multiplicity}});
        out << json{{"fans", fans}, {"total", r.total}, {"win", r.win}}.dump() << '\n';
      } else {
        for (const auto& f : r.fans) {
          out << table.at(f.pattern_id).name << "  " << f.points;
          if (f.multiplicity > 1) out << " x" << f.multiplicity;
          out << '\n';
        }
        out << "total " << r.total << (r.win ? "" : " (below the winning threshold)") << '\n';
      }
      return r.fans.empty() ? 1 : 0;
    }

    if (*srv) {
      srv_cfg.seed = common.seed;
      srv_cfg.takeover_bot = srv_bot;
      // Block the stop signals before the server thread exists so only sigwait sees them.
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      Service service(srv_cfg, std::make_shared<JsonlStore>(srv_store));
      HttpServer server(service, srv_address, static_cast<std::uint16_t>(srv_port));
      server.start();
      out << "listening on " << srv_address << ':' << server.port() << std::endl;
      int sig = 0;
      sigwait(&set, &sig);
      server.stop();
      return 0;
    }

    if (*rep) {
      std::ifstream in(rep_records);
      std::string line;
      int replayed = 0, mismatched = 0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const MatchRecord rec = record_from_line(line);
        if (!rep_id.empty() && rec.match_id != rep_id) continue;
        std::array<std::unique_ptr<Agent>, 4> scripts;
        std::array<Agent*, 4> seats{};
        for (int s = 0; s < 4; ++s) {
          scripts[static_cast<std::size_t>(s)] = std::make_unique<ScriptedAgent>(rec.events);
          seats[static_cast<std::size_t>(s)] = scripts[static_cast<std::size_t>(s)].get();
        }
        RuleSet rr = ruleset_by_id(rec.ruleset_id);
        const auto again = run_match(Wall(rec.wall), seats, rr, rec.match_id, rec.seed);
        const bool same = again.result.scores == rec.result.scores && again.compensated_scores == rec.compensated_scores &&
                          json(again.events) == json(rec.events);
        ++replayed;
        if (!same) ++mismatched;
        out << rec.match_id << "  scores " << json(again.result.scores).dump() << (same ? "  reproduced" : "  MISMATCH")
            << '\n';
      }
      if (replayed == 0) throw NotFound(rep_id.empty() ? "no matches in " + rep_records : "no match '" + rep_id + "'");
      return mismatched == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "mbl: " << e.what() << '\n';
    return validating ? 2 : 1;
  }
  return 0;
}

}  // namespace mbl::cli
