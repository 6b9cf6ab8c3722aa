#pragma once

// Loader for the hand-scored golden corpus in tests/data.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbl/scoring.hpp"

namespace mbl::testing {

inline WinContext context_for(const HandInput& in, WinBy by = WinBy::Discard) {
  WinContext ctx;
  ctx.win_by = by;
  if (by == WinBy::Discard || by == WinBy::RobKong) ctx.discarder = 3;
  ctx.winning_tile = in.winning_tile;
  return ctx;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

struct GoldenCase {
  std::string name, tiles, melds, context;
  std::map<int, int> fans;
  int total = 0;
};

inline std::vector<GoldenCase> load_golden(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<GoldenCase> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto f = split(line, '|');
    if (f.size() != 6) throw std::runtime_error("bad golden line: " + line);
    GoldenCase c{f[0], f[1], f[2], f[3], {}, std::stoi(f[5])};
    for (const auto& entry : split(f[4], ';')) {
      const auto star = entry.find('*');
      const std::string name = entry.substr(0, star);
      c.fans[FanTable::standard().id_of(name)] = star == std::string::npos ? 1 : std::stoi(entry.substr(star + 1));
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline WinContext parse_golden_context(const GoldenCase& c, const HandInput& in) {
  WinContext ctx = context_for(in);
  std::istringstream ss(c.context);
  std::string tok;
  while (ss >> tok) {
    if (tok == "last") {
      ctx.last_wall_tile = true;
    } else if (tok.rfind("seat=", 0) == 0) {
      ctx.seat_wind = std::stoi(tok.substr(5));
    } else if (tok.rfind("prev=", 0) == 0) {
      ctx.prevalent_wind = std::stoi(tok.substr(5));
    } else if (tok.rfind("seen=", 0) == 0) {
      ctx.visible_counts[static_cast<std::size_t>(in.winning_tile.kind.index())] =
          static_cast<std::uint8_t>(std::stoi(tok.substr(5)));
    } else {
      ctx.win_by = parse_win_by(tok);
      ctx.discarder = ctx.self_drawn() ? std::nullopt : std::optional<int>(3);
    }
  }
  return ctx;
}

}  // namespace mbl::testing
