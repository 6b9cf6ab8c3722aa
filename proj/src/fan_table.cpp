#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mbl/scoring.hpp"

namespace mbl {

namespace {

// Generated from data/fan_table_default.txt at configure time.
constexpr std::string_view kDefaultTableText =
#include "fan_table_default.inc"
    ;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

int to_int(std::string_view s, int line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw TableError("line " + std::to_string(line_no) + ": expected integer, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

int point_level(int points) {
  const auto it = std::find(kPointLevels.begin(), kPointLevels.end(), points);
  return it == kPointLevels.end() ? -1 : static_cast<int>(it - kPointLevels.begin());
}

const FanTable& FanTable::standard() {
  static const FanTable table = parse(kDefaultTableText);
  return table;
}

FanTable FanTable::parse(std::string_view text) {
  FanTable table;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '|');
    if (fields.size() != 5)
      throw TableError("line " + std::to_string(line_no) + ": expected 5 '|'-separated fields");
    FanPattern p;
    p.id = to_int(fields[0], line_no);
    p.name = std::string(fields[1]);
    p.points = to_int(fields[2], line_no);
    if (fields[3] == "structural") {
      p.kind = FanKind::Structural;
    } else if (fields[3] == "luck") {
      p.kind = FanKind::LuckContext;
    } else {
      throw TableError("line " + std::to_string(line_no) + ": unknown kind '" + std::string(fields[3]) + "'");
    }
    if (!fields[4].empty())
      for (auto tok : split(fields[4], ',')) p.excludes.push_back(to_int(tok, line_no));
    table.patterns_.push_back(std::move(p));
  }
  std::sort(table.patterns_.begin(), table.patterns_.end(),
            [](const FanPattern& a, const FanPattern& b) { return a.id < b.id; });
  table.validate();
  return table;
}

FanTable FanTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TableError("cannot open fan table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void FanTable::validate() const {
  if (patterns_.size() != kNumPatterns)
    throw TableError("fan table must have " + std::to_string(kNumPatterns) + " patterns, found " +
                     std::to_string(patterns_.size()));
  std::set<std::string> names;
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    const auto& p = patterns_[i];
    if (p.id != static_cast<int>(i) + 1) throw TableError("pattern ids must be 1..81 without gaps or duplicates");
    if (!names.insert(p.name).second) throw TableError("duplicate pattern name '" + p.name + "'");
    if (point_level(p.points) < 0)
      throw TableError("pattern '" + p.name + "' has points " + std::to_string(p.points) + " outside the point levels");
    for (int e : p.excludes)
      if (e < 1 || e > kNumPatterns || e == p.id)
        throw TableError("pattern '" + p.name + "' has invalid exclusion " + std::to_string(e));
  }
}

std::string FanTable::serialize() const {
  std::ostringstream out;
  out << "# id | name | points | kind | excluded pattern ids\n";
  for (const auto& p : patterns_) {
    out << p.id << " | " << p.name << " | " << p.points << " | "
        << (p.kind == FanKind::LuckContext ? "luck" : "structural") << " |";
    for (std::size_t i = 0; i < p.excludes.size(); ++i) out << (i ? "," : " ") << p.excludes[i];
    out << '\n';
  }
  return out.str();
}

int FanTable::id_of(std::string_view name) const {
  for (const auto& p : patterns_)
    if (p.name == name) return p.id;
  throw NotFound("unknown pattern name '" + std::string(name) + "'");
}

FanTable FanTable::with_points(const std::map<int, int>& new_points) const {
  FanTable copy = *this;
  for (const auto& [id, pts] : new_points) {
    if (id < 1 || id > kNumPatterns) throw TableError("unknown pattern id " + std::to_string(id));
    copy.patterns_[static_cast<std::size_t>(id - 1)].points = pts;
  }
  copy.validate();
  return copy;
}

std::vector<std::array<int, 3>> FanTable::diff(const FanTable& base) const {
  std::vector<std::array<int, 3>> out;
  for (const auto& p : patterns_)
    if (p.points != base.points(p.id)) out.push_back({p.id, base.points(p.id), p.points});
  return out;
}

}  // namespace mbl
