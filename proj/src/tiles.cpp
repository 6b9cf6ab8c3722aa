#include "mbl/tiles.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "mbl/rng.hpp"

namespace mbl {

namespace {

constexpr std::string_view kCategoryLetters = "WBTFJH";

int max_rank(Category c) {
  switch (c) {
    case Category::Characters:
    case Category::Dots:
    case Category::Bamboo:
      return 9;
    case Category::Winds:
      return 4;
    case Category::Dragons:
      return 3;
    case Category::Flowers:
      return 8;
  }
  return 0;
}

}  // namespace

TileKind TileKind::make(Category c, int rank) {
  if (rank < 1 || rank > max_rank(c)) throw ParseError("rank out of range for category");
  switch (c) {
    case Category::Characters:
    case Category::Dots:
    case Category::Bamboo:
      return suited(c, rank);
    case Category::Winds:
      return wind(rank);
    case Category::Dragons:
      return dragon(rank);
    case Category::Flowers:
      return flower(rank);
  }
  return {};
}

TileKind parse_tile(std::string_view code) {
  if (code.size() != 2) throw ParseError("malformed tile code '" + std::string(code) + "'");
  const auto letter = kCategoryLetters.find(code[0]);
  if (letter == std::string_view::npos || !std::isdigit(static_cast<unsigned char>(code[1])))
    throw ParseError("malformed tile code '" + std::string(code) + "'");
  const auto cat = static_cast<Category>(letter);
  const int rank = code[1] - '0';
  if (rank < 1 || rank > max_rank(cat))
    throw ParseError("tile rank out of range in '" + std::string(code) + "'");
  return TileKind::make(cat, rank);
}

std::string format_tile(TileKind kind) {
  std::string s(2, '?');
  s[0] = kCategoryLetters[static_cast<std::size_t>(kind.category())];
  s[1] = static_cast<char>('0' + kind.rank());
  return s;
}

Tile parse_physical_tile(std::string_view code) {
  const auto dot = code.find('.');
  if (dot == std::string_view::npos) return Tile{parse_tile(code), 0};
  const TileKind kind = parse_tile(code.substr(0, dot));
  const auto rest = code.substr(dot + 1);
  if (rest.size() != 1 || rest[0] < '0' || rest[0] > '3')
    throw ParseError("malformed copy index in '" + std::string(code) + "'");
  const int copy = rest[0] - '0';
  if (kind.is_flower() && copy != 0) throw ParseError("flower copy must be 0 in '" + std::string(code) + "'");
  return Tile{kind, static_cast<std::uint8_t>(copy)};
}

std::string format_physical_tile(Tile tile) {
  return format_tile(tile.kind) + "." + std::to_string(tile.copy);
}

std::vector<TileKind> parse_tiles(std::string_view text) {
  std::vector<TileKind> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    if (i + 1 >= text.size()) throw ParseError("truncated tile code '" + std::string(text.substr(i)) + "'");
    out.push_back(parse_tile(text.substr(i, 2)));
    i += 2;
  }
  return out;
}

std::string format_tiles(std::span<const TileKind> kinds, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += sep;
    out += format_tile(kinds[i]);
  }
  return out;
}

std::vector<TileKind> all_kinds(bool flowers) {
  std::vector<TileKind> out;
  const int n = flowers ? kNumKindsWithFlowers : kNumKinds;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.emplace_back(i);
  return out;
}

std::string_view meld_type_name(MeldType t) {
  switch (t) {
    case MeldType::Chow:
      return "Chow";
    case MeldType::Pung:
      return "Pung";
    case MeldType::MeldedKong:
      return "MeldedKong";
    case MeldType::ConcealedKong:
      return "ConcealedKong";
    case MeldType::AddedKong:
      return "AddedKong";
  }
  return "?";
}

TileKind Meld::base() const {
  TileKind lo = tiles.front().kind;
  for (const Tile& t : tiles) lo = std::min(lo, t.kind);
  return lo;
}

void Meld::validate() const {
  const bool claimed = type != MeldType::ConcealedKong;
  if (claimed != claimed_from.has_value()) throw Error("meld claim provenance inconsistent with type");
  if (type == MeldType::Chow) {
    if (tiles.size() != 3) throw Error("chow must have 3 tiles");
    std::array<TileKind, 3> k{tiles[0].kind, tiles[1].kind, tiles[2].kind};
    std::sort(k.begin(), k.end());
    if (!k[0].is_suited() || k[0].suit() != k[2].suit() || k[1].index() != k[0].index() + 1 ||
        k[2].index() != k[0].index() + 2)
      throw Error("chow tiles must be three consecutive ranks of one suit");
    return;
  }
  const std::size_t want = type == MeldType::Pung ? 3 : 4;
  if (tiles.size() != want) throw Error("pung/kong has wrong tile count");
  for (const Tile& t : tiles)
    if (t.kind != tiles.front().kind || t.kind.is_flower()) throw Error("pung/kong tiles must be identical kinds");
}

KindCounts Hand::concealed_counts() const {
  KindCounts c{};
  for (const Tile& t : concealed)
    if (!t.kind.is_flower()) ++c[static_cast<std::size_t>(t.kind.index())];
  return c;
}

Tile Wall::draw() {
  if (empty()) throw InvalidWall("draw from exhausted wall");
  return tiles_[draw_cursor_++];
}

Tile Wall::draw_tail() {
  if (empty()) throw InvalidWall("replacement draw from exhausted wall");
  ++tail_taken_;
  return tiles_[tiles_.size() - tail_taken_];
}

std::string Wall::dump(bool with_copies) const {
  std::string out;
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (i) out += ' ';
    out += with_copies ? format_physical_tile(tiles_[i]) : format_tile(tiles_[i].kind);
  }
  return out;
}

Wall Wall::from_codes(std::string_view text) {
  std::vector<Tile> tiles;
  std::istringstream in{std::string(text)};
  std::string token;
  std::array<int, kNumKindsWithFlowers> seen{};
  while (in >> token) {
    Tile t = parse_physical_tile(token);
    if (token.find('.') == std::string::npos) t.copy = static_cast<std::uint8_t>(seen[static_cast<std::size_t>(t.kind.index())]);
    ++seen[static_cast<std::size_t>(t.kind.index())];
    tiles.push_back(t);
  }
  return Wall(std::move(tiles));
}

std::vector<Tile> full_tile_set(bool flowers) {
  std::vector<Tile> tiles;
  tiles.reserve(flowers ? 144 : 136);
  for (int k = 0; k < kNumKinds; ++k)
    for (int c = 0; c < kCopiesPerKind; ++c) tiles.push_back(Tile{TileKind(k), static_cast<std::uint8_t>(c)});
  if (flowers)
    for (int k = kNumKinds; k < kNumKindsWithFlowers; ++k) tiles.push_back(Tile{TileKind(k), 0});
  return tiles;
}

Wall build_wall(std::uint64_t seed, bool flowers) {
  std::vector<Tile> tiles = full_tile_set(flowers);
  Rng rng(seed);
  for (std::size_t i = tiles.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(tiles[i], tiles[j]);
  }
  return Wall(std::move(tiles));
}

Deal deal(Wall wall) {
  if (wall.draw_cursor() != 0 || wall.tail_taken() != 0) throw InvalidWall("deal requires an untouched wall");
  if (wall.size() < 53) throw InvalidWall("wall too short to deal: " + std::to_string(wall.size()) + " tiles");
  Deal d;
  for (int seat = 0; seat < 4; ++seat) {
    auto& hand = d.hands[static_cast<std::size_t>(seat)];
    hand.concealed.reserve(14);
    for (int i = 0; i < 13; ++i) hand.concealed.push_back(wall.draw());
  }
  d.wall = std::move(wall);
  return d;
}

}  // namespace mbl
