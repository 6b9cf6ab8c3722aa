#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbl/engine.hpp"
#include "mbl/rng.hpp"

namespace mbl::testing {

// A full wall whose first 52 tiles deal `hands` (padded from the leftover
// pool), followed by `draws`; `tail` lists replacement tiles in the order
// they will be drawn from the far end.
inline Wall stacked(const std::array<std::string, 4>& hands, const std::string& draws = "", const std::string& tail = "") {
  std::array<int, kNumKinds> left;
  left.fill(4);
  auto kinds_of = [&](const std::string& s) {
    auto ks = parse_tiles(s);
    for (TileKind k : ks) {
      if (--left[static_cast<std::size_t>(k.index())] < 0) throw std::logic_error("too many " + format_tile(k));
    }
    return ks;
  };
  std::array<std::vector<TileKind>, 4> seat_kinds;
  for (int s = 0; s < 4; ++s) seat_kinds[s] = kinds_of(hands[s]);
  const auto draw_kinds = kinds_of(draws);
  const auto tail_kinds = kinds_of(tail);
  std::vector<TileKind> pool;
  for (int k = 0; k < kNumKinds; ++k)
    for (int i = 0; i < left[static_cast<std::size_t>(k)]; ++i) pool.emplace_back(k);
  Rng rng(77);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<TileKind> order;
  for (auto& ks : seat_kinds) {
    while (ks.size() < 13) {
      ks.push_back(pool.back());
      pool.pop_back();
    }
    order.insert(order.end(), ks.begin(), ks.end());
  }
  order.insert(order.end(), draw_kinds.begin(), draw_kinds.end());
  order.insert(order.end(), pool.begin(), pool.end());
  order.insert(order.end(), tail_kinds.rbegin(), tail_kinds.rend());
  return Wall::from_codes(format_tiles(order, " "));
}

}  // namespace mbl::testing
