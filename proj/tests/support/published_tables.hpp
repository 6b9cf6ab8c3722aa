#pragma once

// Pattern lists transcribed from the published frequency and adaptation tables.

#include <array>
#include <string_view>

namespace published {

// The most frequent patterns of champion self-play, grouped by original
// points from 24 down to 1. The table prints 44 names for a top 43; the
// synthetic ranking places the last 1-point name 44th.
inline constexpr std::array<std::string_view, 44> kTopFrequent = {
    "Seven Pairs", "Greater Honours and Knitted Tiles", "Full Flush",
    "Pure Straight", "Pure Shifted Chows",
    "Lesser Honours and Knitted Tiles", "Knitted Straight", "Upper Four", "Lower Four",
    "Mixed Triple Chow", "Chicken Hand", "Rob Kong", "Mixed Straight",
    "All Pungs", "Half Flush", "Mixed Shifted Chows", "All Types", "Melded Hand", "Two Dragon Pungs",
    "Outside Hand", "Fully Concealed Hand", "Last Tile",
    "Dragon Pung", "Prevalent Wind", "Seat Wind", "Concealed Hand", "All Chows", "Tile Hog",
    "Mixed Double Pung", "Two Concealed Pungs", "Concealed Kong", "All Simples",
    "Pure Double Chow", "Mixed Double Chow", "Short Straight", "Two Terminal Chows",
    "Pung of Terminals or Honours", "Melded Kong", "One Voided Suit", "No Honours", "Edge Wait",
    "Closed Wait", "Single Wait", "Self-Draw"};

struct Change {
  std::string_view name;
  int before;
  int after;
};

inline constexpr std::array<Change, 11> kAdaptation = {{
    {"Reversible Tiles", 8, 12},
    {"Mixed Shifted Pungs", 8, 12},
    {"Lesser Honours and Knitted Tiles", 12, 8},
    {"Knitted Straight", 12, 8},
    {"Upper Four", 12, 8},
    {"Lower Four", 12, 8},
    {"Pure Straight", 16, 12},
    {"Pure Shifted Chows", 16, 12},
    {"Seven Pairs", 24, 16},
    {"Greater Honours and Knitted Tiles", 24, 16},
    {"Full Flush", 24, 16},
}};

// Seat win rates and average scores of champion self-play over 557,056 games.
inline constexpr int kSelfPlayGames = 557056;
inline constexpr std::array<double, 4> kSeatWinRates = {0.2619, 0.2521, 0.2385, 0.2245};
inline constexpr double kPrintedHalfWidth = 0.0011;
inline constexpr std::array<double, 4> kSeatAverages = {1.0, 0.4, -0.3, -1.1};
inline constexpr std::array<double, 4> kCompensation = {-1.0, -0.4, 0.3, 1.1};

}  // namespace published
