// Minimal external agent for protocol tests. Modes:
//   first   answer Pass when offered, else the first legal move
//   silent  read requests, never answer
//   garbage answer with an unknown verb
//   quit    exit after the first request
#include <iostream>
#include <string>

#include "json.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "first";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "quit") return 0;
    if (mode == "silent") continue;
    if (mode == "garbage") {
      std::cout << "DANCE W1" << std::endl;
      continue;
    }
    const auto req = nlohmann::json::parse(line);
    const auto& moves = req.at("observation").at("legal_moves");
    std::string reply = moves.at(0).get<std::string>();
    for (const auto& m : moves)
      if (m == "Pass") reply = "Pass";
    std::cout << reply << std::endl;
  }
}
