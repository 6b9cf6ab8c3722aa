#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mbl/service.hpp"

namespace mbl {

/// HTTP lobby and WebSocket live channel in front of a Service.
///
///   POST /tables                 {"ruleset_id","bots","bot"}      -> table info
///   GET  /tables                                                   -> table list
///   GET  /tables/{id}                                              -> table info
///   POST /tables/{id}/join       {"seat"?, "token"?}              -> {"token","seat","ws"}
///   GET  /replays/{match_id}                                       -> stored record line
///   GET  /rulesets
///   GET  /tables/{id}/ws?token=T  (upgrade) text frames are action lines;
///                                 the server pushes service messages.
class HttpServer {
 public:
  /// Port 0 picks a free port; see port().
  HttpServer(Service& service, const std::string& address, std::uint16_t port, int tick_ms = 100);
  ~HttpServer();

  std::uint16_t port() const;
  /// Serves on the calling thread until stop().
  void run();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mbl
