#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mbl/agents.hpp"
#include "mbl/engine.hpp"

namespace mbl {

/// A storage write failed; the caller may retry.
class StorageError : public Error {
 public:
  using Error::Error;
};

/// Service-level refusal (full table, taken seat, bad token...).
class ServiceError : public Error {
 public:
  ServiceError(std::string code, const std::string& what) : Error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// "classic", "revised", "revised-nocomp" or "classic-comp".
RuleSet ruleset_by_id(const std::string& id);
std::vector<std::string> ruleset_ids();

/// Append-only match-record store keyed by match_id.
class RecordStore {
 public:
  virtual ~RecordStore() = default;
  /// Stores the exact line; throws StorageError on failure.
  virtual void append(const std::string& match_id, const std::string& line, const std::vector<std::string>& tokens) = 0;
  virtual std::optional<std::string> get(const std::string& match_id) const = 0;
  virtual std::vector<std::string> matches_for_token(const std::string& token) const = 0;
};

class MemoryStore : public RecordStore {
 public:
  void append(const std::string& match_id, const std::string& line, const std::vector<std::string>& tokens) override;
  std::optional<std::string> get(const std::string& match_id) const override;
  std::vector<std::string> matches_for_token(const std::string& token) const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> lines_;
  std::multimap<std::string, std::string> by_token_;
};

/// JSON Lines file, one record per line, plus a "<file>.tokens" index.
/// Existing content is loaded on construction.
class JsonlStore : public RecordStore {
 public:
  explicit JsonlStore(std::filesystem::path path);
  void append(const std::string& match_id, const std::string& line, const std::vector<std::string>& tokens) override;
  std::optional<std::string> get(const std::string& match_id) const override;
  std::vector<std::string> matches_for_token(const std::string& token) const override;

 private:
  std::filesystem::path path_;
  MemoryStore index_;
  std::mutex write_mu_;
};

struct ServiceConfig {
  int act_timeout_ms = 30000;
  int claim_timeout_ms = 10000;
  /// A disconnected human's seat passes to a bot after this long.
  int grace_ms = 60000;
  std::uint64_t seed = 1;
  std::string takeover_bot = "greedy";
  /// Builds bots from their spec text; defaults to parse_agent_spec + make_agent.
  std::function<std::unique_ptr<Agent>(const std::string& spec, int seat)> bot_factory;
};

struct TableOptions {
  std::string ruleset_id = "revised";
  int bots = 3;
  std::string bot = "greedy";
  /// Fixed wall, for tests and reproductions.
  std::optional<Wall> wall;
};

struct JoinResult {
  std::string token;
  int seat = 0;
  bool rejoined = false;
};

struct SubmitResult {
  bool accepted = false;
  std::string reason;
  std::vector<std::string> legal_moves;
};

/// Lobby and referee for live tables. Thread-safe; each table's referee
/// runs under that table's own lock.
class Service {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds
  /// Receives every message for one token, in order. Called with the
  /// table's lock held, so it must not call back into the service.
  using Listener = std::function<void(const std::string& message)>;

  Service(ServiceConfig config, std::shared_ptr<RecordStore> store, Clock clock = {});
  ~Service();

  std::string create_table(const TableOptions& opts);
  JoinResult join(const std::string& table_id, std::optional<int> seat = std::nullopt,
                  const std::optional<std::string>& token = std::nullopt);
  /// One line in the external-agent response grammar.
  SubmitResult submit_action(const std::string& token, const std::string& line);
  std::uint64_t set_listener(const std::string& token, Listener listener);
  /// Installs a listener for a seated token, marks it connected (restoring a
  /// taken-over seat) and sends it the current observation.
  /// Returns a connection id for disconnect().
  std::uint64_t connect(const std::string& token, Listener listener);
  /// With a connection id, ignored unless that connection is still current.
  void disconnect(const std::string& token, std::optional<std::uint64_t> connection = std::nullopt);
  /// Applies expired decision deadlines and grace periods, retries stores.
  void tick();

  nlohmann::json list_tables() const;
  nlohmann::json table_info(const std::string& table_id) const;
  /// Exact stored line; throws NotFound.
  std::string get_replay(const std::string& match_id) const;
  /// Copy of a started table's referee state, for audits.
  std::optional<GameState> snapshot(const std::string& table_id) const;
  std::optional<std::string> table_of(const std::string& token) const;

 private:
  struct Table;
  struct Outgoing {
    std::string token;
    std::string message;
  };

  std::shared_ptr<Table> find_table(const std::string& table_id) const;
  void advance(Table& t, std::vector<Outgoing>& out);
  void start(Table& t, std::vector<Outgoing>& out);
  void broadcast_state(Table& t, std::vector<Outgoing>& out);
  void settle_and_store(Table& t, std::vector<Outgoing>& out);
  void apply_human(Table& t, int seat, const Action& a, std::vector<Outgoing>& out);
  void deliver(const std::vector<Outgoing>& out);
  std::unique_ptr<Agent> make_bot(const std::string& spec, int seat) const;
  std::string new_token();

  ServiceConfig config_;
  std::shared_ptr<RecordStore> store_;
  Clock clock_;
  mutable std::mutex mu_;  // guards the maps below, never held while a table runs
  std::map<std::string, std::shared_ptr<Table>> tables_;
  std::map<std::string, std::string> token_table_;
  std::map<std::string, std::pair<std::uint64_t, std::shared_ptr<Listener>>> listeners_;
  std::uint64_t next_connection_ = 1;
  std::uint64_t next_table_ = 1;
  std::uint64_t token_state_;
};

}  // namespace mbl
