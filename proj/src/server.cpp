#include "mbl/server.hpp"

#include <atomic>
#include <deque>
#include <iostream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace mbl {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

std::string_view target_of(const Request& req) { return {req.target().data(), req.target().size()}; }

std::vector<std::string> split_path(std::string_view target) {
  std::vector<std::string> parts;
  const auto q = target.find('?');
  std::string_view path = target.substr(0, q);
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

std::string query_param(std::string_view target, std::string_view key) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return {};
  std::string_view query = target.substr(q + 1);
  while (!query.empty()) {
    const auto amp = query.find('&');
    std::string_view kv = query.substr(0, amp);
    const auto eq = kv.find('=');
    if (kv.substr(0, eq) == key && eq != std::string_view::npos) return std::string(kv.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    query = query.substr(amp + 1);
  }
  return {};
}

http::status status_for(const std::string& code) {
  if (code == "bad_request") return http::status::bad_request;
  if (code == "unknown_token") return http::status::unauthorized;
  return http::status::conflict;
}

Response make_response(const Request& req, http::status status, std::string body,
                       const char* type = "application/json") {
  Response res{status, req.version()};
  res.set(http::field::server, "mbl");
  res.set(http::field::content_type, type);
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response error_response(const Request& req, http::status status, const std::string& code, const std::string& what) {
  return make_response(req, status, json{{"error", code}, {"message", what}}.dump());
}

Response route(Service& svc, const Request& req) {
  const auto parts = split_path(target_of(req));
  const auto method = req.method();
  try {
    json body = json::object();
    if (!req.body().empty()) body = json::parse(req.body());
    if (parts.size() == 1 && parts[0] == "rulesets" && method == http::verb::get)
      return make_response(req, http::status::ok, json(ruleset_ids()).dump());
    if (parts.size() == 1 && parts[0] == "tables") {
      if (method == http::verb::get) return make_response(req, http::status::ok, svc.list_tables().dump());
      if (method == http::verb::post) {
        TableOptions o;
        o.ruleset_id = body.value("ruleset_id", o.ruleset_id);
        o.bots = body.value("bots", o.bots);
        o.bot = body.value("bot", o.bot);
        if (o.bot.rfind("external", 0) == 0) throw ServiceError("bad_request", "external bots cannot be started remotely");
        const auto id = svc.create_table(o);
        return make_response(req, http::status::created, svc.table_info(id).dump());
      }
    }
    if (parts.size() == 2 && parts[0] == "tables" && method == http::verb::get)
      return make_response(req, http::status::ok, svc.table_info(parts[1]).dump());
    if (parts.size() == 3 && parts[0] == "tables" && parts[2] == "join" && method == http::verb::post) {
      std::optional<int> seat;
      std::optional<std::string> token;
      if (body.contains("seat") && !body["seat"].is_null()) seat = body["seat"].get<int>();
      if (body.contains("token") && !body["token"].is_null()) token = body["token"].get<std::string>();
      const auto r = svc.join(parts[1], seat, token);
      const std::string ws = "/tables/" + parts[1] + "/ws?token=" + r.token;
      return make_response(req, http::status::ok,
                           json{{"table_id", parts[1]},
                                {"token", r.token},
                                {"seat", r.seat},
                                {"rejoined", r.rejoined},
                                {"ws", ws}}
                               .dump());
    }
    if (parts.size() == 2 && parts[0] == "replays" && method == http::verb::get)
      return make_response(req, http::status::ok, svc.get_replay(parts[1]));
    return error_response(req, http::status::not_found, "not_found", "no route for " + std::string(target_of(req)));
  } catch (const NotFound& e) {
    return error_response(req, http::status::not_found, "not_found", e.what());
  } catch (const ServiceError& e) {
    return error_response(req, status_for(e.code()), e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(req, http::status::bad_request, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_response(req, http::status::internal_server_error, "internal", e.what());
  }
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Service& svc, std::string token, std::shared_ptr<std::atomic<bool>> alive)
      : ws_(std::move(socket)), svc_(svc), token_(std::move(token)), alive_(std::move(alive)) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->attach();
      self->read();
    });
  }

 private:
  void attach() {
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto exec = ws_.get_executor();
    // Runs under a table lock on any thread; hop onto the socket's executor.
    connection_ = svc_.connect(token_, [weak, exec, alive = alive_](const std::string& m) {
      if (!*alive) return;
      net::post(exec, [weak, m] {
        if (auto self = weak.lock()) self->send(m);
      });
    });
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed();
        return;
      }
      const std::string line = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        self->svc_.submit_action(self->token_, line);
      } catch (const std::exception& e) {
        self->send(json{{"type", "rejected"}, {"reason", e.what()}, {"legal_moves", json::array()}}.dump());
      }
      self->read();
    });
  }

  void send(std::string m) {
    queue_.push_back(std::move(m));
    if (queue_.size() == 1) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  void closed() {
    if (connection_) svc_.disconnect(token_, connection_);
    connection_ = 0;
  }

  websocket::stream<beast::tcp_stream> ws_;
  Service& svc_;
  std::string token_;
  std::shared_ptr<std::atomic<bool>> alive_;
  std::uint64_t connection_ = 0;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Service& svc, std::shared_ptr<std::atomic<bool>> alive)
      : stream_(std::move(socket)), svc_(svc), alive_(std::move(alive)) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->handle();
    });
  }

  void handle() {
    if (websocket::is_upgrade(req_)) {
      const auto parts = split_path(target_of(req_));
      const std::string token = query_param(target_of(req_), "token");
      const auto table = svc_.table_of(token);
      if (parts.size() == 3 && parts[0] == "tables" && parts[2] == "ws" && table && *table == parts[1]) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), svc_, token, alive_)->run(std::move(req_));
        return;
      }
      write(error_response(req_, http::status::forbidden, "unknown_token", "token does not hold a seat at this table"));
      return;
    }
    write(route(svc_, req_));
  }

  void write(Response res) {
    auto sp = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!sp->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  Service& svc_;
  std::shared_ptr<std::atomic<bool>> alive_;
  beast::flat_buffer buffer_;
  Request req_;
};

}  // namespace

struct HttpServer::Impl {
  Service& svc;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::steady_timer timer{ioc};
  int tick_ms;
  std::thread thread;
  // Cleared on stop so listeners left in the service stop posting here.
  std::shared_ptr<std::atomic<bool>> alive = std::make_shared<std::atomic<bool>>(true);

  Impl(Service& s, const std::string& address, std::uint16_t port, int tick) : svc(s), tick_ms(tick) {
    const tcp::endpoint ep{net::ip::make_address(address), port};
    acceptor.open(ep.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
    accept();
    schedule_tick();
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!acceptor.is_open()) return;
      if (!ec) std::make_shared<HttpSession>(std::move(socket), svc, alive)->run();
      accept();
    });
  }

  void schedule_tick() {
    timer.expires_after(std::chrono::milliseconds(tick_ms));
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      try {
        svc.tick();
      } catch (const std::exception& e) {
        std::cerr << "tick: " << e.what() << '\n';
      }
      schedule_tick();
    });
  }
};

HttpServer::HttpServer(Service& service, const std::string& address, std::uint16_t port, int tick_ms)
    : impl_(std::make_unique<Impl>(service, address, port, tick_ms)) {}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::run() { impl_->ioc.run(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void HttpServer::stop() {
  *impl_->alive = false;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mbl
