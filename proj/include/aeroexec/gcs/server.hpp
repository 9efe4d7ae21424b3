#pragma once

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <memory>
#include <thread>
#include <vector>

#include "aeroexec/gcs/session.hpp"

namespace aeroexec::gcs {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  double frame_rate_hz = 10.0;
  int threads = 2;
};

inline http::status status_for(Errc c) {
  switch (c) {
    case Errc::NotIdle:
    case Errc::IllegalLifecycle:
    case Errc::SessionClosed: return http::status::conflict;
    case Errc::SchemaError:
    case Errc::SyntaxError:
    case Errc::UnsupportedVersion:
    case Errc::BadParam:
    case Errc::BadConfig:
    case Errc::TypeMismatch:
    case Errc::MissingKey: return http::status::bad_request;
    default: return http::status::internal_server_error;
  }
}

inline json error_body(Errc c, const std::string& message, const std::string& path) {
  json j{{"v", 1}, {"error", to_string(c)}, {"message", message}};
  if (!path.empty()) j["path"] = path;
  return j;
}

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

/// Routes one HTTP request. Independent of the transport so it can be called directly.
inline Response handle_request(SimSession& session, const Request& req) {
  Response res{http::status::ok, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  auto reply = [&](http::status s, const json& body) {
    res.result(s);
    res.body() = body.dump();
    res.prepare_payload();
    return res;
  };
  const std::string target(req.target());
  try {
    if (req.method() == http::verb::options) {
      res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return reply(http::status::no_content, json::object());
    }
    auto body = [&] {
      try {
        return json::parse(req.body());
      } catch (const json::parse_error& e) {
        throw Error(Errc::SyntaxError, e.what(), "body");
      }
    };
    auto check_version = [](const json& j) {
      if (j.is_object() && j.contains("v") && j["v"] != 1) throw Error(Errc::UnsupportedVersion, "payload version must be 1", "v");
    };
    if (target == "/state" && req.method() == http::verb::get) {
      const auto f = session.latest_frame();
      return reply(http::status::ok, frame_to_json(*f, f->frame));
    }
    if (target == "/event" && req.method() == http::verb::post) {
      const auto j = body();
      check_version(j);
      if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        throw Error(Errc::BadParam, "body needs a string 'name'", "name");
      return reply(http::status::ok, session.post_event(j["name"].get<std::string>()).to_json());
    }
    if (target == "/sim" && req.method() == http::verb::post) {
      const auto j = body();
      check_version(j);
      if (!j.is_object() || !j.contains("cmd") || !j["cmd"].is_string())
        throw Error(Errc::BadParam, "body needs a string 'cmd'", "cmd");
      return reply(http::status::ok, session.command(j["cmd"].get<std::string>(), j.value("arg", json())));
    }
    if (target == "/plan" && req.method() == http::verb::post) {
      session.upload_plan(req.body());
      const auto plan = session.staged_plan();
      return reply(http::status::ok, {{"v", 1}, {"ok", true}, {"waypoints", plan ? plan->waypoints.size() : 0}});
    }
    return reply(http::status::not_found, error_body(Errc::BadParam, "no route for " + std::string(req.method_string()) + " " + target, ""));
  } catch (const Error& e) {
    return reply(status_for(e.code()), error_body(e.code(), e.what(), e.path()));
  } catch (const std::exception& e) {
    return reply(http::status::internal_server_error, {{"v", 1}, {"error", "Internal"}, {"message", e.what()}});
  }
}

namespace detail {

/// Sends the newest frame every period. At most one write is in flight; a
/// tick that finds the socket busy is skipped, so a slow reader never builds
/// a backlog and `seq` stays gap-free.
class TelemetrySocket : public std::enable_shared_from_this<TelemetrySocket> {
 public:
  TelemetrySocket(tcp::socket&& socket, SimSession& session, std::chrono::nanoseconds period)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(session), period_(period) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send();
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      self->in_.consume(self->in_.size());
      self->read();
    });
  }

  void send() {
    if (closed_) return;
    if (!writing_) {
      writing_ = true;
      out_ = frame_to_json(*session_.latest_frame(), seq_++).dump();
      ws_.text(true);
      ws_.async_write(net::buffer(out_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->writing_ = false;
        if (ec) {
          self->closed_ = true;
          self->timer_.cancel();
        }
      });
    }
    timer_.expires_after(period_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->send();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  SimSession& session_;
  std::chrono::nanoseconds period_;
  beast::flat_buffer in_;
  std::string out_;
  std::uint64_t seq_ = 0;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, SimSession& session, std::chrono::nanoseconds period)
      : stream_(std::move(socket)), session_(session), period_(period) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->dispatch();
    });
  }

  void dispatch() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/telemetry") {
        stream_.expires_never();
        std::make_shared<TelemetrySocket>(stream_.release_socket(), session_, period_)->run(std::move(req_));
        return;
      }
    }
    res_ = std::make_shared<Response>(handle_request(session_, req_));
    http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec || !self->res_->keep_alive()) return self->close();
      self->read();
    });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  SimSession& session_;
  std::chrono::nanoseconds period_;
  beast::flat_buffer buffer_;
  Request req_;
  std::shared_ptr<Response> res_;
};

}  // namespace detail

class GcsServer {
 public:
  GcsServer(SimSession& session, ServerConfig config = {})
      : session_(session), cfg_(std::move(config)), acceptor_(net::make_strand(ioc_)) {
    if (!(cfg_.frame_rate_hz > 0)) throw Error(Errc::BadConfig, "frame_rate_hz must be > 0", "frame_rate_hz");
    const tcp::endpoint ep{net::ip::make_address(cfg_.address), cfg_.port};
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }
  ~GcsServer() { stop(); }

  GcsServer(const GcsServer&) = delete;
  GcsServer& operator=(const GcsServer&) = delete;

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() {
    accept();
    for (int i = 0; i < std::max(1, cfg_.threads); ++i) threads_.emplace_back([this] { ioc_.run(); });
  }

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait() {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
  }

  void stop() {
    ioc_.stop();
    wait();
    threads_.clear();
  }

  net::io_context& context() noexcept { return ioc_; }

 private:
  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) {
        const auto period = std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::duration<double>(1.0 / cfg_.frame_rate_hz));
        std::make_shared<detail::HttpConnection>(std::move(socket), session_, period)->run();
      }
      if (acceptor_.is_open()) accept();
    });
  }

  SimSession& session_;
  ServerConfig cfg_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  std::vector<std::thread> threads_;
};

}  // namespace aeroexec::gcs
