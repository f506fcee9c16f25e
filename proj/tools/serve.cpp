// Copyright 2026 The vrmeet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Network front end for the session engine: raw NDJSON over TCP and
// WebSocket on one port, plus static files under /room/. Everything runs on
// one io_context thread, so calls into the engine are naturally serialized.
#include "serve.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "vrmeet/vrmeet.h"

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;

namespace {

class Hub;

class Conn : public std::enable_shared_from_this<Conn> {
 public:
  Conn(Hub& hub, std::uint64_t id) : hub_(hub), id_(id) {}
  virtual ~Conn() = default;

  // `line` carries its trailing newline.
  void send(std::string line, bool close_after);

 protected:
  virtual void write_one(const std::string& line) = 0;
  virtual void shutdown() = 0;
  void written(beast::error_code ec);
  void received(std::string_view line);
  void lost();

  Hub& hub_;
  std::uint64_t id_;

 private:
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closing_ = false;
};

class Hub {
 public:
  Hub(asio::io_context& io, vrm_server* server, fs::path room_dir, std::string manifest_json)
      : io_(io),
        server_(server),
        room_dir_(std::move(room_dir)),
        manifest_json_(std::move(manifest_json)),
        start_(std::chrono::steady_clock::now()) {}

  double now_ms() const {
    const auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

  void attach(const std::shared_ptr<Conn>& c, std::uint64_t id) {
    conns_[id] = c;
    check(vrm_server_open(server_, id, now_ms()));
    dispatch();
  }
  std::uint64_t next_id() { return next_id_++; }

  void receive(std::uint64_t id, std::string_view line) {
    if (!conns_.contains(id)) return;
    check(vrm_server_receive(server_, id, line.data(), line.size(), now_ms()));
    dispatch();
  }

  void closed(std::uint64_t id) {
    if (conns_.erase(id) == 0) return;
    check(vrm_server_close(server_, id, now_ms()));
    dispatch();
  }

  void tick() {
    check(vrm_server_tick(server_, now_ms()));
    dispatch();
  }

  const fs::path& room_dir() const { return room_dir_; }
  const std::string& manifest_json() const { return manifest_json_; }
  asio::io_context& io() { return io_; }

 private:
  static void check(vrm_status s) {
    if (s != VRM_OK) std::cerr << "vrmeet serve: " << vrm_last_error() << '\n';
  }

  void dispatch() {
    std::uint64_t conn = 0;
    char* line = nullptr;
    int close_after = 0;
    while (vrm_server_poll(server_, &conn, &line, &close_after)) {
      std::string text(line);
      vrm_string_free(line);
      const auto it = conns_.find(conn);
      if (it == conns_.end()) continue;
      auto c = it->second;
      // The engine already dropped this connection; no CLOSE event later.
      if (close_after) conns_.erase(it);
      c->send(std::move(text), close_after != 0);
    }
  }

  asio::io_context& io_;
  vrm_server* server_;
  fs::path room_dir_;
  std::string manifest_json_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::uint64_t, std::shared_ptr<Conn>> conns_;
  std::uint64_t next_id_ = 1;
};

void Conn::send(std::string line, bool close_after) {
  if (closing_) return;
  if (!line.empty()) queue_.push_back(std::move(line));
  closing_ = close_after;
  if (!writing_) written({});
}

void Conn::written(beast::error_code ec) {
  if (ec) {
    lost();
    return;
  }
  if (writing_ && !queue_.empty()) queue_.pop_front();
  writing_ = !queue_.empty();
  if (writing_) {
    write_one(queue_.front());
  } else if (closing_) {
    shutdown();
  }
}

void Conn::received(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (!line.empty()) hub_.receive(id_, line);
}

void Conn::lost() { hub_.closed(id_); }

class TcpConn : public Conn {
 public:
  TcpConn(Hub& hub, std::uint64_t id, tcp::socket socket, std::string prefix)
      : Conn(hub, id), socket_(std::move(socket)), buffer_(std::move(prefix)) {}

  void start() { read(); }

 private:
  void read() {
    asio::async_read_until(
        socket_, asio::dynamic_buffer(buffer_), '\n',
        [self = std::static_pointer_cast<TcpConn>(shared_from_this())](
            beast::error_code ec, std::size_t n) {
          if (ec) {
            self->lost();
            return;
          }
          const std::string line = self->buffer_.substr(0, n - 1);
          self->buffer_.erase(0, n);
          self->received(line);
          self->read();
        });
  }

  void write_one(const std::string& line) override {
    asio::async_write(socket_, asio::buffer(line),
                      [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                        written(ec);
                      });
  }

  void shutdown() override {
    beast::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
  }

  tcp::socket socket_;
  std::string buffer_;
};

class WsConn : public Conn {
 public:
  WsConn(Hub& hub, std::uint64_t id, tcp::socket socket)
      : Conn(hub, id), ws_(std::move(socket)) {}

  void start(http::request<http::string_body> req) {
    ws_.text(true);
    ws_.async_accept(req, [self = std::static_pointer_cast<WsConn>(shared_from_this())](
                              beast::error_code ec) {
      if (ec) return;
      self->hub_.attach(self, self->id_);
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = std::static_pointer_cast<WsConn>(shared_from_this())](
                                beast::error_code ec, std::size_t) {
      if (ec) {
        self->lost();
        return;
      }
      const std::string msg = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      std::string_view rest = msg;
      while (!rest.empty()) {
        const auto nl = rest.find('\n');
        self->received(rest.substr(0, nl));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      }
      self->read();
    });
  }

  void write_one(const std::string& line) override {
    // One message per text frame, without the stream delimiter.
    std::string_view frame = line;
    if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
    ws_.async_write(asio::buffer(frame.data(), frame.size()),
                    [self = shared_from_this(), this](beast::error_code ec, std::size_t) {
                      written(ec);
                    });
  }

  void shutdown() override {
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
};

std::string content_type(const fs::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  return "application/octet-stream";
}

// Maps a /room/ target to a file under `root`, or nothing if it escapes it.
std::optional<fs::path> resolve_static(const fs::path& root, std::string_view rel) {
  if (const auto q = rel.find_first_of("?#"); q != std::string_view::npos) {
    rel = rel.substr(0, q);
  }
  const fs::path p(std::string{rel});
  for (const auto& part : p) {
    if (part == ".." || part.is_absolute() || part.has_root_name()) return std::nullopt;
  }
  std::error_code ec;
  const fs::path full = fs::weakly_canonical(root / p, ec);
  if (ec) return std::nullopt;
  const auto [r, _] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
  if (r != root.end()) return std::nullopt;
  if (!fs::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

class HttpConn : public std::enable_shared_from_this<HttpConn> {
 public:
  HttpConn(Hub& hub, tcp::socket socket, std::string prefix)
      : hub_(hub), socket_(std::move(socket)) {
    const auto dst = buffer_.prepare(prefix.size());
    asio::buffer_copy(dst, asio::buffer(prefix));
    buffer_.commit(prefix.size());
  }

  void start() {
    http::async_read(socket_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->route();
                     });
  }

 private:
  void route() {
    const std::string target(req_.target());
    if (target == "/session" && websocket::is_upgrade(req_)) {
      auto ws = std::make_shared<WsConn>(hub_, hub_.next_id(), std::move(socket_));
      ws->start(std::move(req_));
      return;
    }
    constexpr std::string_view kRoom = "/room/";
    if (req_.method() == http::verb::get && target.starts_with(kRoom)) {
      const std::string_view rel = std::string_view(target).substr(kRoom.size());
      if (rel.empty()) {
        respond(http::status::ok, "application/json", hub_.manifest_json());
        return;
      }
      if (const auto file = resolve_static(hub_.room_dir(), rel)) {
        std::ifstream in(*file, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        respond(http::status::ok, content_type(*file), ss.str());
        return;
      }
    }
    respond(http::status::not_found, "text/plain", "not found\n");
  }

  void respond(http::status status, const std::string& type, std::string body) {
    res_.result(status);
    res_.version(req_.version());
    res_.set(http::field::content_type, type);
    res_.set(http::field::access_control_allow_origin, "*");
    res_.keep_alive(false);
    res_.body() = std::move(body);
    res_.prepare_payload();
    http::async_write(socket_, res_,
                      [self = shared_from_this()](beast::error_code, std::size_t) {
                        beast::error_code ec;
                        self->socket_.shutdown(tcp::socket::shutdown_send, ec);
                      });
  }

  Hub& hub_;
  tcp::socket socket_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  http::response<http::string_body> res_;
};

// Reads the first four bytes to tell HTTP from raw NDJSON.
void sniff(Hub& hub, tcp::socket socket) {
  auto sock = std::make_shared<tcp::socket>(std::move(socket));
  auto head = std::make_shared<std::array<char, 4>>();
  asio::async_read(*sock, asio::buffer(*head),
                   [&hub, sock, head](beast::error_code ec, std::size_t n) {
                     if (ec) return;
                     std::string prefix(head->data(), n);
                     if (prefix == "GET ") {
                       std::make_shared<HttpConn>(hub, std::move(*sock), std::move(prefix))
                           ->start();
                     } else {
                       const auto id = hub.next_id();
                       auto c = std::make_shared<TcpConn>(hub, id, std::move(*sock),
                                                          std::move(prefix));
                       hub.attach(c, id);
                       c->start();
                     }
                   });
}

void accept_loop(tcp::acceptor& acceptor, Hub& hub) {
  acceptor.async_accept([&acceptor, &hub](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    socket.set_option(tcp::no_delay(true));
    sniff(hub, std::move(socket));
    accept_loop(acceptor, hub);
  });
}

void tick_loop(asio::steady_timer& timer, Hub& hub, std::chrono::nanoseconds period) {
  timer.expires_at(timer.expiry() + period);
  timer.async_wait([&timer, &hub, period](beast::error_code ec) {
    if (ec) return;
    hub.tick();
    tick_loop(timer, hub, period);
  });
}

}  // namespace

int run_serve(const ServeConfig& cfg) {
  if (!(cfg.tick_hz > 0.0)) {
    std::cerr << "vrmeet serve: --tick-hz must be positive\n";
    return 2;
  }
  vrm_room* room = nullptr;
  if (vrm_room_load(cfg.manifest.c_str(), &room) != VRM_OK) {
    std::cerr << "vrmeet serve: " << vrm_last_error() << '\n';
    return 2;
  }
  char* manifest_json = nullptr;
  vrm_room_serialize(room, &manifest_json);
  std::string manifest(manifest_json);
  vrm_string_free(manifest_json);

  vrm_server* server = nullptr;
  const vrm_status created = vrm_server_create(room, nullptr, &server);
  vrm_room_free(room);
  if (created != VRM_OK) {
    std::cerr << "vrmeet serve: " << vrm_last_error() << '\n';
    return 2;
  }
  if (!cfg.log.empty() && vrm_server_set_log_file(server, cfg.log.c_str()) != VRM_OK) {
    std::cerr << "vrmeet serve: " << vrm_last_error() << '\n';
    vrm_server_free(server);
    return 2;
  }

  int rc = 0;
  try {
    asio::io_context io;
    std::error_code ec;
    fs::path room_dir = fs::weakly_canonical(fs::absolute(cfg.manifest).parent_path(), ec);
    Hub hub(io, server, room_dir, manifest);

    tcp::acceptor acceptor(io, tcp::endpoint(tcp::v4(), cfg.port));
    accept_loop(acceptor, hub);

    asio::steady_timer timer(io, std::chrono::steady_clock::now());
    const auto period = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::duration<double>(1.0 / cfg.tick_hz));
    tick_loop(timer, hub, period);

    asio::signal_set signals(io, SIGINT, SIGTERM);
    signals.async_wait([&](beast::error_code, int) { io.stop(); });

    std::cout << "vrmeet serve: listening on port " << acceptor.local_endpoint().port()
              << " (websocket " << vrm_session_path() << ", files /room/)" << std::endl;
    io.run();
  } catch (const std::exception& e) {
    std::cerr << "vrmeet serve: " << e.what() << '\n';
    rc = 2;
  }
  vrm_server_free(server);
  return rc;
}
