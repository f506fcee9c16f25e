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

// Drives the vrmeet executable as a user would, including a live server.
#include <fcntl.h>
#include <sys/socket.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::string fixture(const std::string& rel) { return std::string(VRMEET_FIXTURE_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  const fs::path dir = fs::temp_directory_path();
  const fs::path out_path = dir / ("vrmeet_cli_out_" + std::to_string(getpid()));
  const fs::path err_path = dir / ("vrmeet_cli_err_" + std::to_string(getpid()));
  const pid_t pid = fork();
  if (pid == 0) {
    const int o = open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    const int e = open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    dup2(o, 1);
    dup2(e, 2);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(VRMEET_CLI));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(VRMEET_CLI, argv.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return r;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("vrmeet_cli_" + std::to_string(getpid()) + "_" + name);
}

TEST(Cli, Version) {
  const RunResult r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({"simulate"}).code, 0);
  EXPECT_NE(run({"serve", "--manifest", "/nonexistent.room.json"}).code, 0);
}

TEST(Cli, SimulateThenReplay) {
  const fs::path log = temp_file("sim.log");
  const RunResult sim = run({"simulate", fixture("scenarios/three_clients.json"), "--log", log.string()});
  ASSERT_EQ(sim.code, 0) << sim.err;
  const json report = json::parse(sim.out);
  EXPECT_EQ(report["final_digest"], "78bd07c1904ee4f3");
  EXPECT_EQ(slurp(log), slurp(fixture("logs/three_clients.log")));

  const RunResult rep = run({"replay", log.string()});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(rep.out, "replay ok: 192 lines, final digest 78bd07c1904ee4f3\n");
  fs::remove(log);
}

TEST(Cli, SimulateWritesReportFile) {
  const fs::path out = temp_file("report.json");
  const RunResult r = run({"simulate", fixture("scenarios/latency_100.json"), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "");
  EXPECT_TRUE(json::parse(slurp(out)).contains("max_divergence_ms"));
  fs::remove(out);
}

TEST(Cli, SimulateBadScenario) {
  const RunResult r = run({"simulate", "/nonexistent/scenario.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("vrmeet simulate: io: ", 0), 0u) << r.err;
}

TEST(Cli, ReplayDivergenceExitsOne) {
  const fs::path log = temp_file("tampered.log");
  std::string text = slurp(fixture("logs/three_clients.log"));
  const auto at = text.find("\"display_name\":\"bob\"");
  ASSERT_NE(at, std::string::npos);
  const auto welcome = text.find("\"s2\"", text.find("\nOUT 2 ", at));
  text.replace(welcome, 4, "\"s7\"");
  std::ofstream(log) << text;
  const RunResult r = run({"replay", log.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("replay_divergence"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 9"), std::string::npos) << r.err;
  fs::remove(log);
}

TEST(Cli, CalibrateThenValidate) {
  // Keep the images next to the manifest so the validator sees them.
  const fs::path dir = temp_file("room");
  fs::create_directories(dir);
  for (const char* png : {"seat_a.png", "seat_b.png", "seat_c.png"}) {
    fs::copy_file(fixture(std::string("room/") + png), dir / png,
                  fs::copy_options::overwrite_existing);
  }
  const fs::path out = dir / "calibrated.room.json";
  const RunResult cal = run({"calibrate", fixture("calibration/three_seat.measurements.json"),
                       fixture("room/meeting.room.json"), "--out", out.string()});
  ASSERT_EQ(cal.code, 0) << cal.err;
  EXPECT_EQ(cal.out.rfind("residual_rms: ", 0), 0u);
  const json room = json::parse(slurp(out));
  EXPECT_NEAR(room["viewpoints"][2]["pose"]["pos"][0].get<double>(), 1.3, 1e-6);

  const RunResult val = run({"validate", out.string()});
  EXPECT_EQ(val.code, 0) << val.out << val.err;
  EXPECT_EQ(val.out, "ok\n");
  fs::remove_all(dir);
}

TEST(Cli, CalibrateToStdout) {
  const RunResult r = run({"calibrate", fixture("calibration/three_seat.measurements.json"),
                     fixture("room/meeting.room.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["room_id"], "meeting-room-1");
  EXPECT_NE(r.err.find("residual_rms"), std::string::npos);
}

TEST(Cli, CalibrateErrors) {
  const RunResult r = run({"calibrate", fixture("calibration/empty.measurements.json"),
                     fixture("room/meeting.room.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("vrmeet calibrate: empty_input: ", 0), 0u) << r.err;
}

TEST(Cli, ValidateReportsViolations) {
  const RunResult dup = run({"validate", fixture("room/duplicate_element.room.json")});
  EXPECT_EQ(dup.code, 1);
  EXPECT_NE(dup.out.find("ERROR duplicate_id [tv]"), std::string::npos) << dup.out;
  EXPECT_EQ(dup.out.find("ok\n"), std::string::npos);

  const RunResult square = run({"validate", fixture("room/square_image.room.json")});
  EXPECT_EQ(square.code, 0);
  EXPECT_NE(square.out.find("WARNING"), std::string::npos) << square.out;
  EXPECT_NE(square.out.find("ok\n"), std::string::npos);

  EXPECT_EQ(run({"validate", "/nonexistent.room.json"}).code, 2);
}

// A live `vrmeet serve` child listening on a kernel-chosen port.
class LiveServer {
 public:
  explicit LiveServer(const fs::path& log) {
    int fds[2];
    EXPECT_EQ(pipe(fds), 0);
    pid_ = fork();
    if (pid_ == 0) {
      dup2(fds[1], 1);
      close(fds[0]);
      execl(VRMEET_CLI, VRMEET_CLI, "serve", "--manifest", VRMEET_FIXTURE_DIR "/room/meeting.room.json",
            "--port", "0", "--log", log.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(fds[1]);
    out_ = fdopen(fds[0], "r");
    std::array<char, 256> buf{};
    if (fgets(buf.data(), buf.size(), out_)) banner_ = buf.data();
    const auto at = banner_.find("port ");
    if (at != std::string::npos) port_ = static_cast<unsigned short>(std::stoi(banner_.substr(at + 5)));
  }

  ~LiveServer() {
    if (pid_ > 0) stop();
    if (out_) fclose(out_);
  }

  int stop() {
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  unsigned short port() const { return port_; }
  const std::string& banner() const { return banner_; }

 private:
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  std::string banner_;
  unsigned short port_ = 0;
};

http::response<http::string_body> get(asio::io_context& io, unsigned short port,
                                      const std::string& target) {
  tcp::socket sock(io);
  sock.connect({asio::ip::make_address("127.0.0.1"), port});
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  return res;
}

std::string hello(const std::string& name) {
  return json{{"msg_type", "client_hello"}, {"seq", 0}, {"session_id", ""}, {"ts_ms", 0.0},
              {"body", {{"display_name", name}}}}
      .dump();
}

std::string message(const std::string& type, int seq, const std::string& sid, json body) {
  return json{{"msg_type", type}, {"seq", seq}, {"session_id", sid}, {"ts_ms", 0.0},
              {"body", std::move(body)}}
      .dump();
}

// A stalled read fails the test instead of hanging it.
void set_read_timeout(tcp::socket& sock) {
  timeval tv{5, 0};
  setsockopt(sock.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

class TcpClient {
 public:
  TcpClient(asio::io_context& io, unsigned short port) : sock_(io) {
    sock_.connect({asio::ip::make_address("127.0.0.1"), port});
    set_read_timeout(sock_);
  }
  void send(const std::string& line) { asio::write(sock_, asio::buffer(line + "\n")); }
  json recv() {
    const std::size_t n = asio::read_until(sock_, asio::dynamic_buffer(buf_), '\n');
    const std::string line = buf_.substr(0, n - 1);
    buf_.erase(0, n);
    return json::parse(line);
  }
  // Skips messages until one of `type` arrives.
  json recv_type(const std::string& type) {
    for (;;) {
      json j = recv();
      if (j["msg_type"] == type) return j;
    }
  }

 private:
  tcp::socket sock_;
  std::string buf_;
};

class WsClient {
 public:
  WsClient(asio::io_context& io, unsigned short port) : ws_(io) {
    ws_.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
    set_read_timeout(ws_.next_layer());
    ws_.handshake("127.0.0.1", "/session");
    ws_.text(true);
  }
  void send(const std::string& text) { ws_.write(asio::buffer(text)); }
  std::string recv_raw() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return beast::buffers_to_string(buf.data());
  }
  json recv_type(const std::string& type) {
    for (;;) {
      json j = json::parse(recv_raw());
      if (j["msg_type"] == type) return j;
    }
  }
  void close() { ws_.close(websocket::close_code::normal); }

 private:
  websocket::stream<tcp::socket> ws_;
};

TEST(Serve, StaticRoomAndSessions) {
  const fs::path log = temp_file("serve.log");
  LiveServer server(log);
  ASSERT_NE(server.port(), 0) << server.banner();
  EXPECT_NE(server.banner().find("websocket /session"), std::string::npos);
  asio::io_context io;

  auto manifest = get(io, server.port(), "/room/");
  EXPECT_EQ(manifest.result(), http::status::ok);
  EXPECT_EQ(json::parse(manifest.body())["room_id"], "meeting-room-1");

  auto png = get(io, server.port(), "/room/seat_a.png");
  EXPECT_EQ(png.result(), http::status::ok);
  EXPECT_EQ(png[http::field::content_type], "image/png");
  EXPECT_EQ(png.body(), slurp(fixture("room/seat_a.png")));

  EXPECT_EQ(get(io, server.port(), "/room/../scenarios/three_clients.json").result(),
            http::status::not_found);
  EXPECT_EQ(get(io, server.port(), "/room/missing.png").result(), http::status::not_found);
  EXPECT_EQ(get(io, server.port(), "/elsewhere").result(), http::status::not_found);

  // One browser-style client and one raw NDJSON client share a session.
  WsClient ws(io, server.port());
  ws.send(hello("wendy"));
  const std::string welcome_text = ws.recv_raw();
  EXPECT_NE(welcome_text.back(), '\n');
  const json welcome = json::parse(welcome_text);
  ASSERT_EQ(welcome["msg_type"], "server_welcome");
  const std::string ws_sid = welcome["body"]["session_id"];

  TcpClient raw(io, server.port());
  raw.send(hello("ray"));
  const json raw_welcome = raw.recv_type("server_welcome");
  const std::string raw_sid = raw_welcome["body"]["session_id"];
  EXPECT_NE(raw_sid, ws_sid);

  ws.send(message("seat_request", 1, ws_sid, {{"seat_id", "seat_a"}}));
  EXPECT_EQ(ws.recv_type("seat_update")["body"]["granted"], true);
  EXPECT_EQ(raw.recv_type("seat_update")["body"]["session_id"], ws_sid);

  raw.send(message("seat_request", 1, raw_sid, {{"seat_id", "seat_a"}}));
  const json denied = raw.recv_type("seat_update");
  EXPECT_EQ(denied["body"]["session_id"], raw_sid);
  EXPECT_EQ(denied["body"]["granted"], false);
  raw.send(message("seat_request", 2, raw_sid, {{"seat_id", "seat_b"}}));
  for (;;) {
    const json j = raw.recv_type("seat_update");
    if (j["body"]["session_id"] == raw_sid) {
      EXPECT_EQ(j["body"]["granted"], true);
      break;
    }
  }

  // A head pose from the WebSocket user reaches the raw client on a tick.
  const json head = {{"pos", {0.1, 1.2, -0.3}}, {"quat", {1.0, 0.0, 0.0, 0.0}}};
  ws.send(message("pose_update", 2, ws_sid, {{"head", head}}));
  for (;;) {
    const json j = raw.recv_type("pose_update");
    if (j["body"]["session_id"] == ws_sid) {
      EXPECT_EQ(j["body"]["head"], head);
      break;
    }
  }

  ws.send(message("element_command", 3, ws_sid,
                  {{"element_id", "projector"}, {"command", {{"op", "next_slide"}}}}));
  const json state = raw.recv_type("element_state_msg");
  EXPECT_EQ(state["body"]["state"]["slide_index"], 1);

  ws.close();
  EXPECT_EQ(server.stop(), 0);

  const RunResult rep = run({"replay", log.string()});
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(rep.out.rfind("replay ok: ", 0), 0u);
  fs::remove(log);
}

}  // namespace
