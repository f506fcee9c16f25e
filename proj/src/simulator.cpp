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

#include <algorithm>
#include <deque>
#include <queue>
#include <random>

#include <nlohmann/json.hpp>

#include "vrmeet/errors.hpp"
#include "vrmeet/harness.hpp"
#include "vrmeet/replica.hpp"

namespace vrmeet {
namespace {

// Uniform [0, 1) from the raw engine output; std::uniform_real_distribution
// is not specified bit-exactly across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ChannelItem {
  enum class Kind { open, line, close } kind = Kind::line;
  std::string line;
  std::optional<Envelope> envelope;  // decoded copy for server-to-client items
  double sent_ms = 0.0;
};

struct Event {
  enum class Kind { action, hand_sample, to_server, to_client, tick };

  double t = 0.0;
  std::uint64_t order = 0;
  Kind kind = Kind::tick;
  std::size_t client = 0;
  std::size_t index = 0;  // action index
  HandFrame frame;        // hand_sample
  ChannelItem item;       // to_server / to_client
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.order > b.order;
  }
};

struct SimClient {
  const ScenarioClient* script = nullptr;
  ConnectionId conn = 0;
  bool joined = false;
  bool connected = false;
  bool leaving = false;
  ClientReplica replica;
  GestureRecognizer recognizer;
  std::uint64_t next_seq = 0;
  Pose head;
  double up_last = 0.0;    // latest scheduled client->server delivery
  double down_last = 0.0;  // latest scheduled server->client delivery
  std::optional<double> diverged_since;
  std::map<std::string, std::vector<double>> hand_relay_times;

  explicit SimClient(const GestureConfig& cfg) : recognizer(cfg) {}

  bool live() const { return joined && connected && !leaving && replica.welcomed(); }
};

class Simulation {
 public:
  Simulation(const Scenario& s, const Room& room, const SimulationOptions& options)
      : scenario_(s),
        log_(options.event_log),
        room_(room),
        rng_(s.network.seed),
        server_(room, ServerOptions{s.gesture}) {
    if (options.event_log) {
      write_log_header(*options.event_log, room, s.gesture);
      server_.set_event_log(options.event_log);
    }
    for (const auto& el : room.elements) last_versions_[el.id] = 0;
    for (std::size_t i = 0; i < s.clients.size(); ++i) {
      clients_.emplace_back(s.gesture);
      clients_.back().script = &s.clients[i];
      clients_.back().conn = i + 1;
    }
  }

  MetricsReport run() {
    double horizon = 0.0;
    for (std::size_t c = 0; c < clients_.size(); ++c) {
      const auto& actions = clients_[c].script->actions;
      for (std::size_t k = 0; k < actions.size(); ++k) {
        Event e;
        e.t = actions[k].at_ms;
        e.kind = Event::Kind::action;
        e.client = c;
        e.index = k;
        push(std::move(e));
        horizon = std::max(horizon, actions[k].at_ms + trajectory_span(actions[k]));
      }
    }
    report_.scenario_end_ms = horizon;
    const double period = scenario_.tick_period_ms();
    horizon += 2.0 * (scenario_.network.latency_ms + scenario_.network.jitter_ms) +
               2.0 * period;
    for (std::uint64_t k = 1; static_cast<double>(k) * period <= horizon; ++k) {
      Event e;
      e.t = static_cast<double>(k) * period;
      e.kind = Event::Kind::tick;
      push(std::move(e));
    }

    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      now_ = e.t;
      process(e);
      observe();
    }
    return finish();
  }

 private:
  static double trajectory_span(const ScenarioAction& a) {
    if (a.kind == ActionKind::swipe) return synthetic_swipe(a.swipe).back().t_ms;
    if (a.kind == ActionKind::play_hand_trajectory && !a.trajectory.empty()) {
      return a.trajectory.back().t_ms;
    }
    return 0.0;
  }

  void push(Event e) {
    e.order = next_order_++;
    queue_.push(std::move(e));
  }

  double delivery_time(double& last) {
    double delay = scenario_.network.latency_ms;
    if (scenario_.network.jitter_ms > 0.0) {
      delay += (2.0 * uniform01(rng_) - 1.0) * scenario_.network.jitter_ms;
    }
    // Reliable ordered transport: never overtake an earlier item.
    const double at = std::max(now_ + std::max(delay, 0.0), last);
    last = at;
    return at;
  }

  void to_server(std::size_t c, ChannelItem item) {
    Event e;
    e.t = delivery_time(clients_[c].up_last);
    e.kind = Event::Kind::to_server;
    e.client = c;
    e.item = std::move(item);
    push(std::move(e));
  }

  void send(std::size_t c, Message body) {
    auto& cl = clients_[c];
    if (!cl.connected) return;
    Envelope env;
    env.seq = cl.next_seq++;
    env.session_id = cl.replica.session_id();
    env.ts_ms = now_;
    env.body = std::move(body);
    ++report_.message_counts[std::string(env.msg_type())];
    to_server(c, {ChannelItem::Kind::line, encode_message(env), std::nullopt, now_});
  }

  void schedule_samples(std::size_t c, const std::vector<TrajectorySample>& samples) {
    for (const auto& s : samples) {
      Event e;
      e.t = now_ + s.t_ms;
      e.kind = Event::Kind::hand_sample;
      e.client = c;
      e.frame = s.frame;
      push(std::move(e));
    }
  }

  void process(const Event& e) {
    switch (e.kind) {
      case Event::Kind::action:
        run_action(e.client, clients_[e.client].script->actions[e.index]);
        break;
      case Event::Kind::hand_sample:
        run_hand_sample(e.client, e.frame);
        break;
      case Event::Kind::to_server:
        server_receive(e.client, e.item);
        break;
      case Event::Kind::to_client:
        client_receive(e.client, e.item);
        break;
      case Event::Kind::tick:
        server_.tick(now_);
        ++report_.ticks;
        flush_server();
        break;
    }
  }

  void run_action(std::size_t c, const ScenarioAction& a) {
    auto& cl = clients_[c];
    switch (a.kind) {
      case ActionKind::join:
        if (cl.joined) return;
        cl.joined = true;
        cl.connected = true;
        to_server(c, {ChannelItem::Kind::open, {}, std::nullopt, now_});
        send(c, ClientHello{cl.script->name});
        break;
      case ActionKind::sit:
        send(c, SeatRequest{a.seat_id});
        break;
      case ActionKind::move_head:
        cl.head = a.pose;
        send(c, PoseUpdate{a.pose, std::nullopt, std::nullopt});
        break;
      case ActionKind::play_hand_trajectory:
        schedule_samples(c, a.trajectory);
        break;
      case ActionKind::swipe:
        schedule_samples(c, synthetic_swipe(a.swipe));
        break;
      case ActionKind::command:
        send(c, ElementCommand{a.element_id, a.command});
        break;
      case ActionKind::leave:
        if (!cl.connected) return;
        cl.leaving = true;
        if (a.abrupt) {
          to_server(c, {ChannelItem::Kind::close, {}, std::nullopt, now_});
          cl.connected = false;
        } else {
          send(c, Leave{});
        }
        break;
    }
  }

  void run_hand_sample(std::size_t c, const HandFrame& frame) {
    auto& cl = clients_[c];
    if (!cl.connected || cl.leaving) return;
    send(c, HandUpdate{{frame}, std::nullopt, std::nullopt});
    cl.recognizer.set_head(cl.head);
    if (const auto seat = cl.replica.own_seat()) {
      cl.recognizer.set_room_view(room_view(room_, *seat));
    } else {
      cl.recognizer.set_room_view({});
    }
    for (auto& ev : cl.recognizer.push(now_, frame)) send(c, std::move(ev));
  }

  void server_receive(std::size_t c, const ChannelItem& item) {
    const ConnectionId conn = clients_[c].conn;
    switch (item.kind) {
      case ChannelItem::Kind::open:
        server_.open(conn, now_);
        break;
      case ChannelItem::Kind::line: {
        std::string_view line = item.line;
        if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
        issued_ms_ = item.sent_ms;
        server_.receive_line(conn, line, now_);
        break;
      }
      case ChannelItem::Kind::close:
        server_.close(conn, now_);
        break;
    }
    flush_server();
  }

  void flush_server() {
    for (auto& out : server_.drain()) {
      const std::size_t c = static_cast<std::size_t>(out.conn - 1);
      auto& cl = clients_[c];
      if (!out.line.empty()) {
        Envelope env = decode_message(out.line);
        ++report_.message_counts[std::string(env.msg_type())];
        if (const auto* su = std::get_if<SeatUpdate>(&env.body); su && !su->granted) {
          ++report_.seat_denials;
        }
        Event e;
        e.t = delivery_time(cl.down_last);
        e.kind = Event::Kind::to_client;
        e.client = c;
        e.item = {ChannelItem::Kind::line, std::move(out.line), std::move(env), now_};
        push(std::move(e));
      }
      if (out.close) {
        Event e;
        e.t = delivery_time(cl.down_last);
        e.kind = Event::Kind::to_client;
        e.client = c;
        e.item = {ChannelItem::Kind::close, {}, std::nullopt, now_};
        push(std::move(e));
      }
    }
    record_server_changes();
    issued_ms_.reset();
  }

  void client_receive(std::size_t c, const ChannelItem& item) {
    auto& cl = clients_[c];
    if (item.kind == ChannelItem::Kind::close) {
      cl.connected = false;
      return;
    }
    if (!cl.connected) return;
    const Envelope& env = *item.envelope;
    cl.replica.apply(env);
    if (const auto* hu = std::get_if<HandUpdate>(&env.body); hu && hu->session_id) {
      cl.hand_relay_times[*hu->session_id].push_back(item.sent_ms);
    }
  }

  void record_server_changes() {
    for (const auto& [id, st] : server_.state().element_states) {
      auto& last = last_versions_[id];
      for (std::uint64_t v = last + 1; v <= st.version; ++v) {
        report_.commands.push_back({id, v, issued_ms_.value_or(now_), now_, 0.0, 0.0, 0.0, false});
      }
      last = st.version;
    }
  }

  void observe() {
    for (auto& rec : report_.commands) {
      if (rec.converged) continue;
      bool all = true;
      for (const auto& cl : clients_) {
        if (!cl.live()) continue;
        const auto& els = cl.replica.elements();
        const auto it = els.find(rec.element_id);
        if (it == els.end() || it->second.version < rec.version) {
          all = false;
          break;
        }
      }
      if (all) {
        rec.converged = true;
        rec.converged_ms = now_;
        rec.convergence_ms = now_ - rec.accepted_ms;
        rec.end_to_end_ms = now_ - rec.issued_ms;
      }
    }

    const std::string authority = server_.digest();
    for (auto& cl : clients_) {
      const bool agrees = !cl.live() || cl.replica.digest() == authority;
      if (!agrees && !cl.diverged_since) {
        cl.diverged_since = now_;
      } else if (agrees && cl.diverged_since) {
        close_divergence(cl);
      }
    }
  }

  void close_divergence(SimClient& cl) {
    report_.max_divergence_ms =
        std::max(report_.max_divergence_ms, now_ - *cl.diverged_since);
    report_.settled_ms = std::max(report_.settled_ms, now_);
    cl.diverged_since.reset();
  }

  MetricsReport finish() {
    report_.end_ms = now_;
    report_.final_digest = server_.digest();
    if (log_) write_log_trailer(*log_, report_.final_digest);
    for (auto& cl : clients_) {
      if (cl.diverged_since) close_divergence(cl);
      if (cl.live()) {
        report_.replica_digests[cl.script->name] = cl.replica.digest();
        if (cl.replica.digest() != report_.final_digest) report_.converged = false;
      }
      for (const auto& [owner, times] : cl.hand_relay_times) {
        std::size_t lo = 0;
        for (std::size_t hi = 0; hi < times.size(); ++hi) {
          while (times[hi] - times[lo] >= 1000.0) ++lo;
          report_.max_hand_relays_per_second =
              std::max<std::uint64_t>(report_.max_hand_relays_per_second, hi - lo + 1);
        }
      }
    }
    for (const auto& rec : report_.commands) {
      if (!rec.converged) report_.converged = false;
      auto& worst = report_.convergence_ms[rec.element_id];
      worst = std::max(worst, rec.convergence_ms);
    }
    return std::move(report_);
  }

  const Scenario& scenario_;
  std::ostream* log_;
  const Room& room_;
  std::mt19937_64 rng_;
  SessionServer server_;
  std::vector<SimClient> clients_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t next_order_ = 0;
  double now_ = 0.0;
  std::optional<double> issued_ms_;  // send time of the line being handled
  std::map<std::string, std::uint64_t> last_versions_;
  MetricsReport report_;
};

}  // namespace

MetricsReport run_scenario(const Scenario& s, const Room& room,
                           const SimulationOptions& options) {
  validate_scenario(s, room);
  return Simulation(s, room, options).run();
}

MetricsReport run_scenario(const Scenario& s, const SimulationOptions& options) {
  return run_scenario(s, load_manifest(s.manifest_ref), options);
}

std::string serialize_report(const MetricsReport& r) {
  using nlohmann::json;
  json commands = json::array();
  for (const auto& c : r.commands) {
    commands.push_back({{"element_id", c.element_id},
                        {"version", c.version},
                        {"issued_ms", c.issued_ms},
                        {"accepted_ms", c.accepted_ms},
                        {"converged", c.converged},
                        {"converged_ms", c.converged_ms},
                        {"convergence_ms", c.convergence_ms},
                        {"end_to_end_ms", c.end_to_end_ms}});
  }
  const json doc{{"commands", std::move(commands)},
                 {"convergence_ms", r.convergence_ms},
                 {"max_divergence_ms", r.max_divergence_ms},
                 {"message_counts", r.message_counts},
                 {"seat_denials", r.seat_denials},
                 {"final_digest", r.final_digest},
                 {"replica_digests", r.replica_digests},
                 {"converged", r.converged},
                 {"end_ms", r.end_ms},
                 {"scenario_end_ms", r.scenario_end_ms},
                 {"settled_ms", r.settled_ms},
                 {"ticks", r.ticks},
                 {"max_hand_relays_per_second", r.max_hand_relays_per_second}};
  return doc.dump(2) + "\n";
}

}  // namespace vrmeet
