/*
 * Copyright 2026-present scensim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "scensim/bridge.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <vector>

#include "scensim/sif.hpp"

namespace scensim {

using nlohmann::json;

json layout_to_json(const ObservationLayout& layout) {
    json fields = json::array();
    for (const ObservationField& f : layout.fields) {
        fields.push_back({{"name", f.name}, {"offset", f.offset}, {"width", f.width}});
    }
    return {{"total", layout.total}, {"fields", fields}};
}

bool StreamTransport::read_line(std::string& line) {
    return static_cast<bool>(std::getline(in_, line));
}

bool StreamTransport::write_line(const std::string& line) {
    out_ << line << "\n";
    out_.flush();
    return static_cast<bool>(out_);
}

namespace {

/// Socket transport with a receive timeout.
class FdTransport : public LineTransport {
public:
    FdTransport(int fd, double timeout_s) : fd_(fd) {
        timeval tv{};
        tv.tv_sec = static_cast<long>(timeout_s);
        tv.tv_usec = static_cast<long>((timeout_s - tv.tv_sec) * 1e6);
        setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    }

    bool read_line(std::string& line) override {
        line.clear();
        for (;;) {
            auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                return true;
            }
            char chunk[4096];
            ssize_t n = recv(fd_, chunk, sizeof(chunk), 0);
            if (n <= 0) {
                return false;  // closed or timed out
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    bool write_line(const std::string& line) override {
        std::string out = line + "\n";
        std::size_t sent = 0;
        while (sent < out.size()) {
            ssize_t n = send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) {
                return false;
            }
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

private:
    int fd_;
    std::string buffer_;
};

struct SessionAbort {
    std::string message;
};

json read_message(LineTransport& transport) {
    std::string line;
    if (!transport.read_line(line)) {
        throw SessionAbort{"client closed or timed out"};
    }
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("kind")) {
        throw SessionAbort{"malformed line"};
    }
    return doc;
}

void send_message(LineTransport& transport, const json& doc) {
    if (!transport.write_line(doc.dump())) {
        throw SessionAbort{""};  // peer gone, nothing more to say
    }
}

json observations_message(int tick, const Observations& obs) {
    json agents = json::object();
    for (const auto& [id, vec] : obs) {
        agents[id] = vec;
    }
    return {{"kind", "observation"}, {"tick", tick}, {"agents", agents}};
}

/// Runs one episode over the transport; returns records via the world.
void run_bridge_episode(LineTransport& transport, const BridgeConfig& cfg, World& world) {
    send_message(transport, {{"kind", "reset"},
                             {"scenario_id", world.scenario().scenario_id},
                             {"horizon", world.horizon()},
                             {"dt", world.dt()},
                             {"mode", cfg.engine.mode == SimMode::Single ? "single" : "multi"}});
    while (!world.done()) {
        const int tick = world.tick();
        Observations obs = observe_agents(world, cfg.sensing);
        if (obs.empty()) {
            // nothing externally driven right now (all agents pending spawn)
            world.step({});
            continue;
        }
        send_message(transport, observations_message(tick, obs));

        json reply = read_message(transport);
        if (reply.at("kind") != "action") {
            throw SessionAbort{"expected an action message"};
        }
        if (!reply.contains("tick") || reply.at("tick").get<int>() != tick) {
            throw SessionAbort{"stale tick"};
        }
        std::map<std::string, AgentAction> actions;
        bool missing_agent = false;
        if (!reply.contains("agents") || !reply.at("agents").is_object()) {
            throw SessionAbort{"action message lacks agents"};
        }
        for (const auto& [id, value] : reply.at("agents").items()) {
            if (obs.find(id) == obs.end()) {
                throw SessionAbort{"action for unknown agent: " + id};
            }
            if (!value.is_array() || value.size() != 2) {
                throw SessionAbort{"action must be a [steer, accel] pair"};
            }
            actions.emplace(id, AgentAction{value[0].get<double>(), value[1].get<double>()});
        }
        for (const auto& [id, vec] : obs) {
            if (actions.find(id) == actions.end()) {
                actions.emplace(id, AgentAction{0.0, 0.0});
                missing_agent = true;
            }
        }

        std::map<std::string, AgentStepInfo> infos = world.step(actions);

        json agents = json::object();
        for (const auto& [id, info] : infos) {
            agents[id] = {{"reward", info.reward},
                          {"termination", termination_name(info.termination)},
                          {"route_completion", info.route_completion},
                          {"displacement", info.displacement},
                          {"speed", info.speed},
                          {"crash", info.crashed}};
        }
        json result{{"kind", "result"}, {"tick", tick}, {"agents", agents}, {"done", world.done()}};
        if (missing_agent) {
            result["warning"] = "missing agent action defaulted to [0, 0]";
        }
        send_message(transport, result);
    }
}

}  // namespace

std::size_t run_bridge_session(LineTransport& transport, const BridgeConfig& cfg,
                               const std::vector<std::filesystem::path>& scenario_files,
                               const EpisodeSink& sink) {
    std::size_t episodes = 0;
    try {
        send_message(transport,
                     {{"kind", "hello"},
                      {"protocol", kBridgeProtocol},
                      {"mode", cfg.engine.mode == SimMode::Single ? "single" : "multi"},
                      {"observation_layout", layout_to_json(observation_layout(cfg.sensing))}});
        json hello = read_message(transport);
        if (hello.at("kind") != "hello") {
            throw SessionAbort{"expected a hello message"};
        }
        if (!hello.contains("protocol") || hello.at("protocol") != kBridgeProtocol) {
            throw SessionAbort{std::string("unsupported protocol, expected ") + kBridgeProtocol};
        }

        for (const std::filesystem::path& file : scenario_files) {
            ScenarioDescription desc = read_scenario(file);
            MapIndex index(desc.map_features);
            for (int e = 0; e < cfg.episodes_per_scenario; ++e) {
                World world(desc, index, cfg.engine);
                run_bridge_episode(transport, cfg, world);
                for (const auto& [id, status] : world.agents()) {
                    ++episodes;
                    if (sink) {
                        EpisodeRecord record;
                        record.scenario_id = desc.scenario_id;
                        record.agent_id = id;
                        record.outcome = status.termination;
                        record.route_completion = status.route_completion;
                        record.mean_speed = status.steps > 0 ? status.speed_sum / status.steps : 0.0;
                        record.total_reward = status.total_reward;
                        record.crashes = status.crashes;
                        record.steps = status.steps;
                        sink(record);
                    }
                }
            }
        }
        send_message(transport, {{"kind", "bye"}, {"episodes", episodes}});
    } catch (const SessionAbort& abort) {
        if (!abort.message.empty()) {
            transport.write_line(json{{"kind", "error"}, {"message", abort.message}}.dump());
        }
    } catch (const std::exception& e) {
        transport.write_line(json{{"kind", "error"}, {"message", e.what()}}.dump());
    }
    return episodes;
}

// ---------------------------------------------------------------------------
// TCP server
// ---------------------------------------------------------------------------

BridgeServer::BridgeServer(BridgeConfig cfg, std::vector<std::filesystem::path> scenario_files)
    : cfg_(std::move(cfg)), files_(std::move(scenario_files)) {}

BridgeServer::~BridgeServer() {
    stop();
}

void BridgeServer::bind(const std::string& host, int port) {
    listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw BridgeError("socket() failed");
    }
    int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw BridgeError("invalid listen address: " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        throw BridgeError("cannot bind " + host + ":" + std::to_string(port));
    }
    if (listen(listen_fd_, 16) != 0) {
        throw BridgeError("listen() failed");
    }
    socklen_t len = sizeof(addr);
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

void BridgeServer::serve_fd(int fd) {
    FdTransport transport(fd, cfg_.client_timeout_s);
    run_bridge_session(transport, cfg_, files_, sink_);
    close(fd);
}

void BridgeServer::serve() {
    if (listen_fd_ < 0) {
        throw BridgeError("serve() before bind()");
    }
    std::vector<std::thread> sessions;
    while (!stopping_.load()) {
        int fd = accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            break;  // listener closed
        }
        sessions.emplace_back([this, fd] { serve_fd(fd); });
    }
    for (std::thread& t : sessions) {
        t.join();
    }
}

void BridgeServer::serve_connections(std::size_t n) {
    if (listen_fd_ < 0) {
        throw BridgeError("serve_connections() before bind()");
    }
    std::vector<std::thread> sessions;
    for (std::size_t i = 0; i < n && !stopping_.load(); ++i) {
        int fd = accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            break;
        }
        sessions.emplace_back([this, fd] { serve_fd(fd); });
    }
    for (std::thread& t : sessions) {
        t.join();
    }
}

void BridgeServer::stop() {
    stopping_.store(true);
    if (listen_fd_ >= 0) {
        shutdown(listen_fd_, SHUT_RDWR);
        close(listen_fd_);
        listen_fd_ = -1;
    }
}

}  // namespace scensim
