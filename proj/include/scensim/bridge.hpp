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
#pragma once

#include <atomic>
#include <functional>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "scensim/rollout.hpp"

namespace scensim {

constexpr const char* kBridgeProtocol = "sfb/1";

struct BridgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Machine-readable field offsets/widths so clients can parse observation
/// vectors without shared code.
nlohmann::json layout_to_json(const ObservationLayout& layout);

struct BridgeConfig {
    EngineConfig engine;
    SensingConfig sensing;
    double client_timeout_s = 30.0;
    int episodes_per_scenario = 1;
};

/// One line in, one line out; both sides are newline-delimited JSON.
class LineTransport {
public:
    virtual ~LineTransport() = default;
    virtual bool read_line(std::string& line) = 0;  // false on EOF or timeout
    virtual bool write_line(const std::string& line) = 0;
};

class StreamTransport : public LineTransport {
public:
    StreamTransport(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    bool read_line(std::string& line) override;
    bool write_line(const std::string& line) override;

private:
    std::istream& in_;
    std::ostream& out_;
};

using EpisodeSink = std::function<void(const EpisodeRecord&)>;

/// Runs one full session over the transport: hello handshake, then for each
/// scenario the strict observation -> action -> result alternation, then bye.
/// Protocol violations send an error message and end the session.
/// Returns the number of completed episodes.
std::size_t run_bridge_session(LineTransport& transport, const BridgeConfig& cfg,
                               const std::vector<std::filesystem::path>& scenario_files,
                               const EpisodeSink& sink = {});

/// TCP server: one session per connection, sessions fully independent.
class BridgeServer {
public:
    BridgeServer(BridgeConfig cfg, std::vector<std::filesystem::path> scenario_files);
    ~BridgeServer();

    /// Binds host:port (port 0 picks an ephemeral one). Throws BridgeError.
    void bind(const std::string& host, int port);
    int port() const { return port_; }

    /// Accepts and serves until stop(); each session runs in its own thread.
    void serve();

    /// Accepts exactly n connections, serving each session concurrently,
    /// and returns when all have finished.
    void serve_connections(std::size_t n);

    void set_episode_sink(EpisodeSink sink) { sink_ = std::move(sink); }
    void stop();

private:
    BridgeConfig cfg_;
    std::vector<std::filesystem::path> files_;
    EpisodeSink sink_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stopping_{false};

    void serve_fd(int fd);
};

}  // namespace scensim
