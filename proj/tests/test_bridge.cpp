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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>
#include <thread>

#include "helpers.hpp"
#include "scensim/bridge.hpp"
#include "scensim/sif.hpp"

using namespace scensim;
using nlohmann::json;
using test::minimal_scenario;
using test::TempDir;

namespace {

/// Blocking line-oriented TCP client for driving the server in tests.
class TestClient {
public:
    explicit TestClient(int port) {
        fd_ = socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    }
    ~TestClient() { close(fd_); }

    json read() {
        for (;;) {
            auto newline = buffer_.find('\n');
            if (newline != std::string::npos) {
                std::string line = buffer_.substr(0, newline);
                buffer_.erase(0, newline + 1);
                return json::parse(line);
            }
            char chunk[4096];
            ssize_t n = recv(fd_, chunk, sizeof(chunk), 0);
            REQUIRE(n > 0);
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void write(const json& doc) {
        std::string line = doc.dump() + "\n";
        REQUIRE(send(fd_, line.data(), line.size(), MSG_NOSIGNAL) ==
                static_cast<ssize_t>(line.size()));
    }

    void write_raw(const std::string& line) {
        std::string full = line + "\n";
        REQUIRE(send(fd_, full.data(), full.size(), MSG_NOSIGNAL) ==
                static_cast<ssize_t>(full.size()));
    }

private:
    int fd_ = -1;
    std::string buffer_;
};

std::filesystem::path write_fixture(const TempDir& dir, int frames = 30) {
    ScenarioDescription desc = minimal_scenario(frames, 120.0, 6.0);
    auto path = dir / "fix.sif";
    write_scenario(desc, path);
    return path;
}

BridgeConfig test_config() {
    BridgeConfig cfg;
    cfg.engine = EngineConfig::single_agent();
    cfg.sensing.lidar_noise_std = 0.0;
    cfg.client_timeout_s = 10.0;
    return cfg;
}

}  // namespace

TEST_CASE("layout descriptor widths sum to the produced observation length") {
    SensingConfig cfg;
    json layout = layout_to_json(observation_layout(cfg));
    CHECK(layout["total"] == 144);
    CHECK(layout["fields"][0]["name"] == "lidar");
    CHECK(layout["fields"][0]["offset"] == 0);
    CHECK(layout["fields"][0]["width"] == 120);
    std::size_t sum = 0;
    for (const auto& f : layout["fields"]) {
        sum += f["width"].get<std::size_t>();
    }
    CHECK(sum == layout["total"].get<std::size_t>());

    cfg.boundary_enabled = true;
    json wide = layout_to_json(observation_layout(cfg));
    CHECK(wide["total"] == 156);  // the boundary detector adds 12
}

TEST_CASE("a scripted stdio session runs the full episode protocol") {
    TempDir dir("bridge_stdio");
    auto path = write_fixture(dir, 20);
    BridgeConfig cfg = test_config();

    // a braking client parks the ego and times out at horizon + 50 steps,
    // so every tick is known ahead and the session can be fully scripted
    std::ostringstream script;
    script << json{{"kind", "hello"}, {"protocol", kBridgeProtocol}}.dump() << "\n";
    for (int tick = 0; tick <= 20 + 50 + 1; ++tick) {
        script << json{{"kind", "action"},
                       {"tick", tick},
                       {"agents", {{"ego", {0.0, -1.0}}}}}.dump()
               << "\n";
    }
    std::istringstream in(script.str());
    std::ostringstream out;
    StreamTransport transport(in, out);
    std::size_t episodes = run_bridge_session(transport, cfg, {path});
    CHECK(episodes == 1);

    // replay the transcript: hello, reset, then strict alternation
    std::istringstream reply(out.str());
    std::string line;
    REQUIRE(std::getline(reply, line));
    json hello = json::parse(line);
    CHECK(hello["kind"] == "hello");
    CHECK(hello["protocol"] == kBridgeProtocol);
    CHECK(hello["observation_layout"]["total"] == 144);

    REQUIRE(std::getline(reply, line));
    CHECK(json::parse(line)["kind"] == "reset");

    int observations = 0, results = 0;
    bool saw_bye = false;
    json last_result;
    std::string expected = "observation";
    while (std::getline(reply, line)) {
        json msg = json::parse(line);
        if (msg["kind"] == "observation") {
            CHECK(expected == "observation");
            CHECK(msg["agents"]["ego"].size() == 144);
            expected = "result";
            ++observations;
        } else if (msg["kind"] == "result") {
            CHECK(expected == "result");
            expected = "observation";
            last_result = msg;
            ++results;
        } else if (msg["kind"] == "bye") {
            saw_bye = true;
        }
    }
    CHECK(saw_bye);
    CHECK(observations == results);  // one result per driven tick
    CHECK(results == 20 + 50 + 1);  // parked ego runs to the timeout
    CHECK(last_result["done"] == true);
    CHECK(last_result["agents"]["ego"]["termination"] == "timeout");
}

TEST_CASE("socket sessions reproduce the in-process run bit for bit") {
    TempDir dir("bridge_det");
    auto path = write_fixture(dir, 30);
    BridgeConfig cfg = test_config();

    // prerecorded action log
    std::vector<AgentAction> actions;
    DetRng rng(123);
    for (int i = 0; i < 200; ++i) {
        actions.push_back({rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.8)});
    }

    // in-process oracle
    std::vector<double> oracle_rewards;
    std::vector<std::vector<double>> oracle_obs;
    Termination oracle_term = Termination::Running;
    {
        ScenarioDescription desc = read_scenario(path);
        MapIndex index(desc.map_features);
        World world(desc, index, cfg.engine);
        int tick = 0;
        while (!world.done()) {
            oracle_obs.push_back(observe(world, "ego", cfg.sensing));
            auto infos = world.step({{"ego", actions[static_cast<std::size_t>(tick)]}});
            oracle_rewards.push_back(infos.at("ego").reward);
            oracle_term = infos.at("ego").termination;
            ++tick;
        }
    }

    BridgeServer server(cfg, {path});
    server.bind("127.0.0.1", 0);
    REQUIRE(server.port() > 0);
    std::thread serving([&] { server.serve_connections(1); });

    std::vector<double> bridge_rewards;
    std::vector<std::vector<double>> bridge_obs;
    std::string bridge_term;
    {
        TestClient client(server.port());
        CHECK(client.read()["kind"] == "hello");
        client.write({{"kind", "hello"}, {"protocol", kBridgeProtocol}});
        CHECK(client.read()["kind"] == "reset");
        for (;;) {
            json msg = client.read();
            if (msg["kind"] == "bye") {
                break;
            }
            if (msg["kind"] == "observation") {
                int tick = msg["tick"].get<int>();
                bridge_obs.push_back(msg["agents"]["ego"].get<std::vector<double>>());
                const AgentAction& a = actions[static_cast<std::size_t>(tick)];
                client.write({{"kind", "action"},
                              {"tick", tick},
                              {"agents", {{"ego", {a.steer, a.accel}}}}});
            } else if (msg["kind"] == "result") {
                bridge_rewards.push_back(msg["agents"]["ego"]["reward"].get<double>());
                bridge_term = msg["agents"]["ego"]["termination"].get<std::string>();
            }
        }
    }
    serving.join();

    REQUIRE(bridge_rewards.size() == oracle_rewards.size());
    for (std::size_t i = 0; i < oracle_rewards.size(); ++i) {
        CHECK(bridge_rewards[i] == oracle_rewards[i]);  // bitwise equal
    }
    REQUIRE(bridge_obs.size() == oracle_obs.size());
    for (std::size_t i = 0; i < oracle_obs.size(); ++i) {
        CHECK(bridge_obs[i] == oracle_obs[i]);
    }
    CHECK(bridge_term == termination_name(oracle_term));
}

TEST_CASE("stale ticks and malformed lines close the session with an error") {
    TempDir dir("bridge_err");
    auto path = write_fixture(dir, 20);
    BridgeConfig cfg = test_config();

    SUBCASE("stale tick") {
        BridgeServer server(cfg, {path});
        server.bind("127.0.0.1", 0);
        std::thread serving([&] { server.serve_connections(1); });
        TestClient client(server.port());
        client.read();  // hello
        client.write({{"kind", "hello"}, {"protocol", kBridgeProtocol}});
        client.read();  // reset
        json obs = client.read();
        REQUIRE(obs["kind"] == "observation");
        // answer with the previous tick
        client.write({{"kind", "action"},
                      {"tick", obs["tick"].get<int>() - 1},
                      {"agents", {{"ego", {0.0, 0.0}}}}});
        json err = client.read();
        CHECK(err["kind"] == "error");
        CHECK(err["message"].get<std::string>().find("stale tick") != std::string::npos);
        serving.join();
    }

    SUBCASE("malformed line") {
        BridgeServer server(cfg, {path});
        server.bind("127.0.0.1", 0);
        std::thread serving([&] { server.serve_connections(1); });
        TestClient client(server.port());
        client.read();
        client.write({{"kind", "hello"}, {"protocol", kBridgeProtocol}});
        client.read();
        client.read();  // observation
        client.write_raw("this is not json");
        json err = client.read();
        CHECK(err["kind"] == "error");
        CHECK(err["message"].get<std::string>().find("malformed line") != std::string::npos);
        serving.join();
    }

    SUBCASE("wrong protocol version") {
        BridgeServer server(cfg, {path});
        server.bind("127.0.0.1", 0);
        std::thread serving([&] { server.serve_connections(1); });
        TestClient client(server.port());
        client.read();
        client.write({{"kind", "hello"}, {"protocol", "sfb/999"}});
        json err = client.read();
        CHECK(err["kind"] == "error");
        serving.join();
    }
}

TEST_CASE("concurrent sessions progress independently") {
    TempDir dir("bridge_conc");
    auto path = write_fixture(dir, 15);
    BridgeConfig cfg = test_config();
    BridgeServer server(cfg, {path});
    server.bind("127.0.0.1", 0);
    std::atomic<int> finished{0};
    std::thread serving([&] { server.serve_connections(3); });

    auto client_run = [&](double accel) {
        TestClient client(server.port());
        client.read();
        client.write({{"kind", "hello"}, {"protocol", kBridgeProtocol}});
        client.read();  // reset
        for (;;) {
            json msg = client.read();
            if (msg["kind"] == "bye") {
                break;
            }
            if (msg["kind"] == "observation") {
                client.write({{"kind", "action"},
                              {"tick", msg["tick"]},
                              {"agents", {{"ego", {0.0, accel}}}}});
            }
        }
        finished.fetch_add(1);
    };
    std::thread c1(client_run, 0.0), c2(client_run, 0.5), c3(client_run, 1.0);
    c1.join();
    c2.join();
    c3.join();
    serving.join();
    CHECK(finished.load() == 3);
}

TEST_CASE("missing agents default to zero actions with a warning") {
    TempDir dir("bridge_missing");
    auto path = write_fixture(dir, 12);
    BridgeConfig cfg = test_config();
    BridgeServer server(cfg, {path});
    server.bind("127.0.0.1", 0);
    std::thread serving([&] { server.serve_connections(1); });

    {
        TestClient client(server.port());
        client.read();
        client.write({{"kind", "hello"}, {"protocol", kBridgeProtocol}});
        client.read();
        json obs = client.read();
        client.write({{"kind", "action"}, {"tick", obs["tick"]}, {"agents", json::object()}});
        json result = client.read();
        CHECK(result["kind"] == "result");
        CHECK(result.contains("warning"));
    }  // dropping the connection ends the session
    serving.join();
}
