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

// scensim: scenario database tooling and closed-loop 2D driving simulation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error,
// 3 check found broken scenarios (clean database still written).

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <mutex>

#include "scensim/bridge.hpp"
#include "scensim/curriculum.hpp"
#include "scensim/database.hpp"
#include "scensim/parallel.hpp"
#include "scensim/pg.hpp"
#include "scensim/rollout.hpp"
#include "scensim/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scensim;

namespace {

/// Relative database paths resolve against SCENARIO_DB_ROOT when it is set.
fs::path resolve_db_path(const std::string& arg) {
    fs::path p(arg);
    if (p.is_absolute()) {
        return p;
    }
    const char* root = std::getenv("SCENARIO_DB_ROOT");
    if (root != nullptr && *root != '\0' && !fs::exists(p)) {
        return fs::path(root) / p;
    }
    return p;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    auto dots = text.find("..");
    if (dots == std::string::npos) {
        std::uint64_t single = std::stoull(text);
        return {single, single};
    }
    std::uint64_t lo = std::stoull(text.substr(0, dots));
    std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) {
        throw CLI::ValidationError("--seeds", "range end before start");
    }
    return {lo, hi};
}

PGConfig load_pg_config(const std::string& config_path) {
    if (config_path.empty()) {
        return PGConfig{};
    }
    return PGConfig::from_json(json::parse(read_binary_file(config_path)));
}

FilterPredicate build_predicate(const std::vector<std::string>& clauses) {
    FilterPredicate pred;
    for (const std::string& text : clauses) {
        pred.clauses.push_back(FilterClause::parse(text));
    }
    return pred;
}

/// Scenario files named by a database manifest, or the single `.sif` given.
std::vector<fs::path> collect_scenario_files(const std::string& arg) {
    fs::path p = resolve_db_path(arg);
    if (p.extension() == ".sif") {
        return {p};
    }
    DatabaseManifest manifest = load_manifest(p);
    std::vector<fs::path> files;
    files.reserve(manifest.size());
    for (const auto& [id, relative] : manifest.mapping) {
        files.push_back(resolve_scenario_path(p, relative));
    }
    return files;
}

json records_to_json(const std::vector<EpisodeRecord>& records) {
    json rows = json::array();
    for (const EpisodeRecord& r : records) {
        rows.push_back({{"scenario_id", r.scenario_id},
                        {"agent_id", r.agent_id},
                        {"outcome", termination_name(r.outcome)},
                        {"route_completion", r.route_completion},
                        {"mean_speed", r.mean_speed},
                        {"reward", r.total_reward},
                        {"cost", r.crashes},
                        {"steps", r.steps}});
    }
    return rows;
}

json summary_to_json(const MetricsSummary& s) {
    return {{"episodes", s.episodes},
            {"success_rate", s.success_rate},
            {"out_of_road_rate", s.out_of_road_rate},
            {"timeout_rate", s.timeout_rate},
            {"route_completion", s.mean_route_completion},
            {"speed", s.mean_speed},
            {"cost", s.mean_cost},
            {"reward", s.mean_reward}};
}

void emit_metrics(const std::vector<EpisodeRecord>& records, const std::string& out_path) {
    json doc{{"summary", summary_to_json(episode_metrics(records))},
             {"episodes", records_to_json(records)}};
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        write_binary_file(out_path, doc.dump(2) + "\n");
        std::cout << "metrics written to " << out_path << "\n";
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"scenario database tools and closed-loop 2D driving simulator"};
    app.require_subcommand(1);

    // ---- pg-gen ----------------------------------------------------------
    auto* pg = app.add_subcommand("pg-gen", "procedurally generate a scenario database");
    std::string pg_seeds = "0..9", pg_out, pg_config;
    int pg_workers = 0;
    pg->add_option("--seeds", pg_seeds, "seed range, e.g. 0..99")->capture_default_str();
    pg->add_option("--out", pg_out, "output database directory")->required();
    pg->add_option("--config", pg_config, "PG config JSON file");
    pg->add_option("--workers", pg_workers, "worker threads (0 = auto)");
    // flags mirroring the most-used config keys; a flag beats the file
    auto* pg_density = pg->add_option("--density", "vehicles per 100 m of lane");
    auto* pg_blocks = pg->add_option("--blocks", "number of road blocks");
    auto* pg_lanes = pg->add_option("--lanes", "lanes per road");
    auto* pg_duration = pg->add_option("--duration", "episode duration in seconds");
    auto* pg_dt = pg->add_option("--dt", "seconds between frames");
    auto* pg_construction = pg->add_option("--construction-prob", "cone/barrier cluster probability");
    pg->callback([&] {
        auto [lo, hi] = parse_seed_range(pg_seeds);
        PGConfig base = load_pg_config(pg_config);
        if (*pg_density) base.traffic_density = pg_density->as<double>();
        if (*pg_blocks) base.num_blocks = pg_blocks->as<int>();
        if (*pg_lanes) base.lanes_per_road = pg_lanes->as<int>();
        if (*pg_duration) base.duration_s = pg_duration->as<double>();
        if (*pg_dt) base.dt = pg_dt->as<double>();
        if (*pg_construction) base.construction_prob = pg_construction->as<double>();
        base.validate();
        BuildResult result = build_database(
            [&, lo = lo](std::size_t item) {
                PGConfig cfg = base;
                cfg.seed = lo + item;
                return generate_scenario(cfg);
            },
            hi - lo + 1, resolve_db_path(pg_out), pg_workers);
        std::cout << "generated " << result.manifest.size() << " scenarios ("
                  << result.failures.size() << " failures)\n";
    });

    // ---- convert ---------------------------------------------------------
    auto* convert = app.add_subcommand("convert", "convert frame-centric logs into a database");
    std::string convert_in, convert_out, convert_source = "log";
    int convert_workers = 0;
    convert->add_option("--input", convert_in, "directory of .jsonl / .jsonl.gz frame logs")
        ->required();
    convert->add_option("--out", convert_out, "output database directory")->required();
    convert->add_option("--source", convert_source, "source tag stored in metadata")
        ->capture_default_str();
    convert->add_option("--workers", convert_workers, "worker threads (0 = auto)");
    convert->callback([&] {
        std::vector<fs::path> logs;
        for (const auto& entry : fs::directory_iterator(convert_in)) {
            if (!entry.is_regular_file()) {
                continue;
            }
            fs::path p = entry.path();
            if (p.extension() == ".jsonl" || p.filename().string().ends_with(".jsonl.gz")) {
                logs.push_back(p);
            }
        }
        std::sort(logs.begin(), logs.end());
        if (logs.empty()) {
            throw DbError("no .jsonl frame logs under " + convert_in);
        }
        BuildResult result = build_database(
            [&](std::size_t item) {
                const fs::path& log_path = logs[item];
                std::string stem = log_path.filename().string();
                stem = stem.substr(0, stem.find('.'));
                return scenario_from_frame_log(read_frame_log(log_path), stem, convert_source);
            },
            logs.size(), resolve_db_path(convert_out), convert_workers);
        std::cout << "converted " << result.manifest.size() << " scenarios ("
                  << result.failures.size() << " failures)\n";
        for (const BuildFailure& f : result.failures) {
            std::cerr << "  item " << f.item << " (" << logs[f.item].filename().string()
                      << "): " << f.error << "\n";
        }
    });

    // ---- merge -----------------------------------------------------------
    auto* merge = app.add_subcommand("merge", "combine databases (copy-free)");
    std::vector<std::string> merge_dbs;
    std::string merge_out;
    merge->add_option("dbs", merge_dbs, "source database directories")->required()->expected(-2);
    merge->add_option("--out", merge_out, "output database directory")->required();
    merge->callback([&] {
        std::vector<fs::path> dirs;
        for (const std::string& db : merge_dbs) {
            dirs.push_back(resolve_db_path(db));
        }
        DatabaseManifest merged = merge_databases(dirs, resolve_db_path(merge_out));
        std::cout << "merged " << merged.size() << " scenarios\n";
    });

    // ---- filter ----------------------------------------------------------
    auto* filter = app.add_subcommand("filter", "keep scenarios whose metadata matches (copy-free)");
    std::string filter_db, filter_out;
    std::vector<std::string> filter_clauses;
    filter->add_option("db", filter_db, "source database")->required();
    filter->add_option("--out", filter_out, "output database directory")->required();
    filter
        ->add_option("--filter", filter_clauses,
                     "clause like 'ego_moving_distance>10' or 'source==pg' (repeatable, conjunctive)")
        ->required();
    filter->callback([&] {
        DatabaseManifest result = filter_database(
            resolve_db_path(filter_db), build_predicate(filter_clauses), resolve_db_path(filter_out));
        std::cout << "kept " << result.size() << " scenarios\n";
    });

    // ---- split -----------------------------------------------------------
    auto* split = app.add_subcommand("split", "split into train/test databases (copy-free)");
    std::string split_db, split_train, split_test;
    double split_fraction = 0.8;
    std::uint64_t split_seed = 0;
    split->add_option("db", split_db, "source database")->required();
    split->add_option("--train-fraction", split_fraction, "fraction of scenarios for train")
        ->capture_default_str();
    split->add_option("--out-train", split_train, "train database directory")->required();
    split->add_option("--out-test", split_test, "test database directory")->required();
    split->add_option("--seed", split_seed, "shuffle seed");
    split->callback([&] {
        auto [train, test] =
            split_database(resolve_db_path(split_db), split_fraction, 1.0 - split_fraction,
                           split_seed, resolve_db_path(split_train), resolve_db_path(split_test));
        std::cout << "train " << train.size() << ", test " << test.size() << "\n";
    });

    // ---- sample ----------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "sample scenarios without replacement (copy-free)");
    std::string sample_db, sample_out;
    std::size_t sample_n = 0;
    std::uint64_t sample_seed = 0;
    sample->add_option("db", sample_db, "source database")->required();
    sample->add_option("-n,--count", sample_n, "number of scenarios")->required();
    sample->add_option("--out", sample_out, "output database directory")->required();
    sample->add_option("--seed", sample_seed, "sampling seed");
    sample->callback([&] {
        DatabaseManifest result = sample_database(resolve_db_path(sample_db), sample_n, sample_seed,
                                                  resolve_db_path(sample_out));
        std::cout << "sampled " << result.size() << " scenarios\n";
    });

    // ---- check -----------------------------------------------------------
    auto* check = app.add_subcommand("check", "sanity-check, keeping only loadable scenarios");
    std::string check_db, check_out;
    int check_workers = 0;
    bool check_failed = false;
    check->add_option("db", check_db, "source database")->required();
    check->add_option("--out", check_out, "clean database directory")->required();
    check->add_option("--workers", check_workers, "worker threads (0 = auto)");
    check->callback([&] {
        auto [result, report] = sanity_check_database(resolve_db_path(check_db),
                                                      resolve_db_path(check_out), check_workers);
        std::cout << "kept " << result.size() << ", dropped " << report.dropped.size() << "\n";
        for (const auto& entry : report.dropped) {
            std::cerr << "  " << entry.scenario_id << ": " << entry.reason << "\n";
        }
        check_failed = !report.dropped.empty();
    });

    // ---- stats -----------------------------------------------------------
    auto* stats = app.add_subcommand("stats", "database statistics table");
    std::string stats_db, stats_out;
    int stats_workers = 0;
    stats->add_option("db", stats_db, "database directory")->required();
    stats->add_option("--out", stats_out, "also write the table as JSON here");
    stats->add_option("--workers", stats_workers, "worker threads (0 = auto)");
    stats->callback([&] {
        StatsTable table = database_stats(resolve_db_path(stats_db), stats_workers);
        std::cout << table.to_text();
        if (!stats_out.empty()) {
            write_binary_file(stats_out, table.to_json().dump(2) + "\n");
        }
    });

    // ---- replay ----------------------------------------------------------
    auto* replay = app.add_subcommand("replay", "render a scenario as per-frame SVG files");
    std::string replay_db, replay_id, replay_out;
    double replay_extent = 100.0;
    replay->add_option("db", replay_db, "database directory or .sif file")->required();
    replay->add_option("--id", replay_id, "scenario id (required for databases)");
    replay->add_option("--out", replay_out, "output frame directory")->required();
    replay->add_option("--extent", replay_extent, "viewport extent in meters")
        ->capture_default_str();
    replay->callback([&] {
        fs::path path = resolve_db_path(replay_db);
        if (path.extension() != ".sif") {
            if (replay_id.empty()) {
                throw DbError("--id is required when replaying from a database");
            }
            DatabaseManifest manifest = load_manifest(path);
            auto it = manifest.mapping.find(replay_id);
            if (it == manifest.mapping.end()) {
                throw DbError("scenario id not in database: " + replay_id);
            }
            path = resolve_scenario_path(path, it->second);
        }
        ScenarioDescription desc = read_scenario(path);
        SvgOptions opts;
        opts.extent = replay_extent;
        write_replay_frames(desc, replay_out, opts);
        std::cout << "wrote " << desc.metadata.episode_length << " frames to " << replay_out << "\n";
    });

    // ---- sim -------------------------------------------------------------
    auto* sim = app.add_subcommand("sim", "simulate scenarios and report metrics");
    std::string sim_db, sim_policy = "idm", sim_mode = "single", sim_out, sim_endpoint = "127.0.0.1:0";
    int sim_workers = 0;
    std::uint64_t sim_seed = 0;
    sim->add_option("db", sim_db, "database directory or .sif file")->required();
    sim->add_option("--policy", sim_policy, "ego policy: idm | replay | bridge")
        ->check(CLI::IsMember({"idm", "replay", "bridge"}))
        ->capture_default_str();
    sim->add_option("--mode", sim_mode, "single | multi (multi requires --policy bridge)")
        ->check(CLI::IsMember({"single", "multi"}))
        ->capture_default_str();
    sim->add_option("--out", sim_out, "metrics JSON path (stdout when omitted)");
    sim->add_option("--workers", sim_workers, "worker threads for in-process policies");
    sim->add_option("--seed", sim_seed, "observation noise seed");
    sim->add_option("--endpoint", sim_endpoint, "host:port when --policy bridge")
        ->capture_default_str();
    sim->callback([&] {
        std::vector<fs::path> files = collect_scenario_files(sim_db);
        const bool multi = sim_mode == "multi";
        if (multi && sim_policy != "bridge") {
            throw DbError("--mode multi requires --policy bridge");
        }
        if (sim_policy == "bridge") {
            BridgeConfig cfg;
            cfg.engine = multi ? EngineConfig::multi_agent() : EngineConfig::single_agent();
            cfg.engine.noise_seed = sim_seed;
            auto colon = sim_endpoint.rfind(':');
            if (colon == std::string::npos) {
                throw DbError("endpoint must be host:port");
            }
            BridgeServer server(cfg, files);
            std::vector<EpisodeRecord> records;
            std::mutex records_mutex;
            server.set_episode_sink([&](const EpisodeRecord& r) {
                std::lock_guard lock(records_mutex);
                records.push_back(r);
            });
            server.bind(sim_endpoint.substr(0, colon), std::stoi(sim_endpoint.substr(colon + 1)));
            std::cout << "waiting for one client on port " << server.port() << "\n";
            server.serve_connections(1);
            emit_metrics(records, sim_out);
            return;
        }
        EngineConfig engine = EngineConfig::single_agent();
        engine.noise_seed = sim_seed;
        engine.sdc_policy = sim_policy == "idm" ? PolicyKind::Idm : PolicyKind::Replay;
        std::vector<EpisodeRecord> records(files.size());
        parallel_for(files.size(), sim_workers, [&](std::size_t i) {
            ScenarioDescription desc = read_scenario(files[i]);
            MapIndex index(desc.map_features);
            World world(desc, index, engine);
            RolloutOptions opts;
            opts.compute_observations = false;
            EpisodeResult episode = run_episode(world, null_provider(), opts);
            records[i] = episode.records.at(0);
        });
        emit_metrics(records, sim_out);
    });

    // ---- serve -----------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "policy-bridge server for external agents");
    std::string serve_db, serve_mode = "single", serve_endpoint = "127.0.0.1:7801";
    double serve_timeout = 30.0;
    serve->add_option("db", serve_db, "database directory or .sif file")->required();
    serve->add_option("--endpoint", serve_endpoint, "host:port, or '-' for stdio")
        ->capture_default_str();
    serve->add_option("--mode", serve_mode, "single | multi")
        ->check(CLI::IsMember({"single", "multi"}))
        ->capture_default_str();
    serve->add_option("--timeout", serve_timeout, "client timeout in seconds")
        ->capture_default_str();
    serve->callback([&] {
        std::vector<fs::path> files = collect_scenario_files(serve_db);
        BridgeConfig cfg;
        cfg.engine =
            serve_mode == "multi" ? EngineConfig::multi_agent() : EngineConfig::single_agent();
        cfg.client_timeout_s = serve_timeout;
        if (serve_endpoint == "-") {
            StreamTransport transport(std::cin, std::cout);
            run_bridge_session(transport, cfg, files);
            return;
        }
        auto colon = serve_endpoint.rfind(':');
        if (colon == std::string::npos) {
            throw DbError("endpoint must be host:port or '-'");
        }
        BridgeServer server(cfg, files);
        server.bind(serve_endpoint.substr(0, colon), std::stoi(serve_endpoint.substr(colon + 1)));
        std::cerr << "listening on port " << server.port() << "\n";
        server.serve();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return check_failed ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
