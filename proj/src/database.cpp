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
#include "scensim/database.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scensim/engine.hpp"
#include "scensim/metrics.hpp"
#include "scensim/parallel.hpp"

namespace scensim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DbError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

std::string posixify(const fs::path& p) {
    return p.lexically_normal().generic_string();
}

/// Relative path from out_dir to a scenario reachable as db_dir/relative.
std::string reanchor(const fs::path& db_dir, const std::string& relative, const fs::path& out_dir) {
    fs::path target = (fs::absolute(db_dir) / relative).lexically_normal();
    fs::path base = fs::absolute(out_dir).lexically_normal();
    return posixify(target.lexically_relative(base));
}

void write_failure_report(const fs::path& out_dir, const std::vector<json>& rows) {
    if (rows.empty()) {
        return;
    }
    std::ofstream out(out_dir / kFailureFile, std::ios::trunc);
    for (const json& row : rows) {
        out << row.dump() << "\n";
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

DatabaseManifest load_manifest(const fs::path& db_dir) {
    DatabaseManifest manifest;
    json summary, mapping;
    try {
        summary = json::parse(read_binary_file(db_dir / kSummaryFile));
        mapping = json::parse(read_binary_file(db_dir / kMappingFile));
    } catch (const std::exception& e) {
        throw DbError("cannot load database manifest in " + db_dir.string() + ": " + e.what());
    }
    for (const auto& [id, meta] : summary.items()) {
        manifest.summary.emplace(id, metadata_from_json(meta));
    }
    for (const auto& [id, path] : mapping.items()) {
        manifest.mapping.emplace(id, path.get<std::string>());
    }
    if (manifest.summary.size() != manifest.mapping.size()) {
        throw DbError("summary and mapping key sets differ in " + db_dir.string());
    }
    for (const auto& [id, path] : manifest.mapping) {
        if (manifest.summary.find(id) == manifest.summary.end()) {
            throw DbError("mapping id missing from summary: " + id);
        }
    }
    return manifest;
}

void save_manifest(const DatabaseManifest& manifest, const fs::path& db_dir) {
    ensure_dir(db_dir);
    json summary = json::object();
    for (const auto& [id, meta] : manifest.summary) {
        summary[id] = metadata_to_json(meta);
    }
    json mapping = json::object();
    for (const auto& [id, path] : manifest.mapping) {
        mapping[id] = path;
    }
    write_binary_file(db_dir / kSummaryFile, summary.dump(2) + "\n");
    write_binary_file(db_dir / kMappingFile, mapping.dump(2) + "\n");
}

fs::path resolve_scenario_path(const fs::path& db_dir, const std::string& relative) {
    return (db_dir / relative).lexically_normal();
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, std::function<double(const ScenarioMetadata&)>>& numeric_fields() {
    static const std::map<std::string, std::function<double(const ScenarioMetadata&)>> fields = {
        {"ego_moving_distance",
         [](const ScenarioMetadata& m) {
             auto it = m.per_object_moving_distance.find(m.sdc_id);
             return it == m.per_object_moving_distance.end() ? 0.0 : it->second;
         }},
        {"object_count", [](const ScenarioMetadata& m) { return static_cast<double>(m.object_count); }},
        {"light_count", [](const ScenarioMetadata& m) { return static_cast<double>(m.light_count); }},
        {"episode_length",
         [](const ScenarioMetadata& m) { return static_cast<double>(m.episode_length); }},
        {"altitude_range", [](const ScenarioMetadata& m) { return m.altitude_range; }},
        {"difficulty", [](const ScenarioMetadata& m) { return m.difficulty.value_or(0.0); }},
        {"dt", [](const ScenarioMetadata& m) { return m.dt; }},
    };
    return fields;
}

bool apply_op(FilterOp op, double lhs, double rhs) {
    switch (op) {
        case FilterOp::Lt: return lhs < rhs;
        case FilterOp::Le: return lhs <= rhs;
        case FilterOp::Gt: return lhs > rhs;
        case FilterOp::Ge: return lhs >= rhs;
        case FilterOp::Eq: return lhs == rhs;
        case FilterOp::Ne: return lhs != rhs;
    }
    return false;
}

}  // namespace

FilterClause FilterClause::parse(const std::string& text) {
    static const std::vector<std::pair<std::string, FilterOp>> ops = {
        {"<=", FilterOp::Le}, {">=", FilterOp::Ge}, {"==", FilterOp::Eq},
        {"!=", FilterOp::Ne}, {"<", FilterOp::Lt},  {">", FilterOp::Gt},
    };
    for (const auto& [token, op] : ops) {
        auto pos = text.find(token);
        if (pos == std::string::npos) {
            continue;
        }
        FilterClause clause;
        clause.field = text.substr(0, pos);
        clause.op = op;
        std::string rhs = text.substr(pos + token.size());
        if (clause.field == "source") {
            if (op != FilterOp::Eq && op != FilterOp::Ne) {
                throw DbError("source supports only == and !=: " + text);
            }
            clause.is_tag = true;
            clause.tag = rhs;
            return clause;
        }
        if (numeric_fields().find(clause.field) == numeric_fields().end()) {
            throw DbError("unknown metadata field in filter: " + clause.field);
        }
        try {
            clause.value = std::stod(rhs);
        } catch (const std::exception&) {
            throw DbError("malformed filter value: " + text);
        }
        return clause;
    }
    throw DbError("malformed filter clause (no comparison operator): " + text);
}

bool FilterPredicate::matches(const ScenarioMetadata& meta) const {
    for (const FilterClause& clause : clauses) {
        if (clause.is_tag) {
            bool eq = meta.source == clause.tag;
            if (clause.op == FilterOp::Eq ? !eq : eq) {
                return false;
            }
            continue;
        }
        auto it = numeric_fields().find(clause.field);
        if (it == numeric_fields().end()) {
            throw DbError("unknown metadata field in filter: " + clause.field);
        }
        if (!apply_op(clause.op, it->second(meta), clause.value)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// build_database
// ---------------------------------------------------------------------------

BuildResult build_database(const ConverterFn& convert, std::size_t item_count,
                           const fs::path& out_dir, int workers) {
    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        throw DbError("output directory is not empty: " + out_dir.string());
    }
    ensure_dir(out_dir);

    struct Slot {
        bool ok = false;
        std::string id;
        ScenarioMetadata meta;
        std::string bytes;  // compressed scenario
        std::string error;
    };
    std::vector<Slot> slots(item_count);

    parallel_for(item_count, workers, [&](std::size_t i) {
        Slot& slot = slots[i];
        try {
            ScenarioDescription desc = convert(i);
            if (!desc.metadata.difficulty) {
                auto it = desc.tracks.find(desc.metadata.sdc_id);
                if (it != desc.tracks.end()) {
                    try {
                        desc.metadata.difficulty = difficulty_score(it->second);
                    } catch (const std::exception&) {
                    }
                }
            }
            ValidationReport report = validate_scenario(desc);
            if (!report.pass) {
                throw DbError("converted scenario is invalid: " + report.to_string());
            }
            slot.id = desc.scenario_id;
            slot.meta = desc.metadata;
            slot.bytes = gzip_compress(scenario_to_json(desc).dump());
            slot.ok = true;
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    // serialized assembly, in item order, so results never depend on timing
    BuildResult result;
    std::vector<json> failure_rows;
    for (std::size_t i = 0; i < item_count; ++i) {
        Slot& slot = slots[i];
        if (slot.ok && result.manifest.summary.count(slot.id)) {
            slot.ok = false;
            slot.error = "duplicate scenario id: " + slot.id;
        }
        if (!slot.ok) {
            result.failures.push_back({i, slot.error});
            failure_rows.push_back({{"item", i}, {"error", slot.error}});
            continue;
        }
        std::string filename = slot.id + ".sif";
        write_binary_file(out_dir / filename, slot.bytes);
        result.manifest.summary.emplace(slot.id, slot.meta);
        result.manifest.mapping.emplace(slot.id, filename);
    }
    if (result.manifest.summary.empty()) {
        throw DbError("no input item converted successfully");
    }
    save_manifest(result.manifest, out_dir);
    write_failure_report(out_dir, failure_rows);
    return result;
}

// ---------------------------------------------------------------------------
// Derived databases (all copy-free)
// ---------------------------------------------------------------------------

DatabaseManifest merge_databases(const std::vector<fs::path>& db_dirs, const fs::path& out_dir) {
    ensure_dir(out_dir);
    DatabaseManifest merged;
    for (const fs::path& dir : db_dirs) {
        DatabaseManifest manifest = load_manifest(dir);
        for (const auto& [id, meta] : manifest.summary) {
            if (merged.summary.count(id)) {
                throw DbError("duplicate scenario id across databases: " + id);
            }
            merged.summary.emplace(id, meta);
            merged.mapping.emplace(id, reanchor(dir, manifest.mapping.at(id), out_dir));
        }
    }
    save_manifest(merged, out_dir);
    return merged;
}

DatabaseManifest filter_database(const fs::path& db_dir, const FilterPredicate& pred,
                                 const fs::path& out_dir) {
    DatabaseManifest source = load_manifest(db_dir);
    ensure_dir(out_dir);
    DatabaseManifest result;
    for (const auto& [id, meta] : source.summary) {
        if (pred.matches(meta)) {
            result.summary.emplace(id, meta);
            result.mapping.emplace(id, reanchor(db_dir, source.mapping.at(id), out_dir));
        }
    }
    save_manifest(result, out_dir);
    return result;
}

std::pair<DatabaseManifest, DatabaseManifest> split_database(const fs::path& db_dir,
                                                             double train_fraction,
                                                             double test_fraction,
                                                             std::uint64_t seed,
                                                             const fs::path& train_dir,
                                                             const fs::path& test_dir) {
    if (std::abs(train_fraction + test_fraction - 1.0) > 1e-9) {
        throw DbError("split fractions must sum to 1");
    }
    DatabaseManifest source = load_manifest(db_dir);
    std::vector<std::string> ids;
    ids.reserve(source.size());
    for (const auto& [id, meta] : source.summary) {
        ids.push_back(id);
    }
    DetRng rng(seed);
    det_shuffle(ids, rng);

    // round half up; the remainder goes to train
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(ids.size()) + 0.5));
    n_train = std::min(n_train, ids.size());

    ensure_dir(train_dir);
    ensure_dir(test_dir);
    DatabaseManifest train, test;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string& id = ids[i];
        DatabaseManifest& part = i < n_train ? train : test;
        const fs::path& part_dir = i < n_train ? train_dir : test_dir;
        part.summary.emplace(id, source.summary.at(id));
        part.mapping.emplace(id, reanchor(db_dir, source.mapping.at(id), part_dir));
    }
    save_manifest(train, train_dir);
    save_manifest(test, test_dir);
    return {train, test};
}

DatabaseManifest sample_database(const fs::path& db_dir, std::size_t n, std::uint64_t seed,
                                 const fs::path& out_dir) {
    DatabaseManifest source = load_manifest(db_dir);
    if (n > source.size()) {
        throw DbError("sample size exceeds database size");
    }
    std::vector<std::string> ids;
    ids.reserve(source.size());
    for (const auto& [id, meta] : source.summary) {
        ids.push_back(id);
    }
    DetRng rng(seed);
    det_shuffle(ids, rng);
    ensure_dir(out_dir);
    DatabaseManifest result;
    for (std::size_t i = 0; i < n; ++i) {
        result.summary.emplace(ids[i], source.summary.at(ids[i]));
        result.mapping.emplace(ids[i], reanchor(db_dir, source.mapping.at(ids[i]), out_dir));
    }
    save_manifest(result, out_dir);
    return result;
}

// ---------------------------------------------------------------------------
// Sanity check
// ---------------------------------------------------------------------------

std::pair<DatabaseManifest, SanityReport> sanity_check_database(const fs::path& db_dir,
                                                                const fs::path& out_dir,
                                                                int workers) {
    DatabaseManifest source = load_manifest(db_dir);
    std::vector<std::pair<std::string, std::string>> entries(source.mapping.begin(),
                                                             source.mapping.end());
    std::vector<std::string> reasons(entries.size());

    parallel_for(entries.size(), workers, [&](std::size_t i) {
        const auto& [id, relative] = entries[i];
        try {
            json doc = read_sif_json(resolve_scenario_path(db_dir, relative));
            ValidationReport report = validate_scenario_json(doc);
            if (!report.pass) {
                reasons[i] = report.violations.front().what;
                return;
            }
            ScenarioDescription desc = scenario_from_json(doc);
            MapIndex index(desc.map_features);
            World world(desc, index);  // reset must not fault
        } catch (const std::exception& e) {
            reasons[i] = e.what();
        }
    });

    ensure_dir(out_dir);
    DatabaseManifest result;
    SanityReport report;
    std::vector<json> failure_rows;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& [id, relative] = entries[i];
        if (reasons[i].empty()) {
            result.summary.emplace(id, source.summary.at(id));
            result.mapping.emplace(id, reanchor(db_dir, relative, out_dir));
        } else {
            report.dropped.push_back({id, reasons[i]});
            failure_rows.push_back({{"scenario_id", id}, {"error", reasons[i]}});
        }
    }
    save_manifest(result, out_dir);
    write_failure_report(out_dir, failure_rows);
    return {result, report};
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

namespace {

StatsColumn column_of(const std::vector<double>& values) {
    StatsColumn col;
    if (values.empty()) {
        return col;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    col.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) {
        var += (v - col.mean) * (v - col.mean);
    }
    col.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return col;
}

}  // namespace

StatsTable database_stats(const fs::path& db_dir, int workers) {
    DatabaseManifest source = load_manifest(db_dir);
    if (source.size() == 0) {
        throw DbError("stats on empty database");
    }
    std::vector<std::pair<std::string, std::string>> entries(source.mapping.begin(),
                                                             source.mapping.end());
    struct Row {
        double track_length = 0.0;
        double vehicles = 0.0;
        double pedestrians = 0.0;
        bool intersection = false;
        bool construction = false;
    };
    std::vector<Row> rows(entries.size());

    parallel_for(entries.size(), workers, [&](std::size_t i) {
        const auto& [id, relative] = entries[i];
        ScenarioDescription desc = read_scenario(resolve_scenario_path(db_dir, relative));
        Row& row = rows[i];
        for (const auto& [oid, track] : desc.tracks) {
            switch (track.type) {
                case ObjectType::Vehicle: row.vehicles += 1.0; break;
                case ObjectType::Pedestrian: row.pedestrians += 1.0; break;
                case ObjectType::Cone:
                case ObjectType::Barrier: row.construction = true; break;
                case ObjectType::Cyclist: break;
            }
        }
        auto sdc = desc.tracks.find(desc.metadata.sdc_id);
        if (sdc != desc.tracks.end()) {
            row.track_length = sdc->second.moving_distance();
        }
        if (desc.metadata.source == "pg") {
            auto it = desc.metadata.extras.find("pg_intersection_blocks");
            row.intersection = it != desc.metadata.extras.end() && it->second >= 1.0;
        } else {
            row.intersection = !desc.dynamic_states.empty();
        }
    });

    StatsTable table;
    table.scenarios = rows.size();
    std::vector<double> lengths, vehicles, pedestrians;
    for (const Row& row : rows) {
        lengths.push_back(row.track_length);
        vehicles.push_back(row.vehicles);
        pedestrians.push_back(row.pedestrians);
        table.intersection_ratio += row.intersection ? 1.0 : 0.0;
        table.construction_ratio += row.construction ? 1.0 : 0.0;
    }
    table.track_length = column_of(lengths);
    table.vehicle_count = column_of(vehicles);
    table.pedestrian_count = column_of(pedestrians);
    table.intersection_ratio /= static_cast<double>(rows.size());
    table.construction_ratio /= static_cast<double>(rows.size());
    return table;
}

json StatsTable::to_json() const {
    return {{"scenarios", scenarios},
            {"track_length", {{"mean", track_length.mean}, {"std", track_length.stddev}}},
            {"vehicle_count", {{"mean", vehicle_count.mean}, {"std", vehicle_count.stddev}}},
            {"pedestrian_count", {{"mean", pedestrian_count.mean}, {"std", pedestrian_count.stddev}}},
            {"intersection_ratio", intersection_ratio},
            {"construction_ratio", construction_ratio}};
}

std::string StatsTable::to_text() const {
    std::ostringstream out;
    out << "scenarios:          " << scenarios << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "track length:       %.2f +/- %.2f\n", track_length.mean,
                  track_length.stddev);
    out << buf;
    std::snprintf(buf, sizeof(buf), "vehicles:           %.2f +/- %.2f\n", vehicle_count.mean,
                  vehicle_count.stddev);
    out << buf;
    std::snprintf(buf, sizeof(buf), "pedestrians:        %.2f +/- %.2f\n", pedestrian_count.mean,
                  pedestrian_count.stddev);
    out << buf;
    std::snprintf(buf, sizeof(buf), "intersection ratio: %.2f\n", intersection_ratio);
    out << buf;
    std::snprintf(buf, sizeof(buf), "construction ratio: %.2f\n", construction_ratio);
    out << buf;
    return std::move(out).str();
}

}  // namespace scensim
