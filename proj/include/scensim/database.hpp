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

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "scensim/sif.hpp"

namespace scensim {

struct DbError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kSummaryFile = "db_summary.json";
constexpr const char* kMappingFile = "db_mapping.json";
constexpr const char* kFailureFile = "failures.jsonl";

/// A database is a directory with two manifest files; scenario files live
/// wherever the mapping's relative paths point, possibly outside it.
struct DatabaseManifest {
    std::map<std::string, ScenarioMetadata> summary;
    std::map<std::string, std::string> mapping;  // id -> path relative to the db dir

    std::size_t size() const { return summary.size(); }
};

DatabaseManifest load_manifest(const std::filesystem::path& db_dir);
void save_manifest(const DatabaseManifest& manifest, const std::filesystem::path& db_dir);
std::filesystem::path resolve_scenario_path(const std::filesystem::path& db_dir,
                                            const std::string& relative);

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

enum class FilterOp { Lt, Le, Gt, Ge, Eq, Ne };

/// One clause over scenario metadata; numeric fields compare against value,
/// the "source" field compares tags. Clauses never require opening the
/// scenario file.
struct FilterClause {
    std::string field;
    FilterOp op = FilterOp::Gt;
    double value = 0.0;
    std::string tag;  // for source equality
    bool is_tag = false;

    /// Parses e.g. "ego_moving_distance>10", "object_count<=200",
    /// "source==pg". Throws DbError on unknown fields or malformed input.
    static FilterClause parse(const std::string& text);
};

/// Conjunction of clauses. Numeric fields: ego_moving_distance,
/// object_count, light_count, episode_length, altitude_range, difficulty, dt.
struct FilterPredicate {
    std::vector<FilterClause> clauses;

    bool matches(const ScenarioMetadata& meta) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct BuildFailure {
    std::size_t item = 0;
    std::string error;
};

struct BuildResult {
    DatabaseManifest manifest;
    std::vector<BuildFailure> failures;
};

using ConverterFn = std::function<ScenarioDescription(std::size_t item)>;

/// Converts items concurrently, writes one `.sif` per success into out_dir,
/// then assembles and saves the manifest in one serialized step. Failed
/// items are recorded in failures.jsonl and skipped. The result (manifest
/// and file bytes) is independent of the worker count. Fills
/// metadata.difficulty from the sdc track when the converter left it unset.
/// Throws DbError when out_dir is non-empty or no conversion succeeds.
BuildResult build_database(const ConverterFn& convert, std::size_t item_count,
                           const std::filesystem::path& out_dir, int workers);

/// Copy-free union of several databases; scenario ids must be pairwise
/// disjoint. Mapping paths are re-anchored relative to out_dir.
DatabaseManifest merge_databases(const std::vector<std::filesystem::path>& db_dirs,
                                 const std::filesystem::path& out_dir);

/// Copy-free subset of the scenarios whose metadata satisfies the predicate.
DatabaseManifest filter_database(const std::filesystem::path& db_dir, const FilterPredicate& pred,
                                 const std::filesystem::path& out_dir);

/// Deterministic disjoint-and-exhaustive split; train receives the rounding
/// remainder. Fractions must sum to 1.
std::pair<DatabaseManifest, DatabaseManifest> split_database(const std::filesystem::path& db_dir,
                                                             double train_fraction,
                                                             double test_fraction,
                                                             std::uint64_t seed,
                                                             const std::filesystem::path& train_dir,
                                                             const std::filesystem::path& test_dir);

/// Uniform sample of n scenarios without replacement, deterministic in seed.
DatabaseManifest sample_database(const std::filesystem::path& db_dir, std::size_t n,
                                 std::uint64_t seed, const std::filesystem::path& out_dir);

struct SanityReport {
    struct Entry {
        std::string scenario_id;
        std::string reason;
    };
    std::vector<Entry> dropped;
};

/// Keeps exactly the scenarios that parse, validate, and load into a
/// simulation reset without fault. Broken ones go to the report (and to
/// failures.jsonl in out_dir).
std::pair<DatabaseManifest, SanityReport> sanity_check_database(
    const std::filesystem::path& db_dir, const std::filesystem::path& out_dir, int workers);

struct StatsColumn {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct StatsTable {
    std::size_t scenarios = 0;
    StatsColumn track_length;      // ego moving distance, meters
    StatsColumn vehicle_count;
    StatsColumn pedestrian_count;
    double intersection_ratio = 0.0;
    double construction_ratio = 0.0;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Reads every scenario and aggregates the summary-table columns.
/// Intersection ratio counts traffic lights for logged sources and
/// intersection blocks (metadata extras) for procedurally generated ones.
StatsTable database_stats(const std::filesystem::path& db_dir, int workers);

}  // namespace scensim
