#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusprep/dedup.hpp"
#include "corpusprep/fim.hpp"
#include "corpusprep/manifest.hpp"
#include "corpusprep/mixture.hpp"
#include "corpusprep/quality.hpp"
#include "corpusprep/safety.hpp"

namespace corpusprep {

// Canonical stage order. `ingest` always runs; the rest have toggles.
enum class Stage {
    kIngest = 0,
    kLanguageFilter = 1,
    kLicenseFilter = 2,
    kQuality = 3,
    kExactDedup = 4,
    kFuzzyDedup = 5,
    kHap = 6,
    kPii = 7,
    kMalware = 8,
    kFim = 9,
    kMix = 10,
};

std::string_view stage_name(Stage stage);

struct StageToggles {
    bool language_filter = true;
    bool license_filter = true;
    bool quality = true;
    bool exact_dedup = true;
    bool fuzzy_dedup = true;
    bool hap = false;      // needs a dictionary file
    bool pii = true;
    bool malware = false;  // needs a scanner command
    bool fim = true;
    bool mix = false;      // needs a mixture spec
};

struct HapStageConfig {
    std::string dictionary_file;
    uint64_t threshold = 2;
    bool whole_token = true;
};

struct MalwareStageConfig {
    std::string command;  // template with {file}; empty → stage skipped
};

struct PiiStageConfig {
    RedactTokens tokens;
};

struct MixtureStageConfig {
    MixtureSpec spec;
    TokenCounter counter;
};

struct PipelineConfig {
    std::string input;
    std::string output_dir = "out";
    uint64_t seed = 0;
    unsigned workers = 1;
    bool streaming = false;
    std::string group_by = "none";  // none | language
    bool drop_original = false;
    bool strict_scan = false;
    bool repeat = false;

    StageToggles stages;
    std::vector<std::string> language_allowlist;  // empty → all known languages
    std::vector<std::string> permissive_licenses = {
        "MIT", "Apache-2.0", "BSD-2-Clause", "BSD-3-Clause", "ISC", "Unlicense"};

    QualityConfig quality;
    IssueConfig issue;
    std::string stopwords_file;  // optional override for the built-in list
    DedupConfig dedup;
    HapStageConfig hap;
    PiiStageConfig pii;
    MalwareStageConfig malware;
    FimConfig fim;
    MixtureStageConfig mixture;

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static PipelineConfig load(const std::string& path);

    // SHA-256 of the canonical (sorted-key, fully populated) serialization;
    // stable under field reordering in the source file.
    std::string config_digest() const;

    void validate() const;        // value invariants
    void validate_paths() const;  // referenced files exist
};

struct PipelineRunResult {
    std::vector<PipelineManifest> manifests;
    uint64_t final_count = 0;
    std::string output_path;
};

// Runs the stages selected by `only` (empty → every enabled stage) in
// canonical order. Writes per-stage outputs (unless streaming), manifests,
// out/output.jsonl, and drops an INCOMPLETE marker that is removed on success.
PipelineRunResult run_pipeline(const PipelineConfig& cfg,
                               const std::vector<Stage>& only = {});

struct StatsReport {
    std::string text;
    nlohmann::json json;
    bool invariants_ok = true;
};

StatsReport stats_report(const std::string& manifest_dir);

struct BenchReport {
    double quality_mb_per_s = 0.0;
    double exact_dedup_mb_per_s = 0.0;
    double combined_mb_per_s = 0.0;
    uint64_t bytes_processed = 0;
    std::string text;
};

// Synthetic single-threaded throughput probe for the quality-filter and
// exact-dedup stages. Report-only; no pass/fail gating.
BenchReport run_benchmark(uint64_t target_bytes, uint64_t seed);

}  // namespace corpusprep
