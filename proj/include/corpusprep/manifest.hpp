#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusprep/verdict.hpp"

namespace corpusprep {

// Per-stage audit record. A document dropped for several reasons at once is
// counted once, under the '+'-joined reason key (e.g. "low_alpha+structured_size"),
// which keeps sum(drop_reasons) == dropped_count while still reporting every
// violated rule.
struct PipelineManifest {
    std::string stage_name;
    int stage_index = 0;
    uint64_t input_count = 0;
    uint64_t kept_count = 0;
    uint64_t dropped_count = 0;
    std::map<std::string, uint64_t> drop_reasons;
    std::string config_digest;
    uint64_t seed = 0;

    // Non-drop event counters (e.g. "fim_too_short", "fim_token_collision").
    std::map<std::string, uint64_t> counters;
    // Free-form stage notes ("skipped": "scanner not configured", ...).
    std::map<std::string, std::string> notes;
    // Stage-specific reporting payload (histograms for the stats command).
    nlohmann::json extra = nlohmann::json::object();

    void record_keep() {
        ++input_count;
        ++kept_count;
    }

    void record_drop(const FilterVerdict& verdict);

    // Throws DataError if the count identities do not hold.
    void check() const;

    nlohmann::json to_json() const;
    static PipelineManifest from_json(const nlohmann::json& j);

    void save(const std::string& path) const;
    static PipelineManifest load(const std::string& path);
};

// Joins a verdict's reasons into the manifest key ("a+b" for multi-reason drops).
std::string join_reasons(const std::vector<std::string>& reasons);

}  // namespace corpusprep
