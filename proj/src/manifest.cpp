#include "corpusprep/manifest.hpp"

#include <fstream>
#include <numeric>

#include "corpusprep/errors.hpp"

namespace corpusprep {

std::string join_reasons(const std::vector<std::string>& reasons) {
    std::string key;
    for (const auto& r : reasons) {
        if (!key.empty()) key += '+';
        key += r;
    }
    return key;
}

void PipelineManifest::record_drop(const FilterVerdict& verdict) {
    ++input_count;
    ++dropped_count;
    ++drop_reasons[join_reasons(verdict.reasons)];
}

void PipelineManifest::check() const {
    if (input_count != kept_count + dropped_count) {
        throw DataError("manifest_invariant",
                        "stage '" + stage_name + "': input_count " + std::to_string(input_count) +
                            " != kept " + std::to_string(kept_count) + " + dropped " +
                            std::to_string(dropped_count));
    }
    uint64_t reason_sum = 0;
    for (const auto& [key, count] : drop_reasons) reason_sum += count;
    if (reason_sum != dropped_count) {
        throw DataError("manifest_invariant",
                        "stage '" + stage_name + "': drop_reasons sum " +
                            std::to_string(reason_sum) + " != dropped_count " +
                            std::to_string(dropped_count));
    }
}

nlohmann::json PipelineManifest::to_json() const {
    nlohmann::json j;
    j["stage_name"] = stage_name;
    j["stage_index"] = stage_index;
    j["input_count"] = input_count;
    j["kept_count"] = kept_count;
    j["dropped_count"] = dropped_count;
    j["drop_reasons"] = drop_reasons;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["counters"] = counters;
    j["notes"] = notes;
    j["extra"] = extra;
    return j;
}

PipelineManifest PipelineManifest::from_json(const nlohmann::json& j) {
    PipelineManifest m;
    m.stage_name = j.at("stage_name").get<std::string>();
    m.stage_index = j.value("stage_index", 0);
    m.input_count = j.at("input_count").get<uint64_t>();
    m.kept_count = j.at("kept_count").get<uint64_t>();
    m.dropped_count = j.at("dropped_count").get<uint64_t>();
    if (j.contains("drop_reasons")) {
        m.drop_reasons = j.at("drop_reasons").get<std::map<std::string, uint64_t>>();
    }
    m.config_digest = j.value("config_digest", "");
    m.seed = j.value("seed", uint64_t{0});
    if (j.contains("counters")) {
        m.counters = j.at("counters").get<std::map<std::string, uint64_t>>();
    }
    if (j.contains("notes")) {
        m.notes = j.at("notes").get<std::map<std::string, std::string>>();
    }
    if (j.contains("extra")) m.extra = j.at("extra");
    return m;
}

void PipelineManifest::save(const std::string& path) const {
    check();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("io_error", "cannot write manifest: " + path);
    out << to_json().dump(2) << '\n';
    if (!out) throw DataError("io_error", "failed writing manifest: " + path);
}

PipelineManifest PipelineManifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("io_error", "cannot read manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed_record", "manifest " + path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace corpusprep
