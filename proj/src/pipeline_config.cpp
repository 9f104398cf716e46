#include <filesystem>
#include <fstream>

#include "corpusprep/errors.hpp"
#include "corpusprep/language.hpp"
#include "corpusprep/pipeline.hpp"
#include "corpusprep/util.hpp"

namespace corpusprep {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> known) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + std::string(key) + "' in " + where +
                          " has the wrong type");
    }
}

std::vector<std::string> get_string_list(const json& j, const char* key,
                                         std::vector<std::string> fallback,
                                         const std::string& where) {
    return get_or<std::vector<std::string>>(j, key, std::move(fallback), where);
}

QualityConfig parse_quality(const json& j) {
    require_object(j, "quality");
    reject_unknown_keys(j, "quality",
                        {"min_alpha_fraction", "xml_probe_chars",
                         "html_visible_min_fraction", "html_visible_min_chars",
                         "structured_min_chars", "structured_max_chars"});
    QualityConfig q;
    q.min_alpha_fraction = get_or(j, "min_alpha_fraction", q.min_alpha_fraction, "quality");
    q.xml_probe_chars = get_or(j, "xml_probe_chars", q.xml_probe_chars, "quality");
    q.html_visible_min_fraction =
        get_or(j, "html_visible_min_fraction", q.html_visible_min_fraction, "quality");
    q.html_visible_min_chars =
        get_or(j, "html_visible_min_chars", q.html_visible_min_chars, "quality");
    q.structured_min_chars =
        get_or(j, "structured_min_chars", q.structured_min_chars, "quality");
    q.structured_max_chars =
        get_or(j, "structured_max_chars", q.structured_max_chars, "quality");
    return q;
}

json quality_to_json(const QualityConfig& q) {
    return json{{"min_alpha_fraction", q.min_alpha_fraction},
                {"xml_probe_chars", q.xml_probe_chars},
                {"html_visible_min_fraction", q.html_visible_min_fraction},
                {"html_visible_min_chars", q.html_visible_min_chars},
                {"structured_min_chars", q.structured_min_chars},
                {"structured_max_chars", q.structured_max_chars}};
}

IssueConfig parse_issue(const json& j) {
    require_object(j, "issue");
    reject_unknown_keys(j, "issue",
                        {"bot_suffixes", "autogen_prefixes", "min_engaged_users",
                         "english_min_tokens", "english_min_stopword_rate"});
    IssueConfig cfg;
    cfg.bot_suffixes = get_string_list(j, "bot_suffixes", cfg.bot_suffixes, "issue");
    cfg.autogen_prefixes =
        get_string_list(j, "autogen_prefixes", cfg.autogen_prefixes, "issue");
    cfg.min_engaged_users = get_or(j, "min_engaged_users", cfg.min_engaged_users, "issue");
    cfg.english_min_tokens =
        get_or(j, "english_min_tokens", cfg.english_min_tokens, "issue");
    cfg.english_min_stopword_rate =
        get_or(j, "english_min_stopword_rate", cfg.english_min_stopword_rate, "issue");
    return cfg;
}

json issue_to_json(const IssueConfig& cfg) {
    return json{{"bot_suffixes", cfg.bot_suffixes},
                {"autogen_prefixes", cfg.autogen_prefixes},
                {"min_engaged_users", cfg.min_engaged_users},
                {"english_min_tokens", cfg.english_min_tokens},
                {"english_min_stopword_rate", cfg.english_min_stopword_rate}};
}

DedupConfig parse_dedup(const json& j, uint64_t default_seed) {
    require_object(j, "dedup");
    reject_unknown_keys(j, "dedup",
                        {"shingle_k", "num_permutations", "bands", "rows",
                         "jaccard_threshold", "perm_seed"});
    DedupConfig d;
    d.perm_seed = default_seed;
    d.shingle_k = get_or(j, "shingle_k", d.shingle_k, "dedup");
    d.num_permutations = get_or(j, "num_permutations", d.num_permutations, "dedup");
    d.bands = get_or(j, "bands", d.bands, "dedup");
    d.rows = get_or(j, "rows", d.rows, "dedup");
    d.jaccard_threshold = get_or(j, "jaccard_threshold", d.jaccard_threshold, "dedup");
    d.perm_seed = get_or(j, "perm_seed", d.perm_seed, "dedup");
    return d;
}

json dedup_to_json(const DedupConfig& d) {
    return json{{"shingle_k", d.shingle_k},
                {"num_permutations", d.num_permutations},
                {"bands", d.bands},
                {"rows", d.rows},
                {"jaccard_threshold", d.jaccard_threshold},
                {"perm_seed", d.perm_seed}};
}

FimConfig parse_fim_cfg(const json& j) {
    require_object(j, "fim");
    reject_unknown_keys(j, "fim",
                        {"alpha", "psm_fraction", "prefix_token", "suffix_token",
                         "middle_token", "min_doc_chars", "spm_pure_layout"});
    FimConfig f;
    f.alpha = get_or(j, "alpha", f.alpha, "fim");
    f.psm_fraction = get_or(j, "psm_fraction", f.psm_fraction, "fim");
    f.tokens.prefix_tok = get_or(j, "prefix_token", f.tokens.prefix_tok, "fim");
    f.tokens.suffix_tok = get_or(j, "suffix_token", f.tokens.suffix_tok, "fim");
    f.tokens.middle_tok = get_or(j, "middle_token", f.tokens.middle_tok, "fim");
    f.min_doc_chars = get_or(j, "min_doc_chars", f.min_doc_chars, "fim");
    f.spm_pure_layout = get_or(j, "spm_pure_layout", f.spm_pure_layout, "fim");
    return f;
}

json fim_to_json(const FimConfig& f) {
    return json{{"alpha", f.alpha},
                {"psm_fraction", f.psm_fraction},
                {"prefix_token", f.tokens.prefix_tok},
                {"suffix_token", f.tokens.suffix_tok},
                {"middle_token", f.tokens.middle_tok},
                {"min_doc_chars", f.min_doc_chars},
                {"spm_pure_layout", f.spm_pure_layout}};
}

MixtureStageConfig parse_mixture(const json& j, uint64_t default_seed) {
    require_object(j, "mixture");
    reject_unknown_keys(j, "mixture", {"token_budget", "seed", "components", "counter"});
    MixtureStageConfig m;
    m.spec.seed = default_seed;
    m.spec.token_budget = get_or(j, "token_budget", m.spec.token_budget, "mixture");
    m.spec.seed = get_or(j, "seed", m.spec.seed, "mixture");
    if (j.contains("components")) {
        if (!j.at("components").is_array()) {
            throw ConfigError("mixture.components must be an array");
        }
        for (const auto& cj : j.at("components")) {
            require_object(cj, "mixture component");
            reject_unknown_keys(cj, "mixture component", {"name", "weight", "source"});
            MixtureComponent c;
            c.name = get_or<std::string>(cj, "name", "", "mixture component");
            c.weight = get_or(cj, "weight", 0.0, "mixture component");
            c.source = get_or<std::string>(cj, "source", "", "mixture component");
            m.spec.components.push_back(std::move(c));
        }
    }
    if (j.contains("counter")) {
        const json& cj = j.at("counter");
        require_object(cj, "mixture.counter");
        reject_unknown_keys(cj, "mixture.counter", {"mode", "plugin_command"});
        m.counter.mode = token_count_mode_from_string(
            get_or<std::string>(cj, "mode", "byte_estimate", "mixture.counter"));
        m.counter.plugin_command =
            get_or<std::string>(cj, "plugin_command", "", "mixture.counter");
    }
    return m;
}

json mixture_to_json(const MixtureStageConfig& m) {
    json components = json::array();
    for (const auto& c : m.spec.components) {
        components.push_back(
            json{{"name", c.name}, {"weight", c.weight}, {"source", c.source}});
    }
    return json{{"token_budget", m.spec.token_budget},
                {"seed", m.spec.seed},
                {"components", components},
                {"counter", json{{"mode", std::string(to_string(m.counter.mode))},
                                 {"plugin_command", m.counter.plugin_command}}}};
}

StageToggles parse_stages(const json& j) {
    require_object(j, "stages");
    reject_unknown_keys(j, "stages",
                        {"language_filter", "license_filter", "quality", "exact_dedup",
                         "fuzzy_dedup", "hap", "pii", "malware", "fim", "mix"});
    StageToggles t;
    t.language_filter = get_or(j, "language_filter", t.language_filter, "stages");
    t.license_filter = get_or(j, "license_filter", t.license_filter, "stages");
    t.quality = get_or(j, "quality", t.quality, "stages");
    t.exact_dedup = get_or(j, "exact_dedup", t.exact_dedup, "stages");
    t.fuzzy_dedup = get_or(j, "fuzzy_dedup", t.fuzzy_dedup, "stages");
    t.hap = get_or(j, "hap", t.hap, "stages");
    t.pii = get_or(j, "pii", t.pii, "stages");
    t.malware = get_or(j, "malware", t.malware, "stages");
    t.fim = get_or(j, "fim", t.fim, "stages");
    t.mix = get_or(j, "mix", t.mix, "stages");
    return t;
}

json stages_to_json(const StageToggles& t) {
    return json{{"language_filter", t.language_filter},
                {"license_filter", t.license_filter},
                {"quality", t.quality},
                {"exact_dedup", t.exact_dedup},
                {"fuzzy_dedup", t.fuzzy_dedup},
                {"hap", t.hap},
                {"pii", t.pii},
                {"malware", t.malware},
                {"fim", t.fim},
                {"mix", t.mix}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    require_object(j, "pipeline config");
    reject_unknown_keys(
        j, "pipeline config",
        {"input", "output_dir", "seed", "workers", "streaming", "group_by",
         "drop_original", "strict_scan", "repeat", "stages", "language_allowlist",
         "permissive_licenses", "quality", "issue", "stopwords_file", "dedup", "hap",
         "pii", "malware", "fim", "mixture"});

    PipelineConfig cfg;
    cfg.input = get_or<std::string>(j, "input", cfg.input, "pipeline config");
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir, "pipeline config");
    cfg.seed = get_or(j, "seed", cfg.seed, "pipeline config");
    cfg.workers = get_or(j, "workers", cfg.workers, "pipeline config");
    cfg.streaming = get_or(j, "streaming", cfg.streaming, "pipeline config");
    cfg.group_by = get_or<std::string>(j, "group_by", cfg.group_by, "pipeline config");
    cfg.drop_original = get_or(j, "drop_original", cfg.drop_original, "pipeline config");
    cfg.strict_scan = get_or(j, "strict_scan", cfg.strict_scan, "pipeline config");
    cfg.repeat = get_or(j, "repeat", cfg.repeat, "pipeline config");

    if (j.contains("stages")) cfg.stages = parse_stages(j.at("stages"));
    cfg.language_allowlist =
        get_string_list(j, "language_allowlist", cfg.language_allowlist, "pipeline config");
    cfg.permissive_licenses = get_string_list(j, "permissive_licenses",
                                              cfg.permissive_licenses, "pipeline config");
    if (j.contains("quality")) cfg.quality = parse_quality(j.at("quality"));
    if (j.contains("issue")) cfg.issue = parse_issue(j.at("issue"));
    cfg.stopwords_file =
        get_or<std::string>(j, "stopwords_file", cfg.stopwords_file, "pipeline config");
    if (j.contains("dedup")) {
        cfg.dedup = parse_dedup(j.at("dedup"), cfg.seed);
    } else {
        cfg.dedup.perm_seed = cfg.seed;
    }
    if (j.contains("hap")) {
        const json& h = j.at("hap");
        require_object(h, "hap");
        reject_unknown_keys(h, "hap", {"dictionary_file", "threshold", "whole_token"});
        cfg.hap.dictionary_file =
            get_or<std::string>(h, "dictionary_file", cfg.hap.dictionary_file, "hap");
        cfg.hap.threshold = get_or(h, "threshold", cfg.hap.threshold, "hap");
        cfg.hap.whole_token = get_or(h, "whole_token", cfg.hap.whole_token, "hap");
    }
    if (j.contains("pii")) {
        const json& p = j.at("pii");
        require_object(p, "pii");
        reject_unknown_keys(p, "pii",
                            {"email_token", "key_token", "password_token", "name_token"});
        cfg.pii.tokens.email = get_or<std::string>(p, "email_token", cfg.pii.tokens.email, "pii");
        cfg.pii.tokens.key = get_or<std::string>(p, "key_token", cfg.pii.tokens.key, "pii");
        cfg.pii.tokens.password =
            get_or<std::string>(p, "password_token", cfg.pii.tokens.password, "pii");
        cfg.pii.tokens.name = get_or<std::string>(p, "name_token", cfg.pii.tokens.name, "pii");
    }
    if (j.contains("malware")) {
        const json& m = j.at("malware");
        require_object(m, "malware");
        reject_unknown_keys(m, "malware", {"command"});
        cfg.malware.command = get_or<std::string>(m, "command", cfg.malware.command, "malware");
    }
    if (j.contains("fim")) cfg.fim = parse_fim_cfg(j.at("fim"));
    if (j.contains("mixture")) {
        cfg.mixture = parse_mixture(j.at("mixture"), cfg.seed);
    } else {
        cfg.mixture.spec.seed = cfg.seed;
    }
    return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
    return json{{"input", input},
                {"output_dir", output_dir},
                {"seed", seed},
                {"workers", workers},
                {"streaming", streaming},
                {"group_by", group_by},
                {"drop_original", drop_original},
                {"strict_scan", strict_scan},
                {"repeat", repeat},
                {"stages", stages_to_json(stages)},
                {"language_allowlist", language_allowlist},
                {"permissive_licenses", permissive_licenses},
                {"quality", quality_to_json(quality)},
                {"issue", issue_to_json(issue)},
                {"stopwords_file", stopwords_file},
                {"dedup", dedup_to_json(dedup)},
                {"hap", json{{"dictionary_file", hap.dictionary_file},
                             {"threshold", hap.threshold},
                             {"whole_token", hap.whole_token}}},
                {"pii", json{{"email_token", pii.tokens.email},
                             {"key_token", pii.tokens.key},
                             {"password_token", pii.tokens.password},
                             {"name_token", pii.tokens.name}}},
                {"malware", json{{"command", malware.command}}},
                {"fim", fim_to_json(fim)},
                {"mixture", mixture_to_json(mixture)}};
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

std::string PipelineConfig::config_digest() const { return sha256_hex(to_json().dump()); }

void PipelineConfig::validate() const {
    if (workers == 0) {
        throw ConfigError("workers must be at least 1");
    }
    if (group_by != "none" && group_by != "language") {
        throw ConfigError("group_by must be 'none' or 'language'");
    }
    quality.validate();
    issue.validate();
    dedup.validate();
    fim.validate();
    for (const auto& name : language_allowlist) {
        LanguageTag::from_name(name);  // throws on unknown names
    }
    if (pii.tokens.email.empty() || pii.tokens.key.empty() ||
        pii.tokens.password.empty() || pii.tokens.name.empty()) {
        throw ConfigError("pii replacement tokens must be non-empty");
    }
    if (stages.hap && hap.dictionary_file.empty()) {
        throw ConfigError("hap stage is enabled but no dictionary_file is configured");
    }
    if (stages.mix) {
        mixture.spec.validate();
        mixture.counter.validate();
    }
}

void PipelineConfig::validate_paths() const {
    namespace fs = std::filesystem;
    auto require_file = [](const std::string& path, const std::string& what) {
        if (!fs::exists(path)) {
            throw ConfigError(what + " does not exist: " + path);
        }
    };
    if (!input.empty()) {
        require_file(input, "input");
    }
    if (!stopwords_file.empty()) {
        require_file(stopwords_file, "stopwords_file");
    }
    if (stages.hap) {
        require_file(hap.dictionary_file, "hap dictionary_file");
    }
    if (stages.mix) {
        for (const auto& c : mixture.spec.components) {
            if (c.source != "@pipeline") {
                require_file(c.source, "mixture source for component '" + c.name + "'");
            }
        }
    }
}

}  // namespace corpusprep
