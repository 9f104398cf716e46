#include "corpusprep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "corpusprep/errors.hpp"
#include "corpusprep/filters.hpp"
#include "corpusprep/language.hpp"
#include "corpusprep/record_io.hpp"
#include "corpusprep/util.hpp"

namespace corpusprep {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_name(Stage stage) {
    switch (stage) {
        case Stage::kIngest: return "ingest";
        case Stage::kLanguageFilter: return "language_filter";
        case Stage::kLicenseFilter: return "license_filter";
        case Stage::kQuality: return "quality";
        case Stage::kExactDedup: return "exact_dedup";
        case Stage::kFuzzyDedup: return "fuzzy_dedup";
        case Stage::kHap: return "hap";
        case Stage::kPii: return "pii";
        case Stage::kMalware: return "malware";
        case Stage::kFim: return "fim";
        case Stage::kMix: return "mix";
    }
    return "unknown";
}

namespace {

struct StageOutcome {
    std::vector<Document> docs;
    PipelineManifest manifest;
    std::vector<DedupCluster> clusters;  // fuzzy_dedup only
};

PipelineManifest make_manifest(Stage stage, const PipelineConfig& cfg,
                               const json& stage_cfg) {
    PipelineManifest m;
    m.stage_name = std::string(stage_name(stage));
    m.stage_index = static_cast<int>(stage);
    m.config_digest = sha256_hex(stage_cfg.dump());
    m.seed = cfg.seed;
    return m;
}

// Histogram bucket: the language name for tagged code, "unknown" for
// untagged code, the source kind for everything else.
std::string histogram_bucket(const Document& doc) {
    if (doc.language.has_value()) {
        return std::string(doc.language->name());
    }
    if (doc.source_kind == SourceKind::kCode) {
        return "unknown";
    }
    return std::string(to_string(doc.source_kind));
}

StageOutcome ingest_stage(const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kIngest, cfg, json::object());
    const ExtensionMap& ext_map = ExtensionMap::builtin();

    std::map<std::string, std::pair<uint64_t, uint64_t>> histogram;  // docs, tokens
    uint64_t bytes_in = 0;

    RecordReader reader(cfg.input);
    while (auto doc = reader.next()) {
        doc->validate();
        if (doc->source_kind == SourceKind::kCode && !doc->language.has_value()) {
            LanguageTag tag = ext_map.assign(doc->path);
            if (!tag.is_unknown()) {
                doc->language = tag;
            }
        }
        bytes_in += doc->content.size();
        auto& bucket = histogram[histogram_bucket(*doc)];
        bucket.first += 1;
        bucket.second += (doc->content.size() + 3) / 4;  // byte-estimate tokens
        out.manifest.record_keep();
        out.docs.push_back(std::move(*doc));
    }

    out.manifest.counters["bytes_in"] = bytes_in;
    json hist = json::object();
    for (const auto& [name, counts] : histogram) {
        hist[name] = json{{"docs", counts.first}, {"tokens", counts.second}};
    }
    out.manifest.extra["language_histogram"] = std::move(hist);
    return out;
}

// Applies per-document verdicts (already computed, aligned with docs).
StageOutcome collect_filtered(std::vector<Document> docs,
                              const std::vector<FilterVerdict>& verdicts,
                              PipelineManifest manifest) {
    StageOutcome out;
    out.manifest = std::move(manifest);
    out.docs.reserve(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) {
        if (verdicts[i].keep()) {
            out.manifest.record_keep();
            out.docs.push_back(std::move(docs[i]));
        } else {
            out.manifest.record_drop(verdicts[i]);
        }
    }
    return out;
}

StageOutcome language_filter_stage(std::vector<Document> docs,
                                   const PipelineConfig& cfg) {
    LanguageSet allowlist;
    if (cfg.language_allowlist.empty()) {
        allowlist = full_allowlist();
    } else {
        for (const auto& name : cfg.language_allowlist) {
            allowlist.insert(LanguageTag::from_name(name));
        }
    }
    std::vector<FilterVerdict> verdicts(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](size_t i) {
        if (docs[i].source_kind == SourceKind::kCode) {
            verdicts[i] = filter_language(docs[i], allowlist);
        }
    });
    return collect_filtered(
        std::move(docs), verdicts,
        make_manifest(Stage::kLanguageFilter, cfg,
                      json{{"language_allowlist", cfg.language_allowlist}}));
}

StageOutcome license_filter_stage(std::vector<Document> docs,
                                  const PipelineConfig& cfg) {
    std::set<std::string> permissive(cfg.permissive_licenses.begin(),
                                     cfg.permissive_licenses.end());
    std::vector<FilterVerdict> verdicts(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](size_t i) {
        // Issues and prose carry no repository license; only code is gated.
        if (docs[i].source_kind == SourceKind::kCode) {
            verdicts[i] = filter_license(docs[i], permissive);
        }
    });
    return collect_filtered(
        std::move(docs), verdicts,
        make_manifest(Stage::kLicenseFilter, cfg,
                      json{{"permissive_licenses", cfg.permissive_licenses}}));
}

IssueConfig effective_issue_config(const PipelineConfig& cfg) {
    IssueConfig issue = cfg.issue;
    if (!cfg.stopwords_file.empty()) {
        std::ifstream in(cfg.stopwords_file, std::ios::binary);
        if (!in) {
            throw ConfigError("cannot open stopwords_file " + cfg.stopwords_file);
        }
        std::string word;
        while (std::getline(in, word)) {
            if (!word.empty() && word.back() == '\r') word.pop_back();
            if (!word.empty()) issue.stopwords.insert(word);
        }
    }
    return issue;
}

StageOutcome quality_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    IssueConfig issue = effective_issue_config(cfg);
    std::vector<QualityResult> results(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](size_t i) {
        results[i] = apply_quality(docs[i], cfg.quality, issue);
    });

    StageOutcome out;
    out.manifest = make_manifest(
        Stage::kQuality, cfg,
        json{{"quality",
              json{{"min_alpha_fraction", cfg.quality.min_alpha_fraction},
                   {"xml_probe_chars", cfg.quality.xml_probe_chars},
                   {"html_visible_min_fraction", cfg.quality.html_visible_min_fraction},
                   {"html_visible_min_chars", cfg.quality.html_visible_min_chars},
                   {"structured_min_chars", cfg.quality.structured_min_chars},
                   {"structured_max_chars", cfg.quality.structured_max_chars}}},
             {"issue",
              json{{"bot_suffixes", cfg.issue.bot_suffixes},
                   {"autogen_prefixes", cfg.issue.autogen_prefixes},
                   {"min_engaged_users", cfg.issue.min_engaged_users},
                   {"english_min_tokens", cfg.issue.english_min_tokens},
                   {"english_min_stopword_rate", cfg.issue.english_min_stopword_rate}}}});

    uint64_t rewritten = 0;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (results[i].verdict.keep()) {
            if (results[i].filtered_content.has_value()) {
                docs[i].content = std::move(*results[i].filtered_content);
                ++rewritten;
            }
            out.manifest.record_keep();
            out.docs.push_back(std::move(docs[i]));
        } else {
            out.manifest.record_drop(results[i].verdict);
        }
    }
    if (rewritten > 0) {
        out.manifest.counters["issue_content_rewritten"] = rewritten;
    }
    return out;
}

StageOutcome exact_dedup_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kExactDedup, cfg, json::object());
    ExactDeduper deduper;
    for (auto& doc : docs) {
        if (deduper.admit(doc.content)) {
            out.manifest.record_keep();
            out.docs.push_back(std::move(doc));
        } else {
            out.manifest.record_drop(FilterVerdict::drop(reason::kExactDup));
        }
    }
    return out;
}

StageOutcome fuzzy_dedup_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kFuzzyDedup, cfg,
                                 json{{"shingle_k", cfg.dedup.shingle_k},
                                      {"num_permutations", cfg.dedup.num_permutations},
                                      {"bands", cfg.dedup.bands},
                                      {"rows", cfg.dedup.rows},
                                      {"jaccard_threshold", cfg.dedup.jaccard_threshold},
                                      {"perm_seed", cfg.dedup.perm_seed},
                                      {"group_by", cfg.group_by}});

    // Group membership (single group unless grouping by language).
    std::map<std::string, std::vector<size_t>> groups;
    if (cfg.group_by == "language") {
        for (size_t i = 0; i < docs.size(); ++i) {
            groups[histogram_bucket(docs[i])].push_back(i);
        }
    } else {
        std::vector<size_t> all(docs.size());
        for (size_t i = 0; i < docs.size(); ++i) all[i] = i;
        groups.emplace("", std::move(all));
    }

    std::vector<char> drop(docs.size(), 0);
    uint64_t candidate_pairs = 0;
    uint64_t verified_pairs = 0;
    std::map<uint64_t, uint64_t> cluster_sizes;
    for (const auto& [key, members] : groups) {
        std::vector<ShingleSet> sets(members.size());
        std::vector<uint64_t> sizes(members.size());
        parallel_for(members.size(), cfg.workers, [&](size_t g) {
            const Document& doc = docs[members[g]];
            sets[g] = shingles(doc.id, doc.content, cfg.dedup.shingle_k);
            sizes[g] = doc.content.size();
        });
        FuzzyDedupPlan plan = fuzzy_dedup_plan(sets, sizes, cfg.dedup, cfg.workers);
        candidate_pairs += plan.candidate_pairs;
        verified_pairs += plan.verified_pairs;

        std::vector<char> kept_in_group(members.size(), 0);
        for (size_t kept_idx : plan.kept_indices) kept_in_group[kept_idx] = 1;
        for (size_t g = 0; g < members.size(); ++g) {
            if (kept_in_group[g] == 0) drop[members[g]] = 1;
        }
        for (auto& cluster : plan.clusters) {
            cluster_sizes[cluster.duplicate_ids.size() + 1] += 1;
            out.clusters.push_back(std::move(cluster));
        }
    }

    for (size_t i = 0; i < docs.size(); ++i) {
        if (drop[i] == 0) {
            out.manifest.record_keep();
            out.docs.push_back(std::move(docs[i]));
        } else {
            out.manifest.record_drop(FilterVerdict::drop(reason::kFuzzyDup));
        }
    }
    out.manifest.counters["candidate_pairs"] = candidate_pairs;
    out.manifest.counters["verified_pairs"] = verified_pairs;
    json hist = json::object();
    for (const auto& [size, count] : cluster_sizes) {
        hist[std::to_string(size)] = count;
    }
    out.manifest.extra["cluster_size_histogram"] = std::move(hist);
    return out;
}

StageOutcome hap_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    HapConfig hap = HapConfig::load_dictionary(cfg.hap.dictionary_file);
    hap.threshold = cfg.hap.threshold;
    hap.whole_token = cfg.hap.whole_token;
    hap.validate();

    parallel_for(docs.size(), cfg.workers, [&](size_t i) { annotate_hap(docs[i], hap); });
    std::vector<FilterVerdict> verdicts(docs.size());
    for (size_t i = 0; i < docs.size(); ++i) {
        verdicts[i] = hap_filter(docs[i], hap);
    }
    // The dictionary goes into the manifest by content, not by path, so the
    // same corpus and keyword list digest identically from any checkout.
    std::string joined;
    for (const auto& term : hap.dictionary) {
        joined += term;
        joined += '\n';
    }
    return collect_filtered(std::move(docs), verdicts,
                            make_manifest(Stage::kHap, cfg,
                                          json{{"dictionary_sha256", sha256_hex(joined)},
                                               {"dictionary_terms", hap.dictionary.size()},
                                               {"threshold", cfg.hap.threshold},
                                               {"whole_token", cfg.hap.whole_token}}));
}

StageOutcome pii_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kPii, cfg,
                                 json{{"email_token", cfg.pii.tokens.email},
                                      {"key_token", cfg.pii.tokens.key},
                                      {"password_token", cfg.pii.tokens.password},
                                      {"name_token", cfg.pii.tokens.name}});

    std::vector<std::vector<PiiSpan>> spans(docs.size());
    std::vector<std::string> redacted(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](size_t i) {
        PiiOptions opts;
        opts.issue_mode = docs[i].source_kind == SourceKind::kIssue;
        spans[i] = detect_pii(docs[i].content, opts);
        if (!spans[i].empty()) {
            Rng rng(per_doc_seed(cfg.seed, docs[i].id));
            redacted[i] = redact_pii(docs[i].content, spans[i], rng, cfg.pii.tokens);
        }
    });

    std::map<std::string, uint64_t> kind_counts;
    uint64_t docs_redacted = 0;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (!spans[i].empty()) {
            docs[i].content = std::move(redacted[i]);
            ++docs_redacted;
            for (const auto& span : spans[i]) {
                kind_counts[std::string(to_string(span.kind))] += 1;
            }
        }
        out.manifest.record_keep();
        out.docs.push_back(std::move(docs[i]));
    }
    for (const auto& [kind, count] : kind_counts) {
        out.manifest.counters["spans_" + kind] = count;
    }
    out.manifest.counters["docs_redacted"] = docs_redacted;
    return out;
}

StageOutcome malware_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kMalware, cfg,
                                 json{{"command", cfg.malware.command},
                                      {"strict_scan", cfg.strict_scan}});
    if (cfg.malware.command.empty()) {
        out.manifest.notes["skipped"] = "no scanner command configured";
        for (auto& doc : docs) {
            out.manifest.record_keep();
            out.docs.push_back(std::move(doc));
        }
        return out;
    }

    uint64_t scanner_errors = 0;
    for (auto& doc : docs) {
        FilterVerdict verdict;
        try {
            verdict = malware_scan_hook(doc, cfg.malware.command);
        } catch (const ExternalToolError&) {
            if (cfg.strict_scan) {
                throw;
            }
            ++scanner_errors;
            verdict = FilterVerdict::pass();
        }
        if (verdict.keep()) {
            out.manifest.record_keep();
            out.docs.push_back(std::move(doc));
        } else {
            out.manifest.record_drop(verdict);
        }
    }
    if (scanner_errors > 0) {
        out.manifest.counters["scanner_errors"] = scanner_errors;
        out.manifest.notes["scanner_errors"] =
            "scanner failures tolerated without --strict-scan; documents kept";
    }
    return out;
}

StageOutcome fim_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    out.manifest = make_manifest(Stage::kFim, cfg,
                                 json{{"alpha", cfg.fim.alpha},
                                      {"psm_fraction", cfg.fim.psm_fraction},
                                      {"prefix_token", cfg.fim.tokens.prefix_tok},
                                      {"suffix_token", cfg.fim.tokens.suffix_tok},
                                      {"middle_token", cfg.fim.tokens.middle_tok},
                                      {"min_doc_chars", cfg.fim.min_doc_chars},
                                      {"spm_pure_layout", cfg.fim.spm_pure_layout},
                                      {"drop_original", cfg.drop_original}});

    std::vector<FimBuildResult> results(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](size_t i) {
        results[i] = build_sample(docs[i], cfg.fim, cfg.seed);
    });

    uint64_t clm = 0;
    uint64_t psm = 0;
    uint64_t spm = 0;
    uint64_t too_short = 0;
    uint64_t collisions = 0;
    for (size_t i = 0; i < docs.size(); ++i) {
        const FimSample& sample = results[i].sample;
        docs[i].fim_mode = std::string(to_string(sample.mode));
        docs[i].serialized = sample.serialized;
        if (cfg.drop_original) {
            docs[i].content.clear();
        }
        switch (sample.mode) {
            case FimMode::kClm: ++clm; break;
            case FimMode::kPsm: ++psm; break;
            case FimMode::kSpm: ++spm; break;
        }
        if (results[i].note == FimBuildNote::kTooShort) ++too_short;
        if (results[i].note == FimBuildNote::kTokenCollision) ++collisions;
        out.manifest.record_keep();
        out.docs.push_back(std::move(docs[i]));
    }
    out.manifest.counters["clm_samples"] = clm;
    out.manifest.counters["psm_samples"] = psm;
    out.manifest.counters["spm_samples"] = spm;
    out.manifest.counters["fim_too_short"] = too_short;
    out.manifest.counters["fim_token_collision"] = collisions;
    return out;
}

StageOutcome mix_stage(std::vector<Document> docs, const PipelineConfig& cfg) {
    StageOutcome out;
    json components = json::array();
    for (const auto& component : cfg.mixture.spec.components) {
        components.push_back(json{{"name", component.name}, {"weight", component.weight}});
    }
    out.manifest = make_manifest(
        Stage::kMix, cfg,
        json{{"token_budget", cfg.mixture.spec.token_budget},
             {"seed", cfg.mixture.spec.seed},
             {"counter_mode", std::string(to_string(cfg.mixture.counter.mode))},
             {"repeat", cfg.repeat},
             {"components", components}});

    std::vector<std::unique_ptr<DocumentSource>> sources;
    for (const auto& component : cfg.mixture.spec.components) {
        if (component.source == "@pipeline") {
            sources.push_back(std::make_unique<VectorDocumentSource>(docs));
        } else {
            sources.push_back(std::make_unique<FileDocumentSource>(component.source));
        }
    }

    MixtureStats stats = sample_stream(
        cfg.mixture.spec, cfg.mixture.counter, sources,
        [&](const Document& doc) {
            out.manifest.record_keep();
            out.docs.push_back(doc);
        },
        cfg.repeat);

    uint64_t exhausted = 0;
    json component_stats = json::array();
    for (const auto& c : stats.components) {
        if (c.exhausted) ++exhausted;
        component_stats.push_back(json{{"name", c.name},
                                       {"docs", c.docs},
                                       {"tokens", c.tokens},
                                       {"target_tokens", c.target_tokens},
                                       {"exhausted", c.exhausted}});
    }
    out.manifest.counters["component_exhausted"] = exhausted;
    if (exhausted > 0) {
        out.manifest.notes["component_exhausted"] =
            "one or more sources ran dry before reaching their targets";
    }
    out.manifest.extra["mixture"] = json{{"components", std::move(component_stats)},
                                         {"total_docs", stats.total_docs},
                                         {"total_tokens", stats.total_tokens},
                                         {"max_doc_tokens", stats.max_doc_tokens}};
    return out;
}

bool stage_enabled(Stage stage, const StageToggles& t) {
    switch (stage) {
        case Stage::kIngest: return true;
        case Stage::kLanguageFilter: return t.language_filter;
        case Stage::kLicenseFilter: return t.license_filter;
        case Stage::kQuality: return t.quality;
        case Stage::kExactDedup: return t.exact_dedup;
        case Stage::kFuzzyDedup: return t.fuzzy_dedup;
        case Stage::kHap: return t.hap;
        case Stage::kPii: return t.pii;
        case Stage::kMalware: return t.malware;
        case Stage::kFim: return t.fim;
        case Stage::kMix: return t.mix;
    }
    return false;
}

std::string stage_file_name(Stage stage) {
    int idx = static_cast<int>(stage);
    std::string num = idx < 10 ? "0" + std::to_string(idx) : std::to_string(idx);
    return num + "_" + std::string(stage_name(stage)) + ".jsonl";
}

}  // namespace

PipelineRunResult run_pipeline(const PipelineConfig& cfg, const std::vector<Stage>& only) {
    cfg.validate();
    if (cfg.input.empty()) {
        throw ConfigError("no input file configured");
    }
    cfg.validate_paths();

    fs::create_directories(cfg.output_dir);
    fs::create_directories(fs::path(cfg.output_dir) / "manifest");
    if (!cfg.streaming) {
        fs::create_directories(fs::path(cfg.output_dir) / "stages");
    }
    const fs::path marker = fs::path(cfg.output_dir) / "INCOMPLETE";
    {
        std::ofstream mark(marker);
        mark << "pipeline started; this marker is removed on success\n";
    }

    auto selected = [&](Stage stage) {
        if (!stage_enabled(stage, cfg.stages)) return false;
        if (only.empty()) return true;
        return std::find(only.begin(), only.end(), stage) != only.end();
    };

    PipelineRunResult result;
    std::vector<Document> docs;

    static constexpr Stage kOrder[] = {
        Stage::kIngest,     Stage::kLanguageFilter, Stage::kLicenseFilter,
        Stage::kQuality,    Stage::kExactDedup,     Stage::kFuzzyDedup,
        Stage::kHap,        Stage::kPii,            Stage::kMalware,
        Stage::kFim,        Stage::kMix,
    };

    if (!selected(Stage::kIngest)) {
        // Partial runs still need language tags: stage slices see the same
        // documents whether or not ingest itself was requested.
        docs = read_all_records(cfg.input);
        const ExtensionMap& ext_map = ExtensionMap::builtin();
        for (auto& doc : docs) {
            if (doc.source_kind == SourceKind::kCode && !doc.language.has_value()) {
                LanguageTag tag = ext_map.assign(doc.path);
                if (!tag.is_unknown()) {
                    doc.language = tag;
                }
            }
        }
    }

    for (Stage stage : kOrder) {
        if (!selected(stage)) continue;
        StageOutcome outcome;
        switch (stage) {
            case Stage::kIngest: outcome = ingest_stage(cfg); break;
            case Stage::kLanguageFilter:
                outcome = language_filter_stage(std::move(docs), cfg);
                break;
            case Stage::kLicenseFilter:
                outcome = license_filter_stage(std::move(docs), cfg);
                break;
            case Stage::kQuality: outcome = quality_stage(std::move(docs), cfg); break;
            case Stage::kExactDedup:
                outcome = exact_dedup_stage(std::move(docs), cfg);
                break;
            case Stage::kFuzzyDedup:
                outcome = fuzzy_dedup_stage(std::move(docs), cfg);
                break;
            case Stage::kHap: outcome = hap_stage(std::move(docs), cfg); break;
            case Stage::kPii: outcome = pii_stage(std::move(docs), cfg); break;
            case Stage::kMalware: outcome = malware_stage(std::move(docs), cfg); break;
            case Stage::kFim: outcome = fim_stage(std::move(docs), cfg); break;
            case Stage::kMix: outcome = mix_stage(std::move(docs), cfg); break;
        }
        docs = std::move(outcome.docs);

        outcome.manifest.save((fs::path(cfg.output_dir) / "manifest" /
                               (std::string(stage_name(stage)) + ".json"))
                                  .string());
        if (!cfg.streaming) {
            write_all_records(
                (fs::path(cfg.output_dir) / "stages" / stage_file_name(stage)).string(),
                docs);
        }
        if (stage == Stage::kFuzzyDedup) {
            std::unique_ptr<LineSink> sink =
                open_line_sink((fs::path(cfg.output_dir) / "clusters.jsonl").string());
            for (const auto& cluster : outcome.clusters) {
                sink->write_line(cluster.to_json().dump());
            }
            sink->close();
        }
        result.manifests.push_back(std::move(outcome.manifest));
    }

    const std::string output_path = (fs::path(cfg.output_dir) / "output.jsonl").string();
    write_all_records(output_path, docs);
    result.final_count = docs.size();
    result.output_path = output_path;

    fs::remove(marker);
    return result;
}

StatsReport stats_report(const std::string& manifest_dir) {
    if (!fs::exists(manifest_dir) || !fs::is_directory(manifest_dir)) {
        throw DataError("missing_manifest", "manifest directory not found: " + manifest_dir);
    }
    std::vector<PipelineManifest> manifests;
    for (const auto& entry : fs::directory_iterator(manifest_dir)) {
        if (entry.path().extension() == ".json") {
            manifests.push_back(PipelineManifest::load(entry.path().string()));
        }
    }
    if (manifests.empty()) {
        throw DataError("missing_manifest",
                        "no stage manifests in directory: " + manifest_dir);
    }
    std::sort(manifests.begin(), manifests.end(),
              [](const PipelineManifest& a, const PipelineManifest& b) {
                  return a.stage_index < b.stage_index;
              });

    StatsReport report;
    std::ostringstream text;
    json stages_json = json::array();
    json invariants = json::array();

    text << "stage funnel\n";
    text << "  stage            input     kept  dropped  reasons\n";
    for (const auto& m : manifests) {
        text << "  " << m.stage_name;
        for (size_t pad = m.stage_name.size(); pad < 15; ++pad) text << ' ';
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%9llu %8llu %8llu  ",
                      static_cast<unsigned long long>(m.input_count),
                      static_cast<unsigned long long>(m.kept_count),
                      static_cast<unsigned long long>(m.dropped_count));
        text << buf;
        bool first = true;
        for (const auto& [code, count] : m.drop_reasons) {
            if (!first) text << ", ";
            text << code << "=" << count;
            first = false;
        }
        if (first) text << "-";
        text << "\n";
        stages_json.push_back(m.to_json());
    }

    auto check = [&](bool ok, const std::string& label) {
        text << (ok ? "PASS" : "FAIL") << ": " << label << "\n";
        invariants.push_back(json{{"check", label}, {"ok", ok}});
        if (!ok) report.invariants_ok = false;
    };

    text << "\ninvariants\n";
    for (const auto& m : manifests) {
        check(m.input_count == m.kept_count + m.dropped_count,
              m.stage_name + ": input == kept + dropped");
        uint64_t reason_sum = 0;
        for (const auto& [code, count] : m.drop_reasons) reason_sum += count;
        check(reason_sum == m.dropped_count,
              m.stage_name + ": sum(drop_reasons) == dropped");
    }
    for (size_t i = 1; i < manifests.size(); ++i) {
        if (manifests[i].stage_name == "mix") continue;  // mix re-draws its input
        check(manifests[i].input_count == manifests[i - 1].kept_count,
              manifests[i - 1].stage_name + " kept feeds " + manifests[i].stage_name +
                  " input");
    }

    for (const auto& m : manifests) {
        if (m.stage_name == "ingest" && m.extra.contains("language_histogram")) {
            text << "\nlanguage histogram (docs/tokens)\n";
            for (const auto& [name, counts] : m.extra["language_histogram"].items()) {
                text << "  " << name << ": " << counts["docs"].get<uint64_t>() << "/"
                     << counts["tokens"].get<uint64_t>() << "\n";
            }
        }
        if (m.stage_name == "fuzzy_dedup" && m.extra.contains("cluster_size_histogram")) {
            text << "\ncluster size histogram\n";
            for (const auto& [size, count] : m.extra["cluster_size_histogram"].items()) {
                text << "  size " << size << ": " << count.get<uint64_t>() << "\n";
            }
        }
    }

    report.text = text.str();
    report.json = json{{"stages", std::move(stages_json)},
                       {"invariants", std::move(invariants)},
                       {"invariants_ok", report.invariants_ok}};
    return report;
}

BenchReport run_benchmark(uint64_t target_bytes, uint64_t seed) {
    // Synthesize code-like documents (~2 KiB each) before timing anything.
    Rng rng(seed);
    static constexpr std::string_view kWords[] = {
        "return", "static", "buffer", "index",  "stream", "value",  "offset",
        "length", "vector", "handle", "config", "parse",  "write",  "tokens",
        "result", "status", "cursor", "window", "digest", "worker",
    };
    std::vector<Document> docs;
    uint64_t total = 0;
    uint64_t doc_no = 0;
    while (total < target_bytes) {
        std::string content;
        content.reserve(2200);
        for (int line = 0; line < 40; ++line) {
            for (int w = 0; w < 7; ++w) {
                content.append(kWords[rng.bounded(std::size(kWords))]);
                content.push_back(w + 1 < 7 ? ' ' : '\n');
            }
        }
        // A sprinkle of exact duplicates keeps the dedup path honest.
        if (doc_no % 10 == 9 && !docs.empty()) {
            content = docs.back().content;
        }
        total += content.size();
        Document doc;
        doc.id = "bench-" + std::to_string(doc_no++);
        doc.path = "src/bench_" + std::to_string(doc_no) + ".py";
        doc.repo_id = "bench/repo";
        doc.source_kind = SourceKind::kCode;
        doc.language = LanguageTag::from_name("Python");
        doc.content = std::move(content);
        docs.push_back(std::move(doc));
    }

    QualityConfig quality;
    IssueConfig issue;
    using clock = std::chrono::steady_clock;

    auto t0 = clock::now();
    uint64_t kept_quality = 0;
    for (const auto& doc : docs) {
        QualityResult r = apply_quality(doc, quality, issue);
        if (r.verdict.keep()) ++kept_quality;
    }
    auto t1 = clock::now();
    ExactDeduper deduper;
    uint64_t kept_exact = 0;
    for (const auto& doc : docs) {
        if (deduper.admit(doc.content)) ++kept_exact;
    }
    auto t2 = clock::now();

    auto seconds = [](auto from, auto to) {
        return std::chrono::duration<double>(to - from).count();
    };
    double quality_s = seconds(t0, t1);
    double dedup_s = seconds(t1, t2);
    const double mb = static_cast<double>(total) / (1024.0 * 1024.0);

    BenchReport report;
    report.bytes_processed = total;
    report.quality_mb_per_s = quality_s > 0 ? mb / quality_s : 0.0;
    report.exact_dedup_mb_per_s = dedup_s > 0 ? mb / dedup_s : 0.0;
    report.combined_mb_per_s =
        (quality_s + dedup_s) > 0 ? mb / (quality_s + dedup_s) : 0.0;

    std::ostringstream text;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "benchmark over %.1f MiB (%llu docs, %llu kept after quality, %llu "
                  "after exact dedup)\n",
                  mb, static_cast<unsigned long long>(docs.size()),
                  static_cast<unsigned long long>(kept_quality),
                  static_cast<unsigned long long>(kept_exact));
    text << buf;
    std::snprintf(buf, sizeof(buf), "  quality filter : %8.1f MB/s\n",
                  report.quality_mb_per_s);
    text << buf;
    std::snprintf(buf, sizeof(buf), "  exact dedup    : %8.1f MB/s\n",
                  report.exact_dedup_mb_per_s);
    text << buf;
    std::snprintf(buf, sizeof(buf),
                  "  combined       : %8.1f MB/s (soft target: 50 MB/s, report-only)\n",
                  report.combined_mb_per_s);
    text << buf;
    report.text = text.str();
    return report;
}

}  // namespace corpusprep
