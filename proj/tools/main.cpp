#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corpusprep/errors.hpp"
#include "corpusprep/pipeline.hpp"

namespace {

using corpusprep::PipelineConfig;
using corpusprep::Stage;

struct CommonOpts {
    std::string config_path;
    std::string input;
    std::string output_dir;
    uint64_t seed = 0;
    unsigned workers = 0;
    std::string group_by;
    bool strict_scan = false;
    bool repeat = false;
    bool streaming = false;
    bool drop_original = false;

    CLI::Option* config_opt = nullptr;
    CLI::Option* input_opt = nullptr;
    CLI::Option* output_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* group_opt = nullptr;
    CLI::Option* strict_opt = nullptr;
    CLI::Option* repeat_opt = nullptr;
    CLI::Option* stream_opt = nullptr;
    CLI::Option* drop_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    o.config_opt = cmd->add_option("-c,--config", o.config_path, "pipeline config (JSON)");
    o.input_opt = cmd->add_option("-i,--input", o.input, "input JSONL (.jsonl or .jsonl.gz)");
    o.output_opt = cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
    o.seed_opt = cmd->add_option("--seed", o.seed, "global pipeline seed");
    o.workers_opt = cmd->add_option("--workers", o.workers, "worker thread count");
    o.group_opt =
        cmd->add_option("--group-by", o.group_by, "fuzzy-dedup grouping (none|language)");
    o.strict_opt =
        cmd->add_flag("--strict-scan", o.strict_scan, "abort when the malware scanner fails");
    o.repeat_opt =
        cmd->add_flag("--repeat", o.repeat, "cycle exhausted mixture sources");
    o.stream_opt = cmd->add_flag("--streaming", o.streaming,
                                 "skip per-stage output files (fused stages)");
    o.drop_opt = cmd->add_flag("--drop-original", o.drop_original,
                               "clear original content after FIM serialization");
}

PipelineConfig build_config(const CommonOpts& o) {
    PipelineConfig cfg;
    if (o.config_opt->count() > 0) {
        cfg = PipelineConfig::load(o.config_path);
    }
    if (o.input_opt->count() > 0) cfg.input = o.input;
    if (o.output_opt->count() > 0) cfg.output_dir = o.output_dir;
    if (o.seed_opt->count() > 0) cfg.seed = o.seed;
    if (o.workers_opt->count() > 0) cfg.workers = o.workers;
    if (o.group_opt->count() > 0) cfg.group_by = o.group_by;
    if (o.strict_opt->count() > 0) cfg.strict_scan = o.strict_scan;
    if (o.repeat_opt->count() > 0) cfg.repeat = o.repeat;
    if (o.stream_opt->count() > 0) cfg.streaming = o.streaming;
    if (o.drop_opt->count() > 0) cfg.drop_original = o.drop_original;
    return cfg;
}

std::vector<Stage> stages_for(const std::string& name) {
    if (name == "ingest") return {Stage::kIngest};
    if (name == "filter") {
        return {Stage::kLanguageFilter, Stage::kLicenseFilter, Stage::kQuality};
    }
    if (name == "dedup") return {Stage::kExactDedup, Stage::kFuzzyDedup};
    if (name == "redact") return {Stage::kHap, Stage::kPii, Stage::kMalware};
    if (name == "fim") return {Stage::kFim};
    if (name == "mix") return {Stage::kMix};
    return {};  // "run": every enabled stage
}

int run_stages(const std::string& name, const CommonOpts& opts) {
    PipelineConfig cfg = build_config(opts);
    if (name == "fim") cfg.stages.fim = true;
    if (name == "mix") cfg.stages.mix = true;
    corpusprep::PipelineRunResult result = corpusprep::run_pipeline(cfg, stages_for(name));
    for (const auto& m : result.manifests) {
        std::cout << m.stage_name << ": kept " << m.kept_count << ", dropped "
                  << m.dropped_count << "\n";
    }
    std::cout << "wrote " << result.final_count << " documents to " << result.output_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic corpus curation pipeline"};
    app.require_subcommand(1);

    const std::vector<std::string> pipeline_cmds = {"ingest", "filter", "dedup",
                                                    "redact", "fim",    "mix",
                                                    "run"};
    const std::vector<std::string> descriptions = {
        "read, validate and language-tag the input corpus",
        "language/license allowlists and quality rules",
        "exact and MinHash-LSH near duplicate removal",
        "HAP filtering, PII redaction and the malware hook",
        "fill-in-the-middle sample construction",
        "token-budgeted mixture sampling",
        "the full pipeline in canonical stage order",
    };
    std::vector<std::unique_ptr<CommonOpts>> opts;
    for (size_t i = 0; i < pipeline_cmds.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(pipeline_cmds[i], descriptions[i]);
        opts.push_back(std::make_unique<CommonOpts>());
        add_common(cmd, *opts.back());
    }

    std::string stats_dir;
    bool stats_json = false;
    CLI::App* stats_cmd = app.add_subcommand("stats", "stage funnel and histograms");
    stats_cmd->add_option("dir", stats_dir, "manifest directory (or an output dir)")
        ->required();
    stats_cmd->add_flag("--json", stats_json, "print the JSON summary");

    uint64_t bench_mb = 256;
    uint64_t bench_seed = 0;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "synthetic throughput probe (report-only)");
    bench_cmd->add_option("--mb", bench_mb, "megabytes of synthetic input");
    bench_cmd->add_option("--seed", bench_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (stats_cmd->parsed()) {
            std::string dir = stats_dir;
            namespace fs = std::filesystem;
            if (fs::is_directory(fs::path(dir) / "manifest")) {
                dir = (fs::path(dir) / "manifest").string();
            }
            corpusprep::StatsReport report = corpusprep::stats_report(dir);
            if (stats_json) {
                std::cout << report.json.dump(2) << "\n";
            } else {
                std::cout << report.text;
            }
            return 0;
        }
        if (bench_cmd->parsed()) {
            corpusprep::BenchReport report =
                corpusprep::run_benchmark(bench_mb * 1024 * 1024, bench_seed);
            std::cout << report.text;
            return 0;
        }
        for (size_t i = 0; i < pipeline_cmds.size(); ++i) {
            if (app.get_subcommand(pipeline_cmds[i])->parsed()) {
                return run_stages(pipeline_cmds[i], *opts[i]);
            }
        }
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const corpusprep::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const corpusprep::DataError& e) {
        std::cerr << "data error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const corpusprep::ExternalToolError& e) {
        std::cerr << "external tool error [" << e.code() << "]: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "data error [json]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
