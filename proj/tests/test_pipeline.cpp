#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusprep/errors.hpp"
#include "corpusprep/pipeline.hpp"
#include "corpusprep/record_io.hpp"
#include "corpusprep/util.hpp"

using namespace corpusprep;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("corpusprep_pipe_" + std::to_string(::getpid()) + "_" + tag +
                    "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Document code_doc(const std::string& id, const std::string& content,
                  const std::string& path = "", const std::string& license = "MIT") {
    Document d;
    d.id = id;
    d.path = path.empty() ? "src/" + id + ".py" : path;
    d.content = content;
    d.repo_id = "repo/" + id;
    d.license = license;
    d.source_kind = SourceKind::kCode;
    return d;
}

std::string python_function(const std::string& name, int lines) {
    std::string content = "def " + name + "(value):\n";
    for (int i = 0; i < lines; ++i) {
        content += "    value = value + " + std::to_string(i) +
                   "  # accumulate step " + std::to_string(i) + "\n";
    }
    content += "    return value\n";
    return content;
}

std::vector<Document> small_corpus() {
    std::vector<Document> docs;
    docs.push_back(code_doc("keep-a", python_function("alpha", 6)));
    docs.push_back(code_doc("keep-b", python_function("beta", 8)));
    docs.push_back(code_doc("dup-of-a", python_function("alpha", 6)));
    docs.push_back(code_doc("low-alpha", "0 1 2 3 4 5 6 7 8 9 10 11 12 13 14\n"));
    docs.push_back(code_doc("bad-license", python_function("gamma", 5), "", "GPL-3.0"));
    docs.push_back(code_doc("odd-ext", python_function("delta", 5), "src/d.qqq"));
    return docs;
}

PipelineConfig base_config(const fs::path& dir, const std::vector<Document>& docs) {
    auto input = (dir / "input.jsonl").string();
    write_all_records(input, docs);
    PipelineConfig cfg;
    cfg.input = input;
    cfg.output_dir = (dir / "out").string();
    cfg.seed = 42;
    return cfg;
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return sha256_hex(data);
}

}  // namespace

TEST_CASE("config defaults load from an empty-ish document") {
    json j = {{"input", "corpus.jsonl"}};
    PipelineConfig cfg = PipelineConfig::from_json(j);
    CHECK(cfg.input == "corpus.jsonl");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.workers == 1);
    CHECK(cfg.group_by == "none");
    CHECK(cfg.stages.quality);
    CHECK_FALSE(cfg.stages.hap);
    CHECK_FALSE(cfg.stages.mix);
    CHECK(cfg.dedup.jaccard_threshold == doctest::Approx(0.7));
    CHECK(cfg.fim.alpha == doctest::Approx(0.5));
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("unknown keys are rejected at every level") {
    json top = {{"input", "x"}, {"outputdir", "y"}};
    CHECK_THROWS_AS(PipelineConfig::from_json(top), ConfigError);

    json nested = {{"input", "x"}, {"dedup", {{"bands", 32}, {"rowz", 8}}}};
    CHECK_THROWS_AS(PipelineConfig::from_json(nested), ConfigError);

    json stage = {{"input", "x"}, {"stages", {{"qualty", false}}}};
    CHECK_THROWS_AS(PipelineConfig::from_json(stage), ConfigError);
}

TEST_CASE("to_json and from_json round-trip") {
    PipelineConfig cfg;
    cfg.input = "in.jsonl";
    cfg.output_dir = "result";
    cfg.seed = 99;
    cfg.workers = 4;
    cfg.group_by = "language";
    cfg.stages.fim = false;
    cfg.language_allowlist = {"Python", "Go"};
    cfg.dedup.jaccard_threshold = 0.8;
    cfg.fim.alpha = 0.25;
    cfg.hap.dictionary_file = "words.txt";
    cfg.mixture.spec.token_budget = 1000;
    cfg.mixture.spec.components = {{"code", 1.0, "a.jsonl"}};

    PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.config_digest() == cfg.config_digest());
    CHECK(back.workers == 4);
    CHECK(back.language_allowlist == cfg.language_allowlist);
    CHECK(back.mixture.spec.components[0].name == "code");
}

TEST_CASE("config digests ignore key order but track values") {
    PipelineConfig a = PipelineConfig::from_json(
        json{{"input", "x"}, {"seed", 7}, {"workers", 2}});
    PipelineConfig b = PipelineConfig::from_json(
        json{{"workers", 2}, {"input", "x"}, {"seed", 7}});
    CHECK(a.config_digest() == b.config_digest());

    PipelineConfig c = PipelineConfig::from_json(
        json{{"input", "x"}, {"seed", 8}, {"workers", 2}});
    CHECK(a.config_digest() != c.config_digest());
}

TEST_CASE("config validation catches bad values") {
    PipelineConfig cfg;
    cfg.input = "x";
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.workers = 1;
    cfg.group_by = "repo";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.group_by = "none";
    cfg.language_allowlist = {"Klingon"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.language_allowlist.clear();
    cfg.stages.hap = true;  // without a dictionary file
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("the full pipeline filters, dedups and keeps survivors") {
    auto dir = fresh_dir("full");
    PipelineConfig cfg = base_config(dir, small_corpus());
    PipelineRunResult result = run_pipeline(cfg);

    auto out = read_all_records(result.output_path);
    CHECK(result.final_count == out.size());
    std::vector<std::string> ids;
    for (const auto& d : out) ids.push_back(d.id);
    // dup-of-a, low-alpha, bad-license and odd-ext all drop.
    CHECK(ids == std::vector<std::string>{"keep-a", "keep-b"});

    // Every document that made it has a fim tag and a manifest trail.
    for (const auto& d : out) {
        CHECK(d.fim_mode.has_value());
        CHECK(d.serialized.has_value());
    }
    CHECK_FALSE(fs::exists(fs::path(cfg.output_dir) / "INCOMPLETE"));

    for (const auto& m : result.manifests) {
        CHECK_NOTHROW(m.check());
    }
    fs::remove_all(dir);
}

TEST_CASE("disabled stages pass documents through untouched") {
    auto dir = fresh_dir("toggles");
    PipelineConfig cfg = base_config(dir, small_corpus());
    cfg.stages.quality = false;
    cfg.stages.license_filter = false;
    cfg.stages.language_filter = false;
    cfg.stages.exact_dedup = false;
    cfg.stages.fuzzy_dedup = false;
    cfg.stages.pii = false;
    cfg.stages.fim = false;
    PipelineRunResult result = run_pipeline(cfg);
    CHECK(result.final_count == 6);  // everything survives, even the junk
    fs::remove_all(dir);
}

TEST_CASE("worker count never changes the bytes on disk") {
    std::vector<Document> docs = small_corpus();
    // Add near-duplicates so the fuzzy stage has real work.
    for (int i = 0; i < 12; ++i) {
        std::string body = python_function("worker_probe", 10);
        if (i % 3 == 0) body += "# trailing variant " + std::to_string(i) + "\n";
        docs.push_back(code_doc("near-" + std::to_string(i), body));
    }

    auto dir1 = fresh_dir("w1");
    PipelineConfig cfg1 = base_config(dir1, docs);
    cfg1.workers = 1;
    run_pipeline(cfg1);

    auto dir4 = fresh_dir("w4");
    PipelineConfig cfg4 = base_config(dir4, docs);
    cfg4.workers = 4;
    run_pipeline(cfg4);

    CHECK(file_digest(fs::path(cfg1.output_dir) / "output.jsonl") ==
          file_digest(fs::path(cfg4.output_dir) / "output.jsonl"));
    CHECK(file_digest(fs::path(cfg1.output_dir) / "clusters.jsonl") ==
          file_digest(fs::path(cfg4.output_dir) / "clusters.jsonl"));

    for (const auto& entry :
         fs::directory_iterator(fs::path(cfg1.output_dir) / "manifest")) {
        auto name = entry.path().filename();
        CHECK(file_digest(entry.path()) ==
              file_digest(fs::path(cfg4.output_dir) / "manifest" / name));
    }
    fs::remove_all(dir1);
    fs::remove_all(dir4);
}

TEST_CASE("an empty corpus flows through cleanly") {
    auto dir = fresh_dir("empty");
    PipelineConfig cfg = base_config(dir, {});
    PipelineRunResult result = run_pipeline(cfg);
    CHECK(result.final_count == 0);
    for (const auto& m : result.manifests) {
        CHECK(m.input_count == 0);
        CHECK_NOTHROW(m.check());
    }
    fs::remove_all(dir);
}

TEST_CASE("stats reporting checks the funnel invariants") {
    auto dir = fresh_dir("stats");
    PipelineConfig cfg = base_config(dir, small_corpus());
    run_pipeline(cfg);

    StatsReport report = stats_report((fs::path(cfg.output_dir) / "manifest").string());
    CHECK(report.invariants_ok);
    CHECK(report.text.find("FAIL") == std::string::npos);
    CHECK(report.text.find("ingest") != std::string::npos);
    CHECK(report.json.contains("stages"));

    CHECK_THROWS_AS(stats_report((dir / "no_such_dir").string()), DataError);
    fs::remove_all(dir);
}

TEST_CASE("a failed run leaves the incomplete marker behind") {
    auto dir = fresh_dir("marker");
    PipelineConfig cfg = base_config(dir, small_corpus());
    cfg.stages.malware = true;
    cfg.strict_scan = true;
    cfg.malware.command = "exit 3";  // scanner always unavailable
    CHECK_THROWS_AS(run_pipeline(cfg), ExternalToolError);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "INCOMPLETE"));

    cfg.stages.malware = false;
    run_pipeline(cfg);
    CHECK_FALSE(fs::exists(fs::path(cfg.output_dir) / "INCOMPLETE"));
    fs::remove_all(dir);
}

TEST_CASE("language grouping shields cross-language near-duplicates") {
    // Same token stream on both sides, tagged as different languages.
    std::string body = python_function("shared_shape", 12);
    Document py = code_doc("as-python", body);
    Document rb = code_doc("as-ruby", body + "# tail\n", "src/thing.rb");

    auto dir = fresh_dir("group");
    PipelineConfig cfg = base_config(dir, {py, rb});
    cfg.stages.quality = false;  // keep the fixture focused on dedup
    cfg.stages.fim = false;

    PipelineRunResult global_run = run_pipeline(cfg);
    CHECK(global_run.final_count == 1);

    auto dir2 = fresh_dir("group2");
    PipelineConfig grouped = base_config(dir2, {py, rb});
    grouped.stages.quality = false;
    grouped.stages.fim = false;
    grouped.group_by = "language";
    PipelineRunResult grouped_run = run_pipeline(grouped);
    CHECK(grouped_run.final_count == 2);

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("streaming mode skips the per-stage files but not the output") {
    auto dir = fresh_dir("stream");
    PipelineConfig cfg = base_config(dir, small_corpus());
    PipelineRunResult normal = run_pipeline(cfg);
    CHECK(fs::exists(fs::path(cfg.output_dir) / "stages"));

    auto dir2 = fresh_dir("stream2");
    PipelineConfig streaming = base_config(dir2, small_corpus());
    streaming.streaming = true;
    PipelineRunResult lean = run_pipeline(streaming);
    CHECK_FALSE(fs::exists(fs::path(streaming.output_dir) / "stages"));

    CHECK(file_digest(fs::path(cfg.output_dir) / "output.jsonl") ==
          file_digest(fs::path(streaming.output_dir) / "output.jsonl"));
    CHECK(normal.final_count == lean.final_count);
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("a stage subset runs alone") {
    auto dir = fresh_dir("subset");
    PipelineConfig cfg = base_config(dir, small_corpus());
    PipelineRunResult result = run_pipeline(cfg, {Stage::kIngest, Stage::kExactDedup});
    CHECK(result.manifests.size() == 2);
    CHECK(result.manifests[0].stage_name == "ingest");
    CHECK(result.manifests[1].stage_name == "exact_dedup");
    // Only the exact duplicate drops; filters and fim never ran.
    CHECK(result.final_count == 5);
    auto out = read_all_records(result.output_path);
    for (const auto& d : out) {
        CHECK_FALSE(d.fim_mode.has_value());
    }
    fs::remove_all(dir);
}

TEST_CASE("stage names cover the whole order") {
    CHECK(stage_name(Stage::kIngest) == "ingest");
    CHECK(stage_name(Stage::kFuzzyDedup) == "fuzzy_dedup");
    CHECK(stage_name(Stage::kMix) == "mix");
}
