#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "corpusprep/document.hpp"
#include "corpusprep/errors.hpp"
#include "corpusprep/filters.hpp"
#include "corpusprep/language.hpp"
#include "corpusprep/record_io.hpp"
#include "corpusprep/util.hpp"

using namespace corpusprep;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("corpusprep_io_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

Document make_doc(const std::string& id, const std::string& content) {
    Document d;
    d.id = id;
    d.path = "src/" + id + ".py";
    d.content = content;
    d.repo_id = "org/repo";
    d.license = "MIT";
    d.source_kind = SourceKind::kCode;
    d.language = LanguageTag::from_name("Python");
    return d;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& line : lines) out << line << "\n";
}

}  // namespace

TEST_CASE("document json line round-trips every field") {
    Document d = make_doc("doc-1", "print('héllo')\n");
    d.annotations["hap_count"] = "3";
    d.annotations["note"] = "x";
    d.fim_mode = "psm";
    d.serialized = "<fim_prefix>a<fim_suffix>c<fim_middle>b";

    Document back = Document::from_json_line(d.to_json_line());
    CHECK(back.id == d.id);
    CHECK(back.path == d.path);
    CHECK(back.content == d.content);
    CHECK(back.repo_id == d.repo_id);
    CHECK(back.license == d.license);
    CHECK(back.source_kind == d.source_kind);
    CHECK(back.language == d.language);
    CHECK(back.annotations == d.annotations);
    CHECK(back.fim_mode == d.fim_mode);
    CHECK(back.serialized == d.serialized);
    CHECK(back.to_json_line() == d.to_json_line());
}

TEST_CASE("optional fields stay absent through a round-trip") {
    Document d;
    d.id = "min-1";
    d.path = "a/b";
    d.content = "x";
    d.repo_id = "r";
    d.source_kind = SourceKind::kNaturalLanguage;
    Document back = Document::from_json_line(d.to_json_line());
    CHECK_FALSE(back.license.has_value());
    CHECK_FALSE(back.language.has_value());
    CHECK_FALSE(back.fim_mode.has_value());
    CHECK_FALSE(back.serialized.has_value());
    CHECK(back.annotations.empty());
}

TEST_CASE("write then read preserves documents and order") {
    std::vector<Document> docs = {make_doc("a", "one two"), make_doc("b", "three"),
                                  make_doc("c", "four five six")};
    for (const char* ext : {"roundtrip.jsonl", "roundtrip.jsonl.gz"}) {
        fs::path path = temp_file(ext);
        CHECK(write_all_records(path.string(), docs) == 3);
        std::vector<Document> back = read_all_records(path.string());
        REQUIRE(back.size() == 3);
        for (size_t i = 0; i < 3; ++i) {
            CHECK(back[i].to_json_line() == docs[i].to_json_line());
        }
    }
}

TEST_CASE("empty file reads as an empty stream") {
    fs::path path = temp_file("empty.jsonl");
    std::ofstream(path).close();
    CHECK(read_all_records(path.string()).empty());
}

TEST_CASE("blank lines are skipped") {
    fs::path path = temp_file("blanks.jsonl");
    write_lines(path, {make_doc("a", "x").to_json_line(), "",
                       make_doc("b", "y").to_json_line()});
    CHECK(read_all_records(path.string()).size() == 2);
}

TEST_CASE("malformed line errors name the line number and byte offset") {
    fs::path path = temp_file("badline.jsonl");
    std::string first = make_doc("a", "x").to_json_line();
    write_lines(path, {first, "{\"id\": \"trunc"});
    RecordReader reader(path.string());
    CHECK(reader.next().has_value());
    try {
        reader.next();
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("byte offset " + std::to_string(first.size() + 1)) !=
              std::string::npos);
    }
}

TEST_CASE("ill-formed utf-8 content is rejected, not repaired") {
    fs::path path = temp_file("badutf8.jsonl");
    std::ofstream out(path, std::ios::binary);
    out << "{\"id\":\"a\",\"path\":\"p\",\"content\":\"\xC3\x28\",\"repo_id\":\"r\","
           "\"source_kind\":\"code\"}\n";
    out.close();
    RecordReader reader(path.string());
    CHECK_THROWS_AS(reader.next(), DataError);
}

TEST_CASE("carriage returns make a line malformed") {
    fs::path path = temp_file("crlf.jsonl");
    std::ofstream out(path, std::ios::binary);
    out << make_doc("a", "x").to_json_line() << "\r\n";
    out.close();
    RecordReader reader(path.string());
    CHECK_THROWS_AS(reader.next(), DataError);
}

TEST_CASE("duplicate ids are rejected") {
    fs::path path = temp_file("dupid.jsonl");
    write_lines(path, {make_doc("same", "x").to_json_line(),
                       make_doc("same", "y").to_json_line()});
    RecordReader reader(path.string());
    CHECK(reader.next().has_value());
    try {
        reader.next();
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.code() == "duplicate_id");
    }
}

TEST_CASE("missing file raises a data error") {
    CHECK_THROWS_AS(read_all_records(temp_file("nope.jsonl").string()), DataError);
}

TEST_CASE("round-trip property over generated documents") {
    Rng rng(20260814);
    std::vector<Document> docs;
    const std::string alphabet = "abc xyz\n\t{}[]()=+-*/;:'\"_#<>";
    for (int i = 0; i < 200; ++i) {
        std::string content;
        size_t len = rng.bounded(300);
        for (size_t j = 0; j < len; ++j) {
            content.push_back(alphabet[rng.bounded(alphabet.size())]);
        }
        if (rng.bounded(3) == 0) content += "héçπ∂";  // multibyte tail
        Document d = make_doc("gen-" + std::to_string(i), content);
        if (rng.bounded(2) == 0) d.license.reset();
        if (rng.bounded(2) == 0) {
            d.source_kind = SourceKind::kIssue;
            d.language.reset();
            d.content = "[]";
        }
        docs.push_back(std::move(d));
    }
    fs::path path = temp_file("property.jsonl");
    write_all_records(path.string(), docs);
    std::vector<Document> back = read_all_records(path.string());
    REQUIRE(back.size() == docs.size());
    for (size_t i = 0; i < docs.size(); ++i) {
        CHECK(back[i].to_json_line() == docs[i].to_json_line());
    }

    // Writing the reread stream reproduces the file byte-exactly.
    fs::path path2 = temp_file("property2.jsonl");
    write_all_records(path2.string(), back);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
}

TEST_CASE("language assignment follows extension and basename rules") {
    CHECK(assign_language("src/app.py").name() == "Python");
    CHECK(assign_language("a/b/noextension").is_unknown());
    CHECK(assign_language("proj/Makefile").name() == "Makefile");
    CHECK(assign_language("docker/Dockerfile").name() == "Dockerfile");
    CHECK(assign_language("CMakeLists.txt").name() == "CMake");
    CHECK(assign_language("X.PY").name() == "Python");  // lowercased extension
    CHECK(assign_language("ui/view.jsx").name() == "JSX");
    CHECK(assign_language("ui/view.tsx").name() == "TypeScript");
    CHECK(assign_language("x.qqq").is_unknown());
    CHECK(assign_language("lib.rs").name() == "Rust");
    CHECK(assign_language("mod.m").name() == "Matlab");
    CHECK(assign_language("conf.yaml").name() == "YAML");
    CHECK(assign_language("conf.yml").name() == "YAML");
    CHECK(assign_language("page.html").name() == "HTML");
    CHECK(assign_language("data.json").name() == "JSON");
    // Purity: repeated calls agree.
    for (int i = 0; i < 3; ++i) CHECK(assign_language("src/app.py").name() == "Python");
}

TEST_CASE("taxonomy has 116 languages and a closed constructor") {
    CHECK(LanguageTag::all_names().size() == 116);
    CHECK(full_allowlist().size() == 116);
    CHECK_THROWS_AS(LanguageTag::from_name("NotALanguage"), ConfigError);
    CHECK_FALSE(LanguageTag::try_from_name("NotALanguage").has_value());
    CHECK(LanguageTag::try_from_name("Python").has_value());
}

TEST_CASE("language filter keeps only allowlisted extensions") {
    Document d = make_doc("a", "x");
    CHECK(filter_language(d, full_allowlist()).keep());

    CHECK(filter_language(d, {}).reasons ==
          std::vector<std::string>{"lang_not_allowed"});

    Document unknown = make_doc("b", "x");
    unknown.path = "x.qqq";
    CHECK(filter_language(unknown, full_allowlist()).reasons ==
          std::vector<std::string>{"lang_not_allowed"});

    // The verdict follows the path, not a stale tag.
    Document mislabeled = make_doc("c", "x");
    mislabeled.path = "x.qqq";
    mislabeled.language = LanguageTag::from_name("Python");
    CHECK_FALSE(filter_language(mislabeled, full_allowlist()).keep());
}

TEST_CASE("license filter distinguishes missing from non-permissive") {
    std::set<std::string> permissive = {"MIT", "Apache-2.0"};
    Document ok = make_doc("a", "x");
    ok.license = "Apache-2.0";
    CHECK(filter_license(ok, permissive).keep());

    Document missing = make_doc("b", "x");
    missing.license.reset();
    CHECK(filter_license(missing, permissive).reasons ==
          std::vector<std::string>{"license_missing"});

    Document gpl = make_doc("c", "x");
    gpl.license = "GPL-3.0";
    CHECK(filter_license(gpl, permissive).reasons ==
          std::vector<std::string>{"license_not_permissive"});
}

TEST_CASE("validate rejects invariant violations") {
    Document no_id = make_doc("", "x");
    CHECK_THROWS_AS(no_id.validate(), DataError);

    Document bad_utf8 = make_doc("a", std::string("\xFF\xFE"));
    CHECK_THROWS_AS(bad_utf8.validate(), DataError);

    Document tagged_issue = make_doc("b", "[]");
    tagged_issue.source_kind = SourceKind::kIssue;
    CHECK_THROWS_AS(tagged_issue.validate(), DataError);
}
