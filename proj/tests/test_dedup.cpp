#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "corpusprep/dedup.hpp"
#include "corpusprep/errors.hpp"
#include "corpusprep/util.hpp"

using namespace corpusprep;

namespace {

Document make_doc(const std::string& id, const std::string& content) {
    Document d;
    d.id = id;
    d.path = "src/" + id + ".py";
    d.content = content;
    d.repo_id = "r";
    d.license = "MIT";
    d.source_kind = SourceKind::kCode;
    return d;
}

ShingleSet set_of(std::vector<uint64_t> values, const std::string& id = "s") {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return ShingleSet{id, std::move(values)};
}

std::string tokens_to_content(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

TEST_CASE("content digest matches frozen sha-256 vectors") {
    CHECK(content_digest("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(content_digest("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(content_digest("x") == content_digest("x"));
    CHECK(content_digest("x") != content_digest("y"));
}

TEST_CASE("exact dedup keeps the first occurrence per digest") {
    ExactDeduper d;
    CHECK(d.admit("A"));
    CHECK_FALSE(d.admit("A"));
    CHECK(d.admit("B"));
    CHECK(d.kept() == 2);
    CHECK(d.dropped() == 1);

    // Idempotence: a pass over already-unique content drops nothing.
    ExactDeduper second;
    CHECK(second.admit("A"));
    CHECK(second.admit("B"));
    CHECK(second.dropped() == 0);
}

TEST_CASE("shingles windows k tokens over whitespace runs") {
    ShingleSet s = shingles("d", "a b c d e f", 5);
    CHECK(s.shingles.size() == 2);
    CHECK(std::is_sorted(s.shingles.begin(), s.shingles.end()));
    // The windows hash the space-joined token text.
    std::vector<uint64_t> expected = {fnv1a64("a b c d e"), fnv1a64("b c d e f")};
    std::sort(expected.begin(), expected.end());
    CHECK(s.shingles == expected);

    ShingleSet short_s = shingles("d", "a b", 5);
    CHECK(short_s.shingles == std::vector<uint64_t>{fnv1a64("a b")});

    CHECK(shingles("d", "", 5).shingles.empty());
    CHECK(shingles("d", " \t\n  ", 5).shingles.empty());

    // Whitespace runs collapse: formatting does not change the set.
    CHECK(shingles("d", "a  b\tc\nd   e f", 5).shingles == s.shingles);

    // Repeated windows appear once (set semantics).
    ShingleSet rep = shingles("d", "x x x x x x x", 5);
    CHECK(rep.shingles.size() == 1);
}

TEST_CASE("jaccard over shingle sets") {
    auto a = set_of({1, 2, 3});
    auto b = set_of({2, 3, 4});
    CHECK(jaccard(a, b) == 0.5);
    CHECK(jaccard(a, a) == 1.0);
    CHECK(jaccard(set_of({1, 2}), set_of({3, 4})) == 0.0);
    CHECK(jaccard(set_of({}), set_of({})) == 1.0);
    CHECK(jaccard(set_of({1}), set_of({})) == 0.0);
}

TEST_CASE("minhash signatures are deterministic functions of set and seed") {
    DedupConfig cfg;
    cfg.perm_seed = 7;
    MinHasher hasher(cfg.num_permutations, cfg.perm_seed);
    auto s1 = set_of({10, 20, 30}, "a");
    auto s2 = set_of({10, 20, 30}, "b");
    MinHashSignature sig1 = hasher.sign(s1);
    MinHashSignature sig2 = hasher.sign(s2);
    REQUIRE(sig1.values.size() == 256);
    CHECK(sig1.values == sig2.values);  // same set, same signature
    CHECK(sig1.doc_id == "a");

    // Values stay under the Mersenne prime modulus.
    constexpr uint64_t p = (1ULL << 61) - 1;
    for (uint64_t v : sig1.values) CHECK(v < p);

    // A different seed draws a different permutation family.
    MinHasher other(cfg.num_permutations, 8);
    CHECK(other.sign(s1).values != sig1.values);

    // Empty sets get the sentinel signature.
    MinHashSignature empty_sig = hasher.sign(set_of({}));
    for (uint64_t v : empty_sig.values) CHECK(v == UINT64_MAX);
}

TEST_CASE("signature match fraction approximates jaccard") {
    MinHasher hasher(256, 42);
    Rng rng(1);
    // 50 shared + 50 distinct each side → true J = 50 / 150 ≈ 0.333.
    std::set<uint64_t> pool;
    while (pool.size() < 150) pool.insert(rng.next());
    std::vector<uint64_t> values(pool.begin(), pool.end());
    std::vector<uint64_t> shared(values.begin(), values.begin() + 50);
    std::vector<uint64_t> only_a(values.begin() + 50, values.begin() + 100);
    std::vector<uint64_t> only_b(values.begin() + 100, values.end());

    auto a_vals = shared;
    a_vals.insert(a_vals.end(), only_a.begin(), only_a.end());
    auto b_vals = shared;
    b_vals.insert(b_vals.end(), only_b.begin(), only_b.end());
    auto a = set_of(a_vals, "a");
    auto b = set_of(b_vals, "b");

    double truth = jaccard(a, b);
    CHECK(truth == doctest::Approx(50.0 / 150.0));
    double est = signature_match_fraction(hasher.sign(a), hasher.sign(b));
    CHECK(std::abs(est - truth) < 0.12);  // ~4σ at 256 permutations

    CHECK(signature_match_fraction(hasher.sign(a), hasher.sign(a)) == 1.0);
    MinHasher small(8, 42);
    CHECK_THROWS_AS(
        signature_match_fraction(hasher.sign(a), small.sign(b)), ConfigError);
}

TEST_CASE("band keys partition the signature into 32 bands of 8 rows") {
    DedupConfig cfg;
    MinHasher hasher(cfg.num_permutations, 3);
    auto a = set_of({1, 2, 3}, "a");
    std::vector<BandKey> keys = lsh_band_keys(hasher.sign(a), cfg);
    REQUIRE(keys.size() == 32);
    for (uint32_t i = 0; i < 32; ++i) CHECK(keys[i].band == i);

    // Identical signatures collide in every band.
    std::vector<BandKey> again = lsh_band_keys(hasher.sign(a), cfg);
    CHECK(keys == again);

    // Hand-built signatures equal on exactly rows 0..7 share only band 0.
    MinHashSignature s1, s2;
    s1.doc_id = "x";
    s2.doc_id = "y";
    for (uint64_t i = 0; i < 256; ++i) {
        s1.values.push_back(i);
        s2.values.push_back(i < 8 ? i : i + 1000);
    }
    auto k1 = lsh_band_keys(s1, cfg);
    auto k2 = lsh_band_keys(s2, cfg);
    CHECK(k1[0] == k2[0]);
    for (size_t band = 1; band < 32; ++band) {
        CHECK_FALSE(k1[band] == k2[band]);
    }

    MinHashSignature wrong;
    wrong.values.resize(100);
    CHECK_THROWS_AS(lsh_band_keys(wrong, cfg), ConfigError);
}

TEST_CASE("dedup config validates band geometry") {
    DedupConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.bands = 31;  // 31 × 8 ≠ 256
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = DedupConfig{};
    cfg.jaccard_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.jaccard_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cluster json round-trip") {
    DedupCluster c;
    c.representative_id = "rep";
    c.duplicate_ids = {"d1", "d2"};
    DedupCluster back = DedupCluster::from_json(c.to_json());
    CHECK(back.representative_id == "rep");
    CHECK(back.duplicate_ids == c.duplicate_ids);
}

TEST_CASE("fuzzy dedup keeps dissimilar documents") {
    std::vector<Document> docs = {make_doc("a", "one two three four five six"),
                                  make_doc("b", "seven eight nine ten eleven twelve")};
    DedupConfig cfg;
    FuzzyDedupResult r = fuzzy_dedup(std::move(docs), cfg);
    CHECK(r.kept.size() == 2);
    CHECK(r.dropped == 0);
    CHECK(r.clusters.empty());
}

TEST_CASE("exact copies cluster at jaccard 1 with a deterministic representative") {
    std::string content = "alpha beta gamma delta epsilon zeta eta theta";
    std::vector<Document> docs = {make_doc("z-second", content),
                                  make_doc("a-first", content),
                                  make_doc("other", "totally different words here now ok")};
    DedupConfig cfg;
    FuzzyDedupResult r = fuzzy_dedup(std::move(docs), cfg);
    REQUIRE(r.kept.size() == 2);
    // Same length → smallest id wins, regardless of stream order.
    CHECK(r.kept[0].id == "a-first");
    CHECK(r.kept[1].id == "other");
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].representative_id == "a-first");
    CHECK(r.clusters[0].duplicate_ids == std::vector<std::string>{"z-second"});
}

TEST_CASE("planted near-duplicate at jaccard 0.9 is caught") {
    Rng rng(5);
    std::vector<std::string> tokens;
    for (int i = 0; i < 100; ++i) tokens.push_back("tok" + std::to_string(rng.next() % 100000));
    std::vector<std::string> edited = tokens;
    edited[50] = "EDITEDTOKEN";  // one substitution → J ≈ 91/101 ≈ 0.90

    Document a = make_doc("orig", tokens_to_content(tokens));
    Document b = make_doc("edit", tokens_to_content(edited));
    DedupConfig cfg;
    double truth = jaccard(shingles("a", a.content, cfg.shingle_k),
                           shingles("b", b.content, cfg.shingle_k));
    CHECK(truth > 0.85);
    CHECK(truth < 0.95);

    FuzzyDedupResult r = fuzzy_dedup({a, b}, cfg);
    CHECK(r.kept.size() == 1);
    REQUIRE(r.clusters.size() == 1);

    // Idempotence: deduping the kept stream drops nothing.
    FuzzyDedupResult second = fuzzy_dedup(r.kept, cfg);
    CHECK(second.kept.size() == r.kept.size());
    CHECK(second.dropped == 0);
}

TEST_CASE("fuzzy dedup is worker-count independent") {
    Rng rng(11);
    std::vector<Document> docs;
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> tokens;
        for (int t = 0; t < 30; ++t) {
            tokens.push_back("w" + std::to_string(rng.bounded(i < 100 ? 40 : 100000)));
        }
        docs.push_back(make_doc("doc-" + std::to_string(i), tokens_to_content(tokens)));
    }
    DedupConfig cfg;
    cfg.perm_seed = 99;

    auto run = [&](unsigned workers) {
        FuzzyDedupResult r = fuzzy_dedup(docs, cfg, workers);
        std::string digest;
        for (const auto& d : r.kept) digest += d.id + "\n";
        for (const auto& c : r.clusters) {
            digest += c.representative_id + ":";
            for (const auto& id : c.duplicate_ids) digest += id + ",";
            digest += "\n";
        }
        return digest;
    };
    std::string base = run(1);
    CHECK(run(2) == base);
    CHECK(run(4) == base);
    CHECK(run(8) == base);
}

TEST_CASE("kept output preserves input order") {
    std::vector<Document> docs;
    for (int i = 0; i < 50; ++i) {
        docs.push_back(make_doc("u" + std::to_string(i),
                                "unique words nr " + std::to_string(i * 7919) + " plus " +
                                    std::to_string(i * 104729) + " tail tokens here"));
    }
    DedupConfig cfg;
    FuzzyDedupResult r = fuzzy_dedup(docs, cfg);
    REQUIRE(r.kept.size() == docs.size());
    for (size_t i = 0; i < docs.size(); ++i) CHECK(r.kept[i].id == docs[i].id);
}
