#include "corpusprep/dedup.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "corpusprep/errors.hpp"
#include "corpusprep/util.hpp"
#include "corpusprep/verdict.hpp"

namespace corpusprep {

namespace {

constexpr uint64_t kMersennePrime = (uint64_t{1} << 61) - 1;
constexpr uint64_t kEmptySentinel = UINT64_MAX;

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

uint64_t mulmod_p(uint64_t a, uint64_t x) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * x) % kMersennePrime);
}

}  // namespace

void DedupConfig::validate() const {
    if (shingle_k == 0) {
        throw ConfigError("shingle_k must be at least 1");
    }
    if (num_permutations == 0) {
        throw ConfigError("num_permutations must be at least 1");
    }
    if (static_cast<uint64_t>(bands) * rows != num_permutations) {
        throw ConfigError("bands x rows must equal num_permutations (" +
                          std::to_string(bands) + " x " + std::to_string(rows) +
                          " != " + std::to_string(num_permutations) + ")");
    }
    if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
        throw ConfigError("jaccard_threshold must be in (0, 1]");
    }
}

std::string content_digest(std::string_view content) { return sha256_hex(content); }

bool ExactDeduper::admit_digest(std::string digest) {
    if (seen_.insert(std::move(digest)).second) {
        ++kept_;
        return true;
    }
    ++dropped_;
    return false;
}

ShingleSet shingles(std::string_view doc_id, std::string_view content, uint32_t k) {
    ShingleSet set;
    set.doc_id = std::string(doc_id);

    std::vector<std::string_view> tokens;
    size_t i = 0;
    while (i < content.size()) {
        while (i < content.size() && is_ws(content[i])) ++i;
        size_t start = i;
        while (i < content.size() && !is_ws(content[i])) ++i;
        if (i > start) tokens.push_back(content.substr(start, i - start));
    }
    if (tokens.empty()) {
        return set;
    }

    std::string joined;
    auto hash_window = [&](size_t first, size_t count) {
        joined.clear();
        for (size_t t = first; t < first + count; ++t) {
            if (t > first) joined.push_back(' ');
            joined.append(tokens[t]);
        }
        return fnv1a64(joined);
    };

    if (tokens.size() < k) {
        set.shingles.push_back(hash_window(0, tokens.size()));
    } else {
        set.shingles.reserve(tokens.size() - k + 1);
        for (size_t w = 0; w + k <= tokens.size(); ++w) {
            set.shingles.push_back(hash_window(w, k));
        }
        std::sort(set.shingles.begin(), set.shingles.end());
        set.shingles.erase(std::unique(set.shingles.begin(), set.shingles.end()),
                           set.shingles.end());
    }
    return set;
}

MinHasher::MinHasher(uint32_t num_permutations, uint64_t perm_seed) {
    a_.reserve(num_permutations);
    b_.reserve(num_permutations);
    Rng rng(perm_seed);
    for (uint32_t i = 0; i < num_permutations; ++i) {
        a_.push_back(1 + rng.bounded(kMersennePrime - 1));  // a in [1, p-1]
        b_.push_back(rng.bounded(kMersennePrime));          // b in [0, p-1]
    }
}

MinHashSignature MinHasher::sign(const ShingleSet& set) const {
    MinHashSignature sig;
    sig.doc_id = set.doc_id;
    sig.values.assign(a_.size(), kEmptySentinel);
    if (set.shingles.empty()) {
        return sig;
    }
    for (size_t i = 0; i < a_.size(); ++i) {
        uint64_t best = kEmptySentinel;
        const uint64_t a = a_[i];
        const uint64_t b = b_[i];
        for (uint64_t x : set.shingles) {
            uint64_t h = mulmod_p(a, x % kMersennePrime) + b;
            if (h >= kMersennePrime) h -= kMersennePrime;
            if (h < best) best = h;
        }
        sig.values[i] = best;
    }
    return sig;
}

double jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.shingles.empty() && b.shingles.empty()) {
        return 1.0;
    }
    size_t i = 0;
    size_t j = 0;
    uint64_t inter = 0;
    while (i < a.shingles.size() && j < b.shingles.size()) {
        if (a.shingles[i] == b.shingles[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a.shingles[i] < b.shingles[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    uint64_t uni = a.shingles.size() + b.shingles.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double signature_match_fraction(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.values.empty()) {
        throw ConfigError("signatures must have equal nonzero length");
    }
    size_t equal = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) ++equal;
    }
    return static_cast<double>(equal) / static_cast<double>(a.values.size());
}

std::vector<BandKey> lsh_band_keys(const MinHashSignature& sig, const DedupConfig& cfg) {
    if (sig.values.size() != cfg.num_permutations) {
        throw ConfigError("signature length " + std::to_string(sig.values.size()) +
                          " does not match num_permutations " +
                          std::to_string(cfg.num_permutations));
    }
    std::vector<BandKey> keys;
    keys.reserve(cfg.bands);
    std::string bytes(static_cast<size_t>(cfg.rows) * 8, '\0');
    for (uint32_t band = 0; band < cfg.bands; ++band) {
        for (uint32_t r = 0; r < cfg.rows; ++r) {
            uint64_t v = sig.values[static_cast<size_t>(band) * cfg.rows + r];
            for (int byte = 0; byte < 8; ++byte) {
                bytes[static_cast<size_t>(r) * 8 + byte] =
                    static_cast<char>((v >> (8 * byte)) & 0xFF);
            }
        }
        keys.push_back(BandKey{band, fnv1a64(bytes)});
    }
    return keys;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), size_t{0});
    }

    size_t find(size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<size_t> parent_;
};

}  // namespace

nlohmann::json DedupCluster::to_json() const {
    return nlohmann::json{{"representative_id", representative_id},
                          {"duplicate_ids", duplicate_ids}};
}

DedupCluster DedupCluster::from_json(const nlohmann::json& j) {
    DedupCluster c;
    c.representative_id = j.at("representative_id").get<std::string>();
    c.duplicate_ids = j.at("duplicate_ids").get<std::vector<std::string>>();
    return c;
}

FuzzyDedupPlan fuzzy_dedup_plan(const std::vector<ShingleSet>& sets,
                                const std::vector<uint64_t>& content_sizes,
                                const DedupConfig& cfg, unsigned workers) {
    cfg.validate();
    if (sets.size() != content_sizes.size()) {
        throw ConfigError("shingle sets and content sizes must align");
    }
    const size_t n = sets.size();
    FuzzyDedupPlan plan;

    std::vector<MinHashSignature> signatures(n);
    MinHasher hasher(cfg.num_permutations, cfg.perm_seed);
    parallel_for(n, workers, [&](size_t i) { signatures[i] = hasher.sign(sets[i]); });

    // Bucket by (band, digest); identical-signature merging keeps buckets small.
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
    buckets.reserve(n * 2);
    for (size_t i = 0; i < n; ++i) {
        for (const BandKey& key : lsh_band_keys(signatures[i], cfg)) {
            uint64_t slot = key.digest ^ (uint64_t{key.band} * 0x9E3779B97F4A7C15ULL);
            buckets[slot].push_back(static_cast<uint32_t>(i));
        }
    }

    std::vector<uint64_t> pair_keys;
    for (const auto& [slot, members] : buckets) {
        if (members.size() < 2) continue;
        for (size_t a = 0; a < members.size(); ++a) {
            for (size_t b = a + 1; b < members.size(); ++b) {
                uint32_t lo = std::min(members[a], members[b]);
                uint32_t hi = std::max(members[a], members[b]);
                pair_keys.push_back((uint64_t{lo} << 32) | hi);
            }
        }
    }
    std::sort(pair_keys.begin(), pair_keys.end());
    pair_keys.erase(std::unique(pair_keys.begin(), pair_keys.end()), pair_keys.end());
    plan.candidate_pairs = pair_keys.size();

    std::vector<char> verified(pair_keys.size(), 0);
    parallel_for(pair_keys.size(), workers, [&](size_t p) {
        size_t i = static_cast<size_t>(pair_keys[p] >> 32);
        size_t j = static_cast<size_t>(pair_keys[p] & 0xFFFFFFFFu);
        verified[p] = jaccard(sets[i], sets[j]) >= cfg.jaccard_threshold ? 1 : 0;
    });

    UnionFind uf(n);
    for (size_t p = 0; p < pair_keys.size(); ++p) {
        if (verified[p] != 0) {
            ++plan.verified_pairs;
            uf.unite(static_cast<size_t>(pair_keys[p] >> 32),
                     static_cast<size_t>(pair_keys[p] & 0xFFFFFFFFu));
        }
    }

    std::map<size_t, std::vector<size_t>> groups;  // root → members in input order
    for (size_t i = 0; i < n; ++i) {
        groups[uf.find(i)].push_back(i);
    }

    std::vector<char> drop(n, 0);
    for (const auto& [root, members] : groups) {
        if (members.size() < 2) continue;
        size_t rep = members[0];
        for (size_t m : members) {
            if (content_sizes[m] < content_sizes[rep] ||
                (content_sizes[m] == content_sizes[rep] &&
                 sets[m].doc_id < sets[rep].doc_id)) {
                rep = m;
            }
        }
        DedupCluster cluster;
        cluster.representative_id = sets[rep].doc_id;
        for (size_t m : members) {
            if (m != rep) {
                drop[m] = 1;
                cluster.duplicate_ids.push_back(sets[m].doc_id);
            }
        }
        plan.clusters.push_back(std::move(cluster));
    }

    plan.kept_indices.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (drop[i] == 0) plan.kept_indices.push_back(i);
    }
    return plan;
}

FuzzyDedupResult fuzzy_dedup(std::vector<Document> docs, const DedupConfig& cfg,
                             unsigned workers) {
    std::vector<ShingleSet> sets(docs.size());
    std::vector<uint64_t> sizes(docs.size());
    parallel_for(docs.size(), workers, [&](size_t i) {
        sets[i] = shingles(docs[i].id, docs[i].content, cfg.shingle_k);
        sizes[i] = docs[i].content.size();
    });
    FuzzyDedupPlan plan = fuzzy_dedup_plan(sets, sizes, cfg, workers);

    FuzzyDedupResult result;
    result.clusters = std::move(plan.clusters);
    result.kept.reserve(plan.kept_indices.size());
    for (size_t idx : plan.kept_indices) {
        result.kept.push_back(std::move(docs[idx]));
    }
    result.dropped = docs.size() - result.kept.size();
    return result;
}

}  // namespace corpusprep
