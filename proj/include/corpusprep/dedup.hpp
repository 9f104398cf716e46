#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpusprep/document.hpp"

namespace corpusprep {

struct DedupConfig {
    uint32_t shingle_k = 5;
    uint32_t num_permutations = 256;
    uint32_t bands = 32;
    uint32_t rows = 8;
    double jaccard_threshold = 0.7;
    uint64_t perm_seed = 0;

    void validate() const;
};

// SHA-256 of the UTF-8 bytes, lowercase hex.
std::string content_digest(std::string_view content);

// Streaming first-wins filter over content digests.
class ExactDeduper {
public:
    // True when the content has not been seen before (keep it).
    bool admit(std::string_view content) { return admit_digest(content_digest(content)); }
    bool admit_digest(std::string digest);

    uint64_t kept() const { return kept_; }
    uint64_t dropped() const { return dropped_; }

private:
    std::unordered_set<std::string> seen_;
    uint64_t kept_ = 0;
    uint64_t dropped_ = 0;
};

struct ShingleSet {
    std::string doc_id;
    std::vector<uint64_t> shingles;  // sorted, unique
};

// Word-level k-token shingles over maximal whitespace runs, hashed to 64 bits.
// Fewer than k tokens → one shingle of all tokens joined; no tokens → empty set.
ShingleSet shingles(std::string_view doc_id, std::string_view content, uint32_t k);

struct MinHashSignature {
    std::string doc_id;
    std::vector<uint64_t> values;
};

// Per-permutation affine hashes h_i(x) = (a_i·x + b_i) mod (2^61 − 1),
// coefficients drawn deterministically from perm_seed.
class MinHasher {
public:
    MinHasher(uint32_t num_permutations, uint64_t perm_seed);

    MinHashSignature sign(const ShingleSet& set) const;

    uint32_t num_permutations() const { return static_cast<uint32_t>(a_.size()); }

private:
    std::vector<uint64_t> a_;
    std::vector<uint64_t> b_;
};

double jaccard(const ShingleSet& a, const ShingleSet& b);

// Fraction of equal positions between two equal-length signatures.
double signature_match_fraction(const MinHashSignature& a, const MinHashSignature& b);

struct BandKey {
    uint32_t band = 0;
    uint64_t digest = 0;

    bool operator==(const BandKey&) const = default;
};

std::vector<BandKey> lsh_band_keys(const MinHashSignature& sig, const DedupConfig& cfg);

struct DedupCluster {
    std::string representative_id;
    std::vector<std::string> duplicate_ids;

    nlohmann::json to_json() const;
    static DedupCluster from_json(const nlohmann::json& j);
};

struct FuzzyDedupPlan {
    // Indices into the input, in input order, of documents to keep.
    std::vector<size_t> kept_indices;
    // Clusters with at least one duplicate, ordered by first member appearance.
    std::vector<DedupCluster> clusters;
    uint64_t candidate_pairs = 0;
    uint64_t verified_pairs = 0;
};

// Core of fuzzy_dedup, decoupled from Document so callers can stream shingle
// sets without holding content. content_sizes[i] is the byte length of
// document i's content and drives the representative tie-break.
FuzzyDedupPlan fuzzy_dedup_plan(const std::vector<ShingleSet>& sets,
                                const std::vector<uint64_t>& content_sizes,
                                const DedupConfig& cfg, unsigned workers = 1);

struct FuzzyDedupResult {
    std::vector<Document> kept;
    std::vector<DedupCluster> clusters;
    uint64_t dropped = 0;
};

FuzzyDedupResult fuzzy_dedup(std::vector<Document> docs, const DedupConfig& cfg,
                             unsigned workers = 1);

}  // namespace corpusprep
