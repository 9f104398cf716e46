#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace corpusprep {

// splitmix64: the canonical 64-bit mixer. Used everywhere we need a seeded,
// platform-stable random stream (std <random> distributions are not
// bit-portable across standard libraries).
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Small deterministic RNG over splitmix64.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() { return splitmix64(state_); }

    // Uniform in [0, n). Lemire multiply-shift; bias is negligible for our n.
    uint64_t bounded(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

// Seed for a per-document RNG: outcomes must not depend on stream order.
inline uint64_t per_doc_seed(uint64_t pipeline_seed, std::string_view doc_id);

inline uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const void* data, size_t len) {
    return fnv1a64(std::string_view(static_cast<const char*>(data), len));
}

inline uint64_t per_doc_seed(uint64_t pipeline_seed, std::string_view doc_id) {
    uint64_t s = pipeline_seed ^ 0x6a09e667f3bcc908ULL;
    uint64_t mixed = splitmix64(s) ^ fnv1a64(doc_id);
    return splitmix64(mixed);
}

std::string to_hex(const unsigned char* data, size_t len);

// SHA-256 of arbitrary bytes, lowercase hex.
std::string sha256_hex(std::string_view data);

// Applies fn to every index in [0, n) and guarantees the same result layout
// as a sequential loop for any worker count. fn(i) must only touch slot i.
void parallel_for(size_t n, unsigned workers, const std::function<void(size_t)>& fn);

template <typename In, typename Out, typename Fn>
std::vector<Out> parallel_map(const std::vector<In>& items, unsigned workers, Fn fn) {
    std::vector<Out> out(items.size());
    parallel_for(items.size(), workers,
                 [&](size_t i) { out[i] = fn(items[i]); });
    return out;
}

}  // namespace corpusprep
