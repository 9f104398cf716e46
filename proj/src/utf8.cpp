#include "corpusprep/utf8.hpp"

#include <cassert>

namespace corpusprep::utf8 {

namespace {

inline bool is_continuation(unsigned char c) { return (c & 0xc0) == 0x80; }

}  // namespace

std::optional<size_t> find_invalid(std::string_view s) {
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        unsigned char c0 = static_cast<unsigned char>(s[i]);
        if (c0 < 0x80) {
            ++i;
            continue;
        }
        if (c0 < 0xc2) return i;  // continuation byte or overlong C0/C1 lead
        if (c0 < 0xe0) {
            if (i + 1 >= n || !is_continuation(s[i + 1])) return i;
            i += 2;
            continue;
        }
        if (c0 < 0xf0) {
            if (i + 2 >= n) return i;
            unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            if (!is_continuation(c1) || !is_continuation(c2)) return i;
            if (c0 == 0xe0 && c1 < 0xa0) return i;  // overlong
            if (c0 == 0xed && c1 >= 0xa0) return i;  // surrogate
            i += 3;
            continue;
        }
        if (c0 < 0xf5) {
            if (i + 3 >= n) return i;
            unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
            unsigned char c2 = static_cast<unsigned char>(s[i + 2]);
            unsigned char c3 = static_cast<unsigned char>(s[i + 3]);
            if (!is_continuation(c1) || !is_continuation(c2) || !is_continuation(c3)) return i;
            if (c0 == 0xf0 && c1 < 0x90) return i;   // overlong
            if (c0 == 0xf4 && c1 >= 0x90) return i;  // > U+10FFFF
            i += 4;
            continue;
        }
        return i;
    }
    return std::nullopt;
}

size_t scalar_count(std::string_view s) {
    size_t count = 0;
    for (unsigned char c : s) {
        if (!is_continuation(c)) ++count;
    }
    return count;
}

char32_t decode_at(std::string_view s, size_t& pos) {
    unsigned char c0 = static_cast<unsigned char>(s[pos]);
    if (c0 < 0x80) {
        ++pos;
        return c0;
    }
    if (c0 < 0xe0) {
        char32_t cp = (static_cast<char32_t>(c0 & 0x1f) << 6) |
                      (static_cast<unsigned char>(s[pos + 1]) & 0x3f);
        pos += 2;
        return cp;
    }
    if (c0 < 0xf0) {
        char32_t cp = (static_cast<char32_t>(c0 & 0x0f) << 12) |
                      ((static_cast<unsigned char>(s[pos + 1]) & 0x3f) << 6) |
                      (static_cast<unsigned char>(s[pos + 2]) & 0x3f);
        pos += 3;
        return cp;
    }
    char32_t cp = (static_cast<char32_t>(c0 & 0x07) << 18) |
                  ((static_cast<unsigned char>(s[pos + 1]) & 0x3f) << 12) |
                  ((static_cast<unsigned char>(s[pos + 2]) & 0x3f) << 6) |
                  (static_cast<unsigned char>(s[pos + 3]) & 0x3f);
    pos += 4;
    return cp;
}

size_t scalar_to_byte(std::string_view s, size_t scalar_idx) {
    size_t seen = 0;
    size_t i = 0;
    while (i < s.size()) {
        if (!is_continuation(static_cast<unsigned char>(s[i]))) {
            if (seen == scalar_idx) return i;
            ++seen;
        }
        ++i;
    }
    assert(seen == scalar_idx && "scalar index out of range");
    return s.size();
}

size_t byte_to_scalar(std::string_view s, size_t byte_off) {
    size_t count = 0;
    for (size_t i = 0; i < byte_off && i < s.size(); ++i) {
        if (!is_continuation(static_cast<unsigned char>(s[i]))) ++count;
    }
    return count;
}

}  // namespace corpusprep::utf8
