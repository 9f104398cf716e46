#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace corpusprep::utf8 {

// Strict validation: rejects overlong forms, surrogates, and values past
// U+10FFFF. Returns the byte offset of the first ill-formed sequence, or
// nullopt when the whole string is well-formed.
std::optional<size_t> find_invalid(std::string_view s);

inline bool is_valid(std::string_view s) { return !find_invalid(s).has_value(); }

// Number of Unicode scalar values. Input must be valid UTF-8.
size_t scalar_count(std::string_view s);

// Decodes the scalar starting at byte offset `pos` of valid UTF-8.
// Returns the codepoint and advances `pos` past it.
char32_t decode_at(std::string_view s, size_t& pos);

// Byte offset of the scalar with index `scalar_idx` (0-based). Input valid.
// scalar_idx may equal scalar_count(s), giving s.size().
size_t scalar_to_byte(std::string_view s, size_t scalar_idx);

// Scalar index of the scalar starting at byte offset `byte_off`. Input valid
// and byte_off must be a scalar boundary (or s.size()).
size_t byte_to_scalar(std::string_view s, size_t byte_off);

// Unicode general category L* membership (table generated from UCD).
bool is_letter(char32_t cp);

}  // namespace corpusprep::utf8
