#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace corpusprep {

// One of the 116 taxonomy names, or the `unknown` sentinel. The set is
// closed: construction from any other name fails.
class LanguageTag {
public:
    LanguageTag() : index_(kUnknownIndex) {}

    static LanguageTag unknown() { return LanguageTag(); }

    // Throws ConfigError for names outside the taxonomy.
    static LanguageTag from_name(std::string_view name);

    static std::optional<LanguageTag> try_from_name(std::string_view name);

    std::string_view name() const;
    bool is_unknown() const { return index_ == kUnknownIndex; }

    bool operator==(const LanguageTag& other) const { return index_ == other.index_; }
    bool operator!=(const LanguageTag& other) const { return index_ != other.index_; }
    bool operator<(const LanguageTag& other) const { return index_ < other.index_; }

    // The full taxonomy, in canonical order.
    static const std::vector<std::string_view>& all_names();

private:
    static constexpr int16_t kUnknownIndex = -1;
    explicit LanguageTag(int16_t index) : index_(index) {}
    int16_t index_;
};

// Extension/basename table mapping file paths to taxonomy names.
// The shipped table is embedded at build time from data/extension_map.tsv;
// an alternative table can be loaded from a file of the same format.
class ExtensionMap {
public:
    // The built-in table.
    static const ExtensionMap& builtin();

    // Parses a TSV table (see data/extension_map.tsv for the format).
    static ExtensionMap parse(std::string_view tsv, std::string_view origin);

    static ExtensionMap load_file(const std::string& path);

    // Basename rules first (exact, case-sensitive), then the lowercased
    // suffix, longest suffix first. Pure and total; misses map to unknown.
    LanguageTag assign(std::string_view path) const;

private:
    ExtensionMap() = default;
    std::vector<std::pair<std::string, LanguageTag>> by_extension_;  // keys include the dot
    std::vector<std::pair<std::string, LanguageTag>> by_basename_;
    const LanguageTag* find_extension(std::string_view key) const;
    const LanguageTag* find_basename(std::string_view key) const;
};

// Convenience wrapper over the built-in table.
LanguageTag assign_language(std::string_view path);

using LanguageSet = std::set<LanguageTag>;

// All 116 taxonomy languages (no `unknown`).
LanguageSet full_allowlist();

}  // namespace corpusprep
