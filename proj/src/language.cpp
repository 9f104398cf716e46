#include "corpusprep/language.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "corpusprep/embedded_data.hpp"
#include "corpusprep/errors.hpp"

namespace corpusprep {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

const std::vector<std::string>& language_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (auto& line : split_lines(embedded::kLanguagesTxt)) {
            if (!line.empty()) out.push_back(line);
        }
        return out;
    }();
    return names;
}

const std::map<std::string, int16_t, std::less<>>& name_index() {
    static const std::map<std::string, int16_t, std::less<>> index = [] {
        std::map<std::string, int16_t, std::less<>> out;
        const auto& names = language_names();
        for (size_t i = 0; i < names.size(); ++i) {
            out.emplace(names[i], static_cast<int16_t>(i));
        }
        return out;
    }();
    return index;
}

}  // namespace

LanguageTag LanguageTag::from_name(std::string_view name) {
    auto maybe = try_from_name(name);
    if (!maybe) {
        throw ConfigError("unknown language name: '" + std::string(name) + "'");
    }
    return *maybe;
}

std::optional<LanguageTag> LanguageTag::try_from_name(std::string_view name) {
    if (name == "unknown") return LanguageTag::unknown();
    const auto& index = name_index();
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return LanguageTag(it->second);
}

std::string_view LanguageTag::name() const {
    if (index_ == kUnknownIndex) return "unknown";
    return language_names()[static_cast<size_t>(index_)];
}

const std::vector<std::string_view>& LanguageTag::all_names() {
    static const std::vector<std::string_view> views = [] {
        std::vector<std::string_view> out;
        for (const auto& n : language_names()) out.emplace_back(n);
        return out;
    }();
    return views;
}

ExtensionMap ExtensionMap::parse(std::string_view tsv, std::string_view origin) {
    ExtensionMap map;
    size_t lineno = 0;
    for (auto& line : split_lines(tsv)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) +
                              ": expected <key>\\t<language>");
        }
        std::string key = line.substr(0, tab);
        std::string lang_name = line.substr(tab + 1);
        auto tag = LanguageTag::try_from_name(lang_name);
        if (!tag) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) +
                              ": language '" + lang_name + "' is not in the taxonomy");
        }
        if (key.empty()) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": empty key");
        }
        if (key[0] == '.') {
            map.by_extension_.emplace_back(ascii_lower(key), *tag);
        } else {
            map.by_basename_.emplace_back(key, *tag);
        }
    }
    auto by_key = [](const auto& a, const auto& b) { return a.first < b.first; };
    std::sort(map.by_extension_.begin(), map.by_extension_.end(), by_key);
    std::sort(map.by_basename_.begin(), map.by_basename_.end(), by_key);
    return map;
}

ExtensionMap ExtensionMap::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open extension map: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const ExtensionMap& ExtensionMap::builtin() {
    static const ExtensionMap map = parse(embedded::kExtensionMapTsv, "<builtin extension map>");
    return map;
}

const LanguageTag* ExtensionMap::find_extension(std::string_view key) const {
    auto it = std::lower_bound(by_extension_.begin(), by_extension_.end(), key,
                               [](const auto& e, std::string_view k) { return e.first < k; });
    if (it != by_extension_.end() && it->first == key) return &it->second;
    return nullptr;
}

const LanguageTag* ExtensionMap::find_basename(std::string_view key) const {
    auto it = std::lower_bound(by_basename_.begin(), by_basename_.end(), key,
                               [](const auto& e, std::string_view k) { return e.first < k; });
    if (it != by_basename_.end() && it->first == key) return &it->second;
    return nullptr;
}

LanguageTag ExtensionMap::assign(std::string_view path) const {
    size_t slash = path.find_last_of("/\\");
    std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
    if (base.empty()) return LanguageTag::unknown();

    if (const LanguageTag* tag = find_basename(base)) return *tag;

    // Longest suffix first: "a.spec.jsx" tries ".spec.jsx" before ".jsx".
    std::string lower = ascii_lower(base);
    size_t dot = lower.find('.', 1);  // a leading dot alone is not an extension
    while (dot != std::string::npos) {
        std::string_view suffix = std::string_view(lower).substr(dot);
        if (const LanguageTag* tag = find_extension(suffix)) return *tag;
        dot = lower.find('.', dot + 1);
    }
    return LanguageTag::unknown();
}

LanguageTag assign_language(std::string_view path) {
    return ExtensionMap::builtin().assign(path);
}

LanguageSet full_allowlist() {
    LanguageSet set;
    for (auto name : LanguageTag::all_names()) {
        set.insert(LanguageTag::from_name(name));
    }
    return set;
}

}  // namespace corpusprep
