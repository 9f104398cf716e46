#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "corpusprep/language.hpp"

namespace corpusprep {

enum class SourceKind { kCode, kIssue, kNaturalLanguage };

std::string_view to_string(SourceKind kind);
SourceKind source_kind_from_string(std::string_view s);

// One corpus record: a code file, an issue thread, or a natural-language
// document. Issue threads store their comments as a JSON array of
// {"author": ..., "body": ...} objects in `content`.
struct Document {
    std::string id;
    std::string path;
    std::string content;
    std::string repo_id;
    std::optional<std::string> license;
    SourceKind source_kind = SourceKind::kCode;
    std::optional<LanguageTag> language;
    std::map<std::string, std::string> annotations;

    // Set by the FIM stage; absent on upstream records.
    std::optional<std::string> fim_mode;
    std::optional<std::string> serialized;

    // Throws DataError when an invariant is violated (empty id, ill-formed
    // UTF-8 content, language on a non-code record).
    void validate() const;

    nlohmann::json to_json() const;
    static Document from_json(const nlohmann::json& j);

    // Canonical single-line serialization (sorted keys, no whitespace).
    std::string to_json_line() const;
    static Document from_json_line(std::string_view line);

    // The text a trainer would consume: `serialized` when present, else content.
    std::string_view training_text() const {
        return serialized ? std::string_view(*serialized) : std::string_view(content);
    }
};

}  // namespace corpusprep
