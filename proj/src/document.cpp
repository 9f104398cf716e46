#include "corpusprep/document.hpp"

#include "corpusprep/errors.hpp"
#include "corpusprep/utf8.hpp"

namespace corpusprep {

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::kCode: return "code";
        case SourceKind::kIssue: return "issue";
        case SourceKind::kNaturalLanguage: return "natural_language";
    }
    return "code";
}

SourceKind source_kind_from_string(std::string_view s) {
    if (s == "code") return SourceKind::kCode;
    if (s == "issue") return SourceKind::kIssue;
    if (s == "natural_language") return SourceKind::kNaturalLanguage;
    throw DataError("bad_source_kind", "invalid source_kind: '" + std::string(s) + "'");
}

void Document::validate() const {
    if (id.empty()) {
        throw DataError("empty_id", "document has an empty id");
    }
    if (auto bad = utf8::find_invalid(content)) {
        throw DataError("bad_utf8", "document '" + id + "': ill-formed UTF-8 in content at byte " +
                                        std::to_string(*bad));
    }
    if (language && source_kind != SourceKind::kCode) {
        throw DataError("language_on_non_code",
                        "document '" + id + "': language tag on a non-code record");
    }
}

nlohmann::json Document::to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["path"] = path;
    j["content"] = content;
    j["repo_id"] = repo_id;
    j["source_kind"] = to_string(source_kind);
    if (license) j["license"] = *license;
    if (language) j["language"] = language->name();
    j["annotations"] = annotations;
    if (fim_mode) j["mode"] = *fim_mode;
    if (serialized) j["serialized"] = *serialized;
    return j;
}

Document Document::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("malformed_record", "record is not a JSON object");
    auto require_string = [&](const char* key) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw DataError("malformed_record",
                            std::string("missing or non-string field '") + key + "'");
        }
        return it->get<std::string>();
    };

    Document doc;
    doc.id = require_string("id");
    doc.path = require_string("path");
    doc.content = require_string("content");
    doc.repo_id = require_string("repo_id");
    doc.source_kind = source_kind_from_string(require_string("source_kind"));

    if (auto it = j.find("license"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("malformed_record", "'license' must be a string");
        doc.license = it->get<std::string>();
    }
    if (auto it = j.find("language"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("malformed_record", "'language' must be a string");
        auto tag = LanguageTag::try_from_name(it->get<std::string>());
        if (!tag) {
            throw DataError("malformed_record",
                            "'language' outside the taxonomy: " + it->get<std::string>());
        }
        if (!tag->is_unknown()) doc.language = *tag;
    }
    if (auto it = j.find("annotations"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw DataError("malformed_record", "'annotations' must be an object");
        for (auto& [key, value] : it->items()) {
            if (!value.is_string()) {
                throw DataError("malformed_record", "annotation '" + key + "' must be a string");
            }
            doc.annotations[key] = value.get<std::string>();
        }
    }
    if (auto it = j.find("mode"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("malformed_record", "'mode' must be a string");
        doc.fim_mode = it->get<std::string>();
    }
    if (auto it = j.find("serialized"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("malformed_record", "'serialized' must be a string");
        doc.serialized = it->get<std::string>();
    }

    doc.validate();
    return doc;
}

std::string Document::to_json_line() const { return to_json().dump(); }

Document Document::from_json_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed_record", e.what());
    }
    return from_json(j);
}

}  // namespace corpusprep
