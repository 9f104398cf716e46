#include "corpusprep/quality.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corpusprep/embedded_data.hpp"
#include "corpusprep/errors.hpp"
#include "corpusprep/language.hpp"
#include "corpusprep/utf8.hpp"

namespace corpusprep {

namespace {

using nlohmann::json;

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    }
    return true;
}

const LanguageTag& tag_xslt() {
    static const LanguageTag t = LanguageTag::from_name("XSLT");
    return t;
}
const LanguageTag& tag_html() {
    static const LanguageTag t = LanguageTag::from_name("HTML");
    return t;
}
const LanguageTag& tag_json() {
    static const LanguageTag t = LanguageTag::from_name("JSON");
    return t;
}
const LanguageTag& tag_yaml() {
    static const LanguageTag t = LanguageTag::from_name("YAML");
    return t;
}

void append_scalar_utf8(std::string& out, uint32_t cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        cp = 0xFFFD;
    }
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Decodes the entity starting at s[i] ('&'). On success appends the decoded
// text to out and returns the index just past the entity; otherwise returns i.
size_t decode_entity(std::string_view s, size_t i, std::string& out) {
    size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi == i + 1 || semi - i > 12) {
        return i;
    }
    std::string_view body = s.substr(i + 1, semi - i - 1);
    if (body[0] == '#') {
        uint32_t cp = 0;
        bool ok = false;
        if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
            for (size_t k = 2; k < body.size(); ++k) {
                char c = ascii_lower(body[k]);
                int d;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else return i;
                cp = cp * 16 + static_cast<uint32_t>(d);
                if (cp > 0x10FFFF) return i;
                ok = true;
            }
        } else if (body.size() > 1) {
            for (size_t k = 1; k < body.size(); ++k) {
                char c = body[k];
                if (c < '0' || c > '9') return i;
                cp = cp * 10 + static_cast<uint32_t>(c - '0');
                if (cp > 0x10FFFF) return i;
                ok = true;
            }
        }
        if (!ok) return i;
        append_scalar_utf8(out, cp);
        return semi + 1;
    }
    struct Named {
        std::string_view name;
        std::string_view text;
    };
    static constexpr Named kNamed[] = {
        {"amp", "&"},  {"lt", "<"},    {"gt", ">"},    {"quot", "\""},
        {"apos", "'"}, {"nbsp", " "},  {"copy", "\xC2\xA9"}, {"mdash", "\xE2\x80\x94"},
        {"ndash", "\xE2\x80\x93"},     {"hellip", "\xE2\x80\xA6"},
    };
    for (const auto& e : kNamed) {
        if (body == e.name) {
            out.append(e.text);
            return semi + 1;
        }
    }
    return i;
}

// Returns the tag name starting at s[pos] (just past '<' and optional '/').
std::string_view read_tag_name(std::string_view s, size_t pos) {
    size_t end = pos;
    while (end < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[end])) != 0 || s[end] == '-')) {
        ++end;
    }
    return s.substr(pos, end - pos);
}

// Skips past the closing tag </name ...> starting the search at `from`.
// Returns the index just past that tag, or s.size() if never closed.
size_t skip_raw_element(std::string_view s, size_t from, std::string_view name) {
    size_t i = from;
    while (i < s.size()) {
        size_t lt = s.find('<', i);
        if (lt == std::string_view::npos) return s.size();
        if (lt + 1 < s.size() && s[lt + 1] == '/') {
            std::string_view tag = read_tag_name(s, lt + 2);
            if (iequals(tag, name)) {
                size_t gt = s.find('>', lt);
                return gt == std::string_view::npos ? s.size() : gt + 1;
            }
        }
        i = lt + 1;
    }
    return s.size();
}

std::vector<std::string_view> split_ws_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        size_t start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

// Lowercases and strips surrounding ASCII punctuation so "The." hits "the".
std::string normalize_token(std::string_view tok) {
    size_t b = 0;
    size_t e = tok.size();
    while (b < e && std::isalnum(static_cast<unsigned char>(tok[b])) == 0 &&
           static_cast<unsigned char>(tok[b]) < 0x80) {
        ++b;
    }
    while (e > b && std::isalnum(static_cast<unsigned char>(tok[e - 1])) == 0 &&
           static_cast<unsigned char>(tok[e - 1]) < 0x80) {
        --e;
    }
    std::string out;
    out.reserve(e - b);
    for (size_t i = b; i < e; ++i) out.push_back(ascii_lower(tok[i]));
    return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Removes lines beginning with any of the given prefixes. Reports whether
// anything was removed.
bool strip_autogen_lines(const std::string& body, const std::vector<std::string>& prefixes,
                         std::string& out) {
    bool changed = false;
    out.clear();
    size_t i = 0;
    while (i <= body.size()) {
        size_t nl = body.find('\n', i);
        size_t end = (nl == std::string::npos) ? body.size() : nl;
        std::string_view line(body.data() + i, end - i);
        bool drop = false;
        for (const auto& p : prefixes) {
            if (line.substr(0, p.size()) == p) {
                drop = true;
                break;
            }
        }
        if (drop) {
            changed = true;
        } else {
            out.append(line);
            if (nl != std::string::npos) out.push_back('\n');
        }
        if (nl == std::string::npos) break;
        i = nl + 1;
    }
    if (changed && !out.empty() && out.back() == '\n' && body.back() != '\n') {
        // Dropping a final line must not leave a dangling newline.
        out.pop_back();
    }
    return changed;
}

}  // namespace

void QualityConfig::validate() const {
    auto ratio_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!ratio_ok(min_alpha_fraction) || !ratio_ok(html_visible_min_fraction)) {
        throw ConfigError("quality ratios must be within [0,1]");
    }
    if (xml_probe_chars == 0 || html_visible_min_chars == 0 || structured_min_chars == 0 ||
        structured_max_chars == 0) {
        throw ConfigError("quality character counts must be positive");
    }
    if (structured_min_chars > structured_max_chars) {
        throw ConfigError("structured_min_chars must not exceed structured_max_chars");
    }
}

void IssueConfig::validate() const {
    if (english_min_stopword_rate < 0.0 || english_min_stopword_rate > 1.0) {
        throw ConfigError("english_min_stopword_rate must be within [0,1]");
    }
}

const std::unordered_set<std::string>& builtin_stopwords() {
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> set;
        std::istringstream in{std::string(embedded::kStopwordsTxt)};
        std::string word;
        while (std::getline(in, word)) {
            if (!word.empty()) set.insert(word);
        }
        return set;
    }();
    return words;
}

double alphabetic_fraction(std::string_view content) {
    uint64_t letters = 0;
    uint64_t total = 0;
    size_t pos = 0;
    while (pos < content.size()) {
        char32_t cp = utf8::decode_at(content, pos);
        ++total;
        if (utf8::is_letter(cp)) ++letters;
    }
    if (total == 0) return 0.0;
    return static_cast<double>(letters) / static_cast<double>(total);
}

FilterVerdict rule_min_alpha(const Document& doc, const QualityConfig& cfg) {
    if (alphabetic_fraction(doc.content) < cfg.min_alpha_fraction) {
        return FilterVerdict::drop(reason::kLowAlpha);
    }
    return FilterVerdict::pass();
}

FilterVerdict rule_xml_header(const Document& doc, const QualityConfig& cfg) {
    if (doc.language.has_value() && *doc.language == tag_xslt()) {
        return FilterVerdict::pass();
    }
    static constexpr std::string_view kHeader = "<?xml version=";
    size_t byte_pos = doc.content.find(kHeader);
    if (byte_pos == std::string::npos) {
        return FilterVerdict::pass();
    }
    uint64_t char_pos = utf8::byte_to_scalar(doc.content, byte_pos);
    if (char_pos < cfg.xml_probe_chars) {
        return FilterVerdict::drop(reason::kXmlHeader);
    }
    return FilterVerdict::pass();
}

std::string extract_visible_text(std::string_view html) {
    std::string raw;
    raw.reserve(html.size() / 4);
    size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '<') {
            if (html.compare(i, 4, "<!--") == 0) {
                size_t end = html.find("-->", i + 4);
                i = (end == std::string_view::npos) ? html.size() : end + 3;
                continue;
            }
            size_t name_pos = i + 1;
            bool closing = name_pos < html.size() && html[name_pos] == '/';
            if (closing) ++name_pos;
            std::string_view name = read_tag_name(html, name_pos);
            size_t gt = html.find('>', i + 1);
            if (gt == std::string_view::npos) {
                break;  // unterminated tag: nothing after it is visible
            }
            bool self_closing = gt > i && html[gt - 1] == '/';
            i = gt + 1;
            if (!closing && !self_closing &&
                (iequals(name, "script") || iequals(name, "style"))) {
                i = skip_raw_element(html, i, name);
            }
            continue;
        }
        if (c == '&') {
            size_t next = decode_entity(html, i, raw);
            if (next != i) {
                i = next;
                continue;
            }
        }
        raw.push_back(c);
        ++i;
    }

    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_ascii_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

FilterVerdict rule_html_visible(const Document& doc, const QualityConfig& cfg) {
    std::string visible = extract_visible_text(doc.content);
    uint64_t visible_len = utf8::scalar_count(visible);
    uint64_t total_len = utf8::scalar_count(doc.content);
    bool long_enough = visible_len >= cfg.html_visible_min_chars;
    bool dense_enough =
        total_len > 0 && static_cast<double>(visible_len) / static_cast<double>(total_len) >=
                             cfg.html_visible_min_fraction;
    if (long_enough && dense_enough) {
        return FilterVerdict::pass();
    }
    return FilterVerdict::drop(reason::kHtmlLowVisible);
}

FilterVerdict rule_structured_size(const Document& doc, const QualityConfig& cfg) {
    uint64_t chars = utf8::scalar_count(doc.content);
    if (chars < cfg.structured_min_chars || chars > cfg.structured_max_chars) {
        return FilterVerdict::drop(reason::kStructuredSize);
    }
    return FilterVerdict::pass();
}

IssueFilterResult filter_issue(const Document& doc, const IssueConfig& cfg) {
    json thread;
    try {
        thread = json::parse(doc.content);
    } catch (const json::exception& e) {
        throw DataError("issue_format",
                        "document " + doc.id + ": content is not valid JSON: " + e.what());
    }
    if (!thread.is_array()) {
        throw DataError("issue_format",
                        "document " + doc.id + ": issue content must be a JSON array");
    }
    for (const auto& comment : thread) {
        if (!comment.is_object() || !comment.contains("author") ||
            !comment["author"].is_string() || !comment.contains("body") ||
            !comment["body"].is_string()) {
            throw DataError("issue_format",
                            "document " + doc.id +
                                ": each comment needs string fields 'author' and 'body'");
        }
    }

    bool changed = false;
    json kept = json::array();
    std::unordered_set<std::string> authors;
    for (auto& comment : thread) {
        const std::string author = comment["author"].get<std::string>();
        bool is_bot = false;
        for (const auto& suffix : cfg.bot_suffixes) {
            if (ends_with(author, suffix)) {
                is_bot = true;
                break;
            }
        }
        if (is_bot) {
            changed = true;
            continue;
        }
        authors.insert(author);
        std::string body = comment["body"].get<std::string>();
        std::string stripped;
        if (strip_autogen_lines(body, cfg.autogen_prefixes, stripped)) {
            comment["body"] = stripped;
            changed = true;
        }
        kept.push_back(std::move(comment));
    }

    const auto& stopwords = cfg.stopwords.empty() ? builtin_stopwords() : cfg.stopwords;
    uint64_t total_tokens = 0;
    uint64_t stopword_hits = 0;
    for (const auto& comment : kept) {
        const auto& body = comment["body"].get_ref<const std::string&>();
        for (std::string_view tok : split_ws_tokens(body)) {
            ++total_tokens;
            if (stopwords.count(normalize_token(tok)) > 0) ++stopword_hits;
        }
    }

    FilterVerdict verdict = FilterVerdict::pass();
    if (total_tokens >= cfg.english_min_tokens) {
        double rate = static_cast<double>(stopword_hits) / static_cast<double>(total_tokens);
        if (rate < cfg.english_min_stopword_rate) {
            verdict.merge(FilterVerdict::drop(reason::kNonEnglish));
        }
    }
    if (authors.size() < cfg.min_engaged_users) {
        verdict.merge(FilterVerdict::drop(reason::kLowEngagement));
    }

    IssueFilterResult result;
    result.verdict = std::move(verdict);
    if (changed && result.verdict.keep()) {
        result.filtered_content = kept.dump();
    }
    return result;
}

QualityResult apply_quality(const Document& doc, const QualityConfig& cfg,
                            const IssueConfig& issue_cfg) {
    QualityResult result;
    result.verdict = FilterVerdict::pass();
    switch (doc.source_kind) {
        case SourceKind::kCode: {
            result.verdict.merge(rule_min_alpha(doc, cfg));
            result.verdict.merge(rule_xml_header(doc, cfg));
            if (doc.language.has_value() && *doc.language == tag_html()) {
                result.verdict.merge(rule_html_visible(doc, cfg));
            }
            if (doc.language.has_value() &&
                (*doc.language == tag_json() || *doc.language == tag_yaml())) {
                result.verdict.merge(rule_structured_size(doc, cfg));
            }
            break;
        }
        case SourceKind::kIssue: {
            IssueFilterResult issue = filter_issue(doc, issue_cfg);
            result.verdict.merge(issue.verdict);
            result.filtered_content = std::move(issue.filtered_content);
            break;
        }
        case SourceKind::kNaturalLanguage:
            break;
    }
    return result;
}

}  // namespace corpusprep
