#include "corpusprep/safety.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <sys/wait.h>
#include <unistd.h>

#include "corpusprep/errors.hpp"
#include "corpusprep/utf8.hpp"

namespace corpusprep {

namespace {

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string ascii_lower_copy(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(char c) {
    return is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Decodes the scalar value ending at byte position `pos` (exclusive).
char32_t decode_before(std::string_view s, size_t pos) {
    size_t start = pos;
    while (start > 0 && (static_cast<unsigned char>(s[start - 1]) & 0xC0) == 0x80) {
        --start;
    }
    if (start > 0) --start;
    size_t cursor = start;
    return utf8::decode_at(s, cursor);
}

bool letter_before(std::string_view s, size_t pos) {
    if (pos == 0) return false;
    return utf8::is_letter(decode_before(s, pos));
}

bool letter_at(std::string_view s, size_t pos) {
    if (pos >= s.size()) return false;
    size_t cursor = pos;
    return utf8::is_letter(utf8::decode_at(s, cursor));
}

}  // namespace

HapConfig HapConfig::load_dictionary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open HAP dictionary " + path);
    }
    HapConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        cfg.dictionary.push_back(ascii_lower_copy(line));
    }
    return cfg;
}

void HapConfig::validate() const {
    if (dictionary.empty()) {
        throw ConfigError("HAP dictionary is empty; provide keywords or disable the stage");
    }
    for (const auto& word : dictionary) {
        if (word.empty()) {
            throw ConfigError("HAP dictionary contains an empty keyword");
        }
    }
}

uint64_t hap_count(std::string_view content, const HapConfig& cfg) {
    std::string lowered = ascii_lower_copy(content);
    uint64_t count = 0;
    for (const auto& keyword : cfg.dictionary) {
        if (keyword.empty()) continue;
        size_t pos = 0;
        while ((pos = lowered.find(keyword, pos)) != std::string::npos) {
            bool ok = true;
            if (cfg.whole_token) {
                ok = !letter_before(lowered, pos) && !letter_at(lowered, pos + keyword.size());
            }
            if (ok) {
                ++count;
                pos += keyword.size();  // non-overlapping per keyword
            } else {
                ++pos;
            }
        }
    }
    return count;
}

void annotate_hap(Document& doc, const HapConfig& cfg) {
    doc.annotations["hap_count"] = std::to_string(hap_count(doc.content, cfg));
}

namespace {

// Strict decimal parse; returns nullopt for anything else.
std::optional<uint64_t> parse_count(const std::string& s) {
    if (s.empty() || s.size() > 19) return std::nullopt;
    uint64_t value = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + static_cast<uint64_t>(c - '0');
    }
    return value;
}

}  // namespace

FilterVerdict hap_filter(const Document& doc, const HapConfig& cfg) {
    uint64_t count;
    auto it = doc.annotations.find("hap_count");
    std::optional<uint64_t> annotated =
        it != doc.annotations.end() ? parse_count(it->second) : std::nullopt;
    if (annotated) {
        count = *annotated;
    } else {
        count = hap_count(doc.content, cfg);
    }
    if (count > cfg.threshold) {
        return FilterVerdict::drop(reason::kHapExceeded);
    }
    return FilterVerdict::pass();
}

std::string_view to_string(PiiKind kind) {
    switch (kind) {
        case PiiKind::kEmail: return "email";
        case PiiKind::kIpAddress: return "ip_address";
        case PiiKind::kKey: return "key";
        case PiiKind::kName: return "name";
        case PiiKind::kUsername: return "username";
        case PiiKind::kPassword: return "password";
    }
    return "unknown";
}

namespace {

struct ByteSpan {
    PiiKind kind;
    size_t start = 0;
    size_t end = 0;
};

bool is_email_local_char(char c) {
    return is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}

bool is_email_domain_char(char c) { return is_ascii_alnum(c) || c == '.' || c == '-'; }

bool valid_email_domain(std::string_view domain) {
    if (domain.empty()) return false;
    size_t label_count = 0;
    size_t start = 0;
    std::string_view last_label;
    while (start <= domain.size()) {
        size_t dot = domain.find('.', start);
        size_t end = (dot == std::string_view::npos) ? domain.size() : dot;
        std::string_view label = domain.substr(start, end - start);
        if (label.empty() || label.front() == '-' || label.back() == '-') return false;
        last_label = label;
        ++label_count;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    if (label_count < 2 || last_label.size() < 2) return false;
    for (char c : last_label) {
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return false;
    }
    return true;
}

void detect_emails(std::string_view s, std::vector<ByteSpan>& out) {
    size_t pos = 0;
    while ((pos = s.find('@', pos)) != std::string_view::npos) {
        size_t local_start = pos;
        while (local_start > 0 && is_email_local_char(s[local_start - 1])) {
            --local_start;
        }
        size_t domain_end = pos + 1;
        while (domain_end < s.size() && is_email_domain_char(s[domain_end])) {
            ++domain_end;
        }
        std::string_view domain = s.substr(pos + 1, domain_end - pos - 1);
        while (!domain.empty() && (domain.back() == '.' || domain.back() == '-')) {
            domain.remove_suffix(1);
            --domain_end;
        }
        if (local_start < pos && valid_email_domain(domain)) {
            out.push_back({PiiKind::kEmail, local_start, domain_end});
            pos = domain_end;
        } else {
            ++pos;
        }
    }
}

void detect_ipv4(std::string_view s, std::vector<ByteSpan>& out) {
    size_t i = 0;
    while (i < s.size()) {
        if (!is_ascii_digit(s[i]) ||
            (i > 0 && (is_ascii_alnum(s[i - 1]) || s[i - 1] == '.'))) {
            ++i;
            continue;
        }
        size_t p = i;
        bool ok = true;
        for (int octet = 0; octet < 4 && ok; ++octet) {
            if (octet > 0) {
                if (p >= s.size() || s[p] != '.') {
                    ok = false;
                    break;
                }
                ++p;
            }
            size_t digits = 0;
            unsigned value = 0;
            while (p < s.size() && is_ascii_digit(s[p]) && digits < 4) {
                value = value * 10 + static_cast<unsigned>(s[p] - '0');
                ++digits;
                ++p;
            }
            if (digits == 0 || digits > 3 || value > 255) ok = false;
        }
        if (ok && p < s.size() && (is_ascii_alnum(s[p]) || s[p] == '.')) {
            ok = false;
        }
        if (ok) {
            out.push_back({PiiKind::kIpAddress, i, p});
            i = p;
        } else {
            // Skip this digit run; a match can never start mid-run.
            while (i < s.size() && is_ascii_digit(s[i])) ++i;
        }
    }
}

bool valid_ipv6_groups(std::string_view part, size_t& group_count) {
    group_count = 0;
    if (part.empty()) return true;
    size_t start = 0;
    while (start <= part.size()) {
        size_t colon = part.find(':', start);
        size_t end = (colon == std::string_view::npos) ? part.size() : colon;
        std::string_view group = part.substr(start, end - start);
        if (group.empty() || group.size() > 4) return false;
        for (char c : group) {
            if (!is_hex_digit(c)) return false;
        }
        ++group_count;
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    return true;
}

bool parse_ipv6(std::string_view s) {
    if (std::count(s.begin(), s.end(), ':') < 2) return false;
    if (std::none_of(s.begin(), s.end(),
                     [](char c) { return is_ascii_digit(c); })) {
        return false;  // "ab::cd" is more likely a scope operator than an address
    }
    size_t gap = s.find("::");
    if (gap != std::string_view::npos) {
        if (s.find("::", gap + 1) != std::string_view::npos) return false;
        size_t left_groups = 0;
        size_t right_groups = 0;
        if (!valid_ipv6_groups(s.substr(0, gap), left_groups)) return false;
        if (!valid_ipv6_groups(s.substr(gap + 2), right_groups)) return false;
        return left_groups + right_groups <= 7;
    }
    if (s.front() == ':' || s.back() == ':') return false;
    size_t groups = 0;
    if (!valid_ipv6_groups(s, groups)) return false;
    return groups == 8;
}

void detect_ipv6(std::string_view s, std::vector<ByteSpan>& out) {
    size_t i = 0;
    while (i < s.size()) {
        if (!is_hex_digit(s[i]) && s[i] != ':') {
            ++i;
            continue;
        }
        size_t run_start = i;
        while (i < s.size() && (is_hex_digit(s[i]) || s[i] == ':')) ++i;
        if (run_start > 0 && is_ascii_alnum(s[run_start - 1])) continue;
        if (i < s.size() && is_ascii_alnum(s[i])) continue;

        // Trim leading colons down to at most the "::" form.
        size_t begin = run_start;
        size_t leading = 0;
        while (begin + leading < i && s[begin + leading] == ':') ++leading;
        if (leading != 2) begin += (leading > 2) ? leading - 2 : leading;
        size_t end = i;
        while (end > begin) {
            std::string_view candidate = s.substr(begin, end - begin);
            if (parse_ipv6(candidate)) {
                out.push_back({PiiKind::kIpAddress, begin, end});
                break;
            }
            if (candidate.back() == ':') {
                --end;
            } else {
                break;
            }
        }
    }
}

constexpr std::string_view kKeyPrefixes[] = {
    "AKIA",     "ghp_",       "gho_",     "ghu_",     "ghs_",     "ghr_",
    "github_pat_", "xoxb-",   "xoxp-",    "xoxa-",    "xoxs-",    "xoxr-",
    "AIza",     "sk_live_",   "pk_live_", "sk_test_", "glpat-",
};
constexpr size_t kMinKeyLength = 20;

bool is_key_char(char c) { return is_ascii_alnum(c) || c == '_' || c == '-'; }

void detect_prefixed_keys(std::string_view s, std::vector<ByteSpan>& out) {
    size_t i = 0;
    while (i < s.size()) {
        if (!is_key_char(s[i]) || (i > 0 && is_key_char(s[i - 1]))) {
            ++i;
            continue;
        }
        size_t end = i;
        while (end < s.size() && is_key_char(s[end])) ++end;
        std::string_view token = s.substr(i, end - i);
        if (token.size() >= kMinKeyLength) {
            for (std::string_view prefix : kKeyPrefixes) {
                if (token.substr(0, prefix.size()) == prefix) {
                    out.push_back({PiiKind::kKey, i, end});
                    break;
                }
            }
        }
        i = end;
    }
}

void detect_pem_blocks(std::string_view s, std::vector<ByteSpan>& out) {
    constexpr std::string_view kBegin = "-----BEGIN ";
    constexpr std::string_view kEnd = "-----END ";
    constexpr std::string_view kTail = "PRIVATE KEY-----";
    size_t pos = 0;
    while ((pos = s.find(kBegin, pos)) != std::string_view::npos) {
        size_t header_tail = s.find(kTail, pos + kBegin.size());
        if (header_tail == std::string_view::npos ||
            header_tail > pos + kBegin.size() + 24) {
            ++pos;
            continue;
        }
        size_t end_marker = s.find(kEnd, header_tail + kTail.size());
        if (end_marker == std::string_view::npos) {
            ++pos;
            continue;
        }
        size_t end_tail = s.find(kTail, end_marker + kEnd.size());
        if (end_tail == std::string_view::npos ||
            end_tail > end_marker + kEnd.size() + 24) {
            ++pos;
            continue;
        }
        out.push_back({PiiKind::kKey, pos, end_tail + kTail.size()});
        pos = end_tail + kTail.size();
    }
}

bool is_ident_char(char c) { return is_ascii_alnum(c) || c == '_'; }

bool password_like(std::string_view ident_lower) {
    return ident_lower.find("password") != std::string_view::npos ||
           ident_lower.find("passwd") != std::string_view::npos ||
           ident_lower.find("pwd") != std::string_view::npos;
}

bool username_like(std::string_view ident_lower) {
    return ident_lower == "user" || ident_lower == "login" || ident_lower == "uname" ||
           ident_lower.find("username") != std::string_view::npos ||
           ident_lower.find("user_name") != std::string_view::npos;
}

// Parses `<ident> ["|'] (= | : | =>) value` and appends a span over the value.
void detect_assignments(std::string_view s, std::vector<ByteSpan>& out) {
    size_t i = 0;
    while (i < s.size()) {
        if (!is_ident_char(s[i]) || (i > 0 && is_ident_char(s[i - 1]))) {
            ++i;
            continue;
        }
        size_t ident_end = i;
        while (ident_end < s.size() && is_ident_char(s[ident_end])) ++ident_end;
        std::string ident = ascii_lower_copy(s.substr(i, ident_end - i));
        bool pw = password_like(ident);
        bool un = !pw && username_like(ident);
        i = ident_end;
        if (!pw && !un) continue;

        size_t p = ident_end;
        if (p < s.size() && (s[p] == '"' || s[p] == '\'')) ++p;  // quoted JSON key
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
        if (p >= s.size()) continue;
        if (s[p] == ':' && (p + 1 >= s.size() || s[p + 1] != ':')) {
            ++p;
        } else if (s[p] == '=' && p + 1 < s.size() && s[p + 1] == '>') {
            p += 2;
        } else if (s[p] == '=' && (p + 1 >= s.size() || s[p + 1] != '=')) {
            ++p;
        } else {
            continue;
        }
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
        if (p >= s.size()) continue;

        size_t value_start;
        size_t value_end;
        if (s[p] == '"' || s[p] == '\'') {
            char quote = s[p];
            size_t close = s.find(quote, p + 1);
            if (close == std::string_view::npos) continue;
            value_start = p + 1;
            value_end = close;
        } else {
            value_start = p;
            value_end = p;
            while (value_end < s.size()) {
                char c = s[value_end];
                if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',' ||
                    c == ';' || c == ')' || c == '}' || c == ']' || c == '(' ||
                    c == '{' || c == '[' || c == '"' || c == '\'' || c == '`') {
                    break;
                }
                ++value_end;
            }
        }
        // Placeholder-shaped values (<PASSWORD>, <your-token-here>) are not
        // credentials; skipping them also keeps already-redacted text clean
        // on a second detection pass.
        if (value_end - value_start >= 2 && s[value_start] == '<' &&
            s[value_end - 1] == '>') {
            continue;
        }
        if (value_end > value_start) {
            out.push_back({pw ? PiiKind::kPassword : PiiKind::kUsername, value_start,
                           value_end});
        }
    }
}

void detect_handles(std::string_view s, std::vector<ByteSpan>& out) {
    size_t pos = 0;
    while ((pos = s.find('@', pos)) != std::string_view::npos) {
        if (pos > 0 && (is_ascii_alnum(s[pos - 1]) || s[pos - 1] == '.' ||
                        s[pos - 1] == '_')) {
            ++pos;
            continue;
        }
        size_t end = pos + 1;
        while (end < s.size() && (is_ascii_alnum(s[end]) || s[end] == '-')) ++end;
        if (end - pos >= 3) {  // '@' plus at least two handle characters
            out.push_back({PiiKind::kUsername, pos, end});
        }
        pos = end > pos + 1 ? end : pos + 1;
    }
}

void detect_author_fields(std::string_view s, std::vector<ByteSpan>& out) {
    constexpr std::string_view kField = "\"author\"";
    size_t pos = 0;
    while ((pos = s.find(kField, pos)) != std::string_view::npos) {
        size_t p = pos + kField.size();
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
        if (p >= s.size() || s[p] != ':') {
            pos += kField.size();
            continue;
        }
        ++p;
        while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
        if (p >= s.size() || s[p] != '"') {
            pos += kField.size();
            continue;
        }
        size_t close = s.find('"', p + 1);
        if (close == std::string_view::npos) break;
        if (close > p + 1) {
            out.push_back({PiiKind::kName, p + 1, close});
        }
        pos = close + 1;
    }
}

}  // namespace

std::vector<PiiSpan> detect_pii(std::string_view content, const PiiOptions& opts) {
    std::vector<ByteSpan> raw;
    detect_emails(content, raw);
    detect_ipv4(content, raw);
    detect_ipv6(content, raw);
    detect_prefixed_keys(content, raw);
    detect_pem_blocks(content, raw);
    detect_assignments(content, raw);
    if (opts.issue_mode) {
        detect_handles(content, raw);
        detect_author_fields(content, raw);
    }

    // Longest match wins, then earliest, then kind order for full determinism.
    std::sort(raw.begin(), raw.end(), [](const ByteSpan& a, const ByteSpan& b) {
        size_t la = a.end - a.start;
        size_t lb = b.end - b.start;
        if (la != lb) return la > lb;
        if (a.start != b.start) return a.start < b.start;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    std::vector<ByteSpan> accepted;
    for (const ByteSpan& span : raw) {
        bool overlaps = false;
        for (const ByteSpan& kept : accepted) {
            if (span.start < kept.end && kept.start < span.end) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) accepted.push_back(span);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const ByteSpan& a, const ByteSpan& b) { return a.start < b.start; });

    std::vector<PiiSpan> result;
    result.reserve(accepted.size());
    for (const ByteSpan& span : accepted) {
        PiiSpan out;
        out.kind = span.kind;
        out.start = utf8::byte_to_scalar(content, span.start);
        out.end = utf8::byte_to_scalar(content, span.end);
        out.matched_text = std::string(content.substr(span.start, span.end - span.start));
        result.push_back(std::move(out));
    }
    for (size_t i = 1; i < result.size(); ++i) {
        if (result[i].start < result[i - 1].end) {
            throw DataError("span_conflict", "detector produced overlapping spans");
        }
    }
    return result;
}

bool is_documentation_ipv4(std::string_view addr) {
    return addr.starts_with("192.0.2.") || addr.starts_with("198.51.100.") ||
           addr.starts_with("203.0.113.");
}

bool is_documentation_ipv6(std::string_view addr) {
    std::string lower = ascii_lower_copy(addr);
    return lower.starts_with("2001:db8:") || lower.starts_with("2001:0db8:") ||
           lower == "2001:db8";
}

namespace {

std::string synthetic_ipv4(Rng& rng) {
    static constexpr std::string_view kSubnets[] = {"192.0.2.", "198.51.100.",
                                                    "203.0.113."};
    uint64_t subnet = rng.bounded(3);
    uint64_t host = rng.bounded(256);
    return std::string(kSubnets[subnet]) + std::to_string(host);
}

std::string synthetic_ipv6(Rng& rng) {
    uint64_t g1 = rng.bounded(0x10000);
    uint64_t g2 = rng.bounded(0x10000);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "2001:db8::%llx:%llx",
                  static_cast<unsigned long long>(g1),
                  static_cast<unsigned long long>(g2));
    return std::string(buf);
}

}  // namespace

std::string redact_pii(std::string_view content, const std::vector<PiiSpan>& spans,
                       Rng& rng, const RedactTokens& tokens) {
    uint64_t total_scalars = utf8::scalar_count(content);
    for (size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].start >= spans[i].end || spans[i].end > total_scalars) {
            throw DataError("span_conflict",
                            "span " + std::to_string(i) + " is out of range");
        }
        if (i > 0 && spans[i].start < spans[i - 1].end) {
            throw DataError("span_conflict",
                            "span " + std::to_string(i) + " overlaps its predecessor");
        }
    }

    std::string result(content);
    for (size_t i = spans.size(); i-- > 0;) {
        const PiiSpan& span = spans[i];
        size_t start_b = utf8::scalar_to_byte(content, span.start);
        size_t end_b = utf8::scalar_to_byte(content, span.end);
        std::string replacement;
        switch (span.kind) {
            case PiiKind::kEmail: replacement = tokens.email; break;
            case PiiKind::kKey: replacement = tokens.key; break;
            case PiiKind::kPassword: replacement = tokens.password; break;
            case PiiKind::kName:
            case PiiKind::kUsername: replacement = tokens.name; break;
            case PiiKind::kIpAddress: {
                bool v6 = span.matched_text.find(':') != std::string::npos;
                replacement = v6 ? synthetic_ipv6(rng) : synthetic_ipv4(rng);
                break;
            }
        }
        result.replace(start_b, end_b - start_b, replacement);
    }
    return result;
}

FilterVerdict malware_scan_hook(const Document& doc, const std::string& command_template) {
    static std::atomic<uint64_t> sequence{0};
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() /
                   ("corpusprep_scan_" + std::to_string(::getpid()) + "_" +
                    std::to_string(sequence.fetch_add(1)) + ".bin");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw ExternalToolError("scanner_unavailable",
                                    "cannot write temporary scan file " + tmp.string());
        }
        out.write(doc.content.data(), static_cast<std::streamsize>(doc.content.size()));
    }

    std::string command = command_template;
    const std::string placeholder = "{file}";
    size_t pos = 0;
    while ((pos = command.find(placeholder, pos)) != std::string::npos) {
        command.replace(pos, placeholder.size(), tmp.string());
        pos += tmp.string().size();
    }

    int status = std::system(command.c_str());
    std::error_code ec;
    fs::remove(tmp, ec);

    if (status == -1 || !WIFEXITED(status)) {
        throw ExternalToolError("scanner_unavailable",
                                "scanner process failed to run: " + command);
    }
    int exit_code = WEXITSTATUS(status);
    if (exit_code == 0) {
        return FilterVerdict::pass();
    }
    if (exit_code == 1) {
        return FilterVerdict::drop(reason::kMalware);
    }
    throw ExternalToolError("scanner_unavailable",
                            "scanner exited with status " + std::to_string(exit_code));
}

}  // namespace corpusprep
