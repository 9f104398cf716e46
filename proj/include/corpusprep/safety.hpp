#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corpusprep/document.hpp"
#include "corpusprep/util.hpp"
#include "corpusprep/verdict.hpp"

namespace corpusprep {

struct HapConfig {
    std::vector<std::string> dictionary;  // lowercase keywords
    uint64_t threshold = 2;
    bool whole_token = true;  // bound matches by non-letter characters

    static HapConfig load_dictionary(const std::string& path);
    void validate() const;
};

// Case-insensitive occurrence count of dictionary keywords over the content.
uint64_t hap_count(std::string_view content, const HapConfig& cfg);

// Writes annotations["hap_count"].
void annotate_hap(Document& doc, const HapConfig& cfg);

// Drops when the (annotated or computed) count strictly exceeds the threshold.
FilterVerdict hap_filter(const Document& doc, const HapConfig& cfg);

enum class PiiKind { kEmail, kIpAddress, kKey, kName, kUsername, kPassword };

std::string_view to_string(PiiKind kind);

struct PiiSpan {
    PiiKind kind;
    uint64_t start = 0;  // scalar-value offset, inclusive
    uint64_t end = 0;    // scalar-value offset, exclusive
    std::string matched_text;
};

struct PiiOptions {
    // Issue text additionally yields @handle usernames and author-field names.
    bool issue_mode = false;
};

// Rule-based detectors; spans come back sorted by start and non-overlapping
// (overlaps resolved longest-match first, then earliest).
std::vector<PiiSpan> detect_pii(std::string_view content, const PiiOptions& opts = {});

struct RedactTokens {
    std::string email = "<EMAIL>";
    std::string key = "<KEY>";
    std::string password = "<PASSWORD>";
    std::string name = "<NAME>";  // covers name and username kinds
};

// Replaces spans right-to-left; IP addresses get synthetic replacements from
// documentation ranges, matching the address family of the original.
std::string redact_pii(std::string_view content, const std::vector<PiiSpan>& spans,
                       Rng& rng, const RedactTokens& tokens = {});

bool is_documentation_ipv4(std::string_view addr);
bool is_documentation_ipv6(std::string_view addr);

// Runs `command_template` with {file} pointing at the content written to a
// temporary file. Exit 0 → keep, exit 1 → drop(malware), anything else →
// ExternalToolError("scanner_unavailable").
FilterVerdict malware_scan_hook(const Document& doc, const std::string& command_template);

}  // namespace corpusprep
