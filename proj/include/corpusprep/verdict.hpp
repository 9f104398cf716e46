#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace corpusprep {

// Closed set of drop-reason codes. These strings appear verbatim in stage
// manifests and in the stats report.
namespace reason {
inline constexpr std::string_view kLangNotAllowed = "lang_not_allowed";
inline constexpr std::string_view kLicenseMissing = "license_missing";
inline constexpr std::string_view kLicenseNotPermissive = "license_not_permissive";
inline constexpr std::string_view kLowAlpha = "low_alpha";
inline constexpr std::string_view kXmlHeader = "xml_header";
inline constexpr std::string_view kHtmlLowVisible = "html_low_visible";
inline constexpr std::string_view kStructuredSize = "structured_size";
inline constexpr std::string_view kNonEnglish = "non_english";
inline constexpr std::string_view kLowEngagement = "low_engagement";
inline constexpr std::string_view kExactDup = "exact_dup";
inline constexpr std::string_view kFuzzyDup = "fuzzy_dup";
inline constexpr std::string_view kHapExceeded = "hap_exceeded";
inline constexpr std::string_view kMalware = "malware";

// Every code the pipeline may emit, for validation and docs.
const std::vector<std::string_view>& all_codes();
}  // namespace reason

// Keep/drop decision. keep == true exactly when reasons is empty.
struct FilterVerdict {
    std::vector<std::string> reasons;

    bool keep() const { return reasons.empty(); }

    static FilterVerdict pass() { return {}; }

    static FilterVerdict drop(std::string_view code) {
        FilterVerdict v;
        v.reasons.emplace_back(code);
        return v;
    }

    // Union of reason lists, preserving first-seen order.
    void merge(const FilterVerdict& other) {
        for (const auto& r : other.reasons) {
            bool present = false;
            for (const auto& mine : reasons) {
                if (mine == r) {
                    present = true;
                    break;
                }
            }
            if (!present) reasons.push_back(r);
        }
    }
};

}  // namespace corpusprep
