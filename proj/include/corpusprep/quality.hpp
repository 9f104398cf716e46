#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "corpusprep/document.hpp"
#include "corpusprep/verdict.hpp"

namespace corpusprep {

struct QualityConfig {
    double min_alpha_fraction = 0.25;
    uint64_t xml_probe_chars = 100;
    double html_visible_min_fraction = 0.20;
    uint64_t html_visible_min_chars = 100;
    uint64_t structured_min_chars = 50;
    uint64_t structured_max_chars = 5000;

    void validate() const;
};

struct IssueConfig {
    std::vector<std::string> bot_suffixes = {"[bot]", "-bot"};
    std::vector<std::string> autogen_prefixes = {"This issue has been automatically"};
    uint64_t min_engaged_users = 2;
    uint64_t english_min_tokens = 20;
    double english_min_stopword_rate = 0.05;
    std::unordered_set<std::string> stopwords;  // empty → use the built-in list

    void validate() const;
};

// Built-in 100-word English stop-word list.
const std::unordered_set<std::string>& builtin_stopwords();

// Unicode letters / all scalar values; 0 for empty content.
double alphabetic_fraction(std::string_view content);

FilterVerdict rule_min_alpha(const Document& doc, const QualityConfig& cfg);
FilterVerdict rule_xml_header(const Document& doc, const QualityConfig& cfg);
FilterVerdict rule_html_visible(const Document& doc, const QualityConfig& cfg);
FilterVerdict rule_structured_size(const Document& doc, const QualityConfig& cfg);

// Text nodes outside script/style, tags stripped, entities decoded,
// whitespace runs collapsed to single spaces, ends trimmed.
std::string extract_visible_text(std::string_view html);

struct IssueFilterResult {
    FilterVerdict verdict;
    // Set when bot comments or auto-generated lines were removed.
    std::optional<std::string> filtered_content;
};

IssueFilterResult filter_issue(const Document& doc, const IssueConfig& cfg);

struct QualityResult {
    FilterVerdict verdict;
    std::optional<std::string> filtered_content;
};

QualityResult apply_quality(const Document& doc, const QualityConfig& cfg,
                            const IssueConfig& issue_cfg);

}  // namespace corpusprep
