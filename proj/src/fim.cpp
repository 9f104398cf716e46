#include "corpusprep/fim.hpp"

#include <algorithm>

#include "corpusprep/errors.hpp"
#include "corpusprep/utf8.hpp"

namespace corpusprep {

std::string_view to_string(FimMode mode) {
    switch (mode) {
        case FimMode::kClm: return "clm";
        case FimMode::kPsm: return "psm";
        case FimMode::kSpm: return "spm";
    }
    return "clm";
}

FimMode fim_mode_from_string(std::string_view s) {
    if (s == "clm") return FimMode::kClm;
    if (s == "psm") return FimMode::kPsm;
    if (s == "spm") return FimMode::kSpm;
    throw DataError("fim_malformed", "unknown FIM mode '" + std::string(s) + "'");
}

void FimConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ConfigError("fim alpha must be within [0,1]");
    }
    if (psm_fraction < 0.0 || psm_fraction > 1.0) {
        throw ConfigError("fim psm_fraction must be within [0,1]");
    }
    const std::string* toks[3] = {&tokens.prefix_tok, &tokens.suffix_tok,
                                  &tokens.middle_tok};
    for (const auto* t : toks) {
        if (t->empty()) {
            throw ConfigError("fim control tokens must be non-empty");
        }
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i != j && toks[i]->find(*toks[j]) != std::string::npos) {
                throw ConfigError(
                    "fim control tokens must be distinct and must not contain one "
                    "another: '" +
                    *toks[i] + "' vs '" + *toks[j] + "'");
            }
        }
    }
    if (min_doc_chars == 0) {
        throw ConfigError("fim min_doc_chars must be positive");
    }
}

SplitParts split_document(std::string_view content, Rng& rng, const FimConfig& cfg) {
    uint64_t len = utf8::scalar_count(content);
    if (len < cfg.min_doc_chars) {
        throw DataError("fim_too_short", "content has " + std::to_string(len) +
                                             " characters, need at least " +
                                             std::to_string(cfg.min_doc_chars));
    }
    // Without replacement over the len+1 boundaries.
    uint64_t c1 = rng.bounded(len + 1);
    uint64_t c2 = rng.bounded(len);
    if (c2 >= c1) ++c2;
    uint64_t lo = std::min(c1, c2);
    uint64_t hi = std::max(c1, c2);

    size_t lo_b = utf8::scalar_to_byte(content, lo);
    size_t hi_b = utf8::scalar_to_byte(content, hi);
    SplitParts parts;
    parts.prefix = std::string(content.substr(0, lo_b));
    parts.middle = std::string(content.substr(lo_b, hi_b - lo_b));
    parts.suffix = std::string(content.substr(hi_b));
    return parts;
}

std::string serialize_fim(FimMode mode, std::string_view prefix, std::string_view middle,
                          std::string_view suffix, const FimConfig& cfg) {
    const FimTokens& t = cfg.tokens;
    std::string out;
    out.reserve(prefix.size() + middle.size() + suffix.size() + t.prefix_tok.size() +
                t.suffix_tok.size() + t.middle_tok.size());
    switch (mode) {
        case FimMode::kClm:
            out.append(prefix);
            out.append(middle);
            out.append(suffix);
            break;
        case FimMode::kPsm:
            out.append(t.prefix_tok);
            out.append(prefix);
            out.append(t.suffix_tok);
            out.append(suffix);
            out.append(t.middle_tok);
            out.append(middle);
            break;
        case FimMode::kSpm:
            if (cfg.spm_pure_layout) {
                out.append(t.suffix_tok);
                out.append(suffix);
                out.append(t.prefix_tok);
                out.append(prefix);
                out.append(t.middle_tok);
                out.append(middle);
            } else {
                out.append(t.prefix_tok);
                out.append(t.suffix_tok);
                out.append(suffix);
                out.append(t.middle_tok);
                out.append(prefix);
                out.append(middle);
            }
            break;
    }
    return out;
}

namespace {

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    size_t count = 0;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

[[noreturn]] void malformed(const std::string& why) {
    throw DataError("fim_malformed", why);
}

}  // namespace

ParsedFim parse_fim(std::string_view serialized, const FimConfig& cfg) {
    const FimTokens& t = cfg.tokens;
    size_t n_prefix = count_occurrences(serialized, t.prefix_tok);
    size_t n_suffix = count_occurrences(serialized, t.suffix_tok);
    size_t n_middle = count_occurrences(serialized, t.middle_tok);
    if (n_prefix == 0 && n_suffix == 0 && n_middle == 0) {
        ParsedFim parsed;
        parsed.mode = FimMode::kClm;
        parsed.prefix = std::string(serialized);
        return parsed;
    }
    if (n_prefix != 1 || n_suffix != 1 || n_middle != 1) {
        malformed("expected exactly one of each control token, found prefix=" +
                  std::to_string(n_prefix) + " suffix=" + std::to_string(n_suffix) +
                  " middle=" + std::to_string(n_middle));
    }
    size_t p_pos = serialized.find(t.prefix_tok);
    size_t s_pos = serialized.find(t.suffix_tok);
    size_t m_pos = serialized.find(t.middle_tok);

    ParsedFim parsed;
    if (cfg.spm_pure_layout && s_pos == 0) {
        // suffix_tok ‖ suffix ‖ prefix_tok ‖ prefix ‖ middle_tok ‖ middle
        if (!(s_pos < p_pos && p_pos < m_pos)) {
            malformed("control tokens out of order for the pure SPM layout");
        }
        parsed.mode = FimMode::kSpm;
        parsed.suffix = std::string(
            serialized.substr(t.suffix_tok.size(), p_pos - t.suffix_tok.size()));
        parsed.prefix = std::string(
            serialized.substr(p_pos + t.prefix_tok.size(),
                              m_pos - p_pos - t.prefix_tok.size()));
        parsed.middle = std::string(serialized.substr(m_pos + t.middle_tok.size()));
        return parsed;
    }
    if (p_pos != 0) {
        malformed("serialized sample must begin with a control token");
    }
    if (!(p_pos < s_pos && s_pos < m_pos)) {
        malformed("control tokens out of order");
    }
    if (s_pos == t.prefix_tok.size() && !cfg.spm_pure_layout) {
        // Joined header: prefix and middle are fused after middle_tok, so the
        // parse carries an empty prefix.
        parsed.mode = FimMode::kSpm;
        parsed.suffix = std::string(serialized.substr(
            s_pos + t.suffix_tok.size(), m_pos - s_pos - t.suffix_tok.size()));
        parsed.middle = std::string(serialized.substr(m_pos + t.middle_tok.size()));
        return parsed;
    }
    parsed.mode = FimMode::kPsm;
    parsed.prefix = std::string(serialized.substr(t.prefix_tok.size(),
                                                  s_pos - t.prefix_tok.size()));
    parsed.suffix = std::string(serialized.substr(s_pos + t.suffix_tok.size(),
                                                  m_pos - s_pos - t.suffix_tok.size()));
    parsed.middle = std::string(serialized.substr(m_pos + t.middle_tok.size()));
    return parsed;
}

namespace {

bool contains_control_token(std::string_view content, const FimTokens& t) {
    return content.find(t.prefix_tok) != std::string_view::npos ||
           content.find(t.suffix_tok) != std::string_view::npos ||
           content.find(t.middle_tok) != std::string_view::npos;
}

FimSample clm_sample(const Document& doc) {
    FimSample sample;
    sample.doc_id = doc.id;
    sample.mode = FimMode::kClm;
    sample.prefix = doc.content;
    sample.serialized = doc.content;
    return sample;
}

}  // namespace

FimBuildResult build_sample(const Document& doc, const FimConfig& cfg, Rng& rng) {
    FimBuildResult result;
    if (contains_control_token(doc.content, cfg.tokens)) {
        result.sample = clm_sample(doc);
        result.note = FimBuildNote::kTokenCollision;
        return result;
    }
    if (rng.unit() < cfg.alpha) {
        result.sample = clm_sample(doc);
        return result;
    }
    bool psm = rng.unit() < cfg.psm_fraction;
    SplitParts parts;
    try {
        parts = split_document(doc.content, rng, cfg);
    } catch (const DataError& e) {
        if (std::string_view(e.code()) == "fim_too_short") {
            result.sample = clm_sample(doc);
            result.note = FimBuildNote::kTooShort;
            return result;
        }
        throw;
    }
    FimSample& sample = result.sample;
    sample.doc_id = doc.id;
    sample.mode = psm ? FimMode::kPsm : FimMode::kSpm;
    // In the joined-header layout a PSM sample with an empty prefix
    // serializes to the same string as the SPM sample of the same parts;
    // label it SPM so modes survive a parse round-trip.
    if (sample.mode == FimMode::kPsm && parts.prefix.empty() && !cfg.spm_pure_layout) {
        sample.mode = FimMode::kSpm;
    }
    sample.prefix = std::move(parts.prefix);
    sample.middle = std::move(parts.middle);
    sample.suffix = std::move(parts.suffix);
    sample.serialized =
        serialize_fim(sample.mode, sample.prefix, sample.middle, sample.suffix, cfg);
    return result;
}

FimBuildResult build_sample(const Document& doc, const FimConfig& cfg,
                            uint64_t pipeline_seed) {
    Rng rng(per_doc_seed(pipeline_seed, doc.id));
    return build_sample(doc, cfg, rng);
}

}  // namespace corpusprep
