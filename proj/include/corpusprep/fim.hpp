#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "corpusprep/document.hpp"
#include "corpusprep/util.hpp"

namespace corpusprep {

enum class FimMode { kClm, kPsm, kSpm };

std::string_view to_string(FimMode mode);
FimMode fim_mode_from_string(std::string_view s);

struct FimTokens {
    std::string prefix_tok = "<fim_prefix>";
    std::string suffix_tok = "<fim_suffix>";
    std::string middle_tok = "<fim_middle>";
};

struct FimConfig {
    double alpha = 0.5;         // probability a sample stays CLM
    double psm_fraction = 0.5;  // PSM share among FIM samples
    FimTokens tokens;
    uint64_t min_doc_chars = 10;
    // Serialize SPM as suffix_tok‖suffix‖prefix_tok‖prefix‖middle_tok‖middle
    // instead of the joined prefix_tok‖suffix_tok header form.
    bool spm_pure_layout = false;

    void validate() const;
};

struct FimSample {
    std::string doc_id;
    FimMode mode = FimMode::kClm;
    std::string prefix;  // for CLM the whole content rides here
    std::string middle;
    std::string suffix;
    std::string serialized;
};

struct SplitParts {
    std::string prefix;
    std::string middle;
    std::string suffix;
};

// Two cut points drawn uniformly without replacement from the scalar-value
// boundaries 0..len, sorted. Throws DataError("fim_too_short") below
// cfg.min_doc_chars.
SplitParts split_document(std::string_view content, Rng& rng, const FimConfig& cfg);

std::string serialize_fim(FimMode mode, std::string_view prefix, std::string_view middle,
                          std::string_view suffix, const FimConfig& cfg);

struct ParsedFim {
    FimMode mode = FimMode::kClm;
    std::string prefix;
    std::string middle;
    std::string suffix;
};

// Inverse of serialize_fim. Text without any control token parses as CLM
// with everything in `prefix`. In the default SPM layout prefix and middle
// are fused in the serialization, so SPM parses with an empty prefix and the
// fused text in `middle`; serialize_fim(parse_fim(x)) == x always holds.
ParsedFim parse_fim(std::string_view serialized, const FimConfig& cfg);

enum class FimBuildNote { kNone, kTooShort, kTokenCollision };

struct FimBuildResult {
    FimSample sample;
    FimBuildNote note = FimBuildNote::kNone;
};

// Bernoulli mixing: P(CLM) = alpha; FIM samples choose PSM with
// psm_fraction. Documents containing a control token are pinned to CLM.
FimBuildResult build_sample(const Document& doc, const FimConfig& cfg, Rng& rng);

// Convenience wrapper seeding the rng from (pipeline_seed, doc.id) so
// per-document outcomes are order-independent.
FimBuildResult build_sample(const Document& doc, const FimConfig& cfg,
                            uint64_t pipeline_seed);

}  // namespace corpusprep
