#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corpusprep/document.hpp"
#include "corpusprep/record_io.hpp"

namespace corpusprep {

enum class TokenCountMode { kByteEstimate, kWhitespace, kPlugin };

std::string_view to_string(TokenCountMode mode);
TokenCountMode token_count_mode_from_string(std::string_view s);

struct TokenCounter {
    TokenCountMode mode = TokenCountMode::kByteEstimate;
    std::string plugin_command;  // reads text on stdin, writes a decimal count

    void validate() const;
};

uint64_t count_tokens(std::string_view content, const TokenCounter& counter);

struct MixtureComponent {
    std::string name;
    double weight = 0.0;
    std::string source;  // JSONL path, or a pipeline-bound placeholder
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    uint64_t token_budget = 0;
    uint64_t seed = 0;

    void validate() const;
};

struct PhaseTarget {
    std::string name;
    uint64_t target_tokens = 0;
};

// Largest-remainder apportionment; targets sum exactly to token_budget.
std::vector<PhaseTarget> plan_phase(const MixtureSpec& spec);

class DocumentSource {
public:
    virtual ~DocumentSource() = default;
    virtual std::optional<Document> next() = 0;
    virtual void rewind() = 0;
};

class FileDocumentSource final : public DocumentSource {
public:
    explicit FileDocumentSource(std::string path);
    std::optional<Document> next() override;
    void rewind() override;

private:
    std::string path_;
    std::unique_ptr<RecordReader> reader_;
};

class VectorDocumentSource final : public DocumentSource {
public:
    explicit VectorDocumentSource(std::vector<Document> docs)
        : docs_(std::move(docs)) {}
    std::optional<Document> next() override;
    void rewind() override { cursor_ = 0; }

private:
    std::vector<Document> docs_;
    size_t cursor_ = 0;
};

struct MixtureComponentStats {
    std::string name;
    uint64_t docs = 0;
    uint64_t tokens = 0;
    uint64_t target_tokens = 0;
    bool exhausted = false;
};

struct MixtureStats {
    std::vector<MixtureComponentStats> components;
    uint64_t total_docs = 0;
    uint64_t total_tokens = 0;
    uint64_t max_doc_tokens = 0;
};

// Deterministic deficit-scheduler interleaving. Draws from the component
// whose token share lags its weight the most; stops a component at its
// target; never exceeds the global budget. `repeat` cycles exhausted
// sources instead of marking them done.
MixtureStats sample_stream(const MixtureSpec& spec, const TokenCounter& counter,
                           std::vector<std::unique_ptr<DocumentSource>>& sources,
                           const std::function<void(const Document&)>& sink,
                           bool repeat = false);

}  // namespace corpusprep
