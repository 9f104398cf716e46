#include "corpusprep/mixture.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <sys/wait.h>
#include <unistd.h>

#include "corpusprep/errors.hpp"

namespace corpusprep {

std::string_view to_string(TokenCountMode mode) {
    switch (mode) {
        case TokenCountMode::kByteEstimate: return "byte_estimate";
        case TokenCountMode::kWhitespace: return "whitespace";
        case TokenCountMode::kPlugin: return "plugin";
    }
    return "byte_estimate";
}

TokenCountMode token_count_mode_from_string(std::string_view s) {
    if (s == "byte_estimate") return TokenCountMode::kByteEstimate;
    if (s == "whitespace") return TokenCountMode::kWhitespace;
    if (s == "plugin") return TokenCountMode::kPlugin;
    throw ConfigError("unknown token counter mode '" + std::string(s) + "'");
}

void TokenCounter::validate() const {
    if (mode == TokenCountMode::kPlugin && plugin_command.empty()) {
        throw ConfigError("plugin token counter requires a command");
    }
}

namespace {

uint64_t whitespace_token_count(std::string_view content) {
    uint64_t count = 0;
    bool in_token = false;
    for (char c : content) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
                  c == '\v';
        if (ws) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

uint64_t plugin_token_count(std::string_view content, const std::string& command) {
    static std::atomic<uint64_t> sequence{0};
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() /
                   ("corpusprep_tok_" + std::to_string(::getpid()) + "_" +
                    std::to_string(sequence.fetch_add(1)) + ".txt");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw ExternalToolError("tokenizer_unavailable",
                                    "cannot write temporary file " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::string full = command + " < " + tmp.string();
    FILE* pipe = popen(full.c_str(), "r");
    if (pipe == nullptr) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw ExternalToolError("tokenizer_unavailable",
                                "cannot launch tokenizer: " + command);
    }
    std::string output;
    char buf[256];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) {
        output.append(buf, n);
    }
    int status = pclose(pipe);
    std::error_code ec;
    fs::remove(tmp, ec);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw ExternalToolError("tokenizer_unavailable",
                                "tokenizer exited abnormally: " + command);
    }
    size_t start = output.find_first_not_of(" \t\r\n");
    if (start == std::string::npos) {
        throw ExternalToolError("tokenizer_unavailable",
                                "tokenizer produced no count: " + command);
    }
    uint64_t value = 0;
    size_t digits = 0;
    for (size_t i = start; i < output.size(); ++i) {
        char c = output[i];
        if (c >= '0' && c <= '9') {
            value = value * 10 + static_cast<uint64_t>(c - '0');
            ++digits;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            break;
        } else {
            throw ExternalToolError("tokenizer_unavailable",
                                    "tokenizer output is not a decimal count");
        }
    }
    if (digits == 0) {
        throw ExternalToolError("tokenizer_unavailable",
                                "tokenizer output is not a decimal count");
    }
    return value;
}

}  // namespace

uint64_t count_tokens(std::string_view content, const TokenCounter& counter) {
    switch (counter.mode) {
        case TokenCountMode::kByteEstimate:
            return (content.size() + 3) / 4;
        case TokenCountMode::kWhitespace:
            return whitespace_token_count(content);
        case TokenCountMode::kPlugin:
            return plugin_token_count(content, counter.plugin_command);
    }
    return 0;
}

void MixtureSpec::validate() const {
    if (components.empty()) {
        throw ConfigError("mixture needs at least one component");
    }
    if (token_budget == 0) {
        throw ConfigError("token_budget must be positive");
    }
    double sum = 0.0;
    std::vector<std::string> names;
    for (const auto& c : components) {
        if (c.name.empty()) {
            throw ConfigError("mixture component names must be non-empty");
        }
        if (c.weight < 0.0) {
            throw ConfigError("mixture weights must be non-negative");
        }
        sum += c.weight;
        names.push_back(c.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw ConfigError("mixture component names must be unique");
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("mixture weights must sum to 1 (got " + std::to_string(sum) +
                          ")");
    }
}

std::vector<PhaseTarget> plan_phase(const MixtureSpec& spec) {
    spec.validate();
    const size_t n = spec.components.size();
    std::vector<PhaseTarget> targets(n);
    std::vector<double> remainders(n);
    uint64_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        double exact = spec.components[i].weight * static_cast<double>(spec.token_budget);
        uint64_t base = static_cast<uint64_t>(std::floor(exact));
        targets[i].name = spec.components[i].name;
        targets[i].target_tokens = base;
        remainders[i] = exact - static_cast<double>(base);
        assigned += base;
    }
    uint64_t leftover = spec.token_budget - assigned;
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return remainders[a] > remainders[b];
    });
    for (uint64_t k = 0; k < leftover; ++k) {
        targets[order[k % n]].target_tokens += 1;
    }
    return targets;
}

FileDocumentSource::FileDocumentSource(std::string path) : path_(std::move(path)) {
    reader_ = std::make_unique<RecordReader>(path_);
}

std::optional<Document> FileDocumentSource::next() { return reader_->next(); }

void FileDocumentSource::rewind() { reader_ = std::make_unique<RecordReader>(path_); }

std::optional<Document> VectorDocumentSource::next() {
    if (cursor_ >= docs_.size()) {
        return std::nullopt;
    }
    return docs_[cursor_++];
}

MixtureStats sample_stream(const MixtureSpec& spec, const TokenCounter& counter,
                           std::vector<std::unique_ptr<DocumentSource>>& sources,
                           const std::function<void(const Document&)>& sink,
                           bool repeat) {
    spec.validate();
    counter.validate();
    if (sources.size() != spec.components.size()) {
        throw ConfigError("mixture sources must align with components");
    }
    std::vector<PhaseTarget> targets = plan_phase(spec);
    const size_t n = spec.components.size();

    MixtureStats stats;
    stats.components.resize(n);
    std::vector<bool> done(n, false);
    std::vector<uint64_t> cycle(n, 0);
    std::vector<uint64_t> tokens_at_cycle_start(n, 0);
    for (size_t i = 0; i < n; ++i) {
        stats.components[i].name = spec.components[i].name;
        stats.components[i].target_tokens = targets[i].target_tokens;
        if (targets[i].target_tokens == 0) {
            done[i] = true;
        }
    }

    while (true) {
        // Deficit against the weighted share of everything emitted so far;
        // largest deficit draws next, ties fall to the smallest index.
        size_t pick = n;
        double best = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            double deficit = spec.components[i].weight *
                                 static_cast<double>(stats.total_tokens) -
                             static_cast<double>(stats.components[i].tokens);
            if (pick == n || deficit > best) {
                pick = i;
                best = deficit;
            }
        }
        if (pick == n) {
            break;  // every component met its target or ran dry
        }

        std::optional<Document> doc = sources[pick]->next();
        if (!doc && repeat &&
            stats.components[pick].tokens > tokens_at_cycle_start[pick]) {
            sources[pick]->rewind();
            cycle[pick] += 1;
            tokens_at_cycle_start[pick] = stats.components[pick].tokens;
            doc = sources[pick]->next();
        }
        if (!doc) {
            stats.components[pick].exhausted = true;
            done[pick] = true;
            continue;
        }
        if (cycle[pick] > 0) {
            // Re-emitted documents need fresh ids to keep the output stream
            // free of duplicates.
            doc->id += "#r" + std::to_string(cycle[pick]);
        }

        uint64_t t = count_tokens(doc->training_text(), counter);
        if (stats.total_tokens + t > spec.token_budget) {
            break;  // emitting this document would blow the budget
        }
        sink(*doc);
        stats.components[pick].docs += 1;
        stats.components[pick].tokens += t;
        stats.total_docs += 1;
        stats.total_tokens += t;
        stats.max_doc_tokens = std::max(stats.max_doc_tokens, t);
        if (stats.components[pick].tokens >= stats.components[pick].target_tokens) {
            done[pick] = true;
        }
    }
    return stats;
}

}  // namespace corpusprep
