#pragma once

#include <stdexcept>
#include <string>

namespace corpusprep {

// Error taxonomy mirrors the CLI exit codes: config 1, data 2, external tool 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    DataError(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}

    // Machine-readable code, e.g. "issue_format", "span_conflict", "fim_malformed".
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

class ExternalToolError : public std::runtime_error {
public:
    ExternalToolError(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

}  // namespace corpusprep
