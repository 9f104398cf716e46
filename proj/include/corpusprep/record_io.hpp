#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "corpusprep/document.hpp"

namespace corpusprep {

// Line transport, so the record layer does not care about compression.
// Paths ending in ".gz" get the gzip implementation.
class LineSource {
public:
    virtual ~LineSource() = default;
    // Reads the next line without its trailing '\n'. False at end of input.
    virtual bool next_line(std::string& out) = 0;
};

class LineSink {
public:
    virtual ~LineSink() = default;
    virtual void write_line(std::string_view line) = 0;
    virtual void close() = 0;
};

std::unique_ptr<LineSource> open_line_source(const std::string& path);
std::unique_ptr<LineSink> open_line_sink(const std::string& path);

// Streaming JSONL reader. Validates each record and tracks position so
// errors name the line number and byte offset. Guards against duplicate ids.
class RecordReader {
public:
    explicit RecordReader(const std::string& path, bool check_duplicate_ids = true);

    // nullopt at end of stream; throws DataError on a malformed line.
    std::optional<Document> next();

    uint64_t line_number() const { return line_number_; }

private:
    std::string path_;
    std::unique_ptr<LineSource> source_;
    bool check_duplicate_ids_;
    std::unordered_set<std::string> seen_ids_;
    uint64_t line_number_ = 0;
    uint64_t byte_offset_ = 0;
    std::string line_buf_;
};

class RecordWriter {
public:
    explicit RecordWriter(const std::string& path);

    void write(const Document& doc);
    void close();
    uint64_t count() const { return count_; }

private:
    std::unique_ptr<LineSink> sink_;
    uint64_t count_ = 0;
};

std::vector<Document> read_all_records(const std::string& path);
uint64_t write_all_records(const std::string& path, const std::vector<Document>& docs);

}  // namespace corpusprep
