#include "corpusprep/record_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "corpusprep/errors.hpp"

namespace corpusprep {

namespace {

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

class PlainLineSource final : public LineSource {
public:
    explicit PlainLineSource(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) {
            throw DataError("io_error", "cannot open " + path + " for reading");
        }
    }

    bool next_line(std::string& out) override {
        if (!std::getline(in_, out)) {
            return false;
        }
        // getline strips '\n' but keeps '\r' from CRLF input; records are
        // written with bare '\n', so a stray '\r' stays part of the payload
        // and will fail JSON parsing, which is the behavior we want.
        return true;
    }

private:
    std::ifstream in_;
};

class GzipLineSource final : public LineSource {
public:
    explicit GzipLineSource(const std::string& path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) {
            throw DataError("io_error", "cannot open " + path + " for reading");
        }
        gzbuffer(file_, 1 << 16);
    }

    ~GzipLineSource() override {
        if (file_ != nullptr) {
            gzclose(file_);
        }
    }

    bool next_line(std::string& out) override {
        out.clear();
        if (eof_ && pending_.empty()) {
            return false;
        }
        while (true) {
            auto nl = pending_.find('\n');
            if (nl != std::string::npos) {
                out.assign(pending_, 0, nl);
                pending_.erase(0, nl + 1);
                return true;
            }
            if (eof_) {
                if (pending_.empty()) {
                    return false;
                }
                out.swap(pending_);
                pending_.clear();
                return true;
            }
            char buf[1 << 15];
            int n = gzread(file_, buf, sizeof(buf));
            if (n < 0) {
                int errnum = 0;
                const char* msg = gzerror(file_, &errnum);
                throw DataError("io_error", std::string("gzip read failed: ") +
                                                (msg != nullptr ? msg : "unknown"));
            }
            if (n == 0) {
                eof_ = true;
            } else {
                pending_.append(buf, static_cast<size_t>(n));
            }
        }
    }

private:
    gzFile file_ = nullptr;
    std::string pending_;
    bool eof_ = false;
};

class PlainLineSink final : public LineSink {
public:
    explicit PlainLineSink(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) {
            throw DataError("io_error", "cannot open " + path + " for writing");
        }
    }

    void write_line(std::string_view line) override {
        out_.write(line.data(), static_cast<std::streamsize>(line.size()));
        out_.put('\n');
        if (!out_) {
            throw DataError("io_error", "write failed");
        }
    }

    void close() override {
        if (out_.is_open()) {
            out_.close();
            if (!out_) {
                throw DataError("io_error", "close failed");
            }
        }
    }

private:
    std::ofstream out_;
};

class GzipLineSink final : public LineSink {
public:
    explicit GzipLineSink(const std::string& path) {
        file_ = gzopen(path.c_str(), "wb");
        if (file_ == nullptr) {
            throw DataError("io_error", "cannot open " + path + " for writing");
        }
    }

    ~GzipLineSink() override {
        if (file_ != nullptr) {
            gzclose(file_);
        }
    }

    void write_line(std::string_view line) override {
        if (!line.empty() &&
            gzwrite(file_, line.data(), static_cast<unsigned>(line.size())) <= 0) {
            throw DataError("io_error", "gzip write failed");
        }
        if (gzwrite(file_, "\n", 1) <= 0) {
            throw DataError("io_error", "gzip write failed");
        }
    }

    void close() override {
        if (file_ != nullptr) {
            int rc = gzclose(file_);
            file_ = nullptr;
            if (rc != Z_OK) {
                throw DataError("io_error", "gzip close failed");
            }
        }
    }

private:
    gzFile file_ = nullptr;
};

}  // namespace

std::unique_ptr<LineSource> open_line_source(const std::string& path) {
    if (has_gz_suffix(path)) {
        return std::make_unique<GzipLineSource>(path);
    }
    return std::make_unique<PlainLineSource>(path);
}

std::unique_ptr<LineSink> open_line_sink(const std::string& path) {
    if (has_gz_suffix(path)) {
        return std::make_unique<GzipLineSink>(path);
    }
    return std::make_unique<PlainLineSink>(path);
}

RecordReader::RecordReader(const std::string& path, bool check_duplicate_ids)
    : path_(path),
      source_(open_line_source(path)),
      check_duplicate_ids_(check_duplicate_ids) {}

std::optional<Document> RecordReader::next() {
    while (source_->next_line(line_buf_)) {
        uint64_t this_line = ++line_number_;
        uint64_t this_offset = byte_offset_;
        byte_offset_ += line_buf_.size() + 1;
        if (line_buf_.empty()) {
            continue;
        }
        if (line_buf_.back() == '\r') {
            throw DataError("malformed_record",
                            path_ + ": line " + std::to_string(this_line) + " (byte offset " +
                                std::to_string(this_offset) +
                                "): carriage return before newline; records are LF-terminated");
        }
        Document doc;
        try {
            doc = Document::from_json_line(line_buf_);
        } catch (const DataError& e) {
            throw DataError(e.code(), path_ + ": line " + std::to_string(this_line) +
                                           " (byte offset " + std::to_string(this_offset) +
                                           "): " + e.what());
        }
        if (check_duplicate_ids_ && !seen_ids_.insert(doc.id).second) {
            throw DataError("duplicate_id", path_ + ": line " + std::to_string(this_line) +
                                                " (byte offset " + std::to_string(this_offset) +
                                                "): duplicate document id '" + doc.id + "'");
        }
        return doc;
    }
    return std::nullopt;
}

RecordWriter::RecordWriter(const std::string& path) : sink_(open_line_sink(path)) {}

void RecordWriter::write(const Document& doc) {
    sink_->write_line(doc.to_json_line());
    ++count_;
}

void RecordWriter::close() { sink_->close(); }

std::vector<Document> read_all_records(const std::string& path) {
    RecordReader reader(path);
    std::vector<Document> docs;
    while (auto doc = reader.next()) {
        docs.push_back(std::move(*doc));
    }
    return docs;
}

uint64_t write_all_records(const std::string& path, const std::vector<Document>& docs) {
    RecordWriter writer(path);
    for (const auto& doc : docs) {
        writer.write(doc);
    }
    writer.close();
    return writer.count();
}

}  // namespace corpusprep
