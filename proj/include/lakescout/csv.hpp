#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lakescout::csv {

// Pull parser over an in-memory CSV buffer: `"` quoting with doubled-quote
// escapes, quoted fields may span lines, LF or CRLF row endings. A leading
// UTF-8 byte-order mark is skipped.
class Reader {
public:
    explicit Reader(std::string_view data, char delimiter = ',') : data_(data), delimiter_(delimiter) {
        if (data_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    }

    // Reads the next record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        if (pos_ >= data_.size()) return false;
        fields.clear();
        std::string field;
        bool quoted = false;
        while (pos_ < data_.size()) {
            const char c = data_[pos_];
            if (quoted) {
                if (c == '"') {
                    if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
                        field.push_back('"');
                        pos_ += 2;
                        continue;
                    }
                    quoted = false;
                    ++pos_;
                    continue;
                }
                field.push_back(c);
                ++pos_;
                continue;
            }
            if (c == '"') {
                quoted = true;
                ++pos_;
            } else if (c == delimiter_) {
                fields.push_back(std::move(field));
                field.clear();
                ++pos_;
            } else if (c == '\n' || c == '\r') {
                ++pos_;
                if (c == '\r' && pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
                break;
            } else {
                // Fast path: copy the unquoted run up to the next special character.
                const std::size_t start = pos_;
                while (pos_ < data_.size()) {
                    const char d = data_[pos_];
                    if (d == delimiter_ || d == '\n' || d == '\r' || d == '"') break;
                    ++pos_;
                }
                field.append(data_.data() + start, pos_ - start);
            }
        }
        fields.push_back(std::move(field));
        ++line_;
        return true;
    }

    // 1-based index of the record returned by the last next() call.
    std::size_t record_number() const { return line_; }

private:
    std::string_view data_;
    char delimiter_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

inline bool needs_quoting(std::string_view field, char delimiter = ',') {
    for (const char c : field) {
        if (c == delimiter || c == '"' || c == '\n' || c == '\r') return true;
    }
    return false;
}

inline void append_field(std::string& out, std::string_view field, char delimiter = ',') {
    if (!needs_quoting(field, delimiter)) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

inline void append_row(std::string& out, const std::vector<std::string>& fields, char delimiter = ',') {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(delimiter);
        append_field(out, fields[i], delimiter);
    }
    out.push_back('\n');
}

} // namespace lakescout::csv
