#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lakescout/csv.hpp"
#include "lakescout/detail/parallel.hpp"
#include "lakescout/error.hpp"

namespace lakescout {

namespace fs = std::filesystem;

enum class ColumnKind { textual, numeric, other };

inline std::string_view to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::textual: return "textual";
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::other: return "other";
    }
    return "other";
}

inline ColumnKind column_kind_from_string(std::string_view s) {
    if (s == "textual") return ColumnKind::textual;
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "other") return ColumnKind::other;
    throw FormatError("unknown column kind '" + std::string(s) + "'");
}

struct DatasetRef {
    std::string id;
    fs::path path;
    std::string name;
    std::size_t row_count = 0;
    std::size_t column_count = 0;
};

// Identity of a column is (dataset_id, column_name); position and kind ride along.
struct ColumnRef {
    std::string dataset_id;
    std::string column_name;
    std::size_t position = 0;
    ColumnKind kind = ColumnKind::other;

    friend bool operator==(const ColumnRef& a, const ColumnRef& b) {
        return a.dataset_id == b.dataset_id && a.column_name == b.column_name;
    }
    friend std::strong_ordering operator<=>(const ColumnRef& a, const ColumnRef& b) {
        if (auto c = a.dataset_id <=> b.dataset_id; c != 0) return c;
        return a.column_name <=> b.column_name;
    }
};

inline std::string to_string(const ColumnRef& col) { return col.dataset_id + "." + col.column_name; }

// Non-null cells of one column, multiplicities preserved.
struct ColumnValues {
    std::vector<std::string> cells;
    std::size_t total_count = 0;
    std::size_t distinct_count = 0;

    static ColumnValues from_cells(std::vector<std::string> cells) {
        ColumnValues values;
        values.total_count = cells.size();
        std::unordered_set<std::string_view> seen;
        seen.reserve(cells.size());
        for (const auto& c : cells) seen.insert(c);
        values.distinct_count = seen.size();
        values.cells = std::move(cells);
        return values;
    }

    bool empty() const { return total_count == 0; }
};

using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

struct IngestOptions {
    std::vector<std::string> null_tokens{"", "NA", "N/A", "null", "NULL", "-"};
    // A column is numeric when at least this fraction of its non-null cells parse as numbers.
    double numeric_threshold = 0.9;
    char delimiter = ',';
    unsigned threads = detail::default_threads();
    WarningSink warn = warn_to_stderr;
};

inline bool parses_as_number(std::string_view s) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto* end = s.data() + s.size();
    const auto result = std::from_chars(s.data(), end, value);
    return result.ec == std::errc() && result.ptr == end;
}

// Raw content of one CSV file after dialect handling and null removal.
struct ParsedDataset {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> columns; // non-null cells per column
    std::size_t row_count = 0;
    std::size_t skipped_rows = 0;
};

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!fs::exists(path)) throw NotFoundError("file '" + path.string() + "' does not exist");
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw Error("cannot read " + path.string());
    return std::move(buffer).str();
}

// Duplicate header names get a numeric suffix so (dataset, column) stays unique.
inline std::vector<std::string> dedupe_header(std::vector<std::string> header) {
    std::map<std::string, int> seen;
    for (auto& name : header) {
        auto& n = seen[name];
        if (n++ > 0) {
            std::string candidate;
            do {
                candidate = name + "_" + std::to_string(n++);
            } while (seen.count(candidate));
            seen[candidate] = 1;
            name = candidate;
        }
    }
    return header;
}

inline ParsedDataset parse_dataset(const fs::path& path, const IngestOptions& options) {
    const std::string data = read_file(path);
    csv::Reader reader(data, options.delimiter);
    ParsedDataset parsed;
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw FormatError(path.string() + ": missing header row");
    parsed.header = dedupe_header(fields);
    const std::size_t width = parsed.header.size();
    parsed.columns.resize(width);
    const std::unordered_set<std::string> nulls(options.null_tokens.begin(), options.null_tokens.end());
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty() && width != 1) continue; // blank line
        if (fields.size() != width) {
            ++parsed.skipped_rows;
            continue;
        }
        ++parsed.row_count;
        for (std::size_t i = 0; i < width; ++i) {
            if (!nulls.count(fields[i])) parsed.columns[i].push_back(std::move(fields[i]));
        }
    }
    if (parsed.skipped_rows > 0 && options.warn) {
        options.warn(path.string() + ": skipped " + std::to_string(parsed.skipped_rows) + " row(s) with wrong field count");
    }
    return parsed;
}

inline ColumnKind infer_kind(const std::vector<std::string>& cells, double numeric_threshold) {
    if (cells.empty()) return ColumnKind::other;
    std::size_t numeric = 0;
    for (const auto& c : cells) numeric += parses_as_number(c) ? 1 : 0;
    return static_cast<double>(numeric) >= numeric_threshold * static_cast<double>(cells.size()) ? ColumnKind::numeric
                                                                                                   : ColumnKind::textual;
}

// Immutable view of the datasets in a lake. Cell data is not retained; it is
// re-read from disk one dataset at a time.
class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<DatasetRef> datasets, std::vector<ColumnRef> columns, IngestOptions options)
        : datasets_(std::move(datasets)), columns_(std::move(columns)), options_(std::move(options)) {
        for (std::size_t i = 0; i < datasets_.size(); ++i) dataset_index_.emplace(datasets_[i].id, i);
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            column_index_.emplace(std::make_pair(columns_[i].dataset_id, columns_[i].column_name), i);
        }
    }

    const std::vector<DatasetRef>& datasets() const { return datasets_; }
    const std::vector<ColumnRef>& columns() const { return columns_; }
    const IngestOptions& options() const { return options_; }

    const DatasetRef& dataset(const std::string& id) const {
        const auto it = dataset_index_.find(id);
        if (it == dataset_index_.end()) throw NotFoundError("unknown dataset '" + id + "'");
        return datasets_[it->second];
    }

    const ColumnRef& column(const std::string& dataset_id, const std::string& column_name) const {
        const auto it = column_index_.find({dataset_id, column_name});
        if (it == column_index_.end()) throw NotFoundError("unknown column '" + dataset_id + "." + column_name + "'");
        return columns_[it->second];
    }

    std::vector<ColumnRef> columns_of(const std::string& dataset_id) const {
        std::vector<ColumnRef> out;
        for (const auto& c : columns_) {
            if (c.dataset_id == dataset_id) out.push_back(c);
        }
        return out;
    }

    std::size_t total_bytes() const {
        std::size_t bytes = 0;
        for (const auto& d : datasets_) bytes += fs::file_size(d.path);
        return bytes;
    }

private:
    std::vector<DatasetRef> datasets_;
    std::vector<ColumnRef> columns_;
    IngestOptions options_;
    std::map<std::string, std::size_t> dataset_index_;
    std::map<std::pair<std::string, std::string>, std::size_t> column_index_;
};

inline std::vector<fs::path> list_csv_files(const fs::path& root) {
    if (!fs::is_directory(root)) throw NotFoundError("lake directory '" + root.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline Catalog ingest_directory(const fs::path& root, IngestOptions options = {}) {
    const auto files = list_csv_files(root);
    if (files.empty()) throw Error("no .csv files found in '" + root.string() + "'");

    struct Slot {
        bool ok = false;
        DatasetRef dataset;
        std::vector<ColumnRef> columns;
    };
    std::vector<Slot> slots(files.size());
    detail::parallel_for(files.size(), options.threads, [&](std::size_t i) {
        ParsedDataset parsed;
        try {
            parsed = parse_dataset(files[i], options);
        } catch (const std::exception& e) {
            if (options.warn) options.warn(std::string("skipping ") + files[i].string() + ": " + e.what());
            return;
        }
        Slot& slot = slots[i];
        slot.dataset.id = files[i].stem().string();
        slot.dataset.name = slot.dataset.id;
        slot.dataset.path = files[i];
        slot.dataset.row_count = parsed.row_count;
        slot.dataset.column_count = parsed.header.size();
        for (std::size_t c = 0; c < parsed.header.size(); ++c) {
            slot.columns.push_back({slot.dataset.id, parsed.header[c], c, infer_kind(parsed.columns[c], options.numeric_threshold)});
        }
        slot.ok = true;
    });

    std::vector<DatasetRef> datasets;
    std::vector<ColumnRef> columns;
    for (auto& slot : slots) {
        if (!slot.ok) continue;
        datasets.push_back(std::move(slot.dataset));
        for (auto& c : slot.columns) columns.push_back(std::move(c));
    }
    if (datasets.empty()) throw Error("no parseable .csv files in '" + root.string() + "'");
    return Catalog(std::move(datasets), std::move(columns), std::move(options));
}

// All columns of one dataset, in header order. Entirely-null columns come back empty.
inline std::vector<ColumnValues> read_dataset(const Catalog& catalog, const std::string& dataset_id) {
    const DatasetRef& ref = catalog.dataset(dataset_id);
    IngestOptions quiet = catalog.options();
    quiet.warn = nullptr;
    ParsedDataset parsed = parse_dataset(ref.path, quiet);
    std::vector<ColumnValues> out;
    out.reserve(parsed.columns.size());
    for (auto& cells : parsed.columns) out.push_back(ColumnValues::from_cells(std::move(cells)));
    return out;
}

inline ColumnValues read_column(const Catalog& catalog, const ColumnRef& col) {
    const ColumnRef& known = catalog.column(col.dataset_id, col.column_name);
    auto columns = read_dataset(catalog, known.dataset_id);
    if (known.position >= columns.size()) throw FormatError("dataset '" + known.dataset_id + "' changed on disk");
    ColumnValues values = std::move(columns[known.position]);
    if (values.empty()) throw EmptyColumnError("column '" + to_string(known) + "' contains only nulls");
    return values;
}

} // namespace lakescout
