#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lakescout/catalog.hpp"
#include "lakescout/csv.hpp"
#include "lakescout/error.hpp"
#include "lakescout/profile_store.hpp"

namespace lakescout {

enum class JoinLabel { semantic, syntactic };

inline std::string_view to_string(JoinLabel label) { return label == JoinLabel::semantic ? "semantic" : "syntactic"; }

inline JoinLabel join_label_from_string(std::string_view s) {
    if (s == "semantic") return JoinLabel::semantic;
    if (s == "syntactic") return JoinLabel::syntactic;
    throw FormatError("unknown join label '" + std::string(s) + "'");
}

struct GroundTruthEntry {
    ColumnRef query;
    ColumnRef candidate;
    JoinLabel label = JoinLabel::semantic;
};

inline constexpr std::string_view kGroundTruthHeader = "query_dataset,query_column,candidate_dataset,candidate_column,label";

inline void write_ground_truth(const std::vector<GroundTruthEntry>& entries, const std::filesystem::path& path) {
    std::string out(kGroundTruthHeader);
    out.push_back('\n');
    for (const auto& e : entries) {
        csv::append_row(out, {e.query.dataset_id, e.query.column_name, e.candidate.dataset_id, e.candidate.column_name,
                              std::string(to_string(e.label))});
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_text_file(path, out);
}

// Rejects self-pairs and duplicate (query, candidate) rows.
inline std::vector<GroundTruthEntry> read_ground_truth(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    csv::Reader reader(data);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw FormatError(path.string() + ": empty ground-truth file");
    std::vector<GroundTruthEntry> entries;
    std::set<std::pair<ColumnRef, ColumnRef>> seen;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(reader.record_number());
        if (fields.size() != 5) throw FormatError(where + ": expected 5 fields");
        GroundTruthEntry e;
        e.query.dataset_id = fields[0];
        e.query.column_name = fields[1];
        e.candidate.dataset_id = fields[2];
        e.candidate.column_name = fields[3];
        try {
            e.label = join_label_from_string(fields[4]);
        } catch (const FormatError& err) {
            throw FormatError(where + ": " + err.what());
        }
        if (e.query == e.candidate) throw FormatError(where + ": query and candidate are the same column");
        if (!seen.emplace(e.query, e.candidate).second) throw FormatError(where + ": duplicate pair");
        entries.push_back(std::move(e));
    }
    return entries;
}

} // namespace lakescout
