#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/catalog.hpp"
#include "lakescout/error.hpp"
#include "lakescout/profile.hpp"

namespace lakescout {

using ProfiledColumn = std::pair<ColumnRef, ColumnProfile>;

inline constexpr std::string_view kProfileSuffix = ".profile.json";
inline constexpr std::string_view kStatsFile = "stats.json";

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

inline nlohmann::json read_json_file(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// Writes one <dataset>.profile.json per dataset. Columns keep their input order.
inline void store_profiles(const std::vector<ProfiledColumn>& profiles, const fs::path& dir) {
    fs::create_directories(dir);
    std::map<std::string, nlohmann::ordered_json> by_dataset;
    for (const auto& [col, profile] : profiles) {
        auto& doc = by_dataset[col.dataset_id];
        if (doc.is_null()) {
            doc["dataset"] = col.dataset_id;
            doc["columns"] = nlohmann::ordered_json::array();
        }
        nlohmann::ordered_json entry;
        entry["name"] = col.column_name;
        entry["position"] = col.position;
        entry["kind"] = std::string(to_string(col.kind));
        entry["profile"] = profile_to_json(profile);
        doc["columns"].push_back(std::move(entry));
    }
    for (const auto& [dataset, doc] : by_dataset) {
        write_text_file(dir / (dataset + std::string(kProfileSuffix)), doc.dump());
    }
}

inline std::vector<fs::path> list_profile_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > kProfileSuffix.size() && name.ends_with(kProfileSuffix)) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

inline std::vector<ProfiledColumn> load_profiles(const fs::path& dir) {
    std::vector<ProfiledColumn> out;
    for (const auto& file : list_profile_files(dir)) {
        const auto doc = read_json_file(file);
        try {
            const auto dataset = doc.at("dataset").get<std::string>();
            for (const auto& entry : doc.at("columns")) {
                ColumnRef col{dataset, entry.at("name").get<std::string>(), entry.at("position").get<std::size_t>(),
                              column_kind_from_string(entry.at("kind").get<std::string>())};
                out.emplace_back(std::move(col), profile_from_json(entry.at("profile")));
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(file.string() + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(file.string() + ": " + e.what());
        }
    }
    return out;
}

inline std::size_t profile_bytes(const fs::path& dir) {
    std::size_t bytes = 0;
    for (const auto& file : list_profile_files(dir)) bytes += fs::file_size(file);
    return bytes;
}

inline void store_stats(const NormalizationStats& stats, const fs::path& dir) {
    fs::create_directories(dir);
    write_text_file(dir / kStatsFile, stats_to_json(stats).dump(2) + "\n");
}

inline NormalizationStats load_stats(const fs::path& dir) {
    const fs::path file = dir / kStatsFile;
    if (!fs::exists(file)) throw NotFoundError("missing " + file.string());
    const auto doc = read_json_file(file);
    try {
        return stats_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

// Profiles every non-empty column of the lake, one dataset in memory at a time.
// Output order follows catalog order regardless of the thread count.
inline std::vector<ProfiledColumn> profile_catalog(const Catalog& catalog, unsigned threads = detail::default_threads()) {
    const auto& datasets = catalog.datasets();
    std::vector<std::vector<ProfiledColumn>> per_dataset(datasets.size());
    detail::parallel_for(datasets.size(), threads, [&](std::size_t i) {
        const auto columns = catalog.columns_of(datasets[i].id);
        auto values = read_dataset(catalog, datasets[i].id);
        for (const auto& col : columns) {
            if (col.position >= values.size() || values[col.position].empty()) continue;
            per_dataset[i].emplace_back(col, compute_profile(values[col.position]));
            values[col.position] = {};
        }
    });
    std::vector<ProfiledColumn> out;
    for (auto& part : per_dataset) {
        for (auto& pc : part) out.push_back(std::move(pc));
    }
    return out;
}

inline NormalizationStats compute_normalization_stats(const std::vector<ProfiledColumn>& profiles) {
    std::vector<ColumnProfile> raw;
    raw.reserve(profiles.size());
    for (const auto& pc : profiles) raw.push_back(pc.second);
    return compute_normalization_stats(raw);
}

} // namespace lakescout
