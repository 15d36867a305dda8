#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/catalog.hpp"
#include "lakescout/ground_truth.hpp"
#include "lakescout/join_metric.hpp"
#include "lakescout/model.hpp"
#include "lakescout/profile_store.hpp"
#include "lakescout/search.hpp"
#include "lakescout/training.hpp"

namespace lakescout {

using RelevantSet = std::set<ColumnRef>;

inline std::size_t hits_in_top_k(const Ranking& ranking, const RelevantSet& truth, std::size_t k) {
    std::size_t hits = 0;
    const std::size_t depth = std::min(k, ranking.size());
    for (std::size_t i = 0; i < depth; ++i) hits += truth.count(ranking[i].candidate);
    return hits;
}

inline double precision_at_k(const Ranking& ranking, const RelevantSet& truth, std::size_t k) {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (ranking.empty()) return 0.0;
    const std::size_t depth = std::min(k, ranking.size());
    return static_cast<double>(hits_in_top_k(ranking, truth, k)) / static_cast<double>(depth);
}

inline double recall_at_k(const Ranking& ranking, const RelevantSet& truth, std::size_t k) {
    if (k < 1) throw InvalidArgument("k must be at least 1");
    if (truth.empty()) throw InvalidArgument("recall needs at least one relevant column");
    return static_cast<double>(hits_in_top_k(ranking, truth, k)) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------
// Set-overlap metric comparison
// ---------------------------------------------------------------------------

struct MetricStudyRow {
    std::string metric;
    std::vector<std::pair<std::size_t, double>> precision; // (k, P@k)
};

inline double study_precision(const MetricStudyRow& row, std::size_t k) {
    for (const auto& [kk, p] : row.precision) {
        if (kk == k) return p;
    }
    throw NotFoundError("k=" + std::to_string(k) + " not in study");
}

// Ranks the labelled pairs by containment, set Jaccard and multiset Jaccard and
// reports the share of semantic pairs among the first k of each ranking.
inline std::vector<MetricStudyRow> metric_comparison_study(const std::vector<GroundTruthEntry>& pairs, const ValueStore& values,
                                                           const std::vector<std::size_t>& ks = {1, 10, 50, 100}) {
    using Scorer = double (*)(const FrequencyTable&, const FrequencyTable&);
    const std::vector<std::pair<std::string, Scorer>> metrics{
        {"containment", [](const FrequencyTable& a, const FrequencyTable& b) { return containment(a, b); }},
        {"jaccard", [](const FrequencyTable& a, const FrequencyTable& b) { return set_jaccard(a, b); }},
        {"multiset_jaccard", [](const FrequencyTable& a, const FrequencyTable& b) { return multiset_jaccard(a, b); }},
    };
    std::vector<MetricStudyRow> out;
    for (const auto& [name, score] : metrics) {
        std::vector<std::pair<double, const GroundTruthEntry*>> scored;
        for (const auto& e : pairs) scored.emplace_back(score(values.at(e.query), values.at(e.candidate)), &e);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            if (a.second->query != b.second->query) return a.second->query < b.second->query;
            return a.second->candidate < b.second->candidate;
        });
        MetricStudyRow row{name, {}};
        for (const std::size_t k : ks) {
            const std::size_t depth = std::min(k, scored.size());
            std::size_t semantic = 0;
            for (std::size_t i = 0; i < depth; ++i) semantic += scored[i].second->label == JoinLabel::semantic ? 1 : 0;
            row.precision.emplace_back(k, depth ? static_cast<double>(semantic) / static_cast<double>(depth) : 0.0);
        }
        out.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct KMetrics {
    std::size_t k = 0;
    double precision = 0;
    double recall = 0;
};

struct EvalReport {
    std::vector<KMetrics> per_k;
    double preparation_seconds = 0;
    double query_seconds_mean = 0;
    double query_seconds_max = 0;
    std::size_t profile_bytes = 0;
    std::size_t lake_bytes = 0;
    double profile_ratio = 0;
    std::size_t columns_profiled = 0;
    std::size_t queries = 0;
    unsigned threads = 1;
};

struct BenchmarkOptions {
    std::size_t k_max = 10;
    int repeats = 3;
    // 1 keeps timings sequential; anything higher is reported as a parallel run.
    unsigned threads = 1;
    std::filesystem::path profiles_dir;
    IngestOptions ingest;
};

template <typename Fn>
double time_median(int repeats, Fn&& fn) {
    std::vector<double> times;
    for (int r = 0; r < std::max(1, repeats); ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

// Profiles the lake (timed), then ranks every query of `truth` that has at least
// one semantic candidate and scores the rankings against it.
inline EvalReport run_benchmark(const std::filesystem::path& lake_dir, const std::vector<GroundTruthEntry>& truth, const Regressor& model,
                                BenchmarkOptions options) {
    if (options.k_max < 1) throw InvalidArgument("k_max must be at least 1");
    if (options.profiles_dir.empty()) throw InvalidArgument("benchmark needs a profile output directory");
    options.ingest.threads = options.threads;
    EvalReport report;
    report.threads = options.threads;

    std::vector<ProfiledColumn> profiles;
    NormalizationStats stats;
    Catalog catalog;
    report.preparation_seconds = time_median(options.repeats, [&] {
        catalog = ingest_directory(lake_dir, options.ingest);
        profiles = profile_catalog(catalog, options.threads);
        stats = compute_normalization_stats(profiles);
        std::filesystem::remove_all(options.profiles_dir);
        store_profiles(profiles, options.profiles_dir);
        store_stats(stats, options.profiles_dir);
    });
    report.columns_profiled = profiles.size();
    report.profile_bytes = profile_bytes(options.profiles_dir) + std::filesystem::file_size(options.profiles_dir / kStatsFile);
    report.lake_bytes = catalog.total_bytes();
    report.profile_ratio = static_cast<double>(report.profile_bytes) / static_cast<double>(report.lake_bytes);

    const ProfileIndex index(profiles, stats);
    std::map<ColumnRef, RelevantSet> relevant;
    std::set<ColumnRef> queries;
    for (const auto& e : truth) {
        queries.insert(e.query);
        if (e.label == JoinLabel::semantic) relevant[e.query].insert(e.candidate);
    }

    report.per_k.resize(options.k_max);
    for (std::size_t k = 1; k <= options.k_max; ++k) report.per_k[k - 1].k = k;
    double total_time = 0;
    for (const auto& q : queries) {
        const auto it = relevant.find(q);
        if (it == relevant.end()) {
            if (options.ingest.warn) options.ingest.warn("query " + to_string(q) + " has no semantic ground truth; skipped");
            continue;
        }
        QuerySpec spec;
        try {
            spec.query = catalog.column(q.dataset_id, q.column_name);
            index.find(spec.query);
        } catch (const NotFoundError& e) {
            if (options.ingest.warn) options.ingest.warn(std::string(e.what()) + "; query skipped");
            continue;
        }
        spec.k = options.k_max;
        Ranking ranking;
        const double t = time_median(options.repeats, [&] { ranking = rank(spec, index, model, options.threads); });
        total_time += t;
        report.query_seconds_max = std::max(report.query_seconds_max, t);
        for (auto& m : report.per_k) {
            m.precision += precision_at_k(ranking, it->second, m.k);
            m.recall += recall_at_k(ranking, it->second, m.k);
        }
        ++report.queries;
    }
    if (report.queries > 0) {
        const auto n = static_cast<double>(report.queries);
        for (auto& m : report.per_k) {
            m.precision /= n;
            m.recall /= n;
        }
        report.query_seconds_mean = total_time / n;
    }
    return report;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["queries"] = r.queries;
    j["columns_profiled"] = r.columns_profiled;
    j["preparation_seconds"] = r.preparation_seconds;
    j["query_seconds_mean"] = r.query_seconds_mean;
    j["query_seconds_max"] = r.query_seconds_max;
    j["profile_bytes"] = r.profile_bytes;
    j["lake_bytes"] = r.lake_bytes;
    j["profile_ratio"] = r.profile_ratio;
    j["threads"] = r.threads;
    j["mode"] = r.threads > 1 ? "parallel" : "sequential";
    auto& rows = j["metrics"];
    rows = nlohmann::ordered_json::array();
    for (const auto& m : r.per_k) rows.push_back({{"k", m.k}, {"precision", m.precision}, {"recall", m.recall}});
    return j;
}

inline std::string report_to_text(const EvalReport& r) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "queries: %zu   columns profiled: %zu   mode: %s (%u thread%s)\n", r.queries, r.columns_profiled,
                  r.threads > 1 ? "parallel" : "sequential", r.threads, r.threads == 1 ? "" : "s");
    out += line;
    std::snprintf(line, sizeof line, "preparation: %.3f s   query mean: %.6f s   query max: %.6f s\n", r.preparation_seconds,
                  r.query_seconds_mean, r.query_seconds_max);
    out += line;
    std::snprintf(line, sizeof line, "profiles: %zu bytes   lake: %zu bytes   ratio: %.4f%%\n\n", r.profile_bytes, r.lake_bytes,
                  100.0 * r.profile_ratio);
    out += line;
    out += "    k  precision     recall\n";
    for (const auto& m : r.per_k) {
        std::snprintf(line, sizeof line, "%5zu  %9.4f  %9.4f\n", m.k, m.precision, m.recall);
        out += line;
    }
    return out;
}

inline std::string report_to_csv(const EvalReport& r) {
    std::string out = "k,precision,recall\n";
    char line[96];
    for (const auto& m : r.per_k) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", m.k, m.precision, m.recall);
        out += line;
    }
    return out;
}

} // namespace lakescout
