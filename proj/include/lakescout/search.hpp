#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/catalog.hpp"
#include "lakescout/detail/parallel.hpp"
#include "lakescout/join_metric.hpp"
#include "lakescout/model.hpp"
#include "lakescout/profile_store.hpp"
#include "lakescout/training.hpp"

namespace lakescout {

struct QuerySpec {
    ColumnRef query;
    std::size_t k = 10;
    bool textual_only = true;
    bool exclude_same_dataset = true;
};

struct RankedJoin {
    ColumnRef candidate;
    double score = 0;
};

using Ranking = std::vector<RankedJoin>;

// Normalized profiles of a lake, ready for query-time scanning.
class ProfileIndex {
public:
    ProfileIndex() = default;

    ProfileIndex(const std::vector<ProfiledColumn>& raw, const NormalizationStats& stats) {
        entries_.reserve(raw.size());
        for (const auto& [col, profile] : raw) entries_.emplace_back(col, normalize(profile, stats));
        for (std::size_t i = 0; i < entries_.size(); ++i) lookup_.emplace(entries_[i].first, i);
    }

    const std::vector<ProfiledColumn>& entries() const { return entries_; }

    const ProfiledColumn& find(const ColumnRef& col) const {
        const auto it = lookup_.find(col);
        if (it == lookup_.end()) throw NotFoundError("no profile for column '" + to_string(col) + "'");
        return entries_[it->second];
    }

private:
    std::vector<ProfiledColumn> entries_;
    std::map<ColumnRef, std::size_t> lookup_;
};

inline bool is_candidate(const QuerySpec& spec, const ColumnRef& query, const ColumnRef& col) {
    if (col == query) return false;
    if (spec.textual_only && col.kind != ColumnKind::textual) return false;
    if (spec.exclude_same_dataset && col.dataset_id == query.dataset_id) return false;
    return true;
}

// Scores descending; equal scores ordered by (dataset_id, column_name).
inline void sort_and_truncate(Ranking& ranking, std::size_t k) {
    std::sort(ranking.begin(), ranking.end(), [](const RankedJoin& a, const RankedJoin& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.candidate < b.candidate;
    });
    if (ranking.size() > k) ranking.resize(k);
}

// Predicted-quality ranking: one model evaluation per candidate profile, no raw data.
inline Ranking rank(const QuerySpec& spec, const ProfileIndex& index, const Regressor& model,
                    unsigned threads = detail::default_threads()) {
    if (spec.k < 1) throw InvalidArgument("k must be at least 1");
    const auto& [query, query_profile] = index.find(spec.query);
    const auto& entries = index.entries();
    std::vector<const ProfiledColumn*> candidates;
    for (const auto& e : entries) {
        if (is_candidate(spec, query, e.first)) candidates.push_back(&e);
    }
    Ranking ranking(candidates.size());
    const std::size_t chunk = 1024;
    detail::parallel_for((candidates.size() + chunk - 1) / chunk, threads, [&](std::size_t c) {
        const std::size_t end = std::min(candidates.size(), (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            ranking[i] = {candidates[i]->first, model.predict(distance_vector(query_profile, candidates[i]->second))};
        }
    });
    sort_and_truncate(ranking, spec.k);
    return ranking;
}

inline Ranking rank(const QuerySpec& spec, const std::vector<ProfiledColumn>& profiles, const NormalizationStats& stats,
                    const Regressor& model, unsigned threads = detail::default_threads()) {
    return rank(spec, ProfileIndex(profiles, stats), model, threads);
}

// Exact-quality ranking from raw values; `store` must hold the query and every candidate.
inline Ranking rank_exact(const QuerySpec& spec, const Catalog& catalog, const ValueStore& store, const QualityParams& params) {
    if (spec.k < 1) throw InvalidArgument("k must be at least 1");
    const ColumnRef& query = catalog.column(spec.query.dataset_id, spec.query.column_name);
    const FrequencyTable& q = store.at(query);
    if (q.empty()) throw EmptyColumnError("query column '" + to_string(query) + "' contains only nulls");
    Ranking ranking;
    for (const auto& col : catalog.columns()) {
        if (!is_candidate(spec, query, col) || !store.contains(col)) continue;
        const FrequencyTable& c = store.at(col);
        if (c.empty()) continue;
        ranking.push_back({col, continuous_quality(join_measures(q, c), params)});
    }
    sort_and_truncate(ranking, spec.k);
    return ranking;
}

inline Ranking rank_exact(const QuerySpec& spec, const Catalog& catalog, const QualityParams& params,
                          unsigned threads = detail::default_threads()) {
    const ColumnRef& query = catalog.column(spec.query.dataset_id, spec.query.column_name);
    std::vector<ColumnRef> wanted{query};
    for (const auto& col : catalog.columns()) {
        if (is_candidate(spec, query, col)) wanted.push_back(col);
    }
    return rank_exact(spec, catalog, ValueStore(catalog, wanted, threads), params);
}

inline nlohmann::ordered_json ranking_to_json(const Ranking& ranking) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        nlohmann::ordered_json row;
        row["rank"] = i + 1;
        row["dataset"] = ranking[i].candidate.dataset_id;
        row["column"] = ranking[i].candidate.column_name;
        row["score"] = ranking[i].score;
        out.push_back(std::move(row));
    }
    return out;
}

// Size of the intersection of the two rankings' candidate sets.
inline std::size_t top_k_overlap(const Ranking& a, const Ranking& b) {
    std::size_t shared = 0;
    for (const auto& x : a) {
        shared += std::any_of(b.begin(), b.end(), [&](const RankedJoin& y) { return y.candidate == x.candidate; }) ? 1 : 0;
    }
    return shared;
}

} // namespace lakescout
