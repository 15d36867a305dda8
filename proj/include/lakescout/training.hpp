#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lakescout/catalog.hpp"
#include "lakescout/detail/random.hpp"
#include "lakescout/join_metric.hpp"
#include "lakescout/model.hpp"
#include "lakescout/profile_store.hpp"

namespace lakescout {

struct TrainingPair {
    ColumnRef column_a;
    ColumnRef column_b;
    ColumnProfile profile_a; // normalized
    ColumnProfile profile_b; // normalized
    JoinMeasures measures;
    double target = 0;
};

struct SamplingConfig {
    std::size_t max_pairs = 6000;
    // Share of the sample reserved for pairs with no value overlap.
    double negative_fraction = 0.4;
    // Column-with-itself pairs added per sampled pair. They pin the zero distance
    // vector to the self-join quality, so exact duplicates score highest.
    double identity_fraction = 0.02;
    bool include_same_dataset = false;
    QualityParams quality = with_strictness({}, QualityParams::kBalanced);
    std::uint64_t seed = 42;
    unsigned threads = detail::default_threads();
};

// Frequency tables of selected columns, loaded one dataset at a time.
class ValueStore {
public:
    ValueStore() = default;

    ValueStore(const Catalog& catalog, const std::vector<ColumnRef>& wanted, unsigned threads = detail::default_threads()) {
        std::map<std::string, std::vector<ColumnRef>> by_dataset;
        for (const auto& c : wanted) by_dataset[c.dataset_id].push_back(catalog.column(c.dataset_id, c.column_name));
        std::vector<std::pair<std::string, std::vector<ColumnRef>>> jobs(by_dataset.begin(), by_dataset.end());
        std::vector<std::vector<std::pair<ColumnRef, FrequencyTable>>> loaded(jobs.size());
        detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
            const auto values = read_dataset(catalog, jobs[i].first);
            for (const auto& col : jobs[i].second) loaded[i].emplace_back(col, FrequencyTable(values.at(col.position)));
        });
        for (auto& part : loaded) {
            for (auto& [col, table] : part) tables_.emplace(std::move(col), std::move(table));
        }
    }

    const FrequencyTable& at(const ColumnRef& col) const {
        const auto it = tables_.find(col);
        if (it == tables_.end()) throw NotFoundError("values of column '" + to_string(col) + "' not loaded");
        return it->second;
    }

    bool contains(const ColumnRef& col) const { return tables_.count(col) > 0; }
    std::size_t size() const { return tables_.size(); }

private:
    std::map<ColumnRef, FrequencyTable> tables_;
};

// Samples textual column pairs, labels each with the exact continuous quality
// and keeps their normalized profiles. Negatives (no shared value) fill
// `negative_fraction` of the sample when the lake has enough of them; the rest
// are overlapping pairs, topped up with negatives if overlaps run short.
inline std::vector<TrainingPair> make_training_set(const Catalog& catalog, const std::vector<ProfiledColumn>& profiles,
                                                   const NormalizationStats& stats, const SamplingConfig& sampling = {}) {
    std::vector<const ProfiledColumn*> eligible;
    for (const auto& pc : profiles) {
        if (pc.first.kind == ColumnKind::textual) eligible.push_back(&pc);
    }
    if (eligible.size() < 2) throw InvalidArgument("training needs at least 2 textual columns");

    std::vector<ColumnRef> refs;
    for (const auto* pc : eligible) refs.push_back(pc->first);
    const ValueStore store(catalog, refs, sampling.threads);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
    for (std::uint32_t a = 0; a < eligible.size(); ++a) {
        for (std::uint32_t b = a + 1; b < eligible.size(); ++b) {
            if (!sampling.include_same_dataset && eligible[a]->first.dataset_id == eligible[b]->first.dataset_id) continue;
            candidates.emplace_back(a, b);
        }
    }
    detail::Rng rng(sampling.seed);
    rng.shuffle(candidates);

    const auto negative_quota = static_cast<std::size_t>(std::ceil(sampling.negative_fraction * static_cast<double>(sampling.max_pairs)));
    const std::size_t positive_quota = sampling.max_pairs - std::min(negative_quota, sampling.max_pairs);

    struct Labeled {
        std::size_t order;
        std::uint32_t a, b;
        JoinMeasures m;
    };
    std::vector<Labeled> positives, negatives;
    std::vector<JoinMeasures> measures(candidates.size());
    detail::parallel_for(candidates.size(), sampling.threads, [&](std::size_t i) {
        measures[i] = join_measures(store.at(eligible[candidates[i].first]->first), store.at(eligible[candidates[i].second]->first));
    });
    std::vector<Labeled> spare_negatives;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Labeled l{i, candidates[i].first, candidates[i].second, measures[i]};
        if (l.m.j > 0.0) {
            if (positives.size() < positive_quota) positives.push_back(l);
        } else if (negatives.size() < negative_quota) {
            negatives.push_back(l);
        } else if (spare_negatives.size() < sampling.max_pairs) {
            spare_negatives.push_back(l);
        }
    }
    for (const auto& l : spare_negatives) {
        if (positives.size() + negatives.size() >= sampling.max_pairs) break;
        negatives.push_back(l);
    }

    std::vector<Labeled> chosen(positives);
    chosen.insert(chosen.end(), negatives.begin(), negatives.end());
    std::sort(chosen.begin(), chosen.end(), [](const Labeled& x, const Labeled& y) { return x.order < y.order; });

    std::vector<ColumnProfile> normalized;
    normalized.reserve(eligible.size());
    for (const auto* pc : eligible) normalized.push_back(normalize(pc->second, stats));

    std::vector<TrainingPair> out;
    out.reserve(chosen.size());
    for (const auto& l : chosen) {
        out.push_back({eligible[l.a]->first, eligible[l.b]->first, normalized[l.a], normalized[l.b], l.m,
                       continuous_quality(l.m, sampling.quality)});
    }

    const auto identity_count = std::min(
        eligible.size(), static_cast<std::size_t>(std::floor(sampling.identity_fraction * static_cast<double>(chosen.size()))));
    std::vector<std::uint32_t> order(eligible.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    rng.shuffle(order);
    const JoinMeasures self{0.5, 1.0};
    for (std::size_t i = 0; i < identity_count; ++i) {
        const auto c = order[i];
        out.push_back({eligible[c]->first, eligible[c]->first, normalized[c], normalized[c], self, continuous_quality(self, sampling.quality)});
    }
    return out;
}

// Deterministic train / held-out partition. Column-with-itself pairs always train.
inline std::pair<std::vector<TrainingPair>, std::vector<TrainingPair>> split_holdout(const std::vector<TrainingPair>& pairs,
                                                                                     double holdout_fraction, std::uint64_t seed) {
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    detail::Rng rng(detail::mix_seed(seed, 7));
    rng.shuffle(idx);
    const auto cross = static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [](const TrainingPair& p) { return !(p.column_a == p.column_b); }));
    const auto held = static_cast<std::size_t>(std::round(holdout_fraction * static_cast<double>(cross)));
    std::vector<TrainingPair> train, holdout;
    std::size_t taken = 0;
    for (const std::size_t i : idx) {
        const bool identity = pairs[i].column_a == pairs[i].column_b;
        if (!identity && taken < held) {
            holdout.push_back(pairs[i]);
            ++taken;
        } else {
            train.push_back(pairs[i]);
        }
    }
    return {std::move(train), std::move(holdout)};
}

inline constexpr std::size_t kMinTrainingPairs = 100;

inline Regressor train(const std::vector<TrainingPair>& pairs, const RegressorConfig& cfg = {}) {
    if (pairs.size() < kMinTrainingPairs) {
        throw InvalidArgument("training needs at least " + std::to_string(kMinTrainingPairs) + " pairs, got " +
                              std::to_string(pairs.size()));
    }
    std::vector<DistanceVector> rows;
    std::vector<double> targets;
    rows.reserve(pairs.size());
    targets.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (!(p.target >= 0.0 && p.target <= 1.0)) throw InvalidArgument("target of pair " + std::to_string(i) + " outside [0, 1]");
        rows.push_back(distance_vector(p.profile_a, p.profile_b));
        for (const double v : rows.back()) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("pair " + std::to_string(i) + " (" + to_string(p.column_a) + ", " + to_string(p.column_b) +
                                      ") has a non-finite feature");
            }
        }
        targets.push_back(p.target);
    }
    return fit_regressor(rows, targets, cfg);
}

// Average ranks (1-based); tied values share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two equally sized samples of 2+ values");
    return pearson(average_ranks(x), average_ranks(y));
}

// Spearman correlation between model predictions and exact targets.
inline double prediction_fidelity(const Regressor& model, const std::vector<TrainingPair>& pairs) {
    std::vector<double> predicted, exact;
    for (const auto& p : pairs) {
        predicted.push_back(model.predict(distance_vector(p.profile_a, p.profile_b)));
        exact.push_back(p.target);
    }
    return spearman(predicted, exact);
}

} // namespace lakescout
