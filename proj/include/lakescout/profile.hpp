#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/catalog.hpp"
#include "lakescout/error.hpp"

namespace lakescout {

inline constexpr std::size_t kOctileCount = 7;
inline constexpr std::size_t kFrequentWordCount = 10;

// Meta-features summarising one column. Raw values straight out of
// compute_profile(); normalize() rewrites the Z-scored subset in place.
struct ColumnProfile {
    double cardinality = 0;
    double uniqueness = 0;
    double entropy = 0;
    double min_frequency = 0;
    double max_frequency = 0;
    std::array<double, kOctileCount> octiles{};
    double max_perc_frequency = 0;
    double sd_perc_frequency = 0;
    std::vector<std::string> frequent_words;
    double longest_string = 0;
    double shortest_string = 0;
    double avg_string = 0;
    double avg_words = 0;
    double min_words = 0;
    double max_words = 0;
    double sd_words = 0;
    std::string first_word;

    friend bool operator==(const ColumnProfile&, const ColumnProfile&) = default;
};

struct ScalarFeature {
    std::string_view name;
    double ColumnProfile::*member;
    bool normalized;
};

// Scalar features in the fixed order used by distance vectors and the JSON schema.
inline constexpr std::array<ScalarFeature, 14> kScalarFeatures{{
    {"cardinality", &ColumnProfile::cardinality, true},
    {"uniqueness", &ColumnProfile::uniqueness, false},
    {"entropy", &ColumnProfile::entropy, true},
    {"min_frequency", &ColumnProfile::min_frequency, true},
    {"max_frequency", &ColumnProfile::max_frequency, true},
    {"max_perc_frequency", &ColumnProfile::max_perc_frequency, false},
    {"sd_perc_frequency", &ColumnProfile::sd_perc_frequency, false},
    {"longest_string", &ColumnProfile::longest_string, true},
    {"shortest_string", &ColumnProfile::shortest_string, true},
    {"avg_string", &ColumnProfile::avg_string, true},
    {"avg_words", &ColumnProfile::avg_words, true},
    {"min_words", &ColumnProfile::min_words, true},
    {"max_words", &ColumnProfile::max_words, true},
    {"sd_words", &ColumnProfile::sd_words, true},
}};

// Lowercase ASCII words; any byte that is not an ASCII letter or digit
// separates words, except bytes >= 0x80 which are kept so UTF-8 letters are
// not torn apart.
template <typename Fn>
void for_each_word(std::string_view text, Fn&& fn) {
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            fn(std::string_view(word));
            word.clear();
        }
    };
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
            word.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            word.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            flush();
        }
    }
    flush();
}

inline std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> words;
    for_each_word(text, [&](std::string_view w) { words.emplace_back(w); });
    return words;
}

// Number of UTF-8 code points.
inline std::size_t character_length(std::string_view s) {
    std::size_t n = 0;
    for (const char ch : s) n += (static_cast<unsigned char>(ch) & 0xC0) != 0x80 ? 1 : 0;
    return n;
}

// Nearest-rank quantile of an ascending sequence.
inline double nearest_rank(const std::vector<double>& ascending, std::size_t numerator, std::size_t denominator) {
    const std::size_t n = ascending.size();
    const std::size_t rank = std::max<std::size_t>(1, (numerator * n + denominator - 1) / denominator);
    return ascending[rank - 1];
}

inline ColumnProfile compute_profile(const ColumnValues& values) {
    if (values.cells.empty()) throw EmptyColumnError("cannot profile an empty column");

    std::unordered_map<std::string_view, std::size_t> counts;
    counts.reserve(values.distinct_count ? values.distinct_count : values.cells.size());
    for (const auto& cell : values.cells) ++counts[cell];

    // Iterate distinct values in a fixed order so floating-point sums do not
    // depend on the order of the input cells.
    std::vector<std::pair<std::string_view, std::size_t>> distinct(counts.begin(), counts.end());
    std::sort(distinct.begin(), distinct.end());

    const auto total = static_cast<double>(values.cells.size());
    ColumnProfile p;
    p.cardinality = static_cast<double>(distinct.size());
    p.uniqueness = p.cardinality / total;

    std::vector<double> percentages;
    percentages.reserve(distinct.size());
    std::vector<std::size_t> word_counts;
    word_counts.reserve(distinct.size());
    std::unordered_map<std::string, std::size_t> word_frequency;

    std::size_t min_count = std::numeric_limits<std::size_t>::max();
    std::size_t max_count = 0;
    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    std::size_t max_len = 0;
    std::size_t min_wc = std::numeric_limits<std::size_t>::max();
    std::size_t max_wc = 0;
    double len_sum = 0;
    double wc_sum = 0;
    bool have_word = false;

    for (const auto& [value, count] : distinct) {
        const auto c = static_cast<double>(count);
        const double prob = c / total;
        p.entropy -= prob * std::log2(prob);
        percentages.push_back(prob * 100.0);
        min_count = std::min(min_count, count);
        max_count = std::max(max_count, count);

        const std::size_t len = character_length(value);
        min_len = std::min(min_len, len);
        max_len = std::max(max_len, len);
        len_sum += static_cast<double>(len) * c;

        std::size_t wc = 0;
        for_each_word(value, [&](std::string_view w) {
            ++wc;
            word_frequency[std::string(w)] += count;
            if (!have_word || w < p.first_word) {
                p.first_word = std::string(w);
                have_word = true;
            }
        });
        word_counts.push_back(wc);
        min_wc = std::min(min_wc, wc);
        max_wc = std::max(max_wc, wc);
        wc_sum += static_cast<double>(wc) * c;
    }
    if (p.entropy < 0) p.entropy = 0; // -0.0 for a single value

    p.min_frequency = static_cast<double>(min_count);
    p.max_frequency = static_cast<double>(max_count);
    p.max_perc_frequency = static_cast<double>(max_count) / total * 100.0;

    double perc_mean = 0;
    for (const double v : percentages) perc_mean += v;
    perc_mean /= static_cast<double>(percentages.size());
    double perc_var = 0;
    for (const double v : percentages) perc_var += (v - perc_mean) * (v - perc_mean);
    p.sd_perc_frequency = std::sqrt(perc_var / static_cast<double>(percentages.size()));

    std::sort(percentages.begin(), percentages.end());
    for (std::size_t i = 0; i < kOctileCount; ++i) p.octiles[i] = nearest_rank(percentages, i + 1, 8);

    p.longest_string = static_cast<double>(max_len);
    p.shortest_string = static_cast<double>(min_len);
    p.avg_string = len_sum / total;

    p.avg_words = wc_sum / total;
    p.min_words = static_cast<double>(min_wc);
    p.max_words = static_cast<double>(max_wc);
    double wc_var = 0;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        const double d = static_cast<double>(word_counts[i]) - p.avg_words;
        wc_var += d * d * static_cast<double>(distinct[i].second);
    }
    p.sd_words = std::sqrt(wc_var / total);

    std::vector<std::pair<std::string, std::size_t>> words(word_frequency.begin(), word_frequency.end());
    const std::size_t keep = std::min(kFrequentWordCount, words.size());
    std::partial_sort(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(keep), words.end(),
                      [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    for (std::size_t i = 0; i < keep; ++i) p.frequent_words.push_back(std::move(words[i].first));
    return p;
}

// ---------------------------------------------------------------------------
// Lake-wide Z-score statistics
// ---------------------------------------------------------------------------

struct FeatureStats {
    double mean = 0;
    double std = 0;
    bool constant = false;

    friend bool operator==(const FeatureStats&, const FeatureStats&) = default;
};

struct NormalizationStats {
    std::map<std::string, FeatureStats, std::less<>> features;
    std::size_t profile_count = 0;

    const FeatureStats& at(std::string_view name) const {
        const auto it = features.find(name);
        if (it == features.end()) throw FormatError("normalization stats lack feature '" + std::string(name) + "'");
        return it->second;
    }

    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

inline NormalizationStats compute_normalization_stats(const std::vector<ColumnProfile>& profiles) {
    if (profiles.size() < 2) throw InvalidArgument("normalization needs at least 2 profiles");
    NormalizationStats stats;
    stats.profile_count = profiles.size();
    const auto n = static_cast<double>(profiles.size());
    for (const auto& f : kScalarFeatures) {
        if (!f.normalized) continue;
        FeatureStats s;
        double lo = profiles.front().*f.member;
        double hi = lo;
        for (const auto& p : profiles) {
            s.mean += p.*f.member;
            lo = std::min(lo, p.*f.member);
            hi = std::max(hi, p.*f.member);
        }
        s.mean /= n;
        if (lo == hi) {
            s.mean = lo;
            s.constant = true;
        } else {
            double var = 0;
            for (const auto& p : profiles) var += (p.*f.member - s.mean) * (p.*f.member - s.mean);
            s.std = std::sqrt(var / n);
        }
        stats.features.emplace(std::string(f.name), s);
    }
    return stats;
}

inline ColumnProfile normalize(ColumnProfile profile, const NormalizationStats& stats) {
    for (const auto& f : kScalarFeatures) {
        if (!f.normalized) continue;
        const FeatureStats& s = stats.at(f.name);
        double& x = profile.*f.member;
        x = s.constant ? 0.0 : (x - s.mean) / s.std;
    }
    return profile;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json profile_to_json(const ColumnProfile& p) {
    nlohmann::ordered_json j;
    j["cardinality"] = p.cardinality;
    j["uniqueness"] = p.uniqueness;
    j["entropy"] = p.entropy;
    j["min_frequency"] = p.min_frequency;
    j["max_frequency"] = p.max_frequency;
    j["octiles"] = p.octiles;
    j["max_perc_frequency"] = p.max_perc_frequency;
    j["sd_perc_frequency"] = p.sd_perc_frequency;
    j["frequent_words"] = p.frequent_words;
    j["longest_string"] = p.longest_string;
    j["shortest_string"] = p.shortest_string;
    j["avg_string"] = p.avg_string;
    j["avg_words"] = p.avg_words;
    j["min_words"] = p.min_words;
    j["max_words"] = p.max_words;
    j["sd_words"] = p.sd_words;
    j["first_word"] = p.first_word;
    return j;
}

template <typename Json>
ColumnProfile profile_from_json(const Json& j) {
    ColumnProfile p;
    for (const auto& f : kScalarFeatures) p.*f.member = j.at(std::string(f.name)).template get<double>();
    const auto& oct = j.at("octiles");
    if (!oct.is_array() || oct.size() != kOctileCount) throw FormatError("profile 'octiles' must hold 7 values");
    for (std::size_t i = 0; i < kOctileCount; ++i) p.octiles[i] = oct[i].template get<double>();
    p.frequent_words = j.at("frequent_words").template get<std::vector<std::string>>();
    if (p.frequent_words.size() > kFrequentWordCount) throw FormatError("profile lists more than 10 frequent words");
    p.first_word = j.at("first_word").template get<std::string>();
    return p;
}

inline nlohmann::ordered_json stats_to_json(const NormalizationStats& stats) {
    nlohmann::ordered_json j;
    j["profile_count"] = stats.profile_count;
    auto& features = j["features"];
    features = nlohmann::ordered_json::object();
    for (const auto& f : kScalarFeatures) {
        if (!f.normalized) continue;
        const auto& s = stats.at(f.name);
        features[std::string(f.name)] = {{"mean", s.mean}, {"std", s.std}, {"constant", s.constant}};
    }
    return j;
}

template <typename Json>
NormalizationStats stats_from_json(const Json& j) {
    NormalizationStats stats;
    stats.profile_count = j.at("profile_count").template get<std::size_t>();
    const auto& features = j.at("features");
    for (const auto& f : kScalarFeatures) {
        if (!f.normalized) continue;
        const auto& e = features.at(std::string(f.name));
        stats.features.emplace(std::string(f.name),
                               FeatureStats{e.at("mean").template get<double>(), e.at("std").template get<double>(),
                                            e.at("constant").template get<bool>()});
    }
    return stats;
}

} // namespace lakescout
