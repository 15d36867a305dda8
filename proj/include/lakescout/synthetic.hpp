#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lakescout/csv.hpp"
#include "lakescout/detail/parallel.hpp"
#include "lakescout/detail/random.hpp"
#include "lakescout/error.hpp"
#include "lakescout/ground_truth.hpp"
#include "lakescout/profile_store.hpp"

namespace lakescout {

// Target measures for one planted semantic pair (equal-granularity columns of one domain).
struct OverlapTarget {
    double j = 0.25;
    double k = 1.0;
};

struct SyntheticLakeConfig {
    std::size_t n_files = 10;
    std::size_t file_size_bytes = 1 << 20;
    // Vocabulary pools: independent value domains plus two shared code pools
    // that produce value collisions across unrelated columns.
    std::size_t n_domains = 16;
    std::size_t domain_vocabulary = 3000;
    std::size_t code_pool_size = 4000;
    std::size_t status_pool_size = 6;
    std::size_t textual_columns_per_file = 4;
    std::size_t numeric_columns_per_file = 2;
    // Distinct values of a bulk textual column as a share of its rows (log-uniform).
    double min_cardinality_share = 0.02;
    double max_cardinality_share = 0.5;
    std::vector<OverlapTarget> overlap_schedule = {
        {0.20, 0.80}, {0.25, 1.00}, {0.30, 0.90}, {0.35, 1.00}, {0.40, 0.95}, {0.45, 1.00},
        {0.20, 1.00}, {0.25, 0.85}, {0.30, 1.00}, {0.35, 0.90}, {0.40, 1.00}, {0.45, 0.95},
    };
    // Small-in-large pairs from the code pool (full containment, low multiset overlap).
    std::size_t containment_decoys = 6;
    // Pairs over the tiny status pool with opposite skew (same distinct set, low multiset overlap).
    std::size_t jaccard_decoys = 6;
    unsigned threads = detail::default_threads();
    std::uint64_t seed = 7;
};

// Lake used for model training and fidelity checks: 64 x 256 KiB files, ~300 textual columns.
inline SyntheticLakeConfig reference_lake_config() {
    SyntheticLakeConfig cfg;
    cfg.n_files = 64;
    cfg.n_domains = 12;
    cfg.file_size_bytes = 256 * 1024;
    cfg.seed = 2024;
    return cfg;
}

struct PlantedPairReport {
    GroundTruthEntry entry;
    OverlapTarget target;
    double measured_j = 0;
    double measured_k = 0;
};

struct SyntheticLake {
    std::filesystem::path lake_dir;
    std::vector<std::filesystem::path> files;
    std::vector<std::size_t> file_bytes;
    std::vector<GroundTruthEntry> truth;
    std::vector<PlantedPairReport> planted;
};

namespace detail {

inline std::string pseudo_word(Rng& rng, std::size_t length) {
    static constexpr std::string_view consonants = "bcdfghjklmnprstvwz";
    static constexpr std::string_view vowels = "aeiou";
    std::string w;
    bool vowel = rng.chance(0.3);
    for (std::size_t i = 0; i < length; ++i) {
        const auto& set = vowel ? vowels : consonants;
        w.push_back(set[rng.index(set.size())]);
        vowel = !vowel;
    }
    return w;
}

inline std::string styled(std::string word, int style) {
    if (style == 1 && !word.empty()) word[0] = static_cast<char>(word[0] - 'a' + 'A');
    if (style == 2) {
        for (auto& c : word) {
            if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        }
    }
    return word;
}

struct ValueDomain {
    std::string name;
    std::vector<std::string> values; // popularity order
};

struct Pools {
    std::vector<ValueDomain> domains;
    std::vector<std::string> codes;
    std::vector<std::string> statuses;
};

inline std::string unique_word(Rng& rng, std::unordered_set<std::string>& used, std::size_t min_len, std::size_t max_len) {
    for (;;) {
        std::string w = pseudo_word(rng, static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len))));
        if (used.insert(w).second) return w;
    }
}

inline Pools build_pools(const SyntheticLakeConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 1));
    std::unordered_set<std::string> used;
    Pools pools;
    for (std::size_t d = 0; d < cfg.n_domains; ++d) {
        ValueDomain domain;
        domain.name = unique_word(rng, used, 5, 8);
        // Values combine 2-3 words from a small per-domain lexicon, so columns of
        // one domain share their most frequent words.
        const auto words_per_value = static_cast<std::size_t>(rng.between(2, 3));
        const auto base_len = static_cast<std::size_t>(rng.between(4, 9));
        const int style = static_cast<int>(rng.index(3));
        const char separator = " -_"[rng.index(3)];
        std::vector<std::string> lexicon;
        const std::size_t lexicon_size = words_per_value == 2 ? 90 : 30;
        for (std::size_t i = 0; i < lexicon_size; ++i) lexicon.push_back(unique_word(rng, used, std::max<std::size_t>(3, base_len - 1), base_len + 2));
        std::unordered_set<std::string> seen;
        std::size_t attempts = 0;
        while (domain.values.size() < cfg.domain_vocabulary && attempts++ < cfg.domain_vocabulary * 50) {
            std::string value;
            for (std::size_t w = 0; w < words_per_value; ++w) {
                if (w) value.push_back(separator);
                value += styled(lexicon[rng.index(lexicon.size())], style);
            }
            if (seen.insert(value).second) domain.values.push_back(std::move(value));
        }
        pools.domains.push_back(std::move(domain));
    }
    static constexpr std::string_view upper = "ABCDEFGHJKLMNPQRSTUVWXYZ";
    std::unordered_set<std::string> codes;
    while (pools.codes.size() < cfg.code_pool_size) {
        std::string code;
        for (int i = 0; i < 3; ++i) code.push_back(upper[rng.index(upper.size())]);
        code.push_back(static_cast<char>('0' + rng.index(10)));
        if (codes.insert(code).second) pools.codes.push_back(std::move(code));
    }
    for (std::size_t i = 0; i < cfg.status_pool_size; ++i) pools.statuses.push_back(unique_word(rng, used, 4, 7));
    return pools;
}

enum class ColumnSource { domain, code, status, row_id, measure };

struct ColumnPlan {
    std::string name;
    ColumnSource source = ColumnSource::domain;
    std::size_t domain = 0;
    // Distinct values: fixed count, or (when fixed == 0) a share of the row count.
    std::size_t fixed_cardinality = 0;
    double cardinality_share = 0;
    std::size_t offset = 0; // first value index within the pool
    double zipf = 0; // 0 = uniform frequencies
    std::size_t dominant = 0; // status columns: index of the skewed value
    std::size_t filled_rows = 0; // 0 = every row; otherwise the remaining cells stay empty (null)
};

struct FilePlan {
    std::string dataset;
    std::vector<ColumnPlan> columns;
};

inline const std::vector<std::string>& pool_values(const Pools& pools, const ColumnPlan& c) {
    switch (c.source) {
    case ColumnSource::domain: return pools.domains[c.domain].values;
    case ColumnSource::code: return pools.codes;
    case ColumnSource::status: return pools.statuses;
    default: break;
    }
    throw Error("column has no value pool");
}

inline std::size_t cardinality_for(const ColumnPlan& c, std::size_t rows, std::size_t pool_size) {
    std::size_t card = c.fixed_cardinality ? c.fixed_cardinality
                                           : static_cast<std::size_t>(std::llround(c.cardinality_share * static_cast<double>(rows)));
    card = std::max<std::size_t>(card, 2);
    card = std::min(card, rows);
    return std::min(card, pool_size - std::min(c.offset, pool_size));
}

// Largest-remainder apportionment of `rows` cells over `card` values, each value at least once.
inline std::vector<std::size_t> value_counts(const ColumnPlan& c, std::size_t rows, std::size_t card) {
    std::vector<std::size_t> counts(card, 1);
    if (rows <= card) return counts;
    std::vector<double> weight(card);
    if (c.source == ColumnSource::status) {
        for (std::size_t i = 0; i < card; ++i) weight[i] = i == c.dominant ? 0.85 : 0.15 / static_cast<double>(card - 1);
    } else {
        for (std::size_t i = 0; i < card; ++i) weight[i] = 1.0 / std::pow(static_cast<double>(i + 1), c.zipf);
    }
    const double total_weight = std::accumulate(weight.begin(), weight.end(), 0.0);
    const std::size_t extra = rows - card;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < card; ++i) {
        const double share = static_cast<double>(extra) * weight[i] / total_weight;
        const auto whole = static_cast<std::size_t>(std::floor(share));
        counts[i] += whole;
        assigned += whole;
        remainders.emplace_back(share - static_cast<double>(whole), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < extra; ++i, ++assigned) ++counts[remainders[i % card].second];
    return counts;
}

inline std::string format_measure(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::vector<std::string> column_cells(const ColumnPlan& c, std::size_t rows, const Pools& pools, Rng& rng) {
    std::vector<std::string> cells;
    cells.reserve(rows);
    if (c.source == ColumnSource::row_id) {
        for (std::size_t i = 0; i < rows; ++i) cells.push_back(std::to_string(i + 1));
        return cells;
    }
    if (c.source == ColumnSource::measure) {
        for (std::size_t i = 0; i < rows; ++i) cells.push_back(format_measure(rng.uniform(0.0, 10000.0)));
        return cells;
    }
    const auto& values = pool_values(pools, c);
    const std::size_t filled = c.filled_rows ? std::min(c.filled_rows, rows) : rows;
    const std::size_t card = cardinality_for(c, filled, values.size());
    const auto counts = value_counts(c, filled, card);
    for (std::size_t i = 0; i < card; ++i) cells.insert(cells.end(), counts[i], values[c.offset + i]);
    cells.resize(rows);
    rng.shuffle(cells);
    return cells;
}

inline std::string render_file(const FilePlan& plan, std::size_t rows, const Pools& pools, std::uint64_t seed) {
    std::vector<std::vector<std::string>> columns;
    for (std::size_t c = 0; c < plan.columns.size(); ++c) {
        Rng rng(mix_seed(seed, c));
        columns.push_back(column_cells(plan.columns[c], rows, pools, rng));
    }
    std::string out;
    std::vector<std::string> row;
    for (const auto& c : plan.columns) row.push_back(c.name);
    csv::append_row(out, row);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) row[c] = std::move(columns[c][r]);
        csv::append_row(out, row);
    }
    return out;
}

// Row count that brings the rendered file within 1% of the byte target.
inline std::size_t size_rows(const FilePlan& plan, std::size_t target_bytes, const Pools& pools, std::uint64_t seed) {
    std::size_t rows = std::max<std::size_t>(16, target_bytes / 64);
    for (int iter = 0; iter < 10; ++iter) {
        const std::size_t bytes = render_file(plan, rows, pools, seed).size();
        const double ratio = static_cast<double>(target_bytes) / static_cast<double>(bytes);
        if (std::abs(ratio - 1.0) <= 0.01) break;
        rows = std::max<std::size_t>(16, static_cast<std::size_t>(std::llround(static_cast<double>(rows) * ratio)));
    }
    return rows;
}

} // namespace detail

// Writes `n_files` CSV datasets of roughly `file_size_bytes` each into `out_dir`
// and returns the planted ground truth. Identical configs give byte-identical lakes.
inline SyntheticLake generate_synthetic_lake(const SyntheticLakeConfig& cfg, const std::filesystem::path& out_dir) {
    using namespace detail;
    if (cfg.n_files < 1) throw InvalidArgument("synthetic lake needs at least one file");
    if (cfg.n_domains < 1 || cfg.domain_vocabulary < 16) throw InvalidArgument("synthetic lake needs value domains of 16+ values");
    if (cfg.status_pool_size < 2) throw InvalidArgument("status pool needs at least 2 values");
    if (!(cfg.min_cardinality_share > 0.0 && cfg.min_cardinality_share <= cfg.max_cardinality_share && cfg.max_cardinality_share <= 1.0)) {
        throw InvalidArgument("cardinality shares need 0 < min <= max <= 1");
    }
    const std::size_t pair_count = cfg.overlap_schedule.size() + cfg.containment_decoys + cfg.jaccard_decoys;
    if (pair_count > 0 && cfg.n_files < 2) throw InvalidArgument("planted pairs need at least 2 files");
    for (const auto& t : cfg.overlap_schedule) {
        // Equal-size uniform columns share at most min-multiplicity mass k/2.
        if (!(t.k > 0.0 && t.k <= 1.0) || !(t.j > 0.0 && t.j <= 0.5) || t.j > t.k / 2.0 + 1e-12) {
            throw InvalidArgument("infeasible overlap target J=" + std::to_string(t.j) + ", K=" + std::to_string(t.k) +
                                  " (need 0 < J <= K/2, 0 < K <= 1)");
        }
    }

    const Pools pools = build_pools(cfg);
    Rng rng(mix_seed(cfg.seed, 2));

    std::vector<FilePlan> plans(cfg.n_files);
    for (std::size_t f = 0; f < cfg.n_files; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "t%05zu", f);
        plans[f].dataset = name;
        if (cfg.numeric_columns_per_file > 0) plans[f].columns.push_back({"row_id", ColumnSource::row_id});
        for (std::size_t c = 0; c < cfg.textual_columns_per_file; ++c) {
            ColumnPlan col;
            col.source = ColumnSource::domain;
            col.domain = rng.index(cfg.n_domains);
            col.name = pools.domains[col.domain].name + "_" + std::to_string(c);
            col.cardinality_share = std::exp(rng.uniform(std::log(cfg.min_cardinality_share), std::log(cfg.max_cardinality_share)));
            col.zipf = rng.chance(0.5) ? 0.0 : rng.uniform(0.3, 1.2);
            plans[f].columns.push_back(col);
        }
        for (std::size_t c = 1; c < cfg.numeric_columns_per_file; ++c) {
            plans[f].columns.push_back({"measure_" + std::to_string(c), ColumnSource::measure});
        }
    }

    struct PlantedSlot {
        std::size_t file_a, col_a, file_b, col_b;
        JoinLabel label;
        OverlapTarget target;
    };
    std::vector<PlantedSlot> slots;
    auto pick_files = [&] {
        const std::size_t a = rng.index(cfg.n_files);
        std::size_t b = rng.index(cfg.n_files - 1);
        if (b >= a) ++b;
        return std::make_pair(a, b);
    };
    auto add_column = [&](std::size_t file, ColumnPlan col) {
        plans[file].columns.push_back(std::move(col));
        return plans[file].columns.size() - 1;
    };
    const double size_scale = static_cast<double>(cfg.file_size_bytes) / 100.0;
    for (std::size_t p = 0; p < cfg.overlap_schedule.size(); ++p) {
        const auto& t = cfg.overlap_schedule[p];
        const auto [fa, fb] = pick_files();
        ColumnPlan a;
        a.source = ColumnSource::domain;
        a.domain = rng.index(cfg.n_domains);
        const std::size_t vocab = pools.domains[a.domain].values.size();
        a.fixed_cardinality = std::min(vocab / 2, std::max<std::size_t>(20, static_cast<std::size_t>(rng.uniform(0.03, 0.12) * size_scale)));
        ColumnPlan b = a;
        b.fixed_cardinality = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(t.k * static_cast<double>(a.fixed_cardinality))));
        a.name = pools.domains[a.domain].name + "_pa" + std::to_string(p);
        b.name = pools.domains[a.domain].name + "_pb" + std::to_string(p);
        slots.push_back({fa, add_column(fa, a), fb, add_column(fb, b), JoinLabel::semantic, t});
    }
    for (std::size_t p = 0; p < cfg.containment_decoys; ++p) {
        const auto [fa, fb] = pick_files();
        ColumnPlan small;
        small.source = ColumnSource::code;
        small.fixed_cardinality = static_cast<std::size_t>(rng.between(8, 30));
        small.name = "code_small_" + std::to_string(p);
        ColumnPlan large = small;
        large.fixed_cardinality = std::min(cfg.code_pool_size, std::max<std::size_t>(200, static_cast<std::size_t>(0.25 * size_scale)));
        large.name = "code_large_" + std::to_string(p);
        slots.push_back({fa, add_column(fa, small), fb, add_column(fb, large), JoinLabel::syntactic, {}});
    }
    for (std::size_t p = 0; p < cfg.jaccard_decoys; ++p) {
        const auto [fa, fb] = pick_files();
        ColumnPlan x;
        x.source = ColumnSource::status;
        x.fixed_cardinality = cfg.status_pool_size;
        x.dominant = rng.index(cfg.status_pool_size);
        x.name = "status_x" + std::to_string(p);
        ColumnPlan y = x;
        y.dominant = (x.dominant + 1 + rng.index(cfg.status_pool_size - 1)) % cfg.status_pool_size;
        y.name = "status_y" + std::to_string(p);
        slots.push_back({fa, add_column(fa, x), fb, add_column(fb, y), JoinLabel::syntactic, {}});
    }

    std::vector<std::uint64_t> seeds(cfg.n_files);
    for (std::size_t f = 0; f < cfg.n_files; ++f) seeds[f] = mix_seed(cfg.seed, 1000 + f);
    std::vector<std::size_t> rows(cfg.n_files);
    parallel_for(cfg.n_files, cfg.threads, [&](std::size_t f) { rows[f] = size_rows(plans[f], cfg.file_size_bytes, pools, seeds[f]); });

    // Both sides of a semantic pair fill the same number of cells (a little under the
    // shorter file), so J up to K/2 stays reachable whatever the row counts. Nulls
    // only shrink a file, so re-sizing the affected files never drops below the fill.
    std::vector<bool> resize(cfg.n_files, false);
    for (const auto& s : slots) {
        if (s.label != JoinLabel::semantic) continue;
        const auto fill = static_cast<std::size_t>(0.97 * static_cast<double>(std::min(rows[s.file_a], rows[s.file_b])));
        plans[s.file_a].columns[s.col_a].filled_rows = fill;
        plans[s.file_b].columns[s.col_b].filled_rows = fill;
        resize[s.file_a] = resize[s.file_b] = true;
    }
    parallel_for(cfg.n_files, cfg.threads, [&](std::size_t f) {
        if (resize[f]) rows[f] = std::max(rows[f], size_rows(plans[f], cfg.file_size_bytes, pools, seeds[f]));
    });

    // Shift each planted B column so its shared prefix with A hits the target J exactly
    // for the realised cell counts.
    SyntheticLake lake;
    lake.lake_dir = out_dir;
    for (const auto& s : slots) {
        auto& a = plans[s.file_a].columns[s.col_a];
        auto& b = plans[s.file_b].columns[s.col_b];
        const std::size_t na = a.filled_rows ? a.filled_rows : rows[s.file_a];
        const std::size_t nb = b.filled_rows ? b.filled_rows : rows[s.file_b];
        const auto& values = pool_values(pools, a);
        const std::size_t ca = cardinality_for(a, na, values.size());
        const auto counts_a = value_counts(a, na, ca);
        if (s.label == JoinLabel::semantic) {
            b.fixed_cardinality = std::min(b.fixed_cardinality, values.size() - ca);
            const std::size_t cb = cardinality_for(b, nb, values.size());
            const auto counts_b = value_counts(b, nb, cb);
            std::size_t best_o = 0;
            double best_err = 1e9;
            for (std::size_t o = 0; o <= std::min(ca, cb); ++o) {
                std::size_t mass = 0;
                for (std::size_t i = 0; i < o; ++i) mass += std::min(counts_a[ca - o + i], counts_b[i]);
                const double err = std::abs(static_cast<double>(mass) / static_cast<double>(na + nb) - s.target.j);
                if (err < best_err) {
                    best_err = err;
                    best_o = o;
                }
            }
            b.offset = ca - best_o;
        }
        const std::size_t cb = cardinality_for(b, nb, pool_values(pools, b).size());
        const auto counts_b = value_counts(b, nb, cb);
        std::size_t mass = 0, shared = 0;
        for (std::size_t i = 0; i < ca; ++i) {
            const std::size_t v = a.offset + i;
            if (v >= b.offset && v < b.offset + cb) {
                mass += std::min(counts_a[i], counts_b[v - b.offset]);
                ++shared;
            }
        }
        PlantedPairReport report;
        report.entry = {{plans[s.file_a].dataset, a.name, s.col_a, ColumnKind::textual},
                        {plans[s.file_b].dataset, b.name, s.col_b, ColumnKind::textual},
                        s.label};
        report.target = s.target;
        report.measured_j = static_cast<double>(mass) / static_cast<double>(na + nb);
        report.measured_k = static_cast<double>(std::min(ca, cb)) / static_cast<double>(std::max(ca, cb));
        if (s.label == JoinLabel::semantic &&
            (std::abs(report.measured_j - s.target.j) > 0.05 || std::abs(report.measured_k - s.target.k) > 0.05)) {
            throw InvalidArgument("cannot realise overlap target J=" + std::to_string(s.target.j) + ", K=" + std::to_string(s.target.k) +
                                  " at this file size (got J=" + std::to_string(report.measured_j) +
                                  ", K=" + std::to_string(report.measured_k) + ")");
        }
        lake.truth.push_back(report.entry);
        lake.planted.push_back(std::move(report));
    }

    std::filesystem::create_directories(out_dir);
    lake.files.resize(cfg.n_files);
    lake.file_bytes.resize(cfg.n_files);
    parallel_for(cfg.n_files, cfg.threads, [&](std::size_t f) {
        const std::string content = render_file(plans[f], rows[f], pools, seeds[f]);
        lake.files[f] = out_dir / (plans[f].dataset + ".csv");
        lake.file_bytes[f] = content.size();
        write_text_file(lake.files[f], content);
    });
    return lake;
}

} // namespace lakescout
