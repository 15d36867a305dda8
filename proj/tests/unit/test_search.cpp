#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lakescout/search.hpp"
#include "lakescout/synthetic.hpp"
#include "test_util.hpp"

using namespace lakescout;
using testutil::TempDir;

namespace {

std::vector<std::string> cells(const std::string& prefix, int distinct, int each) {
    std::vector<std::string> out;
    for (int r = 0; r < each; ++r) {
        for (int i = 0; i < distinct; ++i) out.push_back(prefix + std::to_string(i));
    }
    return out;
}

// Model whose score falls with the sum of the distance components.
Regressor distance_decay_model() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<DistanceVector> rows(2000);
    std::vector<double> targets;
    for (auto& r : rows) {
        double s = 0;
        for (auto& x : r) s += (x = u(rng));
        targets.push_back(std::exp(-s / 8.0));
    }
    return fit_regressor(rows, targets, {});
}

Regressor constant_model(double c) {
    RegressorConfig cfg;
    cfg.n_trees = 1;
    RegressionTree t;
    t.nodes.push_back({-1, 0, -1, -1, 0.0});
    return Regressor(cfg, c, {t});
}

struct SmallLake {
    TempDir dir;
    Catalog catalog;
    std::vector<ProfiledColumn> profiles;
    NormalizationStats stats;

    void build() {
        IngestOptions o;
        o.warn = nullptr;
        catalog = ingest_directory(dir.path(), o);
        profiles = profile_catalog(catalog);
        stats = compute_normalization_stats(profiles);
    }
};

void two_column_file(const TempDir& dir, const std::string& name, const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::string text = "a,b\n";
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        text += (i < a.size() ? a[i] : "") + "," + (i < b.size() ? b[i] : "") + "\n";
    }
    testutil::write(dir / (name + ".csv"), text);
}

} // namespace

TEST(Rank, ScoresNonIncreasingAndEveryCandidateScored) {
    SmallLake lake;
    for (int f = 0; f < 8; ++f) two_column_file(lake.dir, "f" + std::to_string(f), cells("v", 10 + 5 * f, 3), cells("w", 40 - 3 * f, 2));
    lake.build();
    const auto model = distance_decay_model();
    QuerySpec spec;
    spec.query = {"f0", "a"};
    spec.k = 100;
    const auto ranking = rank(spec, lake.profiles, lake.stats, model);
    EXPECT_EQ(ranking.size(), 14u); // 16 textual columns minus the query's dataset
    for (std::size_t i = 1; i < ranking.size(); ++i) EXPECT_GE(ranking[i - 1].score, ranking[i].score);
    for (const auto& r : ranking) {
        EXPECT_NE(r.candidate.dataset_id, "f0");
        EXPECT_GE(r.score, 0.0);
        EXPECT_LE(r.score, 1.0);
    }
    spec.k = 5;
    const auto top5 = rank(spec, lake.profiles, lake.stats, model);
    ASSERT_EQ(top5.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(top5[i].candidate, ranking[i].candidate);
}

TEST(Rank, EqualProfilesTieBrokenByDatasetThenColumn) {
    SmallLake lake;
    two_column_file(lake.dir, "query", cells("q", 20, 2), cells("z", 7, 3));
    two_column_file(lake.dir, "beta", cells("x", 12, 2), cells("x", 12, 2));
    two_column_file(lake.dir, "alpha", cells("x", 12, 2), cells("y", 12, 2));
    lake.build();
    QuerySpec spec;
    spec.query = {"query", "a"};
    const auto ranking = rank(spec, lake.profiles, lake.stats, constant_model(0.3));
    ASSERT_EQ(ranking.size(), 4u);
    EXPECT_EQ(to_string(ranking[0].candidate), "alpha.a");
    EXPECT_EQ(to_string(ranking[1].candidate), "alpha.b");
    EXPECT_EQ(to_string(ranking[2].candidate), "beta.a");
    EXPECT_EQ(to_string(ranking[3].candidate), "beta.b");
}

TEST(Rank, FiltersAndEmptyResults) {
    SmallLake lake;
    testutil::write(lake.dir / "q.csv", "name,num\nx,1\ny,2\nz,3\n");
    testutil::write(lake.dir / "n.csv", "num\n1\n2\n");
    lake.build();
    const auto model = constant_model(0.5);
    QuerySpec spec;
    spec.query = {"q", "name"};
    EXPECT_TRUE(rank(spec, lake.profiles, lake.stats, model).empty());
    spec.textual_only = false;
    EXPECT_EQ(rank(spec, lake.profiles, lake.stats, model).size(), 1u);
    spec.exclude_same_dataset = false;
    EXPECT_EQ(rank(spec, lake.profiles, lake.stats, model).size(), 2u);
    spec.query = {"q", "missing"};
    EXPECT_THROW(rank(spec, lake.profiles, lake.stats, model), NotFoundError);
    spec.query = {"q", "name"};
    spec.k = 0;
    EXPECT_THROW(rank(spec, lake.profiles, lake.stats, model), InvalidArgument);
}

TEST(Rank, IdenticalAcrossThreadCounts) {
    SmallLake lake;
    for (int f = 0; f < 30; ++f) two_column_file(lake.dir, "f" + std::to_string(f), cells("v", 3 + f, 2 + f % 3), cells("w", 50 - f, 1));
    lake.build();
    const ProfileIndex index(lake.profiles, lake.stats);
    const auto model = distance_decay_model();
    QuerySpec spec;
    spec.query = {"f4", "b"};
    spec.k = 20;
    const auto a = rank(spec, index, model, 1);
    const auto b = rank(spec, index, model, 7);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].candidate, b[i].candidate);
        EXPECT_EQ(a[i].score, b[i].score);
    }
}

TEST(RankExact, DuplicateFirstWithSelfJoinScore) {
    SmallLake lake;
    two_column_file(lake.dir, "q", cells("v", 30, 3), cells("other", 5, 10));
    two_column_file(lake.dir, "dup", cells("v", 30, 3), cells("v", 20, 3));
    two_column_file(lake.dir, "half", cells("v", 15, 3), cells("u", 30, 3));
    lake.build();
    QuerySpec spec;
    spec.query = {"q", "a"};
    const QualityParams params = with_strictness({}, 0.25);
    const auto ranking = rank_exact(spec, lake.catalog, params);
    ASSERT_EQ(ranking.size(), 4u);
    EXPECT_EQ(to_string(ranking[0].candidate), "dup.a");
    EXPECT_DOUBLE_EQ(ranking[0].score, continuous_quality(0.5, 1.0, params));
    EXPECT_EQ(to_string(ranking[1].candidate), "dup.b");
    for (std::size_t i = 1; i < ranking.size(); ++i) EXPECT_GE(ranking[i - 1].score, ranking[i].score);
}

TEST(RankExact, DisjointLakeAllZeroLexicographic) {
    SmallLake lake;
    two_column_file(lake.dir, "q", cells("a", 5, 2), cells("b", 5, 2));
    two_column_file(lake.dir, "m", cells("c", 5, 2), cells("d", 5, 2));
    two_column_file(lake.dir, "e", cells("e", 5, 2), cells("f", 5, 2));
    lake.build();
    QuerySpec spec;
    spec.query = {"q", "a"};
    const auto ranking = rank_exact(spec, lake.catalog, QualityParams{});
    ASSERT_EQ(ranking.size(), 4u);
    for (const auto& r : ranking) EXPECT_EQ(r.score, 0.0);
    EXPECT_EQ(to_string(ranking[0].candidate), "e.a");
    EXPECT_EQ(to_string(ranking[1].candidate), "e.b");
    EXPECT_EQ(to_string(ranking[2].candidate), "m.a");
    EXPECT_EQ(to_string(ranking[3].candidate), "m.b");
}

TEST(RankExact, UnknownQueryNotFound) {
    SmallLake lake;
    two_column_file(lake.dir, "q", cells("a", 5, 2), cells("b", 5, 2));
    lake.build();
    QuerySpec spec;
    spec.query = {"q", "zz"};
    EXPECT_THROW(rank_exact(spec, lake.catalog, QualityParams{}), NotFoundError);
}

TEST(Rank, DuplicateRanksFirstOnReferenceLake) {
    TempDir dir;
    const auto lake = generate_synthetic_lake(reference_lake_config(), dir / "lake");
    IngestOptions quiet;
    quiet.warn = nullptr;
    Catalog catalog = ingest_directory(dir / "lake", quiet);
    ColumnRef query;
    for (const auto& c : catalog.columns()) {
        if (c.kind == ColumnKind::textual) {
            query = c;
            break;
        }
    }
    // Copy the query column into a new dataset.
    const auto values = read_column(catalog, query);
    std::string text = "copy\n";
    for (const auto& v : values.cells) {
        std::string row;
        csv::append_row(row, {v});
        text += row;
    }
    testutil::write(dir / "lake" / "zz_duplicate.csv", text);
    catalog = ingest_directory(dir / "lake", quiet);
    const auto profiles = profile_catalog(catalog);
    const auto stats = compute_normalization_stats(profiles);
    const auto pairs = make_training_set(catalog, profiles, stats, {});
    const auto model = train(pairs, {});

    QuerySpec spec;
    spec.query = query;
    const auto predicted = rank(spec, profiles, stats, model);
    const auto exact = rank_exact(spec, catalog, with_strictness({}, 0.25));
    EXPECT_EQ(to_string(exact.front().candidate), "zz_duplicate.copy");
    EXPECT_EQ(to_string(predicted.front().candidate), "zz_duplicate.copy");
    const auto dup = profiles.back();
    EXPECT_EQ(distance_vector(normalize(dup.second, stats), ProfileIndex(profiles, stats).find(query).second), DistanceVector{});
}

TEST(Ranking, JsonShapeAndOverlap) {
    Ranking a{{{"d1", "c1"}, 0.9}, {{"d2", "c2"}, 0.5}, {{"d3", "c3"}, 0.1}};
    Ranking b{{{"d3", "c3"}, 0.8}, {{"d4", "c4"}, 0.7}, {{"d1", "c1"}, 0.2}};
    EXPECT_EQ(top_k_overlap(a, b), 2u);
    EXPECT_EQ(top_k_overlap(a, a), 3u);
    const auto j = ranking_to_json(a);
    ASSERT_EQ(j.size(), 3u);
    EXPECT_EQ(j[0].dump(), R"({"rank":1,"dataset":"d1","column":"c1","score":0.9})");
    EXPECT_EQ(j[2]["rank"], 3);
}
