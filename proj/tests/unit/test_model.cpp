#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lakescout/model.hpp"
#include "test_util.hpp"

using namespace lakescout;

namespace {

std::vector<DistanceVector> random_rows(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<DistanceVector> rows(n);
    for (auto& r : rows) {
        for (auto& x : r) x = u(rng);
        r[21] = std::round(u(rng) / 3.0 * 10.0) / 10.0;
        r[22] = u(rng) < 1.5 ? 0.0 : 1.0;
    }
    return rows;
}

ColumnProfile sample_profile(double shift, std::vector<std::string> words, std::string first) {
    ColumnProfile p;
    double v = 1.0 + shift;
    for (const auto& f : kScalarFeatures) p.*f.member = (v += 0.37);
    for (std::size_t i = 0; i < 7; ++i) p.octiles[i] = 10.0 * static_cast<double>(i) + shift;
    p.frequent_words = std::move(words);
    p.first_word = std::move(first);
    return p;
}

Regressor one_leaf_model(double base, double leaf) {
    RegressorConfig cfg;
    cfg.n_trees = 1;
    cfg.learning_rate = 1.0;
    RegressionTree t;
    t.nodes.push_back({-1, 0, -1, -1, leaf});
    return Regressor(cfg, base, {t});
}

} // namespace

TEST(DistanceVector, ComponentNamesAndArity) {
    const auto names = distance_component_names();
    ASSERT_EQ(names.size(), 23u);
    EXPECT_EQ(names.front(), "cardinality");
    EXPECT_EQ(names[13], "sd_words");
    EXPECT_EQ(names[14], "octile_1");
    EXPECT_EQ(names[21], "frequent_words");
    EXPECT_EQ(names[22], "first_word");
}

TEST(DistanceVector, SelfIsZeroAndSymmetric) {
    const auto a = sample_profile(0.0, {"x", "y", "z"}, "x");
    const auto b = sample_profile(2.5, {"y", "z", "w", "v"}, "v");
    for (double x : distance_vector(a, a)) EXPECT_EQ(x, 0.0);
    const auto ab = distance_vector(a, b);
    EXPECT_EQ(ab, distance_vector(b, a));
    for (double x : ab) EXPECT_GE(x, 0.0);
    for (std::size_t i = 0; i < 21; ++i) EXPECT_NEAR(ab[i], 2.5, 1e-12);
    EXPECT_DOUBLE_EQ(ab[21], 1.0 - 2.0 / 5.0);
    EXPECT_EQ(ab[22], 1.0);
}

TEST(DistanceVector, WordSetDistance) {
    EXPECT_EQ(word_set_distance({}, {}), 0.0);
    EXPECT_EQ(word_set_distance({"a"}, {}), 1.0);
    EXPECT_EQ(word_set_distance({"a", "b"}, {"b", "a"}), 0.0);
    EXPECT_EQ(word_set_distance({"a", "b"}, {"c"}), 1.0);
    EXPECT_DOUBLE_EQ(word_set_distance({"a", "b", "c"}, {"b", "c", "d"}), 0.5);
}

TEST(DistanceVector, RawOverloadNormalizesFirst) {
    const auto a = sample_profile(0.0, {"x"}, "x");
    const auto b = sample_profile(4.0, {"x"}, "x");
    const auto c = sample_profile(8.0, {"x"}, "x");
    const auto stats = compute_normalization_stats(std::vector<ColumnProfile>{a, b, c});
    EXPECT_EQ(distance_vector(a, c, stats), distance_vector(normalize(a, stats), normalize(c, stats)));
    // Normalized features scale by 1/std; the others keep raw units.
    const double sd = std::sqrt(32.0 / 3.0);
    const auto d = distance_vector(a, c, stats);
    EXPECT_NEAR(d[0], 8.0 / sd, 1e-12);
    EXPECT_NEAR(d[1], 8.0, 1e-12);
}

TEST(Regressor, ConstantTargetsPredictConstant) {
    const auto rows = random_rows(300, 1);
    const std::vector<double> targets(rows.size(), 0.7);
    const auto model = fit_regressor(rows, targets, {});
    for (const auto& r : random_rows(50, 2)) EXPECT_NEAR(model.predict(r), 0.7, 1e-9);
}

TEST(Regressor, LearnsSingleComponentTarget) {
    const auto rows = random_rows(10000, 3);
    std::vector<double> targets;
    for (const auto& r : rows) targets.push_back(r[4] / 3.0);
    const auto model = fit_regressor(rows, targets, {});
    double sse = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) sse += std::pow(model.predict(rows[i]) - targets[i], 2);
    EXPECT_LT(std::sqrt(sse / static_cast<double>(rows.size())), 0.05);

    const auto held = random_rows(2000, 4);
    double hsse = 0;
    for (const auto& r : held) hsse += std::pow(model.predict(r) - r[4] / 3.0, 2);
    EXPECT_LT(std::sqrt(hsse / static_cast<double>(held.size())), 0.05);
}

TEST(Regressor, TreesRespectDepthAndLeafSize) {
    const auto rows = random_rows(500, 5);
    std::vector<double> targets;
    for (const auto& r : rows) targets.push_back(std::sin(r[0]) * 0.5 + 0.5);
    const auto model = fit_regressor(rows, targets, {});
    ASSERT_EQ(model.trees().size(), 50u);
    for (const auto& t : model.trees()) {
        EXPECT_LE(t.nodes.size(), 15u);
        for (const auto& n : t.nodes) {
            if (!n.leaf) {
                EXPECT_GE(n.feature, 0);
                EXPECT_LT(n.feature, 23);
            }
        }
    }
    // Every leaf must be reached by at least min_samples_leaf training rows.
    const auto& first = model.trees().front();
    std::vector<int> hits(first.nodes.size(), 0);
    for (const auto& r : rows) {
        std::size_t i = 0;
        while (!first.nodes[i].leaf) i = static_cast<std::size_t>(r[static_cast<std::size_t>(first.nodes[i].feature)] <= first.nodes[i].threshold ? first.nodes[i].left : first.nodes[i].right);
        ++hits[i];
    }
    for (std::size_t i = 0; i < first.nodes.size(); ++i) {
        if (first.nodes[i].leaf) {
            EXPECT_GE(hits[i], 5);
        }
    }
}

TEST(Regressor, DeterministicSerialization) {
    const auto rows = random_rows(800, 6);
    std::vector<double> targets;
    for (const auto& r : rows) targets.push_back(std::clamp(1.0 - r[2] / 3.0 + 0.1 * r[21], 0.0, 1.0));
    RegressorConfig cfg;
    cfg.seed = 17;
    EXPECT_EQ(model_to_json(fit_regressor(rows, targets, cfg)).dump(), model_to_json(fit_regressor(rows, targets, cfg)).dump());
    cfg.subsample = 0.5;
    const auto a = model_to_json(fit_regressor(rows, targets, cfg)).dump();
    EXPECT_EQ(a, model_to_json(fit_regressor(rows, targets, cfg)).dump());
    cfg.seed = 18;
    EXPECT_NE(a, model_to_json(fit_regressor(rows, targets, cfg)).dump());
}

TEST(Regressor, PredictClampsRawOutput) {
    const auto high = one_leaf_model(1.0, 0.08);
    const DistanceVector zero{};
    EXPECT_NEAR(high.raw_predict(zero), 1.08, 1e-12);
    EXPECT_EQ(high.predict(zero), 1.0);
    EXPECT_EQ(one_leaf_model(0.0, -0.2).predict(zero), 0.0);
}

TEST(Regressor, ArityMismatchIsError) {
    const auto m = one_leaf_model(0.5, 0.0);
    const std::vector<double> short_vec(22, 0.0);
    EXPECT_THROW(m.predict(short_vec), InvalidArgument);
}

TEST(Regressor, ZeroVectorScoresAtLeastMedianWhenTargetFallsWithDistance) {
    const auto rows = random_rows(3000, 8);
    std::vector<double> targets;
    for (const auto& r : rows) {
        double s = 0;
        for (double x : r) s += x;
        targets.push_back(std::exp(-s / 10.0));
    }
    const auto model = fit_regressor(rows, targets, {});
    std::vector<double> sorted = targets;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_GE(model.predict(DistanceVector{}), sorted[sorted.size() / 2]);
}

TEST(Regressor, InputValidation) {
    const auto rows = random_rows(10, 9);
    EXPECT_THROW(fit_regressor(rows, std::vector<double>(9, 0.1), {}), InvalidArgument);
    EXPECT_THROW(fit_regressor({}, {}, {}), InvalidArgument);
    auto bad = rows;
    bad[2][5] = std::nan("");
    EXPECT_THROW(fit_regressor(bad, std::vector<double>(10, 0.1), {}), InvalidArgument);
    RegressorConfig cfg;
    cfg.learning_rate = 0;
    EXPECT_THROW(fit_regressor(rows, std::vector<double>(10, 0.1), cfg), InvalidArgument);
    cfg = {};
    cfg.max_tree_depth = 0;
    EXPECT_THROW(fit_regressor(rows, std::vector<double>(10, 0.1), cfg), InvalidArgument);
    cfg = {};
    cfg.n_trees = 0;
    EXPECT_THROW(fit_regressor(rows, std::vector<double>(10, 0.1), cfg), InvalidArgument);
}

TEST(ModelJson, RoundTripAndFileSize) {
    testutil::TempDir dir;
    const auto rows = random_rows(2000, 10);
    std::vector<double> targets;
    for (const auto& r : rows) targets.push_back(std::clamp(r[0] * r[1] / 9.0, 0.0, 1.0));
    const auto model = fit_regressor(rows, targets, {});
    const auto path = dir / "m.json";
    save_model(model, path);
    EXPECT_LT(std::filesystem::file_size(path), 1u << 20);
    const auto back = load_model(path);
    EXPECT_EQ(back, model);
    for (const auto& r : random_rows(100, 11)) EXPECT_EQ(back.predict(r), model.predict(r));
    const auto j = model_to_json(model);
    EXPECT_EQ(j["version"], 1);
    EXPECT_EQ(j["config"]["n_trees"], 50);
    EXPECT_EQ(j["config"]["n_features"], 23);
    EXPECT_EQ(j["trees"].size(), 50u);
}

TEST(ModelJson, MalformedModelsRejected) {
    const auto good = model_to_json(one_leaf_model(0.5, 0.1));
    auto mutate = [&](auto fn) {
        nlohmann::json j = nlohmann::json::parse(good.dump());
        fn(j);
        return j;
    };
    EXPECT_NO_THROW(model_from_json(mutate([](auto&) {})));
    EXPECT_THROW(model_from_json(mutate([](auto& j) { j["version"] = 2; })), FormatError);
    EXPECT_THROW(model_from_json(mutate([](auto& j) { j["config"]["n_features"] = 22; })), FormatError);
    EXPECT_THROW(model_from_json(mutate([](auto& j) { j["config"]["n_trees"] = 3; })), FormatError);
    EXPECT_THROW(model_from_json(mutate([](auto& j) { j.erase("base"); })), FormatError);
    EXPECT_THROW(model_from_json(mutate([](auto& j) {
                     j["trees"][0]["nodes"] = nlohmann::json::parse(
                         R"([{"feature":3,"threshold":0.5,"left":0,"right":1,"leaf":null},{"feature":-1,"threshold":0,"left":-1,"right":-1,"leaf":0.1}])");
                 })),
                 FormatError);
    EXPECT_THROW(model_from_json(mutate([](auto& j) {
                     j["trees"][0]["nodes"] = nlohmann::json::parse(
                         R"([{"feature":40,"threshold":0.5,"left":1,"right":2,"leaf":null},{"feature":-1,"threshold":0,"left":-1,"right":-1,"leaf":0.1},{"feature":-1,"threshold":0,"left":-1,"right":-1,"leaf":0.2}])");
                 })),
                 FormatError);
}

TEST(ModelJson, MissingFileIsNotFound) {
    testutil::TempDir dir;
    EXPECT_THROW(load_model(dir / "none.json"), NotFoundError);
    testutil::write(dir / "broken.json", "{");
    EXPECT_THROW(load_model(dir / "broken.json"), FormatError);
}
