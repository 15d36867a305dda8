#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lakescout/join_metric.hpp"

using namespace lakescout;

namespace {

ColumnValues values(std::vector<std::string> cells) { return ColumnValues::from_cells(std::move(cells)); }

ColumnValues repeated(const std::string& prefix, std::size_t distinct, std::size_t each) {
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < distinct; ++i) {
        for (std::size_t r = 0; r < each; ++r) cells.push_back(prefix + std::to_string(i));
    }
    return values(std::move(cells));
}

double brute_force_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, int> ca, cb;
    for (const auto& x : a) ++ca[x];
    for (const auto& x : b) ++cb[x];
    int shared = 0;
    for (const auto& [v, n] : ca) {
        const auto it = cb.find(v);
        if (it != cb.end()) shared += std::min(n, it->second);
    }
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size());
}

// Composite Simpson integration of the normal density, normalized over [a, b].
double quadrature_truncated_cdf(double mu, double sigma, double a, double b, double x) {
    auto pdf = [&](double t) { return std::exp(-0.5 * ((t - mu) / sigma) * ((t - mu) / sigma)); };
    auto simpson = [&](double lo, double hi) {
        if (hi <= lo) return 0.0;
        const int n = 4000;
        const double h = (hi - lo) / n;
        double s = pdf(lo) + pdf(hi);
        for (int i = 1; i < n; ++i) s += pdf(lo + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    return simpson(a, x) / simpson(a, b);
}

} // namespace

TEST(MultisetJaccard, EqualSizesHalfOverlap) {
    // 1000 cells each, 500 shared (one cell per value).
    std::vector<std::string> a, b;
    for (int i = 0; i < 1000; ++i) a.push_back("v" + std::to_string(i));
    for (int i = 500; i < 1500; ++i) b.push_back("v" + std::to_string(i));
    EXPECT_DOUBLE_EQ(multiset_jaccard(values(a), values(b)), 0.25);
}

TEST(MultisetJaccard, SelfJoinIsHalf) {
    const auto a = values({"x", "x", "y", "z"});
    EXPECT_DOUBLE_EQ(multiset_jaccard(a, a), 0.5);
}

TEST(MultisetJaccard, HandCount) {
    EXPECT_NEAR(multiset_jaccard(values({"x", "x", "y"}), values({"x", "y", "y", "z"})), 2.0 / 7.0, 1e-15);
}

TEST(MultisetJaccard, EmptyInputIsError) {
    EXPECT_THROW(multiset_jaccard(values({}), values({"x"})), EmptyColumnError);
    EXPECT_THROW(cardinality_proportion(values({"x"}), values({})), EmptyColumnError);
    EXPECT_THROW(join_measures(FrequencyTable(values({})), FrequencyTable(values({"x"}))), EmptyColumnError);
}

TEST(MultisetJaccard, BruteForceEquivalenceOnTenThousandMultisets) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t vocab = 1 + rng() % 8;
        auto draw = [&] {
            std::vector<std::string> cells(1 + rng() % 12);
            for (auto& c : cells) c = std::string(1, static_cast<char>('a' + rng() % vocab));
            return cells;
        };
        const auto a = draw();
        const auto b = draw();
        const double j = multiset_jaccard(values(a), values(b));
        ASSERT_DOUBLE_EQ(j, brute_force_jaccard(a, b)) << "trial " << trial;
        ASSERT_DOUBLE_EQ(j, multiset_jaccard(values(b), values(a)));
        ASSERT_GE(j, 0.0);
        ASSERT_LE(j, 0.5);
        ASSERT_DOUBLE_EQ(cardinality_proportion(values(a), values(b)), cardinality_proportion(values(b), values(a)));
        std::vector<std::string> sa(a), sb(b), shared;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(shared));
        ASSERT_EQ(j == 0.0, shared.empty());
    }
}

TEST(CardinalityProportion, Examples) {
    EXPECT_NEAR(cardinality_proportion(repeated("a", 500, 2), repeated("b", 1500, 1)), 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(cardinality_proportion(repeated("a", 40, 1), repeated("b", 40, 3)), 1.0);
    EXPECT_DOUBLE_EQ(cardinality_proportion(std::size_t{3}, std::size_t{12}), 0.25);
}

TEST(JoinMeasures, TablesAgreeWithValueOverloads) {
    const auto a = values({"p", "q", "q", "r"});
    const auto b = values({"q", "r", "r", "s", "t"});
    const auto m = join_measures(FrequencyTable(a), FrequencyTable(b));
    EXPECT_DOUBLE_EQ(m.j, multiset_jaccard(a, b));
    EXPECT_DOUBLE_EQ(m.k, cardinality_proportion(a, b));
    EXPECT_DOUBLE_EQ(containment(FrequencyTable(a), FrequencyTable(b)), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(set_jaccard(FrequencyTable(a), FrequencyTable(b)), 2.0 / 5.0);
}

TEST(DiscreteQuality, Examples) {
    EXPECT_EQ(discrete_quality(0.25, 1.0, 4), 3);
    EXPECT_EQ(discrete_quality(0.25, 0.33, 4), 2);
    EXPECT_EQ(discrete_quality(0.0, 1.0, 4), 0);
    EXPECT_EQ(discrete_quality(0.5, 1.0, 4), 4);
}

TEST(DiscreteQuality, DomainErrors) {
    EXPECT_THROW(discrete_quality(0.6, 0.5, 4), DomainError);
    EXPECT_THROW(discrete_quality(-0.1, 0.5, 4), DomainError);
    EXPECT_THROW(discrete_quality(0.1, 1.5, 4), DomainError);
    EXPECT_THROW(discrete_quality(0.1, 0.5, 0), DomainError);
}

TEST(DiscreteQuality, MonotoneOverGrid) {
    for (int levels : {1, 2, 3, 4, 6}) {
        for (int a = 0; a <= 50; ++a) {
            for (int b = 0; b <= 50; ++b) {
                const double j = a / 100.0;
                const double k = b / 50.0;
                const int q = discrete_quality(j, k, levels);
                ASSERT_GE(q, 0);
                ASSERT_LE(q, levels);
                if (a < 50) {
                    ASSERT_LE(q, discrete_quality((a + 1) / 100.0, k, levels));
                }
                if (b < 50) {
                    ASSERT_LE(q, discrete_quality(j, (b + 1) / 50.0, levels));
                }
            }
        }
    }
}

TEST(TruncatedNormal, Bounds) {
    EXPECT_EQ(truncated_normal_cdf(0.44, 0.28, 0, 1, 0), 0.0);
    EXPECT_EQ(truncated_normal_cdf(0.44, 0.28, 0, 1, 1), 1.0);
    for (double sigma : {0.01, 0.1, 0.5, 3.0}) EXPECT_NEAR(truncated_normal_cdf(0.5, sigma, 0, 1, 0.5), 0.5, 1e-15);
}

TEST(TruncatedNormal, DomainErrors) {
    EXPECT_THROW(truncated_normal_cdf(0.4, 0.2, 0, 1, 1.2), DomainError);
    EXPECT_THROW(truncated_normal_cdf(0.4, 0.2, 0, 1, -0.01), DomainError);
    EXPECT_THROW(truncated_normal_cdf(0.4, 0.0, 0, 1, 0.5), DomainError);
    EXPECT_THROW(truncated_normal_cdf(0.4, -1.0, 0, 1, 0.5), DomainError);
    EXPECT_THROW(truncated_normal_cdf(0.4, 0.2, 1, 1, 1), DomainError);
}

TEST(TruncatedNormal, PointExampleAgainstQuadrature) {
    EXPECT_NEAR(truncated_normal_cdf(0.44, 0.28, 0, 1, 0.7), quadrature_truncated_cdf(0.44, 0.28, 0, 1, 0.7), 1e-6);
}

TEST(TruncatedNormal, MatchesQuadratureOnThousandPointGrid) {
    const std::vector<std::pair<double, double>> params{{0.0, 0.19}, {0.25, 0.19}, {0.5, 0.19}, {0.44, 0.28}};
    for (const auto& [mu, sigma] : params) {
        double prev = 0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = i / 1000.0;
            const double v = truncated_normal_cdf(mu, sigma, 0, 1, x);
            ASSERT_NEAR(v, quadrature_truncated_cdf(mu, sigma, 0, 1, x), 1e-6) << "mu=" << mu << " x=" << x;
            ASSERT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(TruncatedNormal, FarTailStaysAccurate) {
    // Interval far above the mean: the survival-function branch avoids 1 - 1 cancellation.
    const double v = truncated_normal_cdf(-3.0, 0.5, 0, 1, 0.1);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_NEAR(v, quadrature_truncated_cdf(-3.0, 0.5, 0, 1, 0.1), 1e-6);
}

TEST(ContinuousQuality, DisjointIsZero) {
    for (double k : {0.1, 0.5, 1.0}) {
        for (double s : {0.0, 0.25, 0.5}) EXPECT_EQ(continuous_quality(0.0, k, with_strictness({}, s)), 0.0);
    }
}

TEST(ContinuousQuality, FullSelfJoinRelaxed) {
    const double oracle = quadrature_truncated_cdf(0.0, 0.19, 0, 1, 0.5);
    const double v = continuous_quality(0.5, 1.0, with_strictness({}, 0.0));
    EXPECT_NEAR(v, oracle, 1e-6);
    // Usually quoted as ~0.9914; the quadrature value is 0.99150.
    EXPECT_NEAR(v, 0.9915, 1e-4);
    EXPECT_EQ(truncated_normal_cdf(0.44, 0.28, 0, 1, 1.0), 1.0);
}

TEST(ContinuousQuality, StrictnessOrderingAndPositivity) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uj(0.0, 0.5), uk(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double j = uj(rng);
        if (j == 0.0) j = 1e-6;
        const double k = uk(rng);
        const double relaxed = continuous_quality(j, k, with_strictness({}, 0.0));
        const double balanced = continuous_quality(j, k, with_strictness({}, 0.25));
        const double strict = continuous_quality(j, k, with_strictness({}, 0.5));
        ASSERT_LE(strict, balanced);
        ASSERT_LE(balanced, relaxed);
        ASSERT_GE(strict, 0.0);
        ASSERT_LE(relaxed, 1.0);
        if (k > 0) {
            ASSERT_GT(strict, 0.0);
        }
    }
}

TEST(ContinuousQuality, MonotoneInJAndK) {
    const QualityParams p;
    for (int a = 0; a < 50; ++a) {
        for (int b = 0; b < 50; ++b) {
            const double j = a / 100.0, k = b / 50.0;
            ASSERT_LE(continuous_quality(j, k, p), continuous_quality((a + 1) / 100.0, k, p));
            ASSERT_LE(continuous_quality(j, k, p), continuous_quality(j, (b + 1) / 50.0, p));
        }
    }
}

TEST(ContinuousQuality, BucketCentroidsFollowDiscreteOrder) {
    // Centroid of each discrete level's (j, k) region on a fine grid, L = 4.
    const int levels = 4;
    std::vector<double> sj(levels + 1), sk(levels + 1), n(levels + 1);
    for (int a = 0; a <= 500; ++a) {
        for (int b = 0; b <= 500; ++b) {
            const double j = a / 1000.0, k = b / 500.0;
            const int q = discrete_quality(j, k, levels);
            sj[q] += j;
            sk[q] += k;
            n[q] += 1;
        }
    }
    double prev = -1;
    for (int q = 0; q <= levels; ++q) {
        ASSERT_GT(n[q], 0);
        const double v = continuous_quality(sj[q] / n[q], sk[q] / n[q], with_strictness({}, 0.25));
        EXPECT_GT(v, prev) << "level " << q;
        prev = v;
    }
}

TEST(QualityParams, JsonDefaultsAndValidation) {
    const QualityParams d;
    const auto j = quality_params_to_json(d);
    EXPECT_EQ(j.dump(), R"({"mu_j":0.0,"mu_k":0.44,"sigma_j":0.19,"sigma_k":0.28,"strictness":0.25})");
    EXPECT_EQ(quality_params_from_json(nlohmann::json::parse(j.dump())), d);
    EXPECT_EQ(quality_params_from_json(nlohmann::json::parse(R"({"mu_k":0.5})")).mu_k, 0.5);
    EXPECT_THROW(quality_params_from_json(nlohmann::json::parse(R"({"sigma_j":0})")), DomainError);
    EXPECT_THROW(continuous_quality(0.1, 0.5, with_strictness({}, -0.1)), DomainError);
}
