#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/catalog.hpp"
#include "lakescout/error.hpp"

namespace lakescout {

// ---------------------------------------------------------------------------
// Exact overlap measures
// ---------------------------------------------------------------------------

// Value -> multiplicity, sorted by value so two tables intersect in one merge pass.
class FrequencyTable {
public:
    FrequencyTable() = default;

    explicit FrequencyTable(const ColumnValues& values) : FrequencyTable(std::span<const std::string>(values.cells)) {}

    explicit FrequencyTable(std::span<const std::string> cells) {
        std::unordered_map<std::string_view, std::size_t> counts;
        counts.reserve(cells.size());
        for (const auto& c : cells) ++counts[c];
        entries_.reserve(counts.size());
        for (const auto& [value, count] : counts) entries_.emplace_back(std::string(value), count);
        std::sort(entries_.begin(), entries_.end());
        total_ = cells.size();
    }

    std::size_t total() const { return total_; }
    std::size_t distinct() const { return entries_.size(); }
    bool empty() const { return total_ == 0; }
    const std::vector<std::pair<std::string, std::size_t>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::size_t>> entries_;
    std::size_t total_ = 0;
};

struct Overlap {
    std::size_t shared_distinct = 0; // |set(A) ∩ set(B)|
    std::size_t min_multiplicity_sum = 0; // Σ_v min(count_A(v), count_B(v))
};

inline Overlap overlap(const FrequencyTable& a, const FrequencyTable& b) {
    Overlap o;
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() && ib != b.entries().end()) {
        const int cmp = ia->first.compare(ib->first);
        if (cmp < 0) {
            ++ia;
        } else if (cmp > 0) {
            ++ib;
        } else {
            ++o.shared_distinct;
            o.min_multiplicity_sum += std::min(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return o;
}

inline void require_nonempty(const FrequencyTable& a, const FrequencyTable& b) {
    if (a.empty() || b.empty()) throw EmptyColumnError("join measures need two non-empty columns");
}

inline double multiset_jaccard(const FrequencyTable& a, const FrequencyTable& b) {
    require_nonempty(a, b);
    return static_cast<double>(overlap(a, b).min_multiplicity_sum) / static_cast<double>(a.total() + b.total());
}

inline double multiset_jaccard(const ColumnValues& a, const ColumnValues& b) {
    return multiset_jaccard(FrequencyTable(a), FrequencyTable(b));
}

inline double cardinality_proportion(std::size_t distinct_a, std::size_t distinct_b) {
    if (distinct_a == 0 || distinct_b == 0) throw EmptyColumnError("join measures need two non-empty columns");
    return static_cast<double>(std::min(distinct_a, distinct_b)) / static_cast<double>(std::max(distinct_a, distinct_b));
}

inline double cardinality_proportion(const FrequencyTable& a, const FrequencyTable& b) {
    return cardinality_proportion(a.distinct(), b.distinct());
}

inline double cardinality_proportion(const ColumnValues& a, const ColumnValues& b) {
    if (a.empty() || b.empty()) throw EmptyColumnError("join measures need two non-empty columns");
    return cardinality_proportion(a.distinct_count, b.distinct_count);
}

struct JoinMeasures {
    double j = 0; // multiset Jaccard, [0, 0.5]
    double k = 0; // cardinality proportion, (0, 1]
};

inline JoinMeasures join_measures(const FrequencyTable& a, const FrequencyTable& b) {
    require_nonempty(a, b);
    const Overlap o = overlap(a, b);
    return {static_cast<double>(o.min_multiplicity_sum) / static_cast<double>(a.total() + b.total()),
            cardinality_proportion(a.distinct(), b.distinct())};
}

// Classical set-overlap measures over distinct values, used as comparison baselines.
inline double containment(const FrequencyTable& a, const FrequencyTable& b) {
    require_nonempty(a, b);
    return static_cast<double>(overlap(a, b).shared_distinct) / static_cast<double>(std::min(a.distinct(), b.distinct()));
}

inline double set_jaccard(const FrequencyTable& a, const FrequencyTable& b) {
    require_nonempty(a, b);
    const auto shared = overlap(a, b).shared_distinct;
    return static_cast<double>(shared) / static_cast<double>(a.distinct() + b.distinct() - shared);
}

// ---------------------------------------------------------------------------
// Discrete quality levels
// ---------------------------------------------------------------------------

inline void check_measures(double j, double k) {
    if (!(j >= 0.0 && j <= 0.5)) throw DomainError("multiset Jaccard must lie in [0, 0.5], got " + std::to_string(j));
    if (!(k >= 0.0 && k <= 1.0)) throw DomainError("cardinality proportion must lie in [0, 1], got " + std::to_string(k));
}

// Highest level i in 1..levels with j >= 2^-(levels-i+1) and k >= (i-1)/levels; 0 if none.
inline int discrete_quality(double j, double k, int levels) {
    check_measures(j, k);
    if (levels < 1) throw DomainError("number of quality levels must be positive");
    for (int i = levels; i >= 1; --i) {
        const double j_min = std::ldexp(1.0, -(levels - i + 1));
        const double k_min = static_cast<double>(i - 1) / static_cast<double>(levels);
        if (j >= j_min && k >= k_min) return i;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Truncated normal and continuous quality
// ---------------------------------------------------------------------------

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double standard_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double truncated_normal_cdf(double mu, double sigma, double a, double b, double x) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!(a < b)) throw DomainError("truncation bounds need a < b");
    if (!(x >= a && x <= b)) throw DomainError("x outside the truncation interval");
    if (x == a) return 0.0;
    if (x == b) return 1.0;
    const double za = (a - mu) / sigma;
    const double zb = (b - mu) / sigma;
    const double zx = (x - mu) / sigma;
    double value;
    if (za > 0.0) {
        // Whole interval in the upper tail: survival functions avoid cancellation.
        const double sa = standard_normal_sf(za);
        value = (sa - standard_normal_sf(zx)) / (sa - standard_normal_sf(zb));
    } else {
        const double fa = standard_normal_cdf(za);
        value = (standard_normal_cdf(zx) - fa) / (standard_normal_cdf(zb) - fa);
    }
    if (!std::isfinite(value)) throw DomainError("truncated normal mass underflows for these parameters");
    return std::clamp(value, 0.0, 1.0);
}

struct QualityParams {
    double mu_j = 0.0;
    double mu_k = 0.44;
    double sigma_j = 0.19;
    double sigma_k = 0.28;
    double strictness = 0.25;

    static constexpr double kRelaxed = 0.0;
    static constexpr double kBalanced = 0.25;
    static constexpr double kStrict = 0.5;

    void validate() const {
        if (!(sigma_j > 0.0) || !(sigma_k > 0.0)) throw DomainError("quality sigmas must be positive");
        if (!(strictness >= 0.0)) throw DomainError("strictness must be non-negative");
    }

    friend bool operator==(const QualityParams&, const QualityParams&) = default;
};

inline QualityParams with_strictness(QualityParams params, double s) {
    params.strictness = s;
    return params;
}

inline nlohmann::ordered_json quality_params_to_json(const QualityParams& p) {
    nlohmann::ordered_json j;
    j["mu_j"] = p.mu_j;
    j["mu_k"] = p.mu_k;
    j["sigma_j"] = p.sigma_j;
    j["sigma_k"] = p.sigma_k;
    j["strictness"] = p.strictness;
    return j;
}

// Missing keys keep their defaults.
template <typename Json>
QualityParams quality_params_from_json(const Json& j) {
    QualityParams p;
    p.mu_j = j.value("mu_j", p.mu_j);
    p.mu_k = j.value("mu_k", p.mu_k);
    p.sigma_j = j.value("sigma_j", p.sigma_j);
    p.sigma_k = j.value("sigma_k", p.sigma_k);
    p.strictness = j.value("strictness", p.strictness);
    p.validate();
    return p;
}

inline double continuous_quality(double j, double k, const QualityParams& params = {}) {
    check_measures(j, k);
    params.validate();
    return truncated_normal_cdf(params.mu_j + params.strictness, params.sigma_j, 0.0, 1.0, j) *
           truncated_normal_cdf(params.mu_k, params.sigma_k, 0.0, 1.0, k);
}

inline double continuous_quality(const JoinMeasures& m, const QualityParams& params = {}) {
    return continuous_quality(m.j, m.k, params);
}

// ---------------------------------------------------------------------------
// Wasserstein distance and distribution fitting
// ---------------------------------------------------------------------------

// Pre-computed integration segments for ∫_a^b |F_emp(x) - F(x)| dx. Breakpoints
// are the samples inside (a, b) plus a uniform grid of `resolution` cells, so the
// empirical CDF is constant on every segment and F is sampled at the midpoint.
class WassersteinIntegrator {
public:
    WassersteinIntegrator(std::span<const double> sorted_samples, double a, double b, std::size_t resolution = 1000) {
        if (sorted_samples.empty()) throw InvalidArgument("empirical distribution needs at least one sample");
        if (!std::is_sorted(sorted_samples.begin(), sorted_samples.end())) throw InvalidArgument("samples must be sorted");
        if (!(a < b)) throw DomainError("integration domain needs a < b");
        std::vector<double> breaks;
        breaks.reserve(resolution + 1 + sorted_samples.size());
        for (std::size_t i = 0; i <= resolution; ++i) {
            breaks.push_back(i == resolution ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(resolution));
        }
        for (const double s : sorted_samples) {
            if (s > a && s < b) breaks.push_back(s);
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

        const auto n = static_cast<double>(sorted_samples.size());
        auto below = sorted_samples.begin();
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
            below = std::upper_bound(below, sorted_samples.end(), mid);
            midpoints_.push_back(mid);
            widths_.push_back(breaks[i + 1] - breaks[i]);
            empirical_.push_back(static_cast<double>(below - sorted_samples.begin()) / n);
        }
    }

    template <typename Cdf>
    double distance(Cdf&& model_cdf) const {
        double total = 0;
        for (std::size_t i = 0; i < midpoints_.size(); ++i) {
            total += std::abs(empirical_[i] - model_cdf(midpoints_[i])) * widths_[i];
        }
        return total;
    }

    std::size_t segments() const { return midpoints_.size(); }

private:
    std::vector<double> midpoints_;
    std::vector<double> widths_;
    std::vector<double> empirical_;
};

inline double wasserstein_1d(std::span<const double> sorted_empirical, const std::function<double(double)>& model_cdf, double a,
                             double b) {
    return WassersteinIntegrator(sorted_empirical, a, b).distance(model_cdf);
}

struct TruncatedNormalFit {
    double mu = 0;
    double sigma = 0;
    double distance = 0;
};

// Grid values k * step for k in [first, last]; integer stepping keeps them exact multiples.
inline std::vector<double> parameter_grid(double step, std::size_t first) {
    const auto last = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
    std::vector<double> values;
    for (std::size_t i = first; i <= last; ++i) values.push_back(static_cast<double>(i) * step);
    return values;
}

// Exhaustive search over mu in [0, 1] and sigma in [step, 1] for the truncated
// normal on [0, 1] closest in 1-D Wasserstein distance to the samples. Ties go to
// the smaller mu, then the smaller sigma.
inline TruncatedNormalFit fit_truncated_normal(std::vector<double> samples, double grid_step = 0.01) {
    if (samples.size() < 10) throw InvalidArgument("fitting needs at least 10 samples");
    if (!(grid_step > 0.0 && grid_step <= 0.1)) throw InvalidArgument("grid step must lie in (0, 0.1]");
    for (const double s : samples) {
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("samples must lie in [0, 1]");
    }
    std::sort(samples.begin(), samples.end());
    const WassersteinIntegrator integrator(samples, 0.0, 1.0);
    TruncatedNormalFit best{0, 0, std::numeric_limits<double>::infinity()};
    const auto mus = parameter_grid(grid_step, 0);
    const auto sigmas = parameter_grid(grid_step, 1);
    for (const double mu : mus) {
        for (const double sigma : sigmas) {
            const double d = integrator.distance([&](double x) { return truncated_normal_cdf(mu, sigma, 0.0, 1.0, x); });
            if (d < best.distance) best = {mu, sigma, d};
        }
    }
    return best;
}

} // namespace lakescout
