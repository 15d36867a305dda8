#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lakescout/detail/random.hpp"
#include "lakescout/error.hpp"
#include "lakescout/profile.hpp"
#include "lakescout/profile_store.hpp"

namespace lakescout {

// ---------------------------------------------------------------------------
// Profile distance vectors
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDistanceArity = kScalarFeatures.size() + kOctileCount + 2;
static_assert(kDistanceArity == 23);

using DistanceVector = std::array<double, kDistanceArity>;

inline std::vector<std::string> distance_component_names() {
    std::vector<std::string> names;
    for (const auto& f : kScalarFeatures) names.emplace_back(f.name);
    for (std::size_t i = 0; i < kOctileCount; ++i) names.push_back("octile_" + std::to_string(i + 1));
    names.emplace_back("frequent_words");
    names.emplace_back("first_word");
    return names;
}

// 1 - |A ∩ B| / |A ∪ B| over the two word lists taken as sets; two empty lists are identical.
inline double word_set_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::vector<std::string> shared;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(shared));
    const double uni = static_cast<double>(sa.size() + sb.size() - shared.size());
    return 1.0 - static_cast<double>(shared.size()) / uni;
}

// Both profiles must already be normalized with the same statistics.
inline DistanceVector distance_vector(const ColumnProfile& a, const ColumnProfile& b) {
    DistanceVector v{};
    std::size_t i = 0;
    for (const auto& f : kScalarFeatures) v[i++] = std::abs(a.*f.member - b.*f.member);
    for (std::size_t o = 0; o < kOctileCount; ++o) v[i++] = std::abs(a.octiles[o] - b.octiles[o]);
    v[i++] = word_set_distance(a.frequent_words, b.frequent_words);
    v[i++] = a.first_word == b.first_word ? 0.0 : 1.0;
    return v;
}

// Raw profiles: normalizes both with `stats` first.
inline DistanceVector distance_vector(const ColumnProfile& raw_a, const ColumnProfile& raw_b, const NormalizationStats& stats) {
    return distance_vector(normalize(raw_a, stats), normalize(raw_b, stats));
}

// ---------------------------------------------------------------------------
// Gradient-boosted regression trees
// ---------------------------------------------------------------------------

struct RegressorConfig {
    int n_trees = 50;
    double learning_rate = 0.1;
    int max_tree_depth = 3;
    int min_samples_leaf = 5;
    // Fraction of rows each tree sees; 1.0 is plain (deterministic) boosting and
    // the seed is then unused.
    double subsample = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw InvalidArgument("n_trees must be at least 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidArgument("learning_rate must lie in (0, 1]");
        if (max_tree_depth < 1) throw InvalidArgument("max_tree_depth must be at least 1");
        if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be at least 1");
        if (!(subsample > 0.0 && subsample <= 1.0)) throw InvalidArgument("subsample must lie in (0, 1]");
    }

    friend bool operator==(const RegressorConfig&, const RegressorConfig&) = default;
};

// Split nodes send x[feature] <= threshold left. Leaves carry a value.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::optional<double> leaf;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double evaluate(std::span<const double> x) const {
        std::size_t i = 0;
        for (;;) {
            const TreeNode& n = nodes[i];
            if (n.leaf) return *n.leaf;
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
    }

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

class Regressor {
public:
    Regressor() = default;
    Regressor(RegressorConfig config, double base, std::vector<RegressionTree> trees)
        : config_(config), base_(base), trees_(std::move(trees)) {}

    const RegressorConfig& config() const { return config_; }
    double base() const { return base_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }

    // Unclamped ensemble output.
    double raw_predict(std::span<const double> x) const {
        if (x.size() != kDistanceArity) {
            throw InvalidArgument("expected a " + std::to_string(kDistanceArity) + "-component distance vector, got " +
                                  std::to_string(x.size()));
        }
        double out = base_;
        for (const auto& t : trees_) out += config_.learning_rate * t.evaluate(x);
        return out;
    }

    double predict(std::span<const double> x) const { return std::clamp(raw_predict(x), 0.0, 1.0); }

    friend bool operator==(const Regressor&, const Regressor&) = default;

private:
    RegressorConfig config_;
    double base_ = 0;
    std::vector<RegressionTree> trees_;
};

namespace detail {

// Grows one depth-limited least-squares tree on `residual`, level by level.
// Every feature is scanned once per level in presorted order, accumulating
// left-hand sums for all open nodes at that level simultaneously.
inline RegressionTree grow_tree(const std::vector<std::vector<double>>& columns,
                                const std::vector<std::vector<std::uint32_t>>& order, const std::vector<double>& residual,
                                const std::vector<char>& in_sample, const RegressorConfig& cfg) {
    const std::size_t n = residual.size();
    const std::size_t features = columns.size();
    const auto min_leaf = static_cast<std::size_t>(cfg.min_samples_leaf);

    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, -1);
    std::vector<double> node_sum(1, 0.0);
    std::vector<std::size_t> node_count(1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_sample[i]) continue;
        node_of[i] = 0;
        node_sum[0] += residual[i];
        ++node_count[0];
    }

    std::vector<int> open{0};
    for (int depth = 0; depth < cfg.max_tree_depth && !open.empty(); ++depth) {
        const std::size_t slots = tree.nodes.size();
        std::vector<char> is_open(slots, 0);
        for (const int v : open) is_open[static_cast<std::size_t>(v)] = 1;

        std::vector<double> best_gain(slots, 0.0);
        std::vector<int> best_feature(slots, -1);
        std::vector<double> best_threshold(slots, 0.0);
        std::vector<double> left_sum(slots);
        std::vector<std::size_t> left_count(slots);
        std::vector<double> last_value(slots);

        for (std::size_t f = 0; f < features; ++f) {
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_count.begin(), left_count.end(), 0);
            const auto& x = columns[f];
            for (const std::uint32_t i : order[f]) {
                const int v = node_of[i];
                if (v < 0 || !is_open[static_cast<std::size_t>(v)]) continue;
                const auto s = static_cast<std::size_t>(v);
                const double xi = x[i];
                if (left_count[s] > 0 && xi > last_value[s]) {
                    const std::size_t lc = left_count[s];
                    const std::size_t rc = node_count[s] - lc;
                    if (lc >= min_leaf && rc >= min_leaf) {
                        const double ls = left_sum[s];
                        const double rs = node_sum[s] - ls;
                        const double gain = ls * ls / static_cast<double>(lc) + rs * rs / static_cast<double>(rc) -
                                            node_sum[s] * node_sum[s] / static_cast<double>(node_count[s]);
                        if (gain > best_gain[s]) {
                            double threshold = last_value[s] + 0.5 * (xi - last_value[s]);
                            if (threshold >= xi) threshold = last_value[s];
                            best_gain[s] = gain;
                            best_feature[s] = static_cast<int>(f);
                            best_threshold[s] = threshold;
                        }
                    }
                }
                left_sum[s] += residual[i];
                ++left_count[s];
                last_value[s] = xi;
            }
        }

        std::vector<int> next_open;
        std::vector<int> left_child(slots, -1);
        std::vector<int> right_child(slots, -1);
        for (const int v : open) {
            const auto s = static_cast<std::size_t>(v);
            // Gains below this are round-off on (numerically) constant residuals.
            const double noise = 1e-12 * (1.0 + std::abs(node_sum[s]));
            if (best_feature[s] < 0 || best_gain[s] <= noise) continue;
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            node_sum.push_back(0.0);
            node_sum.push_back(0.0);
            node_count.push_back(0);
            node_count.push_back(0);
            TreeNode& node = tree.nodes[s];
            node.feature = best_feature[s];
            node.threshold = best_threshold[s];
            node.left = l;
            node.right = l + 1;
            left_child[s] = l;
            right_child[s] = l + 1;
            next_open.push_back(l);
            next_open.push_back(l + 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int v = node_of[i];
            if (v < 0) continue;
            const auto s = static_cast<std::size_t>(v);
            if (s >= slots || left_child[s] < 0) continue;
            const TreeNode& node = tree.nodes[s];
            const int child = columns[static_cast<std::size_t>(node.feature)][i] <= node.threshold ? node.left : node.right;
            node_of[i] = child;
            node_sum[static_cast<std::size_t>(child)] += residual[i];
            ++node_count[static_cast<std::size_t>(child)];
        }
        open = std::move(next_open);
    }

    for (std::size_t s = 0; s < tree.nodes.size(); ++s) {
        TreeNode& node = tree.nodes[s];
        if (node.left >= 0) continue;
        node.leaf = node_count[s] > 0 ? node_sum[s] / static_cast<double>(node_count[s]) : 0.0;
    }
    return tree;
}

} // namespace detail

// Least-squares gradient boosting: start from the mean target, then fit each
// tree to the current residuals and add it scaled by the learning rate.
inline Regressor fit_regressor(const std::vector<DistanceVector>& rows, const std::vector<double>& targets, const RegressorConfig& cfg) {
    cfg.validate();
    if (rows.size() != targets.size()) throw InvalidArgument("row and target counts differ");
    if (rows.empty()) throw InvalidArgument("no training rows");
    const std::size_t n = rows.size();

    std::vector<std::vector<double>> columns(kDistanceArity, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < kDistanceArity; ++f) {
            if (!std::isfinite(rows[i][f])) {
                throw InvalidArgument("training row " + std::to_string(i) + " has a non-finite value in component " + std::to_string(f));
            }
            columns[f][i] = rows[i][f];
        }
        if (!std::isfinite(targets[i])) throw InvalidArgument("training row " + std::to_string(i) + " has a non-finite target");
    }
    std::vector<std::vector<std::uint32_t>> order(kDistanceArity, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < kDistanceArity; ++f) {
        std::iota(order[f].begin(), order[f].end(), 0u);
        const auto& x = columns[f];
        std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
    }

    const double base = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
    std::vector<double> fitted(n, base);
    std::vector<double> residual(n);
    std::vector<char> in_sample(n, 1);
    detail::Rng rng(cfg.seed);
    std::vector<std::uint32_t> ids(n);

    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(cfg.n_trees));
    for (int t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - fitted[i];
        if (cfg.subsample < 1.0) {
            std::iota(ids.begin(), ids.end(), 0u);
            rng.shuffle(ids);
            const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (std::size_t i = 0; i < keep; ++i) in_sample[ids[i]] = 1;
        }
        trees.push_back(detail::grow_tree(columns, order, residual, in_sample, cfg));
        for (std::size_t i = 0; i < n; ++i) fitted[i] += cfg.learning_rate * trees.back().evaluate(rows[i]);
    }
    return Regressor(cfg, base, std::move(trees));
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline constexpr int kModelVersion = 1;

inline nlohmann::ordered_json model_to_json(const Regressor& model) {
    const auto& cfg = model.config();
    nlohmann::ordered_json j;
    j["version"] = kModelVersion;
    j["config"] = {{"n_trees", cfg.n_trees},
                   {"learning_rate", cfg.learning_rate},
                   {"max_tree_depth", cfg.max_tree_depth},
                   {"min_samples_leaf", cfg.min_samples_leaf},
                   {"subsample", cfg.subsample},
                   {"seed", cfg.seed},
                   {"n_features", kDistanceArity},
                   {"feature_names", distance_component_names()}};
    j["base"] = model.base();
    auto& trees = j["trees"];
    trees = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees()) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const auto& node : tree.nodes) {
            nlohmann::ordered_json n;
            n["feature"] = node.feature;
            n["threshold"] = node.threshold;
            n["left"] = node.left;
            n["right"] = node.right;
            n["leaf"] = node.leaf ? nlohmann::ordered_json(*node.leaf) : nlohmann::ordered_json(nullptr);
            nodes.push_back(std::move(n));
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    return j;
}

template <typename Json>
Regressor model_from_json(const Json& j) {
    try {
        if (j.at("version").template get<int>() != kModelVersion) {
            throw FormatError("unsupported model version " + j.at("version").dump());
        }
        const auto& c = j.at("config");
        if (c.at("n_features").template get<std::size_t>() != kDistanceArity) {
            throw FormatError("model expects " + c.at("n_features").dump() + " distance components, this build uses " +
                              std::to_string(kDistanceArity));
        }
        RegressorConfig cfg;
        cfg.n_trees = c.at("n_trees").template get<int>();
        cfg.learning_rate = c.at("learning_rate").template get<double>();
        cfg.max_tree_depth = c.at("max_tree_depth").template get<int>();
        cfg.min_samples_leaf = c.at("min_samples_leaf").template get<int>();
        cfg.subsample = c.value("subsample", 1.0);
        cfg.seed = c.value("seed", std::uint64_t{0});
        cfg.validate();

        std::vector<RegressionTree> trees;
        for (const auto& t : j.at("trees")) {
            RegressionTree tree;
            for (const auto& n : t.at("nodes")) {
                TreeNode node;
                node.feature = n.at("feature").template get<int>();
                node.threshold = n.at("threshold").template get<double>();
                node.left = n.at("left").template get<int>();
                node.right = n.at("right").template get<int>();
                if (!n.at("leaf").is_null()) node.leaf = n.at("leaf").template get<double>();
                tree.nodes.push_back(node);
            }
            const auto size = static_cast<int>(tree.nodes.size());
            if (size == 0) throw FormatError("model contains an empty tree");
            for (int i = 0; i < size; ++i) {
                const TreeNode& node = tree.nodes[static_cast<std::size_t>(i)];
                if (node.leaf) continue;
                if (node.feature < 0 || node.feature >= static_cast<int>(kDistanceArity)) {
                    throw FormatError("split feature " + std::to_string(node.feature) + " out of range");
                }
                // Children always come after their parent, which rules out cycles.
                if (node.left <= i || node.right <= i || node.left >= size || node.right >= size) {
                    throw FormatError("malformed tree node " + std::to_string(i));
                }
            }
            trees.push_back(std::move(tree));
        }
        if (static_cast<int>(trees.size()) != cfg.n_trees) throw FormatError("tree count does not match n_trees");
        return Regressor(cfg, j.at("base").template get<double>(), std::move(trees));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model: ") + e.what());
    }
}

inline void save_model(const Regressor& model, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_text_file(path, model_to_json(model).dump() + "\n");
}

inline Regressor load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw NotFoundError("model file " + path.string() + " not found");
    const auto doc = read_json_file(path);
    try {
        return model_from_json(doc);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace lakescout
