#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasprobe/errors.hpp"
#include "biasprobe/parallel.hpp"
#include "biasprobe/rng.hpp"

namespace biasprobe {

struct ForestParams {
    int n_trees = 100;
    int min_split = 2;
    int max_depth = -1; // -1 = no cap
    int mtry = 0;       // 0 = auto: ceil(p/3) regression, ceil(sqrt(p)) classification
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int n_threads = 1;
};

namespace forest_detail {

struct Node {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0; // leaf: mean target (regression) or majority class (classification)
};

struct Tree {
    std::vector<Node> nodes;

    double predict(const std::vector<double>& x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                                   : nodes[i].right;
        return nodes[i].value;
    }
};

enum class Criterion { Mse, Gini };

// Best split over one feature for the samples in idx. Gain is the decrease in
// total SSE (regression) or weighted Gini (classification). Returns false if
// the feature is constant over the node.
struct Split {
    double gain = -1.0;
    int feature = -1;
    double threshold = 0.0;
};

class Builder {
public:
    Builder(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
            const ForestParams& params, Criterion criterion, int n_classes)
        : x_(x), y_(y), params_(params), criterion_(criterion), n_classes_(n_classes),
          p_(x.empty() ? 0 : x.front().size()) {}

    Tree build(Rng& rng) const {
        const std::size_t n = x_.size();
        std::vector<int> idx(n);
        if (params_.bootstrap) {
            for (auto& i : idx) i = static_cast<int>(rng() % n);
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        Tree tree;
        grow(tree, idx, 0, rng);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<int>& idx, int depth, Rng& rng) const {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});

        bool pure = true;
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (y_[static_cast<std::size_t>(idx[i])] != y_[static_cast<std::size_t>(idx[0])]) {
                pure = false;
                break;
            }
        const bool stop = static_cast<int>(idx.size()) < params_.min_split || pure ||
                          (params_.max_depth >= 0 && depth >= params_.max_depth);

        Split best;
        if (!stop) {
            std::vector<int> features = sample_features(rng);
            best = best_split(idx, features);
            if (best.feature < 0) {
                // fall back to scanning every feature so an impure node with a
                // usable split is never forced into a leaf
                std::vector<int> all(p_);
                std::iota(all.begin(), all.end(), 0);
                best = best_split(idx, all);
            }
        }

        if (stop || best.feature < 0) {
            tree.nodes[static_cast<std::size_t>(node_id)].value = leaf_value(idx);
            return node_id;
        }

        std::vector<int> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (int i : idx) {
            if (x_[static_cast<std::size_t>(i)][static_cast<std::size_t>(best.feature)] <=
                best.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        const int left = grow(tree, left_idx, depth + 1, rng);
        const int right = grow(tree, right_idx, depth + 1, rng);
        Node& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }

    std::vector<int> sample_features(Rng& rng) const {
        const int m = std::min<int>(effective_mtry(), static_cast<int>(p_));
        std::vector<int> all(p_);
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < m; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) + rng() % (all.size() - static_cast<std::size_t>(i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(m));
        return all;
    }

    int effective_mtry() const {
        if (params_.mtry > 0) return params_.mtry;
        const double p = static_cast<double>(p_);
        return criterion_ == Criterion::Mse ? static_cast<int>(std::ceil(p / 3.0))
                                            : static_cast<int>(std::ceil(std::sqrt(p)));
    }

    double leaf_value(const std::vector<int>& idx) const {
        if (criterion_ == Criterion::Mse) {
            double s = 0.0;
            for (int i : idx) s += y_[static_cast<std::size_t>(i)];
            return s / static_cast<double>(idx.size());
        }
        std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
        for (int i : idx) ++counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(i)])];
        // majority class, ties toward the lowest class index
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
        return static_cast<double>(best);
    }

    Split best_split(const std::vector<int>& idx, const std::vector<int>& features) const {
        Split best;
        std::vector<std::pair<double, double>> vals(idx.size()); // (feature value, target)
        for (int f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const std::size_t r = static_cast<std::size_t>(idx[i]);
                vals[i] = {x_[r][static_cast<std::size_t>(f)], y_[r]};
            }
            std::sort(vals.begin(), vals.end());
            Split s = criterion_ == Criterion::Mse ? best_split_mse(vals, f)
                                                   : best_split_gini(vals, f);
            if (s.feature < 0) continue;
            if (s.gain > best.gain ||
                (s.gain == best.gain &&
                 (s.feature < best.feature ||
                  (s.feature == best.feature && s.threshold < best.threshold))))
                best = s;
        }
        return best;
    }

    static Split best_split_mse(const std::vector<std::pair<double, double>>& vals, int feature) {
        const std::size_t n = vals.size();
        double total = 0.0;
        for (const auto& [v, y] : vals) total += y;
        Split best;
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double right_sum = total - left_sum;
            // maximizing sum_l^2/n_l + sum_r^2/n_r == minimizing SSE
            const double gain =
                left_sum * left_sum / nl + right_sum * right_sum / nr - total * total / static_cast<double>(n);
            const double threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
            if (gain > best.gain || (gain == best.gain && threshold < best.threshold)) {
                best.gain = gain;
                best.feature = feature;
                best.threshold = threshold;
            }
        }
        if (best.feature >= 0 && best.gain <= 0.0) best.feature = -1;
        return best;
    }

    Split best_split_gini(const std::vector<std::pair<double, double>>& vals, int feature) const {
        const std::size_t n = vals.size();
        std::vector<double> total(static_cast<std::size_t>(n_classes_), 0.0);
        for (const auto& [v, y] : vals) total[static_cast<std::size_t>(y)] += 1.0;
        auto weighted_purity = [](const std::vector<double>& counts, double nn) {
            // n * (1 - gini) up to the constant: sum of squared counts / n
            double s = 0.0;
            for (double c : counts) s += c * c;
            return s / nn;
        };
        Split best;
        std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
        const double parent = weighted_purity(total, static_cast<double>(n));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left[static_cast<std::size_t>(vals[i].second)] += 1.0;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            std::vector<double> right(total);
            for (std::size_t c = 0; c < right.size(); ++c) right[c] -= left[c];
            const double gain = weighted_purity(left, nl) + weighted_purity(right, nr) - parent;
            const double threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
            if (gain > best.gain || (gain == best.gain && threshold < best.threshold)) {
                best.gain = gain;
                best.feature = feature;
                best.threshold = threshold;
            }
        }
        if (best.feature >= 0 && best.gain <= 0.0) best.feature = -1;
        return best;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<double>& y_;
    const ForestParams& params_;
    Criterion criterion_;
    int n_classes_;
    std::size_t p_;
};

inline void validate_training_data(const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y) {
    if (x.size() < 2) throw EmptyData("forest: need at least 2 training rows");
    if (x.size() != y.size()) throw DimensionMismatch("forest: X/y row count mismatch");
    const std::size_t p = x.front().size();
    if (p == 0) throw EmptyData("forest: no features");
    for (const auto& row : x) {
        if (row.size() != p) throw DimensionMismatch("forest: ragged feature rows");
        for (double v : row)
            if (!std::isfinite(v)) throw NonFiniteInput("forest: non-finite feature value");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw NonFiniteInput("forest: non-finite target value");
}

inline std::vector<Tree> fit_trees(const std::vector<std::vector<double>>& x,
                                   const std::vector<double>& y, const ForestParams& params,
                                   Criterion criterion, int n_classes) {
    if (params.n_trees < 1) throw InvariantViolation("forest: n_trees must be >= 1");
    if (params.min_split < 2) throw InvariantViolation("forest: min_split must be >= 2");
    validate_training_data(x, y);
    Builder builder(x, y, params, criterion, n_classes);
    std::vector<Tree> trees(static_cast<std::size_t>(params.n_trees));
    // per-tree RNG streams derived from the master seed, so serial and
    // parallel training produce bit-identical forests
    parallel_for(trees.size(), static_cast<std::size_t>(std::max(1, params.n_threads)),
                 [&](std::size_t t) {
                     Rng rng = make_rng(params.seed, t);
                     trees[t] = builder.build(rng);
                 });
    return trees;
}

} // namespace forest_detail

class RegressionForest {
public:
    RegressionForest() = default;

    static RegressionForest fit(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, const ForestParams& params) {
        RegressionForest f;
        f.params_ = params;
        f.n_features_ = x.empty() ? 0 : x.front().size();
        f.trees_ = forest_detail::fit_trees(x, y, params, forest_detail::Criterion::Mse, 0);
        return f;
    }

    double predict(const std::vector<double>& x) const {
        if (x.size() != n_features_) throw DimensionMismatch("predict: feature count mismatch");
        double s = 0.0;
        for (const auto& t : trees_) s += t.predict(x);
        return s / static_cast<double>(trees_.size());
    }

    std::vector<double> predict_all(const std::vector<std::vector<double>>& xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
        return out;
    }

    const ForestParams& params() const { return params_; }
    const std::vector<forest_detail::Tree>& trees() const { return trees_; }

    nlohmann::json to_json() const;
    static RegressionForest from_json(const nlohmann::json& j);

private:
    friend class ClassForest;
    ForestParams params_;
    std::size_t n_features_ = 0;
    std::vector<forest_detail::Tree> trees_;
};

class ClassForest {
public:
    ClassForest() = default;

    /// Labels are class indices 0..n_classes-1. A single-class training set
    /// yields a constant classifier rather than an error.
    static ClassForest fit(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                           int n_classes, const ForestParams& params) {
        if (n_classes < 2) throw InvariantViolation("ClassForest: need n_classes >= 2");
        std::vector<double> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0 || labels[i] >= n_classes)
                throw InvariantViolation("ClassForest: label out of range");
            y[i] = static_cast<double>(labels[i]);
        }
        ClassForest f;
        f.params_ = params;
        f.n_classes_ = n_classes;
        f.n_features_ = x.empty() ? 0 : x.front().size();
        f.trees_ = forest_detail::fit_trees(x, y, params, forest_detail::Criterion::Gini, n_classes);
        return f;
    }

    /// Majority vote across trees; ties break toward the lowest class index.
    int predict_class(const std::vector<double>& x) const {
        if (x.size() != n_features_) throw DimensionMismatch("predict_class: feature count mismatch");
        std::vector<int> votes(static_cast<std::size_t>(n_classes_), 0);
        for (const auto& t : trees_)
            ++votes[static_cast<std::size_t>(static_cast<int>(t.predict(x)))];
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
        return best;
    }

    const ForestParams& params() const { return params_; }
    int n_classes() const { return n_classes_; }

    nlohmann::json to_json() const;
    static ClassForest from_json(const nlohmann::json& j);

private:
    ForestParams params_;
    int n_classes_ = 2;
    std::size_t n_features_ = 0;
    std::vector<forest_detail::Tree> trees_;
};

// ---- serialization ----------------------------------------------------------
// Versioned JSON; doubles are emitted in round-trip form so a loaded forest
// reproduces predictions bit-exactly.

namespace forest_detail {

inline nlohmann::json params_to_json(const ForestParams& p) {
    return {{"n_trees", p.n_trees},   {"min_split", p.min_split}, {"max_depth", p.max_depth},
            {"mtry", p.mtry},         {"bootstrap", p.bootstrap}, {"seed", p.seed}};
}

inline ForestParams params_from_json(const nlohmann::json& j) {
    ForestParams p;
    p.n_trees = j.at("n_trees").get<int>();
    p.min_split = j.at("min_split").get<int>();
    p.max_depth = j.at("max_depth").get<int>();
    p.mtry = j.at("mtry").get<int>();
    p.bootstrap = j.at("bootstrap").get<bool>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

inline nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        out.push_back(std::move(nodes));
    }
    return out;
}

inline std::vector<Tree> trees_from_json(const nlohmann::json& j) {
    std::vector<Tree> trees;
    for (const auto& jt : j) {
        Tree t;
        for (const auto& jn : jt) {
            Node n;
            n.feature = jn.at(0).get<int>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<int>();
            n.right = jn.at(3).get<int>();
            n.value = jn.at(4).get<double>();
            t.nodes.push_back(n);
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

} // namespace forest_detail

inline nlohmann::json RegressionForest::to_json() const {
    return {{"format_version", 1},
            {"type", "regression"},
            {"n_features", n_features_},
            {"params", forest_detail::params_to_json(params_)},
            {"trees", forest_detail::trees_to_json(trees_)}};
}

inline RegressionForest RegressionForest::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1) throw ParseError("forest: unknown format version");
    if (j.at("type").get<std::string>() != "regression")
        throw ParseError("forest: not a regression forest");
    RegressionForest f;
    f.params_ = forest_detail::params_from_json(j.at("params"));
    f.n_features_ = j.at("n_features").get<std::size_t>();
    f.trees_ = forest_detail::trees_from_json(j.at("trees"));
    return f;
}

inline nlohmann::json ClassForest::to_json() const {
    return {{"format_version", 1},
            {"type", "classification"},
            {"n_features", n_features_},
            {"n_classes", n_classes_},
            {"params", forest_detail::params_to_json(params_)},
            {"trees", forest_detail::trees_to_json(trees_)}};
}

inline ClassForest ClassForest::from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1) throw ParseError("forest: unknown format version");
    if (j.at("type").get<std::string>() != "classification")
        throw ParseError("forest: not a classification forest");
    ClassForest f;
    f.params_ = forest_detail::params_from_json(j.at("params"));
    f.n_features_ = j.at("n_features").get<std::size_t>();
    f.n_classes_ = j.at("n_classes").get<int>();
    f.trees_ = forest_detail::trees_from_json(j.at("trees"));
    return f;
}

} // namespace biasprobe
