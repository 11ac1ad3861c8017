#pragma once

// C4.5-style binary decision tree over numeric attributes with instance
// weights, gain-ratio split selection and pessimistic error-based pruning
// (subtree replacement).

#include <tacpdp/csv.hpp>
#include <tacpdp/error.hpp>
#include <tacpdp/treatments.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tacpdp {

struct TreeParams {
    double pruning_confidence = 0.25;
    double min_leaf_weight = 2.0;
    std::uint64_t seed = 0;  // training is deterministic; kept for config round-trips
    bool prune = true;

    void validate() const {
        if (!(pruning_confidence >= 0.10 && pruning_confidence <= 0.30)) {
            throw ConfigError("pruning_confidence must lie in [0.10, 0.30], got " +
                              csv::format_double(pruning_confidence));
        }
        if (!(min_leaf_weight > 0.0)) throw ConfigError("min_leaf_weight must be positive");
    }
};

struct TreeNode {
    bool leaf = true;
    std::size_t attribute = 0;
    double threshold = 0.0;  // x <= threshold goes left
    std::size_t left = 0;
    std::size_t right = 0;
    double defective_weight = 0.0;
    double clean_weight = 0.0;

    double total_weight() const noexcept { return defective_weight + clean_weight; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Upper-confidence estimate of extra errors at a leaf holding `n` weight
/// with `e` misclassified, at confidence `cf`.
inline double pessimistic_extra_errors(double n, double e, double cf) {
    if (e < 1.0) {
        const double base = n * (1.0 - std::pow(cf, 1.0 / n));
        if (e == 0.0) return base;
        return base + e * (pessimistic_extra_errors(n, 1.0, cf) - base);
    }
    if (e + 0.5 >= n) return std::max(n - e, 0.0);
    const double z = boost::math::quantile(boost::math::normal(), 1.0 - cf);
    const double f = (e + 0.5) / n;
    const double r = (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
                     (1.0 + z * z / n);
    return r * n - e;
}

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
    }

    std::size_t depth() const { return nodes_.empty() ? 0 : depth_from(0); }

    /// Laplace-smoothed defective fraction of the reached leaf.
    double predict_proba(std::span<const double> instance) const {
        for (double v : instance) {
            if (!std::isfinite(v)) throw PredictionError("non-finite feature value");
        }
        std::size_t i = 0;
        while (!nodes_[i].leaf) {
            const auto& n = nodes_[i];
            if (n.attribute >= instance.size()) throw PredictionError("instance lacks attribute " + std::to_string(n.attribute));
            i = instance[n.attribute] <= n.threshold ? n.left : n.right;
        }
        return leaf_proba(nodes_[i]);
    }

    bool predict(std::span<const double> instance, double threshold = 0.5) const {
        return predict_proba(instance) >= threshold;
    }

    static double leaf_proba(const TreeNode& leaf) {
        return (leaf.defective_weight + 1.0) / (leaf.defective_weight + leaf.clean_weight + 2.0);
    }

    void dump(std::ostream& os) const {
        if (!nodes_.empty()) dump_from(os, 0, 0);
    }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::size_t depth_from(std::size_t i) const {
        const auto& n = nodes_[i];
        return n.leaf ? 0 : 1 + std::max(depth_from(n.left), depth_from(n.right));
    }

    void dump_from(std::ostream& os, std::size_t i, std::size_t indent) const {
        const auto& n = nodes_[i];
        os << std::string(indent * 2, ' ');
        if (n.leaf) {
            os << "leaf defective=" << csv::format_double(n.defective_weight)
               << " clean=" << csv::format_double(n.clean_weight) << '\n';
            return;
        }
        os << "attr " << n.attribute << " <= " << csv::format_double(n.threshold) << '\n';
        dump_from(os, n.left, indent + 1);
        dump_from(os, n.right, indent + 1);
    }

    std::vector<TreeNode> nodes_;
};

namespace detail {

inline double entropy(double a, double b) {
    const double t = a + b;
    if (t <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : {a, b}) {
        if (w > 0.0) {
            const double p = w / t;
            h -= p * std::log2(p);
        }
    }
    return h;
}

struct SplitCandidate {
    std::size_t attribute = 0;
    double threshold = 0.0;
    double gain = 0.0;
    double gain_ratio = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const TreatedPair& data, const TreeParams& params) : data_(data), params_(params) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(data_.train_size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        grow(all);
        return std::move(nodes_);
    }

private:
    double value(std::size_t row, std::size_t attr) const { return data_.train_features(row, attr); }

    std::size_t grow(const std::vector<std::size_t>& rows) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        double wd = 0.0;
        double wc = 0.0;
        for (std::size_t r : rows) (data_.train_labels[r] ? wd : wc) += data_.train_weights[r];
        nodes_[id].defective_weight = wd;
        nodes_[id].clean_weight = wc;

        if (wd == 0.0 || wc == 0.0 || wd + wc < 2.0 * params_.min_leaf_weight) return id;
        const auto split = best_split(rows, wd, wc);
        if (!split) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) (value(r, split->attribute) <= split->threshold ? left : right).push_back(r);
        nodes_[id].leaf = false;
        nodes_[id].attribute = split->attribute;
        nodes_[id].threshold = split->threshold;
        const std::size_t l = grow(left);
        const std::size_t rr = grow(right);
        nodes_[id].left = l;
        nodes_[id].right = rr;
        return id;
    }

    // Best threshold per attribute by information gain; across attributes the
    // highest gain ratio among those with at least average gain.
    std::optional<SplitCandidate> best_split(const std::vector<std::size_t>& rows, double wd, double wc) const {
        const double total = wd + wc;
        const double parent_h = entropy(wd, wc);
        std::vector<SplitCandidate> per_attr;
        std::vector<std::size_t> sorted;
        for (std::size_t attr : data_.selected_attributes) {
            sorted = rows;
            std::stable_sort(sorted.begin(), sorted.end(),
                             [&](std::size_t a, std::size_t b) { return value(a, attr) < value(b, attr); });
            double ld = 0.0;
            double lc = 0.0;
            std::optional<SplitCandidate> best;
            double best_left = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                const std::size_t r = sorted[i];
                (data_.train_labels[r] ? ld : lc) += data_.train_weights[r];
                const double v = value(r, attr);
                const double next = value(sorted[i + 1], attr);
                if (!(v < next)) continue;
                const double lw = ld + lc;
                const double rw = total - lw;
                if (lw < params_.min_leaf_weight || rw < params_.min_leaf_weight) continue;
                const double gain =
                    parent_h - (lw / total) * entropy(ld, lc) - (rw / total) * entropy(wd - ld, wc - lc);
                if (!best || gain > best->gain) {
                    double threshold = v + (next - v) / 2.0;
                    if (!(threshold < next)) threshold = v;
                    best = SplitCandidate{attr, threshold, gain, 0.0};
                    best_left = lw;
                }
            }
            if (best && best->gain > kMinGain) {
                const double pl = best_left / total;
                const double split_info = entropy(pl, 1.0 - pl);
                best->gain_ratio = split_info > 0.0 ? best->gain / split_info : 0.0;
                per_attr.push_back(*best);
            }
        }
        if (per_attr.empty()) return std::nullopt;
        double mean_gain = 0.0;
        for (const auto& c : per_attr) mean_gain += c.gain;
        mean_gain /= static_cast<double>(per_attr.size());
        std::optional<SplitCandidate> chosen;
        for (const auto& c : per_attr) {
            if (c.gain + kMinGain < mean_gain) continue;
            if (!chosen || c.gain_ratio > chosen->gain_ratio) chosen = c;
        }
        return chosen;
    }

    static constexpr double kMinGain = 1e-12;

    const TreatedPair& data_;
    const TreeParams& params_;
    std::vector<TreeNode> nodes_;
};

inline double leaf_error_estimate(const TreeNode& n, double cf) {
    const double e = std::min(n.defective_weight, n.clean_weight);
    return e + pessimistic_extra_errors(n.total_weight(), e, cf);
}

// Bottom-up subtree replacement; returns the estimated errors of node `i`.
inline double prune_node(std::vector<TreeNode>& nodes, std::size_t i, double cf) {
    if (nodes[i].leaf) return leaf_error_estimate(nodes[i], cf);
    const double subtree = prune_node(nodes, nodes[i].left, cf) + prune_node(nodes, nodes[i].right, cf);
    const double as_leaf = leaf_error_estimate(nodes[i], cf);
    if (as_leaf <= subtree + 0.1) {
        nodes[i].leaf = true;
        return as_leaf;
    }
    return subtree;
}

inline std::size_t compact(const std::vector<TreeNode>& src, std::size_t i, std::vector<TreeNode>& dst) {
    const std::size_t id = dst.size();
    dst.push_back(src[i]);
    if (src[i].leaf) {
        dst[id].attribute = 0;
        dst[id].threshold = 0.0;
        dst[id].left = dst[id].right = 0;
        return id;
    }
    const std::size_t l = compact(src, src[i].left, dst);
    const std::size_t r = compact(src, src[i].right, dst);
    dst[id].left = l;
    dst[id].right = r;
    return id;
}

}  // namespace detail

inline DecisionTree train_tree(const TreatedPair& treated, const TreeParams& params = {}) {
    params.validate();
    const std::size_t n = treated.train_size();
    if (n < 2) throw TrainingError("need at least two training instances");
    if (treated.train_features.rows() != n || treated.train_weights.size() != n) {
        throw TrainingError("training features, labels and weights are misaligned");
    }
    if (treated.selected_attributes.empty()) throw TrainingError("no attribute selected");
    double total = 0.0;
    for (double w : treated.train_weights) {
        if (!std::isfinite(w) || w < 0.0) throw TrainingError("instance weights must be finite and nonnegative");
        total += w;
    }
    if (total <= 0.0) throw TrainingError("zero total instance weight");
    for (std::size_t a : treated.selected_attributes) {
        if (a >= treated.train_features.cols()) throw TrainingError("selected attribute out of range");
    }

    std::vector<TreeNode> nodes = detail::TreeBuilder(treated, params).build();
    if (params.prune) detail::prune_node(nodes, 0, params.pruning_confidence);
    std::vector<TreeNode> compacted;
    compacted.reserve(nodes.size());
    detail::compact(nodes, 0, compacted);
    return DecisionTree(std::move(compacted));
}

}  // namespace tacpdp
