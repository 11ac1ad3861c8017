#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace tacpdp;
using namespace tacpdp::testing;

namespace {

TreatedPair training_set(const std::vector<std::vector<double>>& rows, const std::vector<bool>& labels,
                         std::vector<double> weights = {}) {
    TreatedPair t;
    t.train_features = Matrix::from_rows(rows);
    t.train_labels = labels;
    t.train_weights = weights.empty() ? std::vector<double>(rows.size(), 1.0) : std::move(weights);
    t.selected_attributes.resize(rows.front().size());
    std::iota(t.selected_attributes.begin(), t.selected_attributes.end(), std::size_t{0});
    return t;
}

double training_accuracy(const DecisionTree& tree, const TreatedPair& t) {
    std::size_t ok = 0;
    for (std::size_t r = 0; r < t.train_size(); ++r) ok += tree.predict(t.train_features.row(r)) == t.train_labels[r];
    return static_cast<double>(ok) / static_cast<double>(t.train_size());
}

// Unbalanced XOR: quadrant (+,+) clean, (+,-) and (-,+) defective, (-,-)
// clean, with unequal counts so the root split has positive gain.
TreatedPair xor_fixture() {
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    const auto add = [&](double x0, double y0, std::size_t n, bool label) {
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({x0 + 0.1 * static_cast<double>(i), y0 + 0.1 * static_cast<double>(n - i)});
            labels.push_back(label);
        }
    };
    add(10, 10, 12, false);
    add(10, 0, 8, true);
    add(0, 10, 8, true);
    add(0, 0, 4, false);
    return training_set(rows, labels);
}

}  // namespace

TEST(Tree, SeparableOneDimensional) {
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    for (int i = 1; i <= 20; ++i) {
        rows.push_back({0.5 * i});
        labels.push_back(0.5 * i > 5.0);
    }
    const auto t = training_set(rows, labels);
    const auto tree = train_tree(t);
    EXPECT_EQ(tree.depth(), 1u);
    EXPECT_GT(tree.root().threshold, 5.0);
    EXPECT_LT(tree.root().threshold, 5.5);
    EXPECT_EQ(training_accuracy(tree, t), 1.0);
}

TEST(Tree, IdenticalFeaturesGiveWeightedMajorityLeaf) {
    const auto t = training_set({{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}}, {true, true, true, false, false});
    const auto tree = train_tree(t);
    EXPECT_EQ(tree.nodes().size(), 1u);
    EXPECT_TRUE(tree.predict(std::vector<double>{1, 1}));

    const auto weighted =
        train_tree(training_set({{1}, {1}, {1}, {1}, {1}}, {true, true, true, false, false}, {1, 1, 1, 5, 5}));
    EXPECT_EQ(weighted.nodes().size(), 1u);
    EXPECT_DOUBLE_EQ(weighted.predict_proba(std::vector<double>{1}), 4.0 / 15.0);
    EXPECT_FALSE(weighted.predict(std::vector<double>{1}));
}

TEST(Tree, XorNeedsDepthTwo) {
    const auto t = xor_fixture();
    // No single threshold on either attribute with any leaf labelling is perfect.
    for (std::size_t a = 0; a < 2; ++a) {
        auto values = t.train_features.column(a);
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = (values[i] + values[i + 1]) / 2.0;
            for (int lab = 0; lab < 4; ++lab) {
                std::size_t ok = 0;
                for (std::size_t r = 0; r < t.train_size(); ++r) {
                    const bool pred = t.train_features(r, a) <= thr ? (lab & 1) : (lab & 2);
                    ok += pred == t.train_labels[r];
                }
                EXPECT_LT(ok, t.train_size());
            }
        }
    }
    const auto tree = train_tree(t);
    EXPECT_GE(tree.depth(), 2u);
    EXPECT_EQ(training_accuracy(tree, t), 1.0);
}

TEST(Tree, LaplaceLeafProbabilities) {
    EXPECT_EQ(DecisionTree::leaf_proba({true, 0, 0, 0, 0, 0, 0}), 0.5);
    EXPECT_DOUBLE_EQ(DecisionTree::leaf_proba({true, 0, 0, 0, 0, 8, 0}), 0.9);
    for (double k : {1.0, 3.0, 17.0}) EXPECT_DOUBLE_EQ(DecisionTree::leaf_proba({true, 0, 0, 0, 0, k, k}), 0.5);
}

TEST(Tree, PessimisticErrorEstimate) {
    // No observed errors: N * (1 - CF^(1/N)).
    EXPECT_NEAR(pessimistic_extra_errors(6, 0, 0.25), 6 * (1 - std::pow(0.25, 1.0 / 6)), 1e-12);
    // More errors or a smaller confidence factor never lowers the estimate.
    for (double n : {5.0, 20.0, 100.0}) {
        double prev = -1.0;
        for (double e = 0; e < n / 2; e += 1.0) {
            const double total = e + pessimistic_extra_errors(n, e, 0.25);
            EXPECT_GT(total, prev);
            EXPECT_GE(e + pessimistic_extra_errors(n, e, 0.10), total);
            prev = total;
        }
    }
}

TEST(Tree, PruningCollapsesNoise) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> rows;
    std::vector<bool> labels;
    for (int i = 0; i < 200; ++i) {
        rows.push_back({u(rng), u(rng), u(rng)});
        labels.push_back(u(rng) < 0.3);
    }
    const auto t = training_set(rows, labels);
    TreeParams unpruned;
    unpruned.prune = false;
    const auto full = train_tree(t, unpruned);
    const auto pruned = train_tree(t);
    EXPECT_LT(pruned.leaf_count(), full.leaf_count());
    TreeParams harsh;
    harsh.pruning_confidence = 0.10;
    EXPECT_LE(train_tree(t, harsh).leaf_count(), pruned.leaf_count());
}

TEST(Tree, RespectsSelectedAttributes) {
    auto t = training_set({{0, 1}, {0, 2}, {0, 8}, {0, 9}, {5, 1}, {5, 2}, {5, 8}, {5, 9}},
                          {false, false, true, true, false, false, true, true});
    t.selected_attributes = {0};
    const auto tree = train_tree(t);
    EXPECT_EQ(tree.nodes().size(), 1u);
    t.selected_attributes = {1};
    const auto tree2 = train_tree(t);
    EXPECT_EQ(tree2.root().attribute, 1u);
    EXPECT_EQ(training_accuracy(tree2, t), 1.0);
}

TEST(Tree, DeterministicAndDumpable) {
    const auto t = xor_fixture();
    EXPECT_EQ(train_tree(t), train_tree(t));
    std::ostringstream os;
    train_tree(t).dump(os);
    EXPECT_NE(os.str().find("attr"), std::string::npos);
    EXPECT_NE(os.str().find("leaf"), std::string::npos);
}

TEST(Tree, Errors) {
    EXPECT_THROW(train_tree(training_set({{1}}, {true})), TrainingError);
    auto t = training_set({{1}, {2}}, {true, false}, {0, 0});
    EXPECT_THROW(train_tree(t), TrainingError);
    t = training_set({{1}, {2}}, {true, false});
    t.selected_attributes.clear();
    EXPECT_THROW(train_tree(t), TrainingError);
    t = training_set({{1}, {2}}, {true, false});
    TreeParams bad;
    bad.pruning_confidence = 0.5;
    EXPECT_THROW(train_tree(t, bad), ConfigError);
    const auto tree = train_tree(training_set({{1}, {2}, {8}, {9}}, {false, false, true, true}));
    EXPECT_THROW(tree.predict_proba(std::vector<double>{std::nan("")}), PredictionError);
}
