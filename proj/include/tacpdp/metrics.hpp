#pragma once

#include <tacpdp/error.hpp>
#include <tacpdp/tree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace tacpdp {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Every ratio whose denominator is zero evaluates to 0.
struct ScoreSet {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
    double gmeasure = 0.0;
    double mcc = 0.0;
    double auc = 0.5;
};

inline ConfusionMatrix confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
    if (predicted.size() != actual.size()) throw ConfigError("confusion: length mismatch");
    if (predicted.empty()) throw ConfigError("confusion: no instances");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) {
            ++(actual[i] ? cm.tp : cm.fp);
        } else {
            ++(actual[i] ? cm.fn : cm.tn);
        }
    }
    return cm;
}

/// Precision, recall, F-score, G-measure and MCC. `auc` is left at 0.5.
inline ScoreSet scores(const ConfusionMatrix& cm) {
    const auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };
    const double tp = static_cast<double>(cm.tp);
    const double fp = static_cast<double>(cm.fp);
    const double tn = static_cast<double>(cm.tn);
    const double fn = static_cast<double>(cm.fn);

    ScoreSet s;
    s.recall = ratio(tp, tp + fn);
    s.precision = ratio(tp, tp + fp);
    s.fscore = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    const double pf = ratio(fp, tn + fp);
    s.gmeasure = ratio(2.0 * s.recall * (1.0 - pf), s.recall + (1.0 - pf));
    const double radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    s.mcc = radicand == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(radicand);
    return s;
}

struct AucResult {
    double value = 0.5;
    // Single-class labels: AUC undefined, value is the 0.5 sentinel.
    bool degenerate = false;
};

/// Rank-based (Mann-Whitney) AUC with midranks for tied scores.
inline AucResult auc(std::span<const double> score, const std::vector<bool>& actual) {
    if (score.size() != actual.size()) throw ConfigError("auc: length mismatch");
    const std::size_t n = score.size();
    const auto positives = static_cast<std::size_t>(std::count(actual.begin(), actual.end(), true));
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) return {0.5, true};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    double positive_rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && score[order[j]] == score[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (actual[order[k]]) positive_rank_sum += midrank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
    return {u / (p * static_cast<double>(negatives)), false};
}

/// Scores of one test project-version.
struct VersionScore {
    std::string project_id;
    std::string version_id;
    ConfusionMatrix cm;
    ScoreSet scores;
    bool auc_degenerate = false;
};

/// Scores every test version of the pair independently. Versions with no
/// instances are skipped with a warning on `log`.
inline std::vector<VersionScore> evaluate_pair(const DecisionTree& tree, const TreatedPair& treated,
                                               std::ostream* log = &std::cerr, double threshold = 0.5) {
    std::vector<VersionScore> out;
    for (const auto& g : treated.test_groups) {
        if (g.end <= g.begin) {
            if (log) *log << "warning: test version " << g.project_id << "-" << g.version_id << " has no instances\n";
            continue;
        }
        std::vector<double> proba;
        std::vector<bool> predicted;
        std::vector<bool> actual;
        for (std::size_t r = g.begin; r < g.end; ++r) {
            const double p = tree.predict_proba(treated.test_features.row(r));
            proba.push_back(p);
            predicted.push_back(p >= threshold);
            actual.push_back(treated.test_labels[r]);
        }
        VersionScore vs{g.project_id, g.version_id, confusion(predicted, actual), {}, false};
        vs.scores = scores(vs.cm);
        const auto a = auc(proba, actual);
        vs.scores.auc = a.value;
        vs.auc_degenerate = a.degenerate;
        out.push_back(std::move(vs));
    }
    return out;
}

}  // namespace tacpdp
