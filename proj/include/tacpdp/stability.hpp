#pragma once

// Aggregation of per-version results: stability statistics, rank-sum tests,
// Cliff's delta, rankscores and class balancing.

#include <tacpdp/error.hpp>
#include <tacpdp/metrics.hpp>
#include <tacpdp/pairs.hpp>
#include <tacpdp/treatments.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace tacpdp {

enum class Metric { Precision, Recall, FScore, GMeasure, MCC, AUC };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::Precision, Metric::Recall, Metric::FScore,
                                                      Metric::GMeasure,  Metric::MCC,    Metric::AUC};
/// Metrics that enter the stability analysis and the Mean Rank Score.
inline constexpr std::array<Metric, 4> kRankingMetrics = {Metric::FScore, Metric::AUC, Metric::MCC,
                                                          Metric::GMeasure};

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Precision: return "precision";
        case Metric::Recall: return "recall";
        case Metric::FScore: return "fscore";
        case Metric::GMeasure: return "gmeasure";
        case Metric::MCC: return "mcc";
        case Metric::AUC: return "auc";
    }
    return "?";
}

inline double metric_value(const ScoreSet& s, Metric m) {
    switch (m) {
        case Metric::Precision: return s.precision;
        case Metric::Recall: return s.recall;
        case Metric::FScore: return s.fscore;
        case Metric::GMeasure: return s.gmeasure;
        case Metric::MCC: return s.mcc;
        case Metric::AUC: return s.auc;
    }
    return 0.0;
}

/// One row of the results table: a model evaluated on one test version.
struct ResultRecord {
    std::string technique;
    ConfigurationKind kind = ConfigurationKind::CC;
    std::optional<std::size_t> window_k;
    std::size_t split_index = 0;
    std::size_t gap = 0;
    std::string test_project;
    std::string test_version;
    ConfusionMatrix cm;
    ScoreSet scores;
    bool auc_degenerate = false;
};

// ---------------------------------------------------------------------------
// Stability

struct MeanSd {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n - 1 divisor); 0 when n < 2
};

inline MeanSd mean_sd(std::span<const double> v) {
    MeanSd out;
    out.n = v.size();
    if (v.empty()) return out;
    out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return out;
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return out;
}

struct GroupKey {
    std::string technique;
    ConfigurationKind kind = ConfigurationKind::CC;
    std::optional<std::size_t> window_k;  // set only for fixed-window groupings

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct MetricStability {
    Metric metric = Metric::FScore;
    MeanSd stats;
    bool stable = true;
    bool single_observation = false;  // SD forced to 0
    std::size_t excluded = 0;         // degenerate-AUC rows left out
};

struct StabilityReport {
    GroupKey key;
    std::vector<MetricStability> metrics;  // in kAllMetrics order
};

/// Mean and sample SD of every metric over one group of results. A metric is
/// stable when its SD is below `threshold`. Degenerate-AUC rows are excluded
/// from the AUC statistics only.
inline StabilityReport aggregate(std::span<const ResultRecord> group, const GroupKey& key, double threshold = 0.05) {
    if (group.empty()) throw ConfigError("aggregate: empty group");
    StabilityReport rep{key, {}};
    for (Metric m : kAllMetrics) {
        std::vector<double> values;
        std::size_t excluded = 0;
        for (const auto& r : group) {
            if (m == Metric::AUC && r.auc_degenerate) {
                ++excluded;
                continue;
            }
            values.push_back(metric_value(r.scores, m));
        }
        MetricStability ms{m, mean_sd(values), true, values.size() < 2, excluded};
        ms.stable = ms.stats.sd < threshold;
        rep.metrics.push_back(ms);
    }
    return rep;
}

/// Groups results by (technique, kind) or, with `per_window`, by (technique,
/// kind, window) and aggregates each group.
inline std::vector<StabilityReport> stability_reports(std::span<const ResultRecord> results, bool per_window,
                                                      double threshold = 0.05) {
    std::map<GroupKey, std::vector<ResultRecord>> groups;
    for (const auto& r : results) {
        groups[GroupKey{r.technique, r.kind, per_window ? r.window_k : std::nullopt}].push_back(r);
    }
    std::vector<StabilityReport> out;
    for (const auto& [key, rows] : groups) out.push_back(aggregate(rows, key, threshold));
    return out;
}

// ---------------------------------------------------------------------------
// Wilcoxon rank-sum

struct WilcoxonOptions {
    // Exact enumeration when both samples have at most this many values.
    std::size_t exact_max_n = 10;
};

namespace detail {

/// Midranks (1-based) of the pooled sample, doubled so they are integers.
inline std::vector<std::int64_t> doubled_midranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<std::int64_t> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
        const auto twice_mid = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = twice_mid;
        i = j;
    }
    return ranks;
}

inline double wilcoxon_exact(const std::vector<std::int64_t>& ranks2, std::size_t n1) {
    const std::int64_t max_sum = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
    // ways[j][s]: subsets of size j with doubled rank sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::int64_t r : ranks2) {
        for (std::size_t j = n1; j >= 1; --j) {
            for (std::int64_t s = max_sum; s >= r; --s) {
                ways[j][static_cast<std::size_t>(s)] += ways[j - 1][static_cast<std::size_t>(s - r)];
            }
        }
    }
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < n1; ++i) observed += ranks2[i];
    double total = 0.0;
    double le = 0.0;
    double ge = 0.0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
        const double w = ways[n1][static_cast<std::size_t>(s)];
        total += w;
        if (s <= observed) le += w;
        if (s >= observed) ge += w;
    }
    return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

inline double wilcoxon_normal(const std::vector<std::int64_t>& ranks2, std::size_t n1, std::size_t n2) {
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    const double n = a + b;
    double w = 0.0;
    for (std::size_t i = 0; i < n1; ++i) w += static_cast<double>(ranks2[i]) / 2.0;
    const double u = w - a * (a + 1.0) / 2.0;

    std::map<std::int64_t, std::size_t> ties;
    for (auto r : ranks2) ++ties[r];
    double tie_term = 0.0;
    for (const auto& [rank, t] : ties) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double variance = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (variance <= 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(u - a * b / 2.0) - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace detail

/// Two-sided Wilcoxon rank-sum p-value: exact enumeration for small samples,
/// otherwise the normal approximation with tie and continuity corrections.
inline double wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, const WilcoxonOptions& opts = {}) {
    if (a.empty() || b.empty()) throw ConfigError("wilcoxon_rank_sum: both samples must be nonempty");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) return 1.0;
    const auto ranks2 = detail::doubled_midranks(pooled);
    if (a.size() <= opts.exact_max_n && b.size() <= opts.exact_max_n) return detail::wilcoxon_exact(ranks2, a.size());
    return detail::wilcoxon_normal(ranks2, a.size(), b.size());
}

// ---------------------------------------------------------------------------
// Cliff's delta

enum class Magnitude { Negligible, Small, Medium, Large };

inline std::string_view to_string(Magnitude m) {
    switch (m) {
        case Magnitude::Negligible: return "negligible";
        case Magnitude::Small: return "small";
        case Magnitude::Medium: return "medium";
        case Magnitude::Large: return "large";
    }
    return "?";
}

/// Conventional magnitude labels for |delta|.
inline Magnitude cliffs_magnitude(double delta) {
    const double d = std::abs(delta);
    if (d <= 0.147) return Magnitude::Negligible;
    if (d <= 0.33) return Magnitude::Small;
    if (d <= 0.474) return Magnitude::Medium;
    return Magnitude::Large;
}

struct CliffsDelta {
    double delta = 0.0;
    Magnitude magnitude = Magnitude::Negligible;
};

inline CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ConfigError("cliffs_delta: both samples must be nonempty");
    std::vector<double> sorted_b(b.begin(), b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    std::int64_t dominance = 0;
    for (double x : a) {
        const auto below = std::lower_bound(sorted_b.begin(), sorted_b.end(), x) - sorted_b.begin();
        const auto above = sorted_b.end() - std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
        dominance += below - above;
    }
    const double delta = static_cast<double>(dominance) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    return {delta, cliffs_magnitude(delta)};
}

// ---------------------------------------------------------------------------
// Ranking

struct TechniqueRank {
    std::string technique;
    std::array<double, 4> rankscores{};  // in kRankingMetrics order
    double mean_rank_score = 0.0;
    std::size_t rank = 0;  // 1 = best; ties share a rank
};

struct RankTable {
    std::vector<TechniqueRank> rows;

    const TechniqueRank* find(std::string_view technique) const {
        for (const auto& r : rows) {
            if (r.technique == technique) return &r;
        }
        return nullptr;
    }
};

using MetricValues = std::map<std::string, std::map<Metric, double>>;

/// Rankscore per metric is 1 - (#techniques strictly better) / (#techniques - 1);
/// the Mean Rank Score averages it over the four ranking metrics.
inline RankTable rank_techniques(const MetricValues& values) {
    if (values.size() < 2) throw ConfigError("rank_techniques: at least two techniques required");
    for (const auto& [tech, per_metric] : values) {
        for (Metric m : kRankingMetrics) {
            if (!per_metric.count(m)) {
                throw ConfigError("rank_techniques: technique '" + tech + "' lacks metric " + std::string(to_string(m)));
            }
        }
    }
    const double denom = static_cast<double>(values.size() - 1);
    RankTable table;
    for (const auto& [tech, per_metric] : values) {
        TechniqueRank row{tech, {}, 0.0, 0};
        for (std::size_t mi = 0; mi < kRankingMetrics.size(); ++mi) {
            const double mine = per_metric.at(kRankingMetrics[mi]);
            std::size_t higher = 0;
            for (const auto& [other, other_metrics] : values) {
                if (other_metrics.at(kRankingMetrics[mi]) > mine) ++higher;
            }
            row.rankscores[mi] = 1.0 - static_cast<double>(higher) / denom;
        }
        row.mean_rank_score =
            std::accumulate(row.rankscores.begin(), row.rankscores.end(), 0.0) / static_cast<double>(row.rankscores.size());
        table.rows.push_back(row);
    }
    constexpr double kTie = 1e-12;
    for (auto& row : table.rows) {
        std::size_t better = 0;
        for (const auto& other : table.rows) {
            if (other.mean_rank_score > row.mean_rank_score + kTie) ++better;
        }
        row.rank = better + 1;
    }
    return table;
}

/// Sample SD (n - 1) of each technique's rank across evaluation cells.
inline std::map<std::string, double> rank_stability(std::span<const RankTable> per_cell) {
    std::map<std::string, std::vector<double>> ranks;
    for (const auto& table : per_cell) {
        for (const auto& row : table.rows) ranks[row.technique].push_back(static_cast<double>(row.rank));
    }
    std::map<std::string, double> out;
    for (const auto& [tech, r] : ranks) out[tech] = mean_sd(r).sd;
    return out;
}

// ---------------------------------------------------------------------------
// Class balancing

/// Indices (ascending) surviving random under-sampling of the majority class
/// down to the minority class size.
inline std::vector<std::size_t> undersample_indices(const std::vector<bool>& labels, std::uint64_t seed) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) throw BalancingError("under-sampling needs both classes in the training data");
    auto& majority = pos.size() > neg.size() ? pos : neg;
    const std::size_t target = std::min(pos.size(), neg.size());
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    std::sample(majority.begin(), majority.end(), std::back_inserter(chosen), target, rng);
    majority = std::move(chosen);
    std::vector<std::size_t> keep = pos;
    keep.insert(keep.end(), neg.begin(), neg.end());
    std::sort(keep.begin(), keep.end());
    return keep;
}

/// Balances the training side of `pair`; weights of survivors are kept.
inline TreatedPair undersample(const TreatedPair& pair, std::uint64_t seed) {
    const auto keep = undersample_indices(pair.train_labels, seed);
    TreatedPair out = pair;
    out.train_features = pair.train_features.select_rows(keep);
    out.train_labels.clear();
    out.train_weights.clear();
    for (std::size_t i : keep) {
        out.train_labels.push_back(pair.train_labels[i]);
        out.train_weights.push_back(pair.train_weights[i]);
    }
    return out;
}

inline Instances undersample(const Instances& data, std::uint64_t seed) {
    const auto keep = undersample_indices(data.labels, seed);
    Instances out{data.features.select_rows(keep), {}};
    for (std::size_t i : keep) out.labels.push_back(data.labels[i]);
    return out;
}

}  // namespace tacpdp
