#pragma once

// Time-aware train/test pair generation over a bucketed dataset, plus the
// time-agnostic cross-validation pairing used as a baseline.

#include <tacpdp/csv.hpp>
#include <tacpdp/dataset.hpp>
#include <tacpdp/error.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tacpdp {

/// Constant/Increasing sizing of the training and test windows. `CrossValidation`
/// tags time-agnostic baseline pairs.
enum class ConfigurationKind { CC, IC, CI, II, CrossValidation };

inline constexpr ConfigurationKind kTimeAwareKinds[] = {ConfigurationKind::CC, ConfigurationKind::IC,
                                                        ConfigurationKind::CI, ConfigurationKind::II};

inline std::string_view to_string(ConfigurationKind k) {
    switch (k) {
        case ConfigurationKind::CC: return "CC";
        case ConfigurationKind::IC: return "IC";
        case ConfigurationKind::CI: return "CI";
        case ConfigurationKind::II: return "II";
        case ConfigurationKind::CrossValidation: return "CV";
    }
    return "?";
}

inline std::optional<ConfigurationKind> parse_kind(std::string_view s) {
    s = csv::trim(s);
    if (s == "CC") return ConfigurationKind::CC;
    if (s == "IC") return ConfigurationKind::IC;
    if (s == "CI") return ConfigurationKind::CI;
    if (s == "II") return ConfigurationKind::II;
    if (s == "CV") return ConfigurationKind::CrossValidation;
    return std::nullopt;
}

/// Identifies one train/test pair. The split sits between bucket
/// `split_index - 1` and bucket `split_index`; the test window starts at
/// `split_index + gap_buckets`. An empty `window_k` is the unbounded window.
/// For cross-validation pairs `split_index` holds the fold number.
struct PairSpec {
    ConfigurationKind kind = ConfigurationKind::CC;
    std::optional<std::size_t> window_k;
    std::size_t split_index = 1;
    std::size_t gap_buckets = 1;

    friend bool operator==(const PairSpec&, const PairSpec&) = default;
};

struct TrainTestPair {
    PairSpec spec;
    std::vector<ReleasePtr> train;
    std::vector<ReleasePtr> test;
};

inline std::vector<std::string> release_labels(const std::vector<ReleasePtr>& rs) {
    std::vector<std::string> out;
    out.reserve(rs.size());
    for (const auto& r : rs) out.push_back(r->label());
    return out;
}

/// Materializes the bucket windows for `spec`. Returns nothing when either
/// side holds no release. No project filtering is applied here.
inline std::optional<TrainTestPair> generate_pair(const TimeSeriesDataset& ts, const PairSpec& spec) {
    const std::size_t n = ts.size();
    if (spec.kind == ConfigurationKind::CrossValidation) {
        throw ConfigError("generate_pair: cross-validation pairs come from crossval_pairs");
    }
    if (spec.split_index < 1 || spec.split_index >= n) {
        throw ConfigError("split_index " + std::to_string(spec.split_index) + " outside [1, " +
                          std::to_string(n > 0 ? n - 1 : 0) + "]");
    }
    if (spec.window_k && *spec.window_k == 0) throw ConfigError("window size must be positive");

    const bool bounded = spec.window_k.has_value() && spec.kind != ConfigurationKind::II;
    const std::size_t k = bounded ? *spec.window_k : n;
    const bool constant_train = spec.kind == ConfigurationKind::CC || spec.kind == ConfigurationKind::CI;
    const bool constant_test = spec.kind == ConfigurationKind::CC || spec.kind == ConfigurationKind::IC;

    const std::size_t train_begin = constant_train && k < spec.split_index ? spec.split_index - k : 0;
    const std::size_t test_begin = spec.split_index + spec.gap_buckets;
    if (test_begin >= n) return std::nullopt;
    const std::size_t test_end = constant_test ? std::min(n, test_begin + k) : n;

    TrainTestPair pair{spec, {}, {}};
    for (std::size_t b = train_begin; b < spec.split_index; ++b) {
        pair.train.insert(pair.train.end(), ts.buckets[b].releases.begin(), ts.buckets[b].releases.end());
    }
    for (std::size_t b = test_begin; b < test_end; ++b) {
        pair.test.insert(pair.test.end(), ts.buckets[b].releases.begin(), ts.buckets[b].releases.end());
    }
    if (pair.train.empty() || pair.test.empty()) return std::nullopt;
    return pair;
}

/// Drops every test release whose project also appears in training. The
/// pair is eliminated when no test release survives.
inline std::optional<TrainTestPair> strict_cpdp_filter(TrainTestPair pair) {
    std::set<std::string> train_projects;
    for (const auto& r : pair.train) train_projects.insert(r->project_id);
    std::erase_if(pair.test, [&](const ReleasePtr& r) { return train_projects.count(r->project_id) > 0; });
    if (pair.test.empty()) return std::nullopt;
    return pair;
}

/// Window sizes enumerated for `kind` over `bucket_count` buckets. An empty
/// optional stands for the unbounded window.
inline std::vector<std::optional<std::size_t>> window_sizes(ConfigurationKind kind, std::size_t bucket_count) {
    std::vector<std::optional<std::size_t>> out;
    switch (kind) {
        case ConfigurationKind::CC:
            for (std::size_t k = 1; k <= bucket_count; ++k) out.emplace_back(k);
            break;
        case ConfigurationKind::IC:
        case ConfigurationKind::CI:
            for (std::size_t k = 1; k + 1 <= bucket_count; ++k) out.emplace_back(k);
            break;
        case ConfigurationKind::II:
            out.emplace_back(std::nullopt);
            break;
        case ConfigurationKind::CrossValidation:
            break;
    }
    return out;
}

/// All strict-CPDP pairs of one configuration, ordered by window size then
/// split index. Pairs with identical contents under different specs are kept.
inline std::vector<TrainTestPair> enumerate_pairs(const TimeSeriesDataset& ts, ConfigurationKind kind,
                                                  std::size_t gap_buckets = 1) {
    std::vector<TrainTestPair> out;
    if (kind == ConfigurationKind::CrossValidation) throw ConfigError("enumerate_pairs: time-aware kinds only");
    for (const auto& k : window_sizes(kind, ts.size())) {
        for (std::size_t split = 1; split + gap_buckets < ts.size(); ++split) {
            auto pair = generate_pair(ts, PairSpec{kind, k, split, gap_buckets});
            if (!pair) continue;
            if (auto filtered = strict_cpdp_filter(std::move(*pair))) out.push_back(std::move(*filtered));
        }
    }
    return out;
}

/// Release-level k-fold partition with a seeded shuffle. Each fold serves once
/// as the test side; strict-CPDP filtering still applies.
inline std::vector<TrainTestPair> crossval_pairs(std::vector<ReleasePtr> releases, std::size_t folds,
                                                 std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (folds > releases.size()) {
        throw ConfigError("cross-validation folds (" + std::to_string(folds) + ") exceed release count (" +
                          std::to_string(releases.size()) + ")");
    }
    std::sort(releases.begin(), releases.end(),
              [](const ReleasePtr& a, const ReleasePtr& b) { return release_less(*a, *b); });
    std::vector<std::size_t> order(releases.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::size_t> fold_of(releases.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of[order[pos]] = pos % folds;

    std::vector<TrainTestPair> out;
    for (std::size_t f = 0; f < folds; ++f) {
        TrainTestPair pair{PairSpec{ConfigurationKind::CrossValidation, std::nullopt, f, 0}, {}, {}};
        for (std::size_t i = 0; i < releases.size(); ++i) {
            (fold_of[i] == f ? pair.test : pair.train).push_back(releases[i]);
        }
        if (auto filtered = strict_cpdp_filter(std::move(pair))) out.push_back(std::move(*filtered));
    }
    return out;
}

/// Every ordered choice of `train_size` training releases and `test_size`
/// disjoint test releases, without project filtering. Enumerates the
/// combinations a time-agnostic evaluation could draw.
inline std::vector<TrainTestPair> exhaustive_release_combinations(std::vector<ReleasePtr> releases,
                                                                  std::size_t train_size, std::size_t test_size) {
    std::vector<TrainTestPair> out;
    const std::size_t n = releases.size();
    if (train_size == 0 || test_size == 0 || train_size + test_size > n) return out;
    std::sort(releases.begin(), releases.end(),
              [](const ReleasePtr& a, const ReleasePtr& b) { return release_less(*a, *b); });
    // role[i]: 0 unused, 1 train, 2 test; iterate all distinct arrangements.
    std::vector<int> role(n, 0);
    std::fill(role.end() - static_cast<std::ptrdiff_t>(train_size + test_size),
              role.end() - static_cast<std::ptrdiff_t>(test_size), 1);
    std::fill(role.end() - static_cast<std::ptrdiff_t>(test_size), role.end(), 2);
    do {
        TrainTestPair pair{PairSpec{ConfigurationKind::CrossValidation, std::nullopt, out.size(), 0}, {}, {}};
        for (std::size_t i = 0; i < n; ++i) {
            if (role[i] == 1) pair.train.push_back(releases[i]);
            if (role[i] == 2) pair.test.push_back(releases[i]);
        }
        out.push_back(std::move(pair));
    } while (std::next_permutation(role.begin(), role.end()));
    return out;
}

/// True when some training release is dated after some test release.
inline bool involves_time_travel(const TrainTestPair& pair) {
    for (const auto& tr : pair.train) {
        for (const auto& te : pair.test) {
            if (tr->release_date > te->release_date) return true;
        }
    }
    return false;
}

inline std::string format_window(const std::optional<std::size_t>& k) { return k ? std::to_string(*k) : "inf"; }

inline void write_pairs_csv(std::ostream& os, const std::vector<TrainTestPair>& pairs) {
    os << "kind,window_k,split_index,gap,train_versions,test_versions\n";
    for (const auto& p : pairs) {
        csv::write_row(os, {std::string(to_string(p.spec.kind)), format_window(p.spec.window_k),
                            std::to_string(p.spec.split_index), std::to_string(p.spec.gap_buckets),
                            csv::join(release_labels(p.train), ";"), csv::join(release_labels(p.test), ";")});
    }
}

}  // namespace tacpdp
