#pragma once

// Cross-project data treatments applied to a (train, test) pair before the
// classifier is trained. Treatments read test features but never test labels.

#include <tacpdp/error.hpp>
#include <tacpdp/matrix.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tacpdp {

struct TreatedPair {
    Matrix train_features;
    std::vector<bool> train_labels;
    std::vector<double> train_weights;
    Matrix test_features;
    std::vector<bool> test_labels;
    // 0-based indices into the feature columns; matrices keep all columns.
    std::vector<std::size_t> selected_attributes;
    std::vector<TestGroup> test_groups;
    // Set by nam15 when relabeling fell back to the original labels.
    bool relabel_fallback = false;

    std::size_t train_size() const noexcept { return train_labels.size(); }
    std::size_t test_size() const noexcept { return test_labels.size(); }
};

enum class Treatment { Amasaki15, Watanabe08, CamargoCruz09, Nam15, Ma12, Identity };

inline constexpr Treatment kStandardTreatments[] = {Treatment::Amasaki15, Treatment::Watanabe08,
                                                 Treatment::CamargoCruz09, Treatment::Nam15, Treatment::Ma12};

inline std::string_view to_string(Treatment t) {
    switch (t) {
        case Treatment::Amasaki15: return "amasaki15";
        case Treatment::Watanabe08: return "watanabe08";
        case Treatment::CamargoCruz09: return "camargocruz09";
        case Treatment::Nam15: return "nam15";
        case Treatment::Ma12: return "ma12";
        case Treatment::Identity: return "identity";
    }
    return "?";
}

inline std::optional<Treatment> parse_treatment(std::string_view s) {
    for (auto t : {Treatment::Amasaki15, Treatment::Watanabe08, Treatment::CamargoCruz09, Treatment::Nam15,
                   Treatment::Ma12, Treatment::Identity}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

struct TreatmentOptions {
    // amasaki15: attribute kept when every train value has a test value
    // within attr_mad_mult * MAD of that attribute.
    double amasaki_attr_mad_mult = 1.0;
    // amasaki15: train instance kept when its nearest test instance lies
    // within relevancy_mult * median nearest-neighbor distance.
    double amasaki_relevancy_mult = 2.0;
    // nam15: fixed violation-score threshold (fraction in [0,1]); the median
    // score is used when unset.
    std::optional<double> nam15_violation_threshold;
};

namespace detail {

inline double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline TreatedPair passthrough(const Instances& train, const Instances& test) {
    TreatedPair out;
    out.train_features = train.features;
    out.train_labels = train.labels;
    out.train_weights.assign(train.size(), 1.0);
    out.test_features = test.features;
    out.test_labels = test.labels;
    out.selected_attributes.resize(train.features.cols());
    std::iota(out.selected_attributes.begin(), out.selected_attributes.end(), std::size_t{0});
    return out;
}

inline void require_nonempty(const Instances& train, const Instances& test, std::string_view who) {
    if (train.size() == 0 || test.size() == 0) {
        throw ConfigError(std::string(who) + ": train and test must both be nonempty");
    }
    if (train.features.cols() != test.features.cols()) {
        throw ConfigError(std::string(who) + ": train and test feature counts differ");
    }
}

inline Matrix log1p_checked(const Matrix& m, std::string_view side) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (m(r, c) < 0.0) {
                throw DomainError(c, r, "negative " + std::string(side) + " value under log(1+x)");
            }
            out(r, c) = std::log1p(m(r, c));
        }
    }
    return out;
}

}  // namespace detail

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return lo + (hi - lo) / 2.0;
}

inline double median_absolute_deviation(const std::vector<double>& v) {
    const double m = median(v);
    std::vector<double> dev(v.size());
    std::transform(v.begin(), v.end(), dev.begin(), [m](double x) { return std::abs(x - m); });
    return median(std::move(dev));
}

inline TreatedPair identity_treatment(const Instances& train, const Instances& test) {
    return detail::passthrough(train, test);
}

/// Per-attribute ratio mean(train) / mean(test); 1 where the test mean is 0.
inline std::vector<double> watanabe08_factors(const Instances& train, const Instances& test) {
    std::vector<double> f(train.features.cols(), 1.0);
    for (std::size_t c = 0; c < f.size(); ++c) {
        const double test_mean = detail::mean(test.features.column(c));
        if (test_mean != 0.0) f[c] = detail::mean(train.features.column(c)) / test_mean;
    }
    return f;
}

inline Matrix scale_columns(const Matrix& m, const std::vector<double>& factors) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c) * factors[c];
    }
    return out;
}

/// Rescales each test attribute so its mean matches the training mean.
inline TreatedPair watanabe08(const Instances& train, const Instances& test) {
    detail::require_nonempty(train, test, "watanabe08");
    TreatedPair out = detail::passthrough(train, test);
    for (std::size_t c = 0; c < test.features.cols(); ++c) {
        const double train_mean = detail::mean(train.features.column(c));
        const double test_mean = detail::mean(test.features.column(c));
        if (test_mean == 0.0) continue;
        for (std::size_t r = 0; r < test.size(); ++r) {
            out.test_features(r, c) = test.features(r, c) * train_mean / test_mean;
        }
    }
    return out;
}

/// Log-transforms both sides and shifts each training attribute by the
/// difference of log-medians, using the test side as reference.
inline TreatedPair camargocruz09(const Instances& train, const Instances& test) {
    detail::require_nonempty(train, test, "camargocruz09");
    TreatedPair out = detail::passthrough(train, test);
    out.train_features = detail::log1p_checked(train.features, "train");
    out.test_features = detail::log1p_checked(test.features, "test");
    for (std::size_t c = 0; c < train.features.cols(); ++c) {
        const double shift = median(out.train_features.column(c)) - median(out.test_features.column(c));
        for (std::size_t r = 0; r < train.size(); ++r) out.train_features(r, c) += shift;
    }
    return out;
}

inline constexpr double kMa12WeightFloor = 1e-6;

/// simatts / (p - simatts + 1)^2, floored so no instance gets zero weight.
inline double ma12_weight(std::size_t simatts, std::size_t p) {
    const double denom = static_cast<double>(p - simatts + 1);
    return std::max(static_cast<double>(simatts) / (denom * denom), kMa12WeightFloor);
}

/// Weights each training instance by how many of its attributes fall inside
/// the test data's [min, max] range.
inline TreatedPair ma12_weights(const Instances& train, const Instances& test) {
    detail::require_nonempty(train, test, "ma12");
    TreatedPair out = detail::passthrough(train, test);
    const std::size_t p = train.features.cols();
    std::vector<double> lo(p, std::numeric_limits<double>::infinity());
    std::vector<double> hi(p, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < test.size(); ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            lo[c] = std::min(lo[c], test.features(r, c));
            hi[c] = std::max(hi[c], test.features(r, c));
        }
    }
    for (std::size_t r = 0; r < train.size(); ++r) {
        std::size_t simatts = 0;
        for (std::size_t c = 0; c < p; ++c) {
            const double v = train.features(r, c);
            if (v >= lo[c] && v <= hi[c]) ++simatts;
        }
        out.train_weights[r] = ma12_weight(simatts, p);
    }
    return out;
}

/// Log transform, then attribute selection and relevancy filtering by
/// closeness to the test data.
inline TreatedPair amasaki15(const Instances& train, const Instances& test, const TreatmentOptions& opts = {}) {
    detail::require_nonempty(train, test, "amasaki15");
    const Matrix tr = detail::log1p_checked(train.features, "train");
    const Matrix te = detail::log1p_checked(test.features, "test");
    const std::size_t d = tr.cols();

    std::vector<std::size_t> attrs;
    for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> test_col = te.column(c);
        std::vector<double> combined = tr.column(c);
        combined.insert(combined.end(), test_col.begin(), test_col.end());
        const double limit = opts.amasaki_attr_mad_mult * median_absolute_deviation(combined);
        std::sort(test_col.begin(), test_col.end());
        bool close = true;
        for (std::size_t r = 0; r < tr.rows() && close; ++r) {
            const double v = tr(r, c);
            const auto it = std::lower_bound(test_col.begin(), test_col.end(), v);
            double nearest = std::numeric_limits<double>::infinity();
            if (it != test_col.end()) nearest = *it - v;
            if (it != test_col.begin()) nearest = std::min(nearest, v - *std::prev(it));
            close = nearest <= limit;
        }
        if (close) attrs.push_back(c);
    }
    if (attrs.empty()) throw DegenerateTreatmentError("amasaki15: attribute selection removed every attribute");

    std::vector<double> nn(tr.rows(), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < tr.rows(); ++r) {
        for (std::size_t t = 0; t < te.rows(); ++t) {
            double sq = 0.0;
            for (std::size_t c : attrs) {
                const double diff = tr(r, c) - te(t, c);
                sq += diff * diff;
            }
            nn[r] = std::min(nn[r], sq);
        }
        nn[r] = std::sqrt(nn[r]);
    }
    const double limit = opts.amasaki_relevancy_mult * median(nn);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < tr.rows(); ++r) {
        if (nn[r] <= limit) keep.push_back(r);
    }
    if (keep.empty()) throw DegenerateTreatmentError("amasaki15: relevancy filtering removed every instance");

    TreatedPair out;
    out.train_features = tr.select_rows(keep);
    for (std::size_t r : keep) out.train_labels.push_back(train.labels[r]);
    out.train_weights.assign(keep.size(), 1.0);
    out.test_features = te;
    out.test_labels = test.labels;
    out.selected_attributes = std::move(attrs);
    return out;
}

/// Unsupervised relabeling of the training data by counting attributes above
/// their median, followed by removal of attributes and instances whose
/// metric-violation score exceeds the threshold.
inline TreatedPair nam15(const Instances& train, const Instances& test, const TreatmentOptions& opts = {}) {
    detail::require_nonempty(train, test, "nam15");
    if (train.size() < 2) throw ConfigError("nam15: needs at least two training instances");
    const std::size_t n = train.size();
    const std::size_t d = train.features.cols();

    std::vector<double> med(d);
    for (std::size_t c = 0; c < d; ++c) med[c] = median(train.features.column(c));

    std::vector<double> k(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            if (train.features(r, c) > med[c]) k[r] += 1.0;
        }
    }
    TreatedPair out = detail::passthrough(train, test);
    if (std::all_of(k.begin(), k.end(), [&](double v) { return v == k.front(); })) {
        out.relabel_fallback = true;
        return out;
    }
    const double k_median = median(k);
    std::vector<bool> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[r] = k[r] > k_median;

    const auto violates = [&](std::size_t r, std::size_t c) {
        const bool above = train.features(r, c) > med[c];
        return labels[r] != above;
    };

    std::vector<double> attr_score(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t v = 0;
        for (std::size_t r = 0; r < n; ++r) v += violates(r, c) ? 1 : 0;
        attr_score[c] = static_cast<double>(v) / static_cast<double>(n);
    }
    const double attr_limit = opts.nam15_violation_threshold.value_or(median(attr_score));
    std::vector<std::size_t> attrs;
    for (std::size_t c = 0; c < d; ++c) {
        if (attr_score[c] <= attr_limit) attrs.push_back(c);
    }
    if (attrs.empty()) throw DegenerateTreatmentError("nam15: every attribute exceeds the violation threshold");

    std::vector<double> inst_score(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t v = 0;
        for (std::size_t c : attrs) v += violates(r, c) ? 1 : 0;
        inst_score[r] = static_cast<double>(v) / static_cast<double>(attrs.size());
    }
    const double inst_limit = opts.nam15_violation_threshold.value_or(median(inst_score));
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < n; ++r) {
        if (inst_score[r] <= inst_limit) keep.push_back(r);
    }
    if (keep.empty()) throw DegenerateTreatmentError("nam15: every instance exceeds the violation threshold");

    out.train_features = train.features.select_rows(keep);
    out.train_labels.clear();
    for (std::size_t r : keep) out.train_labels.push_back(labels[r]);
    out.train_weights.assign(keep.size(), 1.0);
    out.selected_attributes = std::move(attrs);
    return out;
}

inline TreatedPair apply_treatment(Treatment t, const PairData& data, const TreatmentOptions& opts = {}) {
    TreatedPair out;
    switch (t) {
        case Treatment::Amasaki15: out = amasaki15(data.train, data.test, opts); break;
        case Treatment::Watanabe08: out = watanabe08(data.train, data.test); break;
        case Treatment::CamargoCruz09: out = camargocruz09(data.train, data.test); break;
        case Treatment::Nam15: out = nam15(data.train, data.test, opts); break;
        case Treatment::Ma12: out = ma12_weights(data.train, data.test); break;
        case Treatment::Identity: out = identity_treatment(data.train, data.test); break;
    }
    out.test_groups = data.test_groups;
    return out;
}

}  // namespace tacpdp
