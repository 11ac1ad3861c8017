#pragma once

#include <tacpdp/dataset.hpp>
#include <tacpdp/error.hpp>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tacpdp {

/// Dense row-major matrix of feature values.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw ConfigError("ragged matrix rows");
            std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * m.cols_));
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const noexcept {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    /// Keeps only the listed rows, in the given order.
    Matrix select_rows(const std::vector<std::size_t>& keep) const {
        Matrix m(keep.size(), cols_);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto src = row(keep[i]);
            std::copy(src.begin(), src.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
        }
        return m;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Feature matrix with aligned binary labels (true = defective).
struct Instances {
    Matrix features;
    std::vector<bool> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// Contiguous block of test rows belonging to one project version.
struct TestGroup {
    std::string project_id;
    std::string version_id;
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const TestGroup&, const TestGroup&) = default;
};

/// Train and test instances of one pair, with test rows grouped by version.
struct PairData {
    Instances train;
    Instances test;
    std::vector<TestGroup> test_groups;
};

inline Instances to_instances(const std::vector<ReleasePtr>& releases, std::vector<TestGroup>* groups = nullptr) {
    std::size_t n = 0;
    std::size_t d = 0;
    for (const auto& r : releases) {
        n += r->records.size();
        if (!r->records.empty()) d = r->records.front().features.size();
    }
    Instances out{Matrix(n, d), std::vector<bool>(n)};
    std::size_t row = 0;
    for (const auto& r : releases) {
        const std::size_t begin = row;
        for (const auto& rec : r->records) {
            if (rec.features.size() != d) throw ConfigError("inconsistent feature count in release " + r->label());
            for (std::size_t c = 0; c < d; ++c) out.features(row, c) = rec.features[c];
            out.labels[row] = rec.defective();
            ++row;
        }
        if (groups) groups->push_back(TestGroup{r->project_id, r->version_id, begin, row});
    }
    return out;
}

template <typename Pair>
PairData materialize(const Pair& pair) {
    PairData data;
    data.train = to_instances(pair.train);
    data.test = to_instances(pair.test, &data.test_groups);
    if (data.train.features.cols() != data.test.features.cols()) {
        throw ConfigError("train and test feature counts differ");
    }
    return data;
}

}  // namespace tacpdp
