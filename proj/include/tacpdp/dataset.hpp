#pragma once

// Class-level defect data with dated releases, and its partition into
// calendar-aligned time buckets.

#include <tacpdp/csv.hpp>
#include <tacpdp/error.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tacpdp {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
inline std::optional<Date> parse_iso_date(std::string_view s) {
    s = csv::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
    }
    const auto y = csv::parse_int(s.substr(0, 4));
    const auto m = csv::parse_int(s.substr(5, 2));
    const auto d = csv::parse_int(s.substr(8, 2));
    const Date date{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{static_cast<unsigned>(*m)},
                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

struct MetricRecord {
    std::string project_id;
    std::string version_id;
    Date release_date;
    std::string class_id;
    std::vector<double> features;
    std::int64_t defect_count = 0;

    bool defective() const noexcept { return defect_count > 0; }
};

struct Release {
    std::string project_id;
    std::string version_id;
    Date release_date;
    std::vector<MetricRecord> records;

    std::size_t defective_count() const {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const MetricRecord& r) { return r.defective(); }));
    }

    std::string label() const { return project_id + "-" + version_id; }
};

using ReleasePtr = std::shared_ptr<const Release>;

/// Orders releases by date, then project, then version. Used wherever an
/// input-order-independent ordering is needed.
inline bool release_less(const Release& a, const Release& b) {
    if (a.release_date != b.release_date) return a.release_date < b.release_date;
    if (a.project_id != b.project_id) return a.project_id < b.project_id;
    return a.version_id < b.version_id;
}

struct TimeBucket {
    std::size_t index = 0;
    Date start;  // inclusive
    Date end;    // exclusive
    std::vector<ReleasePtr> releases;

    bool empty() const noexcept { return releases.empty(); }
};

struct TimeSeriesDataset {
    std::vector<TimeBucket> buckets;
    int granularity_months = 6;

    std::size_t size() const noexcept { return buckets.size(); }

    std::vector<ReleasePtr> releases() const {
        std::vector<ReleasePtr> out;
        for (const auto& b : buckets) out.insert(out.end(), b.releases.begin(), b.releases.end());
        return out;
    }
};

/// Column mapping for the input CSV. An empty `features` list means "every
/// column not mapped to an identity or label field", in header order.
struct ColumnSchema {
    std::string project = "project";
    std::string version = "version";
    std::string date = "date";
    std::string class_name = "class";
    std::string defects = "bug";
    std::vector<std::string> features;
};

namespace detail {

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

/// Resolves the feature columns of `header` under `schema`; throws ParseError
/// (line 1) for any missing column.
inline std::vector<std::size_t> resolve_feature_columns(const std::vector<std::string>& header,
                                                        const ColumnSchema& schema) {
    const std::set<std::size_t> id_cols = {
        detail::column_index(header, schema.project), detail::column_index(header, schema.version),
        detail::column_index(header, schema.date), detail::column_index(header, schema.class_name),
        detail::column_index(header, schema.defects)};
    std::vector<std::size_t> cols;
    if (schema.features.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (!id_cols.count(i)) cols.push_back(i);
        }
    } else {
        for (const auto& f : schema.features) cols.push_back(detail::column_index(header, f));
    }
    if (cols.empty()) throw ParseError(1, "no feature columns");
    return cols;
}

/// Reads class-level records and groups them into releases keyed by
/// (project, version, date). Releases appear in order of first occurrence;
/// records keep source order within a release.
inline std::vector<Release> parse_dataset(std::istream& in, const ColumnSchema& schema = {}) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::vector<std::string>> header;
    while (!header && std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        header = csv::split_line(line);
        if (!header) throw ParseError(line_no, "unterminated quote in header");
    }
    if (!header) throw EmptyDatasetError("empty input: no header row");

    const std::size_t c_project = detail::column_index(*header, schema.project);
    const std::size_t c_version = detail::column_index(*header, schema.version);
    const std::size_t c_date = detail::column_index(*header, schema.date);
    const std::size_t c_class = detail::column_index(*header, schema.class_name);
    const std::size_t c_defects = detail::column_index(*header, schema.defects);
    const std::vector<std::size_t> c_features = resolve_feature_columns(*header, schema);

    std::vector<Release> releases;
    std::map<std::pair<std::string, std::string>, std::size_t> by_key;

    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (!fields) throw ParseError(line_no, "unterminated quote");
        if (fields->size() != header->size()) {
            throw ParseError(line_no, "expected " + std::to_string(header->size()) + " fields, got " +
                                          std::to_string(fields->size()));
        }
        MetricRecord rec;
        rec.project_id = (*fields)[c_project];
        rec.version_id = (*fields)[c_version];
        rec.class_id = (*fields)[c_class];
        if (rec.project_id.empty() || rec.version_id.empty()) throw ParseError(line_no, "empty project or version");
        const auto date = parse_iso_date((*fields)[c_date]);
        if (!date) throw ParseError(line_no, "unparseable date '" + (*fields)[c_date] + "'");
        rec.release_date = *date;
        const auto defects = csv::parse_int((*fields)[c_defects]);
        if (!defects || *defects < 0) {
            throw ParseError(line_no, "defect count must be a nonnegative integer, got '" + (*fields)[c_defects] + "'");
        }
        rec.defect_count = *defects;
        rec.features.reserve(c_features.size());
        for (std::size_t c : c_features) {
            const auto v = csv::parse_double((*fields)[c]);
            if (!v) throw ParseError(line_no, "non-numeric or non-finite value in column '" + (*header)[c] + "'");
            rec.features.push_back(*v);
        }

        const auto key = std::make_pair(rec.project_id, rec.version_id);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            it = by_key.emplace(key, releases.size()).first;
            releases.push_back(Release{rec.project_id, rec.version_id, rec.release_date, {}});
        } else if (releases[it->second].release_date != rec.release_date) {
            throw ConflictError("release " + rec.project_id + "-" + rec.version_id + " has conflicting dates " +
                                format_date(releases[it->second].release_date) + " and " +
                                format_date(rec.release_date) + " (line " + std::to_string(line_no) + ")");
        }
        releases[it->second].records.push_back(std::move(rec));
    }
    if (releases.empty()) throw EmptyDatasetError("empty input: no data rows");
    return releases;
}

/// Partitions releases into contiguous buckets of `granularity_months`
/// calendar months. Bucket 0 starts on the first day of the earliest
/// release's month; empty intermediate buckets are kept.
inline TimeSeriesDataset bucketize(std::vector<Release> releases, int granularity_months = 6) {
    using namespace std::chrono;
    if (releases.empty()) throw EmptyDatasetError("no releases to bucketize");
    if (granularity_months < 1) throw ConfigError("granularity_months must be >= 1");

    std::sort(releases.begin(), releases.end(), release_less);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : releases) {
        if (!seen.emplace(r.project_id, r.version_id).second) throw ConflictError("duplicate release " + r.label());
    }

    const year_month origin{releases.front().release_date.year(), releases.front().release_date.month()};
    const auto month_offset = [&](const Date& d) {
        return (static_cast<int>(d.year()) - static_cast<int>(origin.year())) * 12 +
               (static_cast<int>(static_cast<unsigned>(d.month())) - static_cast<int>(static_cast<unsigned>(origin.month())));
    };
    const auto bucket_start = [&](std::size_t i) {
        const year_month ym = origin + months{static_cast<int>(i) * granularity_months};
        return Date{ym / day{1}};
    };

    const std::size_t count =
        static_cast<std::size_t>(month_offset(releases.back().release_date) / granularity_months) + 1;

    TimeSeriesDataset ts;
    ts.granularity_months = granularity_months;
    ts.buckets.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts.buckets[i].index = i;
        ts.buckets[i].start = bucket_start(i);
        ts.buckets[i].end = bucket_start(i + 1);
    }
    for (auto& r : releases) {
        const auto idx = static_cast<std::size_t>(month_offset(r.release_date) / granularity_months);
        ts.buckets[idx].releases.push_back(std::make_shared<const Release>(std::move(r)));
    }
    return ts;
}

struct BucketSummary {
    std::size_t bucket_index = 0;
    Date start;
    Date end;
    std::size_t releases = 0;
    std::size_t instances = 0;
    std::size_t defective = 0;
    double defective_pct = 0.0;
};

inline std::vector<BucketSummary> dataset_summary(const TimeSeriesDataset& ts) {
    std::vector<BucketSummary> out;
    out.reserve(ts.size());
    for (const auto& b : ts.buckets) {
        BucketSummary s{b.index, b.start, b.end, b.releases.size(), 0, 0, 0.0};
        for (const auto& r : b.releases) {
            s.instances += r->records.size();
            s.defective += r->defective_count();
        }
        s.defective_pct = s.instances ? 100.0 * static_cast<double>(s.defective) / static_cast<double>(s.instances) : 0.0;
        out.push_back(s);
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<BucketSummary>& rows) {
    os << "bucket_index,start,end,releases,instances,defective_pct\n";
    for (const auto& s : rows) {
        csv::write_row(os, {std::to_string(s.bucket_index), format_date(s.start), format_date(s.end),
                            std::to_string(s.releases), std::to_string(s.instances),
                            csv::format_double(s.defective_pct)});
    }
}

}  // namespace tacpdp
