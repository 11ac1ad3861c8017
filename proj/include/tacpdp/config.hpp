#pragma once

// Experiment configuration: a flat `key = value` text format with dotted
// section keys. Lines starting with '#' are comments.
//
//   dataset.path = data/toy_three_year.csv
//   dataset.defects_column = bug
//   pairs.gap_buckets = 1
//   run.techniques = nam15, ma12
//   run.seed = 7

#include <tacpdp/csv.hpp>
#include <tacpdp/dataset.hpp>
#include <tacpdp/error.hpp>
#include <tacpdp/pairs.hpp>
#include <tacpdp/stability.hpp>
#include <tacpdp/treatments.hpp>
#include <tacpdp/tree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace tacpdp {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(csv::trim(body.substr(0, eq)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (kv.count(key)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv[key] = std::string(csv::trim(body.substr(eq + 1)));
    }
    return kv;
}

struct ExperimentConfig {
    std::filesystem::path dataset_path;
    ColumnSchema schema;
    int granularity_months = 6;
    std::size_t gap_buckets = 1;
    std::vector<ConfigurationKind> configurations{std::begin(kTimeAwareKinds), std::end(kTimeAwareKinds)};
    std::vector<Treatment> techniques{std::begin(kStandardTreatments), std::end(kStandardTreatments)};
    TreeParams tree;
    std::optional<std::uint64_t> seed;
    bool balance = false;
    std::optional<std::size_t> baseline_crossval;
    std::filesystem::path output_dir = "out";
    TreatmentOptions treatment;
    double stability_threshold = 0.05;
    double alpha = 0.01;
    WilcoxonOptions wilcoxon;

    void validate() const {
        if (dataset_path.empty()) throw ConfigError("dataset.path is required");
        if (!seed) throw ConfigError("run.seed is required");
        if (techniques.empty()) throw ConfigError("run.techniques must name at least one technique");
        if (configurations.empty() && !baseline_crossval) {
            throw ConfigError("pairs.configurations is empty and no baseline.crossval_folds is set");
        }
        if (granularity_months < 1) throw ConfigError("bucket.granularity_months must be >= 1");
        if (baseline_crossval && *baseline_crossval < 2) throw ConfigError("baseline.crossval_folds must be >= 2");
        tree.validate();
    }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = std::min(s.find(',', start), s.size());
        const auto item = csv::trim(s.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

inline std::int64_t as_int(const std::string& key, const std::string& v) {
    const auto i = csv::parse_int(v);
    if (!i) throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return *i;
}

inline std::size_t as_count(const std::string& key, const std::string& v) {
    const auto i = as_int(key, v);
    if (i < 0) throw ConfigError("config key '" + key + "': must be nonnegative");
    return static_cast<std::size_t>(i);
}

inline double as_double(const std::string& key, const std::string& v) {
    const auto d = csv::parse_double(v);
    if (!d) throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    return *d;
}

inline bool as_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace detail

/// Builds a configuration from parsed key-values. Relative dataset and output
/// paths resolve against `base_dir`. Unknown keys are rejected.
inline ExperimentConfig config_from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    ExperimentConfig c;
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"dataset.path", [&](auto&, auto& v) { c.dataset_path = v; }},
        {"dataset.project_column", [&](auto&, auto& v) { c.schema.project = v; }},
        {"dataset.version_column", [&](auto&, auto& v) { c.schema.version = v; }},
        {"dataset.date_column", [&](auto&, auto& v) { c.schema.date = v; }},
        {"dataset.class_column", [&](auto&, auto& v) { c.schema.class_name = v; }},
        {"dataset.defects_column", [&](auto&, auto& v) { c.schema.defects = v; }},
        {"dataset.feature_columns", [&](auto&, auto& v) { c.schema.features = split_list(v); }},
        {"bucket.granularity_months", [&](auto& k, auto& v) { c.granularity_months = static_cast<int>(as_int(k, v)); }},
        {"pairs.gap_buckets", [&](auto& k, auto& v) { c.gap_buckets = as_count(k, v); }},
        {"pairs.configurations",
         [&](auto& k, auto& v) {
             c.configurations.clear();
             for (const auto& name : split_list(v)) {
                 const auto kind = parse_kind(name);
                 if (!kind || *kind == ConfigurationKind::CrossValidation) {
                     throw ConfigError("config key '" + k + "': unknown configuration '" + name + "'");
                 }
                 c.configurations.push_back(*kind);
             }
         }},
        {"run.techniques",
         [&](auto& k, auto& v) {
             c.techniques.clear();
             for (const auto& name : split_list(v)) {
                 const auto t = parse_treatment(name);
                 if (!t) throw ConfigError("config key '" + k + "': unknown technique '" + name + "'");
                 c.techniques.push_back(*t);
             }
         }},
        {"run.seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(as_int(k, v)); }},
        {"run.balance", [&](auto& k, auto& v) { c.balance = as_bool(k, v); }},
        {"baseline.crossval_folds", [&](auto& k, auto& v) { c.baseline_crossval = as_count(k, v); }},
        {"output.dir", [&](auto&, auto& v) { c.output_dir = v; }},
        {"tree.pruning_confidence", [&](auto& k, auto& v) { c.tree.pruning_confidence = as_double(k, v); }},
        {"tree.min_leaf_weight", [&](auto& k, auto& v) { c.tree.min_leaf_weight = as_double(k, v); }},
        {"treatments.amasaki15.attr_mad_mult", [&](auto& k, auto& v) { c.treatment.amasaki_attr_mad_mult = as_double(k, v); }},
        {"treatments.amasaki15.relevancy_mult", [&](auto& k, auto& v) { c.treatment.amasaki_relevancy_mult = as_double(k, v); }},
        {"treatments.nam15.violation_threshold", [&](auto& k, auto& v) { c.treatment.nam15_violation_threshold = as_double(k, v); }},
        {"stats.stability_threshold", [&](auto& k, auto& v) { c.stability_threshold = as_double(k, v); }},
        {"stats.alpha", [&](auto& k, auto& v) { c.alpha = as_double(k, v); }},
        {"stats.wilcoxon_exact_max_n", [&](auto& k, auto& v) { c.wilcoxon.exact_max_n = as_count(k, v); }},
    };
    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(key, value);
    }
    if (c.seed) c.tree.seed = *c.seed;
    if (!c.dataset_path.empty() && c.dataset_path.is_relative() && !base_dir.empty()) {
        c.dataset_path = base_dir / c.dataset_path;
    }
    if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return config_from_key_values(parse_key_values(in), path.parent_path());
}

/// Stable textual form of every effective setting; hashed into the run manifest.
inline std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream os;
    const auto names = [](const auto& items) {
        std::vector<std::string> out;
        for (const auto& i : items) out.emplace_back(to_string(i));
        return csv::join(out, ",");
    };
    os << "dataset.path=" << c.dataset_path.filename().string() << '\n'
       << "dataset.columns=" << c.schema.project << ',' << c.schema.version << ',' << c.schema.date << ','
       << c.schema.class_name << ',' << c.schema.defects << ';' << csv::join(c.schema.features, ",") << '\n'
       << "bucket.granularity_months=" << c.granularity_months << '\n'
       << "pairs.gap_buckets=" << c.gap_buckets << '\n'
       << "pairs.configurations=" << names(c.configurations) << '\n'
       << "run.techniques=" << names(c.techniques) << '\n'
       << "run.seed=" << c.seed.value_or(0) << '\n'
       << "run.balance=" << c.balance << '\n'
       << "baseline.crossval_folds=" << (c.baseline_crossval ? std::to_string(*c.baseline_crossval) : "") << '\n'
       << "tree.pruning_confidence=" << csv::format_double(c.tree.pruning_confidence) << '\n'
       << "tree.min_leaf_weight=" << csv::format_double(c.tree.min_leaf_weight) << '\n'
       << "treatments.amasaki15.attr_mad_mult=" << csv::format_double(c.treatment.amasaki_attr_mad_mult) << '\n'
       << "treatments.amasaki15.relevancy_mult=" << csv::format_double(c.treatment.amasaki_relevancy_mult) << '\n'
       << "treatments.nam15.violation_threshold="
       << (c.treatment.nam15_violation_threshold ? csv::format_double(*c.treatment.nam15_violation_threshold) : "")
       << '\n'
       << "stats.stability_threshold=" << csv::format_double(c.stability_threshold) << '\n'
       << "stats.alpha=" << csv::format_double(c.alpha) << '\n'
       << "stats.wilcoxon_exact_max_n=" << c.wilcoxon.exact_max_n << '\n';
    return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tacpdp
