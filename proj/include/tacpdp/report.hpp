#pragma once

// Report artifacts derived from a results table: stability, ranks,
// time-aware vs baseline comparisons, per-split plot data, run manifest.

#include <tacpdp/config.hpp>
#include <tacpdp/csv.hpp>
#include <tacpdp/experiment.hpp>
#include <tacpdp/stability.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace tacpdp {

struct ReportOptions {
    double stability_threshold = 0.05;
    double alpha = 0.01;
    WilcoxonOptions wilcoxon;
};

inline void write_stability_csv(std::ostream& os, std::span<const ResultRecord> results, const ReportOptions& opts) {
    os << "technique,config,window_k,metric,n,mean,sd,stable,excluded\n";
    for (bool per_window : {false, true}) {
        for (const auto& rep : stability_reports(results, per_window, opts.stability_threshold)) {
            // Unbounded/cross-validation groups have a single window; skip the duplicate per-window rows.
            if (per_window && !rep.key.window_k) continue;
            const std::string window = per_window ? std::to_string(*rep.key.window_k) : "all";
            for (const auto& m : rep.metrics) {
                csv::write_row(os, {rep.key.technique, std::string(to_string(rep.key.kind)), window,
                                    std::string(to_string(m.metric)), std::to_string(m.stats.n),
                                    csv::format_double(m.stats.mean), csv::format_double(m.stats.sd),
                                    m.stable ? "1" : "0", std::to_string(m.excluded)});
            }
        }
    }
}

namespace detail {

// Mean of each ranking metric per technique over a set of rows; AUC skips
// degenerate rows.
inline MetricValues mean_metric_values(const std::vector<const ResultRecord*>& rows) {
    std::map<std::string, std::map<Metric, std::vector<double>>> acc;
    for (const auto* r : rows) {
        for (Metric m : kRankingMetrics) {
            auto& bucket = acc[r->technique][m];
            if (m == Metric::AUC && r->auc_degenerate) continue;
            bucket.push_back(metric_value(r->scores, m));
        }
    }
    MetricValues out;
    for (const auto& [tech, per_metric] : acc) {
        for (const auto& [m, vals] : per_metric) out[tech][m] = vals.empty() ? 0.5 : mean_sd(vals).mean;
    }
    return out;
}

}  // namespace detail

/// Per-configuration rank tables plus rank SD across (window, split) cells.
struct ConfigRanks {
    ConfigurationKind kind;
    RankTable table;
    std::map<std::string, double> rank_sd;
};

inline std::vector<ConfigRanks> configuration_ranks(std::span<const ResultRecord> results) {
    std::map<ConfigurationKind, std::vector<const ResultRecord*>> by_kind;
    std::map<ConfigurationKind, std::map<std::tuple<std::size_t, std::size_t>, std::vector<const ResultRecord*>>> cells;
    for (const auto& r : results) {
        by_kind[r.kind].push_back(&r);
        cells[r.kind][{r.window_k.value_or(0), r.split_index}].push_back(&r);
    }
    std::vector<ConfigRanks> out;
    for (const auto& [kind, rows] : by_kind) {
        const auto values = detail::mean_metric_values(rows);
        if (values.size() < 2) continue;
        ConfigRanks cr{kind, rank_techniques(values), {}};
        std::vector<RankTable> per_cell;
        for (const auto& [cell, cell_rows] : cells[kind]) {
            const auto cell_values = detail::mean_metric_values(cell_rows);
            if (cell_values.size() >= 2) per_cell.push_back(rank_techniques(cell_values));
        }
        cr.rank_sd = rank_stability(per_cell);
        out.push_back(std::move(cr));
    }
    return out;
}

inline void write_ranks_csv(std::ostream& os, std::span<const ResultRecord> results) {
    os << "technique,config,rankscore_fscore,rankscore_auc,rankscore_mcc,rankscore_gmeasure,mean_rank_score,rank,"
          "rank_sd\n";
    for (const auto& cr : configuration_ranks(results)) {
        for (const auto& row : cr.table.rows) {
            const auto sd = cr.rank_sd.find(row.technique);
            csv::write_row(os, {row.technique, std::string(to_string(cr.kind)), csv::format_double(row.rankscores[0]),
                                csv::format_double(row.rankscores[1]), csv::format_double(row.rankscores[2]),
                                csv::format_double(row.rankscores[3]), csv::format_double(row.mean_rank_score),
                                std::to_string(row.rank),
                                sd == cr.rank_sd.end() ? "" : csv::format_double(sd->second)});
        }
    }
}

/// Time-aware results against the cross-validation baseline, per technique
/// and metric, for each configuration and for all configurations pooled.
inline void write_comparisons_csv(std::ostream& os, std::span<const ResultRecord> results, const ReportOptions& opts) {
    os << "technique,config,metric,p_value,cliffs_delta,magnitude,significant\n";
    std::map<std::string, std::map<std::string, std::vector<const ResultRecord*>>> time_aware;
    std::map<std::string, std::vector<const ResultRecord*>> baseline;
    for (const auto& r : results) {
        if (r.kind == ConfigurationKind::CrossValidation) {
            baseline[r.technique].push_back(&r);
        } else {
            time_aware[r.technique][std::string(to_string(r.kind))].push_back(&r);
            time_aware[r.technique]["ALL"].push_back(&r);
        }
    }
    const auto values = [](const std::vector<const ResultRecord*>& rows, Metric m) {
        std::vector<double> v;
        for (const auto* r : rows) {
            if (m == Metric::AUC && r->auc_degenerate) continue;
            v.push_back(metric_value(r->scores, m));
        }
        return v;
    };
    for (const auto& [tech, per_config] : time_aware) {
        const auto base = baseline.find(tech);
        if (base == baseline.end()) continue;
        for (const auto& [config, rows] : per_config) {
            for (Metric m : kRankingMetrics) {
                const auto a = values(rows, m);
                const auto b = values(base->second, m);
                if (a.empty() || b.empty()) continue;
                const double p = wilcoxon_rank_sum(a, b, opts.wilcoxon);
                const auto cd = cliffs_delta(a, b);
                csv::write_row(os, {tech, config, std::string(to_string(m)), csv::format_double(p),
                                    csv::format_double(cd.delta), std::string(to_string(cd.magnitude)),
                                    p < opts.alpha ? "1" : "0"});
            }
        }
    }
}

/// Mean metric value per (technique, configuration, split, window) cell.
inline void write_plot_data_csv(std::ostream& os, std::span<const ResultRecord> results) {
    os << "technique,config,split_index,window_k,metric,value\n";
    std::map<std::tuple<std::string, ConfigurationKind, std::size_t, std::size_t>, std::vector<const ResultRecord*>> cells;
    for (const auto& r : results) {
        if (r.kind == ConfigurationKind::CrossValidation) continue;
        cells[{r.technique, r.kind, r.split_index, r.window_k.value_or(0)}].push_back(&r);
    }
    for (const auto& [key, rows] : cells) {
        const auto& [tech, kind, split, window] = key;
        const auto mv = detail::mean_metric_values(rows);
        for (Metric m : kRankingMetrics) {
            csv::write_row(os, {tech, std::string(to_string(kind)), std::to_string(split),
                                kind == ConfigurationKind::II ? "inf" : std::to_string(window),
                                std::string(to_string(m)), csv::format_double(mv.at(tech).at(m))});
        }
    }
}

/// Writes stability.csv, ranks.csv, comparisons.csv and plot_data.csv into `dir`.
inline void write_reports(const std::filesystem::path& dir, std::span<const ResultRecord> results,
                          const ReportOptions& opts) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    auto stability = open("stability.csv");
    write_stability_csv(stability, results, opts);
    auto ranks = open("ranks.csv");
    write_ranks_csv(ranks, results);
    auto comparisons = open("comparisons.csv");
    write_comparisons_csv(comparisons, results, opts);
    auto plot = open("plot_data.csv");
    write_plot_data_csv(plot, results);
}

inline ReportOptions report_options(const ExperimentConfig& cfg) {
    return ReportOptions{cfg.stability_threshold, cfg.alpha, cfg.wilcoxon};
}

inline nlohmann::ordered_json manifest_json(const ExperimentConfig& cfg, const RunCounts& c) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_text(cfg))));
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["config_hash"] = hash;
    j["seed"] = cfg.seed.value_or(0);
    j["releases"] = c.release_count;
    j["buckets"] = c.bucket_count;
    j["pairs"] = c.pairs_per_kind;
    j["units_total"] = c.units_total;
    j["units_processed"] = c.units_processed;
    j["units_skipped"] = c.units_skipped;
    j["versions_in_processed_units"] = c.versions_in_processed_units;
    j["versions_skipped"] = c.versions_skipped;
    j["result_rows"] = c.result_rows;
    return j;
}

/// Runs the experiment and writes results.csv, manifest.json, the reports and
/// (optionally) tree dumps into the configured output directory.
inline ExperimentResult run_to_directory(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    auto result = run_experiment(cfg, load_dataset(cfg), opts);
    const auto& dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "results.csv", std::ios::binary);
        if (!out) throw ConfigError("cannot write " + (dir / "results.csv").string());
        write_results_header(out);
        for (const auto& r : result.rows) write_result_row(out, r);
    }
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << manifest_json(cfg, result.counts).dump(2) << '\n';
    }
    write_reports(dir, result.rows, report_options(cfg));
    if (opts.dump_trees) {
        std::filesystem::create_directories(dir / "trees");
        for (const auto& t : result.trees) {
            std::ofstream out(dir / "trees" / (t.name + ".txt"), std::ios::binary);
            out << t.text;
        }
    }
    return result;
}

}  // namespace tacpdp
