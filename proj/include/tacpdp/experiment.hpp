#pragma once

// End-to-end orchestration: ingest, bucketize, enumerate pairs, treat, train,
// evaluate, and the results table that ties them together.

#include <tacpdp/config.hpp>
#include <tacpdp/csv.hpp>
#include <tacpdp/dataset.hpp>
#include <tacpdp/error.hpp>
#include <tacpdp/matrix.hpp>
#include <tacpdp/metrics.hpp>
#include <tacpdp/pairs.hpp>
#include <tacpdp/stability.hpp>
#include <tacpdp/treatments.hpp>
#include <tacpdp/tree.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace tacpdp {

inline constexpr std::string_view kToolVersion = "0.3.0";

inline constexpr std::string_view kResultsHeader =
    "technique,kind,window_k,split_index,gap,test_project,test_version,tp,fp,tn,fn,precision,recall,fscore,"
    "gmeasure,mcc,auc,auc_degenerate";

inline void write_results_header(std::ostream& os) { os << kResultsHeader << '\n'; }

inline void write_result_row(std::ostream& os, const ResultRecord& r) {
    const std::string window =
        r.kind == ConfigurationKind::CrossValidation ? std::string() : format_window(r.window_k);
    csv::write_row(os, {r.technique, std::string(to_string(r.kind)), window, std::to_string(r.split_index),
                        std::to_string(r.gap), r.test_project, r.test_version, std::to_string(r.cm.tp),
                        std::to_string(r.cm.fp), std::to_string(r.cm.tn), std::to_string(r.cm.fn),
                        csv::format_double(r.scores.precision), csv::format_double(r.scores.recall),
                        csv::format_double(r.scores.fscore), csv::format_double(r.scores.gmeasure),
                        csv::format_double(r.scores.mcc), csv::format_double(r.scores.auc),
                        r.auc_degenerate ? "1" : "0"});
}

inline std::vector<ResultRecord> read_results_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw EmptyDatasetError("results file is empty");
    if (csv::trim(line) != kResultsHeader) throw ParseError(1, "unexpected results header");
    std::vector<ResultRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split_line(line);
        if (!f || f->size() != 18) throw ParseError(line_no, "expected 18 fields");
        const auto& v = *f;
        ResultRecord r;
        r.technique = v[0];
        const auto kind = parse_kind(v[1]);
        if (!kind) throw ParseError(line_no, "unknown kind '" + v[1] + "'");
        r.kind = *kind;
        if (!v[2].empty() && v[2] != "inf") {
            const auto k = csv::parse_int(v[2]);
            if (!k || *k < 1) throw ParseError(line_no, "bad window_k");
            r.window_k = static_cast<std::size_t>(*k);
        }
        const auto count = [&](std::size_t i) {
            const auto x = csv::parse_int(v[i]);
            if (!x || *x < 0) throw ParseError(line_no, "bad integer in field " + std::to_string(i + 1));
            return static_cast<std::uint64_t>(*x);
        };
        const auto real = [&](std::size_t i) {
            const auto x = csv::parse_double(v[i]);
            if (!x) throw ParseError(line_no, "bad number in field " + std::to_string(i + 1));
            return *x;
        };
        r.split_index = count(3);
        r.gap = count(4);
        r.test_project = v[5];
        r.test_version = v[6];
        r.cm = {count(7), count(8), count(9), count(10)};
        r.scores = {real(11), real(12), real(13), real(14), real(15), real(16)};
        r.auc_degenerate = v[17] == "1";
        out.push_back(std::move(r));
    }
    return out;
}

struct RunOptions {
    std::size_t threads = 1;
    bool dump_trees = false;
    std::ostream* log = nullptr;
};

/// Bookkeeping of one run. Units are (pair, technique) combinations;
/// result_rows == versions_in_processed_units - versions_skipped.
struct RunCounts {
    std::size_t bucket_count = 0;
    std::size_t release_count = 0;
    std::map<std::string, std::size_t> pairs_per_kind;
    std::size_t units_total = 0;
    std::size_t units_processed = 0;
    std::size_t units_skipped = 0;
    std::size_t versions_in_processed_units = 0;
    std::size_t versions_skipped = 0;
    std::size_t result_rows = 0;
};

struct TreeDump {
    std::string name;
    std::string text;
};

struct ExperimentResult {
    std::vector<ResultRecord> rows;
    RunCounts counts;
    std::vector<TreeDump> trees;
};

namespace detail {

inline std::uint64_t pair_seed(std::uint64_t seed, const PairSpec& spec) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(spec.kind), static_cast<std::uint32_t>(spec.window_k.value_or(0)),
                      static_cast<std::uint32_t>(spec.split_index), static_cast<std::uint32_t>(spec.gap_buckets)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline std::string pair_name(const PairSpec& s) {
    std::string name(to_string(s.kind));
    if (s.kind == ConfigurationKind::CrossValidation) return name + "_fold" + std::to_string(s.split_index);
    return name + "_k" + format_window(s.window_k) + "_s" + std::to_string(s.split_index);
}

struct UnitOutcome {
    std::vector<ResultRecord> rows;
    std::size_t units = 0;
    std::size_t processed = 0;
    std::size_t skipped = 0;
    std::size_t versions = 0;
    std::size_t versions_skipped = 0;
    std::string log;
    std::vector<TreeDump> trees;
};

// Runs every configured technique on one pair.
inline UnitOutcome process_pair(const TrainTestPair& pair, const ExperimentConfig& cfg, bool dump_trees) {
    UnitOutcome out;
    out.units = cfg.techniques.size();
    std::ostringstream log;
    const std::string name = pair_name(pair.spec);
    PairData data;
    try {
        data = materialize(pair);
        if (cfg.balance) data.train = undersample(data.train, pair_seed(*cfg.seed, pair.spec));
    } catch (const Error& e) {
        log << "skip " << name << " (all techniques): " << e.what() << '\n';
        out.skipped = out.units;
        out.log = log.str();
        return out;
    }
    for (Treatment t : cfg.techniques) {
        try {
            const TreatedPair treated = apply_treatment(t, data, cfg.treatment);
            if (treated.relabel_fallback) log << "note " << name << " " << to_string(t) << ": relabel fallback\n";
            const DecisionTree tree = train_tree(treated, cfg.tree);
            const auto scored = evaluate_pair(tree, treated, &log);
            ++out.processed;
            out.versions += treated.test_groups.size();
            out.versions_skipped += treated.test_groups.size() - scored.size();
            for (const auto& vs : scored) {
                out.rows.push_back(ResultRecord{std::string(to_string(t)), pair.spec.kind, pair.spec.window_k,
                                                pair.spec.split_index, pair.spec.gap_buckets, vs.project_id,
                                                vs.version_id, vs.cm, vs.scores, vs.auc_degenerate});
            }
            if (dump_trees) {
                std::ostringstream text;
                tree.dump(text);
                out.trees.push_back({std::string(to_string(t)) + "_" + name, text.str()});
            }
        } catch (const Error& e) {
            ++out.skipped;
            log << "skip " << name << " " << to_string(t) << ": " << e.what() << '\n';
        }
    }
    out.log = log.str();
    return out;
}

}  // namespace detail

/// Runs the configured experiment over already-parsed releases. Work units
/// may run on several threads; results keep the sequential enumeration order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::vector<Release> releases,
                                       const RunOptions& opts = {}) {
    cfg.validate();
    ExperimentResult result;
    result.counts.release_count = releases.size();
    const TimeSeriesDataset ts = bucketize(std::move(releases), cfg.granularity_months);
    result.counts.bucket_count = ts.size();

    std::vector<TrainTestPair> pairs;
    for (ConfigurationKind kind : cfg.configurations) {
        auto ps = enumerate_pairs(ts, kind, cfg.gap_buckets);
        result.counts.pairs_per_kind[std::string(to_string(kind))] = ps.size();
        pairs.insert(pairs.end(), std::make_move_iterator(ps.begin()), std::make_move_iterator(ps.end()));
    }
    if (cfg.baseline_crossval) {
        auto ps = crossval_pairs(ts.releases(), *cfg.baseline_crossval, *cfg.seed);
        result.counts.pairs_per_kind["CV"] = ps.size();
        pairs.insert(pairs.end(), std::make_move_iterator(ps.begin()), std::make_move_iterator(ps.end()));
    }

    std::vector<detail::UnitOutcome> outcomes(pairs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < pairs.size(); i = next++) {
            outcomes[i] = detail::process_pair(pairs[i], cfg, opts.dump_trees);
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(opts.threads, pairs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    auto& c = result.counts;
    for (auto& o : outcomes) {
        if (opts.log) *opts.log << o.log;
        c.units_total += o.units;
        c.units_processed += o.processed;
        c.units_skipped += o.skipped;
        c.versions_in_processed_units += o.versions;
        c.versions_skipped += o.versions_skipped;
        result.rows.insert(result.rows.end(), std::make_move_iterator(o.rows.begin()),
                           std::make_move_iterator(o.rows.end()));
        result.trees.insert(result.trees.end(), std::make_move_iterator(o.trees.begin()),
                            std::make_move_iterator(o.trees.end()));
    }
    c.result_rows = result.rows.size();
    return result;
}

inline std::vector<Release> load_dataset(const ExperimentConfig& cfg) {
    std::ifstream in(cfg.dataset_path);
    if (!in) throw ConfigError("cannot open dataset " + cfg.dataset_path.string());
    return parse_dataset(in, cfg.schema);
}

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
    enum class Level { Info, Warning, Error } level = Level::Info;
    std::string message;
};

inline std::string_view to_string(Diagnostic::Level l) {
    switch (l) {
        case Diagnostic::Level::Info: return "info";
        case Diagnostic::Level::Warning: return "warning";
        case Diagnostic::Level::Error: return "error";
    }
    return "?";
}

/// Checks config, schema, dates and bucket feasibility without training any
/// model. Never throws for dataset or config problems; they become diagnostics.
inline std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> out;
    const auto add = [&](Diagnostic::Level l, std::string m) { out.push_back({l, std::move(m)}); };
    try {
        cfg.validate();
    } catch (const Error& e) {
        add(Diagnostic::Level::Error, e.what());
    }
    std::vector<Release> releases;
    try {
        releases = load_dataset(cfg);
    } catch (const Error& e) {
        add(Diagnostic::Level::Error, std::string("dataset: ") + e.what());
        return out;
    }
    std::size_t instances = 0;
    std::set<std::string> projects;
    for (const auto& r : releases) {
        instances += r.records.size();
        projects.insert(r.project_id);
    }
    add(Diagnostic::Level::Info, std::to_string(projects.size()) + " projects, " + std::to_string(releases.size()) +
                                     " versions, " + std::to_string(instances) + " instances, " +
                                     std::to_string(releases.front().records.front().features.size()) + " features");
    TimeSeriesDataset ts;
    try {
        ts = bucketize(std::move(releases), cfg.granularity_months);
    } catch (const Error& e) {
        add(Diagnostic::Level::Error, std::string("bucketize: ") + e.what());
        return out;
    }
    add(Diagnostic::Level::Info, std::to_string(ts.size()) + " buckets of " + std::to_string(ts.granularity_months) +
                                     " months starting " + format_date(ts.buckets.front().start));
    for (const auto& b : ts.buckets) {
        add(Diagnostic::Level::Info, "bucket " + std::to_string(b.index) + " [" + format_date(b.start) + ", " +
                                         format_date(b.end) + "): " + std::to_string(b.releases.size()) + " versions");
    }
    std::size_t feasible = 0;
    for (ConfigurationKind kind : cfg.configurations) {
        const auto n = enumerate_pairs(ts, kind, cfg.gap_buckets).size();
        feasible += n;
        add(Diagnostic::Level::Info, std::string(to_string(kind)) + ": " + std::to_string(n) + " pairs");
    }
    if (!cfg.configurations.empty() && feasible == 0) {
        add(Diagnostic::Level::Warning, "no feasible time-aware pairs (" + std::to_string(ts.size()) +
                                            " buckets, gap " + std::to_string(cfg.gap_buckets) + ")");
    }
    if (cfg.baseline_crossval) {
        if (*cfg.baseline_crossval > ts.releases().size()) {
            add(Diagnostic::Level::Error, "baseline.crossval_folds exceeds the number of versions");
        } else if (cfg.seed) {
            const auto n = crossval_pairs(ts.releases(), *cfg.baseline_crossval, *cfg.seed).size();
            add(Diagnostic::Level::Info, "CV: " + std::to_string(n) + " pairs");
            if (n == 0) add(Diagnostic::Level::Warning, "no cross-validation fold survives strict CPDP filtering");
        }
    }
    return out;
}

}  // namespace tacpdp
