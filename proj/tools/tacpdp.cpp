#include <tacpdp/tacpdp.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
};

tacpdp::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = tacpdp::load_config(args.config);
    if (!args.out.empty()) cfg.output_dir = args.out;
    return cfg;
}

// Writes to `<out>/<name>` when --out was given, otherwise to stdout.
template <typename Fn>
void emit(const CommonArgs& args, const char* name, Fn&& write) {
    if (args.out.empty()) {
        write(std::cout);
        return;
    }
    fs::create_directories(args.out);
    std::ofstream f(fs::path(args.out) / name, std::ios::binary);
    if (!f) throw tacpdp::ConfigError("cannot write " + (fs::path(args.out) / name).string());
    write(f);
}

int cmd_validate(const CommonArgs& args) {
    const auto cfg = load(args);
    int status = 0;
    for (const auto& d : tacpdp::validate(cfg)) {
        std::cout << tacpdp::to_string(d.level) << ": " << d.message << '\n';
        if (d.level == tacpdp::Diagnostic::Level::Error) status = 1;
    }
    return status;
}

int cmd_summary(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto ts = tacpdp::bucketize(tacpdp::load_dataset(cfg), cfg.granularity_months);
    emit(args, "summary.csv", [&](std::ostream& os) { tacpdp::write_summary_csv(os, tacpdp::dataset_summary(ts)); });
    return 0;
}

int cmd_pairs(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto ts = tacpdp::bucketize(tacpdp::load_dataset(cfg), cfg.granularity_months);
    std::vector<tacpdp::TrainTestPair> pairs;
    for (auto kind : cfg.configurations) {
        auto ps = tacpdp::enumerate_pairs(ts, kind, cfg.gap_buckets);
        pairs.insert(pairs.end(), ps.begin(), ps.end());
    }
    if (cfg.baseline_crossval) {
        auto ps = tacpdp::crossval_pairs(ts.releases(), *cfg.baseline_crossval, *cfg.seed);
        pairs.insert(pairs.end(), ps.begin(), ps.end());
    }
    emit(args, "pairs.csv", [&](std::ostream& os) { tacpdp::write_pairs_csv(os, pairs); });
    return 0;
}

int cmd_run(const CommonArgs& args, std::size_t threads, bool dump_trees) {
    auto cfg = load(args);
    cfg.validate();
    tacpdp::RunOptions opts;
    opts.threads = threads;
    opts.dump_trees = dump_trees;
    opts.log = &std::cerr;
    const auto result = tacpdp::run_to_directory(cfg, opts);
    const auto& c = result.counts;
    std::cerr << "processed " << c.units_processed << "/" << c.units_total << " units, " << c.result_rows
              << " result rows -> " << cfg.output_dir.string() << '\n';
    return 0;
}

int cmd_report(const CommonArgs& args) {
    const auto cfg = load(args);
    const auto results_path = cfg.output_dir / "results.csv";
    std::ifstream in(results_path);
    if (!in) throw tacpdp::ConfigError("cannot open " + results_path.string());
    const auto rows = tacpdp::read_results_csv(in);
    tacpdp::write_reports(cfg.output_dir, rows, tacpdp::report_options(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-aware cross-project defect prediction experiments"};
    app.set_version_flag("--version", std::string(tacpdp::kToolVersion));
    app.require_subcommand(1);

    CommonArgs args;
    std::size_t threads = 1;
    bool dump_trees = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides output.dir)");
    };
    auto* validate = app.add_subcommand("validate", "check config and dataset, report bucket and pair counts");
    add_common(validate);
    auto* summary = app.add_subcommand("summary", "per-bucket version, instance and defect counts");
    add_common(summary);
    auto* pairs = app.add_subcommand("pairs", "list the train/test pairs of every configured kind");
    add_common(pairs);
    auto* run = app.add_subcommand("run", "run the experiment and write results, reports and manifest");
    add_common(run);
    run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--dump-trees", dump_trees, "write every trained tree as text");
    auto* report = app.add_subcommand("report", "rebuild reports from an existing results.csv");
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*validate) return cmd_validate(args);
        if (*summary) return cmd_summary(args);
        if (*pairs) return cmd_pairs(args);
        if (*run) return cmd_run(args, threads, dump_trees);
        if (*report) return cmd_report(args);
    } catch (const tacpdp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
