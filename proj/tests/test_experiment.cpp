#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace tacpdp;
using namespace tacpdp::testing;

namespace {

ExperimentConfig three_year_config(std::vector<ConfigurationKind> kinds) {
    ExperimentConfig c;
    c.dataset_path = "in-memory";
    c.granularity_months = 12;
    c.gap_buckets = 0;
    c.configurations = std::move(kinds);
    c.techniques = {Treatment::Identity};
    c.seed = 1;
    return c;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TACPDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

}  // namespace

TEST(Experiment, ThreeYearIncreasingIncreasingRows) {
    const auto res = run_experiment(three_year_config({ConfigurationKind::II}), three_year_releases());
    EXPECT_EQ(res.counts.pairs_per_kind.at("II"), 2u);
    ASSERT_EQ(res.rows.size(), 3u);
    EXPECT_EQ(res.rows[0].split_index, 1u);
    EXPECT_EQ(res.rows[0].test_project, "j");
    EXPECT_EQ(res.rows[1].test_project, "k");
    EXPECT_EQ(res.rows[2].split_index, 2u);
    EXPECT_EQ(res.rows[2].test_project, "k");
    for (const auto& r : res.rows) {
        EXPECT_EQ(r.technique, "identity");
        EXPECT_FALSE(r.window_k.has_value());
        EXPECT_EQ(r.cm.tp + r.cm.fp + r.cm.tn + r.cm.fn, 4u);
    }
}

TEST(Experiment, CrossValidationOnlyRun) {
    std::vector<Release> rel;
    for (int i = 0; i < 6; ++i) rel.push_back(make_release("p" + std::to_string(i), "1", ymd(2010, 1 + i, 1)));
    auto cfg = three_year_config({});
    cfg.baseline_crossval = 3;
    const auto res = run_experiment(cfg, rel);
    EXPECT_EQ(res.counts.pairs_per_kind.at("CV"), 3u);
    ASSERT_EQ(res.rows.size(), 6u);
    for (const auto& r : res.rows) EXPECT_EQ(r.kind, ConfigurationKind::CrossValidation);
    std::ostringstream os;
    write_result_row(os, res.rows.front());
    EXPECT_NE(os.str().find("identity,CV,,"), std::string::npos);
}

TEST(Experiment, BookkeepingBalances) {
    const auto cfg = toy_config();
    const auto res = run_experiment(cfg, load_dataset(cfg));
    const auto& c = res.counts;
    EXPECT_EQ(c.units_total, c.units_processed + c.units_skipped);
    std::size_t pairs = 0;
    for (const auto& [kind, n] : c.pairs_per_kind) pairs += n;
    EXPECT_EQ(c.units_total, pairs * cfg.techniques.size());
    EXPECT_EQ(c.result_rows, c.versions_in_processed_units - c.versions_skipped);
    EXPECT_EQ(c.result_rows, res.rows.size());
    EXPECT_GT(c.pairs_per_kind.at("CV"), 0u);
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
    const auto cfg = toy_config();
    const auto a = run_results(cfg, scratch_dir("det_a"));
    const auto b = run_results(cfg, scratch_dir("det_b"));
    const auto c = run_results(cfg, scratch_dir("det_c"), 3);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    EXPECT_EQ(first_line(a), kResultsHeader);
}

TEST(Experiment, OutputsRoundTripAndHaveHeaders) {
    const auto dir = scratch_dir("outputs");
    auto cfg = toy_config();
    cfg.output_dir = dir;
    RunOptions opts;
    opts.dump_trees = true;
    const auto res = run_to_directory(cfg, opts);

    std::ifstream in(dir / "results.csv");
    const auto back = read_results_csv(in);
    ASSERT_EQ(back.size(), res.rows.size());
    std::ostringstream original, reread;
    for (const auto& r : res.rows) write_result_row(original, r);
    for (const auto& r : back) write_result_row(reread, r);
    EXPECT_EQ(original.str(), reread.str());

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["result_rows"].get<std::size_t>(), res.rows.size());
    EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), 42u);
    EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 16u);

    EXPECT_EQ(first_line(slurp(dir / "stability.csv")), "technique,config,window_k,metric,n,mean,sd,stable,excluded");
    EXPECT_EQ(first_line(slurp(dir / "ranks.csv")),
              "technique,config,rankscore_fscore,rankscore_auc,rankscore_mcc,rankscore_gmeasure,mean_rank_score,rank,"
              "rank_sd");
    EXPECT_EQ(first_line(slurp(dir / "comparisons.csv")),
              "technique,config,metric,p_value,cliffs_delta,magnitude,significant");
    EXPECT_EQ(first_line(slurp(dir / "plot_data.csv")), "technique,config,split_index,window_k,metric,value");
    EXPECT_FALSE(std::filesystem::is_empty(dir / "trees"));
}

TEST(Experiment, ResultsReaderRejectsBadInput) {
    std::istringstream empty("");
    EXPECT_THROW(read_results_csv(empty), EmptyDatasetError);
    std::istringstream header("a,b\n");
    EXPECT_THROW(read_results_csv(header), ParseError);
}

TEST(Validate, WarnsWhenNoPairIsFeasible) {
    const auto dir = scratch_dir("validate");
    write_file(dir / "d.csv",
               "project,version,date,class,loc,bug\n"
               "a,1,2010-01-01,A,1,0\na,1,2010-01-01,B,2,1\n"
               "b,1,2010-08-01,A,1,0\nb,1,2010-08-01,B,2,1\n");
    write_file(dir / "c.conf", "dataset.path = d.csv\nrun.seed = 1\npairs.gap_buckets = 1\n");
    const auto diags = validate(load_config(dir / "c.conf"));
    const bool warned = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.level == Diagnostic::Level::Warning && d.message.find("no feasible") != std::string::npos;
    });
    EXPECT_TRUE(warned);
    EXPECT_TRUE(std::none_of(diags.begin(), diags.end(),
                             [](const Diagnostic& d) { return d.level == Diagnostic::Level::Error; }));

    write_file(dir / "bad.conf", "dataset.path = nowhere.csv\nrun.seed = 1\n");
    const auto bad = validate(load_config(dir / "bad.conf"));
    EXPECT_TRUE(std::any_of(bad.begin(), bad.end(),
                            [](const Diagnostic& d) { return d.level == Diagnostic::Level::Error; }));
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch_dir("cli");
    const auto conf = (source_dir() / "data" / "toy_three_year.conf").string();
    EXPECT_EQ(run_cli("validate --config " + conf), 0);
    EXPECT_EQ(run_cli("summary --config " + conf + " --out " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
    EXPECT_EQ(run_cli("run --config " + conf + " --out " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
    EXPECT_EQ(run_cli("report --config " + conf + " --out " + dir.string()), 0);

    write_file(dir / "unknown.conf", "dataset.path = x.csv\nrun.seed = 1\nbogus = 2\n");
    EXPECT_EQ(run_cli("run --config " + (dir / "unknown.conf").string()), 1);
    write_file(dir / "broken.csv", "project,version,date,class,loc,bug\na,1,not-a-date,A,1,0\n");
    write_file(dir / "broken.conf", "dataset.path = broken.csv\nrun.seed = 1\n");
    EXPECT_EQ(run_cli("run --config " + (dir / "broken.conf").string()), 1);
    EXPECT_EQ(run_cli("validate --config " + (dir / "broken.conf").string()), 1);
    EXPECT_EQ(run_cli("run"), 1);
}
