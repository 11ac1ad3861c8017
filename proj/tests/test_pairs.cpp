#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace tacpdp;
using namespace tacpdp::testing;

namespace {

using Labels = std::vector<std::string>;

struct Row {
    std::size_t k;
    std::size_t split;
    Labels train;
    Labels test;
};

void expect_rows(const std::vector<TrainTestPair>& pairs, const std::vector<Row>& rows) {
    ASSERT_EQ(pairs.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SCOPED_TRACE(i);
        EXPECT_EQ(pairs[i].spec.window_k, rows[i].k);
        EXPECT_EQ(pairs[i].spec.split_index, rows[i].split);
        EXPECT_EQ(release_labels(pairs[i].train), rows[i].train);
        EXPECT_EQ(release_labels(pairs[i].test), rows[i].test);
    }
}

ReleasePtr rel(const std::string& p, const std::string& v) {
    return std::make_shared<const Release>(make_release(p, v, ymd(2000, 1, 1)));
}

}  // namespace

TEST(GeneratePair, ThreeYearExamples) {
    const auto ts = bucketize(three_year_releases(), 12);
    auto p = generate_pair(ts, {ConfigurationKind::CC, 1, 1, 0});
    ASSERT_TRUE(p);
    EXPECT_EQ(release_labels(p->train), Labels{"i-2008"});
    EXPECT_EQ(release_labels(p->test), Labels{"j-2009"});

    p = generate_pair(ts, {ConfigurationKind::IC, 1, 2, 0});
    ASSERT_TRUE(p);
    EXPECT_EQ(release_labels(p->train), (Labels{"i-2008", "j-2009"}));
    EXPECT_EQ(release_labels(p->test), Labels{"k-2010"});

    p = generate_pair(ts, {ConfigurationKind::CC, 1, 1, 1});
    ASSERT_TRUE(p);
    EXPECT_EQ(release_labels(p->train), Labels{"i-2008"});
    EXPECT_EQ(release_labels(p->test), Labels{"k-2010"});
}

TEST(GeneratePair, NothingWhenOneSideIsEmpty) {
    const auto ts = bucketize({make_release("a", "1", ymd(2000, 1, 1)), make_release("b", "1", ymd(2001, 6, 1))}, 6);
    // Buckets: {a}, {}, {b}. CC K=1 at split 2 has an empty train window.
    EXPECT_FALSE(generate_pair(ts, {ConfigurationKind::CC, 1, 2, 0}));
    EXPECT_TRUE(generate_pair(ts, {ConfigurationKind::CC, 2, 1, 1}));
}

TEST(GeneratePair, RejectsInvalidSpecs) {
    const auto ts = bucketize(three_year_releases(), 12);
    EXPECT_THROW(generate_pair(ts, {ConfigurationKind::CrossValidation, std::nullopt, 1, 0}), ConfigError);
    EXPECT_THROW(generate_pair(ts, {ConfigurationKind::CC, 1, 0, 0}), ConfigError);
    EXPECT_THROW(generate_pair(ts, {ConfigurationKind::CC, 1, 3, 0}), ConfigError);
}

TEST(StrictFilter, DropsSharedProjects) {
    TrainTestPair p{{}, {rel("P1", "V1")}, {rel("P1", "V2"), rel("P2", "V1")}};
    auto f = strict_cpdp_filter(p);
    ASSERT_TRUE(f);
    EXPECT_EQ(release_labels(f->test), Labels{"P2-V1"});

    EXPECT_FALSE(strict_cpdp_filter({{}, {rel("P1", "V1")}, {rel("P1", "V2")}}));

    f = strict_cpdp_filter({{}, {rel("P1", "V1"), rel("P2", "V1")}, {rel("P3", "V1"), rel("P2", "V2"), rel("P4", "V1")}});
    ASSERT_TRUE(f);
    EXPECT_EQ(release_labels(f->test), (Labels{"P3-V1", "P4-V1"}));
}

TEST(Enumerate, ThreeYearAllConfigurations) {
    const auto ts = bucketize(three_year_releases(), 12);
    const Labels i{"i-2008"}, j{"j-2009"}, k{"k-2010"}, ij{"i-2008", "j-2009"}, jk{"j-2009", "k-2010"};

    auto cc = enumerate_pairs(ts, ConfigurationKind::CC, 0);
    // K = 3 (the bucket count) materializes the same sets as K = 2.
    expect_rows(cc, {{1, 1, i, j}, {1, 2, j, k}, {2, 1, i, jk}, {2, 2, ij, k}, {3, 1, i, jk}, {3, 2, ij, k}});
    expect_rows(enumerate_pairs(ts, ConfigurationKind::IC, 0), {{1, 1, i, j}, {1, 2, ij, k}, {2, 1, i, jk}, {2, 2, ij, k}});
    expect_rows(enumerate_pairs(ts, ConfigurationKind::CI, 0), {{1, 1, i, jk}, {1, 2, j, k}, {2, 1, i, jk}, {2, 2, ij, k}});

    const auto ii = enumerate_pairs(ts, ConfigurationKind::II, 0);
    ASSERT_EQ(ii.size(), 2u);
    EXPECT_FALSE(ii[0].spec.window_k);
    EXPECT_EQ(release_labels(ii[0].train), i);
    EXPECT_EQ(release_labels(ii[0].test), jk);
    EXPECT_EQ(release_labels(ii[1].train), ij);
    EXPECT_EQ(release_labels(ii[1].test), k);
}

TEST(Enumerate, TwoBucketsWithGapGiveNothing) {
    const auto ts = bucketize({make_release("a", "1", ymd(2000, 1, 1)), make_release("b", "1", ymd(2000, 8, 1))}, 6);
    ASSERT_EQ(ts.size(), 2u);
    for (auto kind : kTimeAwareKinds) EXPECT_TRUE(enumerate_pairs(ts, kind, 1).empty());
}

TEST(Enumerate, WindowRanges) {
    EXPECT_EQ(window_sizes(ConfigurationKind::CC, 19).size(), 19u);
    EXPECT_EQ(window_sizes(ConfigurationKind::IC, 19).size(), 18u);
    EXPECT_EQ(window_sizes(ConfigurationKind::CI, 19).size(), 18u);
    ASSERT_EQ(window_sizes(ConfigurationKind::II, 19).size(), 1u);
    EXPECT_FALSE(window_sizes(ConfigurationKind::II, 19)[0]);
}

TEST(Enumerate, AgreesWithBruteForceOnRandomEightBucketData) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        auto rs = random_releases(rng, 8, 4, 6, 16);
        const auto ts = bucketize(rs, 6);
        for (auto kind : kTimeAwareKinds) {
            for (std::size_t gap : {0u, 1u, 2u}) {
                EXPECT_EQ(keyed(enumerate_pairs(ts, kind, gap)), brute_force_pairs(rs, kind, gap, 6));
            }
        }
    }
}

TEST(Enumerate, OrderedByWindowThenSplit) {
    std::mt19937_64 rng(3);
    const auto ts = bucketize(random_releases(rng, 10, 6, 6, 20), 6);
    const auto pairs = enumerate_pairs(ts, ConfigurationKind::CC, 1);
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const auto a = std::make_pair(*pairs[i - 1].spec.window_k, pairs[i - 1].spec.split_index);
        const auto b = std::make_pair(*pairs[i].spec.window_k, pairs[i].spec.split_index);
        EXPECT_LT(a, b);
    }
}

TEST(Enumerate, NestingAndIiEqualsMaximalIc) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto ts = bucketize(random_releases(rng, 12, 8, 6, 25), 6);
        const std::size_t b = ts.size();
        for (std::size_t split = 1; split < b; ++split) {
            for (std::size_t k = 1; k < b; ++k) {
                const auto cc = generate_pair(ts, {ConfigurationKind::CC, k, split, 0});
                const auto cc2 = generate_pair(ts, {ConfigurationKind::CC, k + 1, split, 0});
                if (cc && cc2) {
                    const auto small = release_labels(cc->train);
                    const auto big = release_labels(cc2->train);
                    EXPECT_TRUE(std::all_of(small.begin(), small.end(), [&](const std::string& s) {
                        return std::find(big.begin(), big.end(), s) != big.end();
                    }));
                }
                const auto ic = generate_pair(ts, {ConfigurationKind::IC, k, split, 0});
                const auto ic2 = generate_pair(ts, {ConfigurationKind::IC, k + 1, split, 0});
                if (ic && ic2) {
                    const auto small = release_labels(ic->test);
                    const auto big = release_labels(ic2->test);
                    EXPECT_TRUE(std::all_of(small.begin(), small.end(), [&](const std::string& s) {
                        return std::find(big.begin(), big.end(), s) != big.end();
                    }));
                }
            }
            const auto ii = generate_pair(ts, {ConfigurationKind::II, std::nullopt, split, 0});
            const auto ic_max = generate_pair(ts, {ConfigurationKind::IC, b, split, 0});
            ASSERT_EQ(ii.has_value(), ic_max.has_value());
            if (ii) {
                EXPECT_EQ(release_labels(ii->train), release_labels(ic_max->train));
                EXPECT_EQ(release_labels(ii->test), release_labels(ic_max->test));
            }
        }
    }
}

TEST(Enumerate, IndependentOfInputOrder) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto rs = random_releases(rng, 10, 5, 6, 20);
        auto shuffled = rs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto a = bucketize(rs, 6);
        const auto b = bucketize(shuffled, 6);
        for (auto kind : kTimeAwareKinds) {
            const auto pa = enumerate_pairs(a, kind, 1);
            const auto pb = enumerate_pairs(b, kind, 1);
            ASSERT_EQ(pa.size(), pb.size());
            for (std::size_t i = 0; i < pa.size(); ++i) {
                EXPECT_EQ(pa[i].spec, pb[i].spec);
                EXPECT_EQ(release_labels(pa[i].train), release_labels(pb[i].train));
                EXPECT_EQ(release_labels(pa[i].test), release_labels(pb[i].test));
            }
        }
    }
}

TEST(CrossVal, ThreeFoldsOverThreeReleases) {
    const auto ts = bucketize(three_year_releases(), 12);
    const auto pairs = crossval_pairs(ts.releases(), 3, 9);
    ASSERT_EQ(pairs.size(), 3u);
    std::set<std::string> tested;
    for (const auto& p : pairs) {
        EXPECT_EQ(p.spec.kind, ConfigurationKind::CrossValidation);
        ASSERT_EQ(p.test.size(), 1u);
        EXPECT_EQ(p.train.size(), 2u);
        tested.insert(p.test[0]->label());
    }
    EXPECT_EQ(tested.size(), 3u);
}

TEST(CrossVal, SeededAndValidated) {
    std::mt19937_64 rng(2);
    const auto ts = bucketize(random_releases(rng, 10, 8, 6, 20), 6);
    const auto n = ts.releases().size();
    if (n >= 2) {
        const auto a = crossval_pairs(ts.releases(), 2, 77);
        const auto b = crossval_pairs(ts.releases(), 2, 77);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(release_labels(a[i].test), release_labels(b[i].test));
    }
    EXPECT_THROW(crossval_pairs(ts.releases(), 1, 1), ConfigError);
    EXPECT_THROW(crossval_pairs(ts.releases(), n + 1, 1), ConfigError);
}

TEST(CrossVal, ExhaustiveCombinationsShowTimeTravel) {
    const auto ts = bucketize(three_year_releases(), 12);
    const auto rs = ts.releases();
    const auto count_travel = [](const std::vector<TrainTestPair>& ps) {
        return std::count_if(ps.begin(), ps.end(), [](const TrainTestPair& p) { return involves_time_travel(p); });
    };
    const auto one_one = exhaustive_release_combinations(rs, 1, 1);
    EXPECT_EQ(one_one.size(), 6u);
    EXPECT_EQ(count_travel(one_one), 3);
    const auto two_one = exhaustive_release_combinations(rs, 2, 1);
    EXPECT_EQ(two_one.size(), 3u);
    EXPECT_EQ(count_travel(two_one), 2);
    const auto one_two = exhaustive_release_combinations(rs, 1, 2);
    EXPECT_EQ(one_two.size(), 3u);
    EXPECT_EQ(count_travel(one_two), 2);
}

TEST(PairsCsv, Layout) {
    const auto ts = bucketize(three_year_releases(), 12);
    std::ostringstream os;
    write_pairs_csv(os, enumerate_pairs(ts, ConfigurationKind::II, 0));
    EXPECT_EQ(os.str(),
              "kind,window_k,split_index,gap,train_versions,test_versions\n"
              "II,inf,1,0,i-2008,j-2009;k-2010\n"
              "II,inf,2,0,i-2008;j-2009,k-2010\n");
}
