#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "test_support.hpp"
#include "tptscore/percentile_store.hpp"

using namespace tptscore;

namespace {

ScoreHalf whole(int v) { return ScoreHalf::from_whole(v); }

Timestamp fixed_time() { return Timestamp{std::chrono::seconds{1767607200}}; }  // 2026-01-05T10:00:00Z

/// News: 10, 20, 30; elsewhere: 5 (banking), 40 (adult).
PercentileStore example_store() {
    PercentileStore s;
    s.upsert({"n1.com", SiteCategory::News, whole(10), fixed_time()});
    s.upsert({"n2.com", SiteCategory::News, whole(20), fixed_time()});
    s.upsert({"n3.com", SiteCategory::News, whole(30), fixed_time()});
    s.upsert({"bank.com", SiteCategory::Banking, whole(5), fixed_time()});
    s.upsert({"adult.com", SiteCategory::Adult, whole(40), fixed_time()});
    return s;
}

} // namespace

TEST(Percentile, CategoricalCountsStrictlyBelow) {
    auto s = example_store();
    auto p = s.categorical_percentile(SiteCategory::News, whole(25), "cnn.com");
    EXPECT_EQ(p.percentile, Percentage(200, 3));
    EXPECT_EQ(p.population, 3);
    EXPECT_EQ(format2(p.percentile), "66.67");

    EXPECT_EQ(PercentileStore{}.categorical_percentile(SiteCategory::News, whole(25), "x.com").percentile, Percentage(0));

    PercentileStore ties;
    ties.upsert({"a.com", SiteCategory::News, whole(10), fixed_time()});
    ties.upsert({"b.com", SiteCategory::News, whole(10), fixed_time()});
    EXPECT_EQ(ties.categorical_percentile(SiteCategory::News, whole(10), "x.com").percentile, Percentage(0));
}

TEST(Percentile, Global) {
    auto s = example_store();
    EXPECT_EQ(s.global_percentile(whole(25), "cnn.com").percentile, Percentage(60));
    EXPECT_EQ(s.global_percentile(whole(41), "cnn.com").percentile, Percentage(100));

    PercentileStore single;
    single.upsert({"self.com", SiteCategory::News, whole(3), fixed_time()});
    auto p = single.global_percentile(whole(50), "self.com");
    EXPECT_EQ(p.percentile, Percentage(0));
    EXPECT_EQ(p.population, 0);
}

TEST(FinalizeScore, EmptyStoreGivesHundred) {
    PercentileStore s;
    auto out = s.finalize_score("first.com", SiteCategory::Other, whole(12));
    EXPECT_EQ(out.result.privacy_score, Percentage(100));
    EXPECT_EQ(out.result.cat_percentile, Percentage(0));
    EXPECT_EQ(out.result.glob_percentile, Percentage(0));
    EXPECT_EQ(s.size(), 1u);
    EXPECT_FALSE(out.persist_error);
}

TEST(FinalizeScore, ExampleStore) {
    auto s = example_store();
    auto r = s.finalize_score("cnn.com", SiteCategory::News, whole(25)).result;

    // Brute force over both populations.
    std::vector<oracle::Record> recs = {{"n1.com", SiteCategory::News, 20}, {"n2.com", SiteCategory::News, 40},
                                        {"n3.com", SiteCategory::News, 60}, {"bank.com", SiteCategory::Banking, 10},
                                        {"adult.com", SiteCategory::Adult, 80}};
    EXPECT_TRUE(oracle::same_percentage(r.cat_percentile, oracle::count_below(recs, SiteCategory::News, 50, "cnn.com")));
    EXPECT_TRUE(oracle::same_percentage(r.glob_percentile, oracle::count_below(recs, std::nullopt, 50, "cnn.com")));
    EXPECT_EQ(r.privacy_score, Percentage(110, 3));
    EXPECT_EQ(format2(r.privacy_score), "36.67");
    EXPECT_EQ(r.cat_population, 3);
    EXPECT_EQ(r.glob_population, 5);
    EXPECT_EQ(s.size(), 6u);
}

TEST(FinalizeScore, RescoreExcludesOwnRecordAndReplacesIt) {
    auto s = example_store();
    s.finalize_score("cnn.com", SiteCategory::News, whole(50));
    auto second = s.finalize_score("cnn.com", SiteCategory::News, whole(10)).result;

    auto fresh = example_store();
    EXPECT_EQ(second, fresh.evaluate("cnn.com", SiteCategory::News, whole(10)));
    ASSERT_NE(s.find("cnn.com"), nullptr);
    EXPECT_EQ(s.find("cnn.com")->agg_score, whole(10));
    EXPECT_EQ(s.size(), 6u);
}

TEST(FinalizeScore, PersistenceFailureIsReportedAndRolledBack) {
    testing_support::TempDir dir;
    auto s = example_store();
    s.set_path(dir / "missing-subdir/scores.jsonl");
    auto out = s.finalize_score("cnn.com", SiteCategory::News, whole(25));
    ASSERT_TRUE(out.persist_error);
    EXPECT_EQ(format2(out.result.privacy_score), "36.67");
    EXPECT_EQ(s.find("cnn.com"), nullptr);
}

TEST(StoreFile, RoundTrip) {
    testing_support::TempDir dir;
    PercentileStore s;
    s.upsert({"a.com", SiteCategory::News, ScoreHalf::from_halves(17), fixed_time()});
    s.upsert({"b.org", SiteCategory::Ngo, ScoreHalf{}, fixed_time()});
    s.upsert({"c.co.uk", SiteCategory::ECommerce, whole(40), Timestamp{std::chrono::seconds{0}}});
    s.save(dir / "scores.jsonl");
    auto loaded = PercentileStore::load(dir / "scores.jsonl");
    EXPECT_EQ(loaded.records(), s.records());
    EXPECT_FALSE(std::filesystem::exists(dir / "scores.jsonl.tmp"));

    auto line = s.serialize().substr(0, s.serialize().find('\n'));
    EXPECT_EQ(line, R"({"domain":"a.com","category":"news","agg_score_halves":17,"updated_at":"2026-01-05T10:00:00Z"})");
}

TEST(StoreFile, EmptyFileIsEmptyStore) {
    testing_support::TempDir dir;
    std::ofstream(dir / "scores.jsonl").close();
    EXPECT_EQ(PercentileStore::load(dir / "scores.jsonl").size(), 0u);
}

TEST(StoreFile, CorruptLinesAreNamed) {
    auto expect_corrupt = [](const std::string& text, const std::string& needle) {
        try {
            PercentileStore::parse(text);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::CorruptStore);
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    const std::string good = R"({"domain":"a.com","category":"news","agg_score_halves":2,"updated_at":"2026-01-05T10:00:00Z"})";
    expect_corrupt(good + "\n" + R"({"domain":"b.com","category":"shopping","agg_score_halves":2,"updated_at":"2026-01-05T10:00:00Z"})",
                   "line 2");
    expect_corrupt("{not json", "line 1");
    expect_corrupt(good + "\n" + good, "duplicate");
    expect_corrupt(R"({"domain":"a.com","category":"news","agg_score_halves":-2,"updated_at":"2026-01-05T10:00:00Z"})",
                   "agg_score_halves");
    expect_corrupt(R"({"domain":"a.com","category":"news","agg_score_halves":2.5,"updated_at":"2026-01-05T10:00:00Z"})",
                   "agg_score_halves");
    expect_corrupt(R"({"domain":"a.com","category":"news","agg_score_halves":2,"updated_at":"2026-02-30T10:00:00Z"})",
                   "updated_at");
    expect_corrupt(R"({"domain":"A.com","category":"news","agg_score_halves":2,"updated_at":"2026-01-05T10:00:00Z"})",
                   "domain");
}

TEST(StoreFile, MissingFileIsStoreIo) {
    try {
        PercentileStore::load("/nonexistent/dir/scores.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StoreIo);
    }
}

TEST(Timestamps, FormatAndParse) {
    EXPECT_EQ(format_timestamp(fixed_time()), "2026-01-05T10:00:00Z");
    EXPECT_EQ(parse_timestamp("2026-01-05T10:00:00Z"), fixed_time());
    EXPECT_FALSE(parse_timestamp("2026-01-05 10:00:00"));
    EXPECT_FALSE(parse_timestamp("2026-13-05T10:00:00Z"));
}

TEST(Rounding, HalfAwayFromZero) {
    EXPECT_EQ(format2(Percentage(200, 3)), "66.67");
    EXPECT_EQ(format2(Percentage(100, 3)), "33.33");
    EXPECT_EQ(format2(Percentage(1, 200)), "0.01");
    EXPECT_EQ(format2(Percentage(100)), "100.00");
    EXPECT_DOUBLE_EQ(rounded2(Percentage(110, 3)), 36.67);
}

TEST(PercentileProperty, MatchesCountingOracleAndIsMonotone) {
    gen::Rng rng(314);
    for (int i = 0; i < 100; ++i) {
        PercentileStore store;
        std::vector<oracle::Record> recs;
        for (int n = gen::uniform(rng, 0, 60); n > 0; --n) {
            oracle::Record r{"d" + std::to_string(gen::uniform(rng, 0, 80)) + ".com", gen::random_site(rng),
                             gen::uniform(rng, 0, 40)};
            store.upsert({r.domain, r.category, ScoreHalf::from_halves(r.halves), fixed_time()});
            std::erase_if(recs, [&](const oracle::Record& x) { return x.domain == r.domain; });
            recs.push_back(r);
        }
        ASSERT_EQ(store.size(), recs.size());

        auto site = gen::random_site(rng);
        auto exclude = "d" + std::to_string(gen::uniform(rng, 0, 80)) + ".com";
        Percentage previous = 101;
        for (int halves = 0; halves <= 42; ++halves) {
            auto r = store.evaluate(exclude, site, ScoreHalf::from_halves(halves));
            ASSERT_TRUE(oracle::same_percentage(r.cat_percentile, oracle::count_below(recs, site, halves, exclude)));
            ASSERT_TRUE(oracle::same_percentage(r.glob_percentile, oracle::count_below(recs, std::nullopt, halves, exclude)));
            ASSERT_GE(r.privacy_score, 0);
            ASSERT_LE(r.privacy_score, 100);
            ASSERT_LE(r.privacy_score, previous);
            previous = r.privacy_score;
        }
    }
}
