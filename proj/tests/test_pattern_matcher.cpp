#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "tptscore/pattern_matcher.hpp"

using namespace tptscore;

namespace {

TptPattern demdex() {
    return {"adobe-audience-manager", "Adobe Audience Manager", "demdex.net", std::nullopt, TptCategory::Advertising,
            "Adobe"};
}

SuffixList test_suffixes() { return SuffixList(gen::suffixes()); }

} // namespace

TEST(Compile, CountsPatterns) {
    EXPECT_EQ(compile({demdex()}).pattern_count(), 1u);
    auto empty = compile({});
    EXPECT_EQ(empty.pattern_count(), 0u);
    EXPECT_FALSE(empty.match_url("https://dpm.demdex.net/id"));
}

TEST(Compile, RejectsDuplicateIds) {
    auto a = demdex();
    auto b = demdex();
    b.id = a.id = "x";
    b.host_suffix = "other.net";
    try {
        compile({a, b});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
    }
}

TEST(Compile, InvalidRegexNamesPattern) {
    auto p = demdex();
    p.id = "broken-one";
    p.path_regex = "([unclosed";
    try {
        compile({demdex(), p});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidRegex);
        EXPECT_NE(std::string(e.what()).find("broken-one"), std::string::npos);
    }
}

TEST(Compile, RejectsInvalidHostSuffix) {
    for (const char* bad : {"", ".demdex.net", "demdex.net.", "Demdex.net", "https://demdex.net", "demdex.net:443",
                            "demdex.net/path", "a..net"}) {
        auto p = demdex();
        p.host_suffix = bad;
        EXPECT_THROW(compile({p}), Error) << bad;
    }
    auto p = demdex();
    p.company = "";
    EXPECT_THROW(compile({p}), Error);
}

TEST(MatchUrl, DemdexIsAdobeAdvertising) {
    auto m = compile({demdex()});
    auto d = m.match_url("https://dpm.demdex.net/id?d_visid=123");
    ASSERT_TRUE(d);
    EXPECT_EQ(d->pattern_id, "adobe-audience-manager");
    EXPECT_EQ(d->category, TptCategory::Advertising);
    EXPECT_EQ(d->company, "Adobe");
    EXPECT_EQ(d->matched_url, "https://dpm.demdex.net/id?d_visid=123");
    EXPECT_TRUE(m.match_url("http://demdex.net/"));
}

TEST(MatchUrl, RequiresLabelBoundary) {
    auto m = compile({demdex()});
    EXPECT_FALSE(m.match_url("https://example.org/index.html"));
    EXPECT_FALSE(m.match_url("https://notdemdex.net/id"));
    EXPECT_FALSE(m.match_url("https://demdex.net.evil.com/id"));
}

TEST(MatchUrl, MalformedUrlThrows) {
    auto m = compile({demdex()});
    try {
        m.match_url("not a url");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedUrl);
    }
}

TEST(MatchUrl, PathRegexSearchesPathOnly) {
    auto p = demdex();
    p.path_regex = "collect";
    auto m = compile({p});
    EXPECT_TRUE(m.match_url("https://x.demdex.net/g/collect/v1"));
    EXPECT_FALSE(m.match_url("https://x.demdex.net/g?collect=1"));
    EXPECT_FALSE(m.match_url("https://x.demdex.net/g#collect"));

    p.path_regex = "^/tr/?$";
    m = compile({p});
    EXPECT_TRUE(m.match_url("https://demdex.net/tr/?id=1"));
    EXPECT_FALSE(m.match_url("https://demdex.net/x/tr"));
}

TEST(MatchUrl, MostSpecificPatternWins) {
    TptPattern broad{"broad", "Broad", "example.net", std::nullopt, TptCategory::Analytics, "A"};
    TptPattern narrow{"narrow", "Narrow", "px.example.net", std::nullopt, TptCategory::SessionReplay, "B"};
    TptPattern with_path{"with-path", "Path", "example.net", std::string("^/px"), TptCategory::Comments, "C"};
    TptPattern z_id{"z", "Z", "example.net", std::string("^/px"), TptCategory::Comments, "C"};
    auto m = compile({broad, narrow, with_path, z_id});

    EXPECT_EQ(m.match_url("https://px.example.net/px")->pattern_id, "narrow");
    EXPECT_EQ(m.match_url("https://cdn.example.net/px")->pattern_id, "with-path");
    EXPECT_EQ(m.match_url("https://cdn.example.net/other")->pattern_id, "broad");
}

TEST(Scan, DeduplicatesPerPattern) {
    auto m = compile({demdex()});
    auto r = scan(m, "https://shop.example.com", {"https://dpm.demdex.net/id", "https://dpm.demdex.net/event"},
                  test_suffixes());
    ASSERT_EQ(r.detections.size(), 1u);
    EXPECT_EQ(r.detections[0].matched_url, "https://dpm.demdex.net/id");
}

TEST(Scan, ExcludesFirstParty) {
    auto m = compile({demdex()});
    auto r = scan(m, "https://demdex.net", {"https://dpm.demdex.net/id"}, test_suffixes());
    EXPECT_TRUE(r.detections.empty());
    EXPECT_EQ(r.first_party, 1u);
}

TEST(Scan, EmptyAndMalformedInputs) {
    auto m = compile({demdex()});
    EXPECT_TRUE(scan(m, "https://shop.example.com", {}, test_suffixes()).detections.empty());

    auto r = scan(m, "https://shop.example.com", {"data:xyz", "https://dpm.demdex.net/", "::"}, test_suffixes());
    EXPECT_EQ(r.detections.size(), 1u);
    EXPECT_EQ(r.malformed, 2u);

    EXPECT_THROW(scan(m, "not a page", {}, test_suffixes()), Error);
}

TEST(Scan, OrderFollowsFirstAppearance) {
    TptPattern a{"a", "A", "a.io", std::nullopt, TptCategory::Analytics, "X"};
    TptPattern b{"b", "B", "b.io", std::nullopt, TptCategory::Analytics, "Y"};
    auto m = compile({a, b});
    auto r = scan(m, "https://site.com/", {"https://b.io/1", "https://a.io/1", "https://b.io/2"}, test_suffixes());
    ASSERT_EQ(r.detections.size(), 2u);
    EXPECT_EQ(r.detections[0].pattern_id, "b");
    EXPECT_EQ(r.detections[1].pattern_id, "a");
}

// Specificity: for generated pairs where one suffix strictly extends the
// other, the longer one always wins on URLs both match.
TEST(ScanProperty, LongerSuffixAlwaysWins) {
    gen::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        auto host = gen::random_host(rng);
        auto shorter = host.substr(host.find('.') + 1);
        TptPattern longp{"long" + std::to_string(i % 3), "L", host, std::nullopt, TptCategory::Analytics, "A"};
        TptPattern shortp{"a-short", "S", shorter, std::optional<std::string>("."), TptCategory::Advertising, "B"};
        auto m = compile({shortp, longp});
        auto d = m.match_url("https://" + host + "/x");
        ASSERT_TRUE(d);
        EXPECT_EQ(d->pattern_id, longp.id);
    }
}

// Small-instance equivalence with the brute-force reference.
TEST(ScanProperty, AgreesWithBruteForce) {
    gen::Rng rng(20240101);
    for (int instance = 0; instance < 60; ++instance) {
        auto patterns = gen::random_patterns(rng, 12);
        auto m = compile(patterns);
        auto page = "https://" + gen::random_host(rng) + "/";
        std::vector<std::string> urls;
        for (int n = gen::uniform(rng, 0, 60); n > 0; --n) urls.push_back(gen::random_url(rng));

        auto got = scan(m, page, urls, test_suffixes()).detections;
        auto want = oracle::scan(patterns, page, urls, gen::suffixes());
        ASSERT_EQ(got, want) << "instance " << instance;

        // Determinism and the dedup / first-party invariants.
        EXPECT_EQ(scan(m, page, urls, test_suffixes()).detections, got);
        std::set<std::string> ids;
        auto page_domain = registrable_domain(parse_url(page).host, test_suffixes());
        for (const auto& d : got) {
            EXPECT_TRUE(ids.insert(d.pattern_id).second);
            EXPECT_NE(registrable_domain(parse_url(d.matched_url).host, test_suffixes()), page_domain);
        }
    }
}
