#pragma once

// Ties the modules together: loading a database directory and running one
// page through detection, scoring and ranking. The CLI and the HTTP service
// both go through here.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tptscore/data_files.hpp"
#include "tptscore/error.hpp"
#include "tptscore/pattern_matcher.hpp"
#include "tptscore/percentile_store.hpp"
#include "tptscore/scoring.hpp"
#include "tptscore/seed_data.hpp"
#include "tptscore/suffix_list.hpp"

namespace tptscore {

struct DataPaths {
    std::filesystem::path patterns;
    std::filesystem::path categories;
    std::filesystem::path blacklist;
    std::filesystem::path store;
    /// Empty means the bundled snapshot.
    std::filesystem::path suffixes;

    static DataPaths in_directory(const std::filesystem::path& dir) {
        return {dir / "patterns.json", dir / "categories.json", dir / "blacklist.json", dir / "scores.jsonl",
                dir / "suffixes.txt"};
    }
};

/// Writes any missing database file from the bundled seeds. Existing files
/// are left alone.
inline void bootstrap_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::StoreIo, "cannot create " + dir.string());
    auto paths = DataPaths::in_directory(dir);
    auto seed = [](const std::filesystem::path& p, std::string_view contents) {
        if (!std::filesystem::exists(p)) write_file_atomic(p, contents);
    };
    seed(paths.patterns, seed::kPatterns);
    seed(paths.categories, seed::kCategories);
    seed(paths.blacklist, seed::kBlacklist);
    seed(paths.suffixes, seed::kSuffixes);
    seed(paths.store, "");
}

namespace detail {

/// Runs `load`, prefixing any library error with the file it came from.
template <typename F>
auto with_file_context(const std::filesystem::path& path, F&& load) {
    try {
        return load();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreIo) throw;
        throw Error(e.code(), path.string() + ": " + e.message());
    }
}

} // namespace detail

/// Everything read-only a scan needs. Immutable once built.
struct ReferenceData {
    CompiledMatcher matcher;
    std::string version;
    CategoryMap categories;
    Blacklist blacklist;
    SuffixList suffixes;

    static ReferenceData load(const DataPaths& paths) {
        ReferenceData ref;
        if (paths.suffixes.empty()) {
            ref.suffixes = SuffixList::parse(seed::kSuffixes);
        } else {
            ref.suffixes = detail::with_file_context(paths.suffixes, [&] { return SuffixList::parse(read_file(paths.suffixes)); });
        }
        auto patterns = detail::with_file_context(paths.patterns, [&] { return parse_patterns(read_file(paths.patterns)); });
        ref.version = pattern_set_version(patterns);
        ref.matcher = detail::with_file_context(paths.patterns, [&] { return compile(std::move(patterns)); });
        ref.categories = detail::with_file_context(paths.categories, [&] { return CategoryMap::parse(read_file(paths.categories)); });
        ref.blacklist = detail::with_file_context(paths.blacklist, [&] { return parse_blacklist(read_file(paths.blacklist)); });
        return ref;
    }
};

struct ScanReport {
    std::string version;
    SiteLookup site;
    ScanResult scan;
    ScoreBreakdown breakdown;
    PrivacyScoreResult result;
    std::optional<std::string> persist_error;
};

/// Detection and scoring only; `result` is left at its defaults.
inline ScanReport prepare_scan(const ReferenceData& ref, std::string_view page_url,
                               const std::vector<std::string>& request_urls) {
    ScanReport report;
    report.version = ref.version;
    const Url page = parse_url(page_url);
    report.site = ref.categories.lookup(page.host, ref.suffixes);
    report.scan = scan(ref.matcher, page_url, request_urls, ref.suffixes);
    report.breakdown = aggregate(report.scan.detections, report.site.category, ref.blacklist);
    return report;
}

/// Full pipeline. With `record` false the store is only read.
inline ScanReport run_scan(const ReferenceData& ref, PercentileStore& store, std::string_view page_url,
                           const std::vector<std::string>& request_urls, bool record) {
    auto report = prepare_scan(ref, page_url, request_urls);
    if (record) {
        auto outcome = store.finalize_score(report.site.domain, report.site.category, report.breakdown.agg_score);
        report.result = outcome.result;
        report.persist_error = std::move(outcome.persist_error);
    } else {
        report.result = store.evaluate(report.site.domain, report.site.category, report.breakdown.agg_score);
    }
    return report;
}

} // namespace tptscore
