#pragma once

// Server-side score database. Holds one aggregate score per registrable
// domain and ranks new scores against it.
//
// Concurrency: single writer. Callers must serialize finalize_score() and any
// other mutation; const member functions may run concurrently between writes.

#include <boost/rational.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "tptscore/core_model.hpp"
#include "tptscore/error.hpp"

namespace tptscore {

using Percentage = boost::rational<std::int64_t>;
using Timestamp = std::chrono::sys_seconds;

/// Round a non-negative percentage to hundredths, half away from zero.
inline std::int64_t to_hundredths(const Percentage& p) {
    return (p.numerator() * 200 + p.denominator()) / (2 * p.denominator());
}

inline double rounded2(const Percentage& p) { return static_cast<double>(to_hundredths(p)) / 100.0; }

inline std::string format2(const Percentage& p) {
    auto h = to_hundredths(p);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(h / 100), static_cast<long long>(h % 100));
    return buf;
}

inline std::string format_timestamp(Timestamp t) {
    std::time_t tt = t.time_since_epoch().count();
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
        return std::nullopt;
    }
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9, 11, 12, 14, 15, 17, 18}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    }
    auto num = [&](std::size_t pos, std::size_t len) { return std::stoi(std::string(s.substr(pos, len))); };
    std::tm tm{};
    tm.tm_year = num(0, 4) - 1900;
    tm.tm_mon = num(5, 2) - 1;
    tm.tm_mday = num(8, 2);
    tm.tm_hour = num(11, 2);
    tm.tm_min = num(14, 2);
    tm.tm_sec = num(17, 2);
    if (tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) {
        return std::nullopt;
    }
    std::tm copy = tm;
    std::time_t tt = timegm(&copy);
    if (copy.tm_mday != tm.tm_mday) return std::nullopt;  // e.g. Feb 30
    return Timestamp{std::chrono::seconds{tt}};
}

inline bool valid_store_domain(std::string_view d) {
    if (d.empty() || d.front() == '.' || d.back() == '.') return false;
    return std::all_of(d.begin(), d.end(), [](unsigned char c) {
        return std::islower(c) || std::isdigit(c) || c == '-' || c == '.' || c == '_' || c == '[' || c == ']' || c == ':';
    });
}

struct DomainRecord {
    std::string domain;
    SiteCategory site_category = SiteCategory::Other;
    ScoreHalf agg_score;
    Timestamp updated_at{};

    friend bool operator==(const DomainRecord&, const DomainRecord&) = default;
};

struct PercentileResult {
    Percentage percentile{0};
    std::int64_t population = 0;
};

struct PrivacyScoreResult {
    Percentage cat_percentile{0};
    Percentage glob_percentile{0};
    Percentage privacy_score{100};
    std::int64_t cat_population = 0;
    std::int64_t glob_population = 0;

    friend bool operator==(const PrivacyScoreResult&, const PrivacyScoreResult&) = default;
};

inline PrivacyScoreResult combine_percentiles(const PercentileResult& cat, const PercentileResult& glob) {
    PrivacyScoreResult r;
    r.cat_percentile = cat.percentile;
    r.glob_percentile = glob.percentile;
    r.cat_population = cat.population;
    r.glob_population = glob.population;
    r.privacy_score = Percentage(100) - (cat.percentile + glob.percentile) / Percentage(2);
    return r;
}

struct FinalizeOutcome {
    PrivacyScoreResult result;
    /// Set when the upsert could not be persisted; the in-memory store is
    /// left unchanged in that case.
    std::optional<std::string> persist_error;
};

class PercentileStore {
public:
    using Clock = std::function<Timestamp()>;

    PercentileStore() = default;

    /// Attach a backing file; finalize_score() saves to it after each upsert.
    void set_path(std::filesystem::path path) { path_ = std::move(path); }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

    void set_clock(Clock clock) { clock_ = std::move(clock); }

    std::size_t size() const noexcept { return records_.size(); }
    const std::map<std::string, DomainRecord>& records() const noexcept { return records_; }

    const DomainRecord* find(const std::string& domain) const {
        auto it = records_.find(domain);
        return it == records_.end() ? nullptr : &it->second;
    }

    /// Latest-wins replacement.
    void upsert(DomainRecord record) {
        if (!valid_store_domain(record.domain)) {
            throw Error(ErrorCode::CorruptStore, "invalid domain \"" + record.domain + "\"");
        }
        auto key = record.domain;
        records_.insert_or_assign(std::move(key), std::move(record));
    }

    bool erase(const std::string& domain) { return records_.erase(domain) != 0; }

    /// Share of other domains in `category` whose stored score is strictly
    /// below `agg_score`. Zero when there is nothing to compare against.
    PercentileResult categorical_percentile(SiteCategory category, ScoreHalf agg_score,
                                            std::string_view exclude_domain) const {
        return percentile(agg_score, exclude_domain, [&](const DomainRecord& r) { return r.site_category == category; });
    }

    PercentileResult global_percentile(ScoreHalf agg_score, std::string_view exclude_domain) const {
        return percentile(agg_score, exclude_domain, [](const DomainRecord&) { return true; });
    }

    /// Ranks without recording anything.
    PrivacyScoreResult evaluate(const std::string& domain, SiteCategory category, ScoreHalf agg_score) const {
        return combine_percentiles(categorical_percentile(category, agg_score, domain),
                                   global_percentile(agg_score, domain));
    }

    /// Ranks against the current state, then upserts the domain's record and
    /// persists it if a path is attached.
    FinalizeOutcome finalize_score(const std::string& domain, SiteCategory category, ScoreHalf agg_score) {
        FinalizeOutcome out;
        out.result = evaluate(domain, category, agg_score);

        std::optional<DomainRecord> previous;
        if (const auto* r = find(domain)) previous = *r;
        upsert(DomainRecord{domain, category, agg_score, now()});

        if (path_) {
            try {
                save(*path_);
            } catch (const Error& e) {
                if (previous) {
                    records_.insert_or_assign(domain, *previous);
                } else {
                    records_.erase(domain);
                }
                out.persist_error = e.what();
            }
        }
        return out;
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [domain, r] : records_) {
            nlohmann::ordered_json j;
            j["domain"] = r.domain;
            j["category"] = std::string(to_string(r.site_category));
            j["agg_score_halves"] = r.agg_score.halves();
            j["updated_at"] = format_timestamp(r.updated_at);
            out += j.dump();
            out += '\n';
        }
        return out;
    }

    static PercentileStore parse(std::string_view text) {
        PercentileStore store;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto fail = [&](const std::string& why) {
                throw Error(ErrorCode::CorruptStore, "line " + std::to_string(line_no) + ": " + why);
            };
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception&) {
                fail("not valid JSON");
            }
            if (!j.is_object() || j.size() != 4) fail("expected an object with domain, category, agg_score_halves, updated_at");
            auto get_string = [&](const char* key) {
                auto it = j.find(key);
                if (it == j.end() || !it->is_string()) fail(std::string("missing or non-string \"") + key + "\"");
                return it->get<std::string>();
            };
            DomainRecord r;
            r.domain = get_string("domain");
            if (!valid_store_domain(r.domain)) fail("invalid domain \"" + r.domain + "\"");
            auto category = get_string("category");
            auto site = try_parse_site_category(category);
            if (!site) fail("unknown category \"" + category + "\"");
            r.site_category = *site;
            auto halves = j.find("agg_score_halves");
            if (halves == j.end() || !halves->is_number_integer() || halves->get<std::int64_t>() < 0) {
                fail("agg_score_halves must be a non-negative integer");
            }
            r.agg_score = ScoreHalf::from_halves(halves->get<std::int64_t>());
            auto ts = parse_timestamp(get_string("updated_at"));
            if (!ts) fail("updated_at is not an ISO-8601 UTC timestamp");
            r.updated_at = *ts;
            if (store.find(r.domain)) fail("duplicate domain \"" + r.domain + "\"");
            store.upsert(std::move(r));
        }
        return store;
    }

    static PercentileStore load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::StoreIo, "cannot read " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            auto store = parse(buf.str());
            store.set_path(path);
            return store;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::CorruptStore) {
                throw Error(ErrorCode::CorruptStore, path.string() + " " + e.message());
            }
            throw;
        }
    }

    /// Write-temp-then-rename, so readers never observe a partial file.
    void save(const std::filesystem::path& path) const {
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::StoreIo, "cannot write " + tmp.string());
            out << serialize();
            out.flush();
            if (!out) throw Error(ErrorCode::StoreIo, "write failed for " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::StoreIo, "cannot replace " + path.string());
        }
    }

private:
    template <typename Pred>
    PercentileResult percentile(ScoreHalf agg_score, std::string_view exclude_domain, Pred in_population) const {
        std::int64_t population = 0, below = 0;
        for (const auto& [domain, r] : records_) {
            if (domain == exclude_domain || !in_population(r)) continue;
            ++population;
            if (r.agg_score < agg_score) ++below;
        }
        if (population == 0) return {};
        return {Percentage(100 * below, population), population};
    }

    Timestamp now() const {
        if (clock_) return clock_();
        return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    }

    std::map<std::string, DomainRecord> records_;
    std::optional<std::filesystem::path> path_;
    Clock clock_;
};

} // namespace tptscore
