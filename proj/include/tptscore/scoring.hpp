#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tptscore/core_model.hpp"

namespace tptscore {

/// Tracker categories considered unacceptable per site category. Absent rows
/// are empty.
class Blacklist {
public:
    Blacklist() = default;
    explicit Blacklist(std::map<SiteCategory, std::set<TptCategory>> rows) : rows_(std::move(rows)) {}

    const std::set<TptCategory>& row(SiteCategory site) const {
        static const std::set<TptCategory> empty;
        auto it = rows_.find(site);
        return it == rows_.end() ? empty : it->second;
    }

    bool contains(SiteCategory site, TptCategory tpt) const { return row(site).count(tpt) != 0; }

    void add(SiteCategory site, TptCategory tpt) { rows_[site].insert(tpt); }

    const std::map<SiteCategory, std::set<TptCategory>>& rows() const noexcept { return rows_; }

    friend bool operator==(const Blacklist&, const Blacklist&) = default;

private:
    std::map<SiteCategory, std::set<TptCategory>> rows_;
};

/// Per-scan state: the blacklist row for the page plus the companies seen so
/// far. One context per page; never reused.
struct ScoringContext {
    SiteCategory site_category = SiteCategory::Other;
    std::set<TptCategory> blacklist_set;
    std::set<std::string> seen_companies;

    ScoringContext(SiteCategory site, const Blacklist& blacklist)
        : site_category(site), blacklist_set(blacklist.row(site)) {}
};

struct TptScore {
    ScoreHalf base;
    bool blacklisted = false;
    bool company_deduped = false;
    ScoreHalf final_score;
};

/// Base score, then x1.5 if blacklisted, then -1 if the company was already
/// seen on this page (otherwise the company is recorded).
inline TptScore score_detection(const Detection& detection, ScoringContext& ctx) {
    TptScore s;
    s.base = base_score(detection.category);
    s.final_score = s.base;
    if (ctx.blacklist_set.count(detection.category)) {
        s.blacklisted = true;
        s.final_score = s.final_score.times_three_halves();
    }
    if (ctx.seen_companies.count(detection.company)) {
        s.company_deduped = true;
        s.final_score = s.final_score.minus_one();
    } else {
        ctx.seen_companies.insert(detection.company);
    }
    return s;
}

inline ScoreHalf calc_tpt_score(const Detection& detection, ScoringContext& ctx) {
    return score_detection(detection, ctx).final_score;
}

struct BreakdownEntry {
    std::string pattern_id;
    ScoreHalf base;
    bool blacklisted = false;
    bool company_deduped = false;
    ScoreHalf final_score;

    friend bool operator==(const BreakdownEntry&, const BreakdownEntry&) = default;
};

struct ScoreBreakdown {
    std::vector<BreakdownEntry> entries;
    ScoreHalf agg_score;
    std::set<std::string> companies;
};

inline ScoreBreakdown aggregate(const std::vector<Detection>& detections, SiteCategory site,
                                const Blacklist& blacklist) {
    ScoringContext ctx(site, blacklist);
    ScoreBreakdown out;
    out.entries.reserve(detections.size());
    for (const auto& d : detections) {
        auto s = score_detection(d, ctx);
        out.entries.push_back({d.pattern_id, s.base, s.blacklisted, s.company_deduped, s.final_score});
        out.agg_score += s.final_score;
    }
    out.companies = std::move(ctx.seen_companies);
    return out;
}

/// Default rows: advertising on adult sites, and session replay on the three
/// site categories users considered most sensitive.
inline Blacklist default_blacklist() {
    Blacklist b;
    b.add(SiteCategory::Adult, TptCategory::Advertising);
    b.add(SiteCategory::Adult, TptCategory::SessionReplay);
    b.add(SiteCategory::Banking, TptCategory::SessionReplay);
    b.add(SiteCategory::Healthcare, TptCategory::SessionReplay);
    return b;
}

} // namespace tptscore
