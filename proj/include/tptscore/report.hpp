#pragma once

// JSON and plain-text renderings of scan results. The JSON shape is shared by
// the HTTP service and `tptscore scan --format json`.

#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tptscore/pipeline.hpp"

namespace tptscore {

inline nlohmann::ordered_json result_json(const PrivacyScoreResult& r) {
    nlohmann::ordered_json j;
    j["cat_percentile"] = rounded2(r.cat_percentile);
    j["glob_percentile"] = rounded2(r.glob_percentile);
    j["privacy_score"] = rounded2(r.privacy_score);
    j["cat_population"] = r.cat_population;
    j["glob_population"] = r.glob_population;
    return j;
}

inline nlohmann::ordered_json detection_json(const Detection& d) {
    nlohmann::ordered_json j;
    j["pattern_id"] = d.pattern_id;
    j["matched_url"] = d.matched_url;
    j["category"] = std::string(to_string(d.category));
    j["company"] = d.company;
    return j;
}

inline nlohmann::ordered_json breakdown_json(const ScoreBreakdown& b) {
    nlohmann::ordered_json j;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : b.entries) {
        nlohmann::ordered_json row;
        row["pattern_id"] = e.pattern_id;
        row["base"] = e.base.to_double();
        row["blacklisted"] = e.blacklisted;
        row["company_deduped"] = e.company_deduped;
        row["final"] = e.final_score.to_double();
        entries.push_back(std::move(row));
    }
    j["entries"] = std::move(entries);
    j["agg_score"] = b.agg_score.to_double();
    j["agg_score_halves"] = b.agg_score.halves();
    j["companies"] = b.companies;
    return j;
}

inline nlohmann::ordered_json scan_report_json(const ScanReport& r) {
    nlohmann::ordered_json j;
    j["version"] = r.version;
    j["domain"] = r.site.domain;
    j["category"] = std::string(to_string(r.site.category));
    j["uncategorized"] = r.site.uncategorized;
    auto detections = nlohmann::ordered_json::array();
    for (const auto& d : r.scan.detections) detections.push_back(detection_json(d));
    j["detections"] = std::move(detections);
    j["breakdown"] = breakdown_json(r.breakdown);
    j["result"] = result_json(r.result);
    j["skipped"] = {{"malformed", r.scan.malformed}, {"first_party", r.scan.first_party}};
    return j;
}

/// The exact bytes emitted for a scan report by both front ends.
inline std::string scan_report_body(const ScanReport& r) { return scan_report_json(r).dump(2) + "\n"; }

/// Human-readable report: the score, how the site compares, and who runs
/// the trackers.
inline std::string render_text(const ScanReport& r, const ReferenceData& ref) {
    std::ostringstream out;
    auto category = std::string(to_string(r.site.category));
    out << "Privacy report for " << r.site.domain << " (" << category
        << (r.site.uncategorized ? ", uncategorized" : "") << ")\n\n";
    out << "Privacy score: " << format2(r.result.privacy_score) << " / 100\n";
    out << "  Tracks more than " << format2(r.result.cat_percentile) << "% of " << r.result.cat_population
        << " other site(s) in category " << category << "\n";
    out << "  Tracks more than " << format2(r.result.glob_percentile) << "% of " << r.result.glob_population
        << " other site(s)\n\n";

    if (r.scan.detections.empty()) {
        out << "No third-party trackers detected\n";
    } else {
        std::map<std::string, std::string> names;
        for (const auto& p : ref.matcher.patterns()) names[p.id] = p.name;
        out << "Trackers detected: " << r.scan.detections.size() << "\n";
        for (std::size_t i = 0; i < r.scan.detections.size(); ++i) {
            const auto& d = r.scan.detections[i];
            const auto& e = r.breakdown.entries[i];
            out << "  " << names[d.pattern_id] << " [" << to_string(d.category) << "] " << d.company << "\n"
                << "      base " << e.base.to_string();
            if (e.blacklisted) out << ", x1.5 blacklisted on " << category << " sites";
            if (e.company_deduped) out << ", -1 company already seen";
            out << " => " << e.final_score.to_string() << "\n";
        }
    }
    out << "Aggregate tracker score: " << r.breakdown.agg_score.to_string() << "\n";

    std::map<std::string, int> per_company;
    for (const auto& d : r.scan.detections) ++per_company[d.company];
    out << "\nCompanies operating trackers: " << per_company.size() << "\n";
    for (const auto& [company, count] : per_company) {
        out << "  " << company << " (" << count << (count == 1 ? " tracker" : " trackers") << ")\n";
    }
    if (r.scan.malformed || r.scan.first_party) {
        out << "\nSkipped requests: " << r.scan.first_party << " first-party, " << r.scan.malformed << " malformed\n";
    }
    return out.str();
}

} // namespace tptscore
