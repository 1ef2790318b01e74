#pragma once

// Seeded random instance generators for the property tests. Small alphabets
// on purpose so that suffix collisions, shared companies and ties are common.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tptscore/core_model.hpp"
#include "tptscore/percentile_store.hpp"

namespace gen {

using Rng = std::mt19937_64;

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline const std::vector<std::string>& suffixes() {
    static const std::vector<std::string> s = {"com", "net", "io", "uk", "co.uk"};
    return s;
}

inline std::string random_host(Rng& rng) {
    static const std::vector<std::string> labels = {"a", "b", "trk", "ads", "cdn", "px"};
    static const std::vector<std::string> tlds = {"com", "net", "io", "co.uk", "org"};
    std::string host = pick(rng, tlds);
    int n = uniform(rng, 1, 3);
    for (int i = 0; i < n; ++i) host = pick(rng, labels) + "." + host;
    return host;
}

inline tptscore::TptPattern random_pattern(Rng& rng, int id) {
    static const std::vector<std::string> regexes = {"^/px", "collect", "^/a/\\d+", "b$", "[xy]z"};
    static const std::vector<std::string> companies = {"Acme", "Globex", "Initech", "Umbrella"};
    tptscore::TptPattern p;
    p.id = "p" + std::to_string(id);
    p.name = "Pattern " + std::to_string(id);
    auto host = random_host(rng);
    // Trim some leading labels so suffix patterns of varying length appear.
    for (int drop = uniform(rng, 0, 2); drop > 0; --drop) {
        auto dot = host.find('.');
        if (dot == std::string::npos || host.find('.', dot + 1) == std::string::npos) break;
        host = host.substr(dot + 1);
    }
    p.host_suffix = host;
    if (uniform(rng, 0, 2) == 0) p.path_regex = pick(rng, regexes);
    p.category = tptscore::kAllTptCategories[uniform(rng, 0, 7)];
    p.company = pick(rng, companies);
    return p;
}

inline std::vector<tptscore::TptPattern> random_patterns(Rng& rng, int max_count) {
    std::vector<tptscore::TptPattern> out;
    int n = uniform(rng, 0, max_count);
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int i = 0; i < n; ++i) out.push_back(random_pattern(rng, ids[i]));
    return out;
}

inline std::string random_url(Rng& rng) {
    static const std::vector<std::string> paths = {"/",      "/px",     "/px/1",   "/a/12",       "/collect",
                                                   "/xyz",   "/b",      "/qb",     "/a/b",        ""};
    static const std::vector<std::string> queries = {"", "?collect=1", "?u=/px", "#b"};
    static const std::vector<std::string> malformed = {"not a url", "data:image/gif;base64,R0lG", "http://", "about:blank"};
    if (uniform(rng, 0, 19) == 0) return pick(rng, malformed);
    std::string scheme = uniform(rng, 0, 3) == 0 ? "http://" : "https://";
    std::string port = uniform(rng, 0, 9) == 0 ? ":8443" : "";
    return scheme + random_host(rng) + port + pick(rng, paths) + pick(rng, queries);
}

inline std::vector<tptscore::Detection> random_detections(Rng& rng, int max_count, int max_companies) {
    std::vector<tptscore::Detection> out;
    int n = uniform(rng, 0, max_count);
    for (int i = 0; i < n; ++i) {
        tptscore::Detection d;
        d.pattern_id = "d" + std::to_string(i);
        d.matched_url = "https://t" + std::to_string(i) + ".example/";
        d.category = tptscore::kAllTptCategories[uniform(rng, 0, 7)];
        d.company = "C" + std::to_string(uniform(rng, 1, max_companies));
        out.push_back(d);
    }
    return out;
}

inline tptscore::SiteCategory random_site(Rng& rng) { return tptscore::kAllSiteCategories[uniform(rng, 0, 10)]; }

inline std::set<tptscore::TptCategory> random_row(Rng& rng) {
    std::set<tptscore::TptCategory> row;
    for (auto c : tptscore::kAllTptCategories) {
        if (uniform(rng, 0, 2) == 0) row.insert(c);
    }
    return row;
}

} // namespace gen
