#pragma once

// On-disk formats for the reference data: tracker patterns, the blacklist,
// the domain-to-category mapping, and plain-text suffix lists.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tptscore/core_model.hpp"
#include "tptscore/error.hpp"
#include "tptscore/percentile_store.hpp"
#include "tptscore/scoring.hpp"
#include "tptscore/suffix_list.hpp"
#include "tptscore/url.hpp"

namespace tptscore {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::StoreIo, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::StoreIo, "cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorCode::StoreIo, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::StoreIo, "cannot replace " + path.string());
}

namespace detail {

inline std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline nlohmann::json parse_json(std::string_view text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, what + ": " + e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Patterns

inline nlohmann::ordered_json pattern_to_json(const TptPattern& p) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["host_suffix"] = p.host_suffix;
    j["path_regex"] = p.path_regex ? nlohmann::ordered_json(*p.path_regex) : nlohmann::ordered_json(nullptr);
    j["category"] = std::string(to_string(p.category));
    j["company"] = p.company;
    return j;
}

/// Field-level decoding only; semantic checks (regex, duplicate ids) happen
/// when the set is compiled. Company names are trimmed here.
inline TptPattern pattern_from_json(const nlohmann::json& j, std::size_t index) {
    auto where = "pattern[" + std::to_string(index) + "]";
    if (!j.is_object()) throw Error(ErrorCode::CorruptData, where + " is not an object");
    if (auto id = j.find("id"); id != j.end() && id->is_string()) where += " (id \"" + id->get<std::string>() + "\")";

    static const std::set<std::string> known = {"id", "name", "host_suffix", "path_regex", "category", "company"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw Error(ErrorCode::CorruptData, where + ": unknown field \"" + key + "\"");
    }
    auto str = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw Error(ErrorCode::CorruptData, where + ": missing or non-string \"" + key + "\"");
        }
        return it->get<std::string>();
    };

    TptPattern p;
    p.id = str("id");
    p.name = str("name");
    p.host_suffix = str("host_suffix");
    if (auto it = j.find("path_regex"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error(ErrorCode::CorruptData, where + ": path_regex must be a string or null");
        p.path_regex = it->get<std::string>();
    }
    auto category = str("category");
    auto tpt = try_parse_tpt_category(category);
    if (!tpt) throw Error(ErrorCode::UnknownCategory, where + ": unknown tracker category \"" + category + "\"");
    p.category = *tpt;
    p.company = detail::trim(str("company"));
    return p;
}

inline std::vector<TptPattern> parse_patterns(std::string_view text) {
    auto j = detail::parse_json(text, "pattern file");
    if (!j.is_array()) throw Error(ErrorCode::CorruptData, "pattern file must be a JSON array");
    std::vector<TptPattern> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(pattern_from_json(j[i], i));
    return out;
}

inline std::string serialize_patterns(const std::vector<TptPattern>& patterns) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : patterns) arr.push_back(pattern_to_json(p));
    return arr.dump(2) + "\n";
}

/// Content hash of the canonical serialization (FNV-1a, 64 bit).
inline std::string pattern_set_version(const std::vector<TptPattern>& patterns) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialize_patterns(patterns)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return "ps-" + std::string(buf);
}

// ---------------------------------------------------------------------------
// Blacklist

inline Blacklist parse_blacklist(std::string_view text) {
    auto j = detail::parse_json(text, "blacklist file");
    if (!j.is_object()) throw Error(ErrorCode::CorruptData, "blacklist file must be a JSON object");
    Blacklist b;
    for (const auto& [key, value] : j.items()) {
        auto site = try_parse_site_category(key);
        if (!site) throw Error(ErrorCode::UnknownCategory, "blacklist key \"" + key + "\" is not a site category");
        if (!value.is_array()) throw Error(ErrorCode::CorruptData, "blacklist row \"" + key + "\" must be an array");
        std::set<TptCategory> row;
        for (const auto& v : value) {
            auto name = v.is_string() ? v.get<std::string>() : v.dump();
            auto tpt = try_parse_tpt_category(name);
            if (!tpt) {
                throw Error(ErrorCode::UnknownCategory,
                            "blacklist row \"" + key + "\": unknown tracker category \"" + name + "\"");
            }
            b.add(*site, *tpt);
        }
    }
    return b;
}

inline std::string serialize_blacklist(const Blacklist& b) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [site, row] : b.rows()) {
        auto arr = nlohmann::ordered_json::array();
        for (auto t : row) arr.push_back(std::string(to_string(t)));
        j[std::string(to_string(site))] = arr;
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Domain categories

struct SiteLookup {
    std::string domain;
    SiteCategory category = SiteCategory::Other;
    bool uncategorized = true;
};

/// Normalizes a host or bare domain: lowercase, at most one trailing dot
/// removed, then reduced to its registrable domain. Throws MalformedUrl for
/// anything that is not a hostname.
inline std::string normalize_domain(std::string_view input, const SuffixList& suffixes) {
    auto host = detail::ascii_lower(detail::trim(input));
    if (host.size() > 1 && host.back() == '.') host.pop_back();
    if (host.empty()) throw Error(ErrorCode::EmptyHost, "domain is empty");
    if (!detail::valid_host(host)) throw Error(ErrorCode::MalformedUrl, "\"" + std::string(input) + "\" is not a hostname");
    return registrable_domain(host, suffixes);
}

class CategoryMap {
public:
    CategoryMap() = default;

    void set(const std::string& domain, SiteCategory category) { map_[domain] = category; }

    SiteLookup lookup(std::string_view host, const SuffixList& suffixes) const {
        SiteLookup out;
        out.domain = normalize_domain(host, suffixes);
        if (auto it = map_.find(out.domain); it != map_.end()) {
            out.category = it->second;
            out.uncategorized = false;
        }
        return out;
    }

    const std::map<std::string, SiteCategory>& entries() const noexcept { return map_; }

    static CategoryMap parse(std::string_view text) {
        auto j = detail::parse_json(text, "category file");
        if (!j.is_object()) throw Error(ErrorCode::CorruptData, "category file must be a JSON object");
        CategoryMap m;
        for (const auto& [key, value] : j.items()) {
            if (!valid_store_domain(key)) throw Error(ErrorCode::CorruptData, "category key \"" + key + "\" is not a lowercase domain");
            if (!value.is_string()) throw Error(ErrorCode::CorruptData, "category for \"" + key + "\" must be a string");
            auto site = try_parse_site_category(value.get<std::string>());
            if (!site) {
                throw Error(ErrorCode::UnknownCategory,
                            "category for \"" + key + "\": unknown site category \"" + value.get<std::string>() + "\"");
            }
            m.map_[key] = *site;
        }
        return m;
    }

    std::string serialize() const {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [domain, cat] : map_) j[domain] = std::string(to_string(cat));
        return j.dump(2) + "\n";
    }

private:
    std::map<std::string, SiteCategory> map_;
};

} // namespace tptscore
