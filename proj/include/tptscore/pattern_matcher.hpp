#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tptscore/core_model.hpp"
#include "tptscore/error.hpp"
#include "tptscore/suffix_list.hpp"
#include "tptscore/url.hpp"

namespace tptscore {

/// Throws InvalidPattern if the pattern violates a field invariant. The path
/// regex is checked separately by compile().
inline void validate_pattern(const TptPattern& p) {
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::InvalidPattern, "pattern \"" + p.id + "\": " + why);
    };
    if (p.id.empty()) throw Error(ErrorCode::InvalidPattern, "pattern with empty id");
    if (p.company.empty()) fail("company is empty");
    const auto& h = p.host_suffix;
    if (h.empty()) fail("host_suffix is empty");
    if (h.front() == '.' || h.back() == '.') fail("host_suffix has a leading or trailing dot");
    if (h.find("..") != std::string::npos) fail("host_suffix has an empty label");
    for (unsigned char c : h) {
        if (c == ':' || c == '/') fail("host_suffix must not contain a scheme, port or path");
        if (!(std::islower(c) || std::isdigit(c) || c == '-' || c == '.' || c == '_')) {
            fail("host_suffix must be a lowercase hostname");
        }
    }
}

/// Immutable host-suffix index over a validated pattern set.
class CompiledMatcher {
public:
    /// Validates every pattern and builds the index; throws on the first bad
    /// pattern so a matcher is never partially built.
    static CompiledMatcher compile(std::vector<TptPattern> patterns) {
        CompiledMatcher m;
        std::unordered_set<std::string> ids;
        m.entries_.reserve(patterns.size());
        for (auto& p : patterns) {
            validate_pattern(p);
            if (!ids.insert(p.id).second) {
                throw Error(ErrorCode::DuplicateId, "duplicate pattern id \"" + p.id + "\"");
            }
            Entry e;
            if (p.path_regex) {
                try {
                    e.regex.emplace(*p.path_regex, std::regex::ECMAScript | std::regex::optimize);
                } catch (const std::regex_error& ex) {
                    throw Error(ErrorCode::InvalidRegex, "pattern \"" + p.id + "\": " + ex.what());
                }
            }
            e.pattern = std::move(p);
            m.entries_.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < m.entries_.size(); ++i) {
            m.index_[m.entries_[i].pattern.host_suffix].push_back(i);
        }
        // Within one host suffix: patterns with a path regex first, then by id.
        for (auto& [suffix, bucket] : m.index_) {
            std::sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
                const auto& pa = m.entries_[a].pattern;
                const auto& pb = m.entries_[b].pattern;
                bool ra = pa.path_regex.has_value(), rb = pb.path_regex.has_value();
                if (ra != rb) return ra;
                return pa.id < pb.id;
            });
        }
        return m;
    }

    std::size_t pattern_count() const noexcept { return entries_.size(); }

    /// Patterns in their original load order.
    std::vector<TptPattern> patterns() const {
        std::vector<TptPattern> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.pattern);
        return out;
    }

    /// The most specific matching pattern: longest host suffix, then a path
    /// regex over none, then the smallest id.
    const TptPattern* find(const Url& url) const {
        std::string_view host = url.host;
        while (true) {
            if (auto it = index_.find(std::string(host)); it != index_.end()) {
                for (std::size_t i : it->second) {
                    const auto& e = entries_[i];
                    if (!e.regex || std::regex_search(url.path, *e.regex)) return &e.pattern;
                }
            }
            auto dot = host.find('.');
            if (dot == std::string_view::npos) return nullptr;
            host.remove_prefix(dot + 1);
        }
    }

    std::optional<Detection> match(const Url& url, std::string_view raw_url) const {
        if (const auto* p = find(url)) {
            return Detection{p->id, std::string(raw_url), p->category, p->company};
        }
        return std::nullopt;
    }

    std::optional<Detection> match_url(std::string_view url) const { return match(parse_url(url), url); }

private:
    struct Entry {
        TptPattern pattern;
        std::optional<std::regex> regex;
    };

    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

inline CompiledMatcher compile(std::vector<TptPattern> patterns) {
    return CompiledMatcher::compile(std::move(patterns));
}

inline std::optional<Detection> match_url(const CompiledMatcher& matcher, std::string_view url) {
    return matcher.match_url(url);
}

struct ScanResult {
    std::vector<Detection> detections;
    /// Request URLs that could not be parsed.
    std::size_t malformed = 0;
    /// Request URLs skipped because they share the page's registrable domain.
    std::size_t first_party = 0;
};

/// Classifies a page's requests. First-party requests are ignored, each
/// pattern is reported at most once (first request wins), and output order
/// follows the request list.
inline ScanResult scan(const CompiledMatcher& matcher, std::string_view page_url,
                       const std::vector<std::string>& request_urls, const SuffixList& suffixes) {
    const Url page = parse_url(page_url);
    const std::string page_domain = registrable_domain(page.host, suffixes);

    ScanResult result;
    std::unordered_set<std::string> seen;
    for (const auto& raw : request_urls) {
        auto url = try_parse_url(raw);
        if (!url) {
            ++result.malformed;
            continue;
        }
        if (registrable_domain(url->host, suffixes) == page_domain) {
            ++result.first_party;
            continue;
        }
        auto detection = matcher.match(*url, raw);
        if (detection && seen.insert(detection->pattern_id).second) {
            result.detections.push_back(std::move(*detection));
        }
    }
    return result;
}

} // namespace tptscore
