#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tptscore/error.hpp"

namespace tptscore {

/// A set of public suffixes ("com", "co.uk"). Only plain suffix rules are
/// supported; wildcard and exception rules of the full public suffix list are
/// not.
class SuffixList {
public:
    SuffixList() = default;

    explicit SuffixList(const std::vector<std::string>& suffixes) {
        for (const auto& s : suffixes) add(s);
    }

    /// Newline-delimited text; '#' starts a comment, blank lines ignored.
    static SuffixList parse(std::string_view text) {
        SuffixList list;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            auto last = line.find_last_not_of(" \t\r");
            auto entry = line.substr(first, last - first + 1);
            if (!valid_entry(entry)) {
                throw Error(ErrorCode::CorruptData,
                            "suffix list line " + std::to_string(line_no) + ": invalid suffix \"" + entry + "\"");
            }
            list.suffixes_.insert(entry);
        }
        return list;
    }

    void add(const std::string& suffix) {
        if (!valid_entry(suffix)) throw Error(ErrorCode::CorruptData, "invalid suffix \"" + suffix + "\"");
        suffixes_.insert(suffix);
    }

    bool contains(std::string_view s) const { return suffixes_.count(std::string(s)) != 0; }
    std::size_t size() const noexcept { return suffixes_.size(); }

    static bool valid_entry(std::string_view s) {
        if (s.empty() || s.front() == '.' || s.back() == '.') return false;
        return std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return std::islower(c) || std::isdigit(c) || c == '-' || c == '.' || c == '_';
        });
    }

private:
    std::unordered_set<std::string> suffixes_;
};

namespace detail {

inline bool is_ip_literal(std::string_view host) {
    if (!host.empty() && host.front() == '[') return true;
    return !host.empty() && std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isdigit(c) || c == '.';
    });
}

} // namespace detail

/// Public suffix plus one label. Falls back to the last two labels when no
/// listed suffix applies; single-label hosts, IP literals, and hosts that are
/// themselves a listed suffix are returned unchanged.
inline std::string registrable_domain(std::string_view host, const SuffixList& suffixes) {
    if (host.empty()) throw Error(ErrorCode::EmptyHost, "host is empty");
    if (detail::is_ip_literal(host)) return std::string(host);

    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < host.size(); ++i) {
        if (host[i] == '.') starts.push_back(i + 1);
    }
    if (starts.size() == 1) return std::string(host);

    // Walk candidate suffixes from longest to shortest.
    for (std::size_t k = 0; k < starts.size(); ++k) {
        if (suffixes.contains(host.substr(starts[k]))) {
            return std::string(k == 0 ? host : host.substr(starts[k - 1]));
        }
    }
    return std::string(host.substr(starts[starts.size() - 2]));
}

} // namespace tptscore
