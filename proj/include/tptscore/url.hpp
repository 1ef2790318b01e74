#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "tptscore/error.hpp"

namespace tptscore {

/// The parts of an absolute URL the matcher cares about. Scheme and host are
/// lowercased; the path never includes the query or fragment and defaults to
/// "/".
struct Url {
    std::string scheme;
    std::string host;
    std::optional<unsigned> port;
    std::string path;
    std::string query;

    bool is_http() const noexcept { return scheme == "http" || scheme == "https"; }
};

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

inline bool valid_host(std::string_view h) {
    if (h.empty()) return false;
    if (h.front() == '[') return h.back() == ']' && h.size() > 2;
    if (h.front() == '.' || h.find("..") != std::string_view::npos) return false;
    return std::all_of(h.begin(), h.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '.' || c == '_';
    });
}

} // namespace detail

inline std::optional<Url> try_parse_url(std::string_view text) {
    auto sep = text.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    auto scheme = text.substr(0, sep);
    if (!detail::valid_scheme(scheme)) return std::nullopt;

    auto rest = text.substr(sep + 3);
    auto auth_end = rest.find_first_of("/?#");
    auto authority = rest.substr(0, auth_end);
    auto tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

    Url url;
    url.scheme = detail::ascii_lower(scheme);

    std::string_view host = authority;
    std::string_view port_text;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        host = authority.substr(0, close + 1);
        auto after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') return std::nullopt;
            port_text = after.substr(1);
        }
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port_text = authority.substr(colon + 1);
    }

    // A single trailing dot denotes the same host.
    if (host.size() > 1 && host.back() == '.') host.remove_suffix(1);
    if (!detail::valid_host(host)) return std::nullopt;
    url.host = detail::ascii_lower(host);

    if (!port_text.empty()) {
        if (port_text.size() > 5 ||
            !std::all_of(port_text.begin(), port_text.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return std::nullopt;
        }
        auto port = static_cast<unsigned>(std::stoul(std::string(port_text)));
        if (port > 65535) return std::nullopt;
        url.port = port;
    }

    for (char c : tail) {
        if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
    }
    auto path_end = tail.find_first_of("?#");
    url.path = std::string(tail.substr(0, path_end));
    if (url.path.empty()) url.path = "/";
    if (path_end != std::string_view::npos && tail[path_end] == '?') {
        auto q = tail.substr(path_end + 1);
        url.query = std::string(q.substr(0, q.find('#')));
    }
    return url;
}

inline Url parse_url(std::string_view text) {
    if (auto url = try_parse_url(text)) return *std::move(url);
    throw Error(ErrorCode::MalformedUrl, "cannot parse URL \"" + std::string(text) + "\"");
}

} // namespace tptscore
