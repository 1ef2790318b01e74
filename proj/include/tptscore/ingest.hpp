#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tptscore/error.hpp"
#include "tptscore/url.hpp"

namespace tptscore {

struct TraceInput {
    std::string page_url;
    std::vector<std::string> request_urls;
    std::size_t skipped = 0;
};

inline bool is_http_url(std::string_view s) {
    auto url = try_parse_url(s);
    return url && url->is_http();
}

/// Reads the request URLs of a HAR 1.2 capture. Only log.pages[0].title and
/// log.entries[].request.url are consulted. The page URL is the first page's
/// title when that is an http(s) URL, otherwise the first entry's URL.
inline TraceInput parse_har(std::string_view bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedJson, e.what());
    }
    if (!doc.is_object() || !doc.contains("log") || !doc["log"].is_object()) {
        throw Error(ErrorCode::NotHar, "missing \"log\" object");
    }
    const auto& log = doc["log"];
    auto entries = log.find("entries");
    if (entries == log.end() || !entries->is_array()) throw Error(ErrorCode::NotHar, "missing log.entries array");

    TraceInput trace;
    if (auto pages = log.find("pages"); pages != log.end() && pages->is_array() && !pages->empty()) {
        const auto& first = (*pages)[0];
        if (first.is_object() && first.contains("title") && first["title"].is_string()) {
            auto title = first["title"].get<std::string>();
            if (is_http_url(title)) trace.page_url = title;
        }
    }

    for (const auto& entry : *entries) {
        const nlohmann::json* url = nullptr;
        if (entry.is_object()) {
            if (auto req = entry.find("request"); req != entry.end() && req->is_object()) {
                if (auto u = req->find("url"); u != req->end() && u->is_string()) url = &*u;
            }
        }
        if (!url) {
            ++trace.skipped;
            continue;
        }
        auto text = url->get<std::string>();
        if (trace.page_url.empty() && trace.request_urls.empty() && trace.skipped == 0 && is_http_url(text)) {
            trace.page_url = text;
        }
        if (is_http_url(text)) {
            trace.request_urls.push_back(std::move(text));
        } else {
            ++trace.skipped;
        }
    }
    if (trace.page_url.empty()) {
        // Fall back to the first usable request when the first entry was skipped.
        if (trace.request_urls.empty()) throw Error(ErrorCode::NotHar, "no page URL in log.pages[0].title or log.entries");
        trace.page_url = trace.request_urls.front();
    }
    return trace;
}

/// One URL per line; blank lines and '#' comments are ignored, anything that
/// is not an absolute http(s) URL is counted in `skipped`.
inline TraceInput parse_url_list(std::string_view text, std::string page_url) {
    TraceInput trace;
    trace.page_url = std::move(page_url);
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t\r");
        auto candidate = line.substr(first, last - first + 1);
        if (is_http_url(candidate)) {
            trace.request_urls.push_back(std::move(candidate));
        } else {
            ++trace.skipped;
        }
    }
    return trace;
}

} // namespace tptscore
