#pragma once

// HTTP front end over the reference data and the score store.
//
//   GET  /v1/site?domain=D          site category for a domain
//   GET  /v1/patterns               tracker patterns (ETag / If-None-Match)
//   GET  /v1/blacklist?category=C   blacklisted tracker categories for a site category
//   POST /v1/score                  rank a client-computed aggregate score and store it
//   POST /v1/scan                   full server-side pipeline for one page
//   POST /v1/admin/reload           re-read patterns, categories and blacklist
//
// Store writes are serialized behind one lock; reads share it.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "tptscore/data_files.hpp"
#include "tptscore/pipeline.hpp"
#include "tptscore/report.hpp"

namespace tptscore {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    DataPaths paths;
    std::vector<std::string> cors_origins;

    /// Relative paths resolve against `base_dir`.
    static ServiceConfig parse(std::string_view text, const std::filesystem::path& base_dir) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");

        static const std::set<std::string> known = {"bind", "patterns", "categories", "blacklist",
                                                    "store", "suffixes", "cors_origins"};
        for (const auto& [key, value] : j.items()) {
            if (!known.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown field \"" + key + "\"");
        }
        auto str = [&](const char* key, bool required) -> std::string {
            auto it = j.find(key);
            if (it == j.end()) {
                if (required) throw Error(ErrorCode::InvalidConfig, std::string("missing field \"") + key + "\"");
                return {};
            }
            if (!it->is_string() || it->get<std::string>().empty()) {
                throw Error(ErrorCode::InvalidConfig, std::string("field \"") + key + "\" must be a non-empty string");
            }
            return it->get<std::string>();
        };
        auto path = [&](const char* key, bool required) -> std::filesystem::path {
            auto s = str(key, required);
            if (s.empty()) return {};
            std::filesystem::path p(s);
            return p.is_absolute() ? p : base_dir / p;
        };

        ServiceConfig c;
        auto bind = str("bind", true);
        auto colon = bind.rfind(':');
        if (colon == std::string::npos || colon == 0) {
            throw Error(ErrorCode::InvalidConfig, "field \"bind\" must be HOST:PORT");
        }
        c.host = bind.substr(0, colon);
        try {
            std::size_t used = 0;
            auto port_text = bind.substr(colon + 1);
            c.port = std::stoi(port_text, &used);
            if (used != port_text.size() || c.port < 0 || c.port > 65535) throw std::out_of_range("port");
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "field \"bind\" has an invalid port");
        }
        c.paths.patterns = path("patterns", true);
        c.paths.categories = path("categories", true);
        c.paths.blacklist = path("blacklist", true);
        c.paths.store = path("store", true);
        c.paths.suffixes = path("suffixes", false);
        if (auto it = j.find("cors_origins"); it != j.end()) {
            if (!it->is_array()) throw Error(ErrorCode::InvalidConfig, "field \"cors_origins\" must be an array of strings");
            for (const auto& o : *it) {
                if (!o.is_string()) throw Error(ErrorCode::InvalidConfig, "field \"cors_origins\" must be an array of strings");
                c.cors_origins.push_back(o.get<std::string>());
            }
        }
        return c;
    }

    static ServiceConfig load(const std::filesystem::path& file) {
        std::string text;
        try {
            text = read_file(file);
        } catch (const Error&) {
            throw Error(ErrorCode::InvalidConfig, "cannot read config " + file.string());
        }
        return parse(text, file.parent_path());
    }
};

class Service {
public:
    /// Loads every data file; throws (naming the file) if any is unusable.
    /// Request logs go to `log`, or nowhere when it is null.
    explicit Service(ServiceConfig config, std::ostream* log = &std::cout) : config_(std::move(config)), log_(log) {
        ref_ = std::make_shared<const ReferenceData>(ReferenceData::load(config_.paths));
        if (!std::filesystem::exists(config_.paths.store)) write_file_atomic(config_.paths.store, "");
        store_ = PercentileStore::load(config_.paths.store);
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the configured address; returns the actual port (useful with 0).
    int bind() {
        int port = config_.port == 0 ? server_.bind_to_any_port(config_.host)
                                     : (server_.bind_to_port(config_.host, config_.port) ? config_.port : -1);
        if (port < 0) {
            throw Error(ErrorCode::InvalidConfig,
                        "cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
        return port;
    }

    /// Blocks until stop().
    void run() { server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

    /// Swaps in freshly loaded reference data. On failure the old data stays.
    std::shared_ptr<const ReferenceData> reload() {
        auto fresh = std::make_shared<const ReferenceData>(ReferenceData::load(config_.paths));
        std::lock_guard lock(ref_mutex_);
        ref_ = fresh;
        return fresh;
    }

    std::shared_ptr<const ReferenceData> reference() const {
        std::lock_guard lock(ref_mutex_);
        return ref_;
    }

private:
    using Json = nlohmann::ordered_json;

    static Json with_version(const ReferenceData& ref) {
        Json j;
        j["version"] = ref.version;
        return j;
    }

    static void send(httplib::Response& res, int status, const Json& body) {
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    }

    void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) const {
        auto j = with_version(*reference());
        j["error"] = code;
        j["message"] = message;
        send(res, status, j);
    }

    /// Parses a JSON object body and rejects keys outside `allowed`.
    static nlohmann::json parse_body(const httplib::Request& req, const std::set<std::string>& allowed) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error&) {
            throw Error(ErrorCode::MalformedJson, "request body is not valid JSON");
        }
        if (!j.is_object()) throw Error(ErrorCode::MalformedJson, "request body must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (!allowed.count(key)) throw Error(ErrorCode::MalformedJson, "unknown field \"" + key + "\"");
        }
        return j;
    }

    template <typename F>
    httplib::Server::Handler guarded(F handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                send_error(res, e.code() == ErrorCode::StoreIo ? 500 : 400, std::string(to_string(e.code())), e.message());
            } catch (const std::exception& e) {
                send_error(res, 500, "Internal", e.what());
            }
        };
    }

    void routes() {
        server_.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
            request_start() = std::chrono::steady_clock::now();
            return httplib::Server::HandlerResponse::Unhandled;
        });
        server_.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            auto origin = req.get_header_value("Origin");
            if (origin.empty()) return;
            for (const auto& allowed : config_.cors_origins) {
                if (allowed == origin) {
                    res.set_header("Access-Control-Allow-Origin", origin);
                    res.set_header("Access-Control-Expose-Headers", "ETag");
                    res.set_header("Vary", "Origin");
                    return;
                }
            }
        });
        server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) { log_request(req, res); });

        server_.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
        });

        server_.Get("/v1/site", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto ref = reference();
            auto domain = req.get_param_value("domain");
            if (domain.empty()) throw Error(ErrorCode::MalformedUrl, "missing \"domain\" parameter");
            auto site = ref->categories.lookup(domain, ref->suffixes);
            auto j = with_version(*ref);
            j["domain"] = site.domain;
            j["category"] = std::string(to_string(site.category));
            j["uncategorized"] = site.uncategorized;
            send(res, 200, j);
        }));

        server_.Get("/v1/patterns", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto ref = reference();
            auto etag = "\"" + ref->version + "\"";
            res.set_header("ETag", etag);
            auto inm = req.get_header_value("If-None-Match");
            if (!inm.empty() && (inm == "*" || inm.find(etag) != std::string::npos)) {
                res.status = 304;
                return;
            }
            auto j = with_version(*ref);
            auto arr = Json::array();
            for (const auto& p : ref->matcher.patterns()) arr.push_back(pattern_to_json(p));
            j["patterns"] = std::move(arr);
            send(res, 200, j);
        }));

        server_.Get("/v1/blacklist", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto ref = reference();
            auto site = parse_site_category(req.get_param_value("category"));
            auto j = with_version(*ref);
            j["category"] = std::string(to_string(site));
            auto arr = Json::array();
            for (auto t : ref->blacklist.row(site)) arr.push_back(std::string(to_string(t)));
            j["blacklisted"] = std::move(arr);
            send(res, 200, j);
        }));

        server_.Post("/v1/score", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto ref = reference();
            auto body = parse_body(req, {"domain", "category", "agg_score_halves"});
            if (!body.contains("domain") || !body["domain"].is_string()) {
                throw Error(ErrorCode::MalformedJson, "\"domain\" must be a string");
            }
            if (!body.contains("category") || !body["category"].is_string()) {
                throw Error(ErrorCode::MalformedJson, "\"category\" must be a string");
            }
            auto halves = body.find("agg_score_halves");
            if (halves == body.end() || !halves->is_number_integer() || halves->get<std::int64_t>() < 0) {
                throw Error(ErrorCode::MalformedJson, "\"agg_score_halves\" must be a non-negative integer");
            }
            auto domain = normalize_domain(body["domain"].get<std::string>(), ref->suffixes);
            auto category = parse_site_category(body["category"].get<std::string>());
            auto agg = ScoreHalf::from_halves(halves->get<std::int64_t>());

            FinalizeOutcome outcome;
            {
                std::unique_lock lock(store_mutex_);
                outcome = store_.finalize_score(domain, category, agg);
            }
            if (outcome.persist_error) throw Error(ErrorCode::StoreIo, *outcome.persist_error);
            auto j = with_version(*ref);
            j["domain"] = domain;
            j["category"] = std::string(to_string(category));
            auto result = result_json(outcome.result);
            for (auto& [k, v] : result.items()) j[k] = v;
            send(res, 200, j);
        }));

        server_.Post("/v1/scan", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto ref = reference();
            auto body = parse_body(req, {"page_url", "request_urls", "dry_run"});
            if (!body.contains("page_url") || !body["page_url"].is_string()) {
                throw Error(ErrorCode::MalformedJson, "\"page_url\" must be a string");
            }
            std::vector<std::string> requests;
            if (body.contains("request_urls")) {
                if (!body["request_urls"].is_array()) throw Error(ErrorCode::MalformedJson, "\"request_urls\" must be an array");
                for (const auto& u : body["request_urls"]) {
                    if (!u.is_string()) throw Error(ErrorCode::MalformedJson, "\"request_urls\" must contain strings");
                    requests.push_back(u.get<std::string>());
                }
            }
            bool dry_run = false;
            if (body.contains("dry_run")) {
                if (!body["dry_run"].is_boolean()) throw Error(ErrorCode::MalformedJson, "\"dry_run\" must be a boolean");
                dry_run = body["dry_run"].get<bool>();
            }

            auto report = prepare_scan(*ref, body["page_url"].get<std::string>(), requests);
            if (dry_run) {
                std::shared_lock lock(store_mutex_);
                report.result = store_.evaluate(report.site.domain, report.site.category, report.breakdown.agg_score);
            } else {
                std::unique_lock lock(store_mutex_);
                auto outcome = store_.finalize_score(report.site.domain, report.site.category, report.breakdown.agg_score);
                report.result = outcome.result;
                report.persist_error = outcome.persist_error;
            }
            if (report.persist_error) throw Error(ErrorCode::StoreIo, *report.persist_error);
            res.status = 200;
            res.set_content(scan_report_body(report), "application/json");
        }));

        server_.Post("/v1/admin/reload", guarded([this](const httplib::Request&, httplib::Response& res) {
            std::shared_ptr<const ReferenceData> fresh;
            try {
                fresh = reload();
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidConfig, e.message());
            }
            auto j = with_version(*fresh);
            j["pattern_count"] = fresh->matcher.pattern_count();
            send(res, 200, j);
        }));
    }

    static std::chrono::steady_clock::time_point& request_start() {
        thread_local std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
        return start;
    }

    void log_request(const httplib::Request& req, const httplib::Response& res) {
        if (!log_) return;
        auto elapsed = std::chrono::steady_clock::now() - request_start();
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count();
        nlohmann::ordered_json j;
        j["method"] = req.method;
        j["path"] = req.path;
        j["status"] = res.status;
        j["duration_ms"] = static_cast<double>(us) / 1000.0;
        std::lock_guard lock(log_mutex_);
        *log_ << j.dump() << std::endl;
    }

    ServiceConfig config_;
    std::ostream* log_;
    std::mutex log_mutex_;

    mutable std::mutex ref_mutex_;
    std::shared_ptr<const ReferenceData> ref_;

    std::shared_mutex store_mutex_;
    PercentileStore store_;

    httplib::Server server_;
};

} // namespace tptscore
