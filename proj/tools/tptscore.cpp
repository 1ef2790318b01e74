// tptscore: offline tracker scanning, score store administration, and the
// HTTP scoring service.
//
// Exit codes: 0 ok, 1 usage, 2 unreadable or invalid input, 3 corrupt or
// unwritable database files.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "tptscore/service.hpp"
#include "tptscore/tptscore.hpp"

namespace fs = std::filesystem;
using namespace tptscore;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitData = 3;

std::string default_db_dir() {
    if (const char* env = std::getenv("TPTSCORE_DB"); env && *env) return env;
    return "tptscore-db";
}

int fail(int code, const std::string& message) {
    std::cerr << "tptscore: " << message << "\n";
    return code;
}

struct ScanOptions {
    std::string har;
    std::string urls;
    std::string page_url;
    std::string db = default_db_dir();
    std::string format = "text";
    bool no_store = false;
};

int run_scan_command(const ScanOptions& opt) {
    if (opt.har.empty() == opt.urls.empty()) return fail(kExitUsage, "scan needs exactly one of --har or --urls");
    if (!opt.urls.empty() && opt.page_url.empty()) return fail(kExitUsage, "--urls requires --page-url");

    TraceInput trace;
    try {
        if (!opt.har.empty()) {
            trace = parse_har(read_file(opt.har));
        } else {
            trace = parse_url_list(read_file(opt.urls), opt.page_url);
        }
    } catch (const Error& e) {
        return fail(kExitInput, e.what());
    }

    ReferenceData ref;
    PercentileStore store;
    try {
        bootstrap_directory(opt.db);
        auto paths = DataPaths::in_directory(opt.db);
        ref = ReferenceData::load(paths);
        store = PercentileStore::load(paths.store);
    } catch (const Error& e) {
        return fail(kExitData, e.what());
    }

    ScanReport report;
    try {
        report = run_scan(ref, store, trace.page_url, trace.request_urls, !opt.no_store);
    } catch (const Error& e) {
        return fail(kExitInput, e.what());
    }

    if (opt.format == "json") {
        std::cout << scan_report_body(report);
    } else {
        std::cout << render_text(report, ref);
        if (trace.skipped) std::cout << "Input entries ignored (not http/https): " << trace.skipped << "\n";
    }
    if (report.persist_error) return fail(kExitData, "score not stored: " + *report.persist_error);
    return 0;
}

int run_serve_command(const std::string& config_path) {
    std::optional<Service> service;
    int port = -1;
    try {
        auto config = ServiceConfig::load(config_path);
        auto host = config.host;
        service.emplace(std::move(config));
        port = service->bind();
        std::cout << nlohmann::ordered_json{{"event", "listening"}, {"address", host + ":" + std::to_string(port)}}.dump()
                  << std::endl;
    } catch (const Error& e) {
        return fail(kExitInput, e.what());
    }

    // Signals are handled synchronously on a dedicated thread: SIGHUP reloads
    // the reference data, SIGINT/SIGTERM stop the server.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    sigaddset(&set, SIGHUP);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    std::atomic<bool> stopping{false};
    std::thread signals([&] {
        while (true) {
            int sig = 0;
            if (sigwait(&set, &sig) != 0) continue;
            if (sig == SIGHUP) {
                try {
                    service->reload();
                    std::cout << nlohmann::ordered_json{{"event", "reloaded"}, {"version", service->reference()->version}}.dump()
                              << std::endl;
                } catch (const Error& e) {
                    std::cerr << "tptscore: reload failed: " << e.what() << "\n";
                }
                continue;
            }
            stopping = true;
            service->stop();
            return;
        }
    });
    service->run();
    if (!stopping) pthread_kill(signals.native_handle(), SIGTERM);
    signals.join();
    return 0;
}

int run_import_patterns(const fs::path& db, const std::string& file) {
    std::string text;
    try {
        text = read_file(file);
    } catch (const Error& e) {
        return fail(kExitInput, e.what());
    }
    try {
        auto patterns = parse_patterns(text);
        auto matcher = compile(patterns);
        bootstrap_directory(db);
        write_file_atomic(DataPaths::in_directory(db).patterns, serialize_patterns(patterns));
        std::cout << "imported " << matcher.pattern_count() << " patterns (version " << pattern_set_version(patterns)
                  << ")\n";
    } catch (const Error& e) {
        return fail(kExitData, file + ": " + e.message());
    }
    return 0;
}

int run_set_category(const fs::path& db, const std::string& domain, const std::string& category) {
    try {
        bootstrap_directory(db);
        auto paths = DataPaths::in_directory(db);
        auto suffixes = SuffixList::parse(read_file(paths.suffixes));
        auto site = try_parse_site_category(category);
        if (!site) return fail(kExitInput, "unknown site category \"" + category + "\"");
        std::string normalized;
        try {
            normalized = normalize_domain(domain, suffixes);
        } catch (const Error& e) {
            return fail(kExitInput, e.what());
        }
        auto map = CategoryMap::parse(read_file(paths.categories));
        map.set(normalized, *site);
        write_file_atomic(paths.categories, map.serialize());
        std::cout << normalized << " -> " << to_string(*site) << "\n";
    } catch (const Error& e) {
        return fail(kExitData, e.what());
    }
    return 0;
}

int run_show(const fs::path& db, const std::string& domain) {
    ReferenceData ref;
    PercentileStore store;
    try {
        bootstrap_directory(db);
        auto paths = DataPaths::in_directory(db);
        ref = ReferenceData::load(paths);
        store = PercentileStore::load(paths.store);
    } catch (const Error& e) {
        return fail(kExitData, e.what());
    }
    SiteLookup site;
    try {
        site = ref.categories.lookup(domain, ref.suffixes);
    } catch (const Error& e) {
        return fail(kExitInput, e.what());
    }
    std::cout << "domain:   " << site.domain << "\n"
              << "category: " << to_string(site.category) << (site.uncategorized ? " (uncategorized)" : "") << "\n";
    if (const auto* r = store.find(site.domain)) {
        std::cout << "stored:   agg_score " << r->agg_score.to_string() << " as " << to_string(r->site_category)
                  << ", updated " << format_timestamp(r->updated_at) << "\n";
    } else {
        std::cout << "stored:   no score recorded\n";
    }
    return 0;
}

int run_validate(const fs::path& db) {
    auto paths = DataPaths::in_directory(db);
    try {
        auto ref = ReferenceData::load(paths);
        auto store = PercentileStore::load(paths.store);
        std::cout << "ok: " << ref.matcher.pattern_count() << " patterns, " << ref.categories.entries().size()
                  << " categorized domains, " << ref.blacklist.rows().size() << " blacklist rows, " << store.size()
                  << " stored scores\n";
    } catch (const Error& e) {
        return fail(kExitData, e.what());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Third-party tracker detection and privacy scoring"};
    app.require_subcommand(1);

    ScanOptions scan_opt;
    auto* scan_cmd = app.add_subcommand("scan", "Scan a recorded page load and report its privacy score");
    auto* har_opt = scan_cmd->add_option("--har", scan_opt.har, "HAR 1.2 capture of the page load");
    auto* urls_opt = scan_cmd->add_option("--urls", scan_opt.urls, "File with one request URL per line");
    har_opt->excludes(urls_opt);
    scan_cmd->add_option("--page-url", scan_opt.page_url, "Page URL for --urls input");
    scan_cmd->add_option("--db", scan_opt.db, "Database directory (created from bundled seeds if missing)");
    scan_cmd->add_option("--format", scan_opt.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    scan_cmd->add_flag("--no-store", scan_opt.no_store, "Do not record the score");

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP scoring service");
    serve_cmd->add_option("--config", config_path, "Service config (JSON)")->required();

    std::string db_dir = default_db_dir();
    auto* db_cmd = app.add_subcommand("db", "Inspect or edit a database directory");
    db_cmd->add_option("--db", db_dir, "Database directory");
    db_cmd->require_subcommand(1);

    std::string import_file;
    auto* import_cmd = db_cmd->add_subcommand("import-patterns", "Validate and replace the pattern file");
    import_cmd->add_option("FILE", import_file)->required();

    std::string set_domain, set_category;
    auto* set_cmd = db_cmd->add_subcommand("set-category", "Assign a site category to a domain");
    set_cmd->add_option("DOMAIN", set_domain)->required();
    set_cmd->add_option("CATEGORY", set_category)->required();

    std::string show_domain;
    auto* show_cmd = db_cmd->add_subcommand("show", "Show category and stored score for a domain");
    show_cmd->add_option("DOMAIN", show_domain)->required();

    auto* validate_cmd = db_cmd->add_subcommand("validate", "Check every database file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*scan_cmd) return run_scan_command(scan_opt);
    if (*serve_cmd) return run_serve_command(config_path);
    if (*import_cmd) return run_import_patterns(db_dir, import_file);
    if (*set_cmd) return run_set_category(db_dir, set_domain, set_category);
    if (*show_cmd) return run_show(db_dir, show_domain);
    if (*validate_cmd) return run_validate(db_dir);
    return kExitUsage;
}
