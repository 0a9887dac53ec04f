// Stand-in rewriter endpoint for local runs and tests.
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "websft/corpus.hpp"
#include "websft/errors.hpp"
#include "websft/matcher.hpp"
#include "websft/stub_server.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chat-completion stub for the rewrite stage", "websft-stub"};
    std::string seed_path, crawl_path, pairs_path, mode = "oracle";
    int port = 8000;
    websft::StubConfig cfg;
    app.add_option("--seed-corpus", seed_path, "Seed corpus (JSONL)")->required();
    app.add_option("--crawl-corpus", crawl_path, "Crawled corpus (JSONL)")->required();
    app.add_option("--pairs", pairs_path, "Pair file; matched on the fly when omitted");
    app.add_option("--mode", mode, "oracle, garbage or syntax_error");
    app.add_option("--port", port, "Listen port on 127.0.0.1 (0 = any)");
    app.add_option("--fail-first", cfg.fail_first, "Fail the first N requests per record");
    app.add_option("--fail-status", cfg.fail_status, "Status code for injected failures");
    app.add_option("--delay-ms", cfg.delay_ms, "Latency per completion");
    CLI11_PARSE(app, argc, argv);

    try {
        auto m = websft::parse_stub_mode(mode);
        if (!m) throw websft::ValidationError("mode", "mode must be oracle, garbage or syntax_error");
        cfg.mode = *m;
        const auto seed = websft::ingest(seed_path, websft::Source::seed).corpus;
        const auto crawl = websft::ingest(crawl_path, websft::Source::crawl).corpus;
        std::unique_ptr<websft::StubServer> server;
        if (pairs_path.empty()) {
            server = websft::StubServer::oracle(seed, crawl, {}, cfg);
        } else {
            server = std::make_unique<websft::StubServer>(seed, crawl, websft::read_pairs(pairs_path), cfg);
        }
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        server->start(port);
        std::cout << "listening on " << server->base_url() << std::endl;
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server->stop();
        std::cout << "served " << server->total_requests() << " requests" << std::endl;
    } catch (const websft::ValidationError& e) {
        std::cerr << "error: " << (e.field().empty() ? "" : e.field() + ": ") << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
