#include "websft/stub_server.hpp"

#include <chrono>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/sftgen.hpp"
#include "websft/text.hpp"

namespace websft {

namespace {
bool has_han(std::string_view s) {
    for (char32_t cp : text::decode_utf8(s)) {
        if (text::is_han(cp)) return true;
    }
    return false;
}
}  // namespace

using json = nlohmann::json;

std::optional<StubMode> parse_stub_mode(std::string_view s) noexcept {
    if (s == "oracle") return StubMode::oracle;
    if (s == "garbage") return StubMode::garbage;
    if (s == "syntax-error" || s == "syntax_error") return StubMode::syntax_error;
    return std::nullopt;
}

struct StubServer::Impl {
    StubConfig config;
    // prompt -> (crawl id, reply)
    std::unordered_map<std::string, std::pair<std::string, std::string>> replies;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    mutable std::mutex mu;
    std::map<std::string, std::size_t> counts;
};

StubServer::StubServer(const Corpus& seed, const Corpus& crawl, const std::vector<MatchPair>& pairs, StubConfig config)
    : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    std::unordered_map<std::string_view, const Record*> paired;
    for (const auto& p : pairs) {
        const Record* s = seed.find(p.seed_id);
        if (s == nullptr) throw ValidationError(p.seed_id, "stub pair references unknown seed id '" + p.seed_id + "'");
        paired.emplace(p.crawl_id, s);
    }
    for (const auto& c : crawl.records) {
        std::string reply;
        switch (impl_->config.mode) {
            case StubMode::oracle: {
                auto it = paired.find(c.id);
                if (it != paired.end()) {
                    reply = render_target(*it->second);
                } else if (has_han(c.question + c.answer)) {
                    reply = render_target(c);
                } else {
                    reply = std::string(kNotChineseMathSentinel);
                }
                break;
            }
            case StubMode::garbage: reply = "garbage with no markers"; break;
            case StubMode::syntax_error: reply = std::string(kSyntaxErrorSentinel); break;
        }
        for (auto mode : {PromptMode::sft, PromptMode::one_shot}) {
            impl_->replies.insert_or_assign(render_prompt(c, mode), std::make_pair(c.id, reply));
        }
    }

    auto& svr = impl_->server;
    svr.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"object":"list","data":[{"id":"stub","object":"model"}]})", "application/json");
    });
    svr.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        std::string prompt;
        try {
            prompt = body.at("messages").at(0).at("content").get<std::string>();
        } catch (const json::exception&) {
            res.status = 400;
            res.set_content(R"({"error":"bad request"})", "application/json");
            return;
        }
        const auto it = impl_->replies.find(prompt);
        const std::string id = it == impl_->replies.end() ? std::string() : it->second.first;
        std::size_t seen;
        {
            std::lock_guard lock(impl_->mu);
            seen = ++impl_->counts[id];
        }
        const auto& cfg = impl_->config;
        if (seen <= cfg.fail_first && (cfg.fail_ids.empty() || cfg.fail_ids.contains(id))) {
            res.status = cfg.fail_status;
            res.set_content(R"({"error":"injected fault"})", "application/json");
            return;
        }
        if (cfg.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(cfg.delay_ms));
        const std::string content = it == impl_->replies.end() ? "garbage with no markers" : it->second.second;
        json out;
        out["id"] = "stub-" + std::to_string(seen);
        out["object"] = "chat.completion";
        out["model"] = body.value("model", "stub");
        out["choices"] = json::array(
            {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", "stop"}}});
        res.set_content(out.dump(), "application/json");
    });
}

StubServer::~StubServer() { stop(); }

std::unique_ptr<StubServer> StubServer::oracle(const Corpus& seed, const Corpus& crawl, const MatchConfig& match,
                                               StubConfig config) {
    config.mode = StubMode::oracle;
    return std::make_unique<StubServer>(seed, crawl, match_pairs(seed, crawl, match).pairs, config);
}

int StubServer::start(int port) {
    if (impl_->thread.joinable()) return impl_->port;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        impl_->port = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
    }
    if (impl_->port <= 0) throw IoError("stub server cannot bind to 127.0.0.1:" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void StubServer::stop() {
    if (!impl_ || !impl_->thread.joinable()) return;
    impl_->server.stop();
    impl_->thread.join();
}

std::string StubServer::base_url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

std::map<std::string, std::size_t> StubServer::request_counts() const {
    std::lock_guard lock(impl_->mu);
    return impl_->counts;
}

std::size_t StubServer::total_requests() const {
    std::lock_guard lock(impl_->mu);
    std::size_t n = 0;
    for (const auto& [id, c] : impl_->counts) n += c;
    return n;
}

void StubServer::reset_counts() {
    std::lock_guard lock(impl_->mu);
    impl_->counts.clear();
}

}  // namespace websft
