#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/matcher.hpp"

namespace websft {

// Replies a stand-in rewriter gives.
// oracle: the rendered target of the seed paired with the prompt's crawl
//   record; unpaired records get their own text rendered as a target, or
//   the not-Chinese-math sentinel when they contain no Han characters.
// garbage: text without any section markers.
// syntax_error: the syntax-error sentinel for every request.
enum class StubMode { oracle, garbage, syntax_error };
std::optional<StubMode> parse_stub_mode(std::string_view s) noexcept;

struct StubConfig {
    StubMode mode = StubMode::oracle;
    // Fault injection: the first `fail_first` requests for each affected
    // crawl id answer with `fail_status` instead of a completion.
    unsigned fail_first = 0;
    int fail_status = 429;
    std::set<std::string> fail_ids;  // empty = every id
    // Artificial latency per completion request.
    unsigned delay_ms = 0;
};

// OpenAI-style chat-completion stub on 127.0.0.1 that counts requests per
// crawl id. Prompts are recognized by rendering every crawl record.
class StubServer {
public:
    // `pairs` decide oracle replies; pass an empty vector for other modes.
    StubServer(const Corpus& seed, const Corpus& crawl, const std::vector<MatchPair>& pairs, StubConfig config = {});
    ~StubServer();
    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    // Oracle stub whose pairs come from match_pairs(seed, crawl, match).
    static std::unique_ptr<StubServer> oracle(const Corpus& seed, const Corpus& crawl, const MatchConfig& match = {},
                                              StubConfig config = {});

    // Binds and serves on a background thread; returns the port.
    int start(int port = 0);
    void stop();
    std::string base_url() const;

    // Completion requests per crawl id ("" for unrecognized prompts),
    // including rejected fault-injection attempts.
    std::map<std::string, std::size_t> request_counts() const;
    std::size_t total_requests() const;
    void reset_counts();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace websft
