#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/sftgen.hpp"

namespace websft {

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8000";
    std::string model_name = "rewriter";
    unsigned max_concurrency = 4;
    unsigned requests_per_minute = 600;
    double timeout_s = 60.0;
    unsigned max_retries = 3;
    double temperature = 0.0;
    // Name of the environment variable holding the bearer token; the token
    // itself never enters config files or fingerprints.
    std::string api_key_env = "WEBSFT_API_KEY";
    // First retry delay; doubles on each further attempt.
    unsigned backoff_ms = 500;

    void validate() const;
    static EndpointConfig from_json_text(std::string_view json_text);
    std::string to_json_text() const;
};

// Identifies a rewrite run: endpoint settings that change outputs, the
// prompt template version and the input corpus.
std::string run_fingerprint(const EndpointConfig& ep, const Corpus& crawl, PromptMode mode = PromptMode::sft);

// GET {base_url}/v1/models. Any HTTP response counts as reachable.
bool probe_endpoint(const EndpointConfig& ep);

struct RewriteOptions {
    PromptMode mode = PromptMode::sft;
    // Requesting a stop lets in-flight requests finish and persist; no new
    // requests are started.
    std::stop_token stop;
    // Called after each response is durably appended to the checkpoint. An
    // exception thrown here aborts the run (in-flight requests still
    // persist) and is rethrown from rewrite_corpus.
    std::function<void(const std::string& crawl_id)> on_persisted;
};

struct RewriteRun {
    std::vector<RewriteOutput> outputs;  // ordered by crawl id
    std::vector<std::string> failed;     // exhausted retries or rejected, ordered
    std::size_t requested = 0;           // records sent this invocation
    std::size_t resumed = 0;             // records already in the checkpoint
    std::size_t http_attempts = 0;
    bool cancelled = false;
};

// Sends every record not yet in the checkpoint as one chat request and
// persists the raw reply before acknowledging it. Throws ValidationError
// (field "checkpoint") when an existing checkpoint belongs to another run,
// and IoError when the endpoint is unreachable.
RewriteRun rewrite_corpus(const Corpus& crawl, const EndpointConfig& ep, const std::filesystem::path& checkpoint,
                          const RewriteOptions& options = {});

// Sidecar holding the run fingerprint next to a checkpoint.
std::filesystem::path checkpoint_meta_path(const std::filesystem::path& checkpoint);

struct AssembleResult {
    Corpus corpus;  // source = cleaned
    std::map<RewriteStatus, std::size_t> counts;
};

// One record per ok output, id "cleaned:<crawl id>".
AssembleResult assemble_cleaned(const std::vector<RewriteOutput>& outputs);

void write_outputs(const std::filesystem::path& path, const std::vector<RewriteOutput>& outputs);
std::vector<RewriteOutput> read_outputs(const std::filesystem::path& path);

}  // namespace websft
