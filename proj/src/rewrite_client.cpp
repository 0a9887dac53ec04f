#include "websft/rewrite_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/text.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void EndpointConfig::validate() const {
    if (base_url.empty()) throw ValidationError("endpoint.base_url", "base_url is empty");
    if (!base_url.starts_with("http://") && !base_url.starts_with("https://")) {
        throw ValidationError("endpoint.base_url", "base_url must start with http:// or https://");
    }
    if (model_name.empty()) throw ValidationError("endpoint.model_name", "model_name is empty");
    if (max_concurrency < 1) throw ValidationError("endpoint.max_concurrency", "max_concurrency must be >= 1");
    if (requests_per_minute < 1) {
        throw ValidationError("endpoint.requests_per_minute", "requests_per_minute must be >= 1");
    }
    if (!(timeout_s > 0)) throw ValidationError("endpoint.timeout", "timeout must be > 0");
    if (!(temperature >= 0)) throw ValidationError("endpoint.temperature", "temperature must be >= 0");
}

EndpointConfig EndpointConfig::from_json_text(std::string_view json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (!j.is_object()) throw ValidationError("endpoint", "endpoint config must be a JSON object");
    EndpointConfig ep;
    for (const auto& [key, v] : j.items()) {
        const std::string field = "endpoint." + key;
        auto need = [&](bool ok, const char* what) {
            if (!ok) throw ValidationError(field, field + " must be " + what);
        };
        if (key == "base_url") {
            need(v.is_string(), "a string");
            ep.base_url = v.get<std::string>();
        } else if (key == "model_name") {
            need(v.is_string(), "a string");
            ep.model_name = v.get<std::string>();
        } else if (key == "api_key_env") {
            need(v.is_string(), "a string");
            ep.api_key_env = v.get<std::string>();
        } else if (key == "max_concurrency") {
            need(v.is_number_unsigned(), "a positive integer");
            ep.max_concurrency = v.get<unsigned>();
        } else if (key == "requests_per_minute") {
            need(v.is_number_unsigned(), "a positive integer");
            ep.requests_per_minute = v.get<unsigned>();
        } else if (key == "max_retries") {
            need(v.is_number_unsigned(), "a non-negative integer");
            ep.max_retries = v.get<unsigned>();
        } else if (key == "backoff_ms") {
            need(v.is_number_unsigned(), "a non-negative integer");
            ep.backoff_ms = v.get<unsigned>();
        } else if (key == "timeout") {
            need(v.is_number(), "a number of seconds");
            ep.timeout_s = v.get<double>();
        } else if (key == "temperature") {
            need(v.is_number(), "a number");
            ep.temperature = v.get<double>();
        } else {
            throw ValidationError(field, "unknown endpoint setting '" + key + "'");
        }
    }
    ep.validate();
    return ep;
}

std::string EndpointConfig::to_json_text() const {
    ordered_json j;
    j["base_url"] = base_url;
    j["model_name"] = model_name;
    j["max_concurrency"] = max_concurrency;
    j["requests_per_minute"] = requests_per_minute;
    j["timeout"] = timeout_s;
    j["max_retries"] = max_retries;
    j["temperature"] = temperature;
    j["api_key_env"] = api_key_env;
    j["backoff_ms"] = backoff_ms;
    return j.dump(2);
}

namespace {

std::string fingerprint_text(const EndpointConfig& ep, PromptMode mode, const Corpus& crawl) {
    ordered_json j;
    j["base_url"] = ep.base_url;
    j["model_name"] = ep.model_name;
    j["temperature"] = ep.temperature;
    j["prompt_template"] = kPromptTemplateVersion;
    j["prompt_mode"] = to_string(mode);
    j["corpus"] = corpus_digest(crawl);
    return j.dump();
}

std::string fingerprint(const EndpointConfig& ep, PromptMode mode, const Corpus& crawl) {
    return text::hex64(text::fnv1a64(fingerprint_text(ep, mode, crawl)));
}

// "http://host:port/prefix" -> ("http://host:port", "/prefix")
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

std::unique_ptr<httplib::Client> make_client(const EndpointConfig& ep) {
    auto client = std::make_unique<httplib::Client>(split_url(ep.base_url).first);
    const auto timeout = std::chrono::duration<double>(ep.timeout_s);
    const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    client->set_connection_timeout(us);
    client->set_read_timeout(us);
    client->set_write_timeout(us);
    if (const char* token = std::getenv(ep.api_key_env.c_str()); token != nullptr && *token != '\0') {
        client->set_bearer_token_auth(token);
    }
    return client;
}

// Refills at requests_per_minute; bursts up to `capacity`.
class TokenBucket {
public:
    TokenBucket(unsigned per_minute, unsigned capacity)
        : interval_(std::chrono::duration<double>(60.0 / per_minute)), capacity_(capacity), tokens_(capacity),
          last_(Clock::now()) {}

    void acquire() {
        for (;;) {
            std::chrono::duration<double> wait{};
            {
                std::lock_guard lock(mu_);
                const auto now = Clock::now();
                tokens_ = std::min<double>(capacity_, tokens_ + (now - last_) / interval_);
                last_ = now;
                if (tokens_ >= 1.0) {
                    tokens_ -= 1.0;
                    return;
                }
                wait = (1.0 - tokens_) * interval_;
            }
            std::this_thread::sleep_for(wait);
        }
    }

private:
    using Clock = std::chrono::steady_clock;
    std::mutex mu_;
    std::chrono::duration<double> interval_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
};

enum class Attempt { ok, retry, fail };

struct Reply {
    Attempt kind = Attempt::fail;
    std::string content;
    std::string error;
};

Reply post_once(httplib::Client& client, const std::string& path, const EndpointConfig& ep,
                const std::string& prompt) {
    ordered_json body;
    body["model"] = ep.model_name;
    body["messages"] = ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = ep.temperature;
    auto res = client.Post(path, body.dump(-1, ' ', false, ordered_json::error_handler_t::replace),
                           "application/json");
    if (!res) return {Attempt::retry, {}, "transport error: " + httplib::to_string(res.error())};
    if (res->status == 429 || res->status >= 500) {
        return {Attempt::retry, {}, "HTTP " + std::to_string(res->status)};
    }
    if (res->status != 200) return {Attempt::fail, {}, "HTTP " + std::to_string(res->status)};
    const json j = json::parse(res->body, nullptr, false);
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return {Attempt::ok, content.get<std::string>(), {}};
    } catch (const json::exception&) {
    }
    return {Attempt::fail, {}, "response lacks choices[0].message.content"};
}

struct CheckpointEntry {
    std::string crawl_id;
    std::string raw;
};

std::string entry_line(const std::string& id, const std::string& raw) {
    ordered_json j;
    j["crawl_id"] = id;
    j["raw"] = raw;
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

// Reads completed entries. A torn final line (crash mid-write) is ignored;
// a bad line anywhere else is corruption.
std::map<std::string, std::string> load_checkpoint(const fs::path& path) {
    std::map<std::string, std::string> done;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint: " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const json j = json::parse(lines[i], nullptr, false);
        const bool ok = j.is_object() && j.contains("crawl_id") && j["crawl_id"].is_string() && j.contains("raw") &&
                        j["raw"].is_string();
        if (!ok) {
            if (i + 1 == lines.size()) {
                std::cerr << path.string() << ":" << i + 1 << ": ignoring incomplete checkpoint line\n";
                continue;
            }
            throw ValidationError("checkpoint", path.string() + ":" + std::to_string(i + 1) + ": corrupt entry");
        }
        done.insert_or_assign(j["crawl_id"].get<std::string>(), j["raw"].get<std::string>());
    }
    return done;
}

void write_text_atomically(const fs::path& path, const std::string& body) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << body;
        out.flush();
        if (!out) throw IoError("error while writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

std::string run_fingerprint(const EndpointConfig& ep, const Corpus& crawl, PromptMode mode) {
    return fingerprint(ep, mode, crawl);
}

fs::path checkpoint_meta_path(const fs::path& checkpoint) { return checkpoint.string() + ".meta.json"; }

bool probe_endpoint(const EndpointConfig& ep) {
    auto client = make_client(ep);
    auto res = client->Get(split_url(ep.base_url).second + "/v1/models");
    return static_cast<bool>(res);
}

RewriteRun rewrite_corpus(const Corpus& crawl, const EndpointConfig& ep, const fs::path& checkpoint,
                          const RewriteOptions& options) {
    ep.validate();
    const std::string fp = fingerprint(ep, options.mode, crawl);
    const fs::path meta = checkpoint_meta_path(checkpoint);

    std::map<std::string, std::string> done;
    if (fs::exists(checkpoint)) {
        std::ifstream in(meta, std::ios::binary);
        const json m = in ? json::parse(in, nullptr, false) : json();
        if (!m.is_object() || m.value("fingerprint", "") != fp) {
            throw ValidationError("checkpoint", "checkpoint " + checkpoint.string() +
                                                    " was written by a different run (endpoint, prompt template or "
                                                    "input corpus changed); remove it or choose another path");
        }
        done = load_checkpoint(checkpoint);
    } else {
        if (checkpoint.has_parent_path()) fs::create_directories(checkpoint.parent_path());
        ordered_json m;
        m["fingerprint"] = fp;
        m["inputs"] = json::parse(fingerprint_text(ep, options.mode, crawl));
        write_text_atomically(meta, m.dump(2) + "\n");
        std::ofstream(checkpoint, std::ios::binary | std::ios::trunc);
    }

    RewriteRun run;
    std::vector<const Record*> pending;
    for (const auto& r : crawl.records) {
        if (done.contains(r.id)) {
            ++run.resumed;
        } else {
            pending.push_back(&r);
        }
    }

    if (!pending.empty()) {
        if (!probe_endpoint(ep)) throw IoError("rewrite endpoint unreachable: " + ep.base_url);

        std::ofstream log(checkpoint, std::ios::binary | std::ios::app);
        if (!log) throw IoError("cannot append to checkpoint: " + checkpoint.string());
        std::mutex writer;
        std::mutex failed_mu;
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> attempts{0};
        std::atomic<std::size_t> requested{0};
        std::stop_source abort;
        std::exception_ptr error;
        TokenBucket bucket(ep.requests_per_minute, ep.max_concurrency);
        const std::string path = split_url(ep.base_url).second + "/v1/chat/completions";

        auto stopped = [&] { return options.stop.stop_requested() || abort.stop_requested(); };

        auto worker = [&] {
            auto client = make_client(ep);
            while (!stopped()) {
                const std::size_t i = next.fetch_add(1);
                if (i >= pending.size()) break;
                const Record& rec = *pending[i];
                const std::string prompt = render_prompt(rec, options.mode);
                ++requested;
                Reply reply;
                for (unsigned attempt = 0;; ++attempt) {
                    bucket.acquire();
                    ++attempts;
                    reply = post_once(*client, path, ep, prompt);
                    if (reply.kind != Attempt::retry || attempt >= ep.max_retries) break;
                    const double delay = static_cast<double>(ep.backoff_ms) * std::pow(2.0, attempt);
                    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(std::min(delay, 60000.0)));
                }
                if (reply.kind != Attempt::ok) {
                    std::lock_guard lock(failed_mu);
                    std::cerr << "rewrite: " << rec.id << " failed: " << reply.error << "\n";
                    run.failed.push_back(rec.id);
                    continue;
                }
                {
                    std::lock_guard lock(writer);
                    log << entry_line(rec.id, reply.content) << '\n';
                    log.flush();
                    if (!log) {
                        if (!error) error = std::make_exception_ptr(IoError("error writing checkpoint"));
                        abort.request_stop();
                        return;
                    }
                    done.emplace(rec.id, std::move(reply.content));
                    if (options.on_persisted) {
                        try {
                            options.on_persisted(rec.id);
                        } catch (...) {
                            if (!error) error = std::current_exception();
                            abort.request_stop();
                        }
                    }
                }
            }
        };
        {
            std::vector<std::jthread> threads;
            const auto n = std::min<std::size_t>(ep.max_concurrency, pending.size());
            for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
        }
        run.requested = requested.load();
        run.http_attempts = attempts.load();
        if (error) std::rethrow_exception(error);
        run.cancelled = options.stop.stop_requested() && done.size() + run.failed.size() < crawl.size();
    }

    // A finished run leaves the checkpoint sorted, so interrupted and
    // uninterrupted runs end with identical files.
    if (!run.cancelled) {
        std::string body;
        for (const auto& [id, raw] : done) body += entry_line(id, raw) + "\n";
        write_text_atomically(checkpoint, body);
    }

    std::set<std::string> in_corpus;
    for (const auto& r : crawl.records) in_corpus.insert(r.id);
    for (const auto& [id, raw] : done) {
        if (in_corpus.contains(id)) run.outputs.push_back(extract_output(raw, id));
    }
    std::sort(run.failed.begin(), run.failed.end());
    return run;
}

AssembleResult assemble_cleaned(const std::vector<RewriteOutput>& outputs) {
    AssembleResult out;
    out.corpus.source = Source::cleaned;
    out.corpus.provenance = "rewrite";
    for (auto s : {RewriteStatus::ok, RewriteStatus::syntax_error, RewriteStatus::not_chinese_math,
                   RewriteStatus::malformed}) {
        out.counts[s] = 0;
    }
    for (const auto& o : outputs) {
        ++out.counts[o.status];
        if (o.status != RewriteStatus::ok || !o.parsed) continue;
        out.corpus.records.push_back({"cleaned:" + o.crawl_id, o.parsed->first, o.parsed->second, Source::cleaned, {}});
    }
    return out;
}

void write_outputs(const fs::path& path, const std::vector<RewriteOutput>& outputs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write rewrite outputs: " + path.string());
    for (const auto& o : outputs) {
        ordered_json j;
        j["crawl_id"] = o.crawl_id;
        j["status"] = to_string(o.status);
        j["question"] = o.parsed ? ordered_json(o.parsed->first) : ordered_json(nullptr);
        j["answer"] = o.parsed ? ordered_json(o.parsed->second) : ordered_json(nullptr);
        j["raw"] = o.raw;
        out << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
    }
    if (!out) throw IoError("error while writing " + path.string());
}

std::vector<RewriteOutput> read_outputs(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read rewrite outputs: " + path.string());
    std::vector<RewriteOutput> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (!j.is_object() || !j.contains("crawl_id") || !j["crawl_id"].is_string() || !j.contains("raw") ||
            !j["raw"].is_string()) {
            throw ValidationError("rewrite_outputs", path.string() + ":" + std::to_string(line_no) +
                                                         ": expected {crawl_id, status, question, answer, raw}");
        }
        // Status is re-derived from the raw text so the file cannot disagree
        // with the parser.
        out.push_back(extract_output(j["raw"].get<std::string>(), j["crawl_id"].get<std::string>()));
    }
    return out;
}

}  // namespace websft
