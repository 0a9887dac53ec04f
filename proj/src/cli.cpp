#include "websft/cli.hpp"

#include <unistd.h>

#include <atomic>
#include <csignal>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stop_token>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "websft/corpus.hpp"
#include "websft/degrader.hpp"
#include "websft/errors.hpp"
#include "websft/evaluator.hpp"
#include "websft/matcher.hpp"
#include "websft/rewrite_client.hpp"
#include "websft/rulecleaner.hpp"
#include "websft/sftgen.hpp"
#include "websft/text.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_pair_rate(std::size_t pairs, std::size_t seed_total) {
    if (seed_total == 0) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << 100.0 * static_cast<double>(pairs) / static_cast<double>(seed_total)
      << "%";
    return s.str();
}

namespace {

// Stable artifact names inside the output directory.
namespace file {
constexpr const char* corpus = "corpus.jsonl";
constexpr const char* crawl = "crawl.jsonl";
constexpr const char* manifest = "degrade_manifest.jsonl";
constexpr const char* degrade_report = "degrade_report.json";
constexpr const char* pairs = "pairs.jsonl";
constexpr const char* match_report = "match_report.json";
constexpr const char* rule_cleaned = "rule_cleaned.jsonl";
constexpr const char* rule_changes = "rule_changes.jsonl";
constexpr const char* train = "train.jsonl";
constexpr const char* checkpoint = "rewrite_checkpoint.jsonl";
constexpr const char* outputs = "rewrite_outputs.jsonl";
constexpr const char* rewrite_report = "rewrite_report.json";
constexpr const char* cleaned = "cleaned.jsonl";
constexpr const char* eval_report = "eval_report.json";
constexpr const char* verdicts = "verdicts.jsonl";
constexpr const char* report = "report.json";
}  // namespace file

// Values given on the command line; unset means "take the config file or
// default".
struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string output_dir;
    bool dry_run = false;

    std::string input, source, seed_corpus, crawl_corpus, pairs, spec, rules, outputs, predictions, gold, checkpoint;
    std::string mode, dedup, format, prompt_mode, base_url, model;
    std::optional<std::size_t> min_answer_len, aug_count, seed_total, pairs_count;
    std::optional<double> aug_ratio, timeout, temperature, tolerance;
    std::optional<unsigned> max_concurrency, rpm, max_retries, backoff_ms;
};

// Effective settings after merging config file and flags.
struct Settings {
    fs::path output_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 1;
    bool dry_run = false;

    std::optional<fs::path> input, seed_corpus, crawl_corpus, pairs, spec, rules, outputs, predictions, gold,
        checkpoint;
    Source source = Source::seed;
    MatchConfig match;
    AugmentationConfig aug;
    TrainingLayout layout = TrainingLayout::flat;
    PromptMode prompt_mode = PromptMode::sft;
    EndpointConfig endpoint;
    double tolerance = 1e-6;
    std::optional<std::size_t> seed_total, pairs_count;

    fs::path out(const char* name) const { return output_dir / name; }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << body;
    if (!out) throw IoError("error while writing " + p.string());
}

template <class T>
T json_get(const json& j, const std::string& field, const char* what) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ValidationError(field, field + " must be " + what);
    }
}

fs::path resolve_against(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void apply_config_file(const fs::path& path, Settings& s) {
    if (!fs::exists(path)) throw ValidationError("config", "config file does not exist: " + path.string());
    const json j = json::parse(read_file(path), nullptr, false);
    if (!j.is_object()) throw ValidationError("config", path.string() + " is not a JSON object");
    // Relative paths in the config are relative to the config file.
    const fs::path base = path.parent_path();
    auto path_of = [&](const json& v, const std::string& field) {
        return resolve_against(base, json_get<std::string>(v, field, "a path string"));
    };
    for (const auto& [key, v] : j.items()) {
        if (key == "seed_corpus") {
            s.seed_corpus = path_of(v, key);
        } else if (key == "crawl_corpus") {
            s.crawl_corpus = path_of(v, key);
        } else if (key == "input") {
            s.input = path_of(v, key);
        } else if (key == "pairs") {
            s.pairs = path_of(v, key);
        } else if (key == "output_dir") {
            s.output_dir = path_of(v, key);
        } else if (key == "degradation_spec") {
            s.spec = path_of(v, key);
        } else if (key == "rules") {
            s.rules = path_of(v, key);
        } else if (key == "seed") {
            s.seed = json_get<std::uint64_t>(v, key, "a non-negative integer");
            s.seed_set = true;
        } else if (key == "workers") {
            s.workers = json_get<unsigned>(v, key, "a positive integer");
        } else if (key == "match") {
            if (!v.is_object()) throw ValidationError("match", "match must be an object");
            for (const auto& [mk, mv] : v.items()) {
                const std::string field = "match." + mk;
                if (mk == "mode") {
                    auto m = parse_answer_match_mode(json_get<std::string>(mv, field, "a string"));
                    if (!m) throw ValidationError(field, field + " must be subsequence or substring");
                    s.match.mode = *m;
                } else if (mk == "min_answer_len") {
                    s.match.min_answer_len = json_get<std::size_t>(mv, field, "a non-negative integer");
                } else if (mk == "dedup") {
                    auto d = parse_dedup_policy(json_get<std::string>(mv, field, "a string"));
                    if (!d) throw ValidationError(field, field + " must be none, one_per_crawl or one_per_seed");
                    s.match.dedup = *d;
                } else {
                    throw ValidationError(field, "unknown setting " + field);
                }
            }
        } else if (key == "augmentation") {
            if (!v.is_object()) throw ValidationError("augmentation", "augmentation must be an object");
            for (const auto& [ak, av] : v.items()) {
                const std::string field = "augmentation." + ak;
                if (ak == "count") {
                    s.aug.count = json_get<std::size_t>(av, field, "a non-negative integer");
                } else if (ak == "ratio") {
                    s.aug.ratio = json_get<double>(av, field, "a number");
                } else {
                    throw ValidationError(field, "unknown setting " + field);
                }
            }
        } else if (key == "training_format") {
            auto l = parse_training_layout(json_get<std::string>(v, key, "a string"));
            if (!l) throw ValidationError(key, "training_format must be flat or chat");
            s.layout = *l;
        } else if (key == "prompt_mode") {
            const auto m = json_get<std::string>(v, key, "a string");
            if (m != "sft" && m != "one_shot") throw ValidationError(key, "prompt_mode must be sft or one_shot");
            s.prompt_mode = m == "sft" ? PromptMode::sft : PromptMode::one_shot;
        } else if (key == "endpoint") {
            s.endpoint = EndpointConfig::from_json_text(v.dump());
        } else if (key == "evaluation") {
            if (!v.is_object()) throw ValidationError("evaluation", "evaluation must be an object");
            for (const auto& [ek, ev] : v.items()) {
                if (ek != "tolerance") throw ValidationError("evaluation." + ek, "unknown setting evaluation." + ek);
                s.tolerance = json_get<double>(ev, "evaluation.tolerance", "a number");
            }
        } else {
            throw ValidationError(key, "unknown config key '" + key + "'");
        }
    }
}

Settings resolve(const Flags& f) {
    Settings s;
    if (!f.config.empty()) apply_config_file(f.config, s);
    if (f.seed) {
        s.seed = *f.seed;
        s.seed_set = true;
    }
    if (f.workers) s.workers = *f.workers;
    if (s.workers < 1) throw ValidationError("workers", "workers must be >= 1");
    if (!f.output_dir.empty()) s.output_dir = f.output_dir;
    s.dry_run = f.dry_run;

    auto path = [](const std::string& v, std::optional<fs::path>& dst) {
        if (!v.empty()) dst = fs::path(v);
    };
    path(f.input, s.input);
    path(f.seed_corpus, s.seed_corpus);
    path(f.crawl_corpus, s.crawl_corpus);
    path(f.pairs, s.pairs);
    path(f.spec, s.spec);
    path(f.rules, s.rules);
    path(f.outputs, s.outputs);
    path(f.predictions, s.predictions);
    path(f.gold, s.gold);
    path(f.checkpoint, s.checkpoint);

    if (!f.source.empty()) {
        auto src = parse_source(f.source);
        if (!src) throw ValidationError("source", "source must be seed, crawl or cleaned");
        s.source = *src;
    }
    if (!f.mode.empty()) {
        auto m = parse_answer_match_mode(f.mode);
        if (!m) throw ValidationError("match.mode", "match.mode must be subsequence or substring");
        s.match.mode = *m;
    }
    if (!f.dedup.empty()) {
        auto d = parse_dedup_policy(f.dedup);
        if (!d) throw ValidationError("match.dedup", "match.dedup must be none, one_per_crawl or one_per_seed");
        s.match.dedup = *d;
    }
    if (f.min_answer_len) s.match.min_answer_len = *f.min_answer_len;
    s.match.workers = s.workers;

    if (f.aug_count) s.aug.count = *f.aug_count;
    if (f.aug_ratio) s.aug.ratio = *f.aug_ratio;
    if (!(s.aug.ratio >= 0.0)) throw ValidationError("augmentation.ratio", "augmentation.ratio must be >= 0");
    s.aug.rng_seed = s.seed;
    if (!f.format.empty()) {
        auto l = parse_training_layout(f.format);
        if (!l) throw ValidationError("training_format", "format must be flat or chat");
        s.layout = *l;
    }
    if (!f.prompt_mode.empty()) {
        if (f.prompt_mode != "sft" && f.prompt_mode != "one_shot") {
            throw ValidationError("prompt_mode", "prompt_mode must be sft or one_shot");
        }
        s.prompt_mode = f.prompt_mode == "sft" ? PromptMode::sft : PromptMode::one_shot;
    }

    if (!f.base_url.empty()) s.endpoint.base_url = f.base_url;
    if (!f.model.empty()) s.endpoint.model_name = f.model;
    if (f.max_concurrency) s.endpoint.max_concurrency = *f.max_concurrency;
    if (f.rpm) s.endpoint.requests_per_minute = *f.rpm;
    if (f.timeout) s.endpoint.timeout_s = *f.timeout;
    if (f.max_retries) s.endpoint.max_retries = *f.max_retries;
    if (f.backoff_ms) s.endpoint.backoff_ms = *f.backoff_ms;
    if (f.temperature) s.endpoint.temperature = *f.temperature;
    if (f.tolerance) s.tolerance = *f.tolerance;
    if (!(s.tolerance >= 0.0)) throw ValidationError("evaluation.tolerance", "tolerance must be >= 0");
    s.seed_total = f.seed_total;
    s.pairs_count = f.pairs_count;
    return s;
}

const fs::path& require_path(const std::optional<fs::path>& p, const std::string& field) {
    if (!p) throw ValidationError(field, "missing required setting '" + field + "'");
    if (!fs::exists(*p)) throw ValidationError(field, "path does not exist: " + p->string());
    return *p;
}

void check_output_dir(const Settings& s) {
    fs::path probe = s.output_dir;
    if (fs::exists(probe)) {
        if (!fs::is_directory(probe)) {
            throw ValidationError("output_dir", "output_dir is not a directory: " + probe.string());
        }
    } else {
        // Nearest existing ancestor decides whether the directory can be created.
        probe = fs::absolute(probe);
        while (!probe.empty() && !fs::exists(probe)) probe = probe.parent_path();
    }
    if (::access(probe.c_str(), W_OK) != 0) {
        throw ValidationError("output_dir", "output_dir is not writable: " + s.output_dir.string());
    }
}

void prepare_output(const Settings& s) {
    check_output_dir(s);
    if (!s.dry_run) fs::create_directories(s.output_dir);
}

Corpus load_corpus(const fs::path& p, Source source, std::size_t* skipped = nullptr) {
    auto r = ingest(p, source);
    if (skipped) *skipped = r.skipped;
    return std::move(r.corpus);
}

std::string dump_pretty(const ordered_json& j) { return j.dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n"; }

// Effective configuration, minus the output location and secrets, for the
// report fingerprint.
ordered_json effective_config(const Settings& s) {
    ordered_json j;
    auto opt = [](const std::optional<fs::path>& p) { return p ? ordered_json(p->string()) : ordered_json(nullptr); };
    j["seed_corpus"] = opt(s.seed_corpus);
    j["crawl_corpus"] = opt(s.crawl_corpus);
    j["seed"] = s.seed;
    j["match"] = {{"mode", to_string(s.match.mode)},
                  {"min_answer_len", s.match.min_answer_len},
                  {"dedup", to_string(s.match.dedup)}};
    j["augmentation"] = {{"count", s.aug.count ? ordered_json(*s.aug.count) : ordered_json(nullptr)},
                         {"ratio", s.aug.ratio}};
    j["training_format"] = s.layout == TrainingLayout::flat ? "flat" : "chat";
    j["prompt_mode"] = to_string(s.prompt_mode);
    j["endpoint"] = {{"base_url", s.endpoint.base_url},
                     {"model_name", s.endpoint.model_name},
                     {"temperature", s.endpoint.temperature},
                     {"max_retries", s.endpoint.max_retries}};
    return j;
}

std::atomic<bool> g_interrupted{false};
extern "C" void on_interrupt(int) { g_interrupted.store(true); }

// Turns SIGINT/SIGTERM into a stop request for the duration of a scope.
class InterruptGuard {
public:
    InterruptGuard() {
        g_interrupted.store(false);
        prev_int_ = std::signal(SIGINT, on_interrupt);
        prev_term_ = std::signal(SIGTERM, on_interrupt);
        watcher_ = std::jthread([this](std::stop_token st) {
            while (!st.stop_requested()) {
                if (g_interrupted.load()) {
                    source_.request_stop();
                    return;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
        });
    }
    ~InterruptGuard() {
        watcher_.request_stop();
        watcher_.join();
        std::signal(SIGINT, prev_int_);
        std::signal(SIGTERM, prev_term_);
    }
    std::stop_token token() const { return source_.get_token(); }

private:
    std::stop_source source_;
    std::jthread watcher_;
    void (*prev_int_)(int) = SIG_DFL;
    void (*prev_term_)(int) = SIG_DFL;
};

struct Ctx {
    Settings s;
    std::ostream& out;
    std::ostream& err;
};

// --- stages -----------------------------------------------------------------

int stage_ingest(Ctx& c) {
    const auto& in = require_path(c.s.input, "input");
    prepare_output(c.s);
    std::size_t skipped = 0;
    const Corpus corpus = load_corpus(in, c.s.source, &skipped);
    c.out << "ingest: " << corpus.size() << " records, " << skipped << " skipped (" << to_string(c.s.source) << ")\n";
    if (c.s.dry_run) return kExitOk;
    write_corpus(c.s.out(file::corpus), corpus);
    return kExitOk;
}

DegradationSpec degradation_spec(const Settings& s) {
    DegradationSpec spec;
    if (s.spec) {
        spec = DegradationSpec::load(require_path(s.spec, "degradation_spec"));
    } else {
        for (auto cls : kErrorClassOrder) spec.rates[cls] = DegradationSpec::kDefaultRate;
    }
    if (s.seed_set) spec.rng_seed = s.seed;
    spec.validate();
    return spec;
}

int stage_degrade(Ctx& c) {
    const auto& in = require_path(c.s.input ? c.s.input : c.s.seed_corpus, c.s.input ? "input" : "seed_corpus");
    const DegradationSpec spec = degradation_spec(c.s);
    prepare_output(c.s);
    const Corpus seed = load_corpus(in, Source::seed);
    if (c.s.dry_run) {
        c.out << "degrade: " << seed.size() << " records would be degraded\n";
        return kExitOk;
    }
    const auto result = degrade(seed, spec, c.s.workers);
    write_corpus(c.s.out(file::crawl), result.corpus);
    write_manifest(c.s.out(file::manifest), result.manifest);
    // The spec goes into the report so default rates are visible.
    ordered_json rep;
    rep["records"] = result.corpus.size();
    rep["edits"] = result.manifest.size();
    rep["spec"] = ordered_json::parse(spec.to_json_text());
    rep["fields_applied"] = ordered_json::object();
    rep["fields_without_site"] = ordered_json::object();
    for (const auto& [cls, n] : result.applied) rep["fields_applied"][std::string(to_string(cls))] = n;
    for (const auto& [cls, n] : result.skipped) rep["fields_without_site"][std::string(to_string(cls))] = n;
    write_file(c.s.out(file::degrade_report), dump_pretty(rep));
    c.out << "degrade: " << result.corpus.size() << " records, " << result.manifest.size() << " edits\n";
    for (const auto& [cls, n] : result.applied) c.out << "  " << to_string(cls) << ": " << n << " fields\n";
    return kExitOk;
}

ordered_json match_report_json(const PairSet& ps, const Settings& s, std::size_t seed_skipped,
                               std::size_t crawl_skipped) {
    ordered_json j;
    j["seed_total"] = ps.seed_total;
    j["crawl_total"] = ps.crawl_total;
    j["seed_skipped"] = seed_skipped;
    j["crawl_skipped"] = crawl_skipped;
    j["pairs"] = ps.pairs.size();
    j["pairs_by_reason"] = {{"question_exact", ps.count(MatchReason::question_exact)},
                            {"answer_subsequence", ps.count(MatchReason::answer_subsequence)}};
    j["pair_rate"] = ps.pair_rate();
    j["pair_rate_percent"] = format_pair_rate(ps.pairs.size(), ps.seed_total);
    j["short_answer_seeds"] = ps.stats.short_answer_seeds;
    j["raw_pairs"] = ps.stats.raw_pairs;
    j["config"] = {{"mode", to_string(s.match.mode)},
                   {"min_answer_len", s.match.min_answer_len},
                   {"dedup", to_string(s.match.dedup)}};
    return j;
}

int stage_match(Ctx& c) {
    const auto& seed_path = require_path(c.s.seed_corpus, "seed_corpus");
    const auto& crawl_path = require_path(c.s.crawl_corpus, "crawl_corpus");
    prepare_output(c.s);
    std::size_t seed_skipped = 0, crawl_skipped = 0;
    const Corpus seed = load_corpus(seed_path, Source::seed, &seed_skipped);
    const Corpus crawl = load_corpus(crawl_path, Source::crawl, &crawl_skipped);
    if (c.s.dry_run) {
        c.out << "match: inputs valid (" << seed.size() << " seed, " << crawl.size() << " crawl records)\n";
        return kExitOk;
    }
    const PairSet ps = match_pairs(seed, crawl, c.s.match);
    write_pairs(c.s.out(file::pairs), ps);
    write_file(c.s.out(file::match_report), dump_pretty(match_report_json(ps, c.s, seed_skipped, crawl_skipped)));
    c.out << "match: " << ps.pairs.size() << " pairs from " << ps.seed_total << " seed / " << ps.crawl_total
          << " crawl records, pair_rate " << format_pair_rate(ps.pairs.size(), ps.seed_total) << "\n";
    return kExitOk;
}

int stage_rule_clean(Ctx& c) {
    const auto& in = require_path(c.s.input ? c.s.input : c.s.crawl_corpus, c.s.input ? "input" : "crawl_corpus");
    const RuleRegistry registry = c.s.rules ? RuleRegistry::load(require_path(c.s.rules, "rules"))
                                            : RuleRegistry::defaults();
    prepare_output(c.s);
    const Corpus crawl = load_corpus(in, Source::crawl);
    if (c.s.dry_run) {
        c.out << "rule-clean: " << crawl.size() << " records would be cleaned\n";
        return kExitOk;
    }
    Corpus cleaned;
    cleaned.source = Source::cleaned;
    cleaned.provenance = "rules";
    std::ofstream changes(c.s.out(file::rule_changes), std::ios::binary | std::ios::trunc);
    if (!changes) throw IoError("cannot write " + c.s.out(file::rule_changes).string());
    std::size_t changed = 0;
    for (const auto& r : crawl.records) {
        auto [rec, cs] = clean(r, registry);
        if (!cs.empty()) {
            ++changed;
            changes << serialize_changeset(cs) << '\n';
        }
        cleaned.records.push_back(std::move(rec));
    }
    write_corpus(c.s.out(file::rule_cleaned), cleaned);
    c.out << "rule-clean: " << crawl.size() << " records, " << changed << " changed\n";
    return kExitOk;
}

int stage_emit_pairs(Ctx& c) {
    const auto& seed_path = require_path(c.s.seed_corpus, "seed_corpus");
    const auto& crawl_path = require_path(c.s.crawl_corpus, "crawl_corpus");
    const fs::path pairs_path = c.s.pairs ? *c.s.pairs : c.s.out(file::pairs);
    if (!c.s.dry_run || c.s.pairs) require_path(pairs_path, "pairs");
    prepare_output(c.s);
    const Corpus seed = load_corpus(seed_path, Source::seed);
    const Corpus crawl = load_corpus(crawl_path, Source::crawl);
    if (c.s.dry_run) {
        c.out << "emit-pairs: inputs valid\n";
        return kExitOk;
    }
    const auto pairs = read_pairs(pairs_path);
    const auto examples = build_training_set(pairs, seed, crawl, c.s.aug);
    write_training_set(c.s.out(file::train), examples, c.s.layout);
    c.out << "emit-pairs: " << examples.size() << " training examples (" << pairs.size() << " pairs, "
          << examples.size() - pairs.size() << " augmented)\n";
    return kExitOk;
}

int stage_rewrite(Ctx& c) {
    const auto& crawl_path = require_path(c.s.crawl_corpus, "crawl_corpus");
    c.s.endpoint.validate();
    prepare_output(c.s);
    const Corpus crawl = load_corpus(crawl_path, Source::crawl);
    if (c.s.dry_run) {
        c.out << "rewrite: " << crawl.size() << " records would be sent to " << c.s.endpoint.base_url << "\n";
        return kExitOk;
    }
    const fs::path checkpoint = c.s.checkpoint ? *c.s.checkpoint : c.s.out(file::checkpoint);
    RewriteOptions opts;
    opts.mode = c.s.prompt_mode;
    InterruptGuard guard;
    opts.stop = guard.token();
    const auto run = rewrite_corpus(crawl, c.s.endpoint, checkpoint, opts);
    if (run.cancelled) {
        c.err << "rewrite: interrupted after " << run.outputs.size() << " of " << crawl.size()
              << " records; rerun with the same checkpoint to resume\n";
        return kExitFatal;
    }
    write_outputs(c.s.out(file::outputs), run.outputs);

    const auto assembled = assemble_cleaned(run.outputs);
    ordered_json rep;
    rep["crawl_total"] = crawl.size();
    rep["outputs"] = run.outputs.size();
    rep["failed"] = run.failed;
    rep["status_counts"] = ordered_json::object();
    for (const auto& [st, n] : assembled.counts) rep["status_counts"][std::string(to_string(st))] = n;
    write_file(c.s.out(file::rewrite_report), dump_pretty(rep));
    c.out << "rewrite: " << run.outputs.size() << " outputs (" << run.requested << " requested, " << run.resumed
          << " resumed, " << run.failed.size() << " failed)\n";
    return kExitOk;
}

int stage_assemble(Ctx& c) {
    const fs::path outputs_path = c.s.outputs ? *c.s.outputs : c.s.out(file::outputs);
    require_path(std::optional<fs::path>(outputs_path), "outputs");
    prepare_output(c.s);
    const auto outputs = read_outputs(outputs_path);
    const auto assembled = assemble_cleaned(outputs);
    c.out << "assemble: " << assembled.corpus.size() << " cleaned records from " << outputs.size() << " outputs";
    for (const auto& [st, n] : assembled.counts) c.out << ", " << to_string(st) << " " << n;
    c.out << "\n";
    if (c.s.dry_run) return kExitOk;
    write_corpus(c.s.out(file::cleaned), assembled.corpus);
    return kExitOk;
}

int stage_evaluate(Ctx& c) {
    const auto& pred_path = require_path(c.s.predictions, "predictions");
    const auto& gold_path = require_path(c.s.gold ? c.s.gold : c.s.seed_corpus, "gold");
    prepare_output(c.s);
    const auto preds = read_predictions(pred_path);
    const Corpus gold = load_corpus(gold_path, Source::seed);
    const auto report = grade_dataset(preds, gold, {}, c.s.tolerance, c.s.workers);
    c.out << report_table(report);
    if (c.s.dry_run) return kExitOk;
    {
        std::ofstream v(c.s.out(file::verdicts), std::ios::binary | std::ios::trunc);
        if (!v) throw IoError("cannot write " + c.s.out(file::verdicts).string());
        for (const auto& verdict : report.verdicts) v << serialize_verdict(verdict) << '\n';
    }
    write_file(c.s.out(file::eval_report), report_json(report, file::verdicts) + "\n");
    return kExitOk;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        if (!text::trim(line).empty()) ++n;
    }
    return n;
}

std::optional<json> read_json_if(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    json j = json::parse(read_file(p), nullptr, false);
    if (j.is_discarded()) throw ValidationError(p.filename().string(), "invalid JSON in " + p.string());
    return j;
}

// Builds report.json from explicit counts or from the artifacts in the
// output directory.
int stage_report(Ctx& c, const ordered_json* timings = nullptr) {
    prepare_output(c.s);
    ordered_json counts = ordered_json::object();
    std::size_t seed_total = 0, pairs = 0;
    std::optional<std::size_t> crawl_total, rewritten, cleaned;

    if (c.s.seed_total || c.s.pairs_count) {
        if (!c.s.seed_total) throw ValidationError("seed_total", "--seed-total is required with --pairs");
        if (!c.s.pairs_count) throw ValidationError("pairs_count", "--pairs is required with --seed-total");
        seed_total = *c.s.seed_total;
        pairs = *c.s.pairs_count;
        if (pairs > seed_total) throw ValidationError("pairs_count", "pairs cannot exceed seed_total");
        counts["seed_total"] = seed_total;
        counts["pairs"] = pairs;
    } else {
        const auto mr = read_json_if(c.s.out(file::match_report));
        if (!mr) {
            throw ValidationError("match_report", "no " + std::string(file::match_report) + " in " +
                                                      c.s.output_dir.string() +
                                                      " (run match first or pass --seed-total and --pairs)");
        }
        seed_total = mr->at("seed_total").get<std::size_t>();
        pairs = mr->at("pairs").get<std::size_t>();
        crawl_total = mr->at("crawl_total").get<std::size_t>();
        counts["seed_total"] = seed_total;
        counts["crawl_total"] = *crawl_total;
        counts["skipped"] = {{"seed", mr->value("seed_skipped", 0)}, {"crawl", mr->value("crawl_skipped", 0)}};
        counts["short_answer_seeds"] = mr->value("short_answer_seeds", 0);
        counts["pairs"] = pairs;
        counts["pairs_by_reason"] = mr->at("pairs_by_reason");
        if (fs::exists(c.s.out(file::train))) counts["train_examples"] = count_lines(c.s.out(file::train));
        if (const auto rr = read_json_if(c.s.out(file::rewrite_report))) {
            rewritten = rr->at("outputs").get<std::size_t>();
            counts["rewritten"] = *rewritten;
            counts["rewrite_failed"] = rr->at("failed").size();
            ordered_json discarded = ordered_json::object();
            for (const auto& [st, n] : rr->at("status_counts").items()) {
                if (st != "ok") discarded[st] = n;
            }
            counts["discarded_by_status"] = discarded;
        }
        if (fs::exists(c.s.out(file::cleaned))) {
            cleaned = count_lines(c.s.out(file::cleaned));
            counts["cleaned"] = *cleaned;
        }
    }
    if (rewritten && crawl_total && *rewritten > *crawl_total) {
        throw ValidationError("rewritten", "more rewrite outputs than crawl records");
    }
    if (cleaned && rewritten && *cleaned > *rewritten) {
        throw ValidationError("cleaned", "more cleaned records than rewrite outputs");
    }

    ordered_json rep;
    rep["pair_rate"] = seed_total == 0 ? ordered_json(nullptr) : ordered_json(static_cast<double>(pairs) / seed_total);
    rep["pair_rate_percent"] = format_pair_rate(pairs, seed_total);
    rep["counts"] = counts;
    rep["config_fingerprint"] = text::hex64(text::fnv1a64(effective_config(c.s).dump()));
    if (timings) rep["timings_ms"] = *timings;
    c.out << "report: pair_rate " << format_pair_rate(pairs, seed_total) << " (" << pairs << "/" << seed_total
          << ")\n";
    if (c.s.dry_run) return kExitOk;
    write_file(c.s.out(file::report), dump_pretty(rep));
    return kExitOk;
}

int stage_pipeline(Ctx& c) {
    // Validate everything up front so a late stage cannot fail on config.
    require_path(c.s.seed_corpus, "seed_corpus");
    require_path(c.s.crawl_corpus, "crawl_corpus");
    c.s.endpoint.validate();
    check_output_dir(c.s);
    if (c.s.dry_run) {
        load_corpus(*c.s.seed_corpus, Source::seed);
        load_corpus(*c.s.crawl_corpus, Source::crawl);
        c.out << "pipeline: configuration and inputs valid\n";
        return kExitOk;
    }
    ordered_json timings = ordered_json::object();
    auto timed = [&](const char* name, const std::function<int()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = fn();
        timings[name] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return rc;
    };
    Settings saved = c.s;
    c.s.pairs.reset();
    c.s.outputs.reset();
    int rc = timed("match", [&] { return stage_match(c); });
    if (rc == kExitOk) rc = timed("emit_pairs", [&] { return stage_emit_pairs(c); });
    if (rc == kExitOk) rc = timed("rewrite", [&] { return stage_rewrite(c); });
    if (rc == kExitOk) rc = timed("assemble", [&] { return stage_assemble(c); });
    c.s.seed_total.reset();
    c.s.pairs_count.reset();
    if (rc == kExitOk) rc = stage_report(c, &timings);
    c.s = saved;
    return rc;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Web-crawled math data cleaning and SFT toolkit", "websft"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON configuration file");
    app.add_option("--seed", f.seed, "Seed for every random choice");
    app.add_option("--workers", f.workers, "Worker threads per stage")->check(CLI::PositiveNumber);
    app.add_option("--output-dir", f.output_dir, "Directory for stage artifacts (default: out)");
    app.add_flag("--dry-run", f.dry_run, "Validate configuration and inputs without writing anything");

    auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus file and write it normalized");
    ingest_cmd->add_option("--input", f.input, "Line-delimited JSON corpus");
    ingest_cmd->add_option("--source", f.source, "seed, crawl or cleaned");

    auto* degrade_cmd = app.add_subcommand("degrade", "Inject OCR-style errors into a clean corpus");
    degrade_cmd->add_option("--input", f.input, "Clean seed corpus");
    degrade_cmd->add_option("--spec", f.spec, "Degradation spec (JSON)");

    auto add_corpora = [&](CLI::App* cmd) {
        cmd->add_option("--seed-corpus", f.seed_corpus, "Seed corpus (JSONL)");
        cmd->add_option("--crawl-corpus", f.crawl_corpus, "Crawled corpus (JSONL)");
    };
    auto add_match = [&](CLI::App* cmd) {
        cmd->add_option("--mode", f.mode, "subsequence or substring");
        cmd->add_option("--min-answer-len", f.min_answer_len, "Shortest normalized seed answer for the answer route");
        cmd->add_option("--dedup", f.dedup, "none, one_per_crawl or one_per_seed");
    };
    auto add_emit = [&](CLI::App* cmd) {
        cmd->add_option("--format", f.format, "flat or chat");
        cmd->add_option("--aug-count", f.aug_count, "Number of syntax-error examples");
        cmd->add_option("--aug-ratio", f.aug_ratio, "Syntax-error examples as a fraction of pairs");
    };
    auto add_endpoint = [&](CLI::App* cmd) {
        cmd->add_option("--base-url", f.base_url, "Endpoint base URL");
        cmd->add_option("--model", f.model, "Model name");
        cmd->add_option("--max-concurrency", f.max_concurrency, "Requests in flight");
        cmd->add_option("--rpm", f.rpm, "Requests per minute");
        cmd->add_option("--timeout", f.timeout, "Request timeout in seconds");
        cmd->add_option("--max-retries", f.max_retries, "Retries for 429/5xx/timeouts");
        cmd->add_option("--backoff-ms", f.backoff_ms, "First retry delay in milliseconds");
        cmd->add_option("--temperature", f.temperature, "Sampling temperature");
        cmd->add_option("--prompt-mode", f.prompt_mode, "sft or one_shot");
        cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file (default: in the output dir)");
    };

    auto* match_cmd = app.add_subcommand("match", "Pair crawled records with seed records");
    add_corpora(match_cmd);
    add_match(match_cmd);

    auto* rule_cmd = app.add_subcommand("rule-clean", "Apply the rule-based cleaning baseline");
    rule_cmd->add_option("--input", f.input, "Crawled corpus");
    rule_cmd->add_option("--rules", f.rules, "Rule registry (JSON)");

    auto* emit_cmd = app.add_subcommand("emit-pairs", "Write the rewriter training set");
    add_corpora(emit_cmd);
    emit_cmd->add_option("--pairs", f.pairs, "Pair file (default: pairs.jsonl in the output dir)");
    add_emit(emit_cmd);

    auto* rewrite_cmd = app.add_subcommand("rewrite", "Rewrite crawled records through a chat endpoint");
    rewrite_cmd->add_option("--crawl-corpus", f.crawl_corpus, "Crawled corpus (JSONL)");
    add_endpoint(rewrite_cmd);

    auto* assemble_cmd = app.add_subcommand("assemble", "Collect valid rewrites into the cleaned corpus");
    assemble_cmd->add_option("--outputs", f.outputs, "Rewrite outputs (default: in the output dir)");

    auto* eval_cmd = app.add_subcommand("evaluate", "Grade model answers against gold answers");
    eval_cmd->add_option("--predictions", f.predictions, "JSONL of {id, response}");
    eval_cmd->add_option("--gold", f.gold, "Gold corpus (JSONL)");
    eval_cmd->add_option("--tolerance", f.tolerance, "Relative tolerance for approximate answers");

    auto* report_cmd = app.add_subcommand("report", "Summarize stage counts into report.json");
    report_cmd->add_option("--seed-total", f.seed_total, "Seed corpus size");
    report_cmd->add_option("--pairs,--pairs-count", f.pairs_count, "Number of pairs");

    auto* pipeline_cmd = app.add_subcommand("pipeline", "match, emit-pairs, rewrite, assemble, report");
    add_corpora(pipeline_cmd);
    add_match(pipeline_cmd);
    add_emit(pipeline_cmd);
    add_endpoint(pipeline_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        Ctx c{resolve(f), out, err};
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "ingest") return stage_ingest(c);
        if (name == "degrade") return stage_degrade(c);
        if (name == "match") return stage_match(c);
        if (name == "rule-clean") return stage_rule_clean(c);
        if (name == "emit-pairs") return stage_emit_pairs(c);
        if (name == "rewrite") return stage_rewrite(c);
        if (name == "assemble") return stage_assemble(c);
        if (name == "evaluate") return stage_evaluate(c);
        if (name == "report") return stage_report(c);
        if (name == "pipeline") return stage_pipeline(c);
        err << "error: unknown subcommand " << name << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error: " << (e.field().empty() ? "" : e.field() + ": ") << e.what() << "\n";
        return kExitFatal;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        return kExitFatal;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace websft
