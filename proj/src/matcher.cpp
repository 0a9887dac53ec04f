#include "websft/matcher.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "json.hpp"
#include "websft/errors.hpp"

namespace websft {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(MatchReason r) noexcept {
    return r == MatchReason::question_exact ? "question_exact" : "answer_subsequence";
}

std::string_view to_string(AnswerMatchMode m) noexcept {
    return m == AnswerMatchMode::subsequence ? "subsequence" : "substring";
}

std::string_view to_string(DedupPolicy d) noexcept {
    switch (d) {
        case DedupPolicy::none: return "none";
        case DedupPolicy::one_per_crawl: return "one_per_crawl";
        case DedupPolicy::one_per_seed: return "one_per_seed";
    }
    return "none";
}

std::optional<MatchReason> parse_match_reason(std::string_view s) noexcept {
    if (s == "question_exact") return MatchReason::question_exact;
    if (s == "answer_subsequence") return MatchReason::answer_subsequence;
    return std::nullopt;
}

std::optional<AnswerMatchMode> parse_answer_match_mode(std::string_view s) noexcept {
    if (s == "subsequence") return AnswerMatchMode::subsequence;
    if (s == "substring") return AnswerMatchMode::substring;
    return std::nullopt;
}

std::optional<DedupPolicy> parse_dedup_policy(std::string_view s) noexcept {
    if (s == "none") return DedupPolicy::none;
    if (s == "one_per_crawl") return DedupPolicy::one_per_crawl;
    if (s == "one_per_seed") return DedupPolicy::one_per_seed;
    return std::nullopt;
}

std::size_t PairSet::count(MatchReason r) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(pairs.begin(), pairs.end(), [r](const MatchPair& p) { return p.reason == r; }));
}

MatchIndex::Signature char_signature(std::u32string_view s) {
    std::u32string sorted(s);
    std::sort(sorted.begin(), sorted.end());
    MatchIndex::Signature sig;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        sig.emplace_back(sorted[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return sig;
}

bool signature_dominated(const MatchIndex::Signature& needle, const MatchIndex::Signature& haystack) {
    auto h = haystack.begin();
    for (const auto& [cp, count] : needle) {
        while (h != haystack.end() && h->first < cp) ++h;
        if (h == haystack.end() || h->first != cp || h->second < count) return false;
    }
    return true;
}

std::vector<std::u32string> MatchIndex::grams_of(std::u32string_view s) const {
    const std::size_t n = config_.mode == AnswerMatchMode::subsequence ? 1 : config_.substring_gram;
    std::vector<std::u32string> grams;
    if (s.size() < n) return grams;
    grams.reserve(s.size() - n + 1);
    for (std::size_t i = 0; i + n <= s.size(); ++i) grams.emplace_back(s.substr(i, n));
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

MatchIndex MatchIndex::build(const Corpus& seed, const MatchConfig& config) {
    if (seed.source != Source::seed) {
        throw ValidationError("seed_corpus", "match index requires a seed corpus");
    }
    if (config.index_keys == 0 || config.index_keys > 255) {
        throw ValidationError("match.index_keys", "index_keys must be in [1, 255]");
    }
    if (config.mode == AnswerMatchMode::substring && config.substring_gram == 0) {
        throw ValidationError("match.substring_gram", "substring_gram must be positive");
    }

    MatchIndex idx;
    idx.config_ = config;
    const std::size_t n = seed.size();
    idx.ids_.reserve(n);
    idx.answers_.reserve(n);
    idx.signatures_.resize(n);
    idx.eligible_.assign(n, false);
    idx.key_counts_.assign(n, 0);

    std::vector<std::vector<std::u32string>> grams(n);
    std::unordered_map<std::u32string, std::uint32_t> doc_freq;
    for (std::size_t i = 0; i < n; ++i) {
        const Record& r = seed.records[i];
        idx.ids_.push_back(r.id);
        idx.question_map_[normalize(r.question).text].push_back(i);
        idx.answers_.push_back(normalize(r.answer));
        if (idx.answers_[i].size() < config.min_answer_len) {
            ++idx.short_answers_;
            continue;
        }
        idx.eligible_[i] = true;
        idx.signatures_[i] = char_signature(idx.answers_[i].text);
        grams[i] = idx.grams_of(idx.answers_[i].text);
        for (const auto& g : grams[i]) ++doc_freq[g];
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!idx.eligible_[i]) continue;
        auto& g = grams[i];
        if (g.empty()) {
            idx.unkeyed_.push_back(i);
            continue;
        }
        const std::size_t k = std::min(config.index_keys, g.size());
        std::partial_sort(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k), g.end(),
                          [&](const std::u32string& a, const std::u32string& b) {
                              const auto fa = doc_freq[a];
                              const auto fb = doc_freq[b];
                              return fa != fb ? fa < fb : a < b;
                          });
        for (std::size_t j = 0; j < k; ++j) idx.gram_index_[g[j]].push_back(i);
        idx.key_counts_[i] = static_cast<std::uint8_t>(k);
    }
    return idx;
}

std::vector<std::size_t> MatchIndex::answer_candidates(const NormalizedText& haystack) const {
    thread_local std::vector<std::uint8_t> hits;
    thread_local std::vector<std::size_t> touched;
    if (hits.size() < ids_.size()) hits.assign(ids_.size(), 0);

    std::vector<std::size_t> keyed;
    for (const auto& g : grams_of(haystack.text)) {
        auto it = gram_index_.find(g);
        if (it == gram_index_.end()) continue;
        for (std::size_t s : it->second) {
            if (hits[s] == 0) touched.push_back(s);
            if (++hits[s] == key_counts_[s]) keyed.push_back(s);
        }
    }
    for (std::size_t s : touched) hits[s] = 0;
    touched.clear();

    keyed.insert(keyed.end(), unkeyed_.begin(), unkeyed_.end());
    const Signature hay_sig = char_signature(haystack.text);
    std::erase_if(keyed, [&](std::size_t s) {
        return answers_[s].size() > haystack.size() || !signature_dominated(signatures_[s], hay_sig);
    });
    std::sort(keyed.begin(), keyed.end());
    return keyed;
}

bool MatchIndex::answer_matches(std::size_t seed, const NormalizedText& haystack) const {
    if (!eligible_[seed]) return false;
    if (config_.mode == AnswerMatchMode::substring) {
        return haystack.text.find(answers_[seed].text) != std::u32string::npos;
    }
    return is_subsequence(answers_[seed], haystack);
}

namespace {

std::size_t length_gap(const MatchPair& p) {
    return p.seed_norm_len > p.crawl_norm_len ? p.seed_norm_len - p.crawl_norm_len
                                              : p.crawl_norm_len - p.seed_norm_len;
}

// Preference order among competing pairs: question matches first, then the
// closest answer length, then ids.
auto dedup_key(const MatchPair& p) {
    return std::make_tuple(p.reason != MatchReason::question_exact, length_gap(p), std::cref(p.seed_id),
                           std::cref(p.crawl_id));
}

struct WorkerResult {
    std::vector<MatchPair> pairs;
    std::size_t verified = 0;
};

void match_range(const MatchIndex& index, const Corpus& crawl, std::size_t begin, std::size_t end,
                 WorkerResult& out) {
    for (std::size_t c = begin; c < end; ++c) {
        const Record& rec = crawl.records[c];
        const NormalizedText q = normalize(rec.question);
        const NormalizedText a = normalize(rec.answer);

        std::vector<std::size_t> by_question;
        if (auto it = index.question_map().find(q.text); it != index.question_map().end()) {
            by_question = it->second;
        }
        for (std::size_t s : by_question) {
            out.pairs.push_back({index.id(s), rec.id, MatchReason::question_exact, index.answer(s).size(),
                                 a.size()});
        }

        const auto candidates = index.answer_candidates(a);
        out.verified += candidates.size();
        for (std::size_t s : candidates) {
            if (std::find(by_question.begin(), by_question.end(), s) != by_question.end()) continue;
            if (index.answer_matches(s, a)) {
                out.pairs.push_back({index.id(s), rec.id, MatchReason::answer_subsequence,
                                     index.answer(s).size(), a.size()});
            }
        }
    }
}

std::vector<MatchPair> dedup_one_per_crawl(std::vector<MatchPair> pairs) {
    std::vector<MatchPair> out;
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        std::size_t best = i;
        while (j < pairs.size() && pairs[j].crawl_id == pairs[i].crawl_id) {
            if (dedup_key(pairs[j]) < dedup_key(pairs[best])) best = j;
            ++j;
        }
        out.push_back(std::move(pairs[best]));
        i = j;
    }
    return out;
}

std::vector<MatchPair> dedup_one_per_seed(std::vector<MatchPair> pairs) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return dedup_key(pairs[x]) < dedup_key(pairs[y]); });
    std::unordered_set<std::string> used_seed;
    std::unordered_set<std::string> used_crawl;
    std::vector<MatchPair> out;
    for (std::size_t i : order) {
        if (used_seed.contains(pairs[i].seed_id) || used_crawl.contains(pairs[i].crawl_id)) continue;
        used_seed.insert(pairs[i].seed_id);
        used_crawl.insert(pairs[i].crawl_id);
        out.push_back(std::move(pairs[i]));
    }
    return out;
}

bool pair_order(const MatchPair& a, const MatchPair& b) {
    if (a.crawl_id != b.crawl_id) return a.crawl_id < b.crawl_id;
    return a.seed_id < b.seed_id;
}

}  // namespace

PairSet match_pairs(const MatchIndex& index, const Corpus& crawl) {
    if (crawl.source != Source::crawl) {
        throw ValidationError("crawl_corpus", "matching requires a crawl corpus");
    }
    const std::size_t n = crawl.size();
    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::size_t>(index.config().workers, 1, std::max<std::size_t>(n, 1)));

    std::vector<WorkerResult> results(workers);
    if (workers == 1) {
        match_range(index, crawl, 0, n, results[0]);
    } else {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            threads.emplace_back(match_range, std::cref(index), std::cref(crawl), begin, end,
                                 std::ref(results[w]));
        }
    }

    PairSet out;
    out.seed_total = index.size();
    out.crawl_total = n;
    out.stats.short_answer_seeds = index.short_answer_count();
    std::vector<MatchPair> all;
    for (auto& r : results) {
        out.stats.candidates_verified += r.verified;
        std::move(r.pairs.begin(), r.pairs.end(), std::back_inserter(all));
    }
    std::sort(all.begin(), all.end(), pair_order);
    out.stats.raw_pairs = all.size();

    switch (index.config().dedup) {
        case DedupPolicy::none: out.pairs = std::move(all); break;
        case DedupPolicy::one_per_crawl: out.pairs = dedup_one_per_crawl(std::move(all)); break;
        case DedupPolicy::one_per_seed:
            out.pairs = dedup_one_per_seed(std::move(all));
            std::sort(out.pairs.begin(), out.pairs.end(), pair_order);
            break;
    }
    return out;
}

PairSet match_pairs(const Corpus& seed, const Corpus& crawl, const MatchConfig& config) {
    return match_pairs(MatchIndex::build(seed, config), crawl);
}

void write_pairs(const std::filesystem::path& path, const PairSet& pairs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write pairs file: " + path.string());
    for (const auto& p : pairs.pairs) {
        ordered_json j;
        j["seed_id"] = p.seed_id;
        j["crawl_id"] = p.crawl_id;
        j["reason"] = to_string(p.reason);
        out << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
    }
    if (!out) throw IoError("error while writing " + path.string());
}

std::vector<MatchPair> read_pairs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read pairs file: " + path.string());
    std::vector<MatchPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (!j.is_object() || !j.contains("seed_id") || !j.contains("crawl_id") || !j.contains("reason") ||
            !j["seed_id"].is_string() || !j["crawl_id"].is_string() || !j["reason"].is_string()) {
            throw ValidationError("pairs", where + ": malformed pair line");
        }
        auto reason = parse_match_reason(j["reason"].get<std::string>());
        if (!reason) throw ValidationError("pairs", where + ": unknown reason");
        pairs.push_back({j["seed_id"].get<std::string>(), j["crawl_id"].get<std::string>(), *reason, 0, 0});
    }
    return pairs;
}

}  // namespace websft
