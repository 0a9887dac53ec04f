#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/normalize.hpp"

namespace websft {

enum class MatchReason { question_exact, answer_subsequence };
enum class AnswerMatchMode { subsequence, substring };

// none: every satisfying (seed, crawl) tuple.
// Question matches always win over answer matches.
// one_per_crawl: each crawl record keeps the seed whose normalized answer
//   length is closest to its own; ties go to the smaller seed id.
// one_per_seed: greedy one-to-one assignment in order of (length gap,
//   seed id, crawl id); no seed and no crawl record appears twice.
enum class DedupPolicy { none, one_per_crawl, one_per_seed };

std::string_view to_string(MatchReason r) noexcept;
std::string_view to_string(AnswerMatchMode m) noexcept;
std::string_view to_string(DedupPolicy d) noexcept;
std::optional<MatchReason> parse_match_reason(std::string_view s) noexcept;
std::optional<AnswerMatchMode> parse_answer_match_mode(std::string_view s) noexcept;
std::optional<DedupPolicy> parse_dedup_policy(std::string_view s) noexcept;

struct MatchConfig {
    AnswerMatchMode mode = AnswerMatchMode::subsequence;
    std::size_t min_answer_len = 8;
    DedupPolicy dedup = DedupPolicy::one_per_crawl;
    unsigned workers = 1;
    // Number of rarest keys each seed answer is indexed under.
    std::size_t index_keys = 3;
    // Gram length for substring mode; subsequence mode always uses single
    // characters because contiguous grams are not preserved under gaps.
    std::size_t substring_gram = 4;
};

struct MatchPair {
    std::string seed_id;
    std::string crawl_id;
    MatchReason reason = MatchReason::question_exact;
    std::size_t seed_norm_len = 0;   // normalized answer length, seed side
    std::size_t crawl_norm_len = 0;  // normalized answer length, crawl side

    bool operator==(const MatchPair&) const = default;
};

struct MatchStats {
    std::size_t short_answer_seeds = 0;  // excluded from the answer route
    std::size_t raw_pairs = 0;           // before dedup
    std::size_t candidates_verified = 0;
};

struct PairSet {
    std::vector<MatchPair> pairs;  // ordered by (crawl_id, seed_id)
    std::size_t seed_total = 0;
    std::size_t crawl_total = 0;
    MatchStats stats;

    std::size_t count(MatchReason r) const noexcept;
    double pair_rate() const noexcept {
        return seed_total == 0 ? 0.0 : static_cast<double>(pairs.size()) / seed_total;
    }
};

// Read-only lookup structure over a seed corpus.
class MatchIndex {
public:
    using Signature = std::vector<std::pair<char32_t, std::uint32_t>>;

    static MatchIndex build(const Corpus& seed, const MatchConfig& config = {});

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const std::unordered_map<std::u32string, std::vector<std::size_t>>& question_map() const noexcept {
        return question_map_;
    }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const NormalizedText& answer(std::size_t i) const { return answers_[i]; }
    const Signature& signature(std::size_t i) const { return signatures_[i]; }
    bool answer_eligible(std::size_t i) const { return eligible_[i]; }
    std::size_t short_answer_count() const noexcept { return short_answers_; }
    const MatchConfig& config() const noexcept { return config_; }

    // Seeds whose answer passes every necessary-condition filter against the
    // haystack: all index keys present, then character counts dominated.
    // Returned ascending.
    std::vector<std::size_t> answer_candidates(const NormalizedText& haystack) const;

    // Exact answer predicate for one seed under the configured mode.
    bool answer_matches(std::size_t seed, const NormalizedText& haystack) const;

private:
    MatchConfig config_;
    std::vector<std::string> ids_;
    std::vector<NormalizedText> answers_;
    std::vector<Signature> signatures_;
    std::vector<bool> eligible_;
    std::vector<std::uint8_t> key_counts_;
    std::unordered_map<std::u32string, std::vector<std::size_t>> question_map_;
    std::unordered_map<std::u32string, std::vector<std::size_t>> gram_index_;
    std::vector<std::size_t> unkeyed_;  // eligible seeds with no key; always candidates
    std::size_t short_answers_ = 0;

    std::vector<std::u32string> grams_of(std::u32string_view s) const;
};

MatchIndex::Signature char_signature(std::u32string_view s);
// True when every count in `needle` is <= the matching count in `haystack`.
bool signature_dominated(const MatchIndex::Signature& needle, const MatchIndex::Signature& haystack);

PairSet match_pairs(const Corpus& seed, const Corpus& crawl, const MatchConfig& config = {});
PairSet match_pairs(const MatchIndex& index, const Corpus& crawl);

// Pair file: one {seed_id, crawl_id, reason} object per line.
void write_pairs(const std::filesystem::path& path, const PairSet& pairs);
std::vector<MatchPair> read_pairs(const std::filesystem::path& path);

}  // namespace websft
