#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/matcher.hpp"

namespace websft {

inline constexpr std::string_view kSyntaxErrorSentinel = "存在语法错误。";
inline constexpr std::string_view kNotChineseMathSentinel = "这不是一道中文数学题。";

// Input-side section markers (prompt) and output-side markers (target).
inline constexpr std::string_view kPromptQuestionMarker = "[题目]";
inline constexpr std::string_view kPromptAnswerMarker = "[答案]";
inline constexpr std::string_view kTargetQuestionMarker = "[问题]";
inline constexpr std::string_view kTargetAnswerMarker = "[答案]";

// Bumped whenever the rendered prompt text changes; part of the rewrite
// run fingerprint.
inline constexpr std::string_view kPromptTemplateVersion = "rewrite-prompt-v1";

enum class PromptMode { sft, one_shot };
enum class Label { normal, syntax_error, not_chinese_math };
enum class ExampleKind { train, infer };

std::string_view to_string(Label l) noexcept;
std::string_view to_string(PromptMode m) noexcept;

// The instruction block shared by both prompt modes, one sentence group per line.
const std::vector<std::string>& instruction_lines();

std::string render_prompt(const Record& crawl, PromptMode mode = PromptMode::sft);
std::string render_target(const Record& seed);
std::string render_target(std::string_view question, std::string_view answer);

struct PromptExample {
    ExampleKind kind = ExampleKind::train;
    std::string prompt;
    std::optional<std::string> target;
    Label label = Label::normal;
    std::optional<std::string> seed_id;
    std::string crawl_id;

    bool operator==(const PromptExample&) const = default;
};

struct AugmentationConfig {
    // Explicit number of syntax-error examples; when unset, `ratio` of the
    // pair count, rounded to nearest.
    std::optional<std::size_t> count;
    double ratio = 0.02;
    std::uint64_t rng_seed = 0;
    bool shuffle = true;

    std::size_t resolve(std::size_t pair_count) const;
};

// One train example per pair plus the syntax-error augmentation. Throws
// ValidationError when a pair references a record that does not exist.
std::vector<PromptExample> build_training_set(const std::vector<MatchPair>& pairs, const Corpus& seed,
                                              const Corpus& crawl, const AugmentationConfig& aug = {});

enum class TrainingLayout { flat, chat };
std::optional<TrainingLayout> parse_training_layout(std::string_view s) noexcept;
std::string serialize_example(const PromptExample& ex, TrainingLayout layout);
void write_training_set(const std::filesystem::path& path, const std::vector<PromptExample>& examples,
                        TrainingLayout layout);

enum class RewriteStatus { ok, syntax_error, not_chinese_math, malformed };
std::string_view to_string(RewriteStatus s) noexcept;
std::optional<RewriteStatus> parse_rewrite_status(std::string_view s) noexcept;

struct RewriteOutput {
    std::string crawl_id;
    std::string raw;
    std::optional<std::pair<std::string, std::string>> parsed;  // (question, answer)
    RewriteStatus status = RewriteStatus::malformed;

    bool operator==(const RewriteOutput&) const = default;
};

// Classifies raw rewriter text: a sentinel, a well-formed
// "[问题] ... [答案] ..." body, or malformed.
RewriteOutput extract_output(std::string_view raw, std::string crawl_id = {});

}  // namespace websft
