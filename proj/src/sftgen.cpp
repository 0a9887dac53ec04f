#include "websft/sftgen.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "websft/degrader.hpp"
#include "websft/errors.hpp"
#include "websft/rng.hpp"
#include "websft/text.hpp"

namespace websft {

using ordered_json = nlohmann::ordered_json;

namespace {

// Worked demonstration embedded in the one-shot prompt.
constexpr std::string_view kDemoQuestion =
    "为民商店有一批大米，卖出总数的\n\n\n\n\n\n\n\n5\n\n\n\n8后，又运进540千克，这时商店里的大米数量与原来大米数量的比是6：7，"
    "为民商店原有大米多少千克？";
constexpr std::string_view kDemoAnswer =
    "试题分析：卖出总数的\n\n\n\n\n\n\n\n5\n\n\n \n8后，又运来540千克，这时商店里的大米数量与原来大米数量的比是6：7，"
    "则即此时大米的重量比原来少1-\n\n\n\n\n\n\n\n6\n\n\n\n7=\n\n\n\n\n\n\n \n1\n\n\n\n7，则这540千克是原来的"
    "\n\n\n\n\n\n\n\n5\n\n\n\n8-\n\n\n\n\n\n \n\n1\n\n\n\n7=\n\n\n\n\n\n\n\n27\n\n\n\n56，所以原来有540÷"
    "\n\n\n\n\n\n\n\n27\n\n\n\n56 =1120千克．\n试题解析：540÷[5\n8-（1-6\n7）]=540÷[5\n8-1\n7]=540÷27\n56="
    "1120（千克）；答：为民商店原有大米1120千克．";
constexpr std::string_view kDemoOutputQuestion =
    "为民商店有一批大米，卖出总数的$\\frac{5}{8}$后，又运进540千克，这时商店里的大米数量与原来大米数量的比是6：7，"
    "为民商店原有大米多少千克？";
constexpr std::string_view kDemoOutputAnswer =
    "解：540÷[$\\frac{5}{8}$-（1-$\\frac{6}{7}$）]\n"
    "=540÷[$\\frac{5}{8}$-$\\frac{1}{7}$]\n"
    "=540÷$\\frac{27}{56}$\n"
    "=1120（千克）；\n"
    "答：为民商店原有大米1120千克．";

void append_line(std::string& out, std::string_view line) {
    out.append(line);
    out.push_back('\n');
}

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace); }

}  // namespace

std::string_view to_string(Label l) noexcept {
    switch (l) {
        case Label::normal: return "normal";
        case Label::syntax_error: return "syntax_error";
        case Label::not_chinese_math: return "not_chinese_math";
    }
    return "normal";
}

std::string_view to_string(PromptMode m) noexcept { return m == PromptMode::sft ? "sft" : "one_shot"; }

const std::vector<std::string>& instruction_lines() {
    static const std::vector<std::string> lines = {
        "假设你是一个小学数学老师，下面给你一道可能存在语言不规范的题目和对应的答案，请将题目和答案转换成规范格式。",
        "注意答案只需要保留具体解答步骤，且不要改变原答案的解题思路。",
        "如果题目非中文数学题，请指出“这不是一道中文数学题。”。如果存在严重的语法错误导致理解困难，请输出“存在语法错误。”。",
    };
    return lines;
}

std::string render_prompt(const Record& crawl, PromptMode mode) {
    std::string out;
    for (const auto& line : instruction_lines()) append_line(out, line);
    if (mode == PromptMode::one_shot) {
        out.push_back('\n');
        append_line(out, "样例");
        append_line(out, "# 输入：");
        append_line(out, kPromptQuestionMarker);
        append_line(out, kDemoQuestion);
        append_line(out, kPromptAnswerMarker);
        append_line(out, kDemoAnswer);
        append_line(out, "# 输出：");
        append_line(out, kTargetQuestionMarker);
        append_line(out, kDemoOutputQuestion);
        append_line(out, kTargetAnswerMarker);
        append_line(out, kDemoOutputAnswer);
        out.push_back('\n');
        append_line(out, "请根据以上样例，输出下面这道题目的转换结果：");
    }
    append_line(out, kPromptQuestionMarker);
    append_line(out, crawl.question);
    append_line(out, kPromptAnswerMarker);
    out.append(crawl.answer);
    return out;
}

std::string render_target(std::string_view question, std::string_view answer) {
    std::string out;
    append_line(out, kTargetQuestionMarker);
    append_line(out, question);
    append_line(out, kTargetAnswerMarker);
    out.append(answer);
    return out;
}

std::string render_target(const Record& seed) { return render_target(seed.question, seed.answer); }

std::size_t AugmentationConfig::resolve(std::size_t pair_count) const {
    if (count) return *count;
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pair_count)));
}

std::vector<PromptExample> build_training_set(const std::vector<MatchPair>& pairs, const Corpus& seed,
                                              const Corpus& crawl, const AugmentationConfig& aug) {
    if (!(aug.ratio >= 0.0)) throw ValidationError("augmentation.ratio", "ratio must be non-negative");

    std::unordered_map<std::string_view, const Record*> seed_by_id, crawl_by_id;
    for (const auto& r : seed.records) seed_by_id.emplace(r.id, &r);
    for (const auto& r : crawl.records) crawl_by_id.emplace(r.id, &r);

    std::vector<PromptExample> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        auto s = seed_by_id.find(p.seed_id);
        auto c = crawl_by_id.find(p.crawl_id);
        if (s == seed_by_id.end()) throw ValidationError(p.seed_id, "pair references unknown seed id '" + p.seed_id + "'");
        if (c == crawl_by_id.end()) {
            throw ValidationError(p.crawl_id, "pair references unknown crawl id '" + p.crawl_id + "'");
        }
        out.push_back({ExampleKind::train, render_prompt(*c->second, PromptMode::sft), render_target(*s->second),
                       Label::normal, p.seed_id, p.crawl_id});
    }

    const std::size_t n_aug = aug.resolve(pairs.size());
    if (n_aug > 0) {
        if (seed.empty()) throw ValidationError("augmentation.count", "augmentation needs a nonempty seed corpus");
        DegradationSpec severe;
        for (ErrorClass c : kErrorClassOrder) {
            if (c != ErrorClass::question_info_drop) severe.rates[c] = 1.0;
        }
        severe.rng_seed = aug.rng_seed;
        Rng pick(aug.rng_seed);
        for (std::size_t k = 0; k < n_aug; ++k) {
            Record base = seed.records[pick.uniform_int(0, seed.size() - 1)];
            const std::string source_id = base.id;
            base.id = "aug-" + std::to_string(k) + "-" + source_id;
            const Record garbled = degrade_record(base, severe);
            out.push_back({ExampleKind::train, render_prompt(garbled, PromptMode::sft),
                           std::string(kSyntaxErrorSentinel), Label::syntax_error, std::nullopt, garbled.id});
        }
    }

    if (aug.shuffle) Rng(aug.rng_seed ^ 0x5f3759dfULL).shuffle(out);
    return out;
}

std::optional<TrainingLayout> parse_training_layout(std::string_view s) noexcept {
    if (s == "flat") return TrainingLayout::flat;
    if (s == "chat") return TrainingLayout::chat;
    return std::nullopt;
}

std::string serialize_example(const PromptExample& ex, TrainingLayout layout) {
    ordered_json j;
    if (layout == TrainingLayout::chat) {
        j["messages"] = ordered_json::array();
        j["messages"].push_back({{"role", "user"}, {"content", ex.prompt}});
        j["messages"].push_back({{"role", "assistant"}, {"content", ex.target.value_or("")}});
        return dump(j);
    }
    j["prompt"] = ex.prompt;
    j["target"] = ex.target ? ordered_json(*ex.target) : ordered_json(nullptr);
    j["label"] = to_string(ex.label);
    j["seed_id"] = ex.seed_id ? ordered_json(*ex.seed_id) : ordered_json(nullptr);
    j["crawl_id"] = ex.crawl_id;
    return dump(j);
}

void write_training_set(const std::filesystem::path& path, const std::vector<PromptExample>& examples,
                        TrainingLayout layout) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write training set: " + path.string());
    for (const auto& ex : examples) out << serialize_example(ex, layout) << '\n';
    if (!out) throw IoError("error while writing " + path.string());
}

std::string_view to_string(RewriteStatus s) noexcept {
    switch (s) {
        case RewriteStatus::ok: return "ok";
        case RewriteStatus::syntax_error: return "syntax_error";
        case RewriteStatus::not_chinese_math: return "not_chinese_math";
        case RewriteStatus::malformed: return "malformed";
    }
    return "malformed";
}

std::optional<RewriteStatus> parse_rewrite_status(std::string_view s) noexcept {
    for (auto st : {RewriteStatus::ok, RewriteStatus::syntax_error, RewriteStatus::not_chinese_math,
                    RewriteStatus::malformed}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

RewriteOutput extract_output(std::string_view raw, std::string crawl_id) {
    RewriteOutput out{std::move(crawl_id), std::string(raw), std::nullopt, RewriteStatus::malformed};
    const std::string_view body = text::trim(raw);
    if (body == kSyntaxErrorSentinel) {
        out.status = RewriteStatus::syntax_error;
        return out;
    }
    if (body == kNotChineseMathSentinel) {
        out.status = RewriteStatus::not_chinese_math;
        return out;
    }
    if (text::count_occurrences(body, kTargetQuestionMarker) != 1 ||
        text::count_occurrences(body, kTargetAnswerMarker) != 1) {
        return out;
    }
    const auto q_pos = body.find(kTargetQuestionMarker);
    const auto a_pos = body.find(kTargetAnswerMarker);
    if (a_pos < q_pos) return out;
    const auto q_start = q_pos + kTargetQuestionMarker.size();
    const auto question = text::trim(body.substr(q_start, a_pos - q_start));
    const auto answer = text::trim(body.substr(a_pos + kTargetAnswerMarker.size()));
    if (question.empty() || answer.empty()) return out;
    out.parsed.emplace(std::string(question), std::string(answer));
    out.status = RewriteStatus::ok;
    return out;
}

}  // namespace websft
