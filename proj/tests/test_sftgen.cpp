#include "doctest.h"

#include "record_fixtures.hpp"
#include "websft/errors.hpp"
#include "websft/sftgen.hpp"

using namespace websft;

TEST_CASE("prompt rendering") {
    const auto c = fixtures::chicken_crawl();
    const auto p = render_prompt(c, PromptMode::sft);
    CHECK(p.find(instruction_lines()[0]) != std::string::npos);
    CHECK(p.find("[题目]\n" + c.question + "\n[答案]\n" + c.answer) != std::string::npos);
    const auto one = render_prompt(c, PromptMode::one_shot);
    CHECK(one.find("=1120（千克）") != std::string::npos);
    CHECK(one.ends_with(c.answer));
}

TEST_CASE("target rendering") {
    const auto t = render_target(fixtures::chicken_seed());
    CHECK(t.starts_with("[问题]\n光明养鸡场"));
    CHECK(t.find("解：2400÷（1+$\\frac{1}{5}$）") != std::string::npos);
    CHECK(t.find("\n=2400÷$\\frac{6}{5}$\n=2000（只）\n") != std::string::npos);
}

TEST_CASE("extract_output") {
    CHECK(extract_output("存在语法错误。").status == RewriteStatus::syntax_error);
    CHECK(extract_output("  这不是一道中文数学题。\n").status == RewriteStatus::not_chinese_math);
    const auto ok = extract_output("[问题]\nQ\n[答案]\nA");
    CHECK(ok.status == RewriteStatus::ok);
    CHECK(ok.parsed == std::pair<std::string, std::string>("Q", "A"));
    CHECK(extract_output("[答案]\nA\n[问题]\nQ").status == RewriteStatus::malformed);
    CHECK(extract_output("[问题]\nQ").status == RewriteStatus::malformed);
    CHECK(extract_output("[问题]\n\n[答案]\nA").status == RewriteStatus::malformed);
    CHECK(extract_output("[问题]\nQ\n[答案]\nA\n[答案]\nB").status == RewriteStatus::malformed);
    CHECK(extract_output("存在语法错误。还有").status == RewriteStatus::malformed);
}

TEST_CASE("round trip preserves line structure") {
    const auto s = fixtures::chicken_seed();
    const auto out = extract_output(render_target(s));
    REQUIRE(out.parsed);
    CHECK(out.parsed->first == s.question);
    CHECK(out.parsed->second == s.answer);
}

namespace {

struct Fixture10 {
    Corpus seed, crawl;
    std::vector<MatchPair> pairs;
    Fixture10() {
        std::vector<Record> s, c;
        for (int i = 0; i < 10; ++i) {
            const auto id = std::to_string(i);
            s.push_back({"s" + id, "问题" + id, "解：$\\frac{6}{5}$×" + id, Source::seed, {}});
            c.push_back({"c" + id, "问题" + id, "解：6\n5×" + id, Source::crawl, {}});
            pairs.push_back({"s" + id, "c" + id, MatchReason::question_exact, 0, 0});
        }
        seed = make_corpus(s, Source::seed);
        crawl = make_corpus(c, Source::crawl);
    }
};

}  // namespace

TEST_CASE("training set") {
    Fixture10 f;
    AugmentationConfig aug;
    aug.count = 2;
    aug.rng_seed = 3;
    const auto ex = build_training_set(f.pairs, f.seed, f.crawl, aug);
    CHECK(ex.size() == 12);
    CHECK(std::count_if(ex.begin(), ex.end(), [](const PromptExample& e) { return e.label == Label::syntax_error; }) ==
          2);
    for (const auto& e : ex) {
        if (e.label == Label::normal) CHECK(e.target->find("$\\frac{6}{5}$") != std::string::npos);
        if (e.label == Label::syntax_error) {
            CHECK(*e.target == kSyntaxErrorSentinel);
            CHECK(e.crawl_id.starts_with("aug-"));
        }
    }
    CHECK(build_training_set(f.pairs, f.seed, f.crawl, aug) == ex);

    aug.count = 0;
    CHECK(build_training_set(f.pairs, f.seed, f.crawl, aug).size() == 10);

    AugmentationConfig by_ratio;
    by_ratio.ratio = 0.25;
    CHECK(by_ratio.resolve(10) == 3);  // 2.5 rounds away from zero

    auto bad = f.pairs;
    bad[0].seed_id = "missing";
    CHECK_THROWS_AS(build_training_set(bad, f.seed, f.crawl), ValidationError);
}

TEST_CASE("training layouts") {
    Fixture10 f;
    AugmentationConfig aug;
    aug.count = 0;
    aug.shuffle = false;
    const auto ex = build_training_set(f.pairs, f.seed, f.crawl, aug);
    const auto flat = serialize_example(ex[0], TrainingLayout::flat);
    CHECK(flat.starts_with("{\"prompt\":"));
    CHECK(flat.find("\"seed_id\":\"s0\"") != std::string::npos);
    const auto chat = serialize_example(ex[0], TrainingLayout::chat);
    CHECK(chat.find("\"role\":\"assistant\"") != std::string::npos);
    CHECK(parse_training_layout("chat") == TrainingLayout::chat);
    CHECK_FALSE(parse_training_layout("xml"));
}
