#include "doctest.h"

#include "websft/errors.hpp"
#include "websft/rulecleaner.hpp"
#include "record_fixtures.hpp"

using namespace websft;

TEST_CASE("extract_solution") {
    CHECK(extract_solution("试题分析：分析．试题解析：去年养鸡的只数：2400÷5") == "去年养鸡的只数：2400÷5");
    CHECK(extract_solution("解：2400÷（1+1/5）") == "解：2400÷（1+1/5）");
    CHECK(extract_solution("no markers at all") == "no markers at all");
    CHECK(extract_solution("【详解】a 解：b") == "解：b");
    CHECK(extract_solution("解：b【详解】c") == "c");
}

TEST_CASE("fix_fractions") {
    CHECK(fix_fractions("=2400÷6\n5，=2400×5\n6").first == "=2400÷6/5，=2400×5/6");
    CHECK(fix_fractions("6×3.5×x=10.5\n21x=10.5").first == "6×3.5×x=10.5/21x=10.5");
    const auto [same, cs] = fix_fractions("a\nb\n1 2");
    CHECK(same == "a\nb\n1 2");
    CHECK(cs.empty());
    CHECK(fix_fractions("1\n2\n3").first == "1/2/3");
}

TEST_CASE("fix_equations") {
    CHECK(fix_equations("5），=2400").first == "5）=2400");
    CHECK(fix_equations("x=1,y=2").first == "x=1,y=2");
    CHECK(fix_equations("，≈3.14").first == "≈3.14");
    CHECK(fix_equations("a,，,=b").first == "a=b");
}

TEST_CASE("clean reproduces the documented cases") {
    const auto [c1, cs1] = clean(fixtures::chicken_rule_case());
    CHECK(c1.answer == fixtures::kChickenRuleCleaned);
    CHECK(c1.question == fixtures::chicken_rule_case().question);
    CHECK(c1.source == Source::cleaned);
    const auto [c2, cs2] = clean(fixtures::sand_rule_case());
    CHECK(c2.answer == fixtures::kSandRuleCleaned);
    CHECK(cs2.edits.size() == 1);
}

TEST_CASE("clean is idempotent and replayable") {
    for (const auto& r : {fixtures::chicken_rule_case(), fixtures::sand_rule_case(), fixtures::chicken_seed()}) {
        const auto [once, cs] = clean(r);
        const auto [twice, cs2] = clean(once);
        CHECK(twice == once);
        CHECK(cs2.empty());
        CHECK(replay_changes(r, cs) == once);
    }
}

TEST_CASE("already clean record is a fixed point") {
    Record r{"c", "一共有多少？", "3+4=7", Source::crawl, {}};
    const auto [out, cs] = clean(r);
    CHECK(out.answer == r.answer);
    CHECK(cs.empty());
}

TEST_CASE("registry configuration") {
    const auto reg = RuleRegistry::from_json_text(R"({"rules":["fix_fractions"]})");
    CHECK(reg.enabled("fix_fractions"));
    CHECK_FALSE(reg.enabled("extract_solution"));
    const auto [out, cs] = clean(fixtures::chicken_rule_case(), reg);
    CHECK(out.answer.starts_with("试题分析"));
    CHECK_THROWS_AS(RuleRegistry::from_json_text(R"({"rules":["nope"]})"), ValidationError);
    CHECK_THROWS_AS(RuleRegistry::from_json_text("[]"), ValidationError);
}

TEST_CASE("replay rejects a stale change set") {
    const auto [out, cs] = clean(fixtures::sand_rule_case());
    Record other = fixtures::sand_rule_case();
    other.answer = "changed";
    CHECK_THROWS_AS(replay_changes(other, cs), ValidationError);
}
