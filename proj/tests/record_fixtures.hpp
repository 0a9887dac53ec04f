#pragma once

// Records transcribed from the published case tables. Typesetting-only
// characters ("$" around operators, the space after "÷") are dropped.

#include <string_view>

#include "websft/corpus.hpp"

namespace fixtures {

inline constexpr std::string_view kChickenQuestionCrawl = "光明养鸡场今年养鸡2400只，比去年增加，去年养鸡多少只？";
inline constexpr std::string_view kChickenQuestionSeed =
    "光明养鸡场今年养鸡2400只，比去年增加$\\frac{1}{5}$，去年养鸡多少只？";

inline constexpr std::string_view kChickenAnswerCrawl =
    "试题分析：把去年养鸡的只数看作单位“1”，求单位“1”的量，用除法计算，数量2400除以对应的分率（1+\n1\n5）．\n"
    "试题解析：去年养鸡的只数：2400÷（1+1\n5），=2400÷6\n5，=2400×5\n6，=2000（只）．答：去年养鸡2000只．";

inline constexpr std::string_view kChickenAnswerSeed =
    "解：2400÷（1+$\\frac{1}{5}$）\n=2400÷$\\frac{6}{5}$\n=2000（只）\n答：去年养鸡2000只．";

inline constexpr std::string_view kChickenRuleCleaned =
    "去年养鸡的只数：2400÷（1+1/5）=2400÷6/5=2400×5/6=2000（只）．答：去年养鸡2000只．";

inline constexpr std::string_view kSandQuestion =
    "工人把10.5立方米的黄沙铺在一个长6米，宽3.5米的长方体沙坑里，可以铺多厚？（用方程解）";
inline constexpr std::string_view kSandAnswer = "设可以铺x米，\n6×3.5×x=10.5\n21x=10.5\nx=10.5÷21\nx=0.5\n答：可以铺0.5米．";
inline constexpr std::string_view kSandRuleCleaned =
    "设可以铺x米，\n6×3.5×x=10.5/21x=10.5\nx=10.5÷21\nx=0.5\n答：可以铺0.5米．";

inline websft::Record chicken_seed() {
    return {"chicken", std::string(kChickenQuestionSeed), std::string(kChickenAnswerSeed), websft::Source::seed, {}};
}
inline websft::Record chicken_crawl() {
    return {"chicken-web", std::string(kChickenQuestionCrawl), std::string(kChickenAnswerCrawl),
            websft::Source::crawl, {}};
}
inline websft::Record chicken_rule_case() {
    auto r = chicken_crawl();
    r.id = "case1";
    return r;
}
inline websft::Record sand_rule_case() {
    return {"case2", std::string(kSandQuestion), std::string(kSandAnswer), websft::Source::crawl, {}};
}

}  // namespace fixtures
