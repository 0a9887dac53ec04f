#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "websft/normalize.hpp"

using namespace websft;

TEST_CASE("normalize examples") {
    CHECK(normalize("").utf8() == "");
    CHECK(normalize("（1+1\n5）").utf8() == "115");
    CHECK(normalize("$\\frac{1}{5}$").utf8() == "15");
    CHECK(normalize("cm2").utf8() == "cm2");
    CHECK(normalize("ＡＢ１２").utf8() == "AB12");
    CHECK(normalize("解：x=3").utf8() == "解x3");
    CHECK(normalize("abc一ab").utf8() == "一ab");
}

TEST_CASE("normalize matches the reference implementation") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const auto s = oracle::random_text(rng, 30);
        CHECK(normalize(s).text == oracle::normalize(s));
    }
}

TEST_CASE("normalize is idempotent and ignores dropped characters") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto s = oracle::random_text(rng, 30);
        const auto once = normalize(s);
        CHECK(normalize(once.utf8()) == once);
        // Dropped characters never join letter runs across them.
        std::string spaced;
        for (char32_t c : text::decode_utf8(s)) {
            text::append_utf8(spaced, c);
            spaced += "，";
        }
        CHECK(normalize(spaced) == once);
    }
}

TEST_CASE("is_subsequence examples") {
    CHECK(is_subsequence(U"", U"anything"));
    CHECK(is_subsequence(U"abc", U"aXbYc"));
    CHECK_FALSE(is_subsequence(U"abc", U"acb"));
    CHECK_FALSE(is_subsequence(U"a", U""));
}

TEST_CASE("is_subsequence agrees with the DP oracle") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(0, 12), ch(0, 2);
    for (int i = 0; i < 2000; ++i) {
        std::u32string a, b;
        for (int k = len(rng); k > 0; --k) a.push_back(U'a' + ch(rng));
        for (int k = len(rng); k > 0; --k) b.push_back(U'a' + ch(rng));
        CHECK(is_subsequence(a, b) == oracle::dp_subsequence(a, b));
    }
}
