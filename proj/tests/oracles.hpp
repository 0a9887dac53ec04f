#pragma once

// Reference implementations used only by tests. They are written to be
// obviously correct rather than fast, and share no code with the library
// beyond UTF-8 decoding.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/text.hpp"

namespace oracle {

// Longest common subsequence length == needle length.
inline bool dp_subsequence(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<int>> lcs(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            lcs[i][j] = a[i - 1] == b[j - 1] ? lcs[i - 1][j - 1] + 1 : std::max(lcs[i - 1][j], lcs[i][j - 1]);
        }
    }
    return lcs[a.size()][b.size()] == static_cast<int>(a.size());
}

inline bool han(char32_t c) {
    return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0xF900 && c <= 0xFAFF) ||
           (c >= 0x20000 && c <= 0x323AF) || c == 0x3005 || c == 0x3007 || (c >= 0x3021 && c <= 0x3029) ||
           (c >= 0x3038 && c <= 0x303B);
}

// Pass 1: fold width and keep Han, digits, letters. Pass 2: drop letter
// runs of length >= 3.
inline std::u32string normalize(const std::string& s) {
    std::u32string kept;
    for (char32_t c : websft::text::decode_utf8(s)) {
        if (c >= 0xFF01 && c <= 0xFF5E) c -= 0xFEE0;
        const bool digit = c >= '0' && c <= '9';
        const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (digit || letter || han(c)) kept.push_back(c);
    }
    std::u32string out;
    std::size_t i = 0;
    while (i < kept.size()) {
        const bool letter = (kept[i] >= 'a' && kept[i] <= 'z') || (kept[i] >= 'A' && kept[i] <= 'Z');
        if (!letter) {
            out.push_back(kept[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < kept.size() && ((kept[j] >= 'a' && kept[j] <= 'z') || (kept[j] >= 'A' && kept[j] <= 'Z'))) ++j;
        if (j - i < 3) out.append(kept, i, j - i);
        i = j;
    }
    return out;
}

struct Pair {
    std::string seed_id;
    std::string crawl_id;
    bool by_question;
};

// Exhaustive evaluation of "question equal or answer contained", over every
// (seed, crawl) combination.
inline std::vector<Pair> brute_force_pairs(const websft::Corpus& seed, const websft::Corpus& crawl,
                                           std::size_t min_answer_len) {
    std::vector<Pair> out;
    for (const auto& c : crawl.records) {
        const auto cq = normalize(c.question);
        const auto ca = normalize(c.answer);
        for (const auto& s : seed.records) {
            const auto sa = normalize(s.answer);
            if (normalize(s.question) == cq) {
                out.push_back({s.id, c.id, true});
            } else if (sa.size() >= min_answer_len && dp_subsequence(sa, ca)) {
                out.push_back({s.id, c.id, false});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.crawl_id, a.seed_id) < std::tie(b.crawl_id, b.seed_id);
    });
    return out;
}

// Small alphabet so collisions, subsequences and shared questions happen often.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> alphabet = {"一", "二", "三", "米", "1", "2", "3", "x", "ab", "，",
                                                      "\n", "$", "＋", "５", "abc"};
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng)];
    if (websft::text::trim(s).empty()) s += "一";
    return s;
}

inline websft::Corpus random_corpus(std::mt19937_64& rng, std::size_t n, websft::Source source,
                                    const std::string& prefix, std::size_t max_len) {
    std::vector<websft::Record> recs;
    for (std::size_t i = 0; i < n; ++i) {
        websft::Record r;
        r.id = prefix + std::to_string(i);
        r.question = random_text(rng, 4);
        r.answer = random_text(rng, max_len);
        r.source = source;
        recs.push_back(std::move(r));
    }
    return websft::make_corpus(std::move(recs), source, "random");
}

}  // namespace oracle
