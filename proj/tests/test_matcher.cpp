#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "record_fixtures.hpp"
#include "websft/errors.hpp"
#include "websft/matcher.hpp"
#include "websft/normalize.hpp"

using namespace websft;

namespace {

Record rec(std::string id, std::string q, std::string a, Source s) { return {std::move(id), std::move(q), std::move(a), s, {}}; }

}  // namespace

TEST_CASE("index build") {
    const auto seed = make_corpus({rec("a", "问题一", "答案一二三四五六七八", Source::seed),
                                   rec("b", "问题二", "答案", Source::seed), rec("c", "问题三", "答案", Source::seed)},
                                  Source::seed);
    const auto idx = MatchIndex::build(seed);
    CHECK(idx.question_map().size() == 3);
    CHECK(idx.short_answer_count() == 2);
    CHECK(idx.answer_eligible(0));

    const auto same = make_corpus({rec("a", "问题 一", "x", Source::seed), rec("b", "问题一。", "y", Source::seed)},
                                  Source::seed);
    const auto idx2 = MatchIndex::build(same);
    CHECK(idx2.question_map().size() == 1);
    CHECK(idx2.question_map().begin()->second.size() == 2);

    CHECK(MatchIndex::build(make_corpus({}, Source::seed)).empty());
    CHECK_THROWS_AS(MatchIndex::build(make_corpus({}, Source::crawl)), ValidationError);
}

TEST_CASE("published chicken-farm case pairs by answer, not question") {
    const auto s = fixtures::chicken_seed();
    const auto c = fixtures::chicken_crawl();
    CHECK(normalize(s.question) != normalize(c.question));
    CHECK(oracle::dp_subsequence(oracle::normalize(s.answer), oracle::normalize(c.answer)));

    const auto ps = match_pairs(make_corpus({s}, Source::seed), make_corpus({c}, Source::crawl));
    REQUIRE(ps.pairs.size() == 1);
    CHECK(ps.pairs[0].reason == MatchReason::answer_subsequence);
    CHECK(ps.pairs[0].seed_id == "chicken");
}

TEST_CASE("identity corpora pair by question") {
    std::vector<Record> s, c;
    for (int i = 0; i < 20; ++i) {
        s.push_back(rec("r" + std::to_string(i), "第" + std::to_string(i) + "题", "答案很长很长很长很长", Source::seed));
        c.push_back(s.back());
        c.back().source = Source::crawl;
    }
    const auto ps = match_pairs(make_corpus(s, Source::seed), make_corpus(c, Source::crawl));
    CHECK(ps.pairs.size() == 20);
    CHECK(ps.count(MatchReason::question_exact) == 20);
    CHECK(ps.pair_rate() == doctest::Approx(1.0));
}

TEST_CASE("substring mode is stricter than subsequence") {
    const auto seed = make_corpus({rec("s", "甲", "一二三四五六七八", Source::seed)}, Source::seed);
    const auto gapped = make_corpus({rec("c", "乙", "一二三四X五六七八", Source::crawl)}, Source::crawl);
    const auto contig = make_corpus({rec("d", "丙", "零一二三四五六七八九", Source::crawl)}, Source::crawl);
    MatchConfig sub;
    sub.mode = AnswerMatchMode::substring;
    CHECK(match_pairs(seed, gapped).pairs.size() == 1);
    CHECK(match_pairs(seed, gapped, sub).pairs.empty());
    CHECK(match_pairs(seed, contig, sub).pairs.size() == 1);
}

TEST_CASE("dedup policies") {
    // Two seeds contained in one crawl answer; one seed contained in two crawls.
    const auto seed = make_corpus({rec("s1", "甲", "一二三四五六七八", Source::seed),
                                   rec("s2", "乙", "一二三四五六七八九", Source::seed)},
                                  Source::seed);
    const auto crawl = make_corpus({rec("c1", "丙", "一二三四五六七八九十", Source::crawl),
                                    rec("c2", "丁", "一二三四五六七八", Source::crawl)},
                                   Source::crawl);
    MatchConfig cfg;
    cfg.dedup = DedupPolicy::none;
    const auto all = match_pairs(seed, crawl, cfg);
    CHECK(all.pairs.size() == 3);

    cfg.dedup = DedupPolicy::one_per_crawl;
    const auto per_crawl = match_pairs(seed, crawl, cfg);
    REQUIRE(per_crawl.pairs.size() == 2);
    CHECK(per_crawl.pairs[0].crawl_id == "c1");
    CHECK(per_crawl.pairs[0].seed_id == "s2");
    CHECK(per_crawl.pairs[1].seed_id == "s1");

    cfg.dedup = DedupPolicy::one_per_seed;
    const auto per_seed = match_pairs(seed, crawl, cfg);
    CHECK(per_seed.pairs.size() == 2);
    CHECK(per_seed.pairs.size() <= std::min(per_seed.seed_total, per_seed.crawl_total));
}

TEST_CASE("candidate filter never drops a true match") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto seed = oracle::random_corpus(rng, 40, Source::seed, "s", 16);
        const auto crawl = oracle::random_corpus(rng, 40, Source::crawl, "c", 30);
        MatchConfig cfg;
        cfg.min_answer_len = 2;
        const auto idx = MatchIndex::build(seed, cfg);
        for (const auto& c : crawl.records) {
            const auto hay = normalize(c.answer);
            const auto cands = idx.answer_candidates(hay);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (!idx.answer_eligible(i)) continue;
                if (oracle::dp_subsequence(idx.answer(i).text, hay.text)) {
                    CHECK(std::binary_search(cands.begin(), cands.end(), i));
                }
            }
        }
    }
}

TEST_CASE("parallel matching equals serial") {
    std::mt19937_64 rng(5);
    const auto seed = oracle::random_corpus(rng, 150, Source::seed, "s", 16);
    const auto crawl = oracle::random_corpus(rng, 150, Source::crawl, "c", 30);
    MatchConfig cfg;
    cfg.min_answer_len = 3;
    cfg.dedup = DedupPolicy::none;
    const auto a = match_pairs(seed, crawl, cfg);
    cfg.workers = 4;
    const auto b = match_pairs(seed, crawl, cfg);
    CHECK(a.pairs == b.pairs);
}

TEST_CASE("pair file round trip") {
    const auto ps = match_pairs(make_corpus({fixtures::chicken_seed()}, Source::seed),
                                make_corpus({fixtures::chicken_crawl()}, Source::crawl));
    const auto p = std::filesystem::temp_directory_path() / "websft_pairs.jsonl";
    write_pairs(p, ps);
    const auto back = read_pairs(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].seed_id == "chicken");
    CHECK(back[0].reason == MatchReason::answer_subsequence);
}

TEST_CASE("pair rate arithmetic") {
    PairSet ps;
    ps.seed_total = 84095;
    ps.pairs.resize(24336);
    CHECK(ps.pair_rate() * 100 == doctest::Approx(28.94).epsilon(0.001));
}
