#include "doctest.h"

#include "websft/degrader.hpp"
#include "websft/errors.hpp"

using namespace websft;

namespace {

DegradationSpec only(ErrorClass c, std::uint64_t seed = 1) {
    DegradationSpec s;
    s.rates[c] = 1.0;
    s.rng_seed = seed;
    return s;
}

Record rec(std::string q, std::string a) { return {"r", std::move(q), std::move(a), Source::seed, {}}; }

}  // namespace

TEST_CASE("superscript_drop") {
    const auto out = degrade_record(rec("问", "$3^{2}-1^{2}=8$"), only(ErrorClass::superscript_drop));
    CHECK(out.answer == "$32-12=8$");
    CHECK(out.source == Source::crawl);
}

TEST_CASE("fraction_flatten newline variant") {
    auto spec = only(ErrorClass::fraction_flatten);
    spec.fraction_newline_prob = 1.0;
    CHECK(degrade_record(rec("问", "2400÷$\\frac{6}{5}$"), spec).answer == "2400÷6\n5");
    spec.fraction_newline_prob = 0.0;
    CHECK(degrade_record(rec("问", "2400÷\\dfrac{6}{5}"), spec).answer == "2400÷65");
}

TEST_CASE("other classes") {
    CHECK(degrade_record(rec("问", "a\nb\nc"), only(ErrorClass::linebreak_drop)).answer == "abc");
    CHECK(degrade_record(rec("问", "2×3+1"), only(ErrorClass::symbol_substitute)).answer == "2X3十1");
    const auto q = degrade_record(rec("有12个苹果", "答"), only(ErrorClass::question_info_drop)).question;
    CHECK(q == "有个苹果");
    const auto g = degrade_record(rec("问", "一二三四五六七八九十"), only(ErrorClass::garble));
    CHECK(g.answer != "一二三四五六七八九十");
}

TEST_CASE("zero rates leave the record unchanged") {
    DegradationSpec spec;
    for (auto c : kErrorClassOrder) spec.rates[c] = 0.0;
    std::vector<ManifestEntry> m;
    const auto r = rec("有12个$\\frac{1}{2}$", "a\nb");
    const auto out = degrade_record(r, spec, &m);
    CHECK(out.question == r.question);
    CHECK(out.answer == r.answer);
    CHECK(m.empty());
}

TEST_CASE("degrade is reproducible and replayable") {
    std::vector<Record> recs;
    for (int i = 0; i < 50; ++i) {
        recs.push_back({"id" + std::to_string(i), "有" + std::to_string(i) + "个$\\frac{1}{2}$苹果",
                        "解：$2^{2}$×3+1\n=13\n答：13个", Source::seed, {}});
    }
    const auto corpus = make_corpus(recs, Source::seed);
    DegradationSpec spec;
    for (auto c : kErrorClassOrder) spec.rates[c] = 0.5;
    spec.rng_seed = 42;
    const auto a = degrade(corpus, spec, 1);
    const auto b = degrade(corpus, spec, 4);
    CHECK(a.corpus.records == b.corpus.records);
    CHECK(a.manifest == b.manifest);
    CHECK(a.corpus.source == Source::crawl);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        auto replayed = replay_manifest(recs[i], a.manifest);
        CHECK(replayed == a.corpus.records[i]);
    }
    spec.rng_seed = 43;
    CHECK(degrade(corpus, spec).corpus.records != a.corpus.records);

    const auto p = std::filesystem::temp_directory_path() / "websft_manifest.jsonl";
    write_manifest(p, a.manifest);
    CHECK(read_manifest(p) == a.manifest);
}

TEST_CASE("spec validation names the field") {
    try {
        DegradationSpec::from_json_text(R"({"rates":{"garble":1.5}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.field()).find("garble") != std::string::npos);
    }
    CHECK_THROWS_AS(DegradationSpec::from_json_text(R"({"rates":{"nope":0.5}})"), ValidationError);
    const auto s = DegradationSpec::from_json_text(R"({"rates":{"garble":0.25},"rng_seed":9})");
    CHECK(s.rates.at(ErrorClass::garble) == 0.25);
    CHECK(DegradationSpec::from_json_text(s.to_json_text()).rng_seed == 9);
}

TEST_CASE("degrade requires a seed corpus") {
    CHECK_THROWS_AS(degrade(make_corpus({}, Source::crawl), DegradationSpec{}), ValidationError);
}
