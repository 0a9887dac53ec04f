#include "doctest.h"

#include <fstream>
#include <random>

#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/evaluator.hpp"

using namespace websft;

TEST_CASE("hand-labelled fixture decides as labelled") {
    std::ifstream in(std::string(WEBSFT_TEST_DATA_DIR) + "/fixtures/eval_fixture.jsonl");
    REQUIRE(in);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto v = grade_one(j["id"], j["response"].get<std::string>(), j["gold"].get<std::string>());
        INFO(j["id"].get<std::string>() << " " << j["note"].get<std::string>() << " reason=" << v.reason);
        CHECK(to_string(v.decision) == j["expected"].get<std::string>());
        ++n;
    }
    CHECK(n == 40);
}

TEST_CASE("number forms") {
    CHECK(*extract_answer("答：3/4").value == Rational(3, 4));
    CHECK(extract_answer("答：3/4").form == AnswerForm::fraction);
    CHECK(*extract_answer("答：$\\dfrac{3}{4}$").value == Rational(3, 4));
    CHECK(*extract_answer("答：75%").value == Rational(3, 4));
    CHECK(*extract_answer("答：0.75").value == Rational(3, 4));
    CHECK(extract_answer("答：0.750").shown_decimals == 3);
    CHECK(*extract_answer("答：2又1/4").value == Rational(9, 4));
    CHECK(*extract_answer("答：-2又1/4").value == Rational(-9, 4));
    CHECK(*extract_answer("答：1,234,567").value == Rational(1234567));
    CHECK(*extract_answer("答：007").value == Rational(7));
    CHECK(*extract_answer("答：５６").value == Rational(56));
    CHECK(*extract_answer("3-5").value == Rational(5));
    CHECK(extract_answer("答：约12").approximate);
    CHECK_FALSE(extract_answer("答：12").approximate);
}

TEST_CASE("last marker wins") {
    const auto a = extract_answer("答：第一问是3。解：……答：第二问是9。");
    CHECK(*a.value == Rational(9));
}

TEST_CASE("units") {
    CHECK(extract_answer("答：5千克").unit == std::optional<std::string>("千克"));
    CHECK(extract_answer("答：5kg").unit == std::optional<std::string>("kg"));
    CHECK(extract_answer("答：5kg").value.has_value());
    CHECK(equivalent(extract_answer("5kg"), extract_answer("5公斤")));
    CHECK_FALSE(equivalent(extract_answer("5米"), extract_answer("5千米")));
    CHECK(extract_answer("答：2000（只）").unit == std::optional<std::string>("只"));
}

TEST_CASE("tolerance only for approximate answers") {
    CHECK(equivalent(extract_answer("≈3.1415927"), extract_answer("3.14159265")));
    CHECK_FALSE(equivalent(extract_answer("3.1415927"), extract_answer("3.14159265")));
}

TEST_CASE("rounding rule needs two places and a non-terminating fraction") {
    CHECK_FALSE(equivalent(extract_answer("0.3"), extract_answer("1/3")));
    CHECK(equivalent(extract_answer("0.33"), extract_answer("1/3")));
    CHECK_FALSE(equivalent(extract_answer("0.13"), extract_answer("1/8")));
    CHECK(equivalent(extract_answer("33.33%"), extract_answer("1/3")));
}

TEST_CASE("symbolic normalization") {
    CHECK(normalize_symbolic(" (2$^{n}$+1)。") == "2^n+1");
    CHECK(normalize_symbolic("（a＋b）") == "a+b");
    CHECK(normalize_symbolic("") == "");
}

TEST_CASE("dataset grading") {
    Corpus gold = make_corpus({Record{"g1", "q", "答：5", Source::seed, {{"grade", "3"}}}}, Source::seed, "t");
    const auto r = grade_dataset({{"g1", "答：5"}, {"g1", "答：6"}, {"g1", "  "}}, gold);
    REQUIRE(r.verdicts.size() == 3);
    CHECK(r.verdicts[0].decision == Decision::correct);
    CHECK(r.verdicts[1].decision == Decision::incorrect);
    CHECK(r.verdicts[2].decision == Decision::unparseable);
    CHECK(r.n == 3);
    CHECK(r.correct == 1);
    CHECK(r.unparseable == 1);
    CHECK(r.per_grade.at("G3").n == 3);
    CHECK_THROWS_AS(grade_dataset({{"nope", "答：5"}}, gold), ValidationError);
    CHECK_FALSE(grade_dataset({}, gold).accuracy().has_value());
}

TEST_CASE("final_answer meta overrides the answer text") {
    Corpus gold = make_corpus({Record{"g1", "q", "long solution 3+4=7", Source::seed, {{"final_answer", "8"}}}},
                              Source::seed, "t");
    CHECK(grade_dataset({{"g1", "8"}}, gold).correct == 1);
}

TEST_CASE("parallel grading matches serial") {
    std::vector<Record> recs;
    std::vector<Prediction> preds;
    for (int i = 0; i < 200; ++i) {
        recs.push_back({"r" + std::to_string(i), "q", std::to_string(i % 7), Source::seed, {}});
        preds.push_back({"r" + std::to_string(i), "答：" + std::to_string(i % 5)});
    }
    const Corpus gold = make_corpus(recs, Source::seed, "t");
    const auto a = grade_dataset(preds, gold, {}, 1e-6, 1);
    const auto b = grade_dataset(preds, gold, {}, 1e-6, 4);
    CHECK(a.correct == b.correct);
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) CHECK(serialize_verdict(a.verdicts[i]) == serialize_verdict(b.verdicts[i]));
}
