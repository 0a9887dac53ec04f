#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "websft/corpus.hpp"
#include "websft/errors.hpp"

using namespace websft;
namespace fs = std::filesystem;

namespace {

fs::path write_tmp(const std::string& name, const std::string& body) {
    const auto p = fs::temp_directory_path() / ("websft_corpus_" + name);
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

}  // namespace

TEST_CASE("ingest") {
    SUBCASE("two valid lines") {
        const auto p = write_tmp("two.jsonl", R"({"id":"a","question":"q1","answer":"a1"}
{"id":"b","question":"q2","answer":"a2","meta":{"grade":3}}
)");
        const auto r = ingest(p, Source::seed);
        CHECK(r.corpus.size() == 2);
        CHECK(r.skipped == 0);
        CHECK(r.corpus.records[1].meta.at("grade") == "3");
        CHECK(r.corpus.source == Source::seed);
    }
    SUBCASE("malformed line skipped") {
        const auto p = write_tmp("bad.jsonl", "{\"id\":\"a\",\"question\":\"q\",\"answer\":\"a\"}\n{oops\n");
        const auto r = ingest(p, Source::crawl);
        CHECK(r.corpus.size() == 1);
        CHECK(r.skipped == 1);
    }
    SUBCASE("blank fields are malformed") {
        const auto p = write_tmp("blank.jsonl", "{\"id\":\"a\",\"question\":\" \",\"answer\":\"a\"}\n");
        CHECK(ingest(p, Source::seed).skipped == 1);
    }
    SUBCASE("empty file") {
        const auto r = ingest(write_tmp("empty.jsonl", ""), Source::seed);
        CHECK(r.corpus.empty());
        CHECK(r.skipped == 0);
    }
    SUBCASE("duplicate id names the id") {
        const auto p = write_tmp("dup.jsonl", "{\"id\":\"a\",\"question\":\"q\",\"answer\":\"a\"}\n"
                                              "{\"id\":\"a\",\"question\":\"q2\",\"answer\":\"a2\"}\n");
        try {
            ingest(p, Source::seed);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "a");
        }
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(ingest("/nonexistent/x.jsonl", Source::seed), IoError); }
}

TEST_CASE("serialize round trip") {
    Record r{"id1", "问题\n第二行", "答：5", Source::seed, {{"grade", "2"}}};
    const auto line = serialize_record(r);
    CHECK(line.find("\"id\":\"id1\"") == 1);
    const auto back = parse_record_line(line, Source::seed);
    REQUIRE(back);
    CHECK(*back == r);
    CHECK(serialize_record(Record{"x", "q", "a", Source::seed, {}}).find("meta") == std::string::npos);
}

TEST_CASE("corpus digest is order sensitive") {
    const auto a = make_corpus({{"1", "q", "a", Source::seed, {}}, {"2", "q", "b", Source::seed, {}}}, Source::seed);
    const auto b = make_corpus({{"2", "q", "b", Source::seed, {}}, {"1", "q", "a", Source::seed, {}}}, Source::seed);
    CHECK(corpus_digest(a) == corpus_digest(a));
    CHECK(corpus_digest(a) != corpus_digest(b));
    CHECK(a.find("2")->answer == "b");
    CHECK(a.find("3") == nullptr);
}
