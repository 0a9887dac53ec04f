#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace websft {

enum class Source { seed, crawl, cleaned };

std::string_view to_string(Source s) noexcept;
std::optional<Source> parse_source(std::string_view s) noexcept;

// One math problem.
struct Record {
    std::string id;
    std::string question;
    std::string answer;
    Source source = Source::seed;
    std::map<std::string, std::string> meta;

    bool operator==(const Record&) const = default;
};

// Ordered collection of records sharing one source tag. Ids are unique.
struct Corpus {
    std::vector<Record> records;
    std::string provenance;
    Source source = Source::seed;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    const Record* find(std::string_view id) const;
};

struct IngestResult {
    Corpus corpus;
    std::size_t skipped = 0;
};

// Reads a line-delimited JSON corpus. Malformed lines are skipped with a
// diagnostic on stderr. Throws IoError if the file cannot be read and
// ValidationError (field = offending id) on a duplicate id.
IngestResult ingest(const std::filesystem::path& path, Source source);

// Parses one corpus line. Returns nullopt for anything that is not a valid
// record: bad JSON, missing or non-string keys, blank question or answer.
std::optional<Record> parse_record_line(std::string_view line, Source source);

// Serializes with keys in the order id, question, answer, meta. `meta` is
// omitted when empty.
std::string serialize_record(const Record& r);
void write_corpus(std::ostream& out, const Corpus& c);
void write_corpus(const std::filesystem::path& path, const Corpus& c);

// Builds a corpus from records after checking the record and corpus
// invariants; throws ValidationError.
Corpus make_corpus(std::vector<Record> records, Source source, std::string provenance = {});

// Order-sensitive digest of the serialized records.
std::string corpus_digest(const Corpus& c);

}  // namespace websft
