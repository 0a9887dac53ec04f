#include "websft/corpus.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/text.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Source s) noexcept {
    switch (s) {
        case Source::seed: return "seed";
        case Source::crawl: return "crawl";
        case Source::cleaned: return "cleaned";
    }
    return "seed";
}

std::optional<Source> parse_source(std::string_view s) noexcept {
    if (s == "seed") return Source::seed;
    if (s == "crawl") return Source::crawl;
    if (s == "cleaned") return Source::cleaned;
    return std::nullopt;
}

const Record* Corpus::find(std::string_view id) const {
    for (const auto& r : records) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

std::optional<Record> parse_record_line(std::string_view line, Source source) {
    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!j.is_object()) return std::nullopt;

    auto str_field = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };
    auto id = str_field("id");
    auto question = str_field("question");
    auto answer = str_field("answer");
    if (!id || !question || !answer) return std::nullopt;
    if (id->empty() || text::trim(*question).empty() || text::trim(*answer).empty()) {
        return std::nullopt;
    }

    Record r{std::move(*id), std::move(*question), std::move(*answer), source, {}};
    if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) return std::nullopt;
        for (const auto& [k, v] : it->items()) {
            if (v.is_string()) {
                r.meta[k] = v.get<std::string>();
            } else if (v.is_primitive() && !v.is_null()) {
                r.meta[k] = v.dump();
            } else {
                return std::nullopt;
            }
        }
    }
    return r;
}

IngestResult ingest(const std::filesystem::path& path, Source source) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file: " + path.string());

    IngestResult result;
    result.corpus.provenance = path.string();
    result.corpus.source = source;
    std::unordered_set<std::string> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        auto rec = parse_record_line(line, source);
        if (!rec) {
            ++result.skipped;
            std::cerr << path.string() << ":" << line_no << ": skipping malformed record\n";
            continue;
        }
        if (!seen.insert(rec->id).second) {
            throw ValidationError(rec->id, path.string() + ":" + std::to_string(line_no) +
                                               ": duplicate record id '" + rec->id + "'");
        }
        result.corpus.records.push_back(std::move(*rec));
    }
    if (in.bad()) throw IoError("error while reading " + path.string());
    return result;
}

std::string serialize_record(const Record& r) {
    ordered_json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["answer"] = r.answer;
    if (!r.meta.empty()) {
        ordered_json meta = ordered_json::object();
        for (const auto& [k, v] : r.meta) meta[k] = v;
        j["meta"] = std::move(meta);
    }
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void write_corpus(std::ostream& out, const Corpus& c) {
    for (const auto& r : c.records) out << serialize_record(r) << '\n';
}

void write_corpus(const std::filesystem::path& path, const Corpus& c) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write corpus file: " + path.string());
    write_corpus(out, c);
    if (!out) throw IoError("error while writing " + path.string());
}

Corpus make_corpus(std::vector<Record> records, Source source, std::string provenance) {
    std::unordered_set<std::string_view> seen;
    for (auto& r : records) {
        if (r.id.empty()) throw ValidationError("id", "record with empty id");
        if (text::trim(r.question).empty() || text::trim(r.answer).empty()) {
            throw ValidationError(r.id, "record '" + r.id + "' has a blank question or answer");
        }
        if (!seen.insert(r.id).second) {
            throw ValidationError(r.id, "duplicate record id '" + r.id + "'");
        }
        r.source = source;
    }
    return Corpus{std::move(records), std::move(provenance), source};
}

std::string corpus_digest(const Corpus& c) {
    std::uint64_t h = text::fnv1a64(to_string(c.source));
    for (const auto& r : c.records) {
        h = text::fnv1a64(serialize_record(r), h);
        h = text::fnv1a64("\n", h);
    }
    return text::hex64(h);
}

}  // namespace websft
