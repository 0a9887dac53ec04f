#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "websft/corpus.hpp"

namespace websft {

// OCR-style error classes injected into clean records.
enum class ErrorClass {
    linebreak_drop,      // "\n" between solution lines removed
    fraction_flatten,    // \frac{X}{Y} -> "X\nY" or "XY"
    superscript_drop,    // B^{E} -> BE, B_{E} -> BE
    symbol_substitute,   // × -> X, + -> 十
    question_info_drop,  // a number deleted from the question
    garble,              // random span replaced by noise
};

// Application order within a field.
inline constexpr ErrorClass kErrorClassOrder[] = {
    ErrorClass::linebreak_drop,     ErrorClass::fraction_flatten,   ErrorClass::superscript_drop,
    ErrorClass::symbol_substitute,  ErrorClass::question_info_drop, ErrorClass::garble,
};

std::string_view to_string(ErrorClass c) noexcept;
std::optional<ErrorClass> parse_error_class(std::string_view s) noexcept;

struct DegradationSpec {
    static constexpr double kDefaultRate = 0.3;

    // Enabled classes and their per-field application probability.
    std::map<ErrorClass, double> rates;
    std::uint64_t rng_seed = 0;
    // Probability that a flattened fraction keeps a line break ("X\nY").
    double fraction_newline_prob = 0.5;
    std::vector<std::pair<std::string, std::string>> substitutions{{"×", "X"}, {"+", "十"}};
    std::size_t garble_min = 5;
    std::size_t garble_max = 20;

    // Throws ValidationError naming the offending field.
    void validate() const;

    static DegradationSpec from_json_text(std::string_view json_text);
    static DegradationSpec load(const std::filesystem::path& path);
    std::string to_json_text() const;
};

enum class Field { question, answer };
std::string_view to_string(Field f) noexcept;

// One edit. Offsets are UTF-8 byte offsets into the field text as it stood
// when the edit was applied; replaying entries in order reproduces the
// degraded record.
struct ManifestEntry {
    std::string id;
    Field field = Field::answer;
    ErrorClass cls = ErrorClass::garble;
    std::size_t span_start = 0;
    std::size_t span_end = 0;
    std::string replacement;

    bool operator==(const ManifestEntry&) const = default;
};

struct DegradeResult {
    Corpus corpus;  // source = crawl, ids preserved
    std::vector<ManifestEntry> manifest;
    std::map<ErrorClass, std::size_t> applied;  // fields touched, per class
    std::map<ErrorClass, std::size_t> skipped;  // sampled but no site
};

DegradeResult degrade(const Corpus& corpus, const DegradationSpec& spec, unsigned workers = 1);

// Degrades one record with its own stream; exposed for augmentation.
Record degrade_record(const Record& r, const DegradationSpec& spec, std::vector<ManifestEntry>* manifest = nullptr,
                      std::map<ErrorClass, std::size_t>* applied = nullptr,
                      std::map<ErrorClass, std::size_t>* skipped = nullptr);

// Applies the manifest entries for `r.id` to a copy of `r`.
Record replay_manifest(const Record& r, const std::vector<ManifestEntry>& manifest);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& manifest);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace websft
