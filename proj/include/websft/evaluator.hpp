#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "websft/corpus.hpp"

namespace websft {

using Rational = boost::multiprecision::cpp_rational;

enum class AnswerForm { integer, decimal, fraction, percent, mixed_number, symbolic };
std::string_view to_string(AnswerForm f) noexcept;

struct ExtractedAnswer {
    std::string raw_span;
    std::optional<Rational> value;
    std::optional<std::string> unit;
    AnswerForm form = AnswerForm::symbolic;
    // Fractional digits as written ("14.40" -> 2); 0 for non-decimals.
    int shown_decimals = 0;
    // Explicitly approximate ("≈", "约", trailing ellipsis).
    bool approximate = false;
};

struct ExtractorConfig {
    // Earlier entries are tried first only as a tie-break; the marker that
    // occurs last in the response wins.
    std::vector<std::string> answer_markers{"故答案为：", "故答案为:", "答案为：", "答案为:", "答案为",
                                            "答案是",     "答：",       "答:"};
    std::vector<std::string> units;  // empty = built-in list
};

ExtractedAnswer extract_answer(std::string_view response, const ExtractorConfig& config = {});

// Exact rational comparison, with two concessions: an explicitly approximate
// side compares within relative tolerance, and a decimal written to k >= 2
// places matches a non-terminating fraction it rounds or truncates from.
bool equivalent(const ExtractedAnswer& pred, const ExtractedAnswer& gold, double tol = 1e-6);

// Symbolic-form key: full-width folded, whitespace and '$' removed, trailing
// punctuation and outer parentheses stripped.
std::string normalize_symbolic(std::string_view s);

enum class Decision { correct, incorrect, unparseable };
std::string_view to_string(Decision d) noexcept;

struct Verdict {
    std::string prediction_id;
    Decision decision = Decision::unparseable;
    std::string reason;
    ExtractedAnswer predicted;
    std::optional<ExtractedAnswer> gold;
};

// Decides one prediction against a gold answer text.
Verdict grade_one(std::string id, std::string_view response, std::string_view gold_text,
                  const ExtractorConfig& config = {}, double tol = 1e-6);

struct Prediction {
    std::string id;
    std::string response;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);

struct GroupStats {
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy() const noexcept { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

struct GradeReport {
    std::vector<Verdict> verdicts;  // in prediction order
    std::size_t n = 0;
    std::size_t correct = 0;
    std::size_t unparseable = 0;
    std::map<std::string, GroupStats> per_grade;  // keyed "G<grade>"
    std::optional<double> accuracy() const noexcept {
        if (n == 0) return std::nullopt;
        return static_cast<double>(correct) / n;
    }
};

// Gold text for a record: meta "final_answer" when present, else the answer.
GradeReport grade_dataset(const std::vector<Prediction>& predictions, const Corpus& gold,
                          const ExtractorConfig& config = {}, double tol = 1e-6, unsigned workers = 1);

std::string serialize_verdict(const Verdict& v);
std::string report_json(const GradeReport& r, const std::string& verdicts_path);
std::string report_table(const GradeReport& r);

std::string rational_to_string(const Rational& r);

}  // namespace websft
