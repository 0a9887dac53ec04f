#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "websft/corpus.hpp"
#include "websft/degrader.hpp"

namespace websft {

enum class RuleScope { question, answer, both };

struct Rule {
    std::string id;
    std::string pattern;
    std::string replacement;
    RuleScope scope = RuleScope::answer;
};

// A solution template marker. `keep` retains the marker text in the output
// ("解：" opens a solution and stays); otherwise extraction starts after it.
struct SolutionMarker {
    std::string text;
    bool keep = false;
};

struct Edit {
    std::string rule_id;
    Field field = Field::answer;
    std::size_t span_start = 0;  // UTF-8 byte offsets in the text at application time
    std::size_t span_end = 0;
    std::string before;
    std::string after;

    bool operator==(const Edit&) const = default;
};

struct ChangeSet {
    std::string record_id;
    std::vector<Edit> edits;

    bool empty() const noexcept { return edits.empty(); }
    void append(const ChangeSet& other);
};

class RuleRegistry {
public:
    static constexpr std::string_view kExtractSolution = "extract_solution";
    static constexpr std::string_view kFixFractions = "fix_fractions";
    static constexpr std::string_view kFixEquations = "fix_equations";

    // The three baseline rules with the default marker list.
    static RuleRegistry defaults();
    // JSON: {"rules": [ids...], "solution_markers": [{"text":..., "keep":bool}...]}.
    // Missing keys keep their defaults.
    static RuleRegistry from_json_text(std::string_view json_text);
    static RuleRegistry load(const std::filesystem::path& path);

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    const std::vector<SolutionMarker>& markers() const noexcept { return markers_; }
    bool enabled(std::string_view id) const;

private:
    std::vector<Rule> rules_;
    std::vector<SolutionMarker> markers_;
};

std::vector<SolutionMarker> default_solution_markers();

// Returns the text from the last solution marker onward (marker kept or
// dropped per its flag); the input unchanged when no marker occurs.
std::string extract_solution(std::string_view answer, const std::vector<SolutionMarker>& markers);
std::string extract_solution(std::string_view answer);

// digit "\n" digit -> digit "/" digit, everywhere, with no context check.
std::pair<std::string, ChangeSet> fix_fractions(std::string_view text, Field field = Field::answer);

// A run of "，" or "," directly before "=" or "≈" is deleted.
std::pair<std::string, ChangeSet> fix_equations(std::string_view text, Field field = Field::answer);

// extract_solution -> fix_fractions -> fix_equations on the answer,
// fix_fractions on the question. Output source = cleaned.
std::pair<Record, ChangeSet> clean(const Record& record, const RuleRegistry& registry = RuleRegistry::defaults());

// Replays edits in order; throws ValidationError when an edit's `before`
// does not match the text at its span.
Record replay_changes(const Record& input, const ChangeSet& changes);

std::string serialize_changeset(const ChangeSet& cs);

}  // namespace websft
