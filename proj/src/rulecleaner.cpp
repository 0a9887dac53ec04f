#include "websft/rulecleaner.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "websft/errors.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFullWidthComma = "\xEF\xBC\x8C";  // ，
constexpr std::string_view kApprox = "\xE2\x89\x88";          // ≈

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Rule> default_rules() {
    return {
        {std::string(RuleRegistry::kExtractSolution), "solution template marker", "text from the last marker",
         RuleScope::answer},
        {std::string(RuleRegistry::kFixFractions), "NUM1\\nNUM2", "NUM1/NUM2", RuleScope::both},
        {std::string(RuleRegistry::kFixEquations), ",= ，= ,≈ ，≈", "= ≈", RuleScope::answer},
    };
}

}  // namespace

void ChangeSet::append(const ChangeSet& other) {
    edits.insert(edits.end(), other.edits.begin(), other.edits.end());
}

std::vector<SolutionMarker> default_solution_markers() {
    return {
        {"试题解析：", false}, {"试题解析:", false}, {"[详解]", false},
        {"【详解】", false},   {"解：", true},       {"解:", true},
    };
}

RuleRegistry RuleRegistry::defaults() {
    RuleRegistry r;
    r.rules_ = default_rules();
    r.markers_ = default_solution_markers();
    return r;
}

RuleRegistry RuleRegistry::from_json_text(std::string_view json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (!j.is_object()) throw ValidationError("rules", "rule registry must be a JSON object");
    RuleRegistry r = defaults();
    if (auto it = j.find("rules"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("rules", "rules must be an array of rule ids");
        std::vector<Rule> selected;
        const auto all = default_rules();
        for (const auto& id : *it) {
            if (!id.is_string()) throw ValidationError("rules", "rule ids must be strings");
            auto found = std::find_if(all.begin(), all.end(), [&](const Rule& x) { return x.id == id.get<std::string>(); });
            if (found == all.end()) throw ValidationError("rules", "unknown rule '" + id.get<std::string>() + "'");
            if (std::any_of(selected.begin(), selected.end(), [&](const Rule& x) { return x.id == found->id; })) {
                throw ValidationError("rules", "duplicate rule '" + found->id + "'");
            }
            selected.push_back(*found);
        }
        r.rules_ = std::move(selected);
    }
    if (auto it = j.find("solution_markers"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("solution_markers", "solution_markers must be an array");
        r.markers_.clear();
        for (const auto& m : *it) {
            if (m.is_string()) {
                r.markers_.push_back({m.get<std::string>(), false});
            } else if (m.is_object() && m.contains("text") && m["text"].is_string()) {
                r.markers_.push_back({m["text"].get<std::string>(), m.value("keep", false)});
            } else {
                throw ValidationError("solution_markers", "marker must be a string or {text, keep}");
            }
            if (r.markers_.back().text.empty()) throw ValidationError("solution_markers", "empty marker");
        }
    }
    return r;
}

RuleRegistry RuleRegistry::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read rule registry: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

bool RuleRegistry::enabled(std::string_view id) const {
    return std::any_of(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.id == id; });
}

namespace {

// Byte offset where the extracted solution starts, or 0 when no marker.
std::size_t solution_cut(std::string_view answer, const std::vector<SolutionMarker>& markers) {
    std::size_t best_pos = std::string_view::npos;
    const SolutionMarker* best = nullptr;
    for (const auto& m : markers) {
        const auto pos = answer.rfind(m.text);
        if (pos == std::string_view::npos) continue;
        if (best == nullptr || pos > best_pos || (pos == best_pos && m.text.size() > best->text.size())) {
            best_pos = pos;
            best = &m;
        }
    }
    if (best == nullptr) return 0;
    return best->keep ? best_pos : best_pos + best->text.size();
}

}  // namespace

std::string extract_solution(std::string_view answer, const std::vector<SolutionMarker>& markers) {
    return std::string(answer.substr(solution_cut(answer, markers)));
}

std::string extract_solution(std::string_view answer) {
    static const auto markers = default_solution_markers();
    return extract_solution(answer, markers);
}

std::pair<std::string, ChangeSet> fix_fractions(std::string_view text, Field field) {
    std::string out(text);
    ChangeSet cs;
    for (std::size_t i = 1; i + 1 < out.size(); ++i) {
        if (out[i] == '\n' && is_digit(out[i - 1]) && is_digit(out[i + 1])) {
            out[i] = '/';
            cs.edits.push_back({std::string(RuleRegistry::kFixFractions), field, i, i + 1, "\n", "/"});
        }
    }
    return {std::move(out), std::move(cs)};
}

std::pair<std::string, ChangeSet> fix_equations(std::string_view text, Field field) {
    std::string out;
    out.reserve(text.size());
    ChangeSet cs;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool eq = text[i] == '=';
        const bool approx = text.substr(i).starts_with(kApprox);
        if (eq || approx) {
            std::size_t start = out.size();
            for (;;) {
                std::string_view head(out.data(), start);
                if (head.ends_with(',')) {
                    start -= 1;
                } else if (head.ends_with(kFullWidthComma)) {
                    start -= kFullWidthComma.size();
                } else {
                    break;
                }
            }
            if (start != out.size()) {
                cs.edits.push_back(
                    {std::string(RuleRegistry::kFixEquations), field, start, out.size(), out.substr(start), ""});
                out.resize(start);
            }
            const std::size_t len = eq ? 1 : kApprox.size();
            out.append(text.substr(i, len));
            i += len;
        } else {
            out.push_back(text[i++]);
        }
    }
    return {std::move(out), std::move(cs)};
}

std::pair<Record, ChangeSet> clean(const Record& record, const RuleRegistry& registry) {
    Record out = record;
    out.source = Source::cleaned;
    ChangeSet cs;
    cs.record_id = record.id;

    if (registry.enabled(RuleRegistry::kExtractSolution)) {
        const auto cut = solution_cut(out.answer, registry.markers());
        if (cut > 0) {
            cs.edits.push_back({std::string(RuleRegistry::kExtractSolution), Field::answer, 0, cut,
                                out.answer.substr(0, cut), ""});
            out.answer.erase(0, cut);
        }
    }
    if (registry.enabled(RuleRegistry::kFixFractions)) {
        auto [a, ca] = fix_fractions(out.answer, Field::answer);
        out.answer = std::move(a);
        cs.append(ca);
    }
    if (registry.enabled(RuleRegistry::kFixEquations)) {
        auto [a, ca] = fix_equations(out.answer, Field::answer);
        out.answer = std::move(a);
        cs.append(ca);
    }
    if (registry.enabled(RuleRegistry::kFixFractions)) {
        auto [q, cq] = fix_fractions(out.question, Field::question);
        out.question = std::move(q);
        cs.append(cq);
    }
    return {std::move(out), std::move(cs)};
}

Record replay_changes(const Record& input, const ChangeSet& changes) {
    Record out = input;
    out.source = Source::cleaned;
    for (const auto& e : changes.edits) {
        std::string& s = e.field == Field::question ? out.question : out.answer;
        if (e.span_start > e.span_end || e.span_end > s.size() ||
            s.compare(e.span_start, e.span_end - e.span_start, e.before) != 0) {
            throw ValidationError(input.id, "change set does not apply to record '" + input.id + "'");
        }
        s.replace(e.span_start, e.span_end - e.span_start, e.after);
    }
    return out;
}

std::string serialize_changeset(const ChangeSet& cs) {
    ordered_json j;
    j["id"] = cs.record_id;
    j["edits"] = ordered_json::array();
    for (const auto& e : cs.edits) {
        ordered_json ej;
        ej["rule"] = e.rule_id;
        ej["field"] = to_string(e.field);
        ej["span_start"] = e.span_start;
        ej["span_end"] = e.span_end;
        ej["before"] = e.before;
        ej["after"] = e.after;
        j["edits"].push_back(std::move(ej));
    }
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace websft
