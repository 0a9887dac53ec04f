#include "websft/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/text.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using boost::multiprecision::cpp_int;

std::string_view to_string(AnswerForm f) noexcept {
    switch (f) {
        case AnswerForm::integer: return "integer";
        case AnswerForm::decimal: return "decimal";
        case AnswerForm::fraction: return "fraction";
        case AnswerForm::percent: return "percent";
        case AnswerForm::mixed_number: return "mixed_number";
        case AnswerForm::symbolic: return "symbolic";
    }
    return "symbolic";
}

std::string_view to_string(Decision d) noexcept {
    switch (d) {
        case Decision::correct: return "correct";
        case Decision::incorrect: return "incorrect";
        case Decision::unparseable: return "unparseable";
    }
    return "unparseable";
}

std::string rational_to_string(const Rational& r) {
    const cpp_int num = boost::multiprecision::numerator(r);
    const cpp_int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

namespace {

using U32 = std::u32string;
using U32View = std::u32string_view;

const std::vector<std::string>& builtin_units() {
    static const std::vector<std::string> units = [] {
        std::vector<std::string> u = {
            "平方千米", "平方厘米", "平方分米", "平方毫米", "平方米", "立方厘米", "立方分米", "立方米", "千米",
            "厘米",     "分米",     "毫米",     "公里",     "千克",   "公斤",     "毫升",     "小时",   "分钟",
            "公顷",     "米",       "克",       "吨",       "升",     "只",       "段",       "个",     "人",
            "本",       "棵",       "辆",       "台",       "页",     "岁",       "次",       "件",     "条",
            "块",       "名",       "箱",       "包",       "袋",     "瓶",       "张",       "支",     "根",
            "头",       "匹",       "元",       "角",       "分",     "秒",       "天",       "年",     "月",
            "周",       "度",       "倍",       "份",       "组",     "盒",       "把",       "朵",     "颗",
            "粒",       "双",       "套",       "间",       "层",     "道",       "题",       "场",     "户",
            "座",       "架",       "艘",       "℃",        "°",      "km",       "cm",       "mm",     "dm",
            "kg",       "mL",       "ml",       "min",      "m",      "g",        "t",        "L",      "h",
            "s",
        };
        std::stable_sort(u.begin(), u.end(), [](const std::string& a, const std::string& b) {
            return text::utf8_length(a) > text::utf8_length(b);
        });
        return u;
    }();
    return units;
}

const std::unordered_map<std::string, std::string>& unit_synonyms() {
    static const std::unordered_map<std::string, std::string> syn = {
        {"公斤", "千克"}, {"kg", "千克"}, {"公里", "千米"}, {"km", "千米"}, {"m", "米"},     {"cm", "厘米"},
        {"mm", "毫米"},   {"dm", "分米"}, {"g", "克"},      {"t", "吨"},    {"L", "升"},     {"mL", "毫升"},
        {"ml", "毫升"},   {"h", "小时"},  {"min", "分钟"},  {"s", "秒"},
    };
    return syn;
}

std::string canonical_unit(const std::string& u) {
    const auto& syn = unit_synonyms();
    auto it = syn.find(u);
    return it == syn.end() ? u : it->second;
}

U32 fold(std::string_view s) {
    U32 out = text::decode_utf8(s);
    for (auto& c : out) c = text::fold_width(c);
    return out;
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_letter(char32_t c) { return text::is_ascii_letter(c); }

cpp_int parse_digits(U32View digits) {
    std::string s;
    for (char32_t c : digits) {
        if (is_digit(c)) s.push_back(static_cast<char>(c));
    }
    const auto nz = s.find_first_not_of('0');
    if (nz == std::string::npos) return 0;
    // Leading zeros would select octal parsing.
    return cpp_int(s.substr(nz));
}

cpp_int pow10(int k) {
    cpp_int r = 1;
    for (int i = 0; i < k; ++i) r *= 10;
    return r;
}

struct Number {
    Rational value;
    std::size_t end = 0;  // one past the last consumed code point
    int decimals = 0;
    bool has_point = false;
};

// Unsigned decimal at `i` with optional thousands separators.
std::optional<Number> read_decimal(U32View s, std::size_t i) {
    if (i >= s.size() || !is_digit(s[i])) return std::nullopt;
    std::size_t j = i;
    while (j < s.size() && is_digit(s[j])) ++j;
    // 1-3 leading digits followed by ",ddd" groups.
    if (j - i <= 3) {
        std::size_t k = j;
        bool grouped = false;
        while (k + 3 < s.size() + 0 && s[k] == U',' && k + 3 < s.size() + 1 && is_digit(s[k + 1]) &&
               is_digit(s[k + 2]) && is_digit(s[k + 3]) && (k + 4 >= s.size() || !is_digit(s[k + 4]))) {
            k += 4;
            grouped = true;
        }
        if (grouped) j = k;
    }
    Number n;
    cpp_int int_part = parse_digits(s.substr(i, j - i));
    n.value = Rational(int_part);
    if (j + 1 < s.size() && s[j] == U'.' && is_digit(s[j + 1])) {
        std::size_t k = j + 1;
        while (k < s.size() && is_digit(s[k])) ++k;
        const int decimals = static_cast<int>(k - j - 1);
        n.value += Rational(parse_digits(s.substr(j + 1, k - j - 1)), pow10(decimals));
        n.decimals = decimals;
        n.has_point = true;
        j = k;
    }
    n.end = j;
    return n;
}

struct Token {
    std::size_t start = 0;
    std::size_t end = 0;
    Rational value;
    AnswerForm form = AnswerForm::integer;
    int decimals = 0;
};

bool starts_with(U32View s, std::size_t i, U32View prefix) { return s.substr(i).starts_with(prefix); }

// \frac{a}{b} (or \dfrac, \tfrac) at i. nullopt when absent; a token with
// end set but `zero_den` when the denominator is zero.
struct LatexFrac {
    Rational value;
    std::size_t end = 0;
    bool zero_den = false;
};

std::optional<LatexFrac> read_latex_frac(U32View s, std::size_t i) {
    static constexpr std::array<U32View, 3> kCmds = {U"\\dfrac", U"\\tfrac", U"\\frac"};
    for (auto cmd : kCmds) {
        if (!starts_with(s, i, cmd)) continue;
        std::size_t j = i + cmd.size();
        auto group = [&](std::size_t& pos) -> std::optional<Number> {
            while (pos < s.size() && s[pos] == U' ') ++pos;
            if (pos >= s.size() || s[pos] != U'{') return std::nullopt;
            auto n = read_decimal(s, pos + 1);
            if (!n || n->end >= s.size() || s[n->end] != U'}') return std::nullopt;
            pos = n->end + 1;
            return n;
        };
        auto num = group(j);
        if (!num) return std::nullopt;
        auto den = group(j);
        if (!den) return std::nullopt;
        if (den->value == 0) return LatexFrac{0, j, true};
        return LatexFrac{num->value / den->value, j, false};
    }
    return std::nullopt;
}

bool opens_negative(U32View s, std::size_t sign_pos) {
    if (s[sign_pos] != U'-' && s[sign_pos] != U'−') return false;
    if (sign_pos == 0) return true;
    const char32_t prev = s[sign_pos - 1];
    return !(is_digit(prev) || is_letter(prev) || prev == U')' || prev == U'}' || prev == U']');
}

std::vector<Token> tokenize(U32View s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (auto lf = read_latex_frac(s, i)) {
            if (lf->zero_den) {
                i = lf->end;
                continue;
            }
            // Integer immediately before (only '$' between) makes a mixed number.
            if (!tokens.empty() && tokens.back().form == AnswerForm::integer) {
                std::size_t k = tokens.back().end;
                while (k < i && s[k] == U'$') ++k;
                if (k == i) {
                    Token& t = tokens.back();
                    t.value = t.value < 0 ? Rational(t.value - lf->value) : Rational(t.value + lf->value);
                    t.form = AnswerForm::mixed_number;
                    t.end = lf->end;
                    i = lf->end;
                    continue;
                }
            }
            tokens.push_back({i, lf->end, lf->value, AnswerForm::fraction, 0});
            i = lf->end;
            continue;
        }
        if (!is_digit(s[i])) {
            ++i;
            continue;
        }
        // Digits glued to a preceding letter or decimal point belong to
        // something else ("x2", ".5" handled as part of read_decimal).
        auto n = read_decimal(s, i);
        Token t{i, n->end, n->value, n->has_point ? AnswerForm::decimal : AnswerForm::integer, n->decimals};
        std::size_t j = n->end;
        if (j + 1 < s.size() && s[j] == U'/' && is_digit(s[j + 1])) {
            auto den = read_decimal(s, j + 1);
            if (den->value == 0) {
                i = den->end;
                continue;
            }
            t.value = n->value / den->value;
            t.form = AnswerForm::fraction;
            t.decimals = 0;
            j = den->end;
        }
        // "1又1/2" and "1又\frac{1}{2}"
        if (t.form == AnswerForm::integer && j < s.size() && s[j] == U'又') {
            if (auto lf = read_latex_frac(s, j + 1); lf && !lf->zero_den) {
                t.value += lf->value;
                t.form = AnswerForm::mixed_number;
                j = lf->end;
            } else if (auto a = read_decimal(s, j + 1); a && a->end + 1 < s.size() && s[a->end] == U'/' &&
                                                        is_digit(s[a->end + 1])) {
                auto b = read_decimal(s, a->end + 1);
                if (b->value != 0) {
                    t.value += a->value / b->value;
                    t.form = AnswerForm::mixed_number;
                    j = b->end;
                }
            }
        }
        if (j < s.size() && s[j] == U'%') {
            t.value /= 100;
            t.form = AnswerForm::percent;
            ++j;
        }
        if (i > 0 && opens_negative(s, i - 1)) {
            t.value = -t.value;
            t.start = i - 1;
        }
        t.end = j;
        tokens.push_back(std::move(t));
        i = j;
    }
    return tokens;
}

bool is_math_char(char32_t c) {
    if (is_digit(c) || is_letter(c)) return true;
    switch (c) {
        case U'.': case U'+': case U'-': case U'*': case U'/': case U'^': case U'(': case U')':
        case U'{': case U'}': case U'\\': case U'$': case U'=': case U'%': case U'_': case U' ':
        case U'[': case U']': case U'×': case U'÷': case U'−': case U'·':
            return true;
        default:
            return false;
    }
}

U32 strip_latex_commands(U32View s) {
    U32 out;
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == U'\\') {
            std::size_t j = i + 1;
            while (j < s.size() && is_letter(s[j])) ++j;
            i = j;
            continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

bool is_trailing_punct(char32_t c) {
    switch (c) {
        case U'.': case U',': case U';': case U':': case U'!': case U'?': case U' ': case U'\n': case U'\t':
        case U'\r': case U'。': case U'、': case U'…':
            return true;
        default:
            return false;
    }
}

U32View trim_punct(U32View s) {
    while (!s.empty() && (is_trailing_punct(s.back()) || s.back() == U' ')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == U' ' || s.front() == U'\n' || s.front() == U'\t')) s.remove_prefix(1);
    return s;
}

// Longest unit directly after position `i`, allowing spaces and an opening
// parenthesis in between.
std::optional<std::string> read_unit(U32View s, std::size_t i, const std::vector<std::string>& units) {
    while (i < s.size() && s[i] == U' ') ++i;
    if (i < s.size() && s[i] == U'(') ++i;
    for (const auto& u : units) {
        const U32 u32 = text::decode_utf8(u);
        if (!starts_with(s, i, u32)) continue;
        const std::size_t end = i + u32.size();
        // ASCII units must not run into more letters ("m" vs "max").
        if (is_letter(u32.back()) && end < s.size() && is_letter(s[end])) continue;
        return u;
    }
    return std::nullopt;
}

}  // namespace

std::string normalize_symbolic(std::string_view s) {
    U32 folded = fold(s);
    U32 kept;
    for (char32_t c : folded) {
        if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'$' || c == U'{' || c == U'}') continue;
        kept.push_back(c);
    }
    U32View v = kept;
    for (;;) {
        const std::size_t before = v.size();
        while (!v.empty() && is_trailing_punct(v.back())) v.remove_suffix(1);
        if (v.size() >= 2 && v.front() == U'(' && v.back() == U')') {
            v.remove_prefix(1);
            v.remove_suffix(1);
        }
        if (v.size() == before) break;
    }
    return text::encode_utf8(v);
}

ExtractedAnswer extract_answer(std::string_view response, const ExtractorConfig& config) {
    const U32 s = fold(response);
    const auto& units = config.units.empty() ? builtin_units() : config.units;

    // Segment after the last answer marker.
    std::size_t seg_start = 0;
    bool found = false;
    std::size_t best_end = 0;
    for (const auto& m : config.answer_markers) {
        const U32 mk = fold(m);
        if (mk.empty()) continue;
        const auto pos = s.rfind(mk);
        if (pos == U32::npos) continue;
        if (!found || pos > seg_start || (pos == seg_start && pos + mk.size() > best_end)) {
            seg_start = pos;
            best_end = pos + mk.size();
            found = true;
        }
    }
    const U32View seg = found ? U32View(s).substr(best_end) : U32View(s);

    ExtractedAnswer out;
    out.approximate = seg.find(U'≈') != U32View::npos || seg.find(U'约') != U32View::npos ||
                      seg.find(U'…') != U32View::npos || seg.find(U"...") != U32View::npos;

    const auto tokens = tokenize(seg);
    if (tokens.empty()) {
        out.form = AnswerForm::symbolic;
        out.raw_span = text::encode_utf8(trim_punct(seg));
        return out;
    }
    const Token& last = tokens.back();

    // Expression run around the last number, cut at its last '='.
    std::size_t lo = last.start;
    while (lo > 0 && is_math_char(seg[lo - 1])) --lo;
    std::size_t hi = last.end;
    while (hi < seg.size() && is_math_char(seg[hi])) ++hi;
    U32View run = seg.substr(lo, hi - lo);
    const std::size_t tok_in_run = last.start - lo;
    if (auto eq = run.substr(0, tok_in_run).rfind(U'='); eq != U32View::npos) {
        run = run.substr(eq + 1);
    }
    const std::size_t tok_off = last.start - (lo + (seg.substr(lo, hi - lo).size() - run.size()));
    run = trim_punct(run);

    // Letters other than LaTeX commands and a unit right after the number
    // mean the answer is an expression.
    U32 probe(run);
    const std::size_t tok_end_in_probe = tok_off + (last.end - last.start);
    auto unit = read_unit(seg, last.end, units);
    if (unit && tok_end_in_probe <= probe.size()) {
        const U32 u32 = text::decode_utf8(*unit);
        std::size_t k = tok_end_in_probe;
        while (k < probe.size() && (probe[k] == U' ' || probe[k] == U'(')) ++k;
        if (probe.compare(k, u32.size(), u32) == 0) probe.erase(k, u32.size());
    }
    const U32 bare = strip_latex_commands(probe);
    const bool symbolic = std::any_of(bare.begin(), bare.end(), is_letter);

    if (symbolic) {
        out.form = AnswerForm::symbolic;
        out.raw_span = text::encode_utf8(run);
        return out;
    }
    out.form = last.form;
    out.value = last.value;
    out.shown_decimals = last.decimals;
    out.raw_span = text::encode_utf8(seg.substr(last.start, last.end - last.start));
    out.unit = unit;
    return out;
}

namespace {

enum class Cmp { exact, rounded, tolerance, symbolic_equal, unit_conflict, value_mismatch, form_mismatch,
                 symbolic_mismatch };

bool equal_outcome(Cmp c) {
    return c == Cmp::exact || c == Cmp::rounded || c == Cmp::tolerance || c == Cmp::symbolic_equal;
}

std::string_view cmp_reason(Cmp c) {
    switch (c) {
        case Cmp::exact: return "exact_match";
        case Cmp::rounded: return "rounded_match";
        case Cmp::tolerance: return "within_tolerance";
        case Cmp::symbolic_equal: return "symbolic_match";
        case Cmp::unit_conflict: return "unit_conflict";
        case Cmp::value_mismatch: return "value_mismatch";
        case Cmp::form_mismatch: return "form_mismatch";
        case Cmp::symbolic_mismatch: return "symbolic_mismatch";
    }
    return "value_mismatch";
}

bool terminates(const Rational& r) {
    cpp_int d = boost::multiprecision::denominator(r);
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

cpp_int floor_div(const cpp_int& a, const cpp_int& b) {
    cpp_int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// r cut to k fractional digits, toward zero or rounded half away from zero.
Rational to_places(const Rational& r, int k, bool round) {
    const cpp_int scale = pow10(k);
    const Rational mag = abs(r) * scale;
    const cpp_int num = boost::multiprecision::numerator(mag);
    const cpp_int den = boost::multiprecision::denominator(mag);
    cpp_int q = round ? floor_div(2 * num + den, 2 * den) : floor_div(num, den);
    Rational out(q, scale);
    return r < 0 ? -out : out;
}

int written_places(const ExtractedAnswer& a) {
    if (a.form == AnswerForm::decimal) return a.shown_decimals;
    if (a.form == AnswerForm::percent) return a.shown_decimals + 2;
    return 0;
}

// `approx` is a written decimal; `exact` a non-terminating fraction.
bool decimal_matches(const ExtractedAnswer& approx, const ExtractedAnswer& exact) {
    const int k = written_places(approx);
    if (k < 2) return false;
    if (exact.form == AnswerForm::decimal || terminates(*exact.value)) return false;
    return *approx.value == to_places(*exact.value, k, true) || *approx.value == to_places(*exact.value, k, false);
}

Cmp compare(const ExtractedAnswer& a, const ExtractedAnswer& b, double tol) {
    if (!a.value || !b.value) {
        if (a.value || b.value) return Cmp::form_mismatch;
        return normalize_symbolic(a.raw_span) == normalize_symbolic(b.raw_span) ? Cmp::symbolic_equal
                                                                                : Cmp::symbolic_mismatch;
    }
    if (a.unit && b.unit && canonical_unit(*a.unit) != canonical_unit(*b.unit)) return Cmp::unit_conflict;
    if (*a.value == *b.value) return Cmp::exact;
    if (decimal_matches(a, b) || decimal_matches(b, a)) return Cmp::rounded;
    if (a.approximate || b.approximate) {
        const double x = a.value->convert_to<double>();
        const double y = b.value->convert_to<double>();
        if (std::fabs(x - y) <= tol * std::max(std::fabs(x), std::fabs(y))) return Cmp::tolerance;
    }
    return Cmp::value_mismatch;
}

}  // namespace

bool equivalent(const ExtractedAnswer& pred, const ExtractedAnswer& gold, double tol) {
    return equal_outcome(compare(pred, gold, tol));
}

Verdict grade_one(std::string id, std::string_view response, std::string_view gold_text,
                  const ExtractorConfig& config, double tol) {
    Verdict v;
    v.prediction_id = std::move(id);
    v.predicted = extract_answer(response, config);
    v.gold = extract_answer(gold_text, config);
    if (text::trim(response).empty()) {
        v.decision = Decision::unparseable;
        v.reason = "empty_response";
        return v;
    }
    if (!v.predicted.value && v.gold->value) {
        v.decision = Decision::unparseable;
        v.reason = "no_numeric_answer";
        return v;
    }
    if (!v.predicted.value && normalize_symbolic(v.predicted.raw_span).empty()) {
        v.decision = Decision::unparseable;
        v.reason = "no_answer";
        return v;
    }
    const Cmp c = compare(v.predicted, *v.gold, tol);
    v.decision = equal_outcome(c) ? Decision::correct : Decision::incorrect;
    v.reason = std::string(cmp_reason(c));
    return v;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read predictions: " + path.string());
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("response") ||
            !j["response"].is_string()) {
            throw ValidationError("predictions",
                                  path.string() + ":" + std::to_string(line_no) + ": expected {id, response}");
        }
        out.push_back({j["id"].get<std::string>(), j["response"].get<std::string>()});
    }
    return out;
}

GradeReport grade_dataset(const std::vector<Prediction>& predictions, const Corpus& gold,
                          const ExtractorConfig& config, double tol, unsigned workers) {
    std::unordered_map<std::string_view, const Record*> by_id;
    for (const auto& r : gold.records) by_id.emplace(r.id, &r);

    for (const auto& p : predictions) {
        if (!by_id.contains(p.id)) {
            throw ValidationError("predictions", "prediction '" + p.id + "' references no gold record");
        }
    }

    GradeReport report;
    report.verdicts.resize(predictions.size());
    auto grade_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& p = predictions[i];
            const Record& g = *by_id.at(p.id);
            auto fa = g.meta.find("final_answer");
            const std::string& gold_text = fa != g.meta.end() ? fa->second : g.answer;
            report.verdicts[i] = grade_one(p.id, p.response, gold_text, config, tol);
        }
    };
    const std::size_t n = predictions.size();
    workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1)));
    {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            threads.emplace_back(grade_range, begin, std::min(n, begin + chunk));
        }
    }

    for (const auto& v : report.verdicts) {
        ++report.n;
        const bool ok = v.decision == Decision::correct;
        if (ok) ++report.correct;
        if (v.decision == Decision::unparseable) ++report.unparseable;
        if (auto it = by_id.find(v.prediction_id); it != by_id.end()) {
            if (auto g = it->second->meta.find("grade"); g != it->second->meta.end()) {
                auto& stats = report.per_grade["G" + g->second];
                ++stats.n;
                if (ok) ++stats.correct;
            }
        }
    }
    return report;
}

namespace {

ordered_json answer_json(const ExtractedAnswer& a) {
    ordered_json j;
    j["raw_span"] = a.raw_span;
    j["form"] = to_string(a.form);
    j["value"] = a.value ? ordered_json(rational_to_string(*a.value)) : ordered_json(nullptr);
    j["unit"] = a.unit ? ordered_json(*a.unit) : ordered_json(nullptr);
    return j;
}

}  // namespace

std::string serialize_verdict(const Verdict& v) {
    ordered_json j;
    j["id"] = v.prediction_id;
    j["decision"] = to_string(v.decision);
    j["reason"] = v.reason;
    j["predicted"] = answer_json(v.predicted);
    j["gold"] = v.gold ? answer_json(*v.gold) : ordered_json(nullptr);
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::string report_json(const GradeReport& r, const std::string& verdicts_path) {
    ordered_json j;
    const auto acc = r.accuracy();
    j["accuracy"] = acc ? ordered_json(*acc) : ordered_json(nullptr);
    j["n"] = r.n;
    j["correct"] = r.correct;
    j["unparseable"] = r.unparseable;
    j["per_grade"] = ordered_json::object();
    for (const auto& [grade, s] : r.per_grade) {
        j["per_grade"][grade] = {{"n", s.n}, {"correct", s.correct}, {"accuracy", s.accuracy()}};
    }
    j["verdicts_path"] = verdicts_path;
    return j.dump(2);
}

std::string report_table(const GradeReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1);
    if (r.n == 0) {
        out << "0 items graded; accuracy undefined\n";
        return out.str();
    }
    if (!r.per_grade.empty()) {
        out << "grade      n   correct  accuracy\n";
        for (const auto& [grade, s] : r.per_grade) {
            out << std::left << std::setw(6) << grade << std::right << std::setw(6) << s.n << std::setw(10)
                << s.correct << std::setw(9) << 100.0 * s.accuracy() << "%\n";
        }
    }
    out << "total " << std::setw(6) << r.n << std::setw(10) << r.correct << std::setw(9) << 100.0 * *r.accuracy()
        << "%\n";
    return out.str();
}

}  // namespace websft
