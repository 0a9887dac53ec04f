#include "websft/degrader.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "websft/errors.hpp"
#include "websft/rng.hpp"
#include "websft/text.hpp"

namespace websft {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ErrorClass c) noexcept {
    switch (c) {
        case ErrorClass::linebreak_drop: return "linebreak_drop";
        case ErrorClass::fraction_flatten: return "fraction_flatten";
        case ErrorClass::superscript_drop: return "superscript_drop";
        case ErrorClass::symbol_substitute: return "symbol_substitute";
        case ErrorClass::question_info_drop: return "question_info_drop";
        case ErrorClass::garble: return "garble";
    }
    return "garble";
}

std::optional<ErrorClass> parse_error_class(std::string_view s) noexcept {
    for (ErrorClass c : kErrorClassOrder) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::string_view to_string(Field f) noexcept { return f == Field::question ? "question" : "answer"; }

void DegradationSpec::validate() const {
    if (rates.empty()) throw ValidationError("error_classes", "at least one error class must be enabled");
    for (const auto& [cls, p] : rates) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("rates." + std::string(to_string(cls)), "rate must lie in [0, 1]");
        }
    }
    if (!(fraction_newline_prob >= 0.0 && fraction_newline_prob <= 1.0)) {
        throw ValidationError("fraction_newline_prob", "fraction_newline_prob must lie in [0, 1]");
    }
    if (garble_min == 0 || garble_min > garble_max) {
        throw ValidationError("garble_min", "garble span bounds must satisfy 0 < garble_min <= garble_max");
    }
    for (const auto& [from, to] : substitutions) {
        if (from.empty()) throw ValidationError("substitutions", "substitution source must be nonempty");
    }
}

DegradationSpec DegradationSpec::from_json_text(std::string_view json_text) {
    const json j = json::parse(json_text, nullptr, false);
    if (!j.is_object()) throw ValidationError("spec", "degradation spec must be a JSON object");

    DegradationSpec spec;
    const json rates = j.value("rates", json::object());
    if (!rates.is_object()) throw ValidationError("rates", "rates must be an object");
    auto enable = [&](const std::string& name) {
        auto cls = parse_error_class(name);
        if (!cls) throw ValidationError("error_classes", "unknown error class '" + name + "'");
        double p = kDefaultRate;
        if (auto it = rates.find(name); it != rates.end()) {
            if (!it->is_number()) throw ValidationError("rates." + name, "rate must be a number");
            p = it->get<double>();
        }
        spec.rates[*cls] = p;
    };
    if (auto it = j.find("error_classes"); it != j.end()) {
        if (!it->is_array()) throw ValidationError("error_classes", "error_classes must be an array");
        for (const auto& name : *it) {
            if (!name.is_string()) throw ValidationError("error_classes", "error class names must be strings");
            enable(name.get<std::string>());
        }
    } else {
        for (const auto& [name, _] : rates.items()) enable(name);
    }
    for (const auto& [name, _] : rates.items()) {
        auto cls = parse_error_class(name);
        if (!cls) throw ValidationError("rates", "unknown error class '" + name + "'");
        if (!spec.rates.contains(*cls)) {
            throw ValidationError("rates." + name, "rate given for a class not listed in error_classes");
        }
    }

    try {
        spec.rng_seed = j.value("rng_seed", std::uint64_t{0});
        spec.fraction_newline_prob = j.value("fraction_newline_prob", spec.fraction_newline_prob);
        spec.garble_min = j.value("garble_min", spec.garble_min);
        spec.garble_max = j.value("garble_max", spec.garble_max);
        if (auto it = j.find("substitutions"); it != j.end()) {
            spec.substitutions.clear();
            for (const auto& [from, to] : it->items()) spec.substitutions.emplace_back(from, to.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ValidationError("spec", std::string("bad degradation spec field: ") + e.what());
    }
    spec.validate();
    return spec;
}

DegradationSpec DegradationSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read degradation spec: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string DegradationSpec::to_json_text() const {
    ordered_json j;
    j["error_classes"] = ordered_json::array();
    j["rates"] = ordered_json::object();
    for (ErrorClass c : kErrorClassOrder) {
        if (auto it = rates.find(c); it != rates.end()) {
            j["error_classes"].push_back(to_string(c));
            j["rates"][std::string(to_string(c))] = it->second;
        }
    }
    j["rng_seed"] = rng_seed;
    j["fraction_newline_prob"] = fraction_newline_prob;
    j["garble_min"] = garble_min;
    j["garble_max"] = garble_max;
    ordered_json subs = ordered_json::object();
    for (const auto& [from, to] : substitutions) subs[from] = to;
    j["substitutions"] = std::move(subs);
    return j.dump(2);
}

namespace {

struct Site {
    std::size_t start;
    std::size_t end;
    std::string replacement;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Reads "{...}" without nested braces starting at `pos`; returns the end
// offset (one past '}') or npos.
std::size_t read_group(std::string_view s, std::size_t pos, std::string_view& content) {
    if (pos >= s.size() || s[pos] != '{') return std::string_view::npos;
    const auto close = s.find_first_of("{}", pos + 1);
    if (close == std::string_view::npos || s[close] != '}') return std::string_view::npos;
    content = s.substr(pos + 1, close - pos - 1);
    return close + 1;
}

std::vector<Site> fraction_sites(std::string_view s, const DegradationSpec& spec, Rng& rng) {
    static constexpr std::string_view kCommands[] = {"\\dfrac", "\\tfrac", "\\frac"};
    std::vector<Site> sites;
    std::size_t pos = 0;
    while ((pos = s.find('\\', pos)) != std::string_view::npos) {
        std::size_t cmd_len = 0;
        for (auto cmd : kCommands) {
            if (s.substr(pos).starts_with(cmd)) {
                cmd_len = cmd.size();
                break;
            }
        }
        std::string_view num, den;
        std::size_t end = std::string_view::npos;
        if (cmd_len != 0) {
            const auto mid = read_group(s, pos + cmd_len, num);
            if (mid != std::string_view::npos) end = read_group(s, mid, den);
        }
        if (end == std::string_view::npos) {
            ++pos;
            continue;
        }
        std::size_t start = pos;
        if (start > 0 && s[start - 1] == '$' && end < s.size() && s[end] == '$') {
            --start;
            ++end;
        }
        const bool newline = rng.bernoulli(spec.fraction_newline_prob);
        sites.push_back({start, end, std::string(num) + (newline ? "\n" : "") + std::string(den)});
        pos = end;
    }
    return sites;
}

std::vector<Site> superscript_sites(std::string_view s) {
    std::vector<Site> sites;
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
        if (s[pos] != '^' && s[pos] != '_') continue;
        std::string_view body;
        if (auto end = read_group(s, pos + 1, body); end != std::string_view::npos) {
            sites.push_back({pos, end, std::string(body)});
            pos = end - 1;
        } else if (pos + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[pos + 1])) && s[pos] == '^') {
            sites.push_back({pos, pos + 2, std::string(1, s[pos + 1])});
            ++pos;
        }
    }
    return sites;
}

std::vector<Site> literal_sites(std::string_view s, std::string_view from, std::string_view to) {
    std::vector<Site> sites;
    for (auto pos = s.find(from); pos != std::string_view::npos; pos = s.find(from, pos + from.size())) {
        sites.push_back({pos, pos + from.size(), std::string(to)});
    }
    return sites;
}

std::vector<Site> substitution_sites(std::string_view s, const DegradationSpec& spec) {
    std::vector<Site> sites;
    for (const auto& [from, to] : spec.substitutions) {
        auto found = literal_sites(s, from, to);
        sites.insert(sites.end(), found.begin(), found.end());
    }
    std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) { return a.start < b.start; });
    // Overlapping sources (possible with custom tables) keep the leftmost.
    std::vector<Site> out;
    for (auto& site : sites) {
        if (out.empty() || site.start >= out.back().end) out.push_back(std::move(site));
    }
    return out;
}

std::vector<Site> number_drop_sites(std::string_view s, Rng& rng) {
    std::vector<Site> runs;
    for (std::size_t i = 0; i < s.size();) {
        if (!is_digit(s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && (is_digit(s[j]) || (s[j] == '.' && j + 1 < s.size() && is_digit(s[j + 1])))) ++j;
        runs.push_back({i, j, ""});
        i = j;
    }
    if (runs.empty()) return runs;
    const auto pick = rng.uniform_int(0, runs.size() - 1);
    return {runs[pick]};
}

std::string noise(std::size_t n, Rng& rng) {
    static constexpr std::string_view kPunct = "!@#$%^&*()_+-=[]{};:'\",.<>/?|~`";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(0.5)) {
            text::append_utf8(out, static_cast<char32_t>(rng.uniform_int(0x4E00, 0x9FA5)));
        } else {
            out.push_back(kPunct[rng.uniform_int(0, kPunct.size() - 1)]);
        }
    }
    return out;
}

std::vector<Site> garble_sites(std::string_view s, const DegradationSpec& spec, Rng& rng) {
    const std::size_t len = text::utf8_length(s);
    if (len < spec.garble_min) return {};
    const auto span = rng.uniform_int(spec.garble_min, std::min(spec.garble_max, len));
    const auto start_cp = rng.uniform_int(0, len - span);
    const auto start = text::utf8_offset(s, start_cp);
    const auto end = text::utf8_offset(s, start_cp + span);
    return {{start, end, noise(span, rng)}};
}

std::vector<Site> find_sites(ErrorClass cls, std::string_view s, const DegradationSpec& spec, Rng& rng) {
    switch (cls) {
        case ErrorClass::linebreak_drop: return literal_sites(s, "\n", "");
        case ErrorClass::fraction_flatten: return fraction_sites(s, spec, rng);
        case ErrorClass::superscript_drop: return superscript_sites(s);
        case ErrorClass::symbol_substitute: return substitution_sites(s, spec);
        case ErrorClass::question_info_drop: return number_drop_sites(s, rng);
        case ErrorClass::garble: return garble_sites(s, spec, rng);
    }
    return {};
}

}  // namespace

Record degrade_record(const Record& r, const DegradationSpec& spec, std::vector<ManifestEntry>* manifest,
                      std::map<ErrorClass, std::size_t>* applied, std::map<ErrorClass, std::size_t>* skipped) {
    Rng rng = Rng::for_key(spec.rng_seed, r.id);
    Record out = r;
    out.source = Source::crawl;

    for (Field field : {Field::question, Field::answer}) {
        std::string& s = field == Field::question ? out.question : out.answer;
        for (ErrorClass cls : kErrorClassOrder) {
            auto it = spec.rates.find(cls);
            if (it == spec.rates.end()) continue;
            if (cls == ErrorClass::question_info_drop && field != Field::question) continue;
            // Draw unconditionally so one class's rate never shifts another's stream.
            const bool sampled = rng.uniform01() < it->second;
            if (!sampled) continue;
            auto sites = find_sites(cls, s, spec, rng);
            if (sites.empty()) {
                if (skipped) ++(*skipped)[cls];
                continue;
            }
            if (applied) ++(*applied)[cls];
            // Right to left, so each recorded span is valid when replayed in order.
            for (auto site = sites.rbegin(); site != sites.rend(); ++site) {
                if (manifest) manifest->push_back({r.id, field, cls, site->start, site->end, site->replacement});
                s.replace(site->start, site->end - site->start, site->replacement);
            }
        }
    }
    return out;
}

DegradeResult degrade(const Corpus& corpus, const DegradationSpec& spec, unsigned workers) {
    if (corpus.source != Source::seed) throw ValidationError("corpus", "degrade expects a seed corpus");
    spec.validate();

    struct Part {
        std::vector<Record> records;
        std::vector<ManifestEntry> manifest;
        std::map<ErrorClass, std::size_t> applied, skipped;
    };
    const std::size_t n = corpus.size();
    workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1)));
    std::vector<Part> parts(workers);
    auto run = [&](std::size_t w, std::size_t begin, std::size_t end) {
        Part& p = parts[w];
        for (std::size_t i = begin; i < end; ++i) {
            p.records.push_back(degrade_record(corpus.records[i], spec, &p.manifest, &p.applied, &p.skipped));
        }
    };
    {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            threads.emplace_back(run, w, begin, std::min(n, begin + chunk));
        }
    }

    DegradeResult result;
    result.corpus.source = Source::crawl;
    result.corpus.provenance = corpus.provenance;
    for (auto& p : parts) {
        std::move(p.records.begin(), p.records.end(), std::back_inserter(result.corpus.records));
        std::move(p.manifest.begin(), p.manifest.end(), std::back_inserter(result.manifest));
        for (auto [c, k] : p.applied) result.applied[c] += k;
        for (auto [c, k] : p.skipped) result.skipped[c] += k;
    }
    return result;
}

Record replay_manifest(const Record& r, const std::vector<ManifestEntry>& manifest) {
    Record out = r;
    out.source = Source::crawl;
    for (const auto& e : manifest) {
        if (e.id != r.id) continue;
        std::string& s = e.field == Field::question ? out.question : out.answer;
        if (e.span_start > e.span_end || e.span_end > s.size()) {
            throw ValidationError(e.id, "manifest span out of range for record '" + e.id + "'");
        }
        s.replace(e.span_start, e.span_end - e.span_start, e.replacement);
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& manifest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    for (const auto& e : manifest) {
        ordered_json j;
        j["id"] = e.id;
        j["class"] = to_string(e.cls);
        j["span_start"] = e.span_start;
        j["span_end"] = e.span_end;
        j["replacement"] = e.replacement;
        j["field"] = to_string(e.field);
        out << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
    }
    if (!out) throw IoError("error while writing " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest: " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        try {
            auto cls = parse_error_class(j.at("class").get<std::string>());
            if (!cls) throw ValidationError("manifest", "unknown class in manifest line");
            const auto field = j.value("field", std::string("answer"));
            entries.push_back({j.at("id").get<std::string>(), field == "question" ? Field::question : Field::answer,
                               *cls, j.at("span_start").get<std::size_t>(), j.at("span_end").get<std::size_t>(),
                               j.at("replacement").get<std::string>()});
        } catch (const json::exception& e) {
            throw ValidationError("manifest", std::string("malformed manifest line: ") + e.what());
        }
    }
    return entries;
}

}  // namespace websft
