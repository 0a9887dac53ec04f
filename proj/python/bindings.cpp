#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "websft/cli.hpp"
#include "websft/corpus.hpp"
#include "websft/degrader.hpp"
#include "websft/errors.hpp"
#include "websft/evaluator.hpp"
#include "websft/matcher.hpp"
#include "websft/normalize.hpp"
#include "websft/rulecleaner.hpp"
#include "websft/sftgen.hpp"
#include "websft/text.hpp"

namespace py = pybind11;
using namespace websft;

namespace {

// Records cross the boundary as dicts with id, question, answer and an
// optional meta dict of strings.
Record to_record(const py::dict& d, Source source) {
    Record r;
    r.id = d["id"].cast<std::string>();
    r.question = d["question"].cast<std::string>();
    r.answer = d["answer"].cast<std::string>();
    r.source = source;
    if (d.contains("meta")) r.meta = d["meta"].cast<std::map<std::string, std::string>>();
    return r;
}

py::dict from_record(const Record& r) {
    py::dict d;
    d["id"] = r.id;
    d["question"] = r.question;
    d["answer"] = r.answer;
    if (!r.meta.empty()) d["meta"] = r.meta;
    return d;
}

Corpus to_corpus(const py::list& records, Source source) {
    std::vector<Record> out;
    for (const auto& item : records) out.push_back(to_record(item.cast<py::dict>(), source));
    return make_corpus(std::move(out), source, "python");
}

py::list from_corpus(const Corpus& c) {
    py::list out;
    for (const auto& r : c.records) out.append(from_record(r));
    return out;
}

py::dict from_answer(const ExtractedAnswer& a) {
    py::dict d;
    d["raw_span"] = a.raw_span;
    d["form"] = std::string(to_string(a.form));
    d["value"] = a.value ? py::object(py::str(rational_to_string(*a.value))) : py::object(py::none());
    d["unit"] = a.unit ? py::object(py::str(*a.unit)) : py::object(py::none());
    d["approximate"] = a.approximate;
    return d;
}

template <class T, class F>
T parse_or_throw(std::string_view s, F parse, const char* what) {
    auto v = parse(s);
    if (!v) throw ValidationError(what, std::string("invalid ") + what + ": " + std::string(s));
    return *v;
}

}  // namespace

PYBIND11_MODULE(_websft, m) {
    m.doc() = "Matching, degradation, cleaning, prompt building and answer grading for math Q/A corpora.";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("normalize", [](const std::string& s) { return text::encode_utf8(normalize(s).text); },
          "Matching form of a text.");
    m.def(
        "is_subsequence",
        [](const std::string& needle, const std::string& haystack) {
            return is_subsequence(text::decode_utf8(needle), text::decode_utf8(haystack));
        },
        py::arg("needle"), py::arg("haystack"));

    m.def("read_corpus",
          [](const std::string& path, const std::string& source) {
              return from_corpus(
                  ingest(path, parse_or_throw<Source>(source, parse_source, "source")).corpus);
          },
          py::arg("path"), py::arg("source") = "seed");

    m.def(
        "match_pairs",
        [](const py::list& seed, const py::list& crawl, const std::string& mode, std::size_t min_answer_len,
           const std::string& dedup, unsigned workers) {
            MatchConfig mc;
            mc.mode = parse_or_throw<AnswerMatchMode>(mode, parse_answer_match_mode, "mode");
            mc.dedup = parse_or_throw<DedupPolicy>(dedup, parse_dedup_policy, "dedup");
            mc.min_answer_len = min_answer_len;
            mc.workers = workers;
            const auto s = to_corpus(seed, Source::seed);
            const auto c = to_corpus(crawl, Source::crawl);
            PairSet ps;
            {
                py::gil_scoped_release release;
                ps = match_pairs(s, c, mc);
            }
            py::list out;
            for (const auto& p : ps.pairs) {
                py::dict d;
                d["seed_id"] = p.seed_id;
                d["crawl_id"] = p.crawl_id;
                d["reason"] = std::string(to_string(p.reason));
                out.append(d);
            }
            return out;
        },
        py::arg("seed"), py::arg("crawl"), py::arg("mode") = "subsequence", py::arg("min_answer_len") = 8,
        py::arg("dedup") = "one_per_crawl", py::arg("workers") = 1);

    m.def(
        "degrade",
        [](const py::list& records, const std::string& spec_json) {
            const auto spec = DegradationSpec::from_json_text(spec_json);
            const auto result = degrade(to_corpus(records, Source::seed), spec);
            py::list manifest;
            for (const auto& e : result.manifest) {
                py::dict d;
                d["id"] = e.id;
                d["field"] = std::string(to_string(e.field));
                d["error_class"] = std::string(to_string(e.cls));
                d["span"] = py::make_tuple(e.span_start, e.span_end);
                d["replacement"] = e.replacement;
                manifest.append(d);
            }
            return py::make_tuple(from_corpus(result.corpus), manifest);
        },
        py::arg("records"), py::arg("spec_json"), "Returns (degraded records, manifest).");

    m.def(
        "rule_clean",
        [](const py::dict& record) {
            auto [out, cs] = clean(to_record(record, Source::crawl));
            py::list edits;
            for (const auto& e : cs.edits) {
                py::dict d;
                d["rule_id"] = e.rule_id;
                d["field"] = std::string(to_string(e.field));
                d["before"] = e.before;
                d["after"] = e.after;
                edits.append(d);
            }
            return py::make_tuple(from_record(out), edits);
        },
        py::arg("record"), "Returns (cleaned record, edits).");

    m.def(
        "render_prompt",
        [](const py::dict& record, const std::string& mode) {
            if (mode != "sft" && mode != "one_shot") throw ValidationError("mode", "mode must be sft or one_shot");
            return render_prompt(to_record(record, Source::crawl),
                                 mode == "sft" ? PromptMode::sft : PromptMode::one_shot);
        },
        py::arg("record"), py::arg("mode") = "sft");
    m.def("render_target", [](const std::string& q, const std::string& a) { return render_target(q, a); },
          py::arg("question"), py::arg("answer"));
    m.def(
        "extract_output",
        [](const std::string& raw) {
            const auto out = extract_output(raw);
            py::dict d;
            d["status"] = std::string(to_string(out.status));
            d["question"] = out.parsed ? py::object(py::str(out.parsed->first)) : py::object(py::none());
            d["answer"] = out.parsed ? py::object(py::str(out.parsed->second)) : py::object(py::none());
            return d;
        },
        py::arg("raw"));

    m.def("extract_answer", [](const std::string& response) { return from_answer(extract_answer(response)); },
          py::arg("response"));
    m.def(
        "equivalent",
        [](const std::string& pred, const std::string& gold, double tol) {
            return equivalent(extract_answer(pred), extract_answer(gold), tol);
        },
        py::arg("pred"), py::arg("gold"), py::arg("tol") = 1e-6);
    m.def(
        "grade",
        [](const std::string& response, const std::string& gold, double tol) {
            const auto v = grade_one("", response, gold, {}, tol);
            py::dict d;
            d["decision"] = std::string(to_string(v.decision));
            d["reason"] = v.reason;
            d["predicted"] = from_answer(v.predicted);
            return d;
        },
        py::arg("response"), py::arg("gold"), py::arg("tol") = 1e-6);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int rc;
            {
                py::gil_scoped_release release;
                rc = run_cli(args, out, err);
            }
            return py::make_tuple(rc, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI subcommand in-process; returns (exit code, stdout, stderr).");
    m.def("format_pair_rate", &format_pair_rate, py::arg("pairs"), py::arg("seed_total"));
}
