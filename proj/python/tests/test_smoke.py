import json
from pathlib import Path

import pytest

import websft

ROOT = Path(__file__).resolve().parents[2]
SAMPLE = ROOT / "data" / "sample"


def test_normalize_and_subsequence():
    assert websft.normalize("ＡＢＣ１２　三") == "12三"
    assert websft.is_subsequence("135", "12345")
    assert not websft.is_subsequence("531", "12345")


def test_match_on_sample():
    seed = websft.read_corpus(str(SAMPLE / "seed.jsonl"), "seed")
    crawl = websft.read_corpus(str(SAMPLE / "crawl.jsonl"), "crawl")
    pairs = websft.match_pairs(seed, crawl)
    assert pairs
    assert {p["reason"] for p in pairs} <= {"question_exact", "answer_subsequence"}
    assert len({p["crawl_id"] for p in pairs}) == len(pairs)


def test_degrade_then_match_recovers_source():
    seed = websft.read_corpus(str(SAMPLE / "seed.jsonl"), "seed")
    spec = {"error_classes": ["fraction_flatten", "linebreak_drop"], "rates": {"fraction_flatten": 1.0, "linebreak_drop": 1.0}, "rng_seed": 3}
    crawl, manifest = websft.degrade(seed, json.dumps(spec))
    assert manifest
    pairs = websft.match_pairs(seed, crawl, dedup="none")
    assert {(p["seed_id"], p["crawl_id"]) for p in pairs} == {(r["id"], r["id"]) for r in seed}


def test_prompt_and_output_round_trip():
    rec = {"id": "r1", "question": "一共有几个苹果？", "answer": "解：3+4=7（个）\n答：一共有7个苹果．"}
    assert "[题目]" in websft.render_prompt(rec)
    out = websft.extract_output(websft.render_target(rec["question"], rec["answer"]))
    assert out["status"] == "ok"
    assert (out["question"], out["answer"]) == (rec["question"], rec["answer"])
    assert websft.extract_output("随便写点什么")["status"] == "malformed"


def test_rule_clean_fraction():
    rec = {"id": "r", "question": "q", "answer": "解：1\n2+1=3\n2"}
    cleaned, edits = websft.rule_clean(rec)
    assert cleaned["answer"] == "解：1/2+1=3/2"
    assert edits


def test_grading():
    assert websft.equivalent("答：6/5", "1.2")
    assert websft.grade("答：75%", "3/4")["decision"] == "correct"
    assert websft.grade("", "3")["decision"] == "unparseable"
    assert websft.extract_answer("答：5千克")["unit"] == "千克"


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        websft.match_pairs([], [], mode="fuzzy")
    with pytest.raises(ValueError):
        websft.read_corpus(str(SAMPLE / "seed.jsonl"), "nowhere")


def test_cli_report(tmp_path):
    rc, out, err = websft.run_cli(["report", "--seed-total", "84095", "--pairs", "24336", "--output-dir", str(tmp_path)])
    assert rc == 0, err
    assert json.loads((tmp_path / "report.json").read_text())["pair_rate_percent"] == "28.9%"
    assert websft.format_pair_rate(24336, 84095) == "28.9%"
    rc, _, err = websft.run_cli(["pipeline", "--dry-run", "--crawl-corpus", "/nonexistent.jsonl"])
    assert rc == 1
