#!/usr/bin/env python3
"""Generate the bundled corpora under data/.

data/clean_1000.jsonl   1000 well-formatted seed records
data/sample/seed.jsonl  50 seed records
data/sample/crawl.jsonl 50 noisy web-style records, about two thirds of
                        them derived from a sample seed record

Every record carries a two-character tag drawn from TAG_POOL. No template
text uses those characters, so no seed answer can be a subsequence of
another record's text after normalization. Output is fully determined by
the fixed seeds below.
"""

import argparse
import json
import random
import re
from fractions import Fraction
from pathlib import Path

TAG_POOL = (
    "甸岚峪嵩岑崖沅沣泓淇湘渭滦漓澜濠瀚灏焘烨熠璇瑾琦瑜璋珂玥珩琨瑭"
    "瑶桦楠榕樟梓柘栎椿槐檀菁苒荻蔚蘅芷芸茗萱蓉"
)

ANIMALS = ["鸡", "鸭", "鹅", "兔", "羊"]
GOODS = ["书", "画册", "铅笔", "笔记本", "故事书"]
LIQUIDS = ["油", "水", "果汁", "牛奶"]


def tag_stream(rng):
    tags = [a + b for a in TAG_POOL for b in TAG_POOL if a != b]
    rng.shuffle(tags)
    return iter(tags)


def frac(f):
    return "$\\frac{%d}{%d}$" % (f.numerator, f.denominator)


def chicken(rng, tag):
    b = rng.randint(2, 9)
    a = rng.randint(1, b - 1)
    while Fraction(a, b).denominator != b:
        a = rng.randint(1, b - 1)
    last = rng.randint(10, 300) * b
    now = last + last * a // b
    animal = rng.choice(ANIMALS)
    q = f"{tag}养殖场今年养{animal}{now}只，比去年增加{frac(Fraction(a, b))}，去年养{animal}多少只？"
    ans = (
        f"解：{now}÷（1+{frac(Fraction(a, b))}）\n"
        f"={now}÷{frac(Fraction(a + b, b))}\n"
        f"={last}（只）\n"
        f"答：去年养{animal}{last}只．"
    )
    return q, ans, str(last)


def area(rng, tag):
    l, w = rng.randint(12, 99), rng.randint(3, 11)
    q = f"{tag}小学有一块长方形花坛，长{l}米，宽{w}米，这块花坛的面积是多少平方米？"
    ans = f"解：{l}×{w}={l * w}（平方米）\n答：{tag}小学这块花坛的面积是{l * w}平方米．"
    return q, ans, str(l * w)


def squares(rng, tag):
    a = rng.randint(3, 30)
    b = rng.randint(1, a - 1)
    r = a * a - b * b
    q = f"{tag}同学计算${a}^{{2}}-{b}^{{2}}$，结果是多少？"
    ans = f"解：${a}^{{2}}-{b}^{{2}}$\n={a * a}-{b * b}\n={r}\n答：{tag}同学算得的结果是{r}．"
    return q, ans, str(r)


def books(rng, tag):
    a, b = rng.randint(10, 90), rng.randint(2, 40)
    goods = rng.choice(GOODS)
    s = a + a + b
    q = f"{tag}有{a}本{goods}，妹妹比{tag}多{b}本，两人一共有多少本{goods}？"
    ans = f"解：{a}+{a}+{b}={s}（本）\n答：{tag}和妹妹一共有{s}本{goods}．"
    return q, ans, str(s)


def portion(rng, tag):
    b = rng.randint(2, 9)
    a = rng.randint(1, b - 1)
    f = Fraction(a, b)
    w = rng.randint(2, 40) * f.denominator
    r = w * f
    liquid = rng.choice(LIQUIDS)
    q = f"{tag}商店有一桶{liquid}重{w}千克，卖出了{frac(f)}，卖出了多少千克？"
    ans = f"解：{w}×{frac(f)}={r}（千克）\n答：{tag}商店卖出了{r}千克{liquid}．"
    return q, ans, str(r)


def speed(rng, tag):
    t, v = rng.randint(2, 9), rng.randint(30, 95)
    d = t * v
    q = f"{tag}车队的汽车{t}小时行驶了{d}千米，平均每小时行驶多少千米？"
    ans = f"解：{d}÷{t}={v}（千米）\n答：{tag}车队的汽车平均每小时行驶{v}千米．"
    return q, ans, str(v)


FAMILIES = [chicken, area, squares, books, portion, speed]


def make_records(rng, tags, n, prefix):
    out, seen_q, seen_a = [], set(), set()
    while len(out) < n:
        tag = next(tags)
        family = FAMILIES[len(out) % len(FAMILIES)]
        q, a, final = family(rng, tag)
        assert q not in seen_q and a not in seen_a
        seen_q.add(q)
        seen_a.add(a)
        out.append(
            {
                "id": f"{prefix}{len(out):04d}",
                "question": q,
                "answer": a,
                "meta": {"grade": str(rng.randint(1, 6)), "final_answer": final},
            }
        )
    return out


def flatten_fractions(s, newline=True):
    sep = "\n" if newline else ""
    return re.sub(r"\$?\\frac\{([^{}]*)\}\{([^{}]*)\}\$?", lambda m: m.group(1) + sep + m.group(2), s)


def drop_fraction(s):
    return re.sub(r"\$?\\frac\{[^{}]*\}\{[^{}]*\}\$?", "", s)


def drop_superscripts(s):
    return re.sub(r"\^\{([^{}]*)\}", r"\1", s)


def web_version(rng, rec):
    """A crawled rendering of a seed record: template preamble, flattened
    fractions, dropped superscripts and line breaks."""
    q = rec["question"]
    a = rec["answer"]
    if rng.random() < 0.5:
        q = drop_fraction(q)
    else:
        q = flatten_fractions(q)
    a = drop_superscripts(flatten_fractions(a, newline=rng.random() < 0.7))
    if rng.random() < 0.6:
        a = a.replace("\n", "")
    if rng.random() < 0.5:
        a = a.replace("×", "X")
    if rng.random() < 0.6:
        a = "试题分析：先找出题中的数量关系，再列式计算．\n试题解析：" + a.replace("解：", "", 1)
    return q, a


NON_MATH = [
    ("Translate the following sentence into French: the weather is nice today.", "Il fait beau aujourd'hui."),
    ("What is the capital of Australia?", "Canberra is the capital of Australia."),
    ("Write a haiku about autumn leaves.", "Red leaves drift and fall; the quiet path remembers; wind carries the year."),
]


def make_sample(rng, tags):
    seed = make_records(rng, tags, 50, "seed-")
    crawl = []
    for i, rec in enumerate(seed[:32]):
        q, a = web_version(rng, rec)
        crawl.append({"id": f"web-{len(crawl):04d}", "question": q, "answer": a})
    # Records with no seed counterpart.
    for rec in make_records(rng, tags, 15, "x"):
        q, a = web_version(rng, rec)
        crawl.append({"id": f"web-{len(crawl):04d}", "question": q, "answer": a})
    for q, a in NON_MATH:
        crawl.append({"id": f"web-{len(crawl):04d}", "question": q, "answer": a})
    rng.shuffle(crawl)
    for i, rec in enumerate(crawl):
        rec["id"] = f"web-{i:04d}"
    return seed, crawl


def write_jsonl(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def check_tag_pool():
    probe = random.Random(0)
    text = ""
    for family in FAMILIES:
        for _ in range(50):
            q, a, _ = family(probe, "")
            text += q + a
    text += "试题分析：先找出题中的数量关系，再列式计算．试题解析：十"
    clash = set(text) & set(TAG_POOL)
    assert not clash, f"tag characters used by templates: {sorted(clash)}"
    assert len(set(TAG_POOL)) == len(TAG_POOL)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()

    check_tag_pool()
    tags = tag_stream(random.Random(20240501))
    write_jsonl(args.out / "clean_1000.jsonl", make_records(random.Random(1), tags, 1000, "clean-"))
    seed, crawl = make_sample(random.Random(2), tags)
    write_jsonl(args.out / "sample" / "seed.jsonl", seed)
    write_jsonl(args.out / "sample" / "crawl.jsonl", crawl)


if __name__ == "__main__":
    main()
