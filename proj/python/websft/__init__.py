"""Python interface to the websft C++ core."""

from ._websft import (
    IoError,
    ValidationError,
    degrade,
    equivalent,
    extract_answer,
    extract_output,
    format_pair_rate,
    grade,
    is_subsequence,
    match_pairs,
    normalize,
    read_corpus,
    render_prompt,
    render_target,
    rule_clean,
    run_cli,
)

__all__ = [
    "IoError",
    "ValidationError",
    "degrade",
    "equivalent",
    "extract_answer",
    "extract_output",
    "format_pair_rate",
    "grade",
    "is_subsequence",
    "match_pairs",
    "normalize",
    "read_corpus",
    "render_prompt",
    "render_target",
    "rule_clean",
    "run_cli",
]
