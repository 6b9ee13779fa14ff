"""Qualification exams gating verification eligibility.

An exam form holds ten sentence pairs: five genuine translations and five
distractors (two mismatched pairs, one pair whose right side is a different
language, two word-for-word dictionary renderings). Grading is a straight
label match against the form.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Mapping, Sequence

from .errors import InputError

CORRECT = "correct"
INCORRECT = "incorrect"
ANSWERS = (CORRECT, INCORRECT)

MISMATCH = "mismatch"
WRONG_LANGUAGE = "wrong_language"
WORD_FOR_WORD = "word_for_word"

N_ITEMS = 10
COMPOSITION = {None: 5, MISMATCH: 2, WRONG_LANGUAGE: 1, WORD_FOR_WORD: 2}
DEFAULT_PASS_THRESHOLD = 8

_TRAILING_PUNCT = re.compile(r"([.,!?;:]+)$")


@dataclass(frozen=True)
class ExamItem:
    src: str
    tgt: str
    true_label: str
    distractor_kind: str | None = None

    def __post_init__(self) -> None:
        if (self.true_label == CORRECT) != (self.distractor_kind is None):
            raise InputError("correct items carry no distractor kind")


@dataclass(frozen=True)
class ExamForm:
    direction: str
    items: tuple[ExamItem, ...]
    version: str

    def __post_init__(self) -> None:
        if len(self.items) != N_ITEMS:
            raise InputError(f"an exam form has {N_ITEMS} items")
        counts = self.composition()
        if counts != COMPOSITION:
            raise InputError(f"bad exam composition {counts}")

    def composition(self) -> dict[str | None, int]:
        counts: dict[str | None, int] = {key: 0 for key in COMPOSITION}
        for item in self.items:
            counts[item.distractor_kind] += 1
        return counts

    def true_labels(self) -> tuple[str, ...]:
        return tuple(item.true_label for item in self.items)


@dataclass(frozen=True)
class ExamResult:
    worker_id: int
    direction: str
    version: str
    score: int
    passed: bool
    taken_at: float


def word_for_word(src: str, glossary: Mapping[str, str]) -> str:
    """Naive token-by-token dictionary rendering.

    Each token is looked up casefolded with trailing punctuation peeled
    off and re-attached; unknown tokens pass through verbatim.
    """
    out = []
    for token in src.split():
        match = _TRAILING_PUNCT.search(token)
        punct = match.group(1) if match else ""
        bare = token[: len(token) - len(punct)] if punct else token
        out.append(glossary.get(bare.casefold(), bare) + punct)
    return " ".join(out)


def build_exam(
    direction: str,
    parallel_pool: Sequence[tuple[str, str]],
    glossary: Mapping[str, str],
    other_lang_pool: Sequence[str],
    seed: int,
    version: str | None = None,
) -> ExamForm:
    """Assemble a ten-item form from fixture pools, shuffled by ``seed``."""
    if len(parallel_pool) < 7:
        raise InputError(
            f"need at least 7 parallel pairs, got {len(parallel_pool)}"
        )
    if not glossary:
        raise InputError("glossary is empty")
    if not other_lang_pool:
        raise InputError("other-language pool is empty")

    rng = random.Random(seed)
    pairs = list(parallel_pool)
    rng.shuffle(pairs)

    correct_items = [
        ExamItem(src=src, tgt=tgt, true_label=CORRECT) for src, tgt in pairs[:5]
    ]

    # Cross two distinct leftover pairs so each distractor target is the
    # true translation of a *different* source.
    scramble = None
    rest = pairs[5:]
    for i in range(len(rest)):
        for j in range(i + 1, len(rest)):
            a, b = rest[i], rest[j]
            if a[0] != b[0] and a[1] != b[1]:
                scramble = (a, b)
                break
        if scramble:
            break
    if scramble is None:
        raise InputError("pool lacks two distinct pairs to build mismatches")
    (src_a, tgt_a), (src_b, tgt_b) = scramble
    mismatch_items = [
        ExamItem(src_a, tgt_b, INCORRECT, MISMATCH),
        ExamItem(src_b, tgt_a, INCORRECT, MISMATCH),
    ]

    def spare_src(offset: int) -> str:
        index = 7 + offset
        if index < len(pairs):
            return pairs[index][0]
        return rng.choice(pairs[:7])[0]

    wrong_language_item = ExamItem(
        spare_src(0), rng.choice(list(other_lang_pool)), INCORRECT, WRONG_LANGUAGE
    )
    word_items = [
        ExamItem(spare_src(1 + k), word_for_word(spare_src(1 + k), glossary),
                 INCORRECT, WORD_FOR_WORD)
        for k in range(2)
    ]

    items = correct_items + mismatch_items + [wrong_language_item] + word_items
    rng.shuffle(items)
    return ExamForm(
        direction=direction,
        items=tuple(items),
        version=version or f"seed-{seed}",
    )


def grade_exam(
    form: ExamForm,
    answers: Sequence[str],
    pass_threshold: int = DEFAULT_PASS_THRESHOLD,
    worker_id: int = 0,
    taken_at: float = 0.0,
) -> ExamResult:
    """Score answers against the form's true labels."""
    if len(answers) != N_ITEMS:
        raise InputError(f"expected {N_ITEMS} answers, got {len(answers)}")
    for answer in answers:
        if answer not in ANSWERS:
            raise InputError(f"unknown answer {answer!r}")
    score = sum(
        1 for item, answer in zip(form.items, answers)
        if item.true_label == answer
    )
    return ExamResult(
        worker_id=worker_id,
        direction=form.direction,
        version=form.version,
        score=score,
        passed=score >= pass_threshold,
        taken_at=taken_at,
    )


def guess_pass_probability(pass_threshold: int) -> Fraction:
    """Chance that uniform random answers reach the threshold, exactly."""
    if not 0 <= pass_threshold <= N_ITEMS:
        raise InputError(f"threshold must be in 0..{N_ITEMS}")
    favorable = sum(comb(N_ITEMS, k) for k in range(pass_threshold, N_ITEMS + 1))
    return Fraction(favorable, 2**N_ITEMS)


def load_pairs_tsv(path: str | Path) -> list[tuple[str, str]]:
    """Read src<TAB>tgt pairs, skipping blank lines."""
    pairs = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise InputError(f"{path}:{line_no}: expected src<TAB>tgt")
        pairs.append((parts[0].strip(), parts[1].strip()))
    return pairs


def load_glossary_tsv(path: str | Path) -> dict[str, str]:
    return {
        src.casefold(): tgt
        for src, tgt in load_pairs_tsv(path)
    }


def load_lines(path: str | Path) -> list[str]:
    return [
        line.strip()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
