"""Trainable character n-gram language identifier.

A multinomial model over padded character n-grams (n = 1..5) with add-one
smoothing. Texts are scored by length-normalized log-likelihood under each
profile; the winner is returned together with the margin to the runner-up,
and detections abstain (``confident=False``) when the margin is below a
threshold or the text is too short to carry n-gram evidence.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import InputError, IntegrityError, TrainingError

N_MIN = 1
N_MAX = 5
MIN_TRAIN_CHARS = 10_000
MIN_TEXT_CHARS = 20
DEFAULT_MARGIN_THRESHOLD = 0.05
UNDETERMINED = "und"

PROFILE_FORMAT_VERSION = 1

_WS_RE = re.compile(r"\s+")
_DIGITS_RE = re.compile(r"\d+")


def _normalize(text: str) -> str:
    """Casefold, collapse whitespace, collapse digit runs to a placeholder."""
    text = _WS_RE.sub(" ", text.casefold()).strip()
    return _DIGITS_RE.sub("0", text)


def _ngrams(text: str) -> Iterator[str]:
    padded = f" {text} "
    length = len(padded)
    for n in range(N_MIN, N_MAX + 1):
        for i in range(length - n + 1):
            yield padded[i : i + n]


@dataclass
class LangProfile:
    """Trained model for one language.

    ``counts`` is the serializable form; log-probabilities are derived on
    construction. Add-one smoothing over the training vocabulary keeps every
    log-probability finite and <= 0, and gives unseen n-grams a floor mass.
    """

    lang: str
    counts: dict[str, int]
    total_ngrams: int = 0
    ngram_logprobs: dict[str, float] = field(default_factory=dict, repr=False)
    unseen_logprob: float = 0.0

    def __post_init__(self) -> None:
        if not self.counts:
            raise TrainingError(f"profile for {self.lang!r} has no n-grams")
        if not self.total_ngrams:
            self.total_ngrams = sum(self.counts.values())
        denom = self.total_ngrams + len(self.counts)
        log_denom = math.log(denom)
        self.ngram_logprobs = {
            gram: math.log(count + 1) - log_denom
            for gram, count in self.counts.items()
        }
        self.unseen_logprob = -log_denom

    def score(self, grams: Sequence[str]) -> float:
        """Mean log-probability per n-gram (length-normalized)."""
        logprobs = self.ngram_logprobs
        unseen = self.unseen_logprob
        total = 0.0
        for gram in grams:
            total += logprobs.get(gram, unseen)
        return total / len(grams)


@dataclass(frozen=True)
class Detection:
    lang: str
    score: float
    margin: float
    confident: bool


def train_profile(corpus: Iterable[str], lang: str) -> LangProfile:
    """Train a profile from raw text lines.

    Counting is order-independent, so two trainings on the same corpus give
    identical profiles regardless of line order.
    """
    lines = list(corpus)
    total_chars = sum(len(line) for line in lines)
    if total_chars < MIN_TRAIN_CHARS:
        raise TrainingError(
            f"training corpus for {lang!r} has {total_chars} characters, "
            f"need at least {MIN_TRAIN_CHARS}"
        )
    counts: Counter[str] = Counter()
    for line in lines:
        norm = _normalize(line)
        if norm:
            counts.update(_ngrams(norm))
    return LangProfile(lang=lang, counts=dict(counts))


def detect(
    text: str,
    profiles: Sequence[LangProfile],
    margin_threshold: float = DEFAULT_MARGIN_THRESHOLD,
    min_text_chars: int = MIN_TEXT_CHARS,
) -> Detection:
    """Best-scoring language for a text, with margin-based abstention.

    Texts shorter than ``min_text_chars`` after normalization come back as
    ``und`` with ``confident=False``; unseen scripts never error, they just
    score at the smoothing floor.
    """
    if len(profiles) < 2:
        raise InputError("detection needs at least two language profiles")
    norm = _normalize(text)
    if not norm:
        raise InputError("cannot detect the language of empty text")
    grams = list(_ngrams(norm))
    scored = sorted(
        ((profile.score(grams), profile.lang) for profile in profiles),
        key=lambda pair: (-pair[0], pair[1]),
    )
    best_score, best_lang = scored[0]
    margin = best_score - scored[1][0]
    if len(norm) < min_text_chars:
        return Detection(UNDETERMINED, best_score, margin, False)
    return Detection(best_lang, best_score, margin, margin >= margin_threshold)


@dataclass(frozen=True)
class LangAccuracy:
    total: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass(frozen=True)
class EvalReport:
    per_lang: dict[str, LangAccuracy]
    confusion: dict[tuple[str, str], int]
    abstained: int
    n_items: int

    @property
    def abstention_rate(self) -> float:
        return self.abstained / self.n_items

    @property
    def overall_accuracy(self) -> float:
        total = sum(acc.total for acc in self.per_lang.values())
        correct = sum(acc.correct for acc in self.per_lang.values())
        return correct / total if total else 0.0


def evaluate(
    profiles: Sequence[LangProfile],
    labeled: Sequence[tuple[str, str]],
    margin_threshold: float = DEFAULT_MARGIN_THRESHOLD,
) -> EvalReport:
    """Per-language accuracy and confusion over confident detections."""
    if not labeled:
        raise InputError("labeled evaluation set is empty")
    known = {profile.lang for profile in profiles}
    missing = {lang for _, lang in labeled} - known
    if missing:
        raise InputError(f"labels without a profile: {sorted(missing)}")
    totals: Counter[str] = Counter()
    corrects: Counter[str] = Counter()
    confusion: Counter[tuple[str, str]] = Counter()
    abstained = 0
    for text, true_lang in labeled:
        detection = detect(text, profiles, margin_threshold)
        if not detection.confident:
            abstained += 1
            continue
        totals[true_lang] += 1
        confusion[(true_lang, detection.lang)] += 1
        if detection.lang == true_lang:
            corrects[true_lang] += 1
    per_lang = {
        lang: LangAccuracy(total=totals[lang], correct=corrects[lang])
        for lang in sorted({lang for _, lang in labeled})
    }
    return EvalReport(
        per_lang=per_lang,
        confusion=dict(confusion),
        abstained=abstained,
        n_items=len(labeled),
    )


def save_profile(profile: LangProfile, path: str | Path) -> None:
    payload = {
        "format_version": PROFILE_FORMAT_VERSION,
        "lang": profile.lang,
        "n_range": [N_MIN, N_MAX],
        "counts": profile.counts,
    }
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True),
        encoding="utf-8",
    )


def load_profile(path: str | Path) -> LangProfile:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        version = payload["format_version"]
        if version != PROFILE_FORMAT_VERSION:
            raise IntegrityError(
                f"profile {path} has format version {version}, "
                f"expected {PROFILE_FORMAT_VERSION}"
            )
        if payload["n_range"] != [N_MIN, N_MAX]:
            raise IntegrityError(f"profile {path} has n_range {payload['n_range']}")
        return LangProfile(lang=payload["lang"], counts=payload["counts"])
    except (KeyError, ValueError, TypeError) as exc:
        raise IntegrityError(f"profile {path} is corrupt: {exc}") from exc


class Detector:
    """Handle bundling loaded profiles with detection thresholds."""

    def __init__(
        self,
        profiles: Iterable[LangProfile],
        margin_threshold: float = DEFAULT_MARGIN_THRESHOLD,
        min_text_chars: int = MIN_TEXT_CHARS,
    ) -> None:
        self.profiles: dict[str, LangProfile] = {}
        for profile in profiles:
            self.profiles[profile.lang] = profile
        self.margin_threshold = margin_threshold
        self.min_text_chars = min_text_chars

    def has(self, lang: str) -> bool:
        return lang in self.profiles

    @property
    def langs(self) -> list[str]:
        return sorted(self.profiles)

    def detect(self, text: str) -> Detection:
        return detect(
            text,
            list(self.profiles.values()),
            self.margin_threshold,
            self.min_text_chars,
        )

    @classmethod
    def from_dir(cls, profile_dir: str | Path, **kwargs) -> "Detector":
        paths = sorted(Path(profile_dir).glob("*.json"))
        if not paths:
            raise InputError(f"no language profiles found in {profile_dir}")
        return cls((load_profile(p) for p in paths), **kwargs)
