"""Turn raw monolingual lines into a clean pool of source sentences.

The cleaning cascade runs in a fixed order: malformed lines drop first,
then template repeats, then exact duplicates (by normalized form, within
the batch and against the persisted pool), then wrong-language lines.
Normalization folds case, whitespace, and digit runs so that bot-generated
stub sentences differing only in numbers collapse onto one form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError
from .langid import Detector
from .store import Store

_WS_RE = re.compile(r"\s+")
_DIGITS_RE = re.compile(r"\d+")

DEFAULT_MIN_CHARS = 15
DEFAULT_MAX_CHARS = 500
DEFAULT_TEMPLATE_MAX_OCCURRENCES = 2


@dataclass(frozen=True)
class RawLine:
    text: str
    origin: str


@dataclass(frozen=True)
class IngestConfig:
    min_chars: int = DEFAULT_MIN_CHARS
    max_chars: int = DEFAULT_MAX_CHARS
    template_max_occurrences: int = DEFAULT_TEMPLATE_MAX_OCCURRENCES


@dataclass(frozen=True)
class IngestReport:
    input_count: int
    kept: int
    dropped_template: int
    dropped_duplicate: int
    dropped_language: int
    dropped_malformed: int

    def __post_init__(self) -> None:
        buckets = (
            self.kept
            + self.dropped_template
            + self.dropped_duplicate
            + self.dropped_language
            + self.dropped_malformed
        )
        if buckets != self.input_count or min(self.as_dict().values()) < 0:
            raise AssertionError(f"ingest report does not balance: {self}")

    def as_dict(self) -> dict[str, int]:
        return {
            "input_count": self.input_count,
            "kept": self.kept,
            "dropped_template": self.dropped_template,
            "dropped_duplicate": self.dropped_duplicate,
            "dropped_language": self.dropped_language,
            "dropped_malformed": self.dropped_malformed,
        }


def normalize_sentence(text: str) -> str:
    """Trim, collapse whitespace, lowercase, fold digit runs to "0"."""
    text = _WS_RE.sub(" ", text).strip().lower()
    return _DIGITS_RE.sub("0", text)


def filter_templates(
    lines: list[RawLine], max_occurrences: int
) -> tuple[list[RawLine], list[RawLine]]:
    """Split a batch into kept lines and over-repeated template lines.

    When a normalized form occurs more than ``max_occurrences`` times in
    the batch, only its first occurrence survives. Order is preserved.
    """
    if max_occurrences < 1:
        raise ConfigError("max_occurrences must be at least 1")
    counts: dict[str, int] = {}
    for line in lines:
        norm = normalize_sentence(line.text)
        counts[norm] = counts.get(norm, 0) + 1
    kept: list[RawLine] = []
    flagged: list[RawLine] = []
    seen: set[str] = set()
    for line in lines:
        norm = normalize_sentence(line.text)
        if counts[norm] > max_occurrences and norm in seen:
            flagged.append(line)
        else:
            seen.add(norm)
            kept.append(line)
    return kept, flagged


def ingest(
    store: Store,
    lines: Iterable[RawLine],
    expected_lang: str,
    detector: Detector,
    config: IngestConfig = IngestConfig(),
) -> IngestReport:
    """Clean a batch and persist the survivors with status ``pool``.

    Language filtering is strict here: a line must be *confidently*
    detected as ``expected_lang`` to enter the pool (monolingual text is
    cheap compared to worker effort spent on a bad source).
    """
    if not detector.has(expected_lang):
        raise ConfigError(f"detector has no profile for {expected_lang!r}")
    batch = list(lines)
    input_count = len(batch)

    malformed = 0
    shaped: list[RawLine] = []
    for line in batch:
        trimmed = line.text.strip()
        if not trimmed or not config.min_chars <= len(trimmed) <= config.max_chars:
            malformed += 1
            continue
        shaped.append(RawLine(text=trimmed, origin=line.origin))

    shaped, template_flagged = filter_templates(
        shaped, config.template_max_occurrences
    )

    kept = 0
    duplicates = 0
    wrong_language = 0
    with store.lock:
        batch_norms: set[str] = set()
        for line in shaped:
            norm = normalize_sentence(line.text)
            if norm in batch_norms or store.has_norm(expected_lang, norm):
                duplicates += 1
                continue
            batch_norms.add(norm)
            detection = detector.detect(line.text)
            if not (detection.confident and detection.lang == expected_lang):
                wrong_language += 1
                continue
            store.add_source(
                text=line.text, lang=expected_lang, origin=line.origin, norm=norm
            )
            kept += 1

    return IngestReport(
        input_count=input_count,
        kept=kept,
        dropped_template=len(template_flagged),
        dropped_duplicate=duplicates,
        dropped_language=wrong_language,
        dropped_malformed=malformed,
    )
