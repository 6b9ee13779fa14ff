"""Acceptance logic: automatic submission checks, majority vote, fraud flags.

Everything here is a pure function over its inputs; persistence of results
and flags is the caller's business.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InputError
from .langid import Detector

GOOD = "good"
BAD = "bad"
VERDICTS = (GOOD, BAD)

CHECK_EMPTY = "empty"
CHECK_LENGTH = "length"
CHECK_LANGUAGE = "language"

KIND_TRANSLATE = "translate"
KIND_VERIFY = "verify"

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class QCConfig:
    """Thresholds for the automatic checks, all configurable."""

    length_ratio_max: float = 3.0
    fast_ms: dict[str, int] = field(
        default_factory=lambda: {KIND_TRANSLATE: 10_000, KIND_VERIFY: 3_000}
    )
    fast_min_occurrences: int = 3
    langid_margin: float = 0.05


@dataclass(frozen=True)
class AutoCheckResult:
    passed: bool
    failed_check: Optional[str] = None
    detected_lang: Optional[str] = None
    # max/min of whitespace-stripped character counts; None when one side
    # is empty and no ratio exists.
    length_ratio: Optional[float] = None


@dataclass(frozen=True)
class TrustFlag:
    worker_id: int
    reason: str
    evidence_count: int
    flagged_at: float


def _visible_len(text: str) -> int:
    return len(_WS_RE.sub("", text))


def length_ratio_check(
    src: str, tgt: str, max_ratio: float = 3.0
) -> tuple[bool, float]:
    """Symmetric character-count ratio check.

    The ratio is max/min over whitespace-stripped lengths; only a ratio
    strictly above ``max_ratio`` fails (a difference of exactly three
    times is allowed).
    """
    a, b = _visible_len(src), _visible_len(tgt)
    if a == 0 or b == 0:
        raise InputError("length ratio needs two non-empty strings")
    ratio = max(a, b) / min(a, b)
    return ratio <= max_ratio, ratio


def auto_check(
    translation_text: str,
    source_text: str,
    target_lang: str,
    detector: Detector,
    config: QCConfig = QCConfig(),
) -> AutoCheckResult:
    """Run the automatic checks in order: empty, length, language.

    The language check only rejects on a *confident* detection of a
    non-target language; abstentions pass through to human verification
    so detector uncertainty never destroys worker output on its own.
    """
    if _visible_len(translation_text) == 0:
        return AutoCheckResult(passed=False, failed_check=CHECK_EMPTY)
    ok, ratio = length_ratio_check(
        source_text, translation_text, config.length_ratio_max
    )
    if not ok:
        return AutoCheckResult(
            passed=False, failed_check=CHECK_LENGTH, length_ratio=ratio
        )
    detection = detector.detect(translation_text)
    detected = detection.lang if detection.confident else None
    if detection.confident and detection.lang != target_lang:
        return AutoCheckResult(
            passed=False,
            failed_check=CHECK_LANGUAGE,
            detected_lang=detection.lang,
            length_ratio=ratio,
        )
    return AutoCheckResult(passed=True, detected_lang=detected, length_ratio=ratio)


def aggregate_verdicts(verdicts: Sequence[str]) -> str:
    """Majority vote over exactly three good/bad verdicts.

    Returns ``"accepted"`` when at least two verdicts are good; pure and
    order-independent.
    """
    if len(verdicts) != 3:
        raise InputError(f"expected exactly 3 verdicts, got {len(verdicts)}")
    for verdict in verdicts:
        if verdict not in VERDICTS:
            raise InputError(f"unknown verdict {verdict!r}")
    good_votes = sum(1 for verdict in verdicts if verdict == GOOD)
    return "accepted" if good_votes >= 2 else "rejected"


def flag_fast_responses(
    worker_id: int,
    history: Sequence[tuple[str, int]],
    config: QCConfig = QCConfig(),
    now: float = 0.0,
) -> Optional[TrustFlag]:
    """Flag a worker whose responses are implausibly fast.

    ``history`` is (kind, elapsed_ms) per completed task. A response is
    fast when it undercuts the per-kind threshold; a flag is emitted once
    the count reaches ``fast_min_occurrences``.
    """
    fast = sum(
        1
        for kind, elapsed_ms in history
        if elapsed_ms < config.fast_ms.get(kind, 0)
    )
    if fast >= config.fast_min_occurrences:
        return TrustFlag(
            worker_id=worker_id,
            reason="fast_responses",
            evidence_count=fast,
            flagged_at=now,
        )
    return None
