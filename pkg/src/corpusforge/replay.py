"""Accounting replay of a recorded collection run.

A replay fixture is a JSONL event log with three event kinds:

    {"event": "register",   "name": ..., "langs": [...]}
    {"event": "translated", "direction": ..., "source_text": ...,
     "text": ..., "worker": ..., "elapsed_ms": ...}
    {"event": "verdict",    "direction": ..., "index": ...,
     "worker": ..., "verdict": "good"|"bad", "elapsed_ms": ...}

Replaying applies the events to a fresh store at the accounting level:
tasks, translations, verdicts, and payments are created with full
referential integrity, but no automatic checks rerun (the log records
submissions that had already entered verification). ``index`` counts
translated events per direction from zero.

The bundled fixture (``fixtures/reference_run.jsonl``) is constructed so
its per-direction funnel reproduces the reference collection run this
project models; build it with ``scripts/build_reference_fixture.py``.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path
from typing import Iterable, Optional

from . import synthlang
from .engine import render_instruction
from .errors import InputError
from .quality import AutoCheckResult, length_ratio_check
from .store import ASSIGNED, SUBMITTED, FunnelStats, Store, Direction

# direction -> (translated, fully verified, in corpus)
REFERENCE_FUNNEL: dict[str, tuple[int, int, int]] = {
    "fuv-eng": (220, 88, 53),
    "eng-fuv": (311, 286, 176),
    "che-rus": (491, 491, 380),
    "rus-che": (605, 605, 469),
}

FIXTURE_PATH = Path(__file__).resolve().parents[2] / "fixtures" / "reference_run.jsonl"

_ACCEPT_PATTERNS = [
    ("good", "good", "good"),
    ("good", "good", "bad"),
    ("good", "bad", "good"),
    ("bad", "good", "good"),
]
_REJECT_PATTERNS = [
    ("bad", "bad", "bad"),
    ("bad", "bad", "good"),
    ("bad", "good", "bad"),
    ("good", "bad", "bad"),
]


def build_reference_events(seed: int = 11) -> list[dict]:
    """Deterministic event log matching the reference funnel exactly."""
    rng = random.Random(f"reference-fixture:{seed}")
    verifiers = [f"ref-verifier-{i}" for i in (1, 2, 3)]
    all_langs = sorted({lang for code in REFERENCE_FUNNEL for lang in code.split("-")})
    events: list[dict] = [
        {"event": "register", "name": "ref-translator", "langs": all_langs}
    ]
    events += [
        {"event": "register", "name": name, "langs": all_langs}
        for name in verifiers
    ]
    for code, (translated, verified, accepted) in REFERENCE_FUNNEL.items():
        src, tgt = code.split("-")
        for _ in range(translated):
            n_words = rng.randint(5, 11)
            events.append(
                {
                    "event": "translated",
                    "direction": code,
                    "source_text": synthlang.sentence(src, rng, n_words),
                    "text": synthlang.sentence(
                        tgt, rng, max(3, n_words + rng.randint(-1, 1))
                    ),
                    "worker": "ref-translator",
                    "elapsed_ms": int(rng.lognormvariate(math.log(45_000), 0.4)),
                }
            )
        accept_flags = [True] * accepted + [False] * (verified - accepted)
        rng.shuffle(accept_flags)
        for index, accept in enumerate(accept_flags):
            pattern = rng.choice(
                _ACCEPT_PATTERNS if accept else _REJECT_PATTERNS
            )
            for verifier, verdict in zip(verifiers, pattern):
                events.append(
                    {
                        "event": "verdict",
                        "direction": code,
                        "index": index,
                        "worker": verifier,
                        "verdict": verdict,
                        "elapsed_ms": int(
                            rng.lognormvariate(math.log(8_000), 0.4)
                        ),
                    }
                )
    return events


def write_events(events: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            handle.write(json.dumps(event, ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def load_events(path: str | Path) -> list[dict]:
    events = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        try:
            event = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        if not isinstance(event, dict):
            raise InputError(f"{path}:{line_no}: event must be an object")
        events.append(event)
    return events


def _get(event: dict, key: str):
    try:
        return event[key]
    except KeyError:
        raise InputError(f"replay event missing {key!r}: {event}") from None


def replay_events(
    events: Iterable[dict], store: Optional[Store] = None
) -> tuple[FunnelStats, Store]:
    """Apply an event log; returns the resulting funnel and the store."""
    events = list(events)
    codes = sorted(
        {
            _get(event, "direction")
            for event in events
            if event.get("event") in ("translated", "verdict")
        }
    )
    if store is None:
        store = Store(directions=[Direction.parse(code) for code in codes])
    else:
        for code in codes:
            store.add_direction(Direction.parse(code))

    workers_by_name: dict[str, int] = {}
    per_direction: dict[str, list[int]] = {code: [] for code in codes}

    with store.lock:
        for event in events:
            kind = _get(event, "event")
            if kind == "register":
                worker = store.add_worker(_get(event, "name"), _get(event, "langs"))
                workers_by_name[worker.name] = worker.id
            elif kind == "translated":
                code = _get(event, "direction")
                direction = store.direction(code)
                worker_name = _get(event, "worker")
                if worker_name not in workers_by_name:
                    raise InputError(f"unknown replay worker {worker_name!r}")
                worker_id = workers_by_name[worker_name]
                index = len(per_direction[code])
                source = store.add_source(
                    text=_get(event, "source_text"),
                    lang=direction.src_lang,
                    origin="replay",
                    norm=f"replay:{code}:{index}",
                )
                task = store.add_task(source, direction, render_instruction(direction))
                store.open_tasks[code].pop()
                store.set_task_state(task, ASSIGNED)
                store.set_task_state(task, SUBMITTED)
                text = _get(event, "text")
                _, ratio = length_ratio_check(source.text, text, math.inf)
                translation = store.add_translation(
                    task,
                    worker_id,
                    text,
                    int(_get(event, "elapsed_ms")),
                    AutoCheckResult(passed=True, length_ratio=ratio),
                )
                store.admit_translation(task, translation)
                for _ in range(3):
                    store.open_assignments[code].pop()
                store.ledger.record_translation_payment(worker_id)
                per_direction[code].append(translation.id)
            elif kind == "verdict":
                code = _get(event, "direction")
                index = _get(event, "index")
                translations = per_direction.get(code, [])
                if not isinstance(index, int) or not 0 <= index < len(translations):
                    raise InputError(
                        f"verdict references unknown translation {code}[{index}]"
                    )
                worker_name = _get(event, "worker")
                if worker_name not in workers_by_name:
                    raise InputError(f"unknown replay worker {worker_name!r}")
                worker = store.worker(workers_by_name[worker_name])
                translation_id = translations[index]
                assignment = next(
                    (
                        a
                        for a in store.assignments_for(translation_id)
                        if a.verdict is None
                    ),
                    None,
                )
                if assignment is None:
                    raise InputError(
                        f"translation {code}[{index}] already has 3 verdicts"
                    )
                assignment.worker_id = worker.id
                store.record_verdict(
                    assignment, worker, _get(event, "verdict"),
                    int(_get(event, "elapsed_ms")),
                )
                store.ledger.settle_verification_payments(
                    worker.id, worker.verdict_count
                )
            else:
                raise InputError(f"unknown replay event kind {kind!r}")

    return store.funnel_stats(), store


def replay_funnel(fixture: str | Path | Iterable[dict]) -> FunnelStats:
    """Replay a fixture (path or event list) and return its funnel."""
    if isinstance(fixture, (str, Path)):
        events = load_events(fixture)
    else:
        events = list(fixture)
    stats, _ = replay_events(events)
    return stats
