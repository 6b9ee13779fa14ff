"""System of record for sentences, tasks, translations, verdicts, workers,
exams, and cost entries.

A single in-process store guards all tables with one re-entrant lock; the
task engine serializes every mutation through it, which is what makes
assignment hand-out atomic. Snapshots serialize the full state to versioned
JSON; ``save`` writes through a temp file and ``os.replace`` so a crash at
any point leaves the previous file readable.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import quality
from .errors import ConflictError, InputError, IntegrityError
from .exam import ExamForm, ExamItem, ExamResult
from .ledger import Ledger, PriceSheet
from .quality import AutoCheckResult, TrustFlag

SNAPSHOT_FORMAT_VERSION = 1

# Source lifecycle.
POOL = "pool"
TASKED = "tasked"
EXHAUSTED = "exhausted"

# Task lifecycle.
OPEN = "open"
ASSIGNED = "assigned"
SUBMITTED = "submitted"
AUTO_REJECTED = "auto_rejected"
IN_VERIFICATION = "in_verification"
ACCEPTED = "accepted"
REJECTED = "rejected"

TASK_TRANSITIONS: dict[str, set[str]] = {
    OPEN: {ASSIGNED},
    ASSIGNED: {SUBMITTED, OPEN},
    SUBMITTED: {AUTO_REJECTED, IN_VERIFICATION},
    AUTO_REJECTED: set(),
    IN_VERIFICATION: {ACCEPTED, REJECTED},
    ACCEPTED: set(),
    REJECTED: set(),
}

TOKEN_TTL_S = 7 * 24 * 3600


@dataclass(frozen=True)
class Direction:
    """An ordered source-to-target language pair."""

    src_lang: str
    tgt_lang: str

    def __post_init__(self) -> None:
        if not self.src_lang or not self.tgt_lang:
            raise InputError("direction needs two language codes")
        if self.src_lang == self.tgt_lang:
            raise InputError("direction languages must differ")

    @property
    def code(self) -> str:
        return f"{self.src_lang}-{self.tgt_lang}"

    @classmethod
    def parse(cls, code: str) -> "Direction":
        parts = code.split("-")
        if len(parts) != 2:
            raise InputError(f"bad direction code {code!r}")
        return cls(parts[0], parts[1])


DEFAULT_DIRECTIONS = (
    Direction("che", "rus"),
    Direction("rus", "che"),
    Direction("fuv", "eng"),
    Direction("eng", "fuv"),
)


@dataclass
class SourceSentence:
    id: int
    text: str
    lang: str
    origin: str
    status: str = POOL
    norm: str = ""


@dataclass
class Worker:
    id: int
    name: str
    token: str
    langs: frozenset[str]
    registered_at: float
    token_expires_at: float
    passed_exams: set[str] = field(default_factory=set)
    judged: set[int] = field(default_factory=set)
    reserved: set[int] = field(default_factory=set)
    fast_responses: dict[str, int] = field(default_factory=dict)
    responses: dict[str, int] = field(default_factory=dict)
    verdict_count: int = 0
    flag: Optional[TrustFlag] = None


@dataclass
class TranslationTask:
    id: int
    source_id: int
    direction: str
    instruction: str
    state: str = OPEN
    assigned_to: Optional[int] = None
    deadline: Optional[float] = None


@dataclass
class Translation:
    id: int
    task_id: int
    worker_id: int
    direction: str
    text: str
    elapsed_ms: int
    submitted_at: float
    auto_check: Optional[AutoCheckResult] = None
    reserved_by: set[int] = field(default_factory=set)
    finalized_at: Optional[float] = None


@dataclass
class VerificationAssignment:
    id: int
    translation_id: int
    worker_id: Optional[int] = None
    verdict: Optional[str] = None
    elapsed_ms: Optional[int] = None
    deadline: Optional[float] = None


@dataclass(frozen=True)
class FunnelRow:
    translated: int = 0
    fully_verified: int = 0
    in_corpus: int = 0

    def ok(self) -> bool:
        return 0 <= self.in_corpus <= self.fully_verified <= self.translated

    def as_dict(self) -> dict[str, int]:
        return {
            "translated": self.translated,
            "fully_verified": self.fully_verified,
            "in_corpus": self.in_corpus,
        }


@dataclass(frozen=True)
class FunnelStats:
    directions: dict[str, FunnelRow]
    totals: FunnelRow

    def as_dict(self) -> dict:
        return {
            "directions": {
                code: row.as_dict() for code, row in sorted(self.directions.items())
            },
            "totals": self.totals.as_dict(),
        }


class Store:
    """All pipeline state, one lock, append-order iteration everywhere."""

    def __init__(
        self,
        directions: Iterable[Direction] = DEFAULT_DIRECTIONS,
        prices: PriceSheet | None = None,
        clock: Callable[[], float] | None = None,
    ) -> None:
        self.lock = threading.RLock()
        self.clock = clock or time.time
        self.directions: dict[str, Direction] = {d.code: d for d in directions}

        self.sources: dict[int, SourceSentence] = {}
        self.source_norms: dict[tuple[str, str], int] = {}
        self.workers: dict[int, Worker] = {}
        self.worker_names: dict[str, int] = {}
        self.tokens: dict[str, int] = {}
        self.tasks: dict[int, TranslationTask] = {}
        self.translations: dict[int, Translation] = {}
        self.assignments: dict[int, VerificationAssignment] = {}
        self.task_translation: dict[int, int] = {}
        self.translation_assignments: dict[int, list[int]] = {}
        self.exam_forms: dict[tuple[str, str], ExamForm] = {}
        self.active_exams: dict[str, str] = {}
        self.exam_results: dict[tuple[int, str, str], ExamResult] = {}
        self.ledger = Ledger(prices=prices, clock=lambda: self.clock())

        self.open_tasks: dict[str, deque[int]] = {
            code: deque() for code in self.directions
        }
        self.open_assignments: dict[str, deque[int]] = {
            code: deque() for code in self.directions
        }
        # translation ids per direction in acceptance order, for export
        self.accepted_order: dict[str, list[int]] = {
            code: [] for code in self.directions
        }
        # live id sets so deadline sweeps touch only held objects
        self.assigned_task_ids: set[int] = set()
        self.reserved_assignment_ids: set[int] = set()
        self._funnel: dict[str, list[int]] = {
            code: [0, 0, 0] for code in self.directions
        }
        self._next = {"source": 1, "worker": 1, "task": 1,
                      "translation": 1, "assignment": 1}

    def _take_id(self, table: str) -> int:
        value = self._next[table]
        self._next[table] = value + 1
        return value

    # ------------------------------------------------------------------
    # directions

    def direction(self, code: str) -> Direction:
        try:
            return self.directions[code]
        except KeyError:
            raise InputError(f"unknown direction {code!r}") from None

    def add_direction(self, direction: Direction) -> None:
        with self.lock:
            if direction.code in self.directions:
                return
            self.directions[direction.code] = direction
            self.open_tasks[direction.code] = deque()
            self.open_assignments[direction.code] = deque()
            self.accepted_order[direction.code] = []
            self._funnel[direction.code] = [0, 0, 0]

    # ------------------------------------------------------------------
    # workers

    def add_worker(self, name: str, langs: Iterable[str]) -> Worker:
        langset = frozenset(langs)
        if not name or not name.strip():
            raise InputError("worker name is empty")
        if not langset:
            raise InputError("worker must declare at least one language")
        with self.lock:
            if name in self.worker_names:
                raise ConflictError(f"worker name {name!r} is taken")
            now = self.clock()
            worker = Worker(
                id=self._take_id("worker"),
                name=name,
                token=secrets.token_hex(16),
                langs=langset,
                registered_at=now,
                token_expires_at=now + TOKEN_TTL_S,
            )
            self.workers[worker.id] = worker
            self.worker_names[name] = worker.id
            self.tokens[worker.token] = worker.id
            return worker

    def worker(self, worker_id: int) -> Worker:
        try:
            return self.workers[worker_id]
        except KeyError:
            raise InputError(f"unknown worker {worker_id}") from None

    def worker_by_token(self, token: str) -> Optional[Worker]:
        with self.lock:
            worker_id = self.tokens.get(token)
            if worker_id is None:
                return None
            worker = self.workers[worker_id]
            if self.clock() > worker.token_expires_at:
                return None
            return worker

    def set_flag(self, worker_id: int, flag: TrustFlag) -> None:
        with self.lock:
            self.worker(worker_id).flag = flag

    def clear_flag(self, worker_id: int) -> None:
        with self.lock:
            self.worker(worker_id).flag = None

    def flags_raised(self) -> int:
        with self.lock:
            return sum(1 for w in self.workers.values() if w.flag is not None)

    # ------------------------------------------------------------------
    # sources

    def add_source(
        self, text: str, lang: str, origin: str, norm: str
    ) -> Optional[SourceSentence]:
        """Insert unless the normalized form is already pooled."""
        with self.lock:
            key = (lang, norm)
            if key in self.source_norms:
                return None
            source = SourceSentence(
                id=self._take_id("source"),
                text=text,
                lang=lang,
                origin=origin,
                norm=norm,
            )
            self.sources[source.id] = source
            self.source_norms[key] = source.id
            return source

    def has_norm(self, lang: str, norm: str) -> bool:
        with self.lock:
            return (lang, norm) in self.source_norms

    def source(self, source_id: int) -> SourceSentence:
        try:
            return self.sources[source_id]
        except KeyError:
            raise InputError(f"unknown source {source_id}") from None

    # ------------------------------------------------------------------
    # tasks and translations

    def add_task(self, source: SourceSentence, direction: Direction,
                 instruction: str) -> TranslationTask:
        with self.lock:
            task = TranslationTask(
                id=self._take_id("task"),
                source_id=source.id,
                direction=direction.code,
                instruction=instruction,
            )
            self.tasks[task.id] = task
            self.open_tasks[direction.code].append(task.id)
            return task

    def task(self, task_id: int) -> TranslationTask:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise InputError(f"unknown task {task_id}") from None

    def set_task_state(self, task: TranslationTask, state: str) -> None:
        """Single choke point for the task state machine."""
        if state not in TASK_TRANSITIONS[task.state]:
            raise IntegrityError(
                f"illegal task transition {task.state} -> {state}"
            )
        task.state = state

    def add_translation(
        self,
        task: TranslationTask,
        worker_id: int,
        text: str,
        elapsed_ms: int,
        auto_check: AutoCheckResult,
    ) -> Translation:
        with self.lock:
            translation = Translation(
                id=self._take_id("translation"),
                task_id=task.id,
                worker_id=worker_id,
                direction=task.direction,
                text=text,
                elapsed_ms=elapsed_ms,
                submitted_at=self.clock(),
                auto_check=auto_check,
            )
            self.translations[translation.id] = translation
            self.task_translation[task.id] = translation.id
            self.translation_assignments[translation.id] = []
            return translation

    def translation(self, translation_id: int) -> Translation:
        try:
            return self.translations[translation_id]
        except KeyError:
            raise InputError(f"unknown translation {translation_id}") from None

    def admit_translation(self, task: TranslationTask,
                          translation: Translation) -> list[VerificationAssignment]:
        """Move a submission into verification: count it and fan out 3 slots."""
        with self.lock:
            self.set_task_state(task, IN_VERIFICATION)
            self._funnel[task.direction][0] += 1
            created = []
            for _ in range(3):
                assignment = VerificationAssignment(
                    id=self._take_id("assignment"),
                    translation_id=translation.id,
                )
                self.assignments[assignment.id] = assignment
                self.translation_assignments[translation.id].append(assignment.id)
                self.open_assignments[task.direction].append(assignment.id)
                created.append(assignment)
            return created

    def assignment(self, assignment_id: int) -> VerificationAssignment:
        try:
            return self.assignments[assignment_id]
        except KeyError:
            raise InputError(f"unknown assignment {assignment_id}") from None

    def record_verdict(
        self,
        assignment: VerificationAssignment,
        worker: Worker,
        verdict: str,
        elapsed_ms: int,
    ) -> tuple[str, Optional[str]]:
        """Write one verdict; finalize the translation on the third.

        Returns ("recorded", None) or ("finalized", "accepted"/"rejected").
        Double submissions and verdicts after finalization conflict.
        """
        if verdict not in quality.VERDICTS:
            raise InputError(f"unknown verdict {verdict!r}")
        with self.lock:
            if assignment.verdict is not None:
                raise ConflictError("assignment already has a verdict")
            translation = self.translation(assignment.translation_id)
            task = self.task(translation.task_id)
            if task.state not in (IN_VERIFICATION,):
                raise ConflictError("translation is already finalized")
            assignment.worker_id = worker.id
            assignment.verdict = verdict
            assignment.elapsed_ms = elapsed_ms
            assignment.deadline = None
            self.reserved_assignment_ids.discard(assignment.id)
            worker.judged.add(translation.id)
            worker.reserved.discard(translation.id)
            translation.reserved_by.discard(worker.id)
            worker.verdict_count += 1

            verdicts = self.verdicts_for(translation.id)
            if len(verdicts) < 3:
                return "recorded", None
            outcome = quality.aggregate_verdicts(verdicts)
            self.set_task_state(task, ACCEPTED if outcome == "accepted" else REJECTED)
            translation.finalized_at = self.clock()
            funnel = self._funnel[task.direction]
            funnel[1] += 1
            if outcome == "accepted":
                funnel[2] += 1
                self.accepted_order[task.direction].append(translation.id)
            return "finalized", outcome

    def verdicts_for(self, translation_id: int) -> list[str]:
        return [
            a.verdict
            for a in self.assignments_for(translation_id)
            if a.verdict is not None
        ]

    def assignments_for(self, translation_id: int) -> list[VerificationAssignment]:
        return [
            self.assignments[aid]
            for aid in self.translation_assignments.get(translation_id, [])
        ]

    # ------------------------------------------------------------------
    # exams

    def install_exam(self, form: ExamForm) -> None:
        with self.lock:
            self.direction(form.direction)
            self.exam_forms[(form.direction, form.version)] = form
            self.active_exams[form.direction] = form.version

    def active_exam(self, direction_code: str) -> Optional[ExamForm]:
        with self.lock:
            version = self.active_exams.get(direction_code)
            if version is None:
                return None
            return self.exam_forms[(direction_code, version)]

    def record_exam_result(self, result: ExamResult) -> None:
        key = (result.worker_id, result.direction, result.version)
        with self.lock:
            if key in self.exam_results:
                raise ConflictError(
                    f"worker {result.worker_id} already took exam "
                    f"{result.direction}/{result.version}"
                )
            self.exam_results[key] = result
            if result.passed:
                self.worker(result.worker_id).passed_exams.add(result.direction)

    # ------------------------------------------------------------------
    # stats, export

    def funnel_stats(self) -> FunnelStats:
        with self.lock:
            rows = {
                code: FunnelRow(*counts) for code, counts in self._funnel.items()
            }
            totals = FunnelRow(
                translated=sum(r.translated for r in rows.values()),
                fully_verified=sum(r.fully_verified for r in rows.values()),
                in_corpus=sum(r.in_corpus for r in rows.values()),
            )
            return FunnelStats(directions=rows, totals=totals)

    def recompute_funnel(self) -> FunnelStats:
        """Rebuild the funnel from raw tables (integrity cross-check)."""
        with self.lock:
            counts = {code: [0, 0, 0] for code in self.directions}
            for translation in self.translations.values():
                task = self.tasks[translation.task_id]
                if task.state in (IN_VERIFICATION, ACCEPTED, REJECTED):
                    counts[task.direction][0] += 1
                if task.state in (ACCEPTED, REJECTED):
                    counts[task.direction][1] += 1
                if task.state == ACCEPTED:
                    counts[task.direction][2] += 1
            rows = {code: FunnelRow(*c) for code, c in counts.items()}
            totals = FunnelRow(
                translated=sum(r.translated for r in rows.values()),
                fully_verified=sum(r.fully_verified for r in rows.values()),
                in_corpus=sum(r.in_corpus for r in rows.values()),
            )
            return FunnelStats(directions=rows, totals=totals)

    def export_corpus(
        self,
        direction_code: str,
        format: str = "jsonl",
        include_pending: bool = False,
    ) -> bytes:
        """Accepted records for one direction, UTF-8, LF line endings."""
        if format not in ("jsonl", "tsv"):
            raise InputError(f"unknown export format {format!r}")
        with self.lock:
            direction = self.direction(direction_code)
            ids = list(self.accepted_order[direction_code])
            if include_pending:
                ids += [
                    t.id
                    for t in self.translations.values()
                    if t.direction == direction_code
                    and self.tasks[t.task_id].state == IN_VERIFICATION
                ]
            lines = []
            for translation_id in ids:
                translation = self.translations[translation_id]
                source = self.sources[self.tasks[translation.task_id].source_id]
                if format == "tsv":
                    src_text = source.text.replace("\t", " ")
                    tgt_text = translation.text.replace("\t", " ")
                    lines.append(f"{src_text}\t{tgt_text}")
                else:
                    lines.append(
                        json.dumps(
                            {
                                "src": source.text,
                                "tgt": translation.text,
                                "src_lang": direction.src_lang,
                                "tgt_lang": direction.tgt_lang,
                                "verdicts": sorted(
                                    self.verdicts_for(translation_id)
                                ),
                            },
                            ensure_ascii=False,
                            sort_keys=True,
                        )
                    )
        body = "\n".join(lines)
        return (body + "\n" if body else "").encode("utf-8")

    # ------------------------------------------------------------------
    # snapshot / restore

    def snapshot(self) -> bytes:
        with self.lock:
            state = {
                "format_version": SNAPSHOT_FORMAT_VERSION,
                "directions": sorted(self.directions),
                "next": dict(self._next),
                "sources": [
                    [s.id, s.text, s.lang, s.origin, s.status, s.norm]
                    for s in self.sources.values()
                ],
                "workers": [
                    {
                        "id": w.id,
                        "name": w.name,
                        "token": w.token,
                        "langs": sorted(w.langs),
                        "registered_at": w.registered_at,
                        "token_expires_at": w.token_expires_at,
                        "passed_exams": sorted(w.passed_exams),
                        "judged": sorted(w.judged),
                        "reserved": sorted(w.reserved),
                        "fast_responses": w.fast_responses,
                        "responses": w.responses,
                        "verdict_count": w.verdict_count,
                        "flag": (
                            [w.flag.reason, w.flag.evidence_count, w.flag.flagged_at]
                            if w.flag
                            else None
                        ),
                    }
                    for w in self.workers.values()
                ],
                "tasks": [
                    [t.id, t.source_id, t.direction, t.instruction, t.state,
                     t.assigned_to, t.deadline]
                    for t in self.tasks.values()
                ],
                "translations": [
                    {
                        "id": t.id,
                        "task_id": t.task_id,
                        "worker_id": t.worker_id,
                        "direction": t.direction,
                        "text": t.text,
                        "elapsed_ms": t.elapsed_ms,
                        "submitted_at": t.submitted_at,
                        "finalized_at": t.finalized_at,
                        "reserved_by": sorted(t.reserved_by),
                        "auto_check": (
                            [
                                t.auto_check.passed,
                                t.auto_check.failed_check,
                                t.auto_check.detected_lang,
                                t.auto_check.length_ratio,
                            ]
                            if t.auto_check
                            else None
                        ),
                    }
                    for t in self.translations.values()
                ],
                "assignments": [
                    [a.id, a.translation_id, a.worker_id, a.verdict,
                     a.elapsed_ms, a.deadline]
                    for a in self.assignments.values()
                ],
                "exam_forms": [
                    {
                        "direction": form.direction,
                        "version": form.version,
                        "items": [
                            [i.src, i.tgt, i.true_label, i.distractor_kind]
                            for i in form.items
                        ],
                    }
                    for form in self.exam_forms.values()
                ],
                "active_exams": dict(self.active_exams),
                "exam_results": [
                    [r.worker_id, r.direction, r.version, r.score, r.passed,
                     r.taken_at]
                    for r in self.exam_results.values()
                ],
                "open_tasks": {k: list(v) for k, v in self.open_tasks.items()},
                "open_assignments": {
                    k: list(v) for k, v in self.open_assignments.items()
                },
                "accepted_order": {
                    k: list(v) for k, v in self.accepted_order.items()
                },
                "funnel": {k: list(v) for k, v in self._funnel.items()},
                "ledger": self.ledger.dump_state(),
            }
        return json.dumps(state, ensure_ascii=False, sort_keys=True).encode("utf-8")

    @classmethod
    def restore(
        cls, blob: bytes, clock: Callable[[], float] | None = None
    ) -> "Store":
        try:
            state = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise IntegrityError(f"snapshot is not readable: {exc}") from exc
        try:
            version = state["format_version"]
            if version != SNAPSHOT_FORMAT_VERSION:
                raise IntegrityError(
                    f"snapshot format {version} unsupported, "
                    f"expected {SNAPSHOT_FORMAT_VERSION}"
                )
            store = cls(
                directions=[Direction.parse(c) for c in state["directions"]],
                clock=clock,
            )
            store._next = {k: int(v) for k, v in state["next"].items()}
            for sid, text, lang, origin, status, norm in state["sources"]:
                source = SourceSentence(sid, text, lang, origin, status, norm)
                store.sources[sid] = source
                store.source_norms[(lang, norm)] = sid
            for w in state["workers"]:
                flag = None
                if w["flag"]:
                    reason, evidence, at = w["flag"]
                    flag = TrustFlag(w["id"], reason, evidence, at)
                worker = Worker(
                    id=w["id"],
                    name=w["name"],
                    token=w["token"],
                    langs=frozenset(w["langs"]),
                    registered_at=w["registered_at"],
                    token_expires_at=w["token_expires_at"],
                    passed_exams=set(w["passed_exams"]),
                    judged=set(w["judged"]),
                    reserved=set(w["reserved"]),
                    fast_responses=dict(w["fast_responses"]),
                    responses=dict(w["responses"]),
                    verdict_count=w["verdict_count"],
                    flag=flag,
                )
                store.workers[worker.id] = worker
                store.worker_names[worker.name] = worker.id
                store.tokens[worker.token] = worker.id
            for tid, source_id, direction, instruction, task_state, assigned_to, deadline in state["tasks"]:
                store.tasks[tid] = TranslationTask(
                    tid, source_id, direction, instruction, task_state,
                    assigned_to, deadline,
                )
            for t in state["translations"]:
                check = None
                if t["auto_check"]:
                    passed, failed, detected, ratio = t["auto_check"]
                    check = AutoCheckResult(passed, failed, detected, ratio)
                store.translations[t["id"]] = Translation(
                    id=t["id"],
                    task_id=t["task_id"],
                    worker_id=t["worker_id"],
                    direction=t["direction"],
                    text=t["text"],
                    elapsed_ms=t["elapsed_ms"],
                    submitted_at=t["submitted_at"],
                    auto_check=check,
                    reserved_by=set(t["reserved_by"]),
                    finalized_at=t["finalized_at"],
                )
                store.task_translation[t["task_id"]] = t["id"]
                store.translation_assignments[t["id"]] = []
            for aid, translation_id, worker_id, verdict, elapsed_ms, deadline in state["assignments"]:
                store.assignments[aid] = VerificationAssignment(
                    aid, translation_id, worker_id, verdict, elapsed_ms, deadline
                )
                store.translation_assignments[translation_id].append(aid)
            for f in state["exam_forms"]:
                form = ExamForm(
                    direction=f["direction"],
                    version=f["version"],
                    items=tuple(
                        ExamItem(src, tgt, label, kind)
                        for src, tgt, label, kind in f["items"]
                    ),
                )
                store.exam_forms[(form.direction, form.version)] = form
            store.active_exams = dict(state["active_exams"])
            for worker_id, direction, version, score, passed, taken_at in state["exam_results"]:
                store.exam_results[(worker_id, direction, version)] = ExamResult(
                    worker_id, direction, version, score, passed, taken_at
                )
            store.open_tasks = {
                k: deque(v) for k, v in state["open_tasks"].items()
            }
            store.open_assignments = {
                k: deque(v) for k, v in state["open_assignments"].items()
            }
            store.accepted_order = {
                k: list(v) for k, v in state["accepted_order"].items()
            }
            store._funnel = {k: list(v) for k, v in state["funnel"].items()}
            store.ledger = Ledger.from_state(
                state["ledger"], clock=lambda: store.clock()
            )
            store.assigned_task_ids = {
                t.id for t in store.tasks.values() if t.state == ASSIGNED
            }
            store.reserved_assignment_ids = {
                a.id
                for a in store.assignments.values()
                if a.worker_id is not None and a.verdict is None
            }
            return store
        except (KeyError, TypeError, ValueError) as exc:
            raise IntegrityError(f"snapshot is corrupt: {exc}") from exc

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.snapshot())
        os.replace(tmp, path)

    @classmethod
    def load(
        cls, path: str | Path, clock: Callable[[], float] | None = None
    ) -> "Store":
        return cls.restore(Path(path).read_bytes(), clock=clock)

    # ------------------------------------------------------------------
    # integrity

    def check_integrity(self) -> None:
        """Referential and funnel invariants; raises IntegrityError."""
        with self.lock:
            for translation in self.translations.values():
                if translation.task_id not in self.tasks:
                    raise IntegrityError(
                        f"translation {translation.id} has no task"
                    )
                if translation.worker_id not in self.workers:
                    raise IntegrityError(
                        f"translation {translation.id} has no worker"
                    )
            for assignment in self.assignments.values():
                if assignment.translation_id not in self.translations:
                    raise IntegrityError(
                        f"assignment {assignment.id} has no translation"
                    )
                if (
                    assignment.worker_id is not None
                    and assignment.worker_id not in self.workers
                ):
                    raise IntegrityError(
                        f"assignment {assignment.id} has no worker"
                    )
            for task in self.tasks.values():
                if task.source_id not in self.sources:
                    raise IntegrityError(f"task {task.id} has no source")
                if task.state in (ACCEPTED, REJECTED):
                    translation = self._translation_for_task(task.id)
                    verdict_workers = [
                        a.worker_id
                        for a in self.assignments_for(translation.id)
                        if a.verdict is not None
                    ]
                    if len(verdict_workers) != 3:
                        raise IntegrityError(
                            f"finalized task {task.id} lacks 3 verdicts"
                        )
                    if len(set(verdict_workers)) != 3:
                        raise IntegrityError(
                            f"task {task.id} verdicts are not from "
                            "3 distinct workers"
                        )
                    if translation.worker_id in verdict_workers:
                        raise IntegrityError(
                            f"task {task.id} was judged by its author"
                        )
            live = self.funnel_stats()
            recomputed = self.recompute_funnel()
            if live.as_dict() != recomputed.as_dict():
                raise IntegrityError("funnel counters drifted from tables")
            for code, row in live.directions.items():
                if not row.ok():
                    raise IntegrityError(f"funnel monotonicity broken in {code}")

    def _translation_for_task(self, task_id: int) -> Translation:
        translation_id = self.task_translation.get(task_id)
        if translation_id is None:
            raise IntegrityError(f"task {task_id} has no translation")
        return self.translations[translation_id]
