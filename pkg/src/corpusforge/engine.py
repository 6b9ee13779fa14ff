"""Task lifecycle: creation, assignment, submission, verdict fan-in.

The engine owns policy (eligibility, deadlines, payments, trust flags) and
performs every mutation inside the store's lock, so assignment hand-out is
linearizable: two workers racing for the last open task cannot both get it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import quality
from .errors import Forbidden, InputError
from .langid import Detector
from .quality import KIND_TRANSLATE, KIND_VERIFY, QCConfig, TrustFlag
from .store import (
    ASSIGNED,
    AUTO_REJECTED,
    IN_VERIFICATION,
    OPEN,
    POOL,
    SUBMITTED,
    TASKED,
    Direction,
    Store,
    TranslationTask,
    Worker,
)

INSTRUCTION_TEMPLATE = "Translate the sentence from {SRC} to {TGT}"

LANGUAGE_NAMES = {
    "che": "Chechen",
    "rus": "Russian",
    "fuv": "Fula",
    "eng": "English",
    "ell": "Greek",
}

DEFAULT_TRANSLATE_DEADLINE_S = 30 * 60
DEFAULT_VERIFY_DEADLINE_S = 10 * 60


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


def render_instruction(direction: Direction) -> str:
    return INSTRUCTION_TEMPLATE.format(
        SRC=language_name(direction.src_lang),
        TGT=language_name(direction.tgt_lang),
    )


@dataclass(frozen=True)
class TranslateOffer:
    kind: str
    task_id: int
    direction: str
    instruction: str
    source_text: str
    deadline: float


@dataclass(frozen=True)
class VerifyOffer:
    kind: str
    assignment_id: int
    direction: str
    instruction: str
    source_text: str
    candidate_text: str
    deadline: float


@dataclass(frozen=True)
class SubmissionOutcome:
    status: str  # "queued_for_verification" | "auto_rejected"
    reason: Optional[str] = None


@dataclass(frozen=True)
class VerdictOutcome:
    status: str  # "recorded" | "finalized"
    result: Optional[str] = None  # "accepted" | "rejected"


class TaskEngine:
    def __init__(
        self,
        store: Store,
        detector: Detector,
        qc: QCConfig = QCConfig(),
        translate_deadline_s: float = DEFAULT_TRANSLATE_DEADLINE_S,
        verify_deadline_s: float = DEFAULT_VERIFY_DEADLINE_S,
        exam_pass_threshold: int = 8,
    ) -> None:
        self.store = store
        self.detector = detector
        self.qc = qc
        self.translate_deadline_s = translate_deadline_s
        self.verify_deadline_s = verify_deadline_s
        self.exam_pass_threshold = exam_pass_threshold

    # ------------------------------------------------------------------
    # task creation

    def create_translation_tasks(
        self, source_ids: list[int], direction: Direction
    ) -> list[TranslationTask]:
        store = self.store
        with store.lock:
            if direction.code not in store.directions:
                store.add_direction(direction)
            sources = []
            for source_id in source_ids:
                source = store.source(source_id)
                if source.lang != direction.src_lang:
                    raise InputError(
                        f"source {source_id} is {source.lang!r}, direction "
                        f"expects {direction.src_lang!r}"
                    )
                if source.status != POOL:
                    raise InputError(
                        f"source {source_id} is not in the pool "
                        f"(status {source.status!r})"
                    )
                sources.append(source)
            instruction = render_instruction(direction)
            tasks = []
            for source in sources:
                source.status = TASKED
                tasks.append(store.add_task(source, direction, instruction))
            return tasks

    # ------------------------------------------------------------------
    # assignment

    def assign_next(
        self, worker_id: int, kind: str
    ) -> Optional[TranslateOffer | VerifyOffer]:
        if kind not in (KIND_TRANSLATE, KIND_VERIFY):
            raise InputError(f"unknown task kind {kind!r}")
        store = self.store
        with store.lock:
            worker = store.worker(worker_id)
            if worker.flag is not None:
                return None
            now = store.clock()
            self.expire_overdue(now)
            if kind == KIND_TRANSLATE:
                return self._assign_translate(worker, now)
            return self._assign_verify(worker, now)

    def _eligible_directions(self, worker: Worker, kind: str) -> list[str]:
        store = self.store
        codes = []
        for code, direction in store.directions.items():
            if not {direction.src_lang, direction.tgt_lang} <= worker.langs:
                continue
            if kind == KIND_VERIFY and code not in worker.passed_exams:
                continue
            codes.append(code)
        return codes

    def _assign_translate(
        self, worker: Worker, now: float
    ) -> Optional[TranslateOffer]:
        store = self.store
        # Oldest task first across every direction the worker declared.
        best_code = None
        best_head = None
        for code in self._eligible_directions(worker, KIND_TRANSLATE):
            queue = store.open_tasks[code]
            if queue and (best_head is None or queue[0] < best_head):
                best_head = queue[0]
                best_code = code
        if best_code is None:
            return None
        task_id = store.open_tasks[best_code].popleft()
        task = store.task(task_id)
        store.set_task_state(task, ASSIGNED)
        task.assigned_to = worker.id
        task.deadline = now + self.translate_deadline_s
        store.assigned_task_ids.add(task.id)
        source = store.source(task.source_id)
        return TranslateOffer(
            kind=KIND_TRANSLATE,
            task_id=task.id,
            direction=task.direction,
            instruction=task.instruction,
            source_text=source.text,
            deadline=task.deadline,
        )

    def _assign_verify(self, worker: Worker, now: float) -> Optional[VerifyOffer]:
        store = self.store
        candidate_codes = [
            code
            for code in self._eligible_directions(worker, KIND_VERIFY)
            if store.open_assignments[code]
        ]
        while candidate_codes:
            code = min(candidate_codes, key=lambda c: store.open_assignments[c][0])
            queue = store.open_assignments[code]
            skipped = []
            found = None
            while queue:
                assignment = store.assignment(queue.popleft())
                translation = store.translation(assignment.translation_id)
                if (
                    translation.worker_id == worker.id
                    or translation.id in worker.judged
                    or worker.id in translation.reserved_by
                ):
                    skipped.append(assignment.id)
                    continue
                found = (assignment, translation)
                break
            queue.extendleft(reversed(skipped))
            if found is None:
                candidate_codes.remove(code)
                continue
            assignment, translation = found
            assignment.worker_id = worker.id
            assignment.deadline = now + self.verify_deadline_s
            store.reserved_assignment_ids.add(assignment.id)
            worker.reserved.add(translation.id)
            translation.reserved_by.add(worker.id)
            task = store.task(translation.task_id)
            source = store.source(task.source_id)
            return VerifyOffer(
                kind=KIND_VERIFY,
                assignment_id=assignment.id,
                direction=task.direction,
                instruction=task.instruction,
                source_text=source.text,
                candidate_text=translation.text,
                deadline=assignment.deadline,
            )
        return None

    # ------------------------------------------------------------------
    # submissions

    def submit_translation(
        self, task_id: int, worker_id: int, text: str, elapsed_ms: int
    ) -> SubmissionOutcome:
        if not text:
            raise InputError("translation text is empty")
        if elapsed_ms < 0:
            raise InputError("elapsed_ms must be non-negative")
        store = self.store
        with store.lock:
            worker = store.worker(worker_id)
            task = store.task(task_id)
            now = store.clock()
            if task.state == ASSIGNED and task.deadline and now > task.deadline:
                self._revert_task(task)
            if task.state != ASSIGNED or task.assigned_to != worker_id:
                raise Forbidden(f"task {task_id} is not assigned to you")
            direction = store.direction(task.direction)
            source = store.source(task.source_id)
            check = quality.auto_check(
                text, source.text, direction.tgt_lang, self.detector, self.qc
            )
            store.set_task_state(task, SUBMITTED)
            task.assigned_to = None
            task.deadline = None
            store.assigned_task_ids.discard(task.id)
            translation = store.add_translation(
                task, worker_id, text, elapsed_ms, check
            )
            self._note_response(worker, KIND_TRANSLATE, elapsed_ms, now)
            if not check.passed:
                store.set_task_state(task, AUTO_REJECTED)
                return SubmissionOutcome(
                    status="auto_rejected", reason=check.failed_check
                )
            store.admit_translation(task, translation)
            store.ledger.record_translation_payment(worker_id)
            return SubmissionOutcome(status="queued_for_verification")

    def submit_verdict(
        self, assignment_id: int, worker_id: int, verdict: str, elapsed_ms: int
    ) -> VerdictOutcome:
        if elapsed_ms < 0:
            raise InputError("elapsed_ms must be non-negative")
        store = self.store
        with store.lock:
            worker = store.worker(worker_id)
            assignment = store.assignment(assignment_id)
            now = store.clock()
            if (
                assignment.verdict is None
                and assignment.worker_id == worker_id
                and assignment.deadline
                and now > assignment.deadline
            ):
                self._revert_assignment(assignment)
            if assignment.worker_id != worker_id:
                raise Forbidden(
                    f"assignment {assignment_id} is not reserved by you"
                )
            status, result = store.record_verdict(
                assignment, worker, verdict, elapsed_ms
            )
            store.ledger.settle_verification_payments(
                worker_id, worker.verdict_count
            )
            self._note_response(worker, KIND_VERIFY, elapsed_ms, now)
            return VerdictOutcome(status=status, result=result)

    # ------------------------------------------------------------------
    # housekeeping

    def _note_response(
        self, worker: Worker, kind: str, elapsed_ms: int, now: float
    ) -> None:
        worker.responses[kind] = worker.responses.get(kind, 0) + 1
        if elapsed_ms < self.qc.fast_ms.get(kind, 0):
            worker.fast_responses[kind] = worker.fast_responses.get(kind, 0) + 1
        total_fast = sum(worker.fast_responses.values())
        if worker.flag is None and total_fast >= self.qc.fast_min_occurrences:
            worker.flag = TrustFlag(
                worker_id=worker.id,
                reason="fast_responses",
                evidence_count=total_fast,
                flagged_at=now,
            )

    def _revert_task(self, task: TranslationTask) -> None:
        store = self.store
        store.set_task_state(task, OPEN)
        task.assigned_to = None
        task.deadline = None
        store.assigned_task_ids.discard(task.id)
        store.open_tasks[task.direction].appendleft(task.id)

    def _revert_assignment(self, assignment) -> None:
        store = self.store
        translation = store.translation(assignment.translation_id)
        worker = store.workers.get(assignment.worker_id)
        if worker is not None:
            worker.reserved.discard(translation.id)
        translation.reserved_by.discard(assignment.worker_id)
        assignment.worker_id = None
        assignment.deadline = None
        store.reserved_assignment_ids.discard(assignment.id)
        store.open_assignments[translation.direction].appendleft(assignment.id)

    def expire_overdue(self, now: float) -> int:
        """Revert assigned tasks and reserved assignments past deadline."""
        store = self.store
        reverted = 0
        with store.lock:
            for task_id in list(store.assigned_task_ids):
                task = store.tasks[task_id]
                if task.deadline and now > task.deadline:
                    self._revert_task(task)
                    reverted += 1
            for assignment_id in list(store.reserved_assignment_ids):
                assignment = store.assignments[assignment_id]
                if assignment.deadline and now > assignment.deadline:
                    self._revert_assignment(assignment)
                    reverted += 1
        return reverted
