"""Simulated worker populations driving the pipeline over HTTP.

Workers here are statistical: a translator produces a truly-good
translation with probability ``g`` and a fluent-but-wrong one otherwise
(both in the target language, so automatic checks pass); a verifier's
verdict matches the ground truth with probability ``q``. Ground truth
lives only in the simulator's registry, mirroring the knowledge a
bilingual human carries in their head; the server never sees it.

Everything flows through an ``httpx`` client against the v1 endpoints.
The simulator holds no references to the engine or store, so no path can
bypass the HTTP boundary.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import httpx

from . import synthlang
from .client import ApiClient, client_for_app
from .errors import InputError
from .quality import KIND_TRANSLATE, KIND_VERIFY

COPY_SOURCE = "copy_source"
WRONG_LANGUAGE = "wrong_language"
RANDOM_FAST = "random_fast"
CHEAT_MODES = (COPY_SOURCE, WRONG_LANGUAGE, RANDOM_FAST)

DEFAULT_SPEED_MEDIAN_MS = {KIND_TRANSLATE: 45_000, KIND_VERIFY: 9_000}
# honest workers never undercut a plausible minimum handling time
DEFAULT_MIN_ELAPSED_MS = {KIND_TRANSLATE: 12_000, KIND_VERIFY: 3_600}


@dataclass(frozen=True)
class SimWorkerProfile:
    name: str
    langs: frozenset[str]
    translate_adequacy: float = 1.0
    verdict_accuracy: float = 1.0
    speed_median_ms: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_SPEED_MEDIAN_MS)
    )
    speed_sigma: float = 0.4
    min_elapsed_ms: dict[str, int] = field(
        default_factory=lambda: dict(DEFAULT_MIN_ELAPSED_MS)
    )
    cheat_mode: Optional[str] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.translate_adequacy <= 1.0:
            raise InputError("translate_adequacy must be in [0, 1]")
        if not 0.0 <= self.verdict_accuracy <= 1.0:
            raise InputError("verdict_accuracy must be in [0, 1]")
        if self.cheat_mode is not None and self.cheat_mode not in CHEAT_MODES:
            raise InputError(f"unknown cheat_mode {self.cheat_mode!r}")


def expected_acceptance_rate(g: float, q: float) -> float:
    """Chance a submission ends up accepted under three-way majority vote.

    Computed by enumerating all eight verdict outcomes over the two truth
    states, not from the closed form.
    """
    if not 0.0 <= g <= 1.0 or not 0.0 <= q <= 1.0:
        raise InputError("probabilities must be in [0, 1]")
    total = 0.0
    for truth_good, p_truth in ((True, g), (False, 1.0 - g)):
        for says_good in itertools.product((True, False), repeat=3):
            p = p_truth
            for say in says_good:
                p *= q if say == truth_good else 1.0 - q
            if sum(says_good) >= 2:
                total += p
    return total


def load_profiles(path_or_spec) -> list[SimWorkerProfile]:
    """Expand a profiles spec (JSON list, possibly with ``count``)."""
    if isinstance(path_or_spec, str):
        spec = json.loads(Path(path_or_spec).read_text(encoding="utf-8"))
    else:
        spec = path_or_spec
    profiles = []
    for entry in spec:
        count = entry.get("count", 1)
        for i in range(count):
            suffix = f"-{i + 1}" if count > 1 else ""
            profiles.append(
                SimWorkerProfile(
                    name=entry["name"] + suffix,
                    langs=frozenset(entry["langs"]),
                    translate_adequacy=entry.get("g", 1.0),
                    verdict_accuracy=entry.get("q", 1.0),
                    speed_median_ms={
                        **DEFAULT_SPEED_MEDIAN_MS,
                        **entry.get("speed_median_ms", {}),
                    },
                    speed_sigma=entry.get("speed_sigma", 0.4),
                    cheat_mode=entry.get("cheat_mode"),
                )
            )
    return profiles


@dataclass
class SimulationReport:
    seed: int
    directions: dict[str, dict[str, int]]
    totals: dict[str, int]
    submissions: int
    auto_rejected: int
    acceptance_rate: float
    auto_reject_rate: float
    flags_raised: int
    starved_directions: list[str]
    cost: dict[str, str]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2)


class _Session:
    """One simulated worker: an API client plus behavior state."""

    def __init__(self, profile: SimWorkerProfile, client: ApiClient,
                 rng: random.Random) -> None:
        self.profile = profile
        self.client = client
        self.rng = rng
        self.worker_id: Optional[int] = None
        self.verify_directions: set[str] = set()
        self.idle_kinds: set[str] = set()

    def elapsed(self, kind: str) -> int:
        if self.profile.cheat_mode == RANDOM_FAST:
            return self.rng.randint(300, 1500)
        median = self.profile.speed_median_ms[kind]
        draw = self.rng.lognormvariate(math.log(median), self.profile.speed_sigma)
        return max(int(draw), self.profile.min_elapsed_ms.get(kind, 0))


class Simulation:
    """Drive a worker population against a service until work runs out."""

    def __init__(
        self,
        make_client: Callable[[], httpx.Client],
        profiles: Sequence[SimWorkerProfile],
        sources_per_direction: dict[str, int],
        seed: int,
        correct_exam_pairs: dict[str, set[tuple[str, str]]] | None = None,
        source_origin: str = "sim",
        concurrency: int = 1,
    ) -> None:
        if not profiles:
            raise InputError("no worker profiles")
        names = [p.name for p in profiles]
        if len(set(names)) != len(names):
            raise InputError("worker profile names must be unique")
        self.make_client = make_client
        self.profiles = list(profiles)
        self.sources_per_direction = dict(sources_per_direction)
        self.seed = seed
        self.correct_exam_pairs = correct_exam_pairs or {}
        self.source_origin = source_origin
        self.concurrency = concurrency
        self.truth: dict[tuple[str, str], bool] = {}
        self._truth_lock = threading.Lock()
        self.submissions = 0
        self.auto_rejected = 0
        self._count_lock = threading.Lock()

    # -- world knowledge ------------------------------------------------

    def _record_truth(self, source_text: str, candidate: str, good: bool) -> None:
        with self._truth_lock:
            self.truth[(source_text, candidate)] = good

    def _lookup_truth(self, source_text: str, candidate: str) -> bool:
        # Unknown candidates (never produced by this run) count as bad.
        with self._truth_lock:
            return self.truth.get((source_text, candidate), False)

    # -- worker behavior -------------------------------------------------

    def _take_exams(self, session: _Session) -> None:
        profile = session.profile
        for code in sorted(self.correct_exam_pairs):
            src, tgt = code.split("-")
            if not {src, tgt} <= profile.langs:
                continue
            form = session.client.get_exam(code)
            answers = []
            for item in form["items"]:
                truly_correct = (
                    (item["src"], item["tgt"]) in self.correct_exam_pairs[code]
                )
                if profile.cheat_mode == RANDOM_FAST:
                    says_correct = session.rng.random() < 0.5
                elif session.rng.random() < profile.verdict_accuracy:
                    says_correct = truly_correct
                else:
                    says_correct = not truly_correct
                answers.append("correct" if says_correct else "incorrect")
            result = session.client.submit_exam(code, form["version"], answers)
            if result["passed"]:
                session.verify_directions.add(code)

    def _translation_text(self, session: _Session, task: dict) -> tuple[str, bool]:
        profile = session.profile
        direction = task["direction"]
        src, tgt = direction.split("-")
        source_text = task["source_text"]
        if profile.cheat_mode == COPY_SOURCE:
            return source_text, False
        if profile.cheat_mode == WRONG_LANGUAGE:
            # a cheater pastes text from a big language the pipeline knows,
            # not from some exotic script the detector has never seen
            other = next(
                lang
                for lang in ("eng", "rus", "che", "fuv", "ell")
                if lang not in (src, tgt)
            )
            return synthlang.sentence(other, session.rng), False
        if profile.cheat_mode == RANDOM_FAST:
            return "zz qq xx", False
        n_words = max(3, len(source_text.split()) + session.rng.randint(-1, 1))
        text = synthlang.sentence(tgt, session.rng, n_words)
        good = session.rng.random() < profile.translate_adequacy
        return text, good

    def _do_translate(self, session: _Session, task: dict) -> None:
        text, good = self._translation_text(session, task)
        # register truth before the server fans the candidate out: in
        # concurrent runs a verifier may see it the instant the POST lands
        self._record_truth(task["source_text"], text, good)
        outcome = session.client.submit_translation(
            task["task_id"], text, session.elapsed(KIND_TRANSLATE)
        )
        with self._count_lock:
            self.submissions += 1
            if outcome["outcome"] == "auto_rejected":
                self.auto_rejected += 1

    def _do_verify(self, session: _Session, task: dict) -> None:
        truth = self._lookup_truth(task["source_text"], task["candidate_text"])
        if session.rng.random() < session.profile.verdict_accuracy:
            says_good = truth
        else:
            says_good = not truth
        session.client.submit_verdict(
            task["assignment_id"],
            "good" if says_good else "bad",
            session.elapsed(KIND_VERIFY),
        )

    def _one_turn(self, session: _Session) -> bool:
        """Fetch and complete at most one task; False when nothing to do."""
        kinds = []
        if session.verify_directions:
            kinds.append(KIND_VERIFY)
        kinds.append(KIND_TRANSLATE)
        for kind in kinds:
            task = session.client.next_task(kind)
            if task is None:
                continue
            if kind == KIND_VERIFY:
                self._do_verify(session, task)
            else:
                self._do_translate(session, task)
            return True
        return False

    # -- orchestration ----------------------------------------------------

    def _setup_sessions(self) -> list[_Session]:
        sessions = []
        for profile in self.profiles:
            client = ApiClient(self.make_client())
            rng = random.Random(f"sim:{self.seed}:worker:{profile.name}")
            session = _Session(profile, client, rng)
            client.register(profile.name, sorted(profile.langs))
            sessions.append(session)
        for session in sessions:
            self._take_exams(session)
        return sessions

    def _upload_sources(self, requester: ApiClient) -> None:
        for code in sorted(self.sources_per_direction):
            n = self.sources_per_direction[code]
            src = code.split("-")[0]
            lines = synthlang.sentences(src, n, seed=f"{self.seed}:{code}")
            requester.upload_sources(code, self.source_origin, lines)

    def run(self) -> SimulationReport:
        requester = ApiClient(self.make_client())
        self._upload_sources(requester)
        sessions = self._setup_sessions()
        if self.concurrency > 1:
            self._run_concurrent(sessions)
        else:
            busy = True
            while busy:
                busy = False
                for session in sessions:
                    if self._one_turn(session):
                        busy = True
        return self._report(requester)

    def _run_concurrent(self, sessions: list[_Session]) -> None:
        # Round-synchronized: stop only after a full round in which nobody
        # found work, so late fan-out is never orphaned by early exits.
        round_progress: list[bool] = []
        keep_going = [True]

        def end_of_round() -> None:
            keep_going[0] = any(round_progress)
            round_progress.clear()

        barrier = threading.Barrier(len(sessions), action=end_of_round)

        def worker_loop(session: _Session) -> None:
            while True:
                got = self._one_turn(session)
                with self._count_lock:
                    round_progress.append(got)
                barrier.wait()
                if not keep_going[0]:
                    return

        threads = [
            threading.Thread(target=worker_loop, args=(session,))
            for session in sessions
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

    def _report(self, requester: ApiClient) -> SimulationReport:
        funnel = requester.funnel()
        cost = requester.cost()["totals"]
        accepted = funnel["totals"]["in_corpus"]
        starved = sorted(
            code
            for code, row in funnel["directions"].items()
            if row["fully_verified"] < row["translated"]
        )
        submissions = self.submissions
        return SimulationReport(
            seed=self.seed,
            directions=funnel["directions"],
            totals=funnel["totals"],
            submissions=submissions,
            auto_rejected=self.auto_rejected,
            acceptance_rate=accepted / submissions if submissions else 0.0,
            auto_reject_rate=(
                self.auto_rejected / submissions if submissions else 0.0
            ),
            flags_raised=funnel["flags_raised"],
            starved_directions=starved,
            cost=cost,
        )


# ----------------------------------------------------------------------
# local harness: a full service wired up in-process


EXAM_POOL_PAIRS = 12
EXAM_GLOSSARY_WORDS = 400
OTHER_LANG = "ell"


def build_exam_fixtures(
    directions: Iterable[str], seed: int | str = "exam"
) -> tuple[dict[str, "object"], dict[str, set[tuple[str, str]]]]:
    """Exam forms plus the correct-pair knowledge a bilingual would have."""
    from .exam import build_exam

    forms = {}
    truth: dict[str, set[tuple[str, str]]] = {}
    for code in directions:
        src, tgt = code.split("-")
        pairs = synthlang.parallel_pairs(src, tgt, EXAM_POOL_PAIRS, seed)
        gloss = synthlang.glossary(src, tgt, EXAM_GLOSSARY_WORDS, seed)
        other = synthlang.sentences(OTHER_LANG, 5, seed)
        form_seed = random.Random(f"{seed}:{code}").randrange(2**31)
        forms[code] = build_exam(code, pairs, gloss, other, seed=form_seed)
        truth[code] = set(pairs)
    return forms, truth


def run_local_simulation(
    profiles: Sequence[SimWorkerProfile],
    sources_per_direction: dict[str, int],
    seed: int,
    detector=None,
    directions: Sequence[str] | None = None,
    concurrency: int = 1,
):
    """Wire a fresh in-process service and drive it; returns (report, app).

    The simulator still speaks HTTP: the in-process client routes through
    the full ASGI stack.
    """
    from .langid import Detector, train_profile
    from .service import ServiceConfig, build_context, create_app

    codes = list(directions or sorted(sources_per_direction))
    langs = sorted({lang for code in codes for lang in code.split("-")})
    if detector is None:
        detector = Detector(
            train_profile([synthlang.corpus(lang, 200_000, "seed")], lang)
            for lang in langs
        )
    config = ServiceConfig(directions=tuple(codes))
    ctx = build_context(detector, config)
    forms, exam_truth = build_exam_fixtures(codes)
    for form in forms.values():
        ctx.store.install_exam(form)
    app = create_app(ctx)
    simulation = Simulation(
        make_client=lambda: client_for_app(app),
        profiles=profiles,
        sources_per_direction=sources_per_direction,
        seed=seed,
        correct_exam_pairs=exam_truth,
        concurrency=concurrency,
    )
    report = simulation.run()
    return report, app
