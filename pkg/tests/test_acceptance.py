"""Acceptance suite: the guarantees this artifact ships with.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them
live) and asserts both the functional result and its runtime budget.
"""

import itertools
import random
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge import replay, synthlang
from corpusforge.engine import TaskEngine
from corpusforge.exam import build_exam, guess_pass_probability
from corpusforge.langid import evaluate, train_profile
from corpusforge.ledger import Ledger, project_cost
from corpusforge.quality import aggregate_verdicts, auto_check, length_ratio_check
from corpusforge.simulate import (
    SimWorkerProfile,
    expected_acceptance_rate,
    run_local_simulation,
)
from corpusforge.store import Direction, FunnelRow, Store


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    elapsed = time.perf_counter() - start
    print(f"[acceptance] {name}: PASS ({elapsed:.1f}s)")
    assert elapsed < budget_s, f"{name} exceeded its {budget_s}s budget"


def test_reference_funnel_replay():
    with criterion("reference funnel replay", budget_s=30):
        stats, store = replay.replay_events(
            replay.load_events(replay.FIXTURE_PATH)
        )
        assert stats.totals == FunnelRow(1627, 1470, 1078)
        assert stats.directions["fuv-eng"] == FunnelRow(220, 88, 53)
        assert stats.directions["eng-fuv"] == FunnelRow(311, 286, 176)
        assert stats.directions["che-rus"] == FunnelRow(491, 491, 380)
        assert stats.directions["rus-che"] == FunnelRow(605, 605, 469)
        totals = store.ledger.totals()
        assert totals["translation"] == Decimal("32.5400")
        assert totals["verification_set"] == Decimal("4.4100")


def test_majority_vote_exhaustive():
    with criterion("majority vote", budget_s=1):
        for combo in itertools.product(("good", "bad"), repeat=3):
            brute = "accepted" if combo.count("good") >= 2 else "rejected"
            assert aggregate_verdicts(combo) == brute
            for permutation in itertools.permutations(combo):
                assert aggregate_verdicts(permutation) == brute


def test_exam_math():
    with criterion("exam math", budget_s=10):
        favorable = sum(
            1
            for pattern in itertools.product((0, 1), repeat=10)
            if sum(pattern) >= 8
        )
        assert favorable == 56
        assert guess_pass_probability(8) == Fraction(favorable, 2**10)
        assert guess_pass_probability(8) == Fraction(56, 1024)

        pairs = synthlang.parallel_pairs("che", "rus", 12, seed="acceptance")
        gloss = synthlang.glossary("che", "rus", 300, seed="acceptance")
        other = synthlang.sentences("ell", 5, seed="acceptance")
        for seed in range(1000):
            form = build_exam("che-rus", pairs, gloss, other, seed=seed)
            assert form.composition() == {
                None: 5, "mismatch": 2, "wrong_language": 1, "word_for_word": 2
            }


def test_acceptance_rate_oracle(detector):
    with criterion("acceptance-rate oracle (10k over HTTP)", budget_s=300):
        profiles = [
            SimWorkerProfile(
                name=f"crowd-{i}", langs=frozenset({"che", "rus"}),
                translate_adequacy=0.7, verdict_accuracy=0.9,
            )
            for i in range(24)
        ]
        report, _ = run_local_simulation(
            profiles, {"che-rus": 10_000}, seed=2024, detector=detector
        )
        assert report.submissions == 10_000
        assert report.auto_reject_rate == 0.0
        assert report.totals["fully_verified"] == 10_000
        oracle = expected_acceptance_rate(0.7, 0.9)
        assert oracle == pytest.approx(0.6888)
        assert abs(report.acceptance_rate - oracle) <= 0.02, report.acceptance_rate


def test_cost_accounting():
    with criterion("cost accounting", budget_s=1):
        ledger = Ledger()
        for _ in range(1627):
            ledger.record_translation_payment(1)
        for worker in (2, 3, 4):
            ledger.settle_verification_payments(worker, 1470)
        totals = ledger.totals()
        assert totals["translation"] == Decimal("32.5400")
        assert totals["verification_set"] == Decimal("4.4100")
        assert sum(ledger.sets_booked(w) for w in (2, 3, 4)) == 441
        assert project_cost(7000, 10**6, "1.00") == Decimal("7000000000.0000")


def test_length_rule_properties():
    with criterion("length rule", budget_s=5):

        @settings(max_examples=300, deadline=None)
        @given(
            st.text(alphabet="абвгдеж xyz", min_size=1, max_size=150),
            st.text(alphabet="клмнопр uvw", min_size=1, max_size=150),
        )
        def check(a, b):
            stripped_a = "".join(a.split())
            stripped_b = "".join(b.split())
            if not stripped_a or not stripped_b:
                return
            ok_ab, ratio_ab = length_ratio_check(a, b)
            ok_ba, ratio_ba = length_ratio_check(b, a)
            assert ratio_ab == ratio_ba
            assert ok_ab == ok_ba == (ratio_ab <= 3.0)

        check()

        # over-threshold submissions are rejected with reason "length"
        failing = [("a" * 20, "b" * 61), ("x" * 90, "y" * 29), ("q" * 10, "r" * 41)]

        class _NoDetect:
            def detect(self, text):
                raise AssertionError("length failures must not reach langid")

        for src, tgt in failing:
            result = auto_check(tgt, src, "rus", _NoDetect())
            assert not result.passed
            assert result.failed_check == "length"


def test_language_id_floor():
    with criterion("language ID floor (4 x 1MB)", budget_s=120):
        langs = ("che", "rus", "fuv", "eng")
        profiles = [
            train_profile(
                [synthlang.corpus(lang, 1_000_000, "acceptance")], lang
            )
            for lang in langs
        ]
        assert all(p.total_ngrams >= 4_900_000 for p in profiles)
        labeled = []
        for lang in langs:
            sentences = synthlang.sentences(
                lang, 300, seed="acceptance-holdout", n_words=10
            )
            labeled.extend(
                (text, lang) for text in sentences if len(text) >= 40
            )
        assert len(labeled) >= 1_000
        report = evaluate(profiles, labeled)
        print(
            f"    held-out accuracy {report.overall_accuracy:.4f}, "
            f"abstention rate {report.abstention_rate:.4f} "
            f"over {report.n_items} sentences"
        )
        assert report.overall_accuracy >= 0.95
        for lang, accuracy in report.per_lang.items():
            assert accuracy.accuracy >= 0.95, (lang, accuracy)


def test_assignment_atomicity(detector):
    with criterion("assignment atomicity (100 trials)", budget_s=120):
        texts = synthlang.sentences("che", 10, seed="atomicity")
        with ThreadPoolExecutor(max_workers=50) as pool:
            for trial in range(100):
                store = Store()
                engine = TaskEngine(store, detector)
                ids = [
                    store.add_source(text, "che", "t", f"{trial}:{i}").id
                    for i, text in enumerate(texts)
                ]
                engine.create_translation_tasks(ids, Direction.parse("che-rus"))
                workers = [
                    store.add_worker(f"{trial}-w{i}", {"che", "rus"})
                    for i in range(50)
                ]
                offers = list(
                    pool.map(
                        lambda w: engine.assign_next(w.id, "translate"), workers
                    )
                )
                won = [offer for offer in offers if offer is not None]
                assert len(won) == 10, f"trial {trial}: {len(won)} assignments"
                assert len({offer.task_id for offer in won}) == 10
                assert len(store.open_tasks["che-rus"]) == 0


def test_funnel_invariant_under_interleavings(detector):
    with criterion("funnel invariant (10k events)", budget_s=60):
        rng = random.Random(20_240)
        store = Store()
        engine = TaskEngine(store, detector)
        codes = ("che-rus", "rus-che")
        for code in codes:
            direction = Direction.parse(code)
            texts = synthlang.sentences(direction.src_lang, 400, seed=code)
            ids = [
                store.add_source(text, direction.src_lang, "t", f"{code}:{i}").id
                for i, text in enumerate(texts)
            ]
            engine.create_translation_tasks(ids, direction)
        workers = [
            store.add_worker(f"w{i}", {"che", "rus"}) for i in range(14)
        ]
        for worker in workers:
            worker.passed_exams.update(codes)
        pending_t, pending_v = {}, {}
        for step in range(10_000):
            worker = rng.choice(workers)
            roll = rng.random()
            if roll < 0.35:
                offer = engine.assign_next(worker.id, "translate")
                if offer:
                    pending_t[offer.task_id] = (worker.id, offer)
            elif roll < 0.65:
                offer = engine.assign_next(worker.id, "verify")
                if offer:
                    pending_v[offer.assignment_id] = worker.id
            elif roll < 0.85 and pending_t:
                task_id, (worker_id, offer) = pending_t.popitem()
                text = (
                    offer.source_text
                    if rng.random() < 0.15
                    else synthlang.sentence(
                        offer.direction.split("-")[1], rng,
                        max(3, len(offer.source_text.split())),
                    )
                )
                engine.submit_translation(
                    task_id, worker_id, text, rng.randint(11_000, 90_000)
                )
            elif pending_v:
                assignment_id = rng.choice(sorted(pending_v))
                worker_id = pending_v.pop(assignment_id)
                engine.submit_verdict(
                    assignment_id, worker_id,
                    rng.choice(("good", "bad")), rng.randint(4_000, 30_000),
                )
            stats = store.funnel_stats()
            for code, row in stats.directions.items():
                assert row.ok(), f"step {step}, {code}: {row}"
        store.check_integrity()
