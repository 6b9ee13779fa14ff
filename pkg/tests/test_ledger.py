import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge.errors import InputError, RangeError
from corpusforge.ledger import (
    Ledger,
    PriceSheet,
    money,
    project_cost,
)


class TestPrices:
    def test_defaults(self):
        prices = PriceSheet()
        assert prices.per_translation == Decimal("0.0200")
        assert prices.per_verdict_set == Decimal("0.0100")

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            PriceSheet(per_translation=Decimal("-1"))


class TestTranslationPayments:
    def test_single_entry(self):
        ledger = Ledger()
        entry = ledger.record_translation_payment(1)
        assert entry.amount == Decimal("0.0200")
        assert entry.kind == "translation"
        assert entry.units == 1

    def test_hundred_submissions(self):
        ledger = Ledger()
        for _ in range(100):
            ledger.record_translation_payment(1)
        assert ledger.totals()["translation"] == Decimal("2.0000")

    def test_empty_ledger(self):
        totals = Ledger().totals()
        assert totals["grand_total"] == Decimal("0.0000")
        assert totals["translation"] == Decimal("0.0000")
        assert totals["verification_set"] == Decimal("0.0000")


class TestVerificationSettlement:
    def test_thirty_verdicts_three_entries(self):
        ledger = Ledger()
        entries = ledger.settle_verification_payments(1, 30)
        assert len(entries) == 3
        assert ledger.totals()["verification_set"] == Decimal("0.0300")

    def test_remainder_carries_forward(self):
        ledger = Ledger()
        ledger.settle_verification_payments(1, 35)
        assert ledger.totals()["verification_set"] == Decimal("0.0300")
        assert ledger.sets_booked(1) == 3
        # five more verdicts complete the fourth set
        ledger.settle_verification_payments(1, 40)
        assert ledger.totals()["verification_set"] == Decimal("0.0400")

    def test_nine_verdicts_book_nothing(self):
        ledger = Ledger()
        assert ledger.settle_verification_payments(1, 9) == []
        assert ledger.totals()["verification_set"] == Decimal("0.0000")

    def test_incremental_settlement_is_idempotent(self):
        ledger = Ledger()
        for n in range(1, 26):
            ledger.settle_verification_payments(1, n)
        assert ledger.sets_booked(1) == 2
        assert ledger.totals()["verification_set"] == Decimal("0.0200")

    def test_floor_accounting_across_workers(self):
        ledger = Ledger()
        rng = random.Random(5)
        counts = {}
        for worker in range(1, 8):
            counts[worker] = rng.randint(0, 47)
            ledger.settle_verification_payments(worker, counts[worker])
        booked = sum(ledger.sets_booked(w) for w in counts)
        assert booked == sum(c // 10 for c in counts.values())


class TestTotals:
    def test_reference_volume_arithmetic(self):
        ledger = Ledger()
        for _ in range(1627):
            ledger.record_translation_payment(1)
        # 1470 translations verified three times each = 4410 verdicts
        for worker in (2, 3, 4):
            ledger.settle_verification_payments(worker, 1470)
        totals = ledger.totals()
        assert totals["translation"] == Decimal("32.5400")
        assert totals["verification_set"] == Decimal("4.4100")
        assert totals["grand_total"] == Decimal("36.9500")

    def test_filter_by_worker(self):
        ledger = Ledger()
        ledger.record_translation_payment(1)
        ledger.record_translation_payment(2)
        ledger.record_translation_payment(2)
        assert ledger.totals(worker_id=2)["translation"] == Decimal("0.0400")
        by_worker = ledger.totals_by_worker()
        assert by_worker[1] == Decimal("0.0200")
        assert by_worker[2] == Decimal("0.0400")

    def test_no_float_drift_over_a_million_cents(self):
        ledger = Ledger()
        for n in range(10, 10_000_010, 10):
            ledger.settle_verification_payments(1, n)
        assert ledger.totals()["verification_set"] == Decimal("10000.0000")

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=5), max_size=60),
           st.randoms(use_true_random=False))
    def test_partition_conservation(self, worker_ids, rng):
        ledger = Ledger()
        for worker_id in worker_ids:
            ledger.record_translation_payment(worker_id)
        grand = ledger.totals()["grand_total"]
        # split entries by any worker partition: parts must sum to the total
        workers = set(worker_ids)
        picked = {w for w in workers if rng.random() < 0.5}
        part_a = sum(
            (ledger.totals(worker_id=w)["grand_total"] for w in picked),
            Decimal("0"),
        )
        part_b = sum(
            (ledger.totals(worker_id=w)["grand_total"] for w in workers - picked),
            Decimal("0"),
        )
        assert part_a + part_b == grand

    def test_time_filters(self):
        times = iter([1.0, 2.0, 3.0])
        ledger = Ledger(clock=lambda: next(times))
        for _ in range(3):
            ledger.record_translation_payment(1)
        assert ledger.totals(since=2.0)["translation"] == Decimal("0.0400")
        assert ledger.totals(until=1.5)["translation"] == Decimal("0.0200")


class TestProjection:
    def test_seven_thousand_languages_at_a_dollar(self):
        assert project_cost(7000, 1_000_000, "1.00") == Decimal("7000000000.0000")

    def test_zero_languages(self):
        assert project_cost(0, 1_000_000, "1.00") == Decimal("0.0000")

    def test_crowd_price_scenario(self):
        assert project_cost(7000, 1_000_000, "0.02") == Decimal("140000000.0000")

    def test_negative_inputs(self):
        with pytest.raises(InputError):
            project_cost(-1, 10, "1.00")
        with pytest.raises(InputError):
            project_cost(10, -1, "1.00")
        with pytest.raises(InputError):
            project_cost(10, 10, "-0.01")

    def test_overflow_guard(self):
        with pytest.raises(RangeError):
            project_cost(10**9, 10**9, "1.00")


class TestStatePersistence:
    def test_round_trip(self):
        ledger = Ledger()
        ledger.record_translation_payment(1)
        ledger.settle_verification_payments(2, 25)
        restored = Ledger.from_state(ledger.dump_state())
        assert restored.totals() == ledger.totals()
        assert restored.sets_booked(2) == 2

    def test_csv_export(self):
        ledger = Ledger()
        ledger.record_translation_payment(1)
        csv_text = ledger.to_csv()
        lines = csv_text.strip().split("\n")
        assert lines[0] == "worker_id,kind,units,amount,at"
        assert lines[1].startswith("1,translation,1,0.0200,")
