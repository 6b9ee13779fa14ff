"""Per-unit payment accounting in exact fixed-point money.

Amounts are ``Decimal`` quantized to four places; no floats touch money.
Translations pay per unit on passing the automatic checks; verifications
pay per completed set of ten verdicts, with remainders carried forward.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Optional

from .errors import InputError, RangeError

MONEY_PLACES = Decimal("0.0001")
MAX_CURRENCY_UNITS = Decimal(10) ** 15

KIND_TRANSLATION = "translation"
KIND_VERIFICATION_SET = "verification_set"

VERDICTS_PER_SET = 10


def money(value: str | int | Decimal) -> Decimal:
    """Quantize to the ledger's four-place fixed-point grid."""
    return Decimal(value).quantize(MONEY_PLACES)


@dataclass(frozen=True)
class PriceSheet:
    per_translation: Decimal = Decimal("0.02")
    per_verdict_set: Decimal = Decimal("0.01")

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_translation", money(self.per_translation))
        object.__setattr__(self, "per_verdict_set", money(self.per_verdict_set))
        if self.per_translation < 0 or self.per_verdict_set < 0:
            raise InputError("prices must be non-negative")


@dataclass(frozen=True)
class CostEntry:
    worker_id: int
    kind: str
    units: int
    amount: Decimal
    at: float


class Ledger:
    """Append-only cost log with per-worker verdict-set carry."""

    def __init__(
        self,
        prices: PriceSheet | None = None,
        clock: Callable[[], float] | None = None,
    ) -> None:
        self.prices = prices or PriceSheet()
        self._clock = clock or (lambda: 0.0)
        self.entries: list[CostEntry] = []
        self._sets_booked: dict[int, int] = {}

    def record_translation_payment(self, worker_id: int) -> CostEntry:
        entry = CostEntry(
            worker_id=worker_id,
            kind=KIND_TRANSLATION,
            units=1,
            amount=self.prices.per_translation,
            at=self._clock(),
        )
        self.entries.append(entry)
        return entry

    def settle_verification_payments(
        self, worker_id: int, total_verdicts: int
    ) -> list[CostEntry]:
        """Book one entry per newly completed set of ten verdicts.

        Floor semantics: 35 verdicts book 3 sets, 5 carry forward until
        the worker reaches 40.
        """
        due_sets = total_verdicts // VERDICTS_PER_SET
        booked = self._sets_booked.get(worker_id, 0)
        new_entries = []
        for _ in range(due_sets - booked):
            entry = CostEntry(
                worker_id=worker_id,
                kind=KIND_VERIFICATION_SET,
                units=1,
                amount=self.prices.per_verdict_set,
                at=self._clock(),
            )
            self.entries.append(entry)
            new_entries.append(entry)
        if due_sets > booked:
            self._sets_booked[worker_id] = due_sets
        return new_entries

    def sets_booked(self, worker_id: int) -> int:
        return self._sets_booked.get(worker_id, 0)

    def totals(
        self,
        worker_id: Optional[int] = None,
        kind: Optional[str] = None,
        since: Optional[float] = None,
        until: Optional[float] = None,
    ) -> dict[str, Decimal]:
        """Exact per-kind sums plus a grand total, optionally filtered."""
        sums = {KIND_TRANSLATION: money(0), KIND_VERIFICATION_SET: money(0)}
        for entry in self.entries:
            if worker_id is not None and entry.worker_id != worker_id:
                continue
            if kind is not None and entry.kind != kind:
                continue
            if since is not None and entry.at < since:
                continue
            if until is not None and entry.at > until:
                continue
            sums[entry.kind] += entry.amount
        sums["grand_total"] = sums[KIND_TRANSLATION] + sums[KIND_VERIFICATION_SET]
        return sums

    def totals_by_worker(self) -> dict[int, Decimal]:
        by_worker: dict[int, Decimal] = {}
        for entry in self.entries:
            by_worker[entry.worker_id] = (
                by_worker.get(entry.worker_id, money(0)) + entry.amount
            )
        return by_worker

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["worker_id", "kind", "units", "amount", "at"])
        for entry in self.entries:
            writer.writerow(
                [entry.worker_id, entry.kind, entry.units, str(entry.amount),
                 repr(entry.at)]
            )
        return out.getvalue()

    def dump_state(self) -> dict:
        return {
            "prices": {
                "per_translation": str(self.prices.per_translation),
                "per_verdict_set": str(self.prices.per_verdict_set),
            },
            "entries": [
                [e.worker_id, e.kind, e.units, str(e.amount), e.at]
                for e in self.entries
            ],
            "sets_booked": {str(k): v for k, v in self._sets_booked.items()},
        }

    @classmethod
    def from_state(
        cls, state: dict, clock: Callable[[], float] | None = None
    ) -> "Ledger":
        ledger = cls(
            prices=PriceSheet(
                per_translation=Decimal(state["prices"]["per_translation"]),
                per_verdict_set=Decimal(state["prices"]["per_verdict_set"]),
            ),
            clock=clock,
        )
        ledger.entries = [
            CostEntry(worker_id=w, kind=k, units=u, amount=money(a), at=at)
            for w, k, u, a, at in state["entries"]
        ]
        ledger._sets_booked = {
            int(k): v for k, v in state["sets_booked"].items()
        }
        return ledger


def project_cost(
    num_languages: int,
    sentences_per_language: int,
    price_per_sentence: str | Decimal,
) -> Decimal:
    """Exact cost of translating N sentences for each of L languages."""
    if num_languages < 0 or sentences_per_language < 0:
        raise InputError("counts must be non-negative")
    price = money(price_per_sentence)
    if price < 0:
        raise InputError("price must be non-negative")
    total = num_languages * sentences_per_language * price
    if total > MAX_CURRENCY_UNITS:
        raise RangeError(f"projected cost {total} exceeds {MAX_CURRENCY_UNITS}")
    return money(total)
