#!/usr/bin/env python3
"""Regenerate the bundled reference event log.

The fixture is deterministic: rebuilding it always produces the same file.
Run from the repository root:

    python scripts/build_reference_fixture.py
"""

from pathlib import Path

from corpusforge import replay


def main() -> None:
    events = replay.build_reference_events()
    out = Path(__file__).resolve().parents[1] / "fixtures" / "reference_run.jsonl"
    out.parent.mkdir(exist_ok=True)
    replay.write_events(events, out)
    stats = replay.replay_funnel(out)
    print(f"wrote {len(events)} events -> {out}")
    for code, row in sorted(stats.directions.items()):
        print(f"  {code}: {row.translated}/{row.fully_verified}/{row.in_corpus}")
    totals = stats.totals
    print(f"  total: {totals.translated}/{totals.fully_verified}/{totals.in_corpus}")


if __name__ == "__main__":
    main()
