#!/usr/bin/env python3
"""Sweep worker adequacy/accuracy and compare the measured acceptance rate
with the three-vote analytic prediction.

    python scripts/run_acceptance_sweep.py --sources 500 --seed 7
"""

import argparse

from corpusforge.simulate import (
    SimWorkerProfile,
    expected_acceptance_rate,
    run_local_simulation,
)

G_GRID = (0.5, 0.7, 0.9)
Q_GRID = (0.6, 0.8, 0.95)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sources", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--workers", type=int, default=12)
    args = parser.parse_args()

    print(f"{'g':>5} {'q':>5} {'analytic':>9} {'measured':>9} {'delta':>8}")
    for g in G_GRID:
        for q in Q_GRID:
            profiles = [
                SimWorkerProfile(
                    name=f"w{i}", langs=frozenset({"che", "rus"}),
                    translate_adequacy=g, verdict_accuracy=q,
                )
                for i in range(args.workers)
            ]
            report, _ = run_local_simulation(
                profiles, {"che-rus": args.sources},
                seed=args.seed + int(100 * g) + int(10_000 * q),
            )
            analytic = expected_acceptance_rate(g, q)
            measured = report.acceptance_rate
            print(
                f"{g:5.2f} {q:5.2f} {analytic:9.4f} {measured:9.4f} "
                f"{measured - analytic:+8.4f}"
                + ("  [starved]" if report.starved_directions else "")
            )


if __name__ == "__main__":
    main()
