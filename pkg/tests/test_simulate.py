import pytest

from corpusforge.errors import InputError
from corpusforge.simulate import (
    SimWorkerProfile,
    expected_acceptance_rate,
    load_profiles,
    run_local_simulation,
)


def honest_pool(n, langs=("che", "rus"), g=0.7, q=0.9, prefix="w"):
    return [
        SimWorkerProfile(
            name=f"{prefix}{i}", langs=frozenset(langs),
            translate_adequacy=g, verdict_accuracy=q,
        )
        for i in range(n)
    ]


class TestExpectedAcceptance:
    def test_perfect_workers(self):
        assert expected_acceptance_rate(1.0, 1.0) == 1.0

    def test_coin_flip_symmetry(self):
        assert expected_acceptance_rate(0.5, 0.5) == pytest.approx(0.5)

    def test_reference_point(self):
        assert expected_acceptance_rate(0.7, 0.9) == pytest.approx(0.6888)

    def test_matches_closed_form(self):
        for g in (0.0, 0.3, 0.55, 0.8, 1.0):
            for q in (0.0, 0.4, 0.7, 0.95, 1.0):
                majority = q**3 + 3 * q**2 * (1 - q)
                closed = g * majority + (1 - g) * (1 - majority)
                assert expected_acceptance_rate(g, q) == pytest.approx(closed)

    def test_out_of_range(self):
        with pytest.raises(InputError):
            expected_acceptance_rate(-0.1, 0.5)
        with pytest.raises(InputError):
            expected_acceptance_rate(0.5, 1.5)


class TestProfiles:
    def test_count_expansion(self):
        profiles = load_profiles(
            [{"name": "crowd", "langs": ["che", "rus"], "g": 0.8, "count": 3}]
        )
        assert [p.name for p in profiles] == ["crowd-1", "crowd-2", "crowd-3"]
        assert all(p.translate_adequacy == 0.8 for p in profiles)

    def test_bad_probability(self):
        with pytest.raises(InputError):
            SimWorkerProfile(name="x", langs=frozenset({"a"}),
                             translate_adequacy=1.2)

    def test_bad_cheat_mode(self):
        with pytest.raises(InputError):
            SimWorkerProfile(name="x", langs=frozenset({"a"}),
                             cheat_mode="telepathy")


class TestHonestRuns:
    def test_small_run_funnels_everything(self, detector):
        report, _ = run_local_simulation(
            honest_pool(8), {"che-rus": 60}, seed=5, detector=detector
        )
        assert report.submissions == 60
        assert report.auto_reject_rate == 0.0
        assert report.totals["translated"] == 60
        assert report.totals["fully_verified"] == 60
        assert report.starved_directions == []
        low, high = 0.45, 0.88  # wide: only 60 samples
        assert low < report.acceptance_rate < high

    def test_deterministic_given_seed(self, detector):
        runs = [
            run_local_simulation(
                honest_pool(6), {"che-rus": 25}, seed=11, detector=detector
            )[0].to_json()
            for _ in range(2)
        ]
        assert runs[0] == runs[1]

    def test_multi_direction_run(self, detector):
        profiles = honest_pool(6) + honest_pool(
            6, langs=("fuv", "eng"), prefix="f"
        )
        report, _ = run_local_simulation(
            profiles, {"che-rus": 20, "fuv-eng": 20}, seed=3, detector=detector
        )
        assert report.directions["che-rus"]["translated"] == 20
        assert report.directions["fuv-eng"]["translated"] == 20

    def test_cost_matches_volumes(self, detector):
        report, _ = run_local_simulation(
            honest_pool(8), {"che-rus": 40}, seed=9, detector=detector
        )
        # 40 translations at $0.02; 120 verdicts = 12 sets at $0.01 minus
        # any remainder carried per worker
        assert report.cost["translation"] == "0.8000"
        booked = float(report.cost["verification_set"])
        assert 0 <= booked <= 0.12


class TestOracleAgreement:
    def test_mean_rate_within_three_standard_errors_over_30_runs(self, detector):
        g, q = 0.7, 0.9
        per_run = 80
        rates = []
        for seed in range(30):
            report, _ = run_local_simulation(
                honest_pool(8, g=g, q=q), {"che-rus": per_run},
                seed=1_000 + seed, detector=detector,
            )
            assert report.submissions == per_run
            rates.append(report.acceptance_rate)
        oracle = expected_acceptance_rate(g, q)
        n_total = 30 * per_run
        standard_error = (oracle * (1 - oracle) / n_total) ** 0.5
        mean_rate = sum(rates) / len(rates)
        assert abs(mean_rate - oracle) <= 3 * standard_error, (
            mean_rate, oracle, standard_error,
        )


class TestDegenerateRuns:
    def test_no_exam_passers_starves_verification(self, detector):
        # adequate translators whose judgment is a coin flip never pass
        # the exam, so verification starves
        profiles = [
            SimWorkerProfile(
                name=f"c{i}", langs=frozenset({"che", "rus"}),
                translate_adequacy=0.9, verdict_accuracy=0.5,
            )
            for i in range(4)
        ]
        report, _ = run_local_simulation(
            profiles, {"che-rus": 15}, seed=21, detector=detector
        )
        row = report.directions["che-rus"]
        assert row["fully_verified"] < row["translated"]
        assert report.starved_directions == ["che-rus"]

    def test_copy_source_cheaters_all_auto_rejected(self, detector):
        cheaters = [
            SimWorkerProfile(
                name=f"x{i}", langs=frozenset({"che", "rus"}),
                cheat_mode="copy_source",
            )
            for i in range(3)
        ]
        report, _ = run_local_simulation(
            cheaters, {"che-rus": 30}, seed=13, detector=detector
        )
        assert report.auto_reject_rate == 1.0
        assert report.totals["in_corpus"] == 0
        assert report.totals["translated"] == 0

    def test_fast_cheaters_get_flagged_and_stop(self, detector):
        cheaters = [
            SimWorkerProfile(
                name=f"f{i}", langs=frozenset({"che", "rus"}),
                cheat_mode="random_fast",
            )
            for i in range(2)
        ]
        report, _ = run_local_simulation(
            cheaters, {"che-rus": 30}, seed=17, detector=detector
        )
        assert report.flags_raised == 2
        # three fast submissions each before the flag lands
        assert report.submissions <= 8
        assert report.totals["in_corpus"] == 0

    def test_wrong_language_cheater_rejected_by_detector(self, detector):
        profiles = [
            SimWorkerProfile(
                name="liar", langs=frozenset({"che", "rus"}),
                cheat_mode="wrong_language",
            )
        ]
        report, _ = run_local_simulation(
            profiles, {"che-rus": 10}, seed=19, detector=detector
        )
        assert report.auto_reject_rate == 1.0


class TestConcurrentMode:
    def test_concurrent_run_preserves_store_invariants(self, detector):
        report, app = run_local_simulation(
            honest_pool(6, g=1.0, q=1.0), {"che-rus": 30}, seed=23,
            detector=detector, concurrency=6,
        )
        assert report.totals["translated"] == 30
        assert report.totals["fully_verified"] == 30
        assert report.totals["in_corpus"] == 30
        app.state.ctx.store.check_integrity()
