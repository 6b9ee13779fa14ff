import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge import synthlang
from corpusforge.errors import InputError, IntegrityError, TrainingError
from corpusforge.langid import (
    Detector,
    LangProfile,
    detect,
    evaluate,
    load_profile,
    save_profile,
    train_profile,
)

LANGS = ("che", "rus", "fuv", "eng")


@pytest.fixture(scope="module")
def profiles(detector):
    return [detector.profiles[lang] for lang in LANGS]


class TestTrain:
    def test_too_small_corpus(self):
        with pytest.raises(TrainingError):
            train_profile(["tiny corpus"], "eng")

    def test_empty_corpus(self):
        with pytest.raises(TrainingError):
            train_profile([], "eng")

    def test_deterministic_and_order_insensitive(self):
        corpus = synthlang.sentences("eng", 400, seed="train-det")
        a = train_profile(corpus, "eng")
        b = train_profile(list(reversed(corpus)), "eng")
        assert a.counts == b.counts
        assert a.total_ngrams == b.total_ngrams

    def test_logprobs_finite_and_nonpositive(self, profiles):
        for profile in profiles:
            assert profile.unseen_logprob < 0
            sample = list(profile.ngram_logprobs.values())[:2000]
            assert all(math.isfinite(lp) and lp <= 0 for lp in sample)

    def test_cross_language_separation(self, profiles):
        rus = next(p for p in profiles if p.lang == "rus")
        rus_text = synthlang.sentence("rus", random.Random(3), 10)
        eng_text = synthlang.sentence("eng", random.Random(3), 10)

        def score(profile, text):
            from corpusforge.langid import _ngrams, _normalize

            return profile.score(list(_ngrams(_normalize(text))))

        assert score(rus, rus_text) > score(rus, eng_text)


class TestDetect:
    def test_right_language_wins(self, profiles):
        for lang in LANGS:
            text = synthlang.sentence(lang, random.Random(17), 10)
            detection = detect(text, profiles)
            assert detection.lang == lang
            assert detection.confident

    def test_empty_text(self, profiles):
        with pytest.raises(InputError):
            detect("   ", profiles)

    def test_single_profile_is_an_error(self, profiles):
        with pytest.raises(InputError):
            detect("some text to classify here", profiles[:1])

    def test_short_text_abstains_as_und(self, profiles):
        detection = detect("word", profiles)
        assert detection.lang == "und"
        assert not detection.confident

    def test_confident_invariant(self, profiles):
        for seed in range(30):
            text = synthlang.sentence("fuv", random.Random(seed))
            d = detect(text, profiles, margin_threshold=0.05)
            assert d.confident == (d.lang != "und" and d.margin >= 0.05)
            assert d.margin >= 0.0

    @settings(max_examples=150, deadline=None)
    @given(st.text(min_size=1, max_size=200))
    def test_never_nan_or_inf_on_any_unicode(self, profiles, text):
        try:
            detection = detect(text, profiles)
        except InputError:
            return  # empty after normalization
        assert math.isfinite(detection.score)
        assert math.isfinite(detection.margin)

    def test_score_monotonicity_statistical(self, profiles):
        """Appending target-language text improves the target's rank.

        Sign test over 1,000 samples at p < 0.01.
        """
        from corpusforge.langid import _ngrams, _normalize

        def rank_of(target, text):
            grams = list(_ngrams(_normalize(text)))
            scored = sorted(
                ((p.score(grams), p.lang) for p in profiles),
                key=lambda pair: (-pair[0], pair[1]),
            )
            return [lang for _, lang in scored].index(target)

        rng = random.Random("monotone")
        target = "che"
        improvements = 0
        regressions = 0
        for _ in range(1000):
            other = rng.choice([l for l in LANGS if l != target])
            base = synthlang.sentence(other, rng, rng.randint(3, 6))
            extra = synthlang.sentence(target, rng, rng.randint(4, 8))
            before = rank_of(target, base)
            after = rank_of(target, base + " " + extra)
            if after < before:
                improvements += 1
            elif after > before:
                regressions += 1
        n = improvements + regressions
        assert n > 0
        # exact binomial tail P(X >= improvements | p = 0.5)
        tail = sum(math.comb(n, k) for k in range(improvements, n + 1)) / 2**n
        assert tail < 0.01, (improvements, regressions)


class TestEvaluate:
    def test_holdout_accuracy(self, profiles):
        labeled = [
            (text, lang)
            for lang in LANGS
            for text in synthlang.sentences(lang, 50, seed="eval-holdout")
        ]
        report = evaluate(profiles, labeled)
        assert report.overall_accuracy >= 0.95
        assert 0.0 <= report.abstention_rate < 0.5

    def test_training_data_scores_at_least_as_well(self, profiles):
        train_texts = [
            (text, lang)
            for lang in LANGS
            for text in synthlang.corpus(lang, 2_000, "seed").split(". ")[:-1]
            if len(text) >= 25
        ]
        held_out = [
            (text, lang)
            for lang in LANGS
            for text in synthlang.sentences(lang, 40, seed="eval-fresh")
        ]
        on_train = evaluate(profiles, train_texts)
        on_held_out = evaluate(profiles, held_out)
        assert on_train.overall_accuracy >= on_held_out.overall_accuracy - 0.02

    def test_single_item(self, profiles):
        text = synthlang.sentence("eng", random.Random(5), 10)
        report = evaluate(profiles, [(text, "eng")])
        assert report.overall_accuracy == 1.0 or report.abstention_rate == 1.0

    def test_empty_labeled_set(self, profiles):
        with pytest.raises(InputError):
            evaluate(profiles, [])

    def test_unknown_label(self, profiles):
        with pytest.raises(InputError):
            evaluate(profiles, [("whatever text", "xx")])


class TestProfileFiles:
    def test_round_trip(self, tmp_path, profiles):
        path = tmp_path / "eng.json"
        original = profiles[LANGS.index("eng")]
        save_profile(original, path)
        loaded = load_profile(path)
        assert loaded.lang == "eng"
        assert loaded.counts == original.counts
        assert loaded.ngram_logprobs == original.ngram_logprobs

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(IntegrityError):
            load_profile(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "old.json"
        path.write_text(
            json.dumps({"format_version": 99, "lang": "eng",
                        "n_range": [1, 5], "counts": {"a": 1}}),
            encoding="utf-8",
        )
        with pytest.raises(IntegrityError):
            load_profile(path)

    def test_detector_from_dir(self, tmp_path, profiles):
        for profile in profiles[:2]:
            save_profile(profile, tmp_path / f"{profile.lang}.json")
        detector = Detector.from_dir(tmp_path)
        assert sorted(detector.langs) == sorted(p.lang for p in profiles[:2])
