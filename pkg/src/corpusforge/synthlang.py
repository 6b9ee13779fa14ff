"""Deterministic synthetic text in several invented "languages".

The pipeline needs multilingual text in three places where real corpora
would be awkward to ship: seed corpora for training the character n-gram
detector in tests, exam fixture pools, and the worker simulator (simulated
workers cannot actually translate, so they emit fluent-looking text in the
direction's target language).

Each language is defined by a syllable inventory and a fixed word stock.
The word stock is derived from the language name alone, so every process
sees the same vocabulary; callers then sample words Zipf-style with their
own seeds. Scripts are chosen so the languages are easy to tell apart by
character statistics (two Cyrillic-based ones with disjoint phonotactics,
two Latin-based ones, one Greek-based).
"""

from __future__ import annotations

import itertools
import random
from bisect import bisect_right
from dataclasses import dataclass

from .errors import InputError

VOCABULARY_SIZE = 3000
ZIPF_EXPONENT = 1.1


@dataclass(frozen=True)
class _LangShape:
    onsets: tuple[str, ...]
    vowels: tuple[str, ...]
    codas: tuple[str, ...]
    coda_prob: float = 0.4


_SHAPES = {
    # Cyrillic with ejective digraphs and the palochka letter.
    "che": _LangShape(
        onsets=("б", "в", "г", "гӏ", "д", "дж", "к", "кх", "къ", "кӏ", "л",
                "м", "н", "п", "пӏ", "р", "с", "т", "тӏ", "х", "хь", "хӏ",
                "ц", "цӏ", "ч", "чӏ", "ш"),
        vowels=("а", "аь", "е", "и", "о", "оь", "у", "уь", "ю", "я"),
        codas=("н", "р", "л", "м", "т", "с", "ш", "рг", "лг", "хь"),
    ),
    # Cyrillic with consonant clusters and a different vowel set.
    "rus": _LangShape(
        onsets=("б", "в", "г", "д", "ж", "з", "к", "л", "м", "н", "п", "р",
                "с", "т", "ф", "ч", "ш", "щ", "бр", "вл", "гр", "др", "кр",
                "пр", "ст", "тр"),
        vowels=("а", "е", "ё", "и", "о", "у", "ы", "э", "ю", "я"),
        codas=("й", "н", "р", "л", "м", "т", "в", "к", "ст", "нн"),
    ),
    # Latin with implosives and long vowels.
    "fuv": _LangShape(
        onsets=("b", "mb", "d", "nd", "f", "g", "ng", "h", "j", "k", "l",
                "m", "n", "p", "r", "s", "t", "w", "y", "ɓ", "ɗ", "ƴ"),
        vowels=("a", "aa", "e", "ee", "i", "ii", "o", "oo", "u", "uu"),
        codas=("m", "n", "ŋ", "l", "r"),
        coda_prob=0.3,
    ),
    # Plain Latin with English-ish clusters.
    "eng": _LangShape(
        onsets=("b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r",
                "s", "t", "w", "th", "sh", "ch", "st", "br", "gr", "pl"),
        vowels=("a", "e", "i", "o", "u", "ea", "ou", "ai", "ee"),
        codas=("b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "ng",
               "nt", "st"),
        coda_prob=0.55,
    ),
    # Greek script, used as the "different language" distractor pool.
    "ell": _LangShape(
        onsets=("β", "γ", "δ", "ζ", "θ", "κ", "λ", "μ", "ν", "ξ", "π", "ρ",
                "σ", "τ", "φ", "χ", "ψ"),
        vowels=("α", "ε", "η", "ι", "ο", "υ", "ω", "αι", "ου"),
        codas=("ν", "ρ", "ς"),
        coda_prob=0.35,
    ),
}

LANGUAGES = tuple(sorted(_SHAPES))

_vocab_cache: dict[str, list[str]] = {}
_cum_weights_cache: dict[str, list[float]] = {}


def _make_word(shape: _LangShape, rng: random.Random) -> str:
    n_syllables = rng.choices((1, 2, 3, 4), weights=(15, 40, 30, 15))[0]
    parts = []
    for _ in range(n_syllables):
        parts.append(rng.choice(shape.onsets))
        parts.append(rng.choice(shape.vowels))
    if rng.random() < shape.coda_prob:
        parts.append(rng.choice(shape.codas))
    return "".join(parts)


def vocabulary(lang: str) -> list[str]:
    """Fixed word stock for a language, identical across processes."""
    if lang not in _SHAPES:
        raise InputError(f"unknown synthetic language {lang!r}")
    if lang not in _vocab_cache:
        rng = random.Random(f"synthlang:{lang}:v1")
        shape = _SHAPES[lang]
        words: list[str] = []
        seen: set[str] = set()
        while len(words) < VOCABULARY_SIZE:
            w = _make_word(shape, rng)
            if w not in seen:
                seen.add(w)
                words.append(w)
        _vocab_cache[lang] = words
    return _vocab_cache[lang]


def _cum_weights(lang: str) -> list[float]:
    if lang not in _cum_weights_cache:
        weights = [1.0 / (rank + 1) ** ZIPF_EXPONENT
                   for rank in range(VOCABULARY_SIZE)]
        _cum_weights_cache[lang] = list(itertools.accumulate(weights))
    return _cum_weights_cache[lang]


def word(lang: str, rng: random.Random) -> str:
    """One Zipf-weighted word draw."""
    vocab = vocabulary(lang)
    cum = _cum_weights(lang)
    x = rng.random() * cum[-1]
    return vocab[bisect_right(cum, x)]


def sentence(lang: str, rng: random.Random, n_words: int | None = None) -> str:
    """A capitalized, period-terminated sentence of 5-14 words."""
    n = n_words if n_words is not None else rng.randint(5, 14)
    words = [word(lang, rng) for _ in range(max(1, n))]
    if len(words) >= 6 and rng.random() < 0.3:
        comma_at = rng.randint(2, len(words) - 2)
        words[comma_at] += ","
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def sentences(lang: str, n: int, seed: int | str,
              n_words: int | None = None) -> list[str]:
    """Reproducible batch of sentences."""
    rng = random.Random(f"synthlang:{lang}:sent:{seed}")
    return [sentence(lang, rng, n_words) for _ in range(n)]


def corpus(lang: str, min_chars: int, seed: int | str) -> str:
    """Running text of at least ``min_chars`` characters."""
    rng = random.Random(f"synthlang:{lang}:corpus:{seed}")
    chunks: list[str] = []
    total = 0
    while total < min_chars:
        s = sentence(lang, rng)
        chunks.append(s)
        total += len(s) + 1
    return " ".join(chunks)


def parallel_pairs(src_lang: str, tgt_lang: str, n: int,
                   seed: int | str) -> list[tuple[str, str]]:
    """Pseudo-bitext: paired sentences used as "correct" exam items."""
    rng = random.Random(f"synthlang:{src_lang}-{tgt_lang}:pairs:{seed}")
    pairs = []
    for _ in range(n):
        n_words = rng.randint(5, 11)
        src = sentence(src_lang, rng, n_words)
        tgt = sentence(tgt_lang, rng, max(3, n_words + rng.randint(-1, 1)))
        pairs.append((src, tgt))
    return pairs


def glossary(src_lang: str, tgt_lang: str, n: int,
             seed: int | str) -> dict[str, str]:
    """Word-for-word dictionary between two languages' word stocks."""
    rng = random.Random(f"synthlang:{src_lang}-{tgt_lang}:gloss:{seed}")
    src_words = vocabulary(src_lang)[:n]
    tgt_words = rng.sample(vocabulary(tgt_lang), min(n, VOCABULARY_SIZE))
    return dict(zip(src_words, tgt_words))
