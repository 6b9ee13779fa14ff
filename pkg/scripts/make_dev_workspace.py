#!/usr/bin/env python3
"""Bootstrap a runnable dev workspace: language profiles, exam pool files,
source sentences, and a config, all from the bundled synthetic languages.

    python scripts/make_dev_workspace.py dev/
    corpusforge ingest --config dev/corpusforge.conf --lang che \
        --origin wiki-ce --file dev/sources-che.txt --direction che-rus
    corpusforge exam-build --config dev/corpusforge.conf --direction che-rus \
        --seed 1 --pairs dev/exam/che-rus/correct.tsv \
        --glossary dev/exam/che-rus/glossary.tsv \
        --otherlang dev/exam/che-rus/otherlang.txt
    corpusforge serve --config dev/corpusforge.conf
"""

import argparse
from pathlib import Path

from corpusforge import synthlang
from corpusforge.langid import save_profile, train_profile

DIRECTIONS = ("che-rus", "rus-che", "fuv-eng", "eng-fuv")
LANGS = ("che", "rus", "fuv", "eng")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("root", nargs="?", default="dev")
    parser.add_argument("--train-chars", type=int, default=300_000)
    parser.add_argument("--sources", type=int, default=200)
    args = parser.parse_args()

    root = Path(args.root)
    profiles = root / "profiles"
    profiles.mkdir(parents=True, exist_ok=True)

    for lang in LANGS:
        profile = train_profile(
            [synthlang.corpus(lang, args.train_chars, "dev")], lang
        )
        save_profile(profile, profiles / f"{lang}.json")
        print(f"profile {lang}: {profile.total_ngrams} n-grams")

    for lang in ("che", "rus", "fuv", "eng"):
        path = root / f"sources-{lang}.txt"
        path.write_text(
            "\n".join(synthlang.sentences(lang, args.sources, seed="dev")) + "\n",
            encoding="utf-8",
        )
        print(f"sources {lang}: {args.sources} lines -> {path}")

    for code in DIRECTIONS:
        src, tgt = code.split("-")
        exam_dir = root / "exam" / code
        exam_dir.mkdir(parents=True, exist_ok=True)
        pairs = synthlang.parallel_pairs(src, tgt, 12, seed="dev")
        (exam_dir / "correct.tsv").write_text(
            "\n".join(f"{s}\t{t}" for s, t in pairs) + "\n", encoding="utf-8"
        )
        gloss = synthlang.glossary(src, tgt, 400, seed="dev")
        (exam_dir / "glossary.tsv").write_text(
            "\n".join(f"{s}\t{t}" for s, t in gloss.items()) + "\n",
            encoding="utf-8",
        )
        (exam_dir / "otherlang.txt").write_text(
            "\n".join(synthlang.sentences("ell", 5, seed="dev")) + "\n",
            encoding="utf-8",
        )
        print(f"exam pools for {code} -> {exam_dir}")

    config = root / "corpusforge.conf"
    config.write_text(
        "listen.host = 127.0.0.1\n"
        "listen.port = 8800\n"
        f"store.path = {root / 'store.json'}\n"
        f"langid.profile_dir = {profiles}\n",
        encoding="utf-8",
    )
    print(f"config -> {config}")


if __name__ == "__main__":
    main()
