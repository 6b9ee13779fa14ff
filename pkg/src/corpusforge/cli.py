"""Operator command line: serve, ingest, exams, stats, export, cost, sim."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import exam as exam_mod
from . import ingest as ingest_mod
from . import langid
from . import ledger as ledger_mod
from . import replay as replay_mod
from . import simulate as simulate_mod
from .errors import ConfigError, CorpusForgeError, InputError
from .service import CONFIG_ENV_VAR, ServiceConfig, load_config
from .store import Direction, Store

DEFAULT_CONFIG_PATH = "corpusforge.conf"


def _resolve_config(path_arg: str | None) -> ServiceConfig:
    path = path_arg or os.environ.get(CONFIG_ENV_VAR)
    if path:
        return load_config(path)
    if Path(DEFAULT_CONFIG_PATH).exists():
        return load_config(DEFAULT_CONFIG_PATH)
    return ServiceConfig()


def _detector(config: ServiceConfig) -> langid.Detector:
    if not config.profile_dir:
        raise ConfigError(
            "langid.profile_dir is not configured; train profiles first"
        )
    return langid.Detector.from_dir(
        config.profile_dir, margin_threshold=config.langid_margin
    )


def _open_store(config: ServiceConfig) -> Store:
    if not config.store_path:
        raise ConfigError("store.path is not configured")
    if Path(config.store_path).exists():
        return Store.load(config.store_path)
    return Store(
        directions=[Direction.parse(code) for code in config.directions],
        prices=config.prices(),
    )


def _save_store(store: Store, config: ServiceConfig) -> None:
    store.save(config.store_path)


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    config = _resolve_config(args.config)
    serve(config, _detector(config))
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    detector = _detector(config)
    store = _open_store(config)
    lines = [
        ingest_mod.RawLine(text=line, origin=args.origin)
        for line in Path(args.file).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    report = ingest_mod.ingest(store, lines, args.lang, detector)
    if args.direction:
        from .engine import TaskEngine

        direction = store.direction(args.direction)
        pooled = [
            s.id for s in store.sources.values()
            if s.status == "pool" and s.lang == direction.src_lang
        ]
        engine = TaskEngine(store, detector, config.qc())
        engine.create_translation_tasks(pooled, direction)
    _save_store(store, config)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def cmd_langid_train(args: argparse.Namespace) -> int:
    lines = Path(args.file).read_text(encoding="utf-8").splitlines()
    profile = langid.train_profile(lines, args.lang)
    out = args.out
    if not out:
        config = _resolve_config(args.config)
        if not config.profile_dir:
            raise ConfigError("pass --out or configure langid.profile_dir")
        Path(config.profile_dir).mkdir(parents=True, exist_ok=True)
        out = Path(config.profile_dir) / f"{args.lang}.json"
    langid.save_profile(profile, out)
    print(f"trained {args.lang} on {len(lines)} lines -> {out}")
    return 0


def cmd_langid_detect(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    detector = _detector(config)
    detection = detector.detect(args.text)
    print(
        json.dumps(
            {
                "lang": detection.lang,
                "score": detection.score,
                "margin": detection.margin,
                "confident": detection.confident,
            },
            indent=2,
        )
    )
    return 0


def cmd_exam_build(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    store = _open_store(config)
    form = exam_mod.build_exam(
        direction=args.direction,
        parallel_pool=exam_mod.load_pairs_tsv(args.pairs),
        glossary=exam_mod.load_glossary_tsv(args.glossary),
        other_lang_pool=exam_mod.load_lines(args.otherlang),
        seed=args.seed,
        version=args.version,
    )
    store.install_exam(form)
    _save_store(store, config)
    print(
        json.dumps(
            {
                "direction": form.direction,
                "version": form.version,
                "items": [
                    {
                        "src": item.src,
                        "tgt": item.tgt,
                        "true_label": item.true_label,
                        "distractor_kind": item.distractor_kind,
                    }
                    for item in form.items
                ],
            },
            ensure_ascii=False,
            indent=2,
        )
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.replay:
        stats = replay_mod.replay_funnel(args.replay)
        print(json.dumps(stats.as_dict(), indent=2))
        return 0
    if not args.profiles:
        raise InputError("--profiles is required unless --replay is given")
    profiles = simulate_mod.load_profiles(args.profiles)
    directions = args.directions or sorted(
        {
            code
            for profile in profiles
            for code in _codes_for_langs(profile.langs)
        }
    )
    report, _ = simulate_mod.run_local_simulation(
        profiles,
        {code: args.sources for code in directions},
        seed=args.seed,
        concurrency=args.concurrency,
    )
    output = report.to_json()
    if args.out:
        Path(args.out).write_text(output + "\n", encoding="utf-8")
    print(output)
    return 0


def _codes_for_langs(langs: frozenset[str]) -> list[str]:
    return [
        d.code
        for d in (Direction.parse(c) for c in
                  ("che-rus", "rus-che", "fuv-eng", "eng-fuv"))
        if {d.src_lang, d.tgt_lang} <= langs
    ]


def cmd_export(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    store = _open_store(config)
    body = store.export_corpus(args.direction, args.format, args.include_pending)
    if args.out:
        Path(args.out).write_bytes(body)
    else:
        sys.stdout.buffer.write(body)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    config = _resolve_config(args.config)
    store = _open_store(config)
    stats = store.funnel_stats()
    if args.format == "json":
        print(json.dumps(stats.as_dict(), indent=2))
        return 0
    codes = list(stats.directions)
    headers = ["", "total"] + codes
    rows = [
        ["translated", stats.totals.translated]
        + [stats.directions[c].translated for c in codes],
        ["fully_verified", stats.totals.fully_verified]
        + [stats.directions[c].fully_verified for c in codes],
        ["in_corpus", stats.totals.in_corpus]
        + [stats.directions[c].in_corpus for c in codes],
    ]
    widths = [
        max(len(str(row[i])) for row in [headers] + rows)
        for i in range(len(headers))
    ]
    for row in [headers] + rows:
        print("  ".join(str(cell).rjust(width) for cell, width in zip(row, widths)))
    return 0


def cmd_cost(args: argparse.Namespace) -> int:
    if args.cost_cmd == "project":
        total = ledger_mod.project_cost(args.languages, args.sentences, args.price)
        print(str(total))
        return 0
    config = _resolve_config(args.config)
    store = _open_store(config)
    if args.csv:
        Path(args.csv).write_text(store.ledger.to_csv(), encoding="utf-8")
    totals = {k: str(v) for k, v in store.ledger.totals().items()}
    payload = {"totals": totals}
    if args.by == "worker":
        payload["by_worker"] = {
            str(worker): str(amount)
            for worker, amount in sorted(store.ledger.totals_by_worker().items())
        }
    print(json.dumps(payload, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpusforge",
        description="Crowd-translation pipeline: tasks, verification, accounting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to the key=value config file")

    p = sub.add_parser("serve", help="run the HTTP service")
    add_config(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="clean and pool source sentences")
    p.add_argument("--lang", required=True)
    p.add_argument("--origin", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--direction", help="also create translation tasks")
    add_config(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("langid-train", help="train a language profile")
    p.add_argument("--lang", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--out")
    add_config(p)
    p.set_defaults(func=cmd_langid_train)

    p = sub.add_parser("langid-detect", help="detect the language of a text")
    p.add_argument("--text", required=True)
    add_config(p)
    p.set_defaults(func=cmd_langid_detect)

    p = sub.add_parser("exam-build", help="build and install an exam form")
    p.add_argument("--direction", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pairs", required=True, help="correct pairs TSV")
    p.add_argument("--glossary", required=True, help="word glossary TSV")
    p.add_argument("--otherlang", required=True, help="other-language sentences")
    p.add_argument("--version")
    add_config(p)
    p.set_defaults(func=cmd_exam_build)

    p = sub.add_parser("simulate", help="drive a simulated worker population")
    p.add_argument("--profiles", help="worker profiles JSON")
    p.add_argument("--sources", type=int, default=100, help="per direction")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--directions", nargs="*")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--replay", help="replay an event-log fixture instead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export", help="export the accepted corpus")
    p.add_argument("--direction", required=True)
    p.add_argument("--format", choices=["jsonl", "tsv"], default="jsonl")
    p.add_argument("--include-pending", action="store_true")
    p.add_argument("--out")
    add_config(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="print the collection funnel")
    p.add_argument("--format", choices=["json", "table"], default="table")
    add_config(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("cost", help="payment totals and projections")
    p.add_argument("--by", choices=["worker", "kind"], default="kind")
    p.add_argument("--csv", help="also write the raw entries as CSV")
    add_config(p)
    cost_sub = p.add_subparsers(dest="cost_cmd")
    pp = cost_sub.add_parser("project", help="project a collection budget")
    pp.add_argument("--languages", type=int, required=True)
    pp.add_argument("--sentences", type=int, required=True)
    pp.add_argument("--price", required=True)
    p.set_defaults(func=cmd_cost, cost_cmd=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CorpusForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
