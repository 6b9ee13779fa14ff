import json

import pytest

from corpusforge import replay, synthlang
from corpusforge.cli import main
from corpusforge.langid import save_profile
from corpusforge.store import Store


@pytest.fixture()
def workspace(tmp_path, detector):
    """Config file, profile dir, and store path wired together."""
    profile_dir = tmp_path / "profiles"
    profile_dir.mkdir()
    for profile in detector.profiles.values():
        save_profile(profile, profile_dir / f"{profile.lang}.json")
    store_path = tmp_path / "store.json"
    config_path = tmp_path / "corpusforge.conf"
    config_path.write_text(
        f"store.path = {store_path}\n"
        f"langid.profile_dir = {profile_dir}\n",
        encoding="utf-8",
    )
    return tmp_path, config_path, store_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


class TestIngestCommand:
    def test_ingest_prints_report_and_persists(self, workspace, capsys):
        tmp_path, config, store_path = workspace
        corpus = tmp_path / "lines.txt"
        corpus.write_text(
            "\n".join(synthlang.sentences("che", 12, seed="cli")),
            encoding="utf-8",
        )
        code, out = run(
            capsys, "ingest", "--lang", "che", "--origin", "wiki-ce",
            "--file", corpus, "--config", config,
        )
        assert code == 0
        report = json.loads(out)
        assert report["kept"] == 12
        store = Store.load(store_path)
        assert len(store.sources) == 12

    def test_ingest_with_direction_creates_tasks(self, workspace, capsys):
        tmp_path, config, store_path = workspace
        corpus = tmp_path / "lines.txt"
        corpus.write_text(
            "\n".join(synthlang.sentences("che", 4, seed="cli2")),
            encoding="utf-8",
        )
        code, _ = run(
            capsys, "ingest", "--lang", "che", "--origin", "wiki-ce",
            "--file", corpus, "--direction", "che-rus", "--config", config,
        )
        assert code == 0
        store = Store.load(store_path)
        assert len(store.tasks) == 4
        assert len(store.open_tasks["che-rus"]) == 4


class TestLangidCommands:
    def test_train_then_detect(self, tmp_path, capsys):
        profile_dir = tmp_path / "profiles"
        profile_dir.mkdir()
        config = tmp_path / "c.conf"
        config.write_text(
            f"langid.profile_dir = {profile_dir}\n", encoding="utf-8"
        )
        for lang in ("che", "rus"):
            corpus = tmp_path / f"{lang}.txt"
            corpus.write_text(
                synthlang.corpus(lang, 30_000, "cli"), encoding="utf-8"
            )
            code, _ = run(
                capsys, "langid-train", "--lang", lang, "--file", corpus,
                "--config", config,
            )
            assert code == 0
        text = synthlang.sentences("rus", 1, seed="cli-detect")[0]
        code, out = run(
            capsys, "langid-detect", "--text", text, "--config", config
        )
        assert code == 0
        detection = json.loads(out)
        assert detection["lang"] == "rus"
        assert detection["confident"] is True


class TestExamBuildCommand:
    def test_build_installs_form(self, workspace, capsys):
        tmp_path, config, store_path = workspace
        pairs = synthlang.parallel_pairs("che", "rus", 10, seed="cli-exam")
        (tmp_path / "correct.tsv").write_text(
            "\n".join(f"{s}\t{t}" for s, t in pairs), encoding="utf-8"
        )
        gloss = synthlang.glossary("che", "rus", 50, seed="cli-exam")
        (tmp_path / "glossary.tsv").write_text(
            "\n".join(f"{s}\t{t}" for s, t in gloss.items()), encoding="utf-8"
        )
        (tmp_path / "otherlang.txt").write_text(
            "\n".join(synthlang.sentences("ell", 3, seed="cli-exam")),
            encoding="utf-8",
        )
        code, out = run(
            capsys, "exam-build", "--direction", "che-rus", "--seed", 5,
            "--pairs", tmp_path / "correct.tsv",
            "--glossary", tmp_path / "glossary.tsv",
            "--otherlang", tmp_path / "otherlang.txt",
            "--config", config,
        )
        assert code == 0
        form = json.loads(out)
        assert len(form["items"]) == 10
        store = Store.load(store_path)
        assert store.active_exam("che-rus") is not None


class TestStatsExportCost:
    @pytest.fixture()
    def replayed(self, workspace):
        tmp_path, config, store_path = workspace
        _, store = replay.replay_events(replay.build_reference_events())
        store.save(store_path)
        return config

    def test_stats_table(self, replayed, capsys):
        code, out = run(capsys, "stats", "--format", "table", "--config", replayed)
        assert code == 0
        assert "translated" in out and "1627" in out
        assert "che-rus" in out

    def test_stats_json(self, replayed, capsys):
        code, out = run(capsys, "stats", "--format", "json", "--config", replayed)
        payload = json.loads(out)
        assert payload["totals"]["in_corpus"] == 1078

    def test_export_tsv(self, replayed, tmp_path, capsys):
        out_path = tmp_path / "corpus.tsv"
        code, _ = run(
            capsys, "export", "--direction", "che-rus", "--format", "tsv",
            "--out", out_path, "--config", replayed,
        )
        assert code == 0
        lines = out_path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 380

    def test_cost_totals(self, replayed, capsys):
        code, out = run(capsys, "cost", "--config", replayed)
        payload = json.loads(out)
        assert payload["totals"]["translation"] == "32.5400"
        assert payload["totals"]["verification_set"] == "4.4100"

    def test_cost_by_worker(self, replayed, capsys):
        code, out = run(
            capsys, "cost", "--by", "worker", "--config", replayed
        )
        payload = json.loads(out)
        assert "by_worker" in payload
        assert payload["by_worker"]["1"] == "32.5400"

    def test_cost_csv_export(self, replayed, tmp_path, capsys):
        csv_path = tmp_path / "entries.csv"
        code, _ = run(
            capsys, "cost", "--csv", csv_path, "--config", replayed
        )
        assert code == 0
        lines = csv_path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "worker_id,kind,units,amount,at"
        assert len(lines) == 1 + 1627 + 441

    def test_cost_projection(self, capsys):
        code, out = run(
            capsys, "cost", "project", "--languages", 7000,
            "--sentences", 1000000, "--price", "1.00",
        )
        assert code == 0
        assert out.strip() == "7000000000.0000"


class TestSimulateCommand:
    def test_replay_mode(self, capsys):
        code, out = run(
            capsys, "simulate", "--replay", replay.FIXTURE_PATH
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["totals"]["translated"] == 1627

    def test_profile_driven_run(self, tmp_path, capsys):
        profiles = tmp_path / "profiles.json"
        profiles.write_text(
            json.dumps(
                [{"name": "crowd", "langs": ["che", "rus"],
                  "g": 1.0, "q": 1.0, "count": 5}]
            ),
            encoding="utf-8",
        )
        code, out = run(
            capsys, "simulate", "--profiles", profiles, "--sources", 8,
            "--seed", 3, "--directions", "che-rus",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["totals"]["translated"] == 8
        assert payload["totals"]["in_corpus"] == 8


class TestErrors:
    def test_missing_config_key_errors_cleanly(self, tmp_path, capsys):
        config = tmp_path / "c.conf"
        config.write_text("", encoding="utf-8")
        code = main(["stats", "--config", str(config)])
        assert code == 2
        assert "store.path" in capsys.readouterr().err
