import hashlib
import json

import pytest

from bruxkit.cli import (
    EXIT_ALL_DEGENERATE,
    EXIT_EMPTY_CLASS,
    EXIT_IO,
    EXIT_ISSUES,
    EXIT_OK,
    EXIT_SKIPPED_FOLDS,
    EXIT_USAGE,
    load_config,
    main,
)
from bruxkit.corpus import load_recording, save_recording
from bruxkit.models import load_model
from bruxkit.synth import generate_corpus


def run(*argv):
    return main([str(a) for a in argv])


class TestSynthCommand:
    def test_writes_corpus_and_summary(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        assert run("synth", "--participants", 2, "--seed", 3, "--out", out) == EXIT_OK
        stdout = capsys.readouterr().out
        assert "task1a" in stdout and "task2b" in stdout
        assert (out / "manifest.json").exists()

    def test_rerun_identical_manifest_hash(self, tmp_path):
        out1, out2 = tmp_path / "c1", tmp_path / "c2"
        run("synth", "--participants", 2, "--seed", 5, "--out", out1)
        run("synth", "--participants", 2, "--seed", 5, "--out", out2)
        h1 = hashlib.sha256((out1 / "manifest.json").read_bytes()).hexdigest()
        h2 = hashlib.sha256((out2 / "manifest.json").read_bytes()).hexdigest()
        assert h1 == h2

    def test_single_participant_rejected(self, tmp_path, capsys):
        assert run("synth", "--participants", 1, "--out", tmp_path / "x") == EXIT_IO
        assert "at least 2" in capsys.readouterr().err


class TestValidateCommand:
    def test_clean_corpus(self, small_corpus_dir, capsys):
        assert run("validate", "--corpus", small_corpus_dir) == EXIT_OK
        assert "no issues" in capsys.readouterr().out

    def test_corrupted_csv_reports_line(self, tmp_path, capsys):
        generate_corpus(tmp_path, 2, master_seed=1)
        target = tmp_path / "p01_recording.csv"
        lines = target.read_text().splitlines()
        lines[10] = "not,a,row"
        target.write_text("\n".join(lines) + "\n")
        assert run("validate", "--corpus", tmp_path) == EXIT_IO
        err = capsys.readouterr().err
        assert "line 11" in err

    def test_mismatched_pair_reports_issue(self, tmp_path, capsys):
        generate_corpus(tmp_path, 2, master_seed=1)
        rec = load_recording(tmp_path / "p01_recording.csv")
        save_recording(rec, tmp_path / "p02_recording.csv")  # overwrite with p01 data
        assert run("validate", "--corpus", tmp_path) == EXIT_ISSUES
        assert "mismatch" in capsys.readouterr().out


class TestFeaturizeCommand:
    @pytest.mark.parametrize("modality", ["gyroscope", "accelerometer"])
    def test_row_count_per_modality(self, tmp_path, modality):
        corpus = tmp_path / "c"
        generate_corpus(corpus, 2, master_seed=2)
        # trim one recording to exactly 150 samples -> 36 windows
        rec_path = corpus / "p01_recording.csv"
        lines = rec_path.read_text().splitlines()
        rec_path.write_text("\n".join(lines[: 3 + 150]) + "\n")
        ann_path = corpus / "p01_annotations.json"
        doc = json.loads(ann_path.read_text())
        doc["intervals"] = [iv for iv in doc["intervals"] if iv["start"] < 29.0]
        for iv in doc["intervals"]:
            iv["end"] = min(iv["end"], 29.9)
        ann_path.write_text(json.dumps(doc))
        out = tmp_path / "features.csv"
        code = run(
            "featurize",
            "--recording", rec_path,
            "--annotations", ann_path,
            "--modality", modality,
            "--out", out,
        )
        assert code == EXIT_OK
        assert len(out.read_text().splitlines()) == 1 + 36


class TestFeaturizeWindowsRoundTrip:
    def test_windows_dump_feeds_featurize(self, small_corpus_dir, tmp_path):
        windows_csv = tmp_path / "windows.csv"
        direct = tmp_path / "direct.csv"
        code = run(
            "featurize",
            "--corpus", small_corpus_dir,
            "--modality", "gyroscope",
            "--windows-out", windows_csv,
            "--out", direct,
        )
        assert code == EXIT_OK
        via_windows = tmp_path / "via_windows.csv"
        code = run("featurize", "--windows", windows_csv, "--out", via_windows)
        assert code == EXIT_OK
        # feature values survive the 9-significant-digit dump within rounding
        a = direct.read_text().splitlines()
        b = via_windows.read_text().splitlines()
        assert len(a) == len(b)
        for row_a, row_b in zip(a[1:3], b[1:3]):
            va = [float(x) for x in row_a.split(",")[3:]]
            vb = [float(x) for x in row_b.split(",")[3:]]
            assert va == pytest.approx(vb, rel=1e-6, abs=1e-6)


class TestTrainCommand:
    def test_writes_model_and_echoes_accuracy(self, small_corpus_dir, tmp_path, capsys):
        out = tmp_path / "model.json"
        code = run(
            "train",
            "--corpus", small_corpus_dir,
            "--task", "task1a",
            "--modality", "gyroscope",
            "--model", "svm",
            "--seed", 3,
            "--out", out,
        )
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert "training accuracy" in stdout
        model = load_model(out)
        assert model.spec.kind == "svm"
        accuracy = float(stdout.split("training accuracy")[1].split()[0])
        assert accuracy >= 0.95


class TestEvaluateCommand:
    def test_full_run_writes_outputs(self, small_corpus_dir, tmp_path, capsys):
        out = tmp_path / "out"
        code = run(
            "evaluate",
            "--corpus", small_corpus_dir,
            "--task", "task1a",
            "--modality", "gyroscope",
            "--model", "svm",
            "--seed", 1,
            "--out", out,
        )
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert "accuracy" in stdout
        written = sorted(p.name for p in out.iterdir())
        assert any(name.endswith(".json") for name in written)
        assert any(name.endswith(".txt") for name in written)
        assert any(name.endswith(".csv") for name in written)
        assert any(name.endswith("_folds.png") for name in written)
        assert any(name.endswith("_confusion.png") for name in written)

    def test_config_file_with_flag_override(self, small_corpus_dir, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text(
            f'corpus_dir = "{small_corpus_dir}"\n'
            'task = "task1a"\n'
            'modality = "accelerometer"\n'
            'label_policy = "dominant_event"\n'
            'model = "knn"\n'
            "seed = 2\n"
            f'output_dir = "{tmp_path / "out"}"\n'
            "hp.k = 3\n"
        )
        code = run("evaluate", "--config", config, "--modality", "gyroscope")
        assert code == EXIT_OK
        report_path = next((tmp_path / "out").glob("*.json"))
        doc = json.loads(report_path.read_text())
        assert doc["modality"] == "gyroscope"  # flag wins over config
        assert doc["model"]["kind"] == "knn"
        assert doc["model"]["hyperparameters"]["k"] == 3

    def test_unknown_task_usage_error(self, small_corpus_dir, tmp_path):
        with pytest.raises(SystemExit) as err:
            run(
                "evaluate",
                "--corpus", small_corpus_dir,
                "--task", "task9z",
                "--out", tmp_path,
            )
        assert err.value.code == EXIT_USAGE

    def test_all_degenerate_exit_code(self, small_corpus_dir, tmp_path):
        code = run(
            "evaluate",
            "--corpus", small_corpus_dir,
            "--task", "task1a",
            "--model", "knn",
            "--hp", "k=100000",
            "--out", tmp_path / "out",
        )
        assert code == EXIT_ALL_DEGENERATE

    def test_empty_class_exit_code(self, tmp_path, capsys):
        corpus = tmp_path / "c"
        generate_corpus(corpus, 2, master_seed=6)
        for ann in corpus.glob("*_annotations.json"):
            doc = json.loads(ann.read_text())
            doc["intervals"] = [iv for iv in doc["intervals"] if iv["event"] != "grinding"]
            ann.write_text(json.dumps(doc))
        code = run(
            "evaluate", "--corpus", corpus, "--task", "task1a", "--out", tmp_path / "o"
        )
        assert code == EXIT_EMPTY_CLASS

    def test_skipped_fold_exit_code(self, tmp_path, capsys):
        corpus = tmp_path / "c"
        generate_corpus(corpus, 2, master_seed=6)
        # p01 loses all grinding: the fold testing p02 trains single-class
        ann = corpus / "p01_annotations.json"
        doc = json.loads(ann.read_text())
        for iv in doc["intervals"]:
            if iv["event"] == "grinding":
                iv["event"] = "silent"
        ann.write_text(json.dumps(doc))
        code = run(
            "evaluate", "--corpus", corpus, "--task", "task1a", "--out", tmp_path / "o"
        )
        assert code == EXIT_SKIPPED_FOLDS
        assert "skipped folds" in capsys.readouterr().out


class TestReportCommand:
    def test_rerender_from_json(self, small_corpus_dir, tmp_path, capsys):
        out = tmp_path / "out"
        run(
            "evaluate",
            "--corpus", small_corpus_dir,
            "--task", "task1a",
            "--model", "decision_tree",
            "--out", out,
        )
        report_path = next(out.glob("*.json"))
        capsys.readouterr()
        second = tmp_path / "rerender"
        assert run("report", "--report", report_path, "--out", second) == EXIT_OK
        assert any(p.suffix == ".png" for p in second.iterdir())
        # byte-identical JSON twin after a round trip
        rendered = next(second.glob("*.json"))
        assert rendered.read_bytes() == report_path.read_bytes()


class TestConfigParser:
    def test_scalar_types(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text(
            'name = "quoted"\n'
            "count = 5\n"
            "rate = 0.5  # trailing comment\n"
            "flag = true\n"
            "empty = none\n"
            "bare = word\n"
        )
        values = load_config(path)
        assert values == {
            "name": "quoted",
            "count": 5,
            "rate": 0.5,
            "flag": True,
            "empty": None,
            "bare": "word",
        }

    def test_rejects_non_assignment(self, tmp_path):
        path = tmp_path / "cfg"
        path.write_text("[section]\n")
        with pytest.raises(ValueError):
            load_config(path)
