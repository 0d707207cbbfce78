import json

import pytest

from src.api.cli.run_cli import CLIApplication, build_parser
from src.core.models.segments import Segment, SegmentList
from src.infra.storage.csv_store import read_window_labels
from src.infra.storage.rttm import read_rttm, write_rttm
from tests.helpers import tiny_config_dict, write_config


def run(*argv) -> int:
    return CLIApplication().run([str(a) for a in argv])


@pytest.fixture
def config_path(tmp_path):
    return write_config(tmp_path / "cfg.json", tiny_config_dict())


@pytest.fixture
def reference(tmp_path):
    path = tmp_path / "ref.rttm"
    write_rttm(
        SegmentList([Segment("r1", 0.0, 2.0, "A"), Segment("r1", 2.0, 4.0, "B")]), path
    )
    return path


def json_tail(out: str) -> dict:
    return json.loads(out[out.index("{"):])


@pytest.mark.unit
class TestParser:
    def test_invalid_system_is_a_usage_error(self):
        with pytest.raises(SystemExit) as e:
            build_parser().parse_args(
                ["train", "--corpus", "c", "--system", "ivector", "--out", "o"]
            )
        assert e.value.code == 2

    def test_init_pair(self):
        args = build_parser().parse_args(
            [
                "train",
                "--corpus",
                "c",
                "--system",
                "cvector:consec2",
                "--out",
                "o",
                "--init",
                "tdnn=runs/tdnn/checkpoint",
            ]
        )
        assert args.init[0][0] == "tdnn"
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                [
                    "train",
                    "--corpus",
                    "c",
                    "--system",
                    "tdnn",
                    "--out",
                    "o",
                    "--init",
                    "x",
                ]
            )

    def test_cluster_modes_are_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(
                [
                    "cluster",
                    "--embeddings",
                    "e",
                    "--out",
                    "o",
                    "--tune",
                    "--threshold",
                    "0.5",
                ]
            )

    def test_jobs_is_a_global_extraction_option(self, capsys):
        args = build_parser().parse_args(["--jobs", "3", "report", "--run", "r"])
        assert args.jobs == 3
        with pytest.raises(SystemExit):
            build_parser().parse_args(["--help"])
        help_text = " ".join(capsys.readouterr().out.split())
        assert "извлечения эмбеддингов" in help_text


@pytest.mark.integration
class TestScoreCommand:
    def test_perfect_hypothesis(self, tmp_path, reference, capsys):
        hypothesis = tmp_path / "hyp.rttm"
        write_rttm(
            SegmentList([Segment("r1", 0.0, 2.0, "x"), Segment("r1", 2.0, 4.0, "y")]),
            hypothesis,
        )
        assert run("score", "--reference", reference, "--hypothesis", hypothesis) == 0
        out = capsys.readouterr().out
        assert "TOTAL" in out
        assert json_tail(out)["ser"] == 0.0

    def test_single_cluster_without_collar(self, tmp_path, reference, capsys):
        hypothesis = tmp_path / "hyp.rttm"
        write_rttm(SegmentList([Segment("r1", 0.0, 4.0, "x")]), hypothesis)
        code = run(
            "score",
            "--reference",
            reference,
            "--hypothesis",
            hypothesis,
            "--collar",
            0,
            "--out",
            tmp_path / "ser.json",
        )
        assert code == 0
        assert json_tail(capsys.readouterr().out)["ser"] == pytest.approx(50.0)
        saved = json.loads((tmp_path / "ser.json").read_text())
        assert saved["ser"] == pytest.approx(50.0)

    def test_missing_hypothesis(self, tmp_path, reference):
        missing = tmp_path / "x"
        assert run("score", "--reference", reference, "--hypothesis", missing) == 3


@pytest.mark.integration
class TestExitCodes:
    def test_malformed_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json")
        assert run("synth", "--config", path, "--out", tmp_path / "corpus") == 2

    def test_inconsistent_config(self, tmp_path):
        data = tiny_config_dict(train={"window_frames": 5, "window_shift": 10})
        path = write_config(tmp_path / "cfg.json", data)
        assert run("synth", "--config", path, "--out", tmp_path / "corpus") == 2

    def test_missing_config_file(self, tmp_path):
        assert run("synth", "--config", tmp_path / "nope.json", "--out", tmp_path) == 2

    def test_unknown_log_level(self, tmp_path):
        assert run("--log-level", "LOUD", "report", "--run", tmp_path) == 2

    def test_missing_corpus(self, tmp_path, config_path):
        code = run(
            "train",
            "--config",
            config_path,
            "--corpus",
            tmp_path / "absent",
            "--system",
            "tdnn",
            "--out",
            tmp_path / "sys",
        )
        assert code == 3

    def test_synth_refuses_to_overwrite(self, tmp_path, config_path):
        out = tmp_path / "corpus"
        assert run("synth", "--config", config_path, "--out", out) == 0
        assert run("synth", "--config", config_path, "--out", out) == 3
        assert run("synth", "--config", config_path, "--out", out, "--force") == 0
        assert (out / "manifest.json").is_file()

    def test_sweep_without_valid_checkpoint(self, tmp_path, config_path):
        corpus = tmp_path / "corpus"
        run("synth", "--config", config_path, "--out", corpus)
        code = run(
            "sweep-lambda",
            "--checkpoints",
            tmp_path / "missing",
            "--corpus",
            corpus,
            "--out",
            tmp_path / "sweep",
        )
        assert code == 3


@pytest.mark.integration
class TestStepByStep:
    def test_synth_train_extract_cluster_score(self, tmp_path, config_path):
        corpus = tmp_path / "corpus"
        system = tmp_path / "tdnn"
        assert run("synth", "--config", config_path, "--out", corpus) == 0
        assert (
            run(
                "train",
                "--config",
                config_path,
                "--corpus",
                corpus,
                "--system",
                "tdnn",
                "--out",
                system,
            )
            == 0
        )
        assert (system / "checkpoint" / "header.json").is_file()
        assert (system / "loss.csv").is_file()

        for split in ("dev", "eval"):
            code = run(
                "extract",
                "--checkpoint",
                system / "checkpoint",
                "--corpus",
                corpus,
                "--split",
                split,
                "--out",
                system / "embeddings" / split,
            )
            assert code == 0

        tune_without_reference = run(
            "cluster",
            "--config",
            config_path,
            "--embeddings",
            system / "embeddings" / "dev",
            "--out",
            system / "hyp_dev.rttm",
            "--tune",
        )
        assert tune_without_reference == 2

        code = run(
            "cluster",
            "--config",
            config_path,
            "--embeddings",
            system / "embeddings" / "dev",
            "--out",
            system / "hyp_dev.rttm",
            "--tune",
            "--reference",
            corpus / "dev" / "reference.rttm",
            "--tuning-out",
            system / "tuning.json",
        )
        assert code == 0
        tuning = json.loads((system / "tuning.json").read_text())
        assert tuning["threshold_p"] in (0.3, 0.5, 0.7)

        code = run(
            "cluster",
            "--config",
            config_path,
            "--embeddings",
            system / "embeddings" / "eval",
            "--out",
            system / "hyp_eval.rttm",
            "--threshold-from",
            system / "tuning.json",
        )
        assert code == 0
        hypothesis = read_rttm(system / "hyp_eval.rttm")
        assert hypothesis.recordings() == ["eval_000", "eval_001"]
        window_labels = read_window_labels(system / "hyp_eval.labels.csv")
        recordings = {row["recording_id"] for row in window_labels}
        assert recordings == {"eval_000", "eval_001"}
        assert set(hypothesis.speakers()) <= {row["label"] for row in window_labels}

        code = run(
            "score",
            "--reference",
            corpus / "eval" / "reference.rttm",
            "--hypothesis",
            system / "hyp_eval.rttm",
            "--out",
            system / "ser_eval.json",
        )
        assert code == 0
        assert 0.0 <= json.loads((system / "ser_eval.json").read_text())["ser"] <= 100.0

    def test_extract_with_mismatched_corpus(self, tmp_path, config_path):
        corpus = tmp_path / "corpus"
        other = tmp_path / "other"
        run("synth", "--config", config_path, "--out", corpus)
        wide = write_config(
            tmp_path / "wide.json", tiny_config_dict(synth={"feature_dim": 7})
        )
        run("synth", "--config", wide, "--out", other)
        run(
            "train",
            "--config",
            config_path,
            "--corpus",
            corpus,
            "--system",
            "tdnn",
            "--out",
            tmp_path / "sys",
        )
        code = run(
            "extract",
            "--checkpoint",
            tmp_path / "sys" / "checkpoint",
            "--corpus",
            other,
            "--out",
            tmp_path / "emb",
        )
        assert code == 2


@pytest.mark.slow
class TestPipeline:
    def test_full_run(self, tmp_path, config_path, capsys):
        run_dir = tmp_path / "run"
        assert run("pipeline", "--config", config_path, "--run", run_dir) == 0
        out = capsys.readouterr().out
        for system in ("tdnn", "hornn", "cvector-consec2"):
            target = run_dir / "systems" / system
            assert (target / "hyp_dev.rttm").is_file()
            assert (target / "hyp_eval.rttm").is_file()
            assert read_window_labels(target / "hyp_eval.labels.csv")
            ser = json.loads((target / "ser_eval.json").read_text())["ser"]
            assert 0.0 <= ser <= 100.0
        assert (run_dir / "report.txt").read_text().strip() in out

        assert run("pipeline", "--config", config_path, "--run", run_dir) == 3
        assert run("report", "--run", run_dir) == 0

    def test_same_seed_reproduces_run(self, tmp_path, config_path):
        runs = [tmp_path / "first", tmp_path / "second"]
        for run_dir in runs:
            assert run("pipeline", "--config", config_path, "--run", run_dir) == 0
        for system in ("tdnn", "hornn", "cvector-consec2"):
            first, second = (run_dir / "systems" / system for run_dir in runs)
            for name in ("hyp_dev.rttm", "hyp_eval.rttm", "ser_eval.json"):
                assert (first / name).read_bytes() == (second / name).read_bytes()


DESK_SCALE = {
    "seed": 3,
    "synth": {
        "num_speakers": 20,
        "eval_speakers": 4,
        "feature_dim": 20,
        "turn_frames_min": 150,
        "turn_frames_max": 300,
        "train_recordings": 20,
    },
    "tdnn": {
        "layers": [
            {"context": [-2, -1, 0, 1, 2], "out_dim": 32},
            {"context": [-2, 0, 2], "out_dim": 32},
            {"context": [-3, 0, 3], "out_dim": 32},
            {"context": [0], "out_dim": 32},
            {"context": [0], "out_dim": 16},
        ],
        "projection_dim": 16,
    },
    "hornn": {"num_layers": 1, "state_dim": 16, "projection_dim": 16},
    "attention": {"heads": 3, "penalty": {"mu": 0.1, "n_smooth": 1}},
    "combiner": {"bottleneck_dim": 32},
    "train": {
        "window_frames": 100,
        "window_shift": 50,
        "learning_rate": 0.005,
        "epochs": 5,
        "pretrain_epochs": 1,
    },
}


@pytest.mark.slow
def test_desk_scale_run_keeps_error_low(tmp_path):
    config_path = write_config(tmp_path / "cfg.json", DESK_SCALE)
    run_dir = tmp_path / "run"
    assert run("pipeline", "--config", config_path, "--run", run_dir) == 0
    ser = {
        system: json.loads(
            (run_dir / "systems" / system / "ser_eval.json").read_text()
        )["ser"]
        for system in ("tdnn", "hornn", "cvector-consec2")
    }
    assert all(value <= 10.0 for value in ser.values())
    assert ser["cvector-consec2"] <= max(ser["tdnn"], ser["hornn"]) + 1.0
