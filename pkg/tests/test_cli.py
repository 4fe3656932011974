import json
import subprocess
import sys

import numpy as np
import pytest

from sentibert.cli import main
from sentibert.data import LABELS, write_corpus, write_jsonl
from sentibert.synthetic import generate_dataset, generate_documents

TINY_ENCODER = {"num_layers": 1, "num_heads": 2, "d_model": 16, "d_ff": 32, "max_len": 12, "dropout_rate": 0.1}


@pytest.fixture
def workspace(tmp_path):
    data = generate_dataset((12, 12, 12), seed=21)
    write_jsonl(data, str(tmp_path / "train.jsonl"))
    write_jsonl(generate_dataset((6, 6, 6), seed=22), str(tmp_path / "test.jsonl"))
    write_corpus(generate_documents(4, 3, seed=23), str(tmp_path / "corpus.txt"))
    config = {
        "seed": 3,
        "encoder": TINY_ENCODER,
        "train": {"epochs": 2, "batch_size": 8, "lr": 0.001, "val_split": 0.25},
        "pretrain": {"epochs": 1, "batch_size": 4},
        "vocab": {"max_size": 400, "min_freq": 1},
        "paths": {
            "train_data": str(tmp_path / "train.jsonl"),
            "eval_data": str(tmp_path / "test.jsonl"),
            "pretrain_corpus": str(tmp_path / "corpus.txt"),
            "vocab": str(tmp_path / "vocab.txt"),
            "checkpoint": str(tmp_path / "model.ckpt"),
            "curve": str(tmp_path / "curve.csv"),
            "metrics": str(tmp_path / "metrics.json"),
            "confusion": str(tmp_path / "confusion.csv"),
            "rebalanced_data": str(tmp_path / "rebalanced.jsonl"),
            "histogram": str(tmp_path / "histogram.json"),
            "predictions": str(tmp_path / "predictions.jsonl"),
        },
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return tmp_path, config_path, config


def run_cli(*argv):
    return main(list(argv))


class TestPipeline:
    def test_full_pipeline(self, workspace, capsys):
        tmp, config_path, config = workspace
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert (tmp / "vocab.txt").exists()

        assert run_cli("train", "--config", str(config_path)) == 0
        assert (tmp / "model.ckpt").exists()
        curve_lines = (tmp / "curve.csv").read_text().strip().split("\n")
        assert curve_lines[0] == "epoch,train_loss,train_acc,val_loss,val_acc"
        assert len(curve_lines) == 3  # header + 2 epochs

        assert run_cli("evaluate", "--config", str(config_path)) == 0
        metrics = json.loads((tmp / "metrics.json").read_text())
        assert set(metrics) == {"precision", "recall", "f1", "accuracy", "log_loss", "degenerate_flags"}
        assert (tmp / "confusion.csv").read_text().startswith(",negative,neutral,positive")

        (tmp / "texts.txt").write_text("the room was lovely\nthe room was terrible\n", encoding="utf-8")
        assert run_cli("predict", "--config", str(config_path), "--input", str(tmp / "texts.txt")) == 0
        pred_lines = (tmp / "predictions.jsonl").read_text().strip().split("\n")
        assert len(pred_lines) == 2
        for line in pred_lines:
            record = json.loads(line)
            assert record["label"] in LABELS
            assert abs(sum(record["probabilities"]) - 1.0) < 1e-9

        assert run_cli("report", "--config", str(config_path)) == 0
        out = capsys.readouterr().out
        assert "accuracy" in out and "macro" in out

    def test_pretrain_then_finetune(self, workspace, capsys):
        tmp, config_path, config = workspace
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert run_cli("pretrain", "--config", str(config_path)) == 0
        assert (tmp / "model.ckpt").exists()
        curve = (tmp / "curve.csv").read_text().strip().split("\n")
        assert curve[0] == "epoch,train_loss,train_acc,val_loss,val_acc"

        # reuse the pretrained checkpoint as the fine-tuning start
        config["paths"]["init_checkpoint"] = str(tmp / "model.ckpt")
        config["paths"]["checkpoint"] = str(tmp / "finetuned.ckpt")
        config_path.write_text(json.dumps(config), encoding="utf-8")
        assert run_cli("train", "--config", str(config_path)) == 0
        assert (tmp / "finetuned.ckpt").exists()

    def test_train_determinism_byte_identical(self, workspace):
        tmp, config_path, _ = workspace
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert run_cli("train", "--config", str(config_path), "--seed", "7") == 0
        first_curve = (tmp / "curve.csv").read_bytes()
        first_ckpt = (tmp / "model.ckpt").read_bytes()
        assert run_cli("train", "--config", str(config_path), "--seed", "7") == 0
        assert (tmp / "curve.csv").read_bytes() == first_curve
        assert (tmp / "model.ckpt").read_bytes() == first_ckpt

    def test_evaluate_perfect_fixture(self, workspace, capsys):
        tmp, config_path, config = workspace
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert run_cli("train", "--config", str(config_path)) == 0
        # label a fresh file with the model's own predictions
        texts = [f"the {n} was fine" for n in ("room", "pool", "lobby")]
        (tmp / "texts.txt").write_text("\n".join(texts) + "\n", encoding="utf-8")
        assert run_cli("predict", "--config", str(config_path), "--input", str(tmp / "texts.txt")) == 0
        records = [json.loads(l) for l in (tmp / "predictions.jsonl").read_text().strip().split("\n")]
        fixture = tmp / "perfect.jsonl"
        fixture.write_text(
            "\n".join(json.dumps({"text": t, "label": r["label"]}) for t, r in zip(texts, records)) + "\n",
            encoding="utf-8",
        )
        config["paths"]["eval_data"] = str(fixture)
        config_path.write_text(json.dumps(config), encoding="utf-8")
        assert run_cli("evaluate", "--config", str(config_path)) == 0
        metrics = json.loads((tmp / "metrics.json").read_text())
        assert metrics["accuracy"] == 1.0

    def test_predict_without_output_path_prints_jsonl(self, workspace, capsys):
        tmp, config_path, config = workspace
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert run_cli("train", "--config", str(config_path)) == 0
        capsys.readouterr()
        del config["paths"]["predictions"]
        config_path.write_text(json.dumps(config), encoding="utf-8")
        (tmp / "texts.txt").write_text("one fine room\n", encoding="utf-8")
        assert run_cli("predict", "--config", str(config_path), "--input", str(tmp / "texts.txt")) == 0
        out_lines = capsys.readouterr().out.strip().split("\n")
        assert len(out_lines) == 1
        assert json.loads(out_lines[0])["label"] in LABELS

    def test_rebalance_oversample_counts(self, workspace, capsys):
        tmp, config_path, config = workspace
        skewed = generate_dataset((10, 30, 90), seed=30)
        write_jsonl(skewed, str(tmp / "skewed.jsonl"))
        config["paths"]["train_data"] = str(tmp / "skewed.jsonl")
        config_path.write_text(json.dumps(config), encoding="utf-8")
        assert run_cli("rebalance", "--config", str(config_path), "--balance", "oversample") == 0
        payload = json.loads((tmp / "histogram.json").read_text())
        assert payload["before"]["counts"] == {"negative": 10, "neutral": 30, "positive": 90}
        assert payload["after"]["counts"] == {"negative": 90, "neutral": 90, "positive": 90}
        rebalanced = (tmp / "rebalanced.jsonl").read_text().strip().split("\n")
        assert len(rebalanced) == 270


class TestErrorPaths:
    def test_missing_config_is_usage_error(self, capsys):
        assert run_cli("train", "--config", "/nonexistent/config.json") == 1
        err = capsys.readouterr().err.strip()
        payload = json.loads(err)
        assert payload["error"] == "usage"

    def test_unknown_command_is_usage_error(self, capsys):
        assert run_cli("frobnicate") == 1
        assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"

    def test_missing_input_path_is_usage_error(self, workspace, capsys):
        tmp, config_path, config = workspace
        config["paths"]["train_data"] = str(tmp / "missing.jsonl")
        config_path.write_text(json.dumps(config), encoding="utf-8")
        assert run_cli("build-vocab", "--config", str(config_path)) == 1
        assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"

    def test_malformed_dataset_is_data_error(self, workspace, capsys):
        tmp, config_path, config = workspace
        (tmp / "train.jsonl").write_text('{"text": "x", "label": "Positive"}\n', encoding="utf-8")
        assert run_cli("build-vocab", "--config", str(config_path)) == 2
        payload = json.loads(capsys.readouterr().err.strip())
        assert payload["error"] == "data"
        assert "line 1" in payload["message"]

    def test_corrupt_checkpoint_is_data_error(self, workspace, capsys):
        tmp, config_path, _ = workspace
        (tmp / "model.ckpt").write_bytes(b"garbage")
        assert run_cli("evaluate", "--config", str(config_path)) == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "data"

    def test_internal_error_maps_to_3(self, workspace, capsys, monkeypatch):
        from sentibert.errors import ContractError

        tmp, config_path, _ = workspace
        (tmp / "model.ckpt").write_bytes(b"ignored")

        def boom(path):
            raise ContractError("invariant breached")

        monkeypatch.setattr("sentibert.cli.load_checkpoint", boom)
        assert run_cli("evaluate", "--config", str(config_path)) == 3
        assert json.loads(capsys.readouterr().err.strip())["error"] == "internal"

    def test_rebalance_rejects_class_weights(self, workspace, capsys):
        _, config_path, _ = workspace
        assert run_cli("rebalance", "--config", str(config_path), "--balance", "class_weights") == 1
        assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"

    def test_single_class_training_is_data_error(self, workspace, capsys):
        tmp, config_path, config = workspace
        write_jsonl(generate_dataset((8, 0, 0), seed=1), str(tmp / "train.jsonl"))
        assert run_cli("build-vocab", "--config", str(config_path)) == 0
        assert run_cli("train", "--config", str(config_path)) == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "data"


def test_console_entry_point(workspace):
    _, config_path, _ = workspace
    proc = subprocess.run(
        [sys.executable, "-m", "sentibert", "build-vocab", "--config", str(config_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout.strip())["command"] == "build-vocab"
