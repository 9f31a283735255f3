from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from quillmark_finetune.harness import FinetuneConfig, finetune, generate_predictions
from quillmark_finetune.pairs import read_pairs

from conftest import run_toolkit

TOY_CONFIG = dict(model_size="tiny", learning_rate=5e-3, epochs=10, seed=11)


@pytest.fixture(scope="module")
def toy_model(toolkit_workdir, toy_pairs, tmp_path_factory) -> tuple[Path, dict]:
    out_dir = tmp_path_factory.mktemp("toy_model")
    log = finetune(toy_pairs, toolkit_workdir / "work" / "pairs_val.jsonl", FinetuneConfig(**TOY_CONFIG), out_dir)
    return out_dir, log


class TestFinetune:
    def test_loss_decreases(self, toy_model):
        _, log = toy_model
        assert log["final_train_loss"] < log["initial_train_loss"]
        assert len(log["epochs"]) == 10
        assert all("val_loss" in e for e in log["epochs"])

    def test_overfit_generations_parse_to_gold(self, toy_model, toolkit_workdir, toy_pairs):
        out_dir, _ = toy_model
        preds_csv = toolkit_workdir / "toy_train_preds.csv"
        n = generate_predictions(
            out_dir, toy_pairs, toolkit_workdir / "work" / "split.csv", preds_csv, model_tag="toy"
        )
        assert n == 50
        with open(preds_csv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        hits = sum(1 for r in rows if r["predicted_author"] == r["gold_author"])
        assert hits / len(rows) >= 0.8, f"only {hits}/50 generations parse to the gold author"

    def test_rerun_is_deterministic(self, toolkit_workdir, toy_pairs, tmp_path):
        log1 = finetune(toy_pairs, None, FinetuneConfig(**TOY_CONFIG), tmp_path / "m1")
        log2 = finetune(toy_pairs, None, FinetuneConfig(**TOY_CONFIG), tmp_path / "m2")
        assert log1["epochs"] == log2["epochs"]
        assert log1["initial_train_loss"] == log2["initial_train_loss"]

    def test_empty_pair_file_is_error_and_leaves_no_artifact(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        out_dir = tmp_path / "model"
        with pytest.raises(ValueError, match="empty"):
            finetune(empty, None, FinetuneConfig(**TOY_CONFIG), out_dir)
        assert not (out_dir / "model.pt").exists()

    def test_malformed_line_reports_lineno(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"sample_id": "a", "input": "x", "output": "y", "style": "masked_span"}\n{broken\n')
        with pytest.raises(ValueError, match=":2:"):
            read_pairs(bad)

    def test_default_config_matches_protocol(self):
        cfg = FinetuneConfig()
        assert cfg.learning_rate == 2e-5
        assert cfg.weight_decay == 0.01
        assert cfg.epochs == 10
        assert cfg.batch_size == 16  # tiny default mirrors the smallest-size setting
        assert FinetuneConfig(model_size="small").batch_size == 8
        assert FinetuneConfig(model_size="base").batch_size == 4


class TestPredictionContract:
    def test_csv_header_is_exact(self, toy_model, toolkit_workdir, toy_pairs):
        out_dir, _ = toy_model
        preds_csv = toolkit_workdir / "header_check.csv"
        generate_predictions(out_dir, toy_pairs, toolkit_workdir / "work" / "split.csv", preds_csv)
        header = preds_csv.read_text().splitlines()[0]
        assert header == "sample_id,play_id,gold_author,predicted_author,partition,word_count,model_tag"

    def test_evaluate_accepts_generated_csv(self, toy_model, toolkit_workdir):
        out_dir, _ = toy_model
        preds_csv = toolkit_workdir / "test_in_preds.csv"
        n = generate_predictions(
            out_dir,
            toolkit_workdir / "work" / "pairs_test_in.jsonl",
            toolkit_workdir / "work" / "split.csv",
            preds_csv,
            model_tag="finetune_tiny",
        )
        assert n == 60  # 10 per included play, 6 included plays
        proc = run_toolkit("evaluate", "--config", str(toolkit_workdir / "config.json"), "--predictions", str(preds_csv))
        assert proc.returncode == 0, proc.stderr
        report = toolkit_workdir / "work" / "reports" / "accuracy_finetune_tiny.json"
        assert report.exists()
        doc = json.loads(report.read_text())
        assert doc["partitions"]["in"]["n"] == n

    def test_unknown_sample_id_in_inputs_is_error(self, toy_model, toolkit_workdir, tmp_path):
        out_dir, _ = toy_model
        rogue = tmp_path / "rogue.jsonl"
        rogue.write_text(
            json.dumps({"sample_id": "nope", "input": "AUTHOR: <extra_id_0> | x y z", "style": "masked_span"}) + "\n"
        )
        with pytest.raises(KeyError, match="nope"):
            generate_predictions(out_dir, rogue, toolkit_workdir / "work" / "split.csv", tmp_path / "out.csv")
