from __future__ import annotations

import json
from pathlib import Path

import pytest

from quillmark.cli import main

from cli_fixture import build_fixture

GOLDEN_DIR = Path(__file__).parent / "data" / "goldens"
GOLDEN_FILES = [
    "split.csv",
    "reports/accuracy_cosine_delta.json",
    "reports/accuracy_logistic_counts.json",
    "reports/confusion_cosine_delta.csv",
    "reports/scapegoat_svm_tfidf.json",
    "reports/uniqueness.csv",
    "reports/trials.json",
    "reports/timeline_cosine_delta.csv",
]

PIPELINE = ["ingest", "split", "pairs", "train", "attribute", "evaluate", "uniqueness", "trials", "timeline"]


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("cli_fixture")
    config = build_fixture(root)
    for command in PIPELINE:
        assert main([command, "--config", str(config)]) == 0, f"stage {command} failed"
    return root


class TestPipeline:
    def test_corpus_filtering(self, pipeline_dir):
        doc = json.loads((pipeline_dir / "work" / "corpus.json").read_text())
        assert len(doc["primary_play_ids"]) == 15
        assert doc["disputed_play_ids"] == ["dispute"]
        assert doc["rejected"] == [["fragment", "below-min-utterances"]]

    def test_split_counts(self, pipeline_dir):
        doc = json.loads((pipeline_dir / "work" / "split.json").read_text())
        assert len(doc["holdout"]) == 4
        assert len(doc["train"]) == 60 * 11
        assert len(doc["val"]) == 10 * 11
        assert len(doc["test_in"]) == 10 * 11
        assert len(doc["test_out"]) == 30 * 4
        assert len(doc["disputed"]) == 30

    def test_pairs_files(self, pipeline_dir):
        lines = (pipeline_dir / "work" / "pairs_train.jsonl").read_text().splitlines()
        assert len(lines) == 660
        first = json.loads(lines[0])
        assert first["input"].startswith("AUTHOR: <extra_id_0> | ")
        assert first["output"].startswith("AUTHOR: Author ")

    def test_predictions_exist_for_all_models(self, pipeline_dir):
        pred_dir = pipeline_dir / "work" / "predictions"
        tags = {p.stem for p in pred_dir.glob("*.csv")}
        assert {"cosine_delta", "cosine_delta_long", "logistic_counts", "svm_tfidf", "random",
                "most_frequent_author", "timeline_cosine_delta"} <= tags

    def test_models_learn_the_fixture(self, pipeline_dir):
        doc = json.loads((pipeline_dir / "work" / "reports" / "accuracy_cosine_delta.json").read_text())
        assert doc["partitions"]["all"]["accuracy"] > 0.9
        doc = json.loads((pipeline_dir / "work" / "reports" / "accuracy_logistic_counts.json").read_text())
        assert doc["partitions"]["all"]["accuracy"] > 0.9

    def test_long_text_mode_at_least_as_good(self, pipeline_dir):
        short = json.loads((pipeline_dir / "work" / "reports" / "accuracy_cosine_delta.json").read_text())
        merged = json.loads((pipeline_dir / "work" / "reports" / "accuracy_cosine_delta_long.json").read_text())
        assert merged["partitions"]["all"]["accuracy"] >= short["partitions"]["all"]["accuracy"]

    def test_artifacts_embed_hash_and_seed(self, pipeline_dir):
        for rel in ("corpus.json", "split.json", "reports/trials.json"):
            doc = json.loads((pipeline_dir / "work" / rel).read_text())
            assert doc["seed"] == 1234
            assert len(doc["config_hash"]) == 16

    def test_timeline_report_centuries(self, pipeline_dir):
        doc = json.loads((pipeline_dir / "work" / "reports" / "timeline_cosine_delta.json").read_text())
        assert set(doc["per_century"]) == {"1500", "1700", "1900"}

    def test_evaluate_after_timeline_skips_timeline_csv(self, pipeline_dir, capsys):
        # the timeline predictions CSV sits in the predictions dir but belongs
        # to a different corpus; evaluate must not trip over it
        assert main(["evaluate", "--config", str(pipeline_dir / "config.json")]) == 0
        assert "skipping timeline predictions" in capsys.readouterr().out

    def test_golden_artifacts(self, pipeline_dir):
        assert GOLDEN_DIR.exists(), "golden files not committed"
        for rel in GOLDEN_FILES:
            produced = (pipeline_dir / "work" / rel).read_text()
            expected = (GOLDEN_DIR / rel).read_text()
            assert produced == expected, f"golden mismatch for {rel}"


class TestDeterminismAndRestart:
    def test_split_rerun_is_byte_identical(self, tmp_path):
        config = build_fixture(tmp_path)
        assert main(["ingest", "--config", str(config)]) == 0
        assert main(["split", "--config", str(config)]) == 0
        first = (tmp_path / "work" / "split.json").read_bytes()
        first_csv = (tmp_path / "work" / "split.csv").read_bytes()
        assert main(["split", "--config", str(config)]) == 0
        assert (tmp_path / "work" / "split.json").read_bytes() == first
        assert (tmp_path / "work" / "split.csv").read_bytes() == first_csv

    def test_restart_regenerates_deleted_artifact(self, tmp_path):
        config = build_fixture(tmp_path)
        assert main(["ingest", "--config", str(config)]) == 0
        assert main(["split", "--config", str(config)]) == 0
        corpus_bytes = (tmp_path / "work" / "corpus.json").read_bytes()
        (tmp_path / "work" / "split.json").unlink()
        assert main(["split", "--config", str(config)]) == 0
        assert (tmp_path / "work" / "corpus.json").read_bytes() == corpus_bytes
        assert (tmp_path / "work" / "split.json").exists()

    def test_seed_override_changes_split(self, tmp_path):
        config = build_fixture(tmp_path)
        assert main(["ingest", "--config", str(config)]) == 0
        assert main(["split", "--config", str(config)]) == 0
        base = (tmp_path / "work" / "split.csv").read_bytes()
        assert main(["split", "--config", str(config), "--seed", "99"]) == 0
        assert (tmp_path / "work" / "split.csv").read_bytes() != base


class TestErrorHandling:
    def test_missing_artifact_names_stage(self, tmp_path, capsys):
        config = build_fixture(tmp_path)
        assert main(["split", "--config", str(config)]) == 1
        err = capsys.readouterr().err
        assert "corpus.json" in err and "ingest" in err

    def test_evaluate_unknown_sample_id_fails_naming_it(self, tmp_path, capsys):
        config = build_fixture(tmp_path)
        for command in ("ingest", "split"):
            assert main([command, "--config", str(config)]) == 0
        bad = tmp_path / "external.csv"
        bad.write_text(
            "sample_id,play_id,gold_author,predicted_author,partition,word_count,model_tag\n"
            "bogus-id,play0000,Author A,Author B,in,12,external\n"
        )
        assert main(["evaluate", "--config", str(config), "--predictions", str(bad)]) == 1
        assert "bogus-id" in capsys.readouterr().err

    def test_attribute_validates_external_partition(self, tmp_path, capsys):
        config = build_fixture(tmp_path)
        for command in ("ingest", "split"):
            assert main([command, "--config", str(config)]) == 0
        split = json.loads((tmp_path / "work" / "split.json").read_text())
        sid = split["test_in"][0]
        external = tmp_path / "external.csv"
        external.write_text(
            "sample_id,play_id,gold_author,predicted_author,partition,word_count,model_tag\n"
            f"{sid},play0000,Author A,Author B,out,12,external\n"
        )
        assert main(["attribute", "--config", str(config), "--predictions", str(external)]) == 1
        assert sid in capsys.readouterr().err

    def test_external_predictions_round_trip(self, tmp_path):
        config = build_fixture(tmp_path)
        for command in ("ingest", "split"):
            assert main([command, "--config", str(config)]) == 0
        corpus = json.loads((tmp_path / "work" / "corpus.json").read_text())
        author_of = {s["sample_id"]: s["author"] for s in corpus["samples"]}
        play_of = {s["sample_id"]: s["play_id"] for s in corpus["samples"]}
        wc_of = {s["sample_id"]: s["word_count"] for s in corpus["samples"]}
        split = json.loads((tmp_path / "work" / "split.json").read_text())
        rows = ["sample_id,play_id,gold_author,predicted_author,partition,word_count,model_tag"]
        for sid in split["test_in"]:
            rows.append(f"{sid},{play_of[sid]},{author_of[sid]},{author_of[sid]},in,{wc_of[sid]},oracle_model")
        external = tmp_path / "oracle.csv"
        external.write_text("\n".join(rows) + "\n")
        assert main(["attribute", "--config", str(config), "--predictions", str(external)]) == 0
        assert main(["evaluate", "--config", str(config)]) == 0
        report = json.loads((tmp_path / "work" / "reports" / "accuracy_oracle_model.json").read_text())
        assert report["partitions"]["all"]["accuracy"] == 1.0
