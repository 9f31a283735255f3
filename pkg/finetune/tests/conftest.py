"""Fixtures for the harness tests.

The corpus here is built with the standard library only and driven through
the toolkit's CLI as a subprocess, so these tests exercise exactly the
external interfaces the harness consumes in production: manifest -> pairs
files + split CSV in, prediction CSV out.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

AUTHORS = ["Anne Archer", "Brom Bones", "Cato Crisp"]
SHARED = [f"word{i:02d}" for i in range(25)]
MARKERS = [[f"au{a}tok{j:02d}" for j in range(10)] for a in range(len(AUTHORS))]


def _utterance(rng: random.Random, author_idx: int, n_words: int = 12) -> str:
    words = []
    for _ in range(n_words):
        if rng.random() < 0.5:
            words.append(rng.choice(MARKERS[author_idx]))
        else:
            words.append(rng.choice(SHARED))
    return " ".join(words)


def write_corpus(root: Path) -> Path:
    """Manifest + plays + primary-CLI config; returns the config path."""
    rng = random.Random(20240901)
    plays_dir = root / "plays"
    plays_dir.mkdir(parents=True)
    entries = []
    for a, author in enumerate(AUTHORS):
        for p in range(3):
            pid = f"t{a}{p}"
            blocks = [_utterance(rng, a) for _ in range(60)]
            (plays_dir / f"{pid}.txt").write_text("\n\n".join(blocks) + "\n", encoding="utf-8")
            entries.append(
                {
                    "play_id": pid,
                    "title": pid,
                    "author": author,
                    "source": "toy",
                    "path": f"plays/{pid}.txt",
                    "authorship_status": "single-author",
                }
            )
    (root / "manifest.json").write_text(json.dumps({"plays": entries}), encoding="utf-8")
    config = {
        "manifest": "manifest.json",
        "workdir": "work",
        "seed": 77,
        "filter": {"min_utterances_per_play": 50, "min_plays_per_author": 3},
        "split": {
            "train_per_play": 20,
            "val_per_play": 5,
            "test_in_per_play": 10,
            "test_out_per_play": 15,
            "disputed_per_play": 1,
        },
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    return config_path


def run_toolkit(*argv: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "quillmark.cli", *argv], capture_output=True, text=True
    )


@pytest.fixture(scope="session")
def toolkit_workdir(tmp_path_factory) -> Path:
    """Corpus ingested and split by the toolkit CLI; pairs files emitted."""
    root = tmp_path_factory.mktemp("toy_corpus")
    config = write_corpus(root)
    for command in ("ingest", "split", "pairs"):
        proc = run_toolkit(command, "--config", str(config))
        assert proc.returncode == 0, f"{command} failed: {proc.stderr}"
    return root


@pytest.fixture(scope="session")
def toy_pairs(toolkit_workdir: Path) -> Path:
    """The 50-pair training file for the overfit run."""
    lines = (toolkit_workdir / "work" / "pairs_train.jsonl").read_text().splitlines()[:50]
    path = toolkit_workdir / "toy_pairs.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
