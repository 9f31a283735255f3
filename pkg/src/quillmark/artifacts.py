"""Artifact persistence: atomic writes, config hashing, JSON codecs.

Every JSON artifact embeds the resolved config's SHA-256 hash and the seed it
was produced under; CSV artifacts carry the same metadata in a ``.meta.json``
sidecar so their byte format stays a plain, contract-exact table. Writes go
through a temp file and ``os.replace`` so a failed run never leaves a partial
artifact in place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .attribution import AuthorProfile, LinearModel, TrainConfig
from .corpus import PlayRecord, Sample, Utterance
from .features import FeatureTransform, Vocabulary
from .sampling import DatasetSplit


def config_hash(config_doc: dict) -> str:
    canonical = json.dumps(config_doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_artifact(path: Path, payload: dict, *, cfg_hash: str, seed: int) -> None:
    doc = {"config_hash": cfg_hash, "seed": seed}
    doc.update(payload)
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def read_json_artifact(path: Path, stage: str) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing artifact {path} (produce it with the '{stage}' subcommand)")
    return json.loads(path.read_text("utf-8"))


# -- corpus ------------------------------------------------------------------

def corpus_payload(
    plays: list[PlayRecord],
    samples_by_play: dict[str, list[Sample]],
    primary_ids: list[str],
    disputed_ids: list[str],
    rejected: list[tuple[str, str]],
    authorship: dict[str, str],
) -> dict:
    kept = set(primary_ids) | set(disputed_ids)
    return {
        "plays": [
            {
                "play_id": p.play_id,
                "title": p.title,
                "author": p.author,
                "source": p.source,
                "century": p.century,
                "authorship_status": authorship[p.play_id],
                "raw_text": p.raw_text,
                "utterances": [
                    {"speaker": u.speaker, "text": u.text, "word_count": u.word_count} for u in p.utterances
                ],
            }
            for p in plays
            if p.play_id in kept
        ],
        "samples": [
            {
                "sample_id": s.sample_id,
                "play_id": s.play_id,
                "author": s.author,
                "text": s.text,
                "word_count": s.word_count,
            }
            for pid in sorted(kept)
            for s in samples_by_play.get(pid, [])
        ],
        "primary_play_ids": sorted(primary_ids),
        "disputed_play_ids": sorted(disputed_ids),
        "rejected": sorted(rejected),
    }


class CorpusStore:
    """In-memory view of a persisted corpus artifact."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.plays = [
            PlayRecord(
                play_id=p["play_id"],
                title=p["title"],
                author=p["author"],
                source=p["source"],
                raw_text=p.get("raw_text", ""),
                utterances=[Utterance(u["speaker"], u["text"], u["word_count"]) for u in p["utterances"]],
                century=p.get("century"),
            )
            for p in doc["plays"]
        ]
        self.samples = [
            Sample(s["sample_id"], s["play_id"], s["author"], s["text"], s["word_count"]) for s in doc["samples"]
        ]
        self.sample_index = {s.sample_id: s for s in self.samples}
        self.play_index = {p.play_id: p for p in self.plays}
        self.primary_ids: list[str] = doc["primary_play_ids"]
        self.disputed_ids: list[str] = doc["disputed_play_ids"]

    @property
    def primary_plays(self) -> list[PlayRecord]:
        return [self.play_index[pid] for pid in self.primary_ids]

    @property
    def disputed_plays(self) -> list[PlayRecord]:
        return [self.play_index[pid] for pid in self.disputed_ids]

    def samples_of(self, play_ids: list[str]) -> list[Sample]:
        wanted = set(play_ids)
        return [s for s in self.samples if s.play_id in wanted]

    def resolve(self, sample_ids: list[str]) -> list[Sample]:
        return [self.sample_index[sid] for sid in sample_ids]


# -- splits ------------------------------------------------------------------

def split_payload(split: DatasetSplit) -> dict:
    return {
        "holdout": split.holdout,
        "train": split.train,
        "val": split.val,
        "test_in": split.test_in,
        "test_out": split.test_out,
        "disputed": split.disputed,
        "split_seed": split.seed,
    }


def split_from_doc(doc: dict) -> DatasetSplit:
    return DatasetSplit(
        holdout=doc["holdout"],
        train=doc["train"],
        val=doc["val"],
        test_in=doc["test_in"],
        test_out=doc["test_out"],
        disputed=doc["disputed"],
        seed=doc["split_seed"],
    )


# -- fitted transforms and models ---------------------------------------------

def _vocabulary_payload(vocab: Vocabulary) -> dict:
    return {"terms": vocab.terms, "ngram_sizes": sorted(vocab.ngram_sizes), "size_limit": vocab.size_limit}


def _vocabulary_from(doc: dict) -> Vocabulary:
    return Vocabulary(terms=doc["terms"], ngram_sizes=frozenset(doc["ngram_sizes"]), size_limit=doc["size_limit"])


def transform_payload(xf: FeatureTransform) -> dict:
    payload: dict = {"kind": xf.kind, "vocabulary": _vocabulary_payload(xf.vocabulary)}
    if xf.idf is not None:
        payload["idf"] = xf.idf.tolist()
    if xf.mu is not None:
        payload["mu"] = xf.mu.tolist()
        payload["sigma"] = xf.sigma.tolist()
        payload["constant_terms"] = xf.constant_terms
    return payload


def transform_from(doc: dict) -> FeatureTransform:
    return FeatureTransform(
        kind=doc["kind"],
        vocabulary=_vocabulary_from(doc["vocabulary"]),
        idf=np.array(doc["idf"]) if "idf" in doc else None,
        mu=np.array(doc["mu"]) if "mu" in doc else None,
        sigma=np.array(doc["sigma"]) if "sigma" in doc else None,
        constant_terms=doc.get("constant_terms", []),
    )


def cosine_model_payload(tag: str, xf: FeatureTransform, profiles: list[AuthorProfile]) -> dict:
    return {
        "tag": tag,
        "kind": "cosine_delta",
        "transform": transform_payload(xf),
        "profiles": {p.author: p.centroid.tolist() for p in profiles},
    }


def linear_model_payload(tag: str, features: str, xf: FeatureTransform, model: LinearModel) -> dict:
    return {
        "tag": tag,
        "kind": model.kind,
        "features": features,
        "transform": transform_payload(xf),
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "classes": model.classes,
        "hyper": {
            "learning_rate": model.hyper.learning_rate,
            "l2_strength": model.hyper.l2_strength,
            "epochs": model.hyper.epochs,
            "batch_size": model.hyper.batch_size,
            "seed": model.hyper.seed,
        },
        "loss_history": model.loss_history,
    }


def model_from(doc: dict) -> tuple[str, FeatureTransform, object]:
    """Returns (kind, transform, profiles-or-LinearModel)."""
    xf = transform_from(doc["transform"])
    if doc["kind"] == "cosine_delta":
        profiles = [AuthorProfile(a, np.array(c)) for a, c in sorted(doc["profiles"].items())]
        return "cosine_delta", xf, profiles
    hyper = TrainConfig(**doc["hyper"])
    model = LinearModel(
        kind=doc["kind"],
        weights=np.array(doc["weights"]),
        bias=np.array(doc["bias"]),
        classes=doc["classes"],
        hyper=hyper,
        loss_history=doc["loss_history"],
    )
    return doc["kind"], xf, model
