"""Deterministic train/val/test split construction with per-author holdouts.

All randomness flows through PCG64 generators derived from the configured
64-bit seed plus a string key (author or play id) hashed with SHA-256, so
splits are bit-for-bit reproducible across platforms and independent of
manifest ordering.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import PlayRecord, Sample


def keyed_rng(seed: int, *keys: str) -> np.random.Generator:
    """PCG64 generator for (seed, keys); the same inputs give the same stream."""
    digest = hashlib.sha256("\x1f".join(keys).encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *words])))


@dataclass
class SplitConfig:
    train_per_play: int = 235
    val_per_play: int = 15
    test_in_per_play: int = 50
    test_out_per_play: int = 200
    disputed_per_play: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        counts = (
            self.train_per_play,
            self.val_per_play,
            self.test_in_per_play,
            self.test_out_per_play,
            self.disputed_per_play,
        )
        if any(c < 1 for c in counts):
            raise ValueError("all per-play sample counts must be >= 1")

    @property
    def included_total(self) -> int:
        return self.train_per_play + self.val_per_play + self.test_in_per_play


@dataclass
class DatasetSplit:
    holdout: dict[str, str]
    train: list[str] = field(default_factory=list)
    val: list[str] = field(default_factory=list)
    test_in: list[str] = field(default_factory=list)
    test_out: list[str] = field(default_factory=list)
    disputed: list[str] = field(default_factory=list)
    seed: int = 0

    def partitions(self) -> dict[str, list[str]]:
        return {
            "train": self.train,
            "val": self.val,
            "test_in": self.test_in,
            "test_out": self.test_out,
            "disputed": self.disputed,
        }

    def partition_of(self) -> dict[str, str]:
        """sample_id -> partition name."""
        out: dict[str, str] = {}
        for name, ids in self.partitions().items():
            for sid in ids:
                out[sid] = name
        return out


def _draw(sorted_ids: list[str], counts: list[int], rng: np.random.Generator) -> list[list[str]]:
    perm = rng.permutation(len(sorted_ids))
    slices: list[list[str]] = []
    start = 0
    for c in counts:
        slices.append(sorted([sorted_ids[i] for i in perm[start : start + c]]))
        start += c
    return slices


def build_splits(plays: list[PlayRecord], samples: list[Sample], cfg: SplitConfig) -> DatasetSplit:
    """Build the per-author-holdout split from a filtered primary corpus.

    One play per author is withheld uniformly at random; every other play
    contributes exactly train/val/test_in samples and every withheld play
    exactly test_out samples, all drawn without replacement from its
    lexicographically sorted sample ids.
    """
    by_play: dict[str, list[str]] = {}
    for s in samples:
        by_play.setdefault(s.play_id, []).append(s.sample_id)
    for ids in by_play.values():
        ids.sort()

    by_author: dict[str, list[str]] = {}
    for play in sorted(plays, key=lambda p: p.play_id):
        by_author.setdefault(play.author, []).append(play.play_id)

    split = DatasetSplit(holdout={}, seed=cfg.seed)
    for author in sorted(by_author):
        play_ids = by_author[author]
        rng = keyed_rng(cfg.seed, "holdout", author)
        split.holdout[author] = play_ids[int(rng.integers(len(play_ids)))]

    held_out = set(split.holdout.values())
    for author in sorted(by_author):
        for play_id in by_author[author]:
            ids = by_play.get(play_id, [])
            rng = keyed_rng(cfg.seed, "draw", play_id)
            if play_id in held_out:
                if len(ids) < cfg.test_out_per_play:
                    raise ValueError(
                        f"play {play_id!r} has {len(ids)} samples, needs {cfg.test_out_per_play} for test_out"
                    )
                (out,) = _draw(ids, [cfg.test_out_per_play], rng)
                split.test_out.extend(out)
            else:
                if len(ids) < cfg.included_total:
                    raise ValueError(
                        f"play {play_id!r} has {len(ids)} samples, needs {cfg.included_total} for train/val/test_in"
                    )
                tr, va, te = _draw(ids, [cfg.train_per_play, cfg.val_per_play, cfg.test_in_per_play], rng)
                split.train.extend(tr)
                split.val.extend(va)
                split.test_in.extend(te)
    return split


def build_disputed_set(plays: list[PlayRecord], samples: list[Sample], cfg: SplitConfig) -> list[str]:
    """Draw exactly ``disputed_per_play`` sample ids from each disputed play."""
    by_play: dict[str, list[str]] = {}
    for s in samples:
        by_play.setdefault(s.play_id, []).append(s.sample_id)

    chosen: list[str] = []
    for play in sorted(plays, key=lambda p: p.play_id):
        ids = sorted(by_play.get(play.play_id, []))
        if len(ids) < cfg.disputed_per_play:
            raise ValueError(
                f"play {play.play_id!r} has {len(ids)} samples, needs {cfg.disputed_per_play} for the disputed set"
            )
        rng = keyed_rng(cfg.seed, "disputed", play.play_id)
        (ids_drawn,) = _draw(ids, [cfg.disputed_per_play], rng)
        chosen.extend(ids_drawn)
    return chosen
