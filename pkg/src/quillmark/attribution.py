"""Attribution models: cosine delta, logistic regression, linear SVM, baselines.

Cosine delta compares a sample's z-score vector to per-author centroids of
training z-vectors and ranks authors by cosine similarity. The linear models
are trained with seeded mini-batch SGD (multinomial cross-entropy for
logistic, one-vs-rest hinge for SVM), both with an L2 penalty of
0.5 * l2_strength * ||W||^2 on the weights (biases unpenalized). Ties are
broken lexicographically by author name everywhere and flagged where the
caller can act on them.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import PlayRecord, Sample
from .features import FeatureTransform, apply_feature_transform, transform_matrix
from .sampling import DatasetSplit, keyed_rng

PARTITIONS = ("in", "out", "disputed", "timeline")
PREDICTIONS_HEADER = ["sample_id", "play_id", "gold_author", "predicted_author", "partition", "word_count", "model_tag"]

FLAG_ZERO_NORM = "zero-norm-sample"
FLAG_TIE = "tie"


@dataclass
class AuthorProfile:
    author: str
    centroid: np.ndarray


@dataclass
class RankedAttribution:
    ranking: list[tuple[str, float]]
    flags: list[str] = field(default_factory=list)

    @property
    def top(self) -> str:
        return self.ranking[0][0]


@dataclass
class PredictionRecord:
    sample_id: str
    play_id: str
    gold_author: str
    predicted_author: str
    partition: str
    word_count: int
    model_tag: str


def fit_cosine_delta(train_samples: list[Sample], zscore_transform: FeatureTransform) -> list[AuthorProfile]:
    """One profile per author: the mean of that author's training z-vectors."""
    if zscore_transform.kind != "zscore":
        raise ValueError("cosine delta profiles require a zscore transform")
    by_author: dict[str, list[Sample]] = {}
    for s in train_samples:
        by_author.setdefault(s.author, []).append(s)
    profiles = []
    for author in sorted(by_author):
        if not by_author[author]:
            raise ValueError(f"author {author!r} has no training samples")
        z = transform_matrix(zscore_transform, by_author[author])
        profiles.append(AuthorProfile(author=author, centroid=z.mean(axis=0)))
    return profiles


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def attribute_cosine_delta(sample_z: np.ndarray, profiles: list[AuthorProfile]) -> RankedAttribution:
    """Rank every profile by cosine similarity to the sample's z-vector.

    Exact ties order lexicographically; a zero-norm sample vector gets
    similarity 0 to all authors and is flagged.
    """
    if not profiles:
        raise ValueError("no author profiles")
    dim = profiles[0].centroid.shape[0]
    if sample_z.shape != (dim,):
        raise ValueError(f"sample vector has shape {sample_z.shape}, profiles have dimension {dim}")
    flags = []
    if float(np.linalg.norm(sample_z)) == 0.0:
        flags.append(FLAG_ZERO_NORM)
    sims = [(p.author, cosine_similarity(sample_z, p.centroid)) for p in profiles]
    sims.sort(key=lambda kv: (-kv[1], kv[0]))
    if len(sims) > 1 and sims[0][1] == sims[1][1]:
        flags.append(FLAG_TIE)
    return RankedAttribution(ranking=sims, flags=flags)


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    l2_strength: float = 1e-4
    epochs: int = 100
    batch_size: int | None = 32
    seed: int = 0


@dataclass
class LinearModel:
    kind: str
    weights: np.ndarray
    bias: np.ndarray
    classes: list[str]
    hyper: TrainConfig
    loss_history: list[float] = field(default_factory=list)


def logistic_loss_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y_idx: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    n = X.shape[0]
    scores = X @ W.T + b
    scores -= scores.max(axis=1, keepdims=True)
    exp = np.exp(scores)
    probs = exp / exp.sum(axis=1, keepdims=True)
    loss = -np.mean(np.log(probs[np.arange(n), y_idx])) + 0.5 * l2 * np.sum(W * W)
    probs[np.arange(n), y_idx] -= 1.0
    dW = probs.T @ X / n + l2 * W
    db = probs.mean(axis=0)
    return float(loss), dW, db


def hinge_loss_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y_idx: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    # One-vs-rest hinge: class losses are summed, each averaged over samples.
    n, n_classes = X.shape[0], W.shape[0]
    T = -np.ones((n, n_classes))
    T[np.arange(n), y_idx] = 1.0
    margins = X @ W.T + b
    slack = np.maximum(0.0, 1.0 - T * margins)
    loss = slack.sum() / n + 0.5 * l2 * np.sum(W * W)
    G = np.where(slack > 0.0, -T, 0.0)
    dW = G.T @ X / n + l2 * W
    db = G.mean(axis=0)
    return float(loss), dW, db


_LOSS_GRAD = {"logistic": logistic_loss_grad, "svm": hinge_loss_grad}


def train_linear(kind: str, X: np.ndarray, y: list[str], hyper: TrainConfig | None = None) -> LinearModel:
    """Train a multinomial logistic or one-vs-rest linear SVM classifier.

    Weights start at zero; mini-batches are reshuffled every epoch from a
    PCG64 stream seeded by ``hyper.seed`` (``batch_size=None`` means full
    batch). The recorded loss history holds the full-dataset loss before
    training and after every epoch.
    """
    if kind not in _LOSS_GRAD:
        raise ValueError(f"unknown linear model kind {kind!r}")
    hyper = hyper or TrainConfig()
    X = np.asarray(X, dtype=float)
    if X.shape[0] != len(y) or len(y) == 0:
        raise ValueError("X and y must be nonempty and the same length")
    if not np.all(np.isfinite(X)):
        raise ValueError("features contain non-finite values")
    classes = sorted(set(y))
    if len(classes) < 2:
        raise ValueError("training requires at least two distinct classes")
    class_index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([class_index[label] for label in y])

    n, n_features = X.shape
    W = np.zeros((len(classes), n_features))
    b = np.zeros(len(classes))
    loss_grad = _LOSS_GRAD[kind]
    rng = np.random.Generator(np.random.PCG64(hyper.seed))

    history = [loss_grad(W, b, X, y_idx, hyper.l2_strength)[0]]
    full_batch = hyper.batch_size is None or hyper.batch_size >= n
    for _ in range(hyper.epochs):
        if full_batch:
            batches = [np.arange(n)]
        else:
            perm = rng.permutation(n)
            batches = [perm[i : i + hyper.batch_size] for i in range(0, n, hyper.batch_size)]
        for batch in batches:
            _, dW, db = loss_grad(W, b, X[batch], y_idx[batch], hyper.l2_strength)
            W -= hyper.learning_rate * dW
            b -= hyper.learning_rate * db
        history.append(loss_grad(W, b, X, y_idx, hyper.l2_strength)[0])

    return LinearModel(kind=kind, weights=W, bias=b, classes=classes, hyper=hyper, loss_history=history)


def predict_linear(model: LinearModel, x: np.ndarray) -> list[tuple[str, float]]:
    """Authors ranked by descending score (logit or margin), ties lexicographic."""
    if x.shape != (model.weights.shape[1],):
        raise ValueError(f"feature vector has shape {x.shape}, model expects ({model.weights.shape[1]},)")
    scores = model.weights @ x + model.bias
    ranked = list(zip(model.classes, scores.tolist()))
    ranked.sort(key=lambda kv: (-kv[1], kv[0]))
    return ranked


SPLIT_TO_RECORD_PARTITION = {"test_in": "in", "test_out": "out", "disputed": "disputed", "timeline": "timeline"}


def training_play_counts(plays: list[PlayRecord], split: DatasetSplit) -> Counter[str]:
    held_out = set(split.holdout.values())
    return Counter(p.author for p in plays if p.play_id not in held_out)


def baseline_predict(
    kind: str,
    split: DatasetSplit,
    sample_index: dict[str, Sample],
    plays: list[PlayRecord],
    seed: int,
    partitions: tuple[str, ...] = ("test_in", "test_out"),
) -> list[PredictionRecord]:
    """Trivial baselines: seeded uniform-random author, or the author with the
    most training plays (ties lexicographic)."""
    if kind not in ("random", "most_frequent_author"):
        raise ValueError(f"unknown baseline {kind!r}")
    authors = sorted(split.holdout)
    if kind == "most_frequent_author":
        counts = training_play_counts(plays, split)
        best = max(counts.values())
        fixed = min(a for a, c in counts.items() if c == best)
    rng = keyed_rng(seed, "baseline", kind)

    records = []
    for part in partitions:
        for sid in sorted(split.partitions()[part]):
            sample = sample_index[sid]
            guess = fixed if kind == "most_frequent_author" else authors[int(rng.integers(len(authors)))]
            records.append(
                PredictionRecord(
                    sample_id=sid,
                    play_id=sample.play_id,
                    gold_author=sample.author,
                    predicted_author=guess,
                    partition=SPLIT_TO_RECORD_PARTITION[part],
                    word_count=sample.word_count,
                    model_tag=kind,
                )
            )
    return records


@dataclass
class VoteResult:
    winner: str
    share: float
    tied: bool
    n_votes: int


def majority_vote(preds: list[PredictionRecord], group_by: str = "play_id") -> dict[str, VoteResult]:
    """Modal predicted author per group; exact ties go to the lexicographically
    first author and are flagged."""
    groups: dict[str, Counter[str]] = {}
    for p in preds:
        key = getattr(p, group_by)
        groups.setdefault(key, Counter())[p.predicted_author] += 1
    results = {}
    for key, votes in groups.items():
        best = max(votes.values())
        leaders = sorted(a for a, c in votes.items() if c == best)
        total = sum(votes.values())
        results[key] = VoteResult(winner=leaders[0], share=best / total, tied=len(leaders) > 1, n_votes=total)
    return results


def merge_play_text(samples: list[Sample], partition: str) -> Sample:
    """Concatenate one play's samples (in the order given) into one document."""
    if not samples:
        raise ValueError("cannot merge an empty sample list")
    play_ids = {s.play_id for s in samples}
    if len(play_ids) != 1:
        raise ValueError(f"samples span multiple plays: {sorted(play_ids)}")
    play_id = samples[0].play_id
    return Sample(
        sample_id=f"{play_id}-merged-{partition}",
        play_id=play_id,
        author=samples[0].author,
        text=" ".join(s.text for s in samples),
        word_count=sum(s.word_count for s in samples),
    )


def predict_records_cosine(
    profiles: list[AuthorProfile],
    xf: FeatureTransform,
    samples: list[Sample],
    partition: str,
    model_tag: str,
) -> list[PredictionRecord]:
    records = []
    for s in samples:
        ranked = attribute_cosine_delta(apply_feature_transform(xf, s), profiles)
        records.append(
            PredictionRecord(
                sample_id=s.sample_id,
                play_id=s.play_id,
                gold_author=s.author,
                predicted_author=ranked.top,
                partition=partition,
                word_count=s.word_count,
                model_tag=model_tag,
            )
        )
    return records


def predict_records_linear(
    model: LinearModel,
    xf: FeatureTransform,
    samples: list[Sample],
    partition: str,
    model_tag: str,
) -> list[PredictionRecord]:
    records = []
    for s in samples:
        ranked = predict_linear(model, apply_feature_transform(xf, s))
        records.append(
            PredictionRecord(
                sample_id=s.sample_id,
                play_id=s.play_id,
                gold_author=s.author,
                predicted_author=ranked[0][0],
                partition=partition,
                word_count=s.word_count,
                model_tag=model_tag,
            )
        )
    return records


def write_predictions_csv(path: Path, records: list[PredictionRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTIONS_HEADER)
        for r in records:
            writer.writerow(
                [r.sample_id, r.play_id, r.gold_author, r.predicted_author, r.partition, r.word_count, r.model_tag]
            )


def read_predictions_csv(path: Path) -> list[PredictionRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PREDICTIONS_HEADER:
            raise ValueError(f"bad predictions header {header!r}, expected {PREDICTIONS_HEADER!r}")
        records = []
        for row in reader:
            if len(row) != len(PREDICTIONS_HEADER):
                raise ValueError(f"bad predictions row: {row!r}")
            records.append(
                PredictionRecord(
                    sample_id=row[0],
                    play_id=row[1],
                    gold_author=row[2],
                    predicted_author=row[3],
                    partition=row[4],
                    word_count=int(row[5]),
                    model_tag=row[6],
                )
            )
    return records
