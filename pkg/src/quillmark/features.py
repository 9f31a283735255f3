"""Most-frequent-word vocabularies and count / TF-IDF / z-score transforms.

All statistics are fit on training samples only. Tokens are whitespace-split
words of the already-normalized sample text; n-grams are space-joined token
windows. Relative (per-document) frequencies feed the z-score transform.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import Sample

KINDS = ("counts", "tfidf", "zscore")


def ngrams(tokens: list[str], sizes: frozenset[int]) -> list[str]:
    grams: list[str] = []
    for n in sorted(sizes):
        if n == 1:
            grams.extend(tokens)
        else:
            grams.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return grams


@dataclass
class Vocabulary:
    terms: list[str]
    ngram_sizes: frozenset[int] = frozenset({1})
    size_limit: int = 5000

    def __post_init__(self) -> None:
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)


def build_vocabulary(
    train_samples: list[Sample], size_limit: int | None = 5000, ngram_sizes: frozenset[int] = frozenset({1})
) -> Vocabulary:
    """The ``size_limit`` most frequent n-grams over the training samples.

    Ranking is by descending total frequency, ties broken lexicographically.
    ``size_limit=None`` keeps the full training vocabulary.
    """
    if size_limit is not None and size_limit < 1:
        raise ValueError(f"size_limit must be >= 1, got {size_limit}")
    if not train_samples:
        raise ValueError("cannot build a vocabulary from an empty training set")
    counts: Counter[str] = Counter()
    for s in train_samples:
        counts.update(ngrams(s.text.split(), ngram_sizes))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if size_limit is None:
        size_limit = len(ranked)
    return Vocabulary(terms=[t for t, _ in ranked[:size_limit]], ngram_sizes=ngram_sizes, size_limit=size_limit)


@dataclass
class FeatureTransform:
    kind: str
    vocabulary: Vocabulary
    idf: np.ndarray | None = None
    mu: np.ndarray | None = None
    sigma: np.ndarray | None = None
    constant_terms: list[str] = field(default_factory=list)


def _term_counts(sample: Sample, vocab: Vocabulary) -> np.ndarray:
    counts = np.zeros(len(vocab))
    for gram in ngrams(sample.text.split(), vocab.ngram_sizes):
        idx = vocab.index.get(gram)
        if idx is not None:
            counts[idx] += 1.0
    return counts


def _relative_frequencies(sample: Sample, vocab: Vocabulary) -> np.ndarray:
    counts = _term_counts(sample, vocab)
    return counts / sample.word_count if sample.word_count else counts


def fit_feature_transform(kind: str, train_samples: list[Sample], vocabulary: Vocabulary) -> FeatureTransform:
    """Fit a transform's statistics on the training set.

    tfidf uses the smoothed variant idf_t = ln((1+N)/(1+df_t)) + 1. zscore
    standardizes per-document relative frequencies with the population sigma;
    constant terms (sigma = 0) are recorded and later map to z = 0.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown transform kind {kind!r}")
    if not train_samples:
        raise ValueError("cannot fit a transform on an empty training set")
    if kind == "counts":
        return FeatureTransform(kind=kind, vocabulary=vocabulary)
    if kind == "tfidf":
        df = np.zeros(len(vocabulary))
        for s in train_samples:
            df += _term_counts(s, vocabulary) > 0
        idf = np.log((1.0 + len(train_samples)) / (1.0 + df)) + 1.0
        return FeatureTransform(kind=kind, vocabulary=vocabulary, idf=idf)
    freqs = np.vstack([_relative_frequencies(s, vocabulary) for s in train_samples])
    mu = freqs.mean(axis=0)
    sigma = freqs.std(axis=0)
    constant = [vocabulary.terms[i] for i in np.flatnonzero(sigma == 0.0)]
    return FeatureTransform(kind="zscore", vocabulary=vocabulary, mu=mu, sigma=sigma, constant_terms=constant)


def apply_feature_transform(xf: FeatureTransform, sample: Sample) -> np.ndarray:
    """Dense feature vector in vocabulary order; out-of-vocabulary tokens are ignored."""
    if xf.kind == "counts":
        return _term_counts(sample, xf.vocabulary)
    if xf.kind == "tfidf":
        return _term_counts(sample, xf.vocabulary) * xf.idf
    f = _relative_frequencies(sample, xf.vocabulary)
    safe_sigma = np.where(xf.sigma == 0.0, 1.0, xf.sigma)
    z = (f - xf.mu) / safe_sigma
    return np.where(xf.sigma == 0.0, 0.0, z)


def transform_matrix(xf: FeatureTransform, samples: list[Sample]) -> np.ndarray:
    return np.vstack([apply_feature_transform(xf, s) for s in samples])
