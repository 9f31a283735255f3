"""Diagnostics over prediction records: accuracy, confusion, scapegoating,
attribution shares, the common-word uniqueness metric with randomized
validation, correlations, and timeline aggregation.

Percentages are computed as 100 * count / total (multiply first) so that
exactly divisible fixtures produce exact values. Confidence intervals are
Wald halfwidths, 1.96 * sqrt(p * (1 - p) / n).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats as _scipy_stats

from .attribution import PredictionRecord, VoteResult, majority_vote
from .corpus import Sample
from .sampling import DatasetSplit, keyed_rng

UNRECOGNIZED_COLUMN = "<unrecognized>"
Z_CI95 = 1.96


def wald_halfwidth(n_correct: int, n: int) -> float:
    if n == 0:
        return 0.0
    p = n_correct / n
    return Z_CI95 * float(np.sqrt(p * (1.0 - p) / n))


@dataclass
class GroupAccuracy:
    n: int
    n_correct: int

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n if self.n else 0.0


@dataclass
class AccuracyReport:
    partition: str
    n: int
    n_correct: int
    accuracy: float
    ci95_halfwidth: float
    by_author: dict[str, GroupAccuracy]
    by_play: dict[str, GroupAccuracy]
    play_votes: dict[str, VoteResult]
    play_level_accuracy: float
    n_plays: int


def _single_report(partition: str, records: list[PredictionRecord]) -> AccuracyReport:
    n = len(records)
    n_correct = sum(1 for r in records if r.predicted_author == r.gold_author)
    by_author: dict[str, GroupAccuracy] = {}
    by_play: dict[str, GroupAccuracy] = {}
    gold_of_play: dict[str, str] = {}
    for r in records:
        correct = int(r.predicted_author == r.gold_author)
        for key, table in ((r.gold_author, by_author), (r.play_id, by_play)):
            row = table.setdefault(key, GroupAccuracy(0, 0))
            row.n += 1
            row.n_correct += correct
        gold_of_play[r.play_id] = r.gold_author
    votes = majority_vote(records)
    plays_correct = sum(1 for pid, v in votes.items() if v.winner == gold_of_play[pid])
    return AccuracyReport(
        partition=partition,
        n=n,
        n_correct=n_correct,
        accuracy=n_correct / n if n else 0.0,
        ci95_halfwidth=wald_halfwidth(n_correct, n),
        by_author=by_author,
        by_play=by_play,
        play_votes=votes,
        play_level_accuracy=plays_correct / len(votes) if votes else 0.0,
        n_plays=len(votes),
    )


def accuracy_report(preds: list[PredictionRecord], split: DatasetSplit | None = None) -> dict[str, AccuracyReport]:
    """Per-partition and overall ("all") accuracy reports.

    When a split is supplied every prediction's sample_id must appear in it
    and carry the matching partition name.
    """
    if split is not None:
        partition_of = split.partition_of()
        from .attribution import SPLIT_TO_RECORD_PARTITION

        for r in preds:
            part = partition_of.get(r.sample_id)
            if part is None:
                raise KeyError(f"prediction for unknown sample_id {r.sample_id!r}")
            if SPLIT_TO_RECORD_PARTITION.get(part, part) != r.partition:
                raise ValueError(
                    f"sample {r.sample_id!r} is in split partition {part!r} but predicted as {r.partition!r}"
                )
    reports: dict[str, AccuracyReport] = {}
    by_partition: dict[str, list[PredictionRecord]] = {}
    for r in preds:
        by_partition.setdefault(r.partition, []).append(r)
    for partition in sorted(by_partition):
        reports[partition] = _single_report(partition, by_partition[partition])
    reports["all"] = _single_report("all", preds)
    return reports


@dataclass
class LengthBin:
    low: int
    high: int | None  # None = open-ended
    n: int = 0
    n_correct: int = 0

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n if self.n else 0.0

    @property
    def label(self) -> str:
        return f"{self.low}-{self.high}" if self.high is not None else f">{self.low - 1}"


@dataclass
class LengthBinReport:
    bins: list[LengthBin]
    mean_length_correct: float
    mean_length_incorrect: float


def length_bin_report(preds: list[PredictionRecord], bin_width: int = 10, cap: int = 150) -> LengthBinReport:
    """Accuracy binned by sample length: [5,14], [15,24], ... capped at 150,
    with everything longer than the cap in one open bin."""
    bins = [LengthBin(low, min(low + bin_width - 1, cap)) for low in range(5, cap + 1, bin_width)]
    bins.append(LengthBin(cap + 1, None))
    correct_lengths: list[int] = []
    incorrect_lengths: list[int] = []
    for r in preds:
        for b in bins:
            if r.word_count >= b.low and (b.high is None or r.word_count <= b.high):
                b.n += 1
                b.n_correct += int(r.predicted_author == r.gold_author)
                break
        (correct_lengths if r.predicted_author == r.gold_author else incorrect_lengths).append(r.word_count)
    return LengthBinReport(
        bins=bins,
        mean_length_correct=float(np.mean(correct_lengths)) if correct_lengths else 0.0,
        mean_length_incorrect=float(np.mean(incorrect_lengths)) if incorrect_lengths else 0.0,
    )


@dataclass
class ConfusionMatrix:
    authors: list[str]  # gold authors, one row each
    columns: list[str]  # gold authors plus the unrecognized column when needed
    counts: dict[str, list[int]]
    rows: dict[str, list[float]]  # row percentages, each summing to 100


def confusion_matrix(preds: list[PredictionRecord]) -> ConfusionMatrix:
    """Row-normalized percentage matrix of gold vs predicted author.

    Predictions outside the gold-author set (including unparseable strings
    from external models) collapse into one extra column.
    """
    if not preds:
        raise ValueError("cannot build a confusion matrix from no predictions")
    authors = sorted({r.gold_author for r in preds})
    known = set(authors)
    extra = any(r.predicted_author not in known for r in preds)
    columns = authors + ([UNRECOGNIZED_COLUMN] if extra else [])
    col_index = {c: i for i, c in enumerate(columns)}
    counts = {a: [0] * len(columns) for a in authors}
    for r in preds:
        col = col_index[r.predicted_author] if r.predicted_author in known else col_index[UNRECOGNIZED_COLUMN]
        counts[r.gold_author][col] += 1
    rows = {}
    for a in authors:
        total = sum(counts[a])
        rows[a] = [100.0 * c / total for c in counts[a]]
    return ConfusionMatrix(authors=authors, columns=columns, counts=counts, rows=rows)


@dataclass
class ScapegoatReport:
    shares: list[tuple[str, int, float]]  # (predicted author, count, percent), descending
    top_k_share: float
    k: int
    n_misattributed: int


def scapegoat_index(preds: list[PredictionRecord], k: int = 2) -> ScapegoatReport:
    """Distribution of misattributed predictions over predicted authors.

    Shares are percentages of all misattributions; top_k_share sums the k
    largest. Zero misattributions yield an empty report.
    """
    mis = [r for r in preds if r.predicted_author != r.gold_author]
    if not mis:
        return ScapegoatReport(shares=[], top_k_share=0.0, k=k, n_misattributed=0)
    votes = Counter(r.predicted_author for r in mis)
    ranked = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))
    total = len(mis)
    shares = [(a, c, 100.0 * c / total) for a, c in ranked]
    top_count = sum(c for _, c in ranked[:k])
    return ScapegoatReport(shares=shares, top_k_share=100.0 * top_count / total, k=k, n_misattributed=total)


def attribution_shares(
    preds: list[PredictionRecord],
    group_by: str = "play",
    century_of: dict[str, int] | None = None,
) -> dict[str, dict[str, float]]:
    """Per-group percentage of samples attributed to each predicted author.

    ``group_by`` is one of play (play_id), author (gold author), or century
    (via the ``century_of`` play_id map).
    """
    def key_of(r: PredictionRecord) -> str:
        if group_by == "play":
            return r.play_id
        if group_by == "author":
            return r.gold_author
        if group_by == "century":
            if century_of is None or r.play_id not in century_of:
                raise KeyError(f"century unknown for play {r.play_id!r}")
            return str(century_of[r.play_id])
        raise ValueError(f"unknown group_by {group_by!r}")

    groups: dict[str, Counter[str]] = {}
    for r in preds:
        groups.setdefault(key_of(r), Counter())[r.predicted_author] += 1
    shares: dict[str, dict[str, float]] = {}
    for key, votes in groups.items():
        total = sum(votes.values())
        shares[key] = {a: 100.0 * c / total for a, c in sorted(votes.items())}
    return shares


@dataclass
class UniquenessReport:
    top_m: int
    words: list[str]
    excluded_terms: list[str]
    author_scores: dict[str, float]
    z_table: dict[str, list[float]]  # author -> per-word z over ``words``
    constant_words: list[str]


def _uniqueness_from_counts(
    words: list[str], authors: list[str], word_counts: np.ndarray, totals: np.ndarray
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Summed |z| per author from an authors-by-words count matrix.

    Frequencies are normalized per author (count / author total tokens);
    z-scores use the mean and population sigma across the author set. Words
    constant across authors contribute z = 0.
    """
    freqs = word_counts / totals[:, None]
    mu = freqs.mean(axis=0)
    sigma = freqs.std(axis=0)
    constant_cols = np.flatnonzero(sigma == 0.0)
    safe_sigma = np.where(sigma == 0.0, 1.0, sigma)
    z = (freqs - mu) / safe_sigma
    z[:, constant_cols] = 0.0
    return np.abs(z).sum(axis=1), z, constant_cols.tolist()


def top_corpus_words(token_counts: Counter[str], top_m: int, excluded_terms: frozenset[str]) -> list[str]:
    candidates = [(term, c) for term, c in token_counts.items() if term not in excluded_terms]
    if len(candidates) < top_m:
        raise ValueError(f"only {len(candidates)} candidate words after exclusions, need {top_m}")
    candidates.sort(key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in candidates[:top_m]]


def uniqueness_scores(
    train_samples: list[Sample], top_m: int = 100, excluded_terms: frozenset[str] = frozenset()
) -> UniquenessReport:
    """Summed absolute z-scores of each author's relative use of the corpus's
    ``top_m`` most frequent words (after the named-entity exclusion screen)."""
    authors = sorted({s.author for s in train_samples})
    if len(authors) < 2:
        raise ValueError("uniqueness requires at least two authors")
    corpus_counts: Counter[str] = Counter()
    for s in train_samples:
        corpus_counts.update(s.text.split())
    words = top_corpus_words(corpus_counts, top_m, excluded_terms)
    word_index = {w: i for i, w in enumerate(words)}

    counts = np.zeros((len(authors), top_m))
    totals = np.zeros(len(authors))
    author_index = {a: i for i, a in enumerate(authors)}
    for s in train_samples:
        ai = author_index[s.author]
        totals[ai] += s.word_count
        for tok in s.text.split():
            wi = word_index.get(tok)
            if wi is not None:
                counts[ai, wi] += 1.0
    scores, z, constant_cols = _uniqueness_from_counts(words, authors, counts, totals)
    return UniquenessReport(
        top_m=top_m,
        words=words,
        excluded_terms=sorted(excluded_terms),
        author_scores={a: float(scores[i]) for i, a in enumerate(authors)},
        z_table={a: z[i].tolist() for i, a in enumerate(authors)},
        constant_words=[words[i] for i in constant_cols],
    )


def suggest_named_entities(samples: list[Sample], min_count: int = 5, cap_share: float = 0.9) -> set[str]:
    """Heuristic named-entity flagger: tokens whose occurrences are almost
    always capitalized. Advisory only; the exclusion list stays user-owned."""
    cased: Counter[str] = Counter()
    for s in samples:
        cased.update(s.text.split())
    flagged: set[str] = set()
    for tok, n in cased.items():
        if not tok[:1].isupper() or not tok[:1].isalpha():
            continue
        lower_n = cased.get(tok[0].lower() + tok[1:], 0)
        if n >= min_count and n / (n + lower_n) >= cap_share:
            flagged.add(tok)
    return flagged


@dataclass
class StatResult:
    kind: str
    value: float
    p_value: float | None = None


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    # Exact rational arithmetic so the value is invariant under exactly
    # representable positive affine transforms of either input; floats only
    # at the final square root.
    fx = [Fraction(float(v)) for v in x]
    fy = [Fraction(float(v)) for v in y]
    n = len(fx)
    mx = sum(fx) / n
    my = sum(fy) / n
    dx = [v - mx for v in fx]
    dy = [v - my for v in fy]
    num = sum(a * b for a, b in zip(dx, dy))
    sxx = sum(a * a for a in dx)
    syy = sum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined for zero-variance input")
    if num == 0:
        return 0.0
    r2 = num * num / (sxx * syy)
    return math.copysign(math.sqrt(float(r2)), 1.0 if num > 0 else -1.0)


def _t_approx_p(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = abs(r) * np.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * _scipy_stats.t.sf(t, df=n - 2))


def correlation(x: list[float], y: list[float], kind: str = "pearson_r") -> StatResult:
    """Pearson r or Spearman rho (Pearson on average ranks), with a two-sided
    p-value from the t transform t = r * sqrt((n-2) / (1-r^2))."""
    if kind not in ("pearson_r", "spearman_rho"):
        raise ValueError(f"unknown correlation kind {kind!r}")
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("correlation needs two equal-length lists of at least 3 values")
    ax, ay = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if kind == "spearman_rho":
        ax = _scipy_stats.rankdata(ax)
        ay = _scipy_stats.rankdata(ay)
    r = _pearson(ax, ay)
    return StatResult(kind=kind, value=r, p_value=_t_approx_p(r, len(x)))


@dataclass
class PlayText:
    play_id: str
    author: str
    text: str


@dataclass
class TrialConfig:
    n_trials: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


@dataclass
class TrialReport:
    n_trials: int
    seed: int
    rhos: list[float]
    observed_rho: float
    hist_edges: list[float]
    hist_counts: list[int]
    synthetic_play_counts: list[int]
    mean_synthetic_scores: list[float]
    rho_defined: bool  # False when every author has the same play count


def play_texts_from_samples(samples: list[Sample], author_of_play: dict[str, str]) -> list[PlayText]:
    """Concatenate samples per play into the unit the uniqueness trials shuffle."""
    by_play: dict[str, list[str]] = {}
    for s in samples:
        by_play.setdefault(s.play_id, []).append(s.text)
    return [PlayText(play_id=pid, author=author_of_play[pid], text=" ".join(texts)) for pid, texts in sorted(by_play.items())]


def synthetic_uniqueness_trials(
    plays: list[PlayText],
    cfg: TrialConfig,
    top_m: int = 100,
    excluded_terms: frozenset[str] = frozenset(),
) -> TrialReport:
    """Randomized validation of the uniqueness metric.

    Every trial reassigns whole plays to synthetic authors whose play-count
    multiset matches the true corpus, recomputes uniqueness, and records
    Spearman's rho between play count and uniqueness. The top-``top_m`` word
    list depends only on the pooled corpus text, so it is computed once.
    Per-trial RNG streams derive from (seed, trial index).
    """
    plays = sorted(plays, key=lambda p: p.play_id)
    corpus_counts: Counter[str] = Counter()
    for p in plays:
        corpus_counts.update(p.text.split())
    words = top_corpus_words(corpus_counts, top_m, excluded_terms)
    word_index = {w: i for i, w in enumerate(words)}

    n_plays = len(plays)
    play_word_counts = np.zeros((n_plays, top_m))
    play_totals = np.zeros(n_plays)
    for i, p in enumerate(plays):
        toks = p.text.split()
        play_totals[i] = len(toks)
        for tok in toks:
            wi = word_index.get(tok)
            if wi is not None:
                play_word_counts[i, wi] += 1.0

    true_counts = Counter(p.author for p in plays)
    count_multiset = sorted(true_counts.values(), reverse=True)
    n_authors = len(count_multiset)
    counts_vec = [float(c) for c in count_multiset]
    degenerate = len(set(count_multiset)) == 1

    def group_scores(groups: list[np.ndarray]) -> np.ndarray:
        author_counts = np.vstack([play_word_counts[g].sum(axis=0) for g in groups])
        author_totals = np.array([play_totals[g].sum() for g in groups])
        scores, _, _ = _uniqueness_from_counts(words, [str(i) for i in range(len(groups))], author_counts, author_totals)
        return scores

    def rho_of(scores: np.ndarray) -> float:
        if degenerate:
            return 0.0
        return correlation(counts_vec, scores.tolist(), "spearman_rho").value

    # Observed assignment, computed through the identical path.
    true_authors = sorted(true_counts, key=lambda a: (-true_counts[a], a))
    observed_groups = [
        np.array([i for i, p in enumerate(plays) if p.author == a], dtype=int) for a in true_authors
    ]
    observed_rho = rho_of(group_scores(observed_groups))

    rhos: list[float] = []
    score_sums = np.zeros(n_authors)
    for t in range(cfg.n_trials):
        rng = keyed_rng(cfg.seed, "trial", str(t))
        perm = rng.permutation(n_plays)
        groups = []
        offset = 0
        for c in count_multiset:
            groups.append(perm[offset : offset + c])
            offset += c
        scores = group_scores(groups)
        score_sums += scores
        rhos.append(rho_of(scores))

    hist_counts, hist_edges = np.histogram(np.array(rhos), bins=np.linspace(-1.0, 1.0, 41))
    return TrialReport(
        n_trials=cfg.n_trials,
        seed=cfg.seed,
        rhos=rhos,
        observed_rho=observed_rho,
        hist_edges=hist_edges.tolist(),
        hist_counts=hist_counts.tolist(),
        synthetic_play_counts=count_multiset,
        mean_synthetic_scores=(score_sums / cfg.n_trials).tolist(),
        rho_defined=not degenerate,
    )


@dataclass
class TimelineReport:
    per_century: dict[int, dict[str, float]]  # century -> target author -> mean fraction
    n_source_authors: dict[int, int]
    play_votes: dict[int, dict[str, int]]  # century -> majority-vote winner -> play count
    n_plays: dict[int, int]


def timeline_report(
    preds: list[PredictionRecord],
    century_of: dict[str, int],
    target_authors: list[str] | None = None,
) -> TimelineReport:
    """Per-century attribution shares, averaged per source author.

    Within a century each source author's samples yield a fraction assigned
    to every target author; the century value is the unweighted mean of those
    fractions, so prolific sources cannot skew it. Majority-vote play
    attributions are tallied per century as well.
    """
    for r in preds:
        if r.play_id not in century_of:
            raise KeyError(f"century unknown for play {r.play_id!r}")
    by_century: dict[int, list[PredictionRecord]] = {}
    for r in preds:
        by_century.setdefault(century_of[r.play_id], []).append(r)

    per_century: dict[int, dict[str, float]] = {}
    n_source: dict[int, int] = {}
    play_votes: dict[int, dict[str, int]] = {}
    n_plays: dict[int, int] = {}
    for century, records in sorted(by_century.items()):
        by_source: dict[str, list[PredictionRecord]] = {}
        for r in records:
            by_source.setdefault(r.gold_author, []).append(r)
        targets = target_authors or sorted({r.predicted_author for r in records})
        sums = {t: 0.0 for t in targets}
        for source_records in by_source.values():
            total = len(source_records)
            votes = Counter(r.predicted_author for r in source_records)
            for t in targets:
                sums[t] += votes.get(t, 0) / total
        n_authors = len(by_source)
        per_century[century] = {t: sums[t] / n_authors for t in targets}
        n_source[century] = n_authors

        winners = Counter(v.winner for v in majority_vote(records).values())
        play_votes[century] = dict(sorted(winners.items()))
        n_plays[century] = sum(winners.values())
    return TimelineReport(
        per_century=per_century, n_source_authors=n_source, play_votes=play_votes, n_plays=n_plays
    )
