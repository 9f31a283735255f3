"""Synthetic corpus generators shared across the test suite.

Authors are multinomial word sources: a shared pool of common words plus a
per-author marker vocabulary. ``marker_weight`` controls separation; at 0.45
a 30-word sample carries enough marker mass for near-perfect attribution.
"""

from __future__ import annotations

import numpy as np

from quillmark.corpus import PlayRecord, Sample, SegmenterConfig, Utterance, segment_and_chunk
from quillmark.sampling import keyed_rng

N_COMMON = 40
N_MARKERS = 12


def author_name(idx: int) -> str:
    return f"Author {chr(ord('A') + idx)}"


def _distribution(author_idx: int, marker_weight: float) -> tuple[list[str], np.ndarray]:
    common = [f"w{i:02d}" for i in range(N_COMMON)]
    markers = [f"m{author_idx:02d}q{j:02d}" for j in range(N_MARKERS)]
    # Zipf-ish decay over common words, flat over markers.
    common_w = 1.0 / np.arange(1, N_COMMON + 1)
    common_w *= (1.0 - marker_weight) / common_w.sum()
    marker_w = np.full(N_MARKERS, marker_weight / N_MARKERS)
    return common + markers, np.concatenate([common_w, marker_w])


def synth_utterance(rng: np.random.Generator, author_idx: int, n_words: int, marker_weight: float) -> str:
    words, probs = _distribution(author_idx, marker_weight)
    return " ".join(rng.choice(words, size=n_words, p=probs))


def make_play(
    play_id: str,
    author_idx: int,
    n_utterances: int,
    seed: int,
    words_per_utterance: int = 30,
    marker_weight: float = 0.45,
) -> PlayRecord:
    rng = keyed_rng(seed, "synth-play", play_id)
    utts = []
    for _ in range(n_utterances):
        text = synth_utterance(rng, author_idx, words_per_utterance, marker_weight)
        utts.append(Utterance(speaker=None, text=text, word_count=words_per_utterance))
    return PlayRecord(
        play_id=play_id,
        title=play_id,
        author=author_name(author_idx),
        source="synthetic",
        raw_text="",
        utterances=utts,
    )


def make_corpus(
    n_authors: int,
    plays_per_author: int,
    utterances_per_play: int,
    seed: int = 7,
    words_per_utterance: int = 30,
    marker_weight: float = 0.45,
) -> tuple[list[PlayRecord], list[Sample]]:
    plays: list[PlayRecord] = []
    samples: list[Sample] = []
    cfg = SegmenterConfig()
    for a in range(n_authors):
        for p in range(plays_per_author):
            play = make_play(
                f"p{a:02d}-{p:02d}", a, utterances_per_play, seed,
                words_per_utterance=words_per_utterance, marker_weight=marker_weight,
            )
            plays.append(play)
            samples.extend(segment_and_chunk(play, cfg))
    return plays, samples
