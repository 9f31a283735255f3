"""Corpus ingestion: normalization, utterance segmentation, chunking, filtering.

Play texts arrive as UTF-8 plain text (blank-line-separated speaker blocks) or
minimal XML with ``<sp>``-style speech elements. Normalization maps common
typographic characters to ASCII via a versioned replacement table shipped in
``data/char_replacements.json``, keeps accented Latin letters, and drops
everything else non-ASCII.
"""

from __future__ import annotations

import json
import re
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

_LINE_BREAKS = "\n\r\v\f\x85  "
_LINE_BREAK_RE = re.compile("[%s]" % _LINE_BREAKS)
_WHITESPACE_RE = re.compile(r"\s+")
_BLANK_LINE_RE = re.compile(r"\n\s*\n")


def _load_replacement_table() -> dict[str, str]:
    raw = resources.files("quillmark.data").joinpath("char_replacements.json").read_text("utf-8")
    table = json.loads(raw)["replacements"]
    return {k: v for k, v in table.items()}


REPLACEMENT_TABLE = _load_replacement_table()
_REPLACEMENT_RE = re.compile("[%s]" % "".join(re.escape(c) for c in REPLACEMENT_TABLE))


def _is_accented_latin(ch: str) -> bool:
    # A non-ASCII character survives only if it is a letter whose NFD
    # decomposition starts with a plain ASCII letter (e.g. é → e + ́).
    if not unicodedata.category(ch).startswith("L"):
        return False
    base = unicodedata.normalize("NFD", ch)[0]
    return base.isascii() and base.isalpha()


def normalize_text(raw: str) -> str:
    """Normalize raw text to single-line, near-ASCII form.

    Steps, in order: line breaks become spaces; the replacement table maps
    typographic characters (curly quotes, dashes, ellipses, ligatures, exotic
    spaces) to ASCII; remaining non-ASCII characters that are not accented
    Latin letters are dropped; whitespace runs collapse to one space.
    Idempotent.
    """
    text = _LINE_BREAK_RE.sub(" ", raw)
    text = _REPLACEMENT_RE.sub(lambda m: REPLACEMENT_TABLE[m.group(0)], text)
    text = "".join(ch for ch in text if ch.isascii() or _is_accented_latin(ch))
    return _WHITESPACE_RE.sub(" ", text).strip()


def word_count(text: str) -> int:
    """Number of whitespace-delimited tokens."""
    return len(text.split())


@dataclass
class Utterance:
    speaker: str | None
    text: str
    word_count: int

    @classmethod
    def from_text(cls, text: str, speaker: str | None = None) -> "Utterance":
        text = normalize_text(text)
        return cls(speaker=speaker, text=text, word_count=word_count(text))


@dataclass
class PlayRecord:
    play_id: str
    title: str
    author: str
    source: str
    raw_text: str
    utterances: list[Utterance] = field(default_factory=list)
    century: int | None = None

    def __post_init__(self) -> None:
        if not self.author:
            raise ValueError(f"play {self.play_id!r} has an empty author")


@dataclass
class Sample:
    sample_id: str
    play_id: str
    author: str
    text: str
    word_count: int


@dataclass
class SegmenterConfig:
    max_words: int = 450
    min_words: int = 5

    def __post_init__(self) -> None:
        if not (0 < self.min_words <= self.max_words):
            raise ValueError(f"need 0 < min_words <= max_words, got {self.min_words}/{self.max_words}")


@dataclass
class FilterConfig:
    min_utterances_per_play: int = 300
    min_plays_per_author: int = 3
    single_author_only: bool = True

    def __post_init__(self) -> None:
        if self.min_utterances_per_play < 1 or self.min_plays_per_author < 1:
            raise ValueError("filter thresholds must be >= 1")


def split_utterances_plain(raw: str) -> list[Utterance]:
    """Treat blank-line-separated blocks of a plain-text play as utterances."""
    blocks = _BLANK_LINE_RE.split(raw)
    utts = [Utterance.from_text(block) for block in blocks if block.strip()]
    return [u for u in utts if u.word_count > 0]


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1].lower()


def split_utterances_xml(raw: str) -> list[Utterance]:
    """Minimal XML mode: each ``<sp>`` element is one utterance.

    The optional ``<speaker>`` child (or a ``who`` attribute) names the
    speaker; that child's text is excluded from the utterance body. Namespaces
    are ignored.
    """
    root = ET.fromstring(raw)
    utts: list[Utterance] = []
    for sp in root.iter():
        if _local_name(sp.tag) != "sp":
            continue
        speaker = sp.attrib.get("who")
        parts: list[str] = []
        if sp.text:
            parts.append(sp.text)
        for child in sp:
            if _local_name(child.tag) == "speaker":
                if speaker is None and child.text:
                    speaker = child.text.strip()
            else:
                parts.append("".join(child.itertext()))
            if child.tail:
                parts.append(child.tail)
        utt = Utterance.from_text(" ".join(parts), speaker=speaker)
        if utt.word_count > 0:
            utts.append(utt)
    return utts


def load_play_text(path: Path) -> tuple[str, list[Utterance]]:
    raw = path.read_text("utf-8")
    if path.suffix.lower() == ".xml":
        return raw, split_utterances_xml(raw)
    return raw, split_utterances_plain(raw)


def segment_and_chunk(play: PlayRecord, cfg: SegmenterConfig) -> list[Sample]:
    """Chunk each utterance after every ``max_words``-th word, drop short chunks.

    Splitting ignores sentence boundaries. Chunks shorter than ``min_words``
    (including full utterances) are discarded after splitting. Sample ids are
    deterministic functions of (play_id, utterance index, chunk index).
    """
    samples: list[Sample] = []
    for u_idx, utt in enumerate(play.utterances):
        words = utt.text.split()
        for c_idx in range(0, max(1, -(-len(words) // cfg.max_words))):
            chunk = words[c_idx * cfg.max_words : (c_idx + 1) * cfg.max_words]
            if len(chunk) < cfg.min_words:
                continue
            samples.append(
                Sample(
                    sample_id=f"{play.play_id}-u{u_idx:05d}-c{c_idx:03d}",
                    play_id=play.play_id,
                    author=play.author,
                    text=" ".join(chunk),
                    word_count=len(chunk),
                )
            )
    return samples


SINGLE_AUTHOR = "single-author"
DISPUTED = "disputed-or-coauthored"

REASON_BELOW_MIN_UTTERANCES = "below-min-utterances"
REASON_AUTHOR_BELOW_MIN_PLAYS = "author-below-min-plays"


def filter_corpus(
    plays: list[PlayRecord],
    authorship: dict[str, str],
    cfg: FilterConfig,
    samples_by_play: dict[str, list[Sample]],
) -> tuple[list[PlayRecord], list[PlayRecord], list[tuple[str, str]]]:
    """Partition plays into (primary, disputed, rejected-with-reason).

    Filtering order is fixed: (1) disputed/co-authored plays route to the
    disputed subcorpus, (2) plays with fewer than ``min_utterances_per_play``
    surviving samples are rejected, (3) authors left with fewer than
    ``min_plays_per_author`` plays have all their remaining plays rejected.
    """
    missing = [p.play_id for p in plays if p.play_id not in authorship]
    if missing:
        raise KeyError(f"authorship status missing for play_ids: {missing}")

    primary: list[PlayRecord] = []
    disputed: list[PlayRecord] = []
    rejected: list[tuple[str, str]] = []

    survivors: list[PlayRecord] = []
    for play in plays:
        if cfg.single_author_only and authorship[play.play_id] != SINGLE_AUTHOR:
            disputed.append(play)
        elif len(samples_by_play.get(play.play_id, [])) < cfg.min_utterances_per_play:
            rejected.append((play.play_id, REASON_BELOW_MIN_UTTERANCES))
        else:
            survivors.append(play)

    plays_per_author: dict[str, int] = {}
    for play in survivors:
        plays_per_author[play.author] = plays_per_author.get(play.author, 0) + 1
    for play in survivors:
        if plays_per_author[play.author] < cfg.min_plays_per_author:
            rejected.append((play.play_id, REASON_AUTHOR_BELOW_MIN_PLAYS))
        else:
            primary.append(play)

    return primary, disputed, rejected


@dataclass
class ManifestEntry:
    play_id: str
    title: str
    author: str
    source: str
    path: str
    authorship_status: str
    century: int | None = None


def load_manifest(path: Path) -> list[ManifestEntry]:
    """Read a corpus manifest: a JSON document with a ``plays`` array."""
    doc = json.loads(Path(path).read_text("utf-8"))
    entries = []
    seen: set[str] = set()
    for item in doc["plays"]:
        entry = ManifestEntry(
            play_id=item["play_id"],
            title=item.get("title", item["play_id"]),
            author=item["author"],
            source=item.get("source", ""),
            path=item["path"],
            authorship_status=item.get("authorship_status", SINGLE_AUTHOR),
            century=item.get("century"),
        )
        if entry.play_id in seen:
            raise ValueError(f"duplicate play_id in manifest: {entry.play_id}")
        seen.add(entry.play_id)
        entries.append(entry)
    return entries


def ingest_play(entry: ManifestEntry, base_dir: Path) -> PlayRecord:
    raw, utterances = load_play_text(base_dir / entry.path)
    return PlayRecord(
        play_id=entry.play_id,
        title=entry.title,
        author=entry.author,
        source=entry.source,
        raw_text=raw,
        utterances=utterances,
        century=entry.century,
    )
