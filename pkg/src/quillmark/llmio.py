"""Fine-tuning pair emission and generated-string parsing.

Pair templates are byte-exact:

  masked_span input :  "AUTHOR: <extra_id_0> | " + text
  masked_span output:  "AUTHOR: " + author + " | " + text
  suffix input      :  text + " | AUTHOR: <extra_id_0>"
  suffix output     :  text + " | AUTHOR: " + author

Parsing extracts the AUTHOR field (between the marker and the first "|" for
masked_span, after the last marker for suffix; the whole string when no
marker is present), tries an exact match against the known-author set, then
falls back to the field's first two whitespace tokens stripped of punctuation.
Anything else is returned as unrecognized, never raised.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from pathlib import Path

from .corpus import Sample

STYLES = ("masked_span", "suffix")
MASK_TOKEN = "<extra_id_0>"
AUTHOR_MARKER = "AUTHOR:"


@dataclass
class PairRecord:
    sample_id: str
    input: str
    output: str
    style: str


@dataclass
class ParseResult:
    author: str | None
    raw: str

    @property
    def recognized(self) -> bool:
        return self.author is not None


def make_pair(sample: Sample, style: str = "masked_span") -> PairRecord:
    if style not in STYLES:
        raise ValueError(f"unknown pair style {style!r}")
    if not sample.author:
        raise ValueError(f"sample {sample.sample_id!r} has an empty author")
    if style == "masked_span":
        pair_input = f"{AUTHOR_MARKER} {MASK_TOKEN} | {sample.text}"
        pair_output = f"{AUTHOR_MARKER} {sample.author} | {sample.text}"
    else:
        pair_input = f"{sample.text} | {AUTHOR_MARKER} {MASK_TOKEN}"
        pair_output = f"{sample.text} | {AUTHOR_MARKER} {sample.author}"
    return PairRecord(sample_id=sample.sample_id, input=pair_input, output=pair_output, style=style)


def _author_field(generated: str, style: str) -> str:
    if style == "masked_span":
        marker = generated.find(AUTHOR_MARKER)
        if marker < 0:
            return generated.strip()
        start = marker + len(AUTHOR_MARKER)
        bar = generated.find("|", start)
        return generated[start:bar].strip() if bar >= 0 else generated[start:].strip()
    marker = generated.rfind(AUTHOR_MARKER)
    if marker < 0:
        return generated.strip()
    return generated[marker + len(AUTHOR_MARKER) :].strip()


def two_word_fallback(field: str) -> str:
    tokens = [t.strip(string.punctuation) for t in field.split()[:2]]
    return " ".join(t for t in tokens if t)


def parse_prediction(generated: str, style: str, known_authors: set[str]) -> ParseResult:
    """Map a generated string to a known author, or unrecognized(raw)."""
    if style not in STYLES:
        raise ValueError(f"unknown pair style {style!r}")
    field = _author_field(generated, style)
    if field in known_authors:
        return ParseResult(author=field, raw=generated)
    fallback = two_word_fallback(field)
    if fallback in known_authors:
        return ParseResult(author=fallback, raw=generated)
    return ParseResult(author=None, raw=generated)


def write_pairs_jsonl(path: Path, pairs: list[PairRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(
                json.dumps(
                    {"sample_id": p.sample_id, "input": p.input, "output": p.output, "style": p.style},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_pairs_jsonl(path: Path) -> list[PairRecord]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append(
                    PairRecord(
                        sample_id=obj["sample_id"],
                        input=obj["input"],
                        output=obj.get("output", ""),
                        style=obj["style"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed pair line ({exc})") from exc
    return pairs
