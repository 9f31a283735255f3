"""Generated-string parsing, byte-compatible with the toolkit's parser.

This is an independent reimplementation of the documented parse contract so
the harness has no import dependency on the toolkit package. The shared test
vector file keeps both sides honest:

  masked_span: the AUTHOR field is the text between the first "AUTHOR:"
  marker and the first "|" after it (to end of string when no bar).
  suffix: the AUTHOR field is everything after the last "AUTHOR:" marker.
  Either way, a missing marker means the whole string is the field.

The trimmed field must match a known author exactly; otherwise its first two
whitespace tokens, stripped of leading/trailing punctuation, are retried.
Anything else is unrecognized and keeps the raw string verbatim.
"""

from __future__ import annotations

import string

AUTHOR_MARKER = "AUTHOR:"
STYLES = ("masked_span", "suffix")


def author_field(generated: str, style: str) -> str:
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


def parse_prediction(generated: str, style: str, known_authors: set[str]) -> str | None:
    """Known author name, or None when the string cannot be mapped to one."""
    if style not in STYLES:
        raise ValueError(f"unknown pair style {style!r}")
    field = author_field(generated, style)
    if field in known_authors:
        return field
    fallback = two_word_fallback(field)
    if fallback in known_authors:
        return fallback
    return None
