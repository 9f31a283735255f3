"""Reader for the toolkit's pairs.jsonl interchange format.

One JSON object per line with fields sample_id / input / output / style
(output may be absent for generation-only inputs). Malformed lines abort
with their line number.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

MASKED_PREFIX = "AUTHOR: <extra_id_0> | "
SUFFIX_SUFFIX = " | AUTHOR: <extra_id_0>"


@dataclass
class Pair:
    sample_id: str
    input: str
    output: str
    style: str

    @property
    def text(self) -> str:
        """The sample text with the pair template stripped."""
        if self.style == "masked_span" and self.input.startswith(MASKED_PREFIX):
            return self.input[len(MASKED_PREFIX) :]
        if self.style == "suffix" and self.input.endswith(SUFFIX_SUFFIX):
            return self.input[: -len(SUFFIX_SUFFIX)]
        return self.input


def read_pairs(path: Path) -> list[Pair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append(
                    Pair(
                        sample_id=obj["sample_id"],
                        input=obj["input"],
                        output=obj.get("output", ""),
                        style=obj["style"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed pair line ({exc})") from exc
    return pairs
