"""Fine-tuning and batch-generation harness around the pair files.

``finetune`` trains the model on input->output generation with AdamW and the
standard hyperparameters (lr 2e-5, weight decay 0.01, 10 epochs, batch size
by model size), logging train/val loss every epoch. ``generate_predictions``
greedily decodes one string per input, parses it, and writes the toolkit's
prediction CSV; rows that cannot be parsed keep the generated string verbatim
so they count as incorrect downstream. Training is seed-deterministic on one
platform; bitwise identity across BLAS builds is not guaranteed.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .model import BOS, EOS, PAD, SIZES, Seq2Seq, WordVocab
from .pairs import Pair, read_pairs
from .parsing import author_field, parse_prediction

PREDICTIONS_HEADER = ["sample_id", "play_id", "gold_author", "predicted_author", "partition", "word_count", "model_tag"]
SPLIT_TO_RECORD_PARTITION = {"test_in": "in", "test_out": "out", "disputed": "disputed", "timeline": "timeline"}


@dataclass
class FinetuneConfig:
    model_size: str = "tiny"
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    epochs: int = 10
    batch_size: int | None = None  # None = the model size's default (16/8/4)
    seed: int = 0
    max_input_tokens: int = 64
    max_output_tokens: int = 24
    generate_max_tokens: int = 16

    def __post_init__(self) -> None:
        if self.model_size not in SIZES:
            raise ValueError(f"unknown model size {self.model_size!r}; pick one of {sorted(SIZES)}")
        if self.learning_rate <= 0 or self.weight_decay < 0 or self.epochs < 1:
            raise ValueError("learning_rate, weight_decay, and epochs must be positive")
        if self.batch_size is None:
            self.batch_size = SIZES[self.model_size]["batch_size"]

    @classmethod
    def from_json(cls, path: Path) -> "FinetuneConfig":
        return cls(**json.loads(Path(path).read_text("utf-8")))


def _pad_batch(seqs: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    return torch.tensor([s + [PAD] * (width - len(s)) for s in seqs], dtype=torch.long)


def _batch_tensors(pairs: list[Pair], vocab: WordVocab, cfg: FinetuneConfig, idx: list[int]):
    src = _pad_batch([vocab.encode(pairs[i].input, cfg.max_input_tokens) for i in idx])
    targets = [vocab.encode(pairs[i].output, cfg.max_output_tokens) + [EOS] for i in idx]
    dec_in = _pad_batch([[BOS] + t[:-1] for t in targets])
    dec_out = _pad_batch(targets)
    return src, dec_in, dec_out


def _dataset_loss(model: Seq2Seq, pairs: list[Pair], vocab: WordVocab, cfg: FinetuneConfig, loss_fn) -> float:
    model.eval()
    total, n = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(pairs), cfg.batch_size):
            idx = list(range(start, min(start + cfg.batch_size, len(pairs))))
            src, dec_in, dec_out = _batch_tensors(pairs, vocab, cfg, idx)
            logits = model(src, dec_in)
            total += float(loss_fn(logits.flatten(0, 1), dec_out.flatten())) * len(idx)
            n += len(idx)
    return total / n


def finetune(pairs_path: Path, val_pairs_path: Path | None, cfg: FinetuneConfig, out_dir: Path) -> dict:
    """Train on a pair file; write model.pt and loss_log.json under out_dir.

    Returns the loss log. An empty pair file is an error and leaves no
    artifact behind.
    """
    pairs = read_pairs(Path(pairs_path))
    if not pairs:
        raise ValueError(f"{pairs_path}: pair file is empty")
    val_pairs = read_pairs(Path(val_pairs_path)) if val_pairs_path else []
    styles = {p.style for p in pairs}
    if len(styles) != 1:
        raise ValueError(f"pair file mixes styles {sorted(styles)}")
    style = styles.pop()

    known_authors = sorted({author_field(p.output, style) for p in pairs})
    vocab = WordVocab.build([p.input for p in pairs] + [p.output for p in pairs])

    torch.manual_seed(cfg.seed)
    size = SIZES[cfg.model_size]
    model = Seq2Seq(len(vocab), size["emb_dim"], size["hidden_dim"])
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    order_rng = torch.Generator().manual_seed(cfg.seed)

    log = {
        "model_size": cfg.model_size,
        "n_pairs": len(pairs),
        "n_val_pairs": len(val_pairs),
        "style": style,
        "seed": cfg.seed,
        "epochs": [],
        "initial_train_loss": _dataset_loss(model, pairs, vocab, cfg, loss_fn),
    }
    for epoch in range(cfg.epochs):
        model.train()
        perm = torch.randperm(len(pairs), generator=order_rng).tolist()
        epoch_loss, seen = 0.0, 0
        for start in range(0, len(perm), cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            src, dec_in, dec_out = _batch_tensors(pairs, vocab, cfg, idx)
            optimizer.zero_grad()
            logits = model(src, dec_in)
            loss = loss_fn(logits.flatten(0, 1), dec_out.flatten())
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            seen += len(idx)
        entry = {"epoch": epoch + 1, "train_loss": epoch_loss / seen}
        if val_pairs:
            entry["val_loss"] = _dataset_loss(model, val_pairs, vocab, cfg, loss_fn)
        log["epochs"].append(entry)
    log["final_train_loss"] = log["epochs"][-1]["train_loss"]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "state_dict": model.state_dict(),
            "vocab": vocab.tokens,
            "config": cfg.__dict__,
            "style": style,
            "known_authors": known_authors,
        },
        out_dir / "model.pt",
    )
    _atomic_write(out_dir / "loss_log.json", json.dumps(log, indent=1) + "\n")
    return log


def load_artifact(model_dir: Path) -> tuple[Seq2Seq, WordVocab, FinetuneConfig, str, list[str]]:
    bundle = torch.load(Path(model_dir) / "model.pt", weights_only=False)
    cfg = FinetuneConfig(**bundle["config"])
    vocab = WordVocab(bundle["vocab"][4:])  # specials are re-prepended
    size = SIZES[cfg.model_size]
    model = Seq2Seq(len(vocab), size["emb_dim"], size["hidden_dim"])
    model.load_state_dict(bundle["state_dict"])
    model.eval()
    return model, vocab, cfg, bundle["style"], bundle["known_authors"]


def read_split_csv(path: Path) -> dict[str, tuple[str, str, str]]:
    """sample_id -> (play_id, author, record partition) from the split CSV."""
    meta = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            partition = SPLIT_TO_RECORD_PARTITION.get(row["partition"], row["partition"])
            meta[row["sample_id"]] = (row["play_id"], row["author"], partition)
    return meta


def generate_predictions(
    model_dir: Path,
    inputs_path: Path,
    split_csv: Path,
    out_csv: Path,
    model_tag: str | None = None,
    known_authors: list[str] | None = None,
) -> int:
    """Decode every input pair and write the toolkit's prediction CSV.

    Per-sample generation failures are recorded as unrecognized predictions
    (empty generated string) rather than aborting the batch. Returns the
    number of rows written.
    """
    model, vocab, cfg, style, trained_authors = load_artifact(model_dir)
    known = set(known_authors if known_authors is not None else trained_authors)
    pairs = read_pairs(Path(inputs_path))
    meta = read_split_csv(Path(split_csv))
    tag = model_tag or f"finetune_{cfg.model_size}"

    rows = []
    for pair in pairs:
        if pair.sample_id not in meta:
            raise KeyError(f"input sample_id {pair.sample_id!r} is not in {split_csv}")
        play_id, gold_author, partition = meta[pair.sample_id]
        try:
            src = _pad_batch([vocab.encode(pair.input, cfg.max_input_tokens)])
            generated = vocab.decode(model.generate(src, cfg.generate_max_tokens))
        except Exception:
            generated = ""
        parsed = parse_prediction(generated, style, known)
        predicted = parsed if parsed is not None else generated
        rows.append([pair.sample_id, play_id, gold_author, predicted, partition, len(pair.text.split()), tag])

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(PREDICTIONS_HEADER)
    writer.writerows(rows)
    _atomic_write(Path(out_csv), buf.getvalue())
    return len(rows)


def _atomic_write(path: Path, text: str) -> None:
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
