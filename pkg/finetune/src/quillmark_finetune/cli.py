"""quillmark-finetune: train on pair files, generate prediction CSVs.

    quillmark-finetune finetune --pairs pairs_train.jsonl [--val-pairs pairs_val.jsonl]
                                [--config cfg.json] --out-dir model/
    quillmark-finetune generate --model model/ --inputs pairs_test_in.jsonl
                                --split-csv split.csv --out preds.csv
                                [--model-tag TAG] [--authors-file authors.txt]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import FinetuneConfig, finetune, generate_predictions


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="quillmark-finetune", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ft = sub.add_parser("finetune")
    ft.add_argument("--pairs", required=True)
    ft.add_argument("--val-pairs", default=None)
    ft.add_argument("--config", default=None, help="JSON config overriding the defaults")
    ft.add_argument("--out-dir", required=True)

    gen = sub.add_parser("generate")
    gen.add_argument("--model", required=True)
    gen.add_argument("--inputs", required=True)
    gen.add_argument("--split-csv", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--model-tag", default=None)
    gen.add_argument("--authors-file", default=None, help="newline-separated known-author list")

    args = parser.parse_args(argv)
    try:
        if args.command == "finetune":
            cfg = FinetuneConfig.from_json(Path(args.config)) if args.config else FinetuneConfig()
            log = finetune(Path(args.pairs), Path(args.val_pairs) if args.val_pairs else None, cfg, Path(args.out_dir))
            print(
                f"finetune: {log['n_pairs']} pairs, {len(log['epochs'])} epochs, "
                f"train loss {log['initial_train_loss']:.4f} -> {log['final_train_loss']:.4f}"
            )
        else:
            authors = None
            if args.authors_file:
                authors = [line.strip() for line in Path(args.authors_file).read_text("utf-8").splitlines() if line.strip()]
            n = generate_predictions(
                Path(args.model), Path(args.inputs), Path(args.split_csv), Path(args.out),
                model_tag=args.model_tag, known_authors=authors,
            )
            print(f"generate: {n} predictions -> {args.out}")
    except (ValueError, KeyError, FileNotFoundError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"quillmark-finetune {args.command}: error: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
