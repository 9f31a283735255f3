"""Command-line pipeline: manifest -> corpus -> splits -> models -> reports.

Each subcommand reads the artifacts of earlier stages from the workdir and
writes its own; deleting a downstream artifact and re-running regenerates
only that artifact. All defaults match the toolkit's standard protocol
(450/5 segmentation, 300/3 filtering, 235/15/50/200 splits, 5000-term
cosine-delta vocabulary, top-100 uniqueness words, 1000 trials).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import analytics, artifacts, llmio
from .attribution import (
    PredictionRecord,
    SPLIT_TO_RECORD_PARTITION,
    TrainConfig,
    baseline_predict,
    fit_cosine_delta,
    merge_play_text,
    predict_records_cosine,
    predict_records_linear,
    read_predictions_csv,
    train_linear,
)
from .corpus import FilterConfig, SegmenterConfig, ingest_play, load_manifest, segment_and_chunk
from .features import build_vocabulary, fit_feature_transform, transform_matrix
from .sampling import DatasetSplit, SplitConfig, build_disputed_set, build_splits

DEFAULT_MODELS = [
    {"tag": "cosine_delta", "kind": "cosine_delta", "vocab_size": 5000},
    {"tag": "logistic_counts", "kind": "logistic", "features": "counts"},
    {"tag": "logistic_tfidf", "kind": "logistic", "features": "tfidf"},
    {"tag": "svm_counts", "kind": "svm", "features": "counts"},
    {"tag": "svm_tfidf", "kind": "svm", "features": "tfidf"},
    {"tag": "random", "kind": "baseline_random"},
    {"tag": "most_frequent_author", "kind": "baseline_most_frequent"},
]

DEFAULT_CONFIG = {
    "manifest": None,
    "workdir": "work",
    "seed": 0,
    "segmenter": {"max_words": 450, "min_words": 5},
    "filter": {"min_utterances_per_play": 300, "min_plays_per_author": 3, "single_author_only": True},
    "split": {
        "train_per_play": 235,
        "val_per_play": 15,
        "test_in_per_play": 50,
        "test_out_per_play": 200,
        "disputed_per_play": 200,
    },
    "pair_style": "masked_span",
    "models": DEFAULT_MODELS,
    "hyper": {"learning_rate": 0.1, "l2_strength": 1e-4, "epochs": 100, "batch_size": 32},
    "long_texts": True,
    "uniqueness": {"top_m": 100, "excluded_terms": []},
    "trials": {"n_trials": 1000},
    "timeline_manifest": None,
    "timeline_per_play": 200,
    "timeline_model": "cosine_delta",
}


class StageError(Exception):
    pass


class Run:
    """Resolved configuration plus workdir paths for one invocation."""

    def __init__(self, config_path: Path, seed_override: int | None, workdir_override: str | None):
        doc = json.loads(Path(config_path).read_text("utf-8"))
        resolved = json.loads(json.dumps(DEFAULT_CONFIG))
        for key, value in doc.items():
            if isinstance(value, dict) and isinstance(resolved.get(key), dict):
                resolved[key].update(value)
            else:
                resolved[key] = value
        if seed_override is not None:
            resolved["seed"] = seed_override
        if workdir_override is not None:
            resolved["workdir"] = workdir_override
        self.doc = resolved
        self.config_dir = Path(config_path).resolve().parent
        self.hash = artifacts.config_hash(resolved)
        self.seed = int(resolved["seed"])
        workdir = Path(resolved["workdir"])
        self.workdir = workdir if workdir.is_absolute() else self.config_dir / workdir

    def path(self, *parts: str) -> Path:
        return self.workdir.joinpath(*parts)

    def write_json(self, relpath: str, payload: dict) -> Path:
        path = self.path(relpath)
        artifacts.write_json_artifact(path, payload, cfg_hash=self.hash, seed=self.seed)
        return path

    def write_csv(self, relpath: str, header: list[str], rows: list[list]) -> Path:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        writer.writerows(rows)
        path = self.path(relpath)
        artifacts.atomic_write_text(path, buf.getvalue())
        artifacts.write_json_artifact(
            Path(str(path) + ".meta.json"), {"artifact": path.name}, cfg_hash=self.hash, seed=self.seed
        )
        return path

    def corpus(self) -> artifacts.CorpusStore:
        return artifacts.CorpusStore(artifacts.read_json_artifact(self.path("corpus.json"), "ingest"))

    def split(self) -> DatasetSplit:
        return artifacts.split_from_doc(artifacts.read_json_artifact(self.path("split.json"), "split"))

    def split_config(self) -> SplitConfig:
        params = dict(self.doc["split"])
        params.pop("seed", None)  # the run seed governs every stage
        return SplitConfig(**params, seed=self.seed)

    def segmenter_config(self) -> SegmenterConfig:
        return SegmenterConfig(**self.doc["segmenter"])

    def manifest_path(self, key: str = "manifest") -> Path:
        value = self.doc.get(key)
        if not value:
            raise StageError(f"config has no {key!r} path")
        path = Path(value)
        return path if path.is_absolute() else self.config_dir / path


def _ingest_corpus(run: Run, manifest_key: str) -> tuple[list, dict, dict]:
    manifest = run.manifest_path(manifest_key)
    entries = load_manifest(manifest)
    seg_cfg = run.segmenter_config()
    plays, samples_by_play = [], {}
    for entry in entries:
        play = ingest_play(entry, manifest.parent)
        plays.append(play)
        samples_by_play[play.play_id] = segment_and_chunk(play, seg_cfg)
    authorship = {e.play_id: e.authorship_status for e in entries}
    return plays, samples_by_play, authorship


def cmd_ingest(run: Run, args: argparse.Namespace) -> None:
    from .corpus import filter_corpus

    plays, samples_by_play, authorship = _ingest_corpus(run, "manifest")
    filter_cfg = FilterConfig(**run.doc["filter"])
    primary, disputed, rejected = filter_corpus(plays, authorship, filter_cfg, samples_by_play)
    payload = artifacts.corpus_payload(
        plays,
        samples_by_play,
        [p.play_id for p in primary],
        [p.play_id for p in disputed],
        rejected,
        authorship,
    )
    path = run.write_json("corpus.json", payload)
    print(
        f"ingest: {len(primary)} primary, {len(disputed)} disputed, {len(rejected)} rejected plays "
        f"({sum(len(samples_by_play[p.play_id]) for p in primary)} primary samples) -> {path}"
    )


def cmd_split(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    cfg = run.split_config()
    split = build_splits(store.primary_plays, store.samples_of(store.primary_ids), cfg)
    if store.disputed_ids:
        split.disputed = build_disputed_set(store.disputed_plays, store.samples_of(store.disputed_ids), cfg)
    run.write_json("split.json", artifacts.split_payload(split))
    rows = []
    for name, ids in split.partitions().items():
        for sid in ids:
            s = store.sample_index[sid]
            rows.append([sid, s.play_id, s.author, name])
    run.write_csv("split.csv", ["sample_id", "play_id", "author", "partition"], rows)
    counts = {name: len(ids) for name, ids in split.partitions().items()}
    print(f"split: {counts} -> {run.path('split.json')}")


def cmd_pairs(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    split = run.split()
    style = run.doc["pair_style"]
    for name, ids in split.partitions().items():
        pairs = [llmio.make_pair(store.sample_index[sid], style) for sid in sorted(ids)]
        path = run.path(f"pairs_{name}.jsonl")
        buf = io.StringIO()
        for p in pairs:
            buf.write(
                json.dumps(
                    {"sample_id": p.sample_id, "input": p.input, "output": p.output, "style": p.style},
                    ensure_ascii=False,
                )
                + "\n"
            )
        artifacts.atomic_write_text(path, buf.getvalue())
        print(f"pairs: {len(pairs)} {name} pairs -> {path}")


def _model_hyper(run: Run, spec: dict) -> TrainConfig:
    merged = dict(run.doc["hyper"])
    merged.update(spec.get("hyper", {}))
    merged.setdefault("seed", run.seed)
    return TrainConfig(**merged)


def cmd_train(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    split = run.split()
    train_samples = store.resolve(split.train)
    for spec in run.doc["models"]:
        tag, kind = spec["tag"], spec["kind"]
        if kind.startswith("baseline_"):
            continue
        if kind == "cosine_delta":
            vocab = build_vocabulary(train_samples, size_limit=spec.get("vocab_size", 5000))
            xf = fit_feature_transform("zscore", train_samples, vocab)
            profiles = fit_cosine_delta(train_samples, xf)
            payload = artifacts.cosine_model_payload(tag, xf, profiles)
        elif kind in ("logistic", "svm"):
            vocab = build_vocabulary(train_samples, size_limit=spec.get("vocab_size"))
            xf = fit_feature_transform(spec.get("features", "counts"), train_samples, vocab)
            X = transform_matrix(xf, train_samples)
            model = train_linear(kind, X, [s.author for s in train_samples], _model_hyper(run, spec))
            payload = artifacts.linear_model_payload(tag, spec.get("features", "counts"), xf, model)
        else:
            raise StageError(f"unknown model kind {kind!r} for tag {tag!r}")
        path = run.write_json(f"models/{tag}.json", payload)
        print(f"train: fitted {tag} ({kind}) -> {path}")


def _partition_samples(store: artifacts.CorpusStore, split: DatasetSplit) -> dict[str, list]:
    parts = {}
    for name in ("test_in", "test_out", "disputed"):
        ids = split.partitions()[name]
        if ids:
            parts[SPLIT_TO_RECORD_PARTITION[name]] = store.resolve(sorted(ids))
    return parts


def _write_predictions(run: Run, tag: str, records: list[PredictionRecord], merged: bool = False) -> Path:
    path = run.path("predictions", f"{tag}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["sample_id", "play_id", "gold_author", "predicted_author", "partition", "word_count", "model_tag"])
    for r in records:
        writer.writerow([r.sample_id, r.play_id, r.gold_author, r.predicted_author, r.partition, r.word_count, r.model_tag])
    artifacts.atomic_write_text(path, buf.getvalue())
    artifacts.write_json_artifact(
        Path(str(path) + ".meta.json"),
        {"artifact": path.name, "model_tag": tag, "merged": merged},
        cfg_hash=run.hash,
        seed=run.seed,
    )
    return path


def _validate_against_split(records: list[PredictionRecord], split: DatasetSplit) -> None:
    partition_of = split.partition_of()
    for r in records:
        part = partition_of.get(r.sample_id)
        if part is None:
            raise StageError(f"prediction references unknown sample_id {r.sample_id!r}")
        expected = SPLIT_TO_RECORD_PARTITION.get(part, part)
        if expected != r.partition:
            raise StageError(
                f"sample {r.sample_id!r}: split places it in {expected!r} but predictions say {r.partition!r}"
            )


def cmd_attribute(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    split = run.split()
    if args.predictions:
        records = read_predictions_csv(Path(args.predictions))
        _validate_against_split(records, split)
        tags = sorted({r.model_tag for r in records})
        for tag in tags:
            path = _write_predictions(run, tag, [r for r in records if r.model_tag == tag])
            print(f"attribute: validated {tag} external predictions -> {path}")
        return

    parts = _partition_samples(store, split)
    for spec in run.doc["models"]:
        tag, kind = spec["tag"], spec["kind"]
        if kind.startswith("baseline_"):
            baseline = "random" if kind == "baseline_random" else "most_frequent_author"
            records = baseline_predict(baseline, split, store.sample_index, store.primary_plays, run.seed)
            for r in records:
                r.model_tag = tag
            path = _write_predictions(run, tag, records)
            print(f"attribute: {tag} -> {path}")
            continue

        model_doc = artifacts.read_json_artifact(run.path("models", f"{tag}.json"), "train")
        kind_loaded, xf, model = artifacts.model_from(model_doc)
        records = []
        for partition, samples in parts.items():
            if kind_loaded == "cosine_delta":
                records.extend(predict_records_cosine(model, xf, samples, partition, tag))
            else:
                records.extend(predict_records_linear(model, xf, samples, partition, tag))
        path = _write_predictions(run, tag, records)
        print(f"attribute: {tag} -> {path}")

        if kind_loaded == "cosine_delta" and run.doc["long_texts"]:
            long_records = []
            for partition, samples in parts.items():
                by_play: dict[str, list] = {}
                for s in samples:
                    by_play.setdefault(s.play_id, []).append(s)
                merged = [merge_play_text(group, partition) for _, group in sorted(by_play.items())]
                long_records.extend(predict_records_cosine(model, xf, merged, partition, f"{tag}_long"))
            path = _write_predictions(run, f"{tag}_long", long_records, merged=True)
            print(f"attribute: {tag}_long (merged play texts) -> {path}")


def _render_accuracy_text(tag: str, reports: dict[str, analytics.AccuracyReport]) -> str:
    lines = [f"model {tag}"]
    for name, rep in reports.items():
        lines.append(
            f"  [{name}] n={rep.n} accuracy={100 * rep.accuracy:.1f}% ±{100 * rep.ci95_halfwidth:.1f} "
            f"| plays: {rep.n_plays} majority-vote accuracy={100 * rep.play_level_accuracy:.1f}%"
        )
    return "\n".join(lines)


def _accuracy_payload(reports: dict[str, analytics.AccuracyReport]) -> dict:
    payload = {}
    for name, rep in reports.items():
        payload[name] = {
            "n": rep.n,
            "n_correct": rep.n_correct,
            "accuracy": rep.accuracy,
            "ci95_halfwidth": rep.ci95_halfwidth,
            "play_level_accuracy": rep.play_level_accuracy,
            "n_plays": rep.n_plays,
            "by_author": {a: {"n": g.n, "n_correct": g.n_correct, "accuracy": g.accuracy} for a, g in sorted(rep.by_author.items())},
            "by_play": {p: {"n": g.n, "n_correct": g.n_correct, "accuracy": g.accuracy} for p, g in sorted(rep.by_play.items())},
            "play_votes": {p: {"winner": v.winner, "share": v.share, "tied": v.tied} for p, v in sorted(rep.play_votes.items())},
        }
    return payload


def _evaluate_one(
    run: Run, tag: str, records: list[PredictionRecord], split: DatasetSplit | None, fmt: str
) -> None:
    reports = analytics.accuracy_report(records, split)
    run.write_json(f"reports/accuracy_{tag}.json", {"model_tag": tag, "partitions": _accuracy_payload(reports)})
    artifacts.atomic_write_text(run.path("reports", f"accuracy_{tag}.txt"), _render_accuracy_text(tag, reports) + "\n")

    cm = analytics.confusion_matrix(records)
    run.write_csv(
        f"reports/confusion_{tag}.csv",
        ["gold_author"] + cm.columns,
        [[a] + [f"{v:.6f}" for v in cm.rows[a]] for a in cm.authors],
    )
    scape = analytics.scapegoat_index(records, k=2)
    run.write_json(
        f"reports/scapegoat_{tag}.json",
        {
            "model_tag": tag,
            "n_misattributed": scape.n_misattributed,
            "k": scape.k,
            "top_k_share": scape.top_k_share,
            "shares": [{"author": a, "count": c, "percent": pct} for a, c, pct in scape.shares],
        },
    )
    run.write_csv(
        f"reports/scapegoat_{tag}.csv",
        ["predicted_author", "count", "percent_of_misattributed"],
        [[a, c, f"{pct:.6f}"] for a, c, pct in scape.shares],
    )
    bins = analytics.length_bin_report(records)
    run.write_csv(
        f"reports/length_bins_{tag}.csv",
        ["bin", "n", "n_correct", "accuracy"],
        [[b.label, b.n, b.n_correct, f"{b.accuracy:.6f}"] for b in bins.bins],
    )
    all_report = reports["all"]
    gold_of_play = {r.play_id: r.gold_author for r in records}
    run.write_csv(
        f"reports/by_play_{tag}.csv",
        ["play_id", "gold_author", "n", "n_correct", "accuracy", "vote_winner", "vote_share"],
        [
            [
                pid,
                gold_of_play[pid],
                g.n,
                g.n_correct,
                f"{g.accuracy:.6f}",
                all_report.play_votes[pid].winner,
                f"{all_report.play_votes[pid].share:.6f}",
            ]
            for pid, g in sorted(all_report.by_play.items())
        ],
    )
    shares = analytics.attribution_shares(records, group_by="play")
    run.write_csv(
        f"reports/shares_by_play_{tag}.csv",
        ["play_id", "predicted_author", "percent"],
        [
            [pid, author, f"{pct:.6f}"]
            for pid in sorted(shares)
            for author, pct in sorted(shares[pid].items(), key=lambda kv: (-kv[1], kv[0]))
        ],
    )
    if fmt == "json":
        print(json.dumps({tag: _accuracy_payload(reports)}, sort_keys=True))
    elif fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["model_tag", "partition", "n", "accuracy", "ci95_halfwidth", "play_level_accuracy"])
        for name, rep in reports.items():
            writer.writerow([tag, name, rep.n, f"{rep.accuracy:.6f}", f"{rep.ci95_halfwidth:.6f}",
                             f"{rep.play_level_accuracy:.6f}"])
    else:
        print(_render_accuracy_text(tag, reports))
        if scape.shares:
            top = ", ".join(f"{a} {pct:.1f}%" for a, _, pct in scape.shares[: scape.k])
            print(f"  scapegoats (top {scape.k} of {scape.n_misattributed} misattributions, "
                  f"{scape.top_k_share:.1f}%): {top}")


def cmd_evaluate(run: Run, args: argparse.Namespace) -> None:
    split = run.split()
    if args.predictions:
        sources = [Path(args.predictions)]
    else:
        pred_dir = run.path("predictions")
        sources = sorted(pred_dir.glob("*.csv"))
        if not sources:
            raise StageError(f"no prediction CSVs under {pred_dir} (run 'attribute' first or pass --predictions)")
    for source in sources:
        records = read_predictions_csv(source)
        if records and all(r.partition == "timeline" for r in records):
            # timeline corpora live outside the split and their gold labels
            # are later-play authors; the timeline subcommand reports them
            print(f"evaluate: skipping timeline predictions {source.name} (use the 'timeline' subcommand)")
            continue
        # Merged long-text predictions carry synthetic per-play document ids,
        # so split membership does not apply to them.
        meta_path = Path(str(source) + ".meta.json")
        is_merged = meta_path.exists() and json.loads(meta_path.read_text("utf-8")).get("merged", False)
        by_tag: dict[str, list[PredictionRecord]] = {}
        for r in records:
            by_tag.setdefault(r.model_tag, []).append(r)
        for tag, tag_records in sorted(by_tag.items()):
            _evaluate_one(run, tag, tag_records, None if is_merged else split, args.format)


def cmd_uniqueness(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    split = run.split()
    cfg = run.doc["uniqueness"]
    train_samples = store.resolve(split.train)
    report = analytics.uniqueness_scores(
        train_samples, top_m=cfg["top_m"], excluded_terms=frozenset(cfg["excluded_terms"])
    )
    hinted = analytics.suggest_named_entities(train_samples) & set(report.words)
    unexcluded = sorted(hinted - set(cfg["excluded_terms"]))
    if unexcluded:
        print(f"uniqueness: note: possible named entities among the top words "
              f"(add to uniqueness.excluded_terms if so): {', '.join(unexcluded)}")
    run.write_json(
        "reports/uniqueness.json",
        {
            "top_m": report.top_m,
            "words": report.words,
            "excluded_terms": report.excluded_terms,
            "constant_words": report.constant_words,
            "author_scores": report.author_scores,
            "z_table": report.z_table,
        },
    )
    rows = [[a, f"{score:.6f}"] for a, score in sorted(report.author_scores.items(), key=lambda kv: (-kv[1], kv[0]))]
    run.write_csv("reports/uniqueness.csv", ["author", "summed_abs_z"], rows)
    print(f"uniqueness: {len(report.author_scores)} authors over top {report.top_m} words -> "
          f"{run.path('reports/uniqueness.json')}")


def cmd_trials(run: Run, args: argparse.Namespace) -> None:
    store = run.corpus()
    author_of_play = {pid: store.play_index[pid].author for pid in store.primary_ids}
    plays = analytics.play_texts_from_samples(store.samples_of(store.primary_ids), author_of_play)
    cfg = analytics.TrialConfig(n_trials=run.doc["trials"]["n_trials"], seed=run.seed)
    ucfg = run.doc["uniqueness"]
    report = analytics.synthetic_uniqueness_trials(
        plays, cfg, top_m=ucfg["top_m"], excluded_terms=frozenset(ucfg["excluded_terms"])
    )
    run.write_json(
        "reports/trials.json",
        {
            "n_trials": report.n_trials,
            "observed_rho": report.observed_rho,
            "rho_defined": report.rho_defined,
            "rhos": report.rhos,
            "synthetic_play_counts": report.synthetic_play_counts,
            "mean_synthetic_scores": report.mean_synthetic_scores,
        },
    )
    rows = [
        [f"{report.hist_edges[i]:.4f}", f"{report.hist_edges[i + 1]:.4f}", report.hist_counts[i]]
        for i in range(len(report.hist_counts))
    ]
    run.write_csv("reports/trials_hist.csv", ["bin_low", "bin_high", "count"], rows)
    print(
        f"trials: {report.n_trials} trials, observed rho={report.observed_rho:.4f} -> {run.path('reports/trials.json')}"
    )


def cmd_timeline(run: Run, args: argparse.Namespace) -> None:
    plays, samples_by_play, _ = _ingest_corpus(run, "timeline_manifest")
    century_of = {}
    for play in plays:
        if play.century is None:
            raise StageError(f"timeline play {play.play_id!r} has no century in the manifest")
        century_of[play.play_id] = play.century
    cfg = run.split_config()
    cfg = SplitConfig(
        train_per_play=cfg.train_per_play,
        val_per_play=cfg.val_per_play,
        test_in_per_play=cfg.test_in_per_play,
        test_out_per_play=cfg.test_out_per_play,
        disputed_per_play=run.doc["timeline_per_play"],
        seed=run.seed,
    )
    all_samples = [s for pid in sorted(samples_by_play) for s in samples_by_play[pid]]
    chosen = set(build_disputed_set(plays, all_samples, cfg))
    index = {s.sample_id: s for s in all_samples}
    samples = [index[sid] for sid in sorted(chosen)]

    tag = args.model or run.doc["timeline_model"]
    if args.predictions:
        records = read_predictions_csv(Path(args.predictions))
        tag = records[0].model_tag if records else tag
    else:
        model_doc = artifacts.read_json_artifact(run.path("models", f"{tag}.json"), "train")
        kind_loaded, xf, model = artifacts.model_from(model_doc)
        if kind_loaded == "cosine_delta":
            records = predict_records_cosine(model, xf, samples, "timeline", tag)
        else:
            records = predict_records_linear(model, xf, samples, "timeline", tag)
        _write_predictions(run, f"timeline_{tag}", records)

    report = analytics.timeline_report(records, century_of)
    run.write_json(
        f"reports/timeline_{tag}.json",
        {
            "model_tag": tag,
            "per_century": {str(c): shares for c, shares in report.per_century.items()},
            "n_source_authors": {str(c): n for c, n in report.n_source_authors.items()},
            "play_votes": {str(c): v for c, v in report.play_votes.items()},
            "n_plays": {str(c): n for c, n in report.n_plays.items()},
        },
    )
    rows = []
    for century, shares in sorted(report.per_century.items()):
        for author, share in sorted(shares.items()):
            rows.append([century, author, f"{share:.6f}"])
    run.write_csv(f"reports/timeline_{tag}.csv", ["century", "target_author", "mean_fraction"], rows)
    print(f"timeline: {len(records)} predictions across {len(report.per_century)} centuries -> "
          f"{run.path('reports/timeline_' + tag + '.json')}")


COMMANDS = {
    "ingest": cmd_ingest,
    "split": cmd_split,
    "pairs": cmd_pairs,
    "train": cmd_train,
    "attribute": cmd_attribute,
    "evaluate": cmd_evaluate,
    "uniqueness": cmd_uniqueness,
    "trials": cmd_trials,
    "timeline": cmd_timeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quillmark", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the run's JSON config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workdir", default=None, help="override the config workdir")
        p.add_argument("--predictions", default=None, help="external predictions CSV to ingest/evaluate")
        p.add_argument("--model", default=None, help="model tag (timeline subcommand)")
        p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = Run(Path(args.config), args.seed, args.workdir)
        COMMANDS[args.command](run, args)
    except (StageError, FileNotFoundError, KeyError, ValueError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"quillmark {args.command}: error: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
