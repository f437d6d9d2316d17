"""Command-line surface wiring the two pipeline phases.

Subcommands: extract, train, bundle, summarize, evaluate, metrics, grid-search,
validate-manifest. Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure
(non-convergence). Every command is read-only except its declared outputs, and
all randomness flows through --seed, echoed in every report.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import cascade as casc
from . import domain, evaluation, features, linsvm, summarizer
from .errors import ConvergenceError, DataError, SnowsumError, UndefinedMetricError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="snowsum", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_train_flags(sp):
        sp.add_argument("--C", type=float, default=10.0, help="regularization parameter (default 10)")
        sp.add_argument("--tol", type=float, default=1e-4, help="projected-gradient tolerance")
        sp.add_argument("--max-epochs", type=int, default=1000)
        sp.add_argument("--no-bias", action="store_true", help="disable bias augmentation")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("extract", help="extract baseline features into a store")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--images", help="directory of images (records get class code 0)")
    src.add_argument("--manifest", help="manifest file with per-image class codes")
    sp.add_argument("--root", help="base directory for manifest paths (default: manifest directory)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("train", help="train a presence or pose classifier from a store")
    sp.add_argument("--store", required=True)
    sp.add_argument("--task", choices=("presence", "pose"), required=True)
    sp.add_argument("--out", required=True)
    add_train_flags(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("bundle", help="bundle stage-1 and stage-2 models into a cascade")
    sp.add_argument("--stage1", required=True, help="presence model file")
    sp.add_argument("--stage2", required=True, help="pose model file")
    sp.add_argument("--tag", required=True, help="feature source tag both models were trained on")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bundle)

    sp = sub.add_parser("summarize", help="summarize a frame-feature store into event segments")
    sp.add_argument("--cascade", required=True)
    sp.add_argument("--store", required=True, help="per-frame feature store, ids = frame indices")
    sp.add_argument("--window", type=int, default=250)
    sp.add_argument("--fps", type=float, default=25.0)
    sp.add_argument("--no-partial-tail", action="store_true")
    sp.add_argument("--out", required=True, help="summary document path")
    sp.add_argument("--cutlist", help="cut list path (default: <out>.cuts)")
    sp.set_defaults(func=cmd_summarize)

    sp = sub.add_parser("evaluate", help="validate a classifier on a labeled store")
    sp.add_argument("--store", required=True)
    sp.add_argument("--task", choices=("presence", "pose"), required=True)
    sp.add_argument("--mode", choices=("kfold", "jackknife", "holdout"), required=True)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--fraction", type=float, default=0.2)
    sp.add_argument("--out", help="write the report here instead of stdout")
    add_train_flags(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("metrics", help="event-level TPR/PPV of a summary against ground truth")
    sp.add_argument("--summary", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("grid-search", help="cross-validated C grid search")
    sp.add_argument("--store", required=True)
    sp.add_argument("--task", choices=("presence", "pose"), required=True)
    sp.add_argument("--grid", default="1:20", help="comma list and/or lo:hi ranges (default 1:20)")
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--out")
    add_train_flags(sp)
    sp.set_defaults(func=cmd_grid_search)

    sp = sub.add_parser("validate-manifest", help="parse a manifest and report class balance")
    sp.add_argument("--manifest", required=True)
    sp.set_defaults(func=cmd_validate_manifest)

    return p


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        print(f"written {out_path}")
    else:
        sys.stdout.write(text)


def _load_store(path: str) -> features.FeatureStore:
    return features.read_store(Path(path).read_bytes())


def _train_cfg(args) -> linsvm.TrainConfig:
    return linsvm.TrainConfig(
        C=args.C,
        tolerance=args.tol,
        max_epochs=args.max_epochs,
        seed=args.seed,
        bias_augmented=not args.no_bias,
    )


def _task_data(store: features.FeatureStore, task: str):
    """Feature matrix and label codes for a training task.

    presence: umpire codes 0-4 merge into code 1 against non-umpire code 5.
    pose: the five umpire pose codes, non-umpire records excluded.
    """
    codes = store.class_codes.astype(np.int64)
    if task == "presence":
        if not np.any(codes == domain.NON_UMPIRE_CODE):
            raise DataError("presence training needs non-umpire records (code 5): missing non-umpire class")
        if not np.any(codes != domain.NON_UMPIRE_CODE):
            raise DataError("presence training needs umpire records (codes 0-4)")
        labels = np.where(codes == domain.NON_UMPIRE_CODE, domain.NON_UMPIRE_CODE, 1)
        return store.vectors.astype(np.float64), labels
    mask = codes != domain.NON_UMPIRE_CODE
    present = set(np.unique(codes[mask]).tolist())
    missing = sorted(set(range(5)) - present)
    if missing:
        names = ", ".join(domain.EventClass(m).label for m in missing)
        raise DataError(f"pose training is missing classes: {names}")
    return store.vectors[mask].astype(np.float64), codes[mask]


def cmd_extract(args) -> int:
    out_lines = ["SNOWEXTRACT 1"]
    records = []
    skipped = []

    if args.images:
        image_dir = Path(args.images)
        if not image_dir.is_dir():
            raise DataError(f"not a directory: {image_dir}")
        paths = sorted(p for p in image_dir.iterdir() if p.is_file())
        if not paths:
            raise DataError(f"no files in {image_dir}")
        jobs = [(str(p), p, 0) for p in paths]
    else:
        manifest = domain.parse_manifest(Path(args.manifest).read_bytes())
        root = Path(args.root) if args.root else Path(args.manifest).parent
        jobs = [(rec.id, root / rec.path, rec.class_code) for rec in manifest.records]
        if not jobs:
            raise DataError("manifest has no records")

    for i, (name, path, code) in enumerate(jobs):
        try:
            img = load_image(path)
            records.append((i, code, features.baseline_extract(img)))
        except (OSError, DataError) as exc:
            skipped.append(f"skipped {name}: {exc}")
    if not records:
        raise DataError("no readable images")

    store = features.build_store(features.BASELINE_DIM, features.BASELINE_TAG, records)
    Path(args.out).write_bytes(features.write_store(store))

    out_lines.append(f"images={len(jobs)} extracted={len(records)} skipped={len(skipped)}")
    out_lines.extend(skipped)
    out_lines.append(f"written {args.out}")
    print("\n".join(out_lines))
    return EXIT_OK


def load_image(path) -> features.RasterImage:
    from PIL import Image

    with Image.open(path) as im:
        return features.RasterImage(np.asarray(im.convert("RGB"), dtype=np.uint8))


def cmd_train(args) -> int:
    store = _load_store(args.store)
    X, labels = _task_data(store, args.task)
    cfg = _train_cfg(args)
    model = linsvm.train_ovr(X, labels, cfg)
    Path(args.out).write_bytes(linsvm.save_model(model))

    lines = [f"SNOWTRAIN 1 task={args.task} seed={args.seed}",
             f"store records={len(store)} dim={store.dim} tag={store.source_tag}",
             f"config C={cfg.C:g} tolerance={cfg.tolerance:g} max_epochs={cfg.max_epochs} "
             f"bias={int(cfg.bias_augmented)}"]
    stragglers = []
    for code, m in zip(model.classes, model.models):
        lines.append(f"class {code} epochs={m.epochs_run} violation={m.final_violation:.3e} "
                     f"converged={int(m.converged)}")
        if not m.converged:
            stragglers.append(code)
    lines.append(f"written {args.out}")
    print("\n".join(lines))
    if stragglers:
        raise ConvergenceError(
            f"classes {stragglers} did not reach tolerance {cfg.tolerance:g} "
            f"within {cfg.max_epochs} epochs")
    return EXIT_OK


def cmd_bundle(args) -> int:
    stage1 = linsvm.load_model(Path(args.stage1).read_bytes())
    stage2 = linsvm.load_model(Path(args.stage2).read_bytes())
    bundle = casc.CascadeModel(stage1=stage1, stage2=stage2, source_tag=args.tag)
    Path(args.out).write_bytes(casc.save_cascade(bundle))
    print(f"SNOWBUNDLE 1 tag={args.tag} dim={bundle.dim}")
    print(f"written {args.out}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    bundle = casc.load_cascade(Path(args.cascade).read_bytes())
    store = _load_store(args.store)
    if store.source_tag != bundle.source_tag:
        raise DataError(f"feature source mismatch: store {store.source_tag!r} "
                        f"vs cascade {bundle.source_tag!r}")
    if store.dim != bundle.dim:
        raise DataError(f"feature dim mismatch: store {store.dim} vs cascade {bundle.dim}")

    order = np.argsort(store.ids)
    ids = store.ids[order]
    if len(store) == 0 or ids[0] != 0 or not np.array_equal(ids, np.arange(len(store))):
        raise DataError("frame store ids must be contiguous from 0")

    cfg = summarizer.WindowConfig(
        window_frames=args.window,
        fps=args.fps,
        allow_partial_tail=not args.no_partial_tail,
    )
    decisions = casc.classify_frames(bundle, store.vectors[order].astype(np.float64))
    segments = summarizer.summarize_stream(enumerate(decisions), cfg)
    doc = summarizer.emit_summary(segments, cfg)

    cutlist_path = args.cutlist or (args.out + ".cuts")
    Path(args.out).write_text(doc.render(), encoding="utf-8")
    Path(cutlist_path).write_text(doc.cut_list(), encoding="utf-8")

    print(f"SNOWSUMMARIZE 1 frames={len(store)} window={args.window} fps={args.fps:g}")
    print(f"segments={len(segments)}")
    for e in doc.entries:
        print(f"segment {e.segment.start_frame}..{e.segment.end_frame} "
              f"{e.segment.event.label} {e.duration_seconds:.3f}s")
    print(f"written {args.out}")
    print(f"written {cutlist_path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    store = _load_store(args.store)
    X, labels = _task_data(store, args.task)
    cfg = _train_cfg(args)

    lines = [f"SNOWEVAL 1 mode={args.mode} task={args.task} seed={args.seed}",
             f"config C={cfg.C:g} tolerance={cfg.tolerance:g} max_epochs={cfg.max_epochs} "
             f"bias={int(cfg.bias_augmented)}"]
    if args.mode == "kfold":
        result = evaluation.kfold_cv(X, labels, cfg, k=args.k, seed=args.seed)
        lines.append(f"folds={args.k}")
        lines.extend(f"warning {w}" for w in result.warnings)
        for i, (acc, size) in enumerate(zip(result.fold_accuracies, result.fold_sizes)):
            lines.append(f"fold {i} size={size} accuracy={acc:.4f}")
        lines.append(f"mean_accuracy={result.mean_accuracy:.4f}")
    elif args.mode == "jackknife":
        acc = evaluation.jackknife(X, labels, cfg)
        lines.append(f"n={X.shape[0]}")
        lines.append(f"accuracy={acc:.4f}")
    else:
        acc, split = evaluation.holdout_accuracy(X, labels, cfg, test_fraction=args.fraction,
                                                 seed=args.seed)
        lines.append(f"fraction={args.fraction:g}")
        lines.extend(f"warning {w}" for w in split.warnings)
        lines.append(f"train_size={split.train_indices.size} test_size={split.test_indices.size}")
        lines.append(f"accuracy={acc:.4f}")

    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    doc = summarizer.parse_summary(Path(args.summary).read_text(encoding="utf-8"))
    truth = domain.parse_truth_file(Path(args.truth).read_bytes())
    counts = evaluation.match_events([e.segment for e in doc.entries], truth)
    lines = ["SNOWMET 1",
             f"tp={counts.tp} fp={counts.fp} fn={counts.fn}",
             f"tpr={evaluation.tpr(counts):.4f}",
             f"ppv={evaluation.ppv(counts):.4f}"]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _parse_grid(text: str) -> list[float]:
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                lo_text, _, hi_text = part.partition(":")
                lo, hi = int(lo_text), int(hi_text)
                if hi < lo:
                    raise DataError(f"bad grid range {part!r}")
                values.extend(float(v) for v in range(lo, hi + 1))
            else:
                values.append(float(part))
        except ValueError:
            raise DataError(f"bad grid value {part!r}") from None
    if not values:
        raise DataError(f"empty C grid {text!r}")
    return values


def cmd_grid_search(args) -> int:
    store = _load_store(args.store)
    X, labels = _task_data(store, args.task)
    result = linsvm.grid_search_C(X, labels, _parse_grid(args.grid), k=args.k, seed=args.seed,
                                  base_cfg=_train_cfg(args))
    lines = [f"SNOWGRID 1 task={args.task} seed={args.seed} k={args.k}"]
    for C, acc in result.table:
        lines.append(f"C={C:g} mean_accuracy={acc:.4f}")
    lines.append(f"best_C={result.best_C:g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_validate_manifest(args) -> int:
    manifest = domain.parse_manifest(Path(args.manifest).read_bytes())
    report = domain.check_class_balance(manifest)
    print(f"SNOWMANIFEST 1 name={manifest.name} records={len(manifest.records)}")
    for code in sorted(report.counts):
        print(f"class {code} count={report.counts[code]}")
    for w in report.warnings:
        print(f"warning {w}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SnowsumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
