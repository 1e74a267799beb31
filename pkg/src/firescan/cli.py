"""Command-line front end.

Subcommands: detect, combine, tile, evaluate, histogram. Shared conventions:
outputs land under --out, existing files are never clobbered without
--overwrite, and --threads (or the FIRESCAN_THREADS environment variable)
bounds the worker pool. Exit codes: 0 success, 1 data or processing error,
2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .combine import MaskSet, intersect, vote
from .detectors import DETECTOR_NAMES
from .errors import FirescanError
from .metrics import EvalAccumulator, accumulate, finalize, merge, reports_to_csv
from .pipeline import detect_scene
from .raster import load_scene, read_mask, write_mask
from .report import save_histogram_figure, save_metrics_figure
from .tiling import (
    DEFAULT_BUCKET_EDGES,
    fire_histogram,
    histogram_to_csv,
    read_manifest,
    split_manifest,
    tile_scene,
    write_manifest,
)


class UsageError(Exception):
    """Bad flag combination or value; maps to exit code 2."""


def _parse_csv_list(text: str, what: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError(f"empty {what} list: {text!r}")
    return items


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("FIRESCAN_THREADS")
        if not env:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"FIRESCAN_THREADS is not an integer: {env!r}") from None
    if value < 1:
        raise UsageError(f"thread count must be >= 1, got {value}")
    return value


def _guard_outputs(paths: list[Path], overwrite: bool) -> None:
    if overwrite:
        return
    for p in paths:
        if p.exists():
            raise FirescanError(f"output exists: {p} (pass --overwrite to replace)")


def cmd_detect(args: argparse.Namespace) -> int:
    algos = _parse_csv_list(args.algos, "detector")
    for algo in algos:
        if algo not in DETECTOR_NAMES:
            raise UsageError(f"unknown detector {algo!r}; choose from {', '.join(DETECTOR_NAMES)}")
    threads = _resolve_threads(args.threads)

    scene = load_scene(args.scene)
    out = Path(args.out)
    mask_paths = {algo: out / f"{scene.scene_id}_{algo}.tif" for algo in algos}
    report_path = out / f"{scene.scene_id}_report.txt"
    _guard_outputs(list(mask_paths.values()) + [report_path], args.overwrite)

    results = detect_scene(scene, algos, threads=threads)

    lines = [f"scene {scene.scene_id}"]
    for algo in algos:
        mask, report = results[algo]
        write_mask(mask_paths[algo], mask)
        lines.extend(report.lines())
        print(f"{algo}: {report.fire_count} fire pixels -> {mask_paths[algo]}")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text("\n".join(lines) + "\n")
    return 0


def cmd_combine(args: argparse.Namespace) -> int:
    masks = [read_mask(p) for p in args.masks]
    labels = [Path(p).stem for p in args.masks]
    mask_set = MaskSet(masks=masks, labels=labels)

    if args.mode == "vote":
        if not 1 <= args.k <= len(mask_set):
            raise UsageError(f"--k {args.k} out of range for {len(mask_set)} masks")
        combined = vote(mask_set, args.k)
        name = f"vote_k{args.k}.tif"
    else:
        combined = intersect(mask_set)
        name = "intersection.tif"

    out_path = Path(args.out) / name
    _guard_outputs([out_path], args.overwrite)
    write_mask(out_path, combined)
    print(f"{args.mode}: {int(combined.sum())} fire pixels -> {out_path}")
    return 0


def cmd_tile(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    masks = [read_mask(p) for p in args.masks]
    if args.labels:
        labels = _parse_csv_list(args.labels, "label")
        if len(labels) != len(masks):
            raise UsageError(f"{len(labels)} labels for {len(masks)} masks")
    else:
        labels = [Path(p).stem for p in args.masks]
    mask_set = MaskSet(masks=masks, labels=labels)

    out = Path(args.out)
    manifest_path = out / "manifest.csv"
    guard = [manifest_path] + sorted(out.glob(f"{scene.scene_id}_r*_c*.tif"))
    if args.split:
        guard += [out / f"manifest_{part}.csv" for part in ("train", "val", "test")]
    _guard_outputs(guard, args.overwrite)

    manifest = tile_scene(scene, mask_set, out, skip_empty=not args.keep_empty)
    write_manifest(manifest, manifest_path)
    print(f"{len(manifest.records)} patches -> {out}")

    if args.split:
        parts = _parse_csv_list(args.split, "split fraction")
        if len(parts) != 3:
            raise UsageError(f"--split needs three fractions, got {args.split!r}")
        try:
            fractions = tuple(float(p) for p in parts)
        except ValueError:
            raise UsageError(f"bad --split fractions: {args.split!r}") from None
        train, val, test = split_manifest(manifest, fractions, seed=args.seed)
        for part, m in (("train", train), ("val", val), ("test", test)):
            write_manifest(m, out / f"manifest_{part}.csv")
            print(f"  {part}: {len(m.records)} patches")
    return 0


def _evaluation_pairs(args: argparse.Namespace) -> list[tuple[str, list[tuple[Path, Path]]]]:
    pred = Path(args.pred)
    truth = Path(args.truth)
    if pred.is_file() and truth.is_file():
        return [(args.label or pred.stem, [(pred, truth)])]
    if not (pred.is_dir() and truth.is_dir()):
        raise FirescanError(
            f"--pred and --truth must both be files or both be directories: {pred}, {truth}"
        )

    if args.pred_labels:
        if not args.truth_label:
            raise UsageError("--pred-labels requires --truth-label")
        rows = []
        for label in _parse_csv_list(args.pred_labels, "pred label"):
            suffix = f"_{label}.tif"
            files = sorted(p for p in pred.glob(f"*{suffix}"))
            if not files:
                raise FirescanError(f"no mask files matching *{suffix} in {pred}")
            pairs = []
            for p in files:
                key = p.name[: -len(suffix)]
                t = truth / f"{key}_{args.truth_label}.tif"
                if not t.is_file():
                    raise FirescanError(f"missing truth mask for {key}: {t}")
                pairs.append((p, t))
            rows.append((label, pairs))
        return rows

    files = sorted(p for p in pred.glob("*.tif"))
    if not files:
        raise FirescanError(f"no .tif masks in {pred}")
    pairs = []
    for p in files:
        t = truth / p.name
        if not t.is_file():
            raise FirescanError(f"missing truth mask {t}")
        pairs.append((p, t))
    return [(args.label or "pred", pairs)]


def cmd_evaluate(args: argparse.Namespace) -> int:
    threads = _resolve_threads(args.threads)
    rows_spec = _evaluation_pairs(args)
    valid = read_mask(args.valid) if args.valid else None

    def _score_pair(pair: tuple[Path, Path]) -> EvalAccumulator:
        pred_path, truth_path = pair
        return accumulate(read_mask(pred_path), read_mask(truth_path), valid)

    rows = []
    for label, pairs in rows_spec:
        if threads == 1 or len(pairs) == 1:
            accs = [_score_pair(pair) for pair in pairs]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                accs = list(pool.map(_score_pair, pairs))
        total = EvalAccumulator()
        for acc in accs:
            total = merge(total, acc)
        rows.append((label, finalize(total)))

    csv_text = reports_to_csv(rows)
    sys.stdout.write(csv_text)

    if args.out:
        out = Path(args.out)
        csv_path = out / "metrics.csv"
        fig_path = out / "metrics.png"
        _guard_outputs([csv_path, fig_path], args.overwrite)
        out.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(csv_text)
        save_metrics_figure(rows, fig_path)
        print(f"wrote {csv_path} and {fig_path}", file=sys.stderr)
    return 0


def cmd_histogram(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    if args.edges:
        try:
            edges = tuple(int(e) for e in _parse_csv_list(args.edges, "edge"))
        except ValueError:
            raise UsageError(f"bad --edges: {args.edges!r}") from None
    else:
        edges = DEFAULT_BUCKET_EDGES
    hist = fire_histogram(manifest, args.label, edges)

    width = max(len(b.label) for b in hist.buckets)
    print(f"patches per fire-pixel count, mask '{hist.mask_label}'")
    for b in hist.buckets:
        print(f"  {b.label:<{width}}  {b.count}")

    if args.out:
        out = Path(args.out)
        csv_path = out / f"histogram_{args.label}.csv"
        fig_path = out / f"histogram_{args.label}.png"
        _guard_outputs([csv_path, fig_path], args.overwrite)
        out.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(histogram_to_csv(hist))
        save_histogram_figure(hist, fig_path)
        print(f"wrote {csv_path} and {fig_path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firescan",
        description="Active-fire detection, mask fusion, tiling, and evaluation for multispectral scenes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def _common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: FIRESCAN_THREADS or 1)")
        p.add_argument("--overwrite", action="store_true", help="replace existing outputs")

    p = sub.add_parser("detect", help="run detectors over a scene directory")
    p.add_argument("--scene", required=True, help="scene directory")
    p.add_argument("--algos", default=",".join(DETECTOR_NAMES), help="comma-separated detector names")
    _common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("combine", help="fuse mask files by intersection or voting")
    p.add_argument("--masks", required=True, nargs="+", help="input mask TIFFs")
    p.add_argument("--mode", required=True, choices=("intersection", "vote"))
    p.add_argument("--k", type=int, default=2, help="votes required in vote mode (default 2)")
    _common(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("tile", help="cut a scene and masks into 256x256 patches")
    p.add_argument("--scene", required=True, help="scene directory")
    p.add_argument("--masks", required=True, nargs="+", help="scene-level mask TIFFs")
    p.add_argument("--labels", default=None, help="comma-separated labels (default: mask file stems)")
    p.add_argument("--keep-empty", action="store_true", help="keep tiles with no valid pixels")
    p.add_argument("--split", default=None, help="train,val,test fractions, e.g. 0.4,0.1,0.5")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed for --split")
    _common(p)
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("evaluate", help="score predicted masks against reference masks")
    p.add_argument("--pred", required=True, help="predicted mask file or directory")
    p.add_argument("--truth", required=True, help="reference mask file or directory")
    p.add_argument("--valid", default=None, help="optional validity mask applied to every pair")
    p.add_argument("--label", default=None, help="row label for the report")
    p.add_argument("--pred-labels", default=None, help="comma-separated mask labels to score (directory mode)")
    p.add_argument("--truth-label", default=None, help="truth mask label paired with --pred-labels")
    _common(p, out_required=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("histogram", help="patch distribution per fire-pixel count")
    p.add_argument("--manifest", required=True, help="manifest CSV")
    p.add_argument("--label", required=True, help="mask label column to bucket")
    p.add_argument("--edges", default=None, help="comma-separated bucket edges (default 1,10,100,1000)")
    _common(p, out_required=False)
    p.set_defaults(func=cmd_histogram)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (FirescanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
