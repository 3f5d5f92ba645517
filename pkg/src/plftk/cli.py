"""Command-line entry point.

Subcommands: ``split`` (manifest split management), ``pseudolabel``
(teacher detections to YOLO label files), ``eval`` (COCO-protocol
evaluation, optionally stratified or in pseudo-label fidelity mode) and
``bench`` (latency log aggregation).

Contract: reports go to stdout (or a file via --out), diagnostics to
stderr. Exit codes: 0 success, 1 empty or degenerate input, 2 usage or
validation error. An optional JSON config file supplies any flag value
not given on the command line; explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import annotations, benchlat, evaluator, pseudolabel, stratify
from .errors import EmptyInputError, RangeError, ToolkitError

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_USAGE = 2


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; fills in flags not given explicitly")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker parallelism cap (default: PLF_THREADS or machine cores)")
    sub.add_argument("--out", default=None, help="write the report to this file instead of stdout")
    sub.add_argument("--format", choices=("json", "table"), default=None,
                     help="report format (default: table)")


def _merge_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise RangeError(f"config file {args.config} must hold a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            print(f"warning: ignoring unknown config key '{key}'", file=sys.stderr)
            continue
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolve_threads(args: argparse.Namespace) -> int:
    value = args.threads
    if value is None:
        env = os.environ.get("PLF_THREADS")
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise RangeError(f"PLF_THREADS must be an integer, got '{env}'") from None
        else:
            value = os.cpu_count() or 1
    value = int(value)
    if value < 1:
        raise RangeError(f"--threads must be at least 1, got {value}")
    return value


def _require_args(args: argparse.Namespace, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        raise RangeError("missing required option(s): " + ", ".join(f"--{n}" for n in missing))


def _filter_config(args: argparse.Namespace) -> pseudolabel.FilterConfig:
    return pseudolabel.FilterConfig(
        score_threshold=0.4 if args.score_threshold is None else float(args.score_threshold),
        nms_iou=None if args.nms_iou is None else float(args.nms_iou),
        max_per_image=None if args.max_per_image is None else int(args.max_per_image),
    )


def _eval_config(args: argparse.Namespace) -> evaluator.EvalConfig:
    kwargs = {}
    if getattr(args, "iou_thresholds", None) is not None:
        raw = args.iou_thresholds
        parts = raw.split(",") if isinstance(raw, str) else raw
        kwargs["iou_thresholds"] = tuple(float(p) for p in parts)
    if getattr(args, "recall_points", None) is not None:
        kwargs["recall_points"] = int(args.recall_points)
    if getattr(args, "max_dets", None) is not None:
        kwargs["max_dets"] = int(args.max_dets)
    return evaluator.EvalConfig(**kwargs)


def cmd_split(args: argparse.Namespace) -> int:
    _require_args(args, ["manifest", "val-count", "seed"])
    manifest = annotations.parse_manifest(args.manifest)
    updated = annotations.split_dataset(manifest, int(args.val_count), int(args.seed))
    _emit(_json_text(annotations.manifest_to_json(updated)), args.out)
    counts = updated.split_counts()
    print(
        f"split: train {counts[annotations.Split.TRAIN]} / val {counts[annotations.Split.VAL]}"
        f" / test {counts[annotations.Split.TEST]}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_pseudolabel(args: argparse.Namespace) -> int:
    _require_args(args, ["predictions", "manifest", "labels-dir"])
    manifest = annotations.parse_manifest(args.manifest)
    raw = annotations.parse_predictions(args.predictions, manifest)
    cfg = _filter_config(args)
    kept = pseudolabel.apply_filters(raw, cfg)
    split = annotations.Split(args.split) if args.split else None
    written = annotations.write_yolo_labels(kept, manifest, args.labels_dir, split=split)
    _emit(
        f"kept {len(kept)} / dropped {len(raw) - len(kept)}\n"
        f"wrote {written} label files to {args.labels_dir}\n",
        args.out,
    )
    return EXIT_OK


def _eval_report(args: argparse.Namespace, fmt: str) -> tuple[str, bool]:
    manifest: annotations.DatasetManifest
    gt_manifest, gts = annotations.parse_ground_truth(args.ground_truth)
    manifest = annotations.parse_manifest(args.manifest) if args.manifest else gt_manifest
    dets = annotations.parse_predictions(args.predictions, manifest)
    if args.fidelity:
        dets = pseudolabel.apply_filters(dets, _filter_config(args))
    cfg = _eval_config(args)
    overall = evaluator.evaluate(dets, gts, manifest, cfg)
    if not args.groups:
        if fmt == "json":
            return _json_text(evaluator.result_to_json_dict(overall)), overall.empty_ground_truth
        return evaluator.render_result_table(overall), overall.empty_ground_truth
    assignment = stratify.load_groups(args.groups, manifest)
    missing = stratify.unassigned_images(assignment, manifest)
    if missing:
        print(f"warning: {len(missing)} images have no group assignment", file=sys.stderr)
    per_group = stratify.evaluate_per_group(dets, gts, manifest, assignment, cfg)
    if fmt == "json":
        doc = {
            "overall": evaluator.result_to_json_dict(overall),
            "groups": [
                {
                    "group": gid,
                    "name": assignment.info_for(gid).name,
                    "images": len(assignment.images_for(gid)),
                    "result": evaluator.result_to_json_dict(res),
                }
                for gid, res in per_group
            ],
        }
        return _json_text(doc), overall.empty_ground_truth
    rows = [("all", overall.counts.num_images, overall)]
    rows += [(str(gid), len(assignment.images_for(gid)), res) for gid, res in per_group]
    return stratify.render_group_table(rows), overall.empty_ground_truth


def cmd_eval(args: argparse.Namespace) -> int:
    _require_args(args, ["predictions", "ground-truth"])
    fmt = args.format or "table"
    report, empty_gt = _eval_report(args, fmt)
    _emit(report, args.out)
    if empty_gt:
        print("no ground truth annotations; metrics undefined", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    _require_args(args, ["log"])
    records = benchlat.read_latency_log(args.log)
    if not records:
        raise EmptyInputError("no records")
    summaries = benchlat.aggregate(records)
    compare = None
    if args.compare:
        name_a, name_b = args.compare
        by_name = {s.model_name: s for s in summaries}
        for name in (name_a, name_b):
            if name not in by_name:
                raise RangeError(f"--compare references unknown model '{name}'")
        compare = (by_name[name_a], by_name[name_b])
    fmt = args.format or "table"
    if fmt == "json":
        doc: dict = {"summaries": [benchlat.summary_to_json_dict(s) for s in summaries]}
        if compare:
            doc["speedup"] = {
                "numerator": compare[0].model_name,
                "denominator": compare[1].model_name,
                "ratio": benchlat.speedup(*compare),
            }
        _emit(_json_text(doc), args.out)
    else:
        text = benchlat.render_latency_table(summaries)
        if compare:
            text += benchlat.render_speedup_line(*compare) + "\n"
        _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plftk",
        description="Pseudo-label dataset tooling and COCO-protocol detection evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_split = sub.add_parser("split", help="carve a validation split out of the train split")
    p_split.add_argument("--manifest", help="dataset manifest JSON")
    p_split.add_argument("--val-count", dest="val_count", type=int, default=None,
                         help="number of train images to move to val")
    p_split.add_argument("--seed", type=int, default=None, help="sampling seed")
    _common_flags(p_split)
    p_split.set_defaults(func=cmd_split)

    p_pl = sub.add_parser("pseudolabel", help="filter teacher detections into YOLO label files")
    p_pl.add_argument("--predictions", help="teacher predictions JSON")
    p_pl.add_argument("--manifest", help="dataset manifest JSON")
    p_pl.add_argument("--labels-dir", dest="labels_dir", help="output label directory")
    p_pl.add_argument("--score-threshold", dest="score_threshold", type=float, default=None,
                      help="confidence cut, inclusive (default 0.4)")
    p_pl.add_argument("--nms-iou", dest="nms_iou", type=float, default=None,
                      help="optional duplicate-suppression IoU threshold (default off)")
    p_pl.add_argument("--max-per-image", dest="max_per_image", type=int, default=None,
                      help="optional per-image detection cap (default unlimited)")
    p_pl.add_argument("--split", choices=[s.value for s in annotations.Split], default=None,
                      help="restrict label files to one split (default: all images)")
    _common_flags(p_pl)
    p_pl.set_defaults(func=cmd_pseudolabel)

    p_eval = sub.add_parser("eval", help="evaluate predictions with the COCO protocol")
    p_eval.add_argument("--predictions", help="predictions JSON")
    p_eval.add_argument("--ground-truth", dest="ground_truth", help="ground truth JSON")
    p_eval.add_argument("--manifest", default=None,
                        help="manifest sidecar overriding image metadata (optional)")
    p_eval.add_argument("--groups", default=None, help="group mapping JSON for a stratified report")
    p_eval.add_argument("--fidelity", action="store_true",
                        help="audit pseudo-labels: apply the confidence filter before evaluating")
    p_eval.add_argument("--score-threshold", dest="score_threshold", type=float, default=None,
                        help="fidelity-mode confidence cut (default 0.4)")
    p_eval.add_argument("--nms-iou", dest="nms_iou", type=float, default=None,
                        help="fidelity-mode duplicate suppression (default off)")
    p_eval.add_argument("--max-per-image", dest="max_per_image", type=int, default=None,
                        help="fidelity-mode per-image cap (default unlimited)")
    p_eval.add_argument("--iou-thresholds", dest="iou_thresholds", default=None,
                        help="comma-separated IoU thresholds (default 0.50:0.05:0.95)")
    p_eval.add_argument("--recall-points", dest="recall_points", type=int, default=None,
                        help="recall grid size for interpolation (default 101)")
    p_eval.add_argument("--max-dets", dest="max_dets", type=int, default=None,
                        help="per-image detection cap before matching (default 100)")
    _common_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="aggregate an inference latency log")
    p_bench.add_argument("--log", help="latency log (JSON Lines)")
    p_bench.add_argument("--compare", nargs=2, metavar=("SLOW", "FAST"), default=None,
                         help="append the forward-pass speedup of FAST relative to SLOW")
    _common_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _merge_config(args)
        args.threads = _resolve_threads(args)
        return args.func(args)
    except EmptyInputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_EMPTY
    except (ToolkitError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
