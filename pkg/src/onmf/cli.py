"""File-in/file-out command line interface.

Subcommands cover the three pipelines: `ts-learn` / `ts-inpaint` for time
series CSVs, `img-train` / `img-compress` / `img-restore` for PNG images,
`video-dict` / `video-changepoint` for directories of frame PNGs, and
`render-dict` for atom-grid figures.  All randomness flows from `--seed`,
so a rerun with identical inputs produces byte-identical outputs.

Exit codes: 0 success, 2 malformed input (parse errors carry a line
number), 3 insufficient data, 4 dimension or format mismatch.
"""

import argparse
import csv
import os
import sys

import numpy as np

from . import imaging, timeseries, video
from .errors import (
    CoverageError,
    DegenerateDictionaryError,
    FormatError,
    InsufficientDataError,
    InvalidAggregateError,
    InvalidRankError,
    ParseError,
    ShapeError,
)
from .persistence import load_state, save_state
from .rendering import render_dictionary_grid
from .timeseries import HankelSpec

EXIT_PARSE = 2
EXIT_INSUFFICIENT = 3
EXIT_MISMATCH = 4


def _out_prefix(args):
    if args.out:
        return args.out
    return os.path.splitext(args.input)[0]


def _ts_meta(args, ensemble, extra=()):
    meta = {
        "format": "onmf-timeseries-run-1",
        "k": args.k,
        "N": args.N,
        "r": args.r,
        "lambda": args.lam,
        "seed": args.seed,
        "stride": args.stride,
        "sentinel": args.sentinel,
        "offset": ensemble.offset,
        "series": ",".join(ensemble.names),
    }
    meta.update(extra)
    return meta


def _run_ts(args):
    ensemble = timeseries.load_series_csv(
        args.input, sentinel=args.sentinel, offset=args.offset
    )
    spec = HankelSpec(k=args.k, N=args.N, r=args.r)
    fit = timeseries.online_temporal_fit(
        ensemble, spec, lam=args.lam, seed=args.seed, stride=args.stride
    )
    return ensemble, spec, fit


def cmd_ts_learn(args):
    ensemble, spec, fit = _run_ts(args)
    prefix = _out_prefix(args)
    save_state(prefix + ".dict", fit.state)
    recon = timeseries.rolling_reconstruct(ensemble, fit.snapshots, spec, lam=args.lam)
    timeseries.write_series_csv(
        prefix + "_recon.csv", recon.values, ensemble.names, ensemble.times
    )
    timeseries.write_metadata(prefix + ".meta", _ts_meta(args, ensemble))
    print(
        f"ts-learn: dictionary {fit.state.d}x{fit.state.r} after {fit.state.t} steps"
        f" -> {prefix}.dict"
    )
    return 0


def cmd_ts_inpaint(args):
    ensemble, spec, fit = _run_ts(args)
    prefix = _out_prefix(args)
    save_state(prefix + ".dict", fit.state)
    filled = timeseries.fill_missing(ensemble, fit.snapshots, spec, lam=args.lam)
    timeseries.write_series_csv(
        prefix + "_filled.csv", filled.values, ensemble.names, ensemble.times
    )
    timeseries.write_metadata(
        prefix + ".meta",
        _ts_meta(args, ensemble, extra={"filled_entries": int(filled.filled.sum())}),
    )
    print(
        f"ts-inpaint: filled {int(filled.filled.sum())} entries -> {prefix}_filled.csv"
    )
    return 0


def cmd_img_train(args):
    images = [imaging.load_image(p) for p in args.inputs]
    state = imaging.train_patch_dictionary(
        images, p=args.p, r=args.r, batches=args.batches,
        batch_size=args.batch_size, lam=args.lam, seed=args.seed,
    )
    save_state(args.out, state)
    print(f"img-train: dictionary {state.d}x{state.r} -> {args.out}")
    return 0


def _check_patch_dict(state_W, p):
    if state_W.shape[0] != 3 * p * p:
        raise ShapeError(
            f"dictionary has {state_W.shape[0]} rows, but p={p} needs {3 * p * p}"
        )


def cmd_img_compress(args):
    image = imaging.load_image(args.input)
    W = load_state(args.dict).W
    _check_patch_dict(W, args.p)
    out = imaging.compress_image(image, W, p=args.p, overlap=args.overlap, lam=args.lam)
    imaging.save_image(args.out, out)
    print(f"img-compress: PSNR {imaging.psnr(image, out):.2f} dB -> {args.out}")
    return 0


def cmd_img_restore(args):
    gray = imaging.load_image(args.input, gray=True)
    labels = imaging.load_labels(args.labels)
    dicts = {}
    for spec in args.dict:
        cls, _, path = spec.partition("=")
        if not path:
            raise ParseError(f"--dict expects CLASS=PATH, got {spec!r}")
        dicts[int(cls)] = load_state(path).W
    for cls, W in dicts.items():
        _check_patch_dict(W, args.p)
    out = imaging.restore_color(
        gray, labels, dicts, p=args.p, overlap=args.overlap, lam=args.lam
    )
    imaging.save_image(args.out, out)
    print(f"img-restore: {len(dicts)} class dictionaries -> {args.out}")
    return 0


def _write_atoms_and_grid(dirpath, W, atoms, frame_shape):
    video.save_atoms(dirpath, atoms)
    grid = render_dictionary_grid(W, "frame", frame_shape=frame_shape)
    grid_path = os.path.join(dirpath, "grid.png")
    grid.save(grid_path, format="PNG")
    return grid_path


def cmd_video_dict(args):
    stack = video.load_frame_dir(args.input)
    h, w, T = stack.shape
    snapshots = []
    if args.snapshots:
        snapshots = [int(s) for s in args.snapshots.split(",") if s]
    result = video.learn_spatial_dictionary(
        stack, r=args.r, mode=args.mode, iters=args.iters,
        lam=args.lam, seed=args.seed, snapshots=snapshots,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    _write_atoms_and_grid(args.out_dir, result.W, result.atoms, (h, w))
    for frames_seen, W_snap, atoms in result.snapshots:
        sub = os.path.join(args.out_dir, f"snapshot_{frames_seen:04d}")
        _write_atoms_and_grid(sub, W_snap, atoms, (h, w))
    print(
        f"video-dict: {result.W.shape[1]} atoms from {T} frames"
        f" ({args.mode}) -> {args.out_dir}"
    )
    return 0


def cmd_video_changepoint(args):
    stack = video.load_frame_dir(args.input)
    report = video.detect_changepoint(stack, r=args.r, iters=args.iters, seed=args.seed)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["boundary", "score"])
        for t, score in enumerate(report.scores):
            writer.writerow([t, repr(float(score))])
    timeseries.write_metadata(
        args.out + ".meta",
        {
            "format": "onmf-changepoint-report-1",
            "changepoint": report.changepoint,
            "max_score": repr(float(report.scores[report.changepoint])),
            "significant": report.significant,
            "frames": stack.shape[2],
            "r": args.r,
            "iters": args.iters,
            "seed": args.seed,
        },
    )
    print(
        f"video-changepoint: boundary {report.changepoint}"
        f" (score {report.scores[report.changepoint]:.4f},"
        f" significant={report.significant}) -> {args.out}"
    )
    return 0


def cmd_render_dict(args):
    W = load_state(args.dict).W
    frame_shape = None
    if args.frame_shape:
        h, _, w = args.frame_shape.partition("x")
        frame_shape = (int(h), int(w))
    grid = render_dictionary_grid(
        W,
        args.layout,
        patch_side=args.p,
        frame_shape=frame_shape,
        series_count=args.series,
        window=args.window,
        cols=args.cols,
    )
    grid.save(args.out, format="PNG")
    print(f"render-dict: {W.shape[1]} atoms ({args.layout}) -> {args.out}")
    return 0


def _add_ts_args(sp):
    sp.add_argument("input", help="input CSV (time,series_1,...,series_m)")
    sp.add_argument("--k", type=int, required=True, help="window length")
    sp.add_argument("--N", type=int, required=True, help="buffer length")
    sp.add_argument("--r", type=int, required=True, help="atom count")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.1,
                    help="L1 weight for coding (default 0.1)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stride", type=int, default=1,
                    help="ticks between online steps (default 1)")
    sp.add_argument("--sentinel", type=float, default=timeseries.DEFAULT_SENTINEL,
                    help="value marking missing entries (default -100)")
    sp.add_argument("--offset", type=float, default=None,
                    help="nonnegativity offset (default: from the data)")
    sp.add_argument("--out", default=None, help="output prefix (default: input stem)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="onmf",
        description="Online nonnegative matrix factorization pipelines for "
                    "time series, images, and video.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ts-learn", help="learn a temporal dictionary and "
                        "write the rolling reconstruction")
    _add_ts_args(sp)
    sp.set_defaults(func=cmd_ts_learn)

    sp = sub.add_parser("ts-inpaint", help="learn online and fill in missing entries")
    _add_ts_args(sp)
    sp.set_defaults(func=cmd_ts_inpaint)

    sp = sub.add_parser("img-train", help="learn a patch dictionary from images")
    sp.add_argument("inputs", nargs="+", help="training PNGs")
    sp.add_argument("--p", type=int, required=True, help="patch side in pixels")
    sp.add_argument("--r", type=int, required=True, help="atom count")
    sp.add_argument("--batches", type=int, default=30)
    sp.add_argument("--batch-size", type=int, default=1000)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output dictionary file")
    sp.set_defaults(func=cmd_img_train)

    sp = sub.add_parser("img-compress", help="compress an image against a dictionary")
    sp.add_argument("input", help="input PNG")
    sp.add_argument("--dict", required=True, help="dictionary file")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--overlap", type=int, default=15,
                    help="patch overlap in pixels (default 15)")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.1)
    sp.add_argument("--out", required=True, help="output PNG")
    sp.set_defaults(func=cmd_img_compress)

    sp = sub.add_parser("img-restore", help="restore color to a grayscale image "
                        "using labeled class dictionaries")
    sp.add_argument("input", help="grayscale PNG")
    sp.add_argument("--labels", required=True, help="CSV of row,col,class per anchor")
    sp.add_argument("--dict", action="append", required=True, metavar="CLASS=PATH",
                    help="class dictionary (repeatable)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--overlap", type=int, default=9)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.1)
    sp.add_argument("--out", required=True, help="output PNG")
    sp.set_defaults(func=cmd_img_restore)

    sp = sub.add_parser("video-dict", help="learn spatial dictionary atoms from frames")
    sp.add_argument("input", help="directory of grayscale frame PNGs")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--mode", choices=("offline", "online"), default="offline")
    sp.add_argument("--iters", type=int, default=300, help="offline update steps")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--snapshots", default="",
                    help="comma-separated frame counts to snapshot (online mode)")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_video_dict)

    sp = sub.add_parser("video-changepoint", help="scan for the strongest "
                        "temporal dictionary change")
    sp.add_argument("input", help="directory of grayscale frame PNGs")
    sp.add_argument("--r", type=int, default=5)
    sp.add_argument("--iters", type=int, default=300)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="report CSV (boundary,score)")
    sp.set_defaults(func=cmd_video_changepoint)

    sp = sub.add_parser("render-dict", help="render dictionary atoms as a tiled image")
    sp.add_argument("--dict", required=True, help="dictionary file")
    sp.add_argument("--layout", choices=("patch", "frame", "temporal"), required=True)
    sp.add_argument("--p", type=int, default=None, help="patch side (patch layout)")
    sp.add_argument("--frame-shape", default=None, help="HxW (frame layout)")
    sp.add_argument("--series", type=int, default=None,
                    help="series count (temporal layout)")
    sp.add_argument("--window", type=int, default=None,
                    help="window length (temporal layout)")
    sp.add_argument("--cols", type=int, default=None, help="tiles per row")
    sp.add_argument("--out", required=True, help="output PNG")
    sp.set_defaults(func=cmd_render_dict)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"onmf: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InsufficientDataError as exc:
        print(f"onmf: insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (
        ShapeError,
        FormatError,
        CoverageError,
        InvalidRankError,
        DegenerateDictionaryError,
        InvalidAggregateError,
    ) as exc:
        print(f"onmf: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
