"""Command-line front end: tensor completion, synthetic data generation,
rank-detection benchmarks, and image inpainting.

Exit codes: 0 ok, 2 file format error, 3 shape mismatch, 4 numeric failure,
5 bad flags or invalid option values.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import io
from .errors import FormatError, NumericalError, ShapeMismatchError
from .metrics import MetricsReport, rse
from .mixture import fit_mp
from .model import PriorConfig, fit, max_init_rank
from .predict import predict_missing
from .synthetic import generate_synthetic, rank_detection_sweep
from .tensors import ObservationMask

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_SHAPE = 3
EXIT_NUMERIC = 4
EXIT_FLAGS = 5

_SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the bad-flags code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_FLAGS)


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}, expected e.g. 10x10x10")
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad shape {text!r}")
    return dims


def _parse_modes(text: str) -> list[int]:
    try:
        modes = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mode list {text!r}, expected e.g. 1,2")
    if any(m < 1 for m in modes):
        raise argparse.ArgumentTypeError("modes are 1-based")
    return modes


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump({"v": _SCHEMA_VERSION, **payload}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _add_fit_flags(p: argparse.ArgumentParser, default_rank: int | None) -> None:
    p.add_argument("--init-rank", type=int, default=default_rank,
                   help="initial number of components (before pruning)")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="relative lower-bound change stopping tolerance")
    p.add_argument("--init", choices=["svd", "random"], default="svd")
    p.add_argument("--mp", action="store_true",
                   help="smooth factor means over neighbouring rows")
    p.add_argument("--smooth-modes", type=_parse_modes, default=None,
                   metavar="1,2", help="1-based modes to smooth (with --mp)")
    p.add_argument("--seed", type=int, default=0)


def _config_from_args(args, shape) -> PriorConfig:
    init_rank = args.init_rank
    if init_rank is None:
        init_rank = min(max_init_rank(shape), 50)
    return PriorConfig(
        init_rank=init_rank,
        init_strategy=args.init,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    )


def _smooth_modes_from_args(args, ndim: int) -> list[int]:
    if not args.mp:
        return []
    modes = args.smooth_modes if args.smooth_modes is not None else [1, 2]
    internal = [m - 1 for m in modes]
    bad = [m + 1 for m in internal if not 0 <= m < ndim]
    if bad:
        raise ValueError(f"smooth modes {bad} out of range for an order-{ndim} tensor")
    return internal


def _run_fit(y, mask, cfg, smooth_modes):
    if smooth_modes:
        return fit_mp(y, mask, cfg, smooth_modes)
    return fit(y, mask, cfg)


def cmd_complete(args) -> int:
    y = io.read_tensor(args.input)
    mask = io.read_mask(args.mask)
    if y.shape != mask.shape:
        raise ShapeMismatchError(f"tensor {y.shape} != mask {mask.shape}")
    cfg = _config_from_args(args, y.shape)
    smooth = _smooth_modes_from_args(args, y.ndim)
    state, report = _run_fit(y, mask, cfg, smooth)
    mean, variance = predict_missing(state, mask)

    prefix = args.out_prefix
    io.write_tensor(f"{prefix}.completed.btf", mean)
    io.write_tensor(f"{prefix}.variance.btf", variance)
    _write_json(f"{prefix}.report.json", report.to_json_dict())

    if args.truth is not None:
        truth = io.read_tensor(args.truth)
        if truth.shape != y.shape:
            raise ShapeMismatchError(f"truth {truth.shape} != tensor {y.shape}")
        metrics = MetricsReport(
            rse_all=rse(mean, truth),
            rse_observed=rse(mean, truth, mask.flags),
            rse_missing=rse(mean, truth, ~mask.flags)
            if mask.missing_count > 0 else None,
            inferred_rank=report.inferred_rank,
        )
        _write_json(f"{prefix}.metrics.json", metrics.to_json_dict())

    print(f"inferred rank {report.inferred_rank} after {report.iterations} "
          f"iterations (E[tau]={report.e_tau:.4g})")
    return EXIT_OK


def cmd_synth(args) -> int:
    inst = generate_synthetic(
        args.shape, args.rank, args.missing, args.seed,
        snr_db=args.snr_db, noise_var=args.noise_var,
    )
    prefix = args.out_prefix
    io.write_tensor(f"{prefix}.y.btf", inst.observed)
    io.write_mask(f"{prefix}.mask.btm", inst.mask)
    io.write_tensor(f"{prefix}.x.btf", inst.truth)
    for n, factor in enumerate(inst.factors, start=1):
        io.write_tensor(f"{prefix}.factor{n}.btf", factor)
    _write_json(f"{prefix}.meta.json", {
        "shape": list(inst.truth.shape),
        "rank": inst.true_rank,
        "missing": args.missing,
        "observed": inst.mask.count,
        "snr_db": None if np.isinf(inst.snr_db) else inst.snr_db,
        "noise_variance": inst.noise_variance,
        "seed": inst.seed,
    })
    print(f"wrote {prefix}.y.btf ({inst.mask.count} observed entries)")
    return EXIT_OK


def cmd_bench_rank(args) -> int:
    try:
        with open(args.grid) as fh:
            grid = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read grid spec {args.grid}: {exc}")
    conditions = grid.get("conditions") if isinstance(grid, dict) else grid
    if not isinstance(conditions, list) or not conditions:
        raise FormatError(f"{args.grid}: expected a non-empty condition list")
    try:
        for cond in conditions:
            cond.setdefault("init_rank", 2 * int(cond["rank"]))
        base = PriorConfig(init_rank=int(conditions[0]["init_rank"]))
        summary = rank_detection_sweep(conditions, args.reps, base, seed=args.seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{args.grid}: malformed grid spec: {exc}")
    _write_json(args.out, summary.to_json_dict())
    print(summary.to_text())
    return EXIT_OK


def _load_image(path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise FormatError(f"cannot read image {path}: {exc}")


def cmd_inpaint(args) -> int:
    pixels = _load_image(args.image)
    height, width = pixels.shape[:2]

    if args.mask_image is not None:
        mask_pixels = _load_image(args.mask_image)
        if mask_pixels.shape[:2] != (height, width):
            raise ShapeMismatchError(
                f"mask image {mask_pixels.shape[:2]} != image {(height, width)}"
            )
        missing_px = (mask_pixels > 127).any(axis=2)
    else:
        missing_px = (pixels > args.missing_above).any(axis=2)

    values = pixels.astype(np.float64) / 255.0
    flags = np.repeat(~missing_px[:, :, None], 3, axis=2)
    mask = ObservationMask(flags)
    missing_ratio = mask.missing_count / flags.size

    if args.max_iters == 0:
        # pure decode/encode round trip, no completion
        out = np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(out).save(args.out)
        if args.report is not None:
            _write_json(args.report, {
                "inferred_rank": 0, "iterations": 0, "elbo_trace": [],
                "e_tau": 1.0, "converged": False, "wall_ms": 0.0,
            })
        return EXIT_OK

    init_rank = args.init_rank
    if init_rank is None:
        init_rank = 50 if missing_ratio >= 0.9 else 100
        init_rank = min(init_rank, max_init_rank(values.shape))
    cfg = PriorConfig(
        init_rank=init_rank,
        init_strategy=args.init,
        max_iters=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    )
    smooth = _smooth_modes_from_args(args, 3)
    state, report = _run_fit(values, mask, cfg, smooth)

    recon = np.clip(np.asarray(predict_missing(state, mask)[0]), 0.0, 1.0)
    out = np.clip(np.rint(recon * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(out).save(args.out)
    if args.report is not None:
        _write_json(args.report, report.to_json_dict())
    print(f"inpainted {args.image} ({missing_ratio:.1%} missing, "
          f"rank {report.inferred_rank})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bayescp",
                     description="Bayesian CP completion of incomplete tensors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", parents=[], help="complete a tensor file")
    p.add_argument("--input", required=True, help="observed tensor (BTF1)")
    p.add_argument("--mask", required=True, help="observation mask (BTM1)")
    p.add_argument("--truth", default=None, help="ground-truth tensor (BTF1)")
    p.add_argument("--out-prefix", required=True)
    _add_fit_flags(p, default_rank=None)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("synth", help="generate a synthetic low-rank instance")
    p.add_argument("--shape", type=_parse_shape, required=True, metavar="I1xI2x...")
    p.add_argument("--rank", type=int, required=True)
    noise = p.add_mutually_exclusive_group(required=True)
    noise.add_argument("--snr-db", type=float, default=None)
    noise.add_argument("--noise-var", type=float, default=None)
    p.add_argument("--missing", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench-rank", help="rank-detection benchmark over a grid")
    p.add_argument("--grid", required=True, help="JSON condition grid")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="summary JSON path")
    p.set_defaults(func=cmd_bench_rank)

    p = sub.add_parser("inpaint", help="complete missing pixels of an image")
    p.add_argument("--image", required=True, help="8-bit RGB image (e.g. PNG)")
    p.add_argument("--mask-image", default=None,
                   help="image whose bright pixels (>127) mark missing ones")
    p.add_argument("--missing-above", type=int, default=200,
                   help="without --mask-image: pixels with any channel above "
                        "this value are treated as missing")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--report", default=None, help="fit report JSON path")
    _add_fit_flags(p, default_rank=None)
    p.set_defaults(func=cmd_inpaint)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ShapeMismatchError as exc:
        print(f"shape error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except NumericalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, FileNotFoundError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:
        print(f"bad flags: {exc}", file=sys.stderr)
        return EXIT_FLAGS


if __name__ == "__main__":
    sys.exit(main())
