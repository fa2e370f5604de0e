"""Command-line interface: filter, decompose, reconstruct, histogram, noise-sim, verify.

Exit codes: 0 success, 1 usage or parse error, 2 invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .checks import format_matrix, run_suite
from .connectivity import Connectivity, GridImage
from .dpt import PRESETS, PulseFilter, dpt_decompose, pulse_histogram, reconstruct, verify_structure
from .operators import Op, OperatorKind, apply
from .tv import tv_split, verify_dpt_tv

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2

# size thresholds quoted for the noise experiment
SMALL_PULSE = 20
LARGE_PULSE = 100


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    connectivity: str = "4"
    seed: int = 0
    min_size: int = 1
    max_size: Optional[int] = None
    sign: str = "both"

    def __post_init__(self):
        if self.min_size < 0 or (self.max_size is not None and self.max_size < self.min_size):
            raise UsageError("size bounds must satisfy 0 <= min-size <= max-size")
        if self.sign not in ("pos", "neg", "both"):
            raise UsageError(f"--sign must be pos, neg or both, not {self.sign!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")

    @property
    def conn(self) -> Connectivity:
        return Connectivity.from_name(self.connectivity)


def noise_image(height: int, width: int, seed: int) -> GridImage:
    """Uniform integers in [0, 255] from numpy's PCG64 generator (rejection-free bounded draws)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return GridImage(rng.integers(0, 256, size=(height, width), dtype=np.int64), 0)


def noise_statistics(hist, small: int = SMALL_PULSE, large: int = LARGE_PULSE) -> tuple[float, float]:
    total = sum(c for _, c in hist)
    if not total:
        return 0.0, 0.0
    le_small = sum(c for s, c in hist if s <= small) / total
    gt_large = sum(c for s, c in hist if s > large) / total
    return le_small, gt_large


def _read_image(path) -> GridImage:
    try:
        return io.read_pgm(path)
    except (OSError, io.PgmError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _source_maxval(path) -> int:
    return io.read_pgm_raw(path).maxval


def cmd_filter(args) -> int:
    f = _read_image(args.input)
    cfg = CliConfig(connectivity=args.connectivity)
    kind = OperatorKind(Op(args.op), args.n)
    out = apply(kind, f, cfg.conn)
    meta = io.write_pgm(out, args.output, mode=args.mode, maxval=_source_maxval(args.input))
    report = tv_split(f, out, str(kind))
    print(f"TV input {report.tv_input} = output {report.tv_operator_part} + residual "
          f"{report.tv_residual_part}: {'preserved' if report.preserved else 'NOT preserved'}")
    if meta["clipped"]:
        print(f"warning: {meta['clipped']} pixels clipped", file=sys.stderr)
    return EXIT_OK if report.preserved else EXIT_INVARIANT


def cmd_decompose(args) -> int:
    f = _read_image(args.input)
    cfg = CliConfig(connectivity=args.connectivity)
    d = dpt_decompose(f, cfg.conn, max_n=args.max_n)
    io.write_pulses(d, args.output, extra={"maxval": _source_maxval(args.input)})
    for size, count in pulse_histogram(d):
        print(f"size {size}: {count}")
    print(f"{d.num_pulses} pulses, residual {d.residual}")
    status = EXIT_OK
    report = verify_structure(d, f)
    for line in report.lines():
        print(line)
    tv = verify_dpt_tv(d, f)
    print(("PASS  " if tv.preserved else "FAIL  ") + f"TV additivity: {tv}")
    if not report.passed or not tv.preserved:
        status = EXIT_INVARIANT
    if not d.complete:
        print(f"warning: decomposition stopped at n={args.max_n} before the residual became constant; "
              f"residual image written to {io.residual_path(args.output)}", file=sys.stderr)
    return status


def _filter_from_args(args) -> PulseFilter:
    if args.preset:
        base = PRESETS[args.preset]
        include = base.include_residual if args.include_residual is None else args.include_residual
        return PulseFilter(base.min_size, base.max_size, args.sign or base.sign, include)
    cfg = CliConfig(min_size=args.min_size, max_size=args.max_size, sign=args.sign or "both")
    include = True if args.include_residual is None else args.include_residual
    return PulseFilter(cfg.min_size, cfg.max_size, cfg.sign, include)


def cmd_reconstruct(args) -> int:
    try:
        d = io.read_pulses(args.pulses)
    except (OSError, io.PulseFormatError, io.PgmError) as exc:
        raise UsageError(str(exc)) from exc
    keep = _filter_from_args(args)
    selected = sum(1 for p in d.pulses() if keep(p))
    if not selected:
        print("warning: no pulses selected; writing a constant image", file=sys.stderr)
    out = reconstruct(d, keep)
    maxval = args.maxval or d.meta.get("maxval")
    meta = io.write_pgm(out, args.output, mode=args.mode, maxval=maxval)
    print(f"{selected} of {d.num_pulses} pulses summed")
    if meta["offset"]:
        print(f"offset {meta['offset']} added (recorded in {io.sidecar_path(args.output)})")
    if meta["clipped"]:
        print(f"warning: {meta['clipped']} pixels clipped", file=sys.stderr)
    return EXIT_OK


def cmd_histogram(args) -> int:
    try:
        d = io.read_pulses(args.pulses)
    except (OSError, io.PulseFormatError, io.PgmError) as exc:
        raise UsageError(str(exc)) from exc
    hist = pulse_histogram(d)
    if args.output:
        io.write_histogram(hist, args.output)
    for size, count in hist:
        print(f"{size},{count}")
    return EXIT_OK


def cmd_noise_sim(args) -> int:
    cfg = CliConfig(connectivity=args.connectivity, seed=args.seed)
    f = noise_image(args.height, args.width, cfg.seed)
    d = dpt_decompose(f, cfg.conn)
    hist = pulse_histogram(d)
    if args.report:
        io.write_histogram(hist, args.report)
    if args.image:
        io.write_pgm(f, args.image)
    le_small, gt_large = noise_statistics(hist, args.small, args.large)
    print(f"{args.height}x{args.width} uniform noise, seed {cfg.seed}, {cfg.connectivity}-connectivity")
    print(f"pulses: {d.num_pulses}")
    print(f"fraction with size <= {args.small}: {le_small:.4f}")
    print(f"fraction with size > {args.large}: {gt_large:.4f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    f = _read_image(args.input)
    cfg = CliConfig(connectivity=args.connectivity)
    results = run_suite(f, cfg.conn, ns=tuple(args.n))
    print(format_matrix(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def _optional_bool(parser, name, help_text):
    group = parser.add_mutually_exclusive_group()
    group.add_argument(f"--{name}", dest=name.replace("-", "_"), action="store_true", default=None, help=help_text)
    group.add_argument(f"--no-{name}", dest=name.replace("-", "_"), action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lulu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def conn_arg(p):
        p.add_argument("--connectivity", "-c", choices=["4", "8"], default="4")

    p = sub.add_parser("filter", help="apply L_n, U_n or a composition")
    p.add_argument("input")
    p.add_argument("--op", choices=[o.value for o in Op], required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--out", "-o", dest="output", required=True)
    p.add_argument("--mode", choices=["clip", "offset"], default="clip")
    conn_arg(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("decompose", help="discrete pulse transform to a JSON-lines dump")
    p.add_argument("input")
    p.add_argument("--out", "-o", dest="output", required=True)
    p.add_argument("--max-n", type=int, default=None)
    conn_arg(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="sum selected pulses back into an image")
    p.add_argument("pulses")
    p.add_argument("--out", "-o", dest="output", required=True)
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--sign", choices=["pos", "neg", "both"], default=None)
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="denoise: size > 20; small-features: 21..400; large-features: 30000..50000")
    _optional_bool(p, "include-residual", "add the residual constant (default on unless the preset says otherwise)")
    p.add_argument("--mode", choices=["clip", "offset"], default="offset")
    p.add_argument("--maxval", type=int, default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("histogram", help="pulse count per support size")
    p.add_argument("pulses")
    p.add_argument("--out", "-o", dest="output", default=None)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("noise-sim", help="pulse statistics of uniform random noise")
    p.add_argument("--width", type=int, default=400)
    p.add_argument("--height", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="CSV histogram output")
    p.add_argument("--image", default=None, help="also write the noise image")
    p.add_argument("--small", type=int, default=SMALL_PULSE)
    p.add_argument("--large", type=int, default=LARGE_PULSE)
    conn_arg(p)
    p.set_defaults(func=cmd_noise_sim)

    p = sub.add_parser("verify", help="run the invariant suite on an image")
    p.add_argument("input")
    p.add_argument("-n", type=int, nargs="+", default=[1, 2, 3])
    conn_arg(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
