"""Command-line entry point: ``gsstep <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 data or file-format error,
4 numerical degeneracy (parallel frames, blank frame, mask starvation).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .formats import (
    FormatError,
    format_plan,
    read_pfm,
    read_plan,
    read_records,
    write_pfm,
    write_pgm_preview,
    write_records,
)
from .gs import (
    Aggregator,
    DegeneratePairError,
    Estimator,
    MaskStarvationError,
    estimate_step,
    gs_decompose,
    undefined_phase_mask,
    wrapped_phase,
)
from .harness import ExperimentPlan, aggregate_mae, run_plan
from .prefilter import Prefilter, prefilter_pair
from .svgplot import write_charts
from .synth import Case, SynthSpec, synthesize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must be N or WxH, got {text!r}") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 2:
        raise argparse.ArgumentTypeError(f"size must be N or WxH with sides >= 2, got {text!r}")
    return dims[0], dims[1]


def cmd_synth(args) -> int:
    width, height = args.size
    try:
        spec = SynthSpec(case=args.case, delta=args.delta, sigma=args.sigma, seed=args.seed,
                         width=width, height=height, fringe_scale=args.fringe_scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pair = synthesize(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images = {"i1": pair.i1, "i2": pair.i2, "truth_phi": pair.truth.phi,
              "truth_a": pair.truth.a, "truth_b": pair.truth.b}
    for name, img in images.items():
        write_pfm(out / f"{name}.pfm", img)
        if args.preview:
            write_pgm_preview(out / f"{name}.pgm", img)
    meta = {"case": spec.case.value, "delta": spec.delta, "sigma": spec.sigma, "seed": spec.seed,
            "width": spec.width, "height": spec.height, "fringe_scale": spec.fringe_scale}
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(images)} images and meta.json to {out}")
    return EXIT_OK


def _load_pair(args):
    i1, i2 = read_pfm(args.i1), read_pfm(args.i2)
    if i1.shape != i2.shape:
        raise FormatError(f"dimension mismatch: {args.i1} is {i1.shape[1]}x{i1.shape[0]}, "
                          f"{args.i2} is {i2.shape[1]}x{i2.shape[0]}")
    return prefilter_pair(args.prefilter, i1, i2)


def cmd_estimate(args) -> int:
    u1, u2 = _load_pair(args)
    est = estimate_step(u1, u2, args.estimator, args.aggregator)
    print(f"delta_hat_rad={est.delta_hat!r} delta_hat_deg={est.delta_hat_deg:.6f} "
          f"sign={est.sign:+d} estimator={est.estimator.value} "
          f"kappa_ratio={est.kappa_ratio:.6g} mask_fraction={est.mask_fraction:.6g} "
          f"saturated={'yes' if est.saturated else 'no'}")
    return EXIT_OK


def cmd_demod(args) -> int:
    u1, u2 = _load_pair(args)
    d = gs_decompose(u1, u2)
    phi = wrapped_phase(d)
    write_pfm(args.out, phi)
    print(f"wrote {args.out} undefined_pixels={int(undefined_phase_mask(d).sum())}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.print_default_plan:
        sys.stdout.write(format_plan(ExperimentPlan()))
        return EXIT_OK
    if args.default_paper == bool(args.plan):
        raise UsageError("give exactly one of --plan FILE or --default-paper")
    plan = ExperimentPlan() if args.default_paper else read_plan(args.plan)
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        plan = ExperimentPlan(**{**plan.__dict__, "trials": args.trials})
    records = run_plan(plan, workers=args.workers)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_records(out, records)
    n_failed = sum(not r.ok for r in records)
    print(f"wrote {len(records)} records ({n_failed} failed) to {out}")
    if args.default_paper or args.plots:
        for path in write_charts(out.with_suffix(".svg"), aggregate_mae(records)):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_plot(args) -> int:
    records = read_records(args.input)
    if not records:
        raise FormatError(f"{args.input}: no result rows to plot")
    for path in write_charts(Path(args.out), aggregate_mae(records)):
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsstep", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic fringe pair and its ground truth")
    s.add_argument("--case", required=True, choices=[c.value for c in Case])
    s.add_argument("--delta", type=float, default=math.pi / 3, help="phase step in radians")
    s.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=_size, default=(256, 256), help="N or WxH pixels")
    s.add_argument("--fringe-scale", type=float, default=20.0)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--preview", action="store_true", help="also write 8-bit PGM previews")
    s.set_defaults(func=cmd_synth)

    def pair_args(sp):
        sp.add_argument("--i1", required=True, help="first frame (PFM)")
        sp.add_argument("--i2", required=True, help="second frame (PFM)")
        sp.add_argument("--prefilter", default="none", choices=[x.value for x in Prefilter])

    e = sub.add_parser("estimate", help="estimate the phase step between two frames")
    pair_args(e)
    e.add_argument("--estimator", default="tan", choices=[x.value for x in Estimator])
    e.add_argument("--aggregator", default="median", choices=[x.value for x in Aggregator])
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("demod", help="write the wrapped phase of a frame pair")
    pair_args(d)
    d.add_argument("--out", required=True, help="output PFM path")
    d.set_defaults(func=cmd_demod)

    x = sub.add_parser("experiment", help="run a noise-sweep experiment plan")
    x.add_argument("--plan", help="plan file (key = value format)")
    x.add_argument("--default-paper", action="store_true",
                   help="Cases I-III, 10 noise levels, 50 trials each")
    x.add_argument("--print-default-plan", action="store_true",
                   help="print the default plan in plan-file format and exit")
    x.add_argument("--trials", type=int, help="override trials per noise level")
    x.add_argument("--out", default="results.csv")
    x.add_argument("--plots", action="store_true", help="also write SVG charts next to the CSV")
    x.add_argument("--workers", type=int, default=1)
    x.set_defaults(func=cmd_experiment)

    pl = sub.add_parser("plot", help="chart median MAE vs noise from a result CSV")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out", required=True, help="SVG path; several cases get _case-<id> suffixes")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DegeneratePairError, MaskStarvationError) as exc:
        print(f"gsstep: error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FormatError, OSError, ValueError) as exc:
        print(f"gsstep: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
