"""Command-line front end: ``normdens <command> --seed N [options]``.

Every command writes an :class:`~normdens.report.ExperimentReport` as JSON or
CSV to ``--output`` (default: standard output).  Exit status is 0 on success,
1 when a check fails and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from ._common import InputError, set_max_workers
from .bkk import BkkExperiment, run_experiment
from .convex import CenteredEllipsoid, Frame
from .crofton import (
    circle,
    curve_from_json,
    euclid_crofton_length,
    great_circle,
    product_crofton_check,
    segment,
    small_circle,
    sphere_crofton_length,
)
from .density import d1, d_m, product_d1
from .finsler import circle_space, clifford_space, decoupled_torus_spaces, load_spaces
from .mixed_volume import METHODS, MixedVolumeConfig, mixed_volume
from .report import ExperimentReport, fmt
from .verify import CRITERIA, DEFAULT_SEED, run_verify

BODY_PRESETS = {
    "balls2": [np.eye(2), np.eye(2)],
    "balls3": [np.eye(3)] * 3,
    "segments": [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
}
SPACE_PRESETS = {
    "circle": lambda: [circle_space()],
    "decoupled": decoupled_torus_spaces,
    "coupled": lambda: [clifford_space()] * 2,
}


def load_json(text: str, what: str):
    """Parse ``text`` as a path to a JSON file, or failing that as inline JSON."""
    if os.path.isfile(text):
        try:
            with open(text) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {what} file {text!r}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise InputError(f"{what}: {text!r} is neither a file nor valid JSON") from None


def _bodies(args) -> list[CenteredEllipsoid]:
    if args.bodies is None:
        return [CenteredEllipsoid(q) for q in BODY_PRESETS[args.preset]]
    doc = load_json(args.bodies, "bodies")
    if isinstance(doc, dict):
        doc = doc.get("bodies")
    if not isinstance(doc, list) or not doc:
        raise InputError("bodies must be a non-empty list of matrices")
    return [CenteredEllipsoid(q) for q in doc]


def _mv_config(args) -> MixedVolumeConfig:
    return MixedVolumeConfig(args.method, trials=args.trials, seed=args.seed, directions=args.directions)


def cmd_mixed_volume(args, rep: ExperimentReport):
    bodies = _bodies(args)
    rep.inputs.update(bodies=[b.Q.tolist() for b in bodies], method=args.method, trials=args.trials, directions=args.directions)
    est = mixed_volume(bodies, _mv_config(args))
    rep.add("mixed_volume", est.value, est.std_error, est.samples)


def cmd_density(args, rep: ExperimentReport):
    bodies = _bodies(args)
    vecs = load_json(args.frame, "frame")
    frame = Frame(vecs)
    rep.inputs.update(
        bodies=[b.Q.tolist() for b in bodies], frame=frame.vectors.tolist(), method=args.method, trials=args.trials
    )
    cfg = _mv_config(args)
    trials = args.trials if cfg.resolve(frame.size) == "gaussian_mc" else 0
    for i, (A, xi) in enumerate(zip(bodies, frame.vectors)):
        rep.add(f"d1[{i}]", d1(A, xi).value)
    dm = d_m(bodies, frame, cfg)
    rep.add(f"d{dm.order}", dm.value, dm.std_error, trials)
    prod = product_d1(bodies, frame, cfg)
    rep.add("product_d1", prod.value, prod.std_error, trials)


def _euclid_curve(args):
    if args.config:
        return curve_from_json(load_json(args.config, "curve"))
    if args.curve == "segment":
        start = load_json(args.start, "start") if args.start else [0.0] * (2 if args.space == "R2" else 3)
        end = load_json(args.end, "end") if args.end else [1.0] + [0.0] * (1 if args.space == "R2" else 2)
        return segment(start, end)
    if args.curve == "circle":
        return circle(args.radius, space=args.space)
    raise InputError("a 'param' curve needs --config")


def cmd_crofton_euclid(args, rep: ExperimentReport):
    curve = _euclid_curve(args)
    if curve.space not in ("R2", "R3"):
        raise InputError("crofton-euclid needs a curve in R2 or R3")
    R = args.range if args.range is not None else max(1.25 * curve.max_norm(), 1e-3)
    rep.inputs.update(curve=_curve_echo(args), range=R, trials=args.trials, resolution=args.resolution)
    est = euclid_crofton_length(curve, args.trials, R, args.seed, args.resolution)
    rep.add("length", est.value, est.std_error, est.samples)
    rep.add("redraws", est.redraws)


def _sphere_curve(kind: str, colatitude: float):
    if kind == "great_circle":
        return great_circle()
    if kind == "small_circle":
        return small_circle(colatitude)
    raise InputError("a 'param' curve needs --config")


def cmd_crofton_sphere(args, rep: ExperimentReport):
    curve = curve_from_json(load_json(args.config, "curve")) if args.config else _sphere_curve(args.curve, args.colatitude)
    if isinstance(curve, tuple) or curve.space != "S2":
        raise InputError("crofton-sphere needs a curve on S2")
    rep.inputs.update(curve=_curve_echo(args), trials=args.trials, resolution=args.resolution)
    est = sphere_crofton_length(curve, args.trials, args.seed, args.resolution)
    rep.add("length", est.value, est.std_error, est.samples)
    rep.add("redraws", est.redraws)


def cmd_crofton_product(args, rep: ExperimentReport):
    if args.config:
        pair = curve_from_json(load_json(args.config, "curve"))
        if not isinstance(pair, tuple):
            raise InputError("crofton-product needs an S2xS2 curve pair")
        c1, c2 = pair
    else:
        c1 = _sphere_curve(args.curve1, args.colatitude1)
        c2 = _sphere_curve(args.curve2, args.colatitude2)
    rep.inputs.update(curve=_curve_echo(args), trials=args.trials, grid=args.grid, resolution=args.resolution)
    r = product_crofton_check(c1, c2, args.trials, args.seed, args.grid, args.resolution)
    rep.add("mc_estimate", r.mc_estimate, r.mc_std_error, r.trials)
    rep.add("density_integral", r.density_integral)
    rep.add("relative_gap", r.relative_gap)
    rep.add("redraws", r.redraws)
    rep.passed = r.agrees()


def _curve_echo(args) -> dict:
    if getattr(args, "config", None):
        return load_json(args.config, "curve")
    keys = ("curve", "radius", "space", "start", "end", "colatitude", "curve1", "curve2", "colatitude1", "colatitude2")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_bkk(args, rep: ExperimentReport):
    doc = {}
    if args.config:
        doc = load_json(args.config, "space config")
        if not isinstance(doc, dict):
            raise InputError("space config must be a JSON object")
        _, spaces = load_spaces(doc)
    else:
        spaces = SPACE_PRESETS[args.preset]()
    # command-line values win over the optional run settings stored in the config
    trials = args.trials if args.trials is not None else int(doc.get("trials", 10_000))
    grid = args.grid if args.grid is not None else int(doc.get("grid", 64))
    resolution = args.resolution if args.resolution is not None else int(doc.get("resolution", 128))
    dens_trials = args.density_trials if args.density_trials is not None else int(doc.get("density_trials", 4000))
    ranges = load_json(args.ranges, "ranges") if args.ranges else doc.get("ranges")
    margin = float(doc.get("margin", 0.01))
    exp = BkkExperiment(
        spaces,
        trials,
        args.seed,
        grid=grid,
        resolution=resolution,
        ranges=ranges,
        margin=margin,
        density_config=MixedVolumeConfig("gaussian_mc", trials=dens_trials, seed=args.seed),
    )
    rep.inputs.update(
        spaces=doc if args.config else {"preset": args.preset},
        trials=trials,
        grid=grid,
        resolution=resolution,
        density_trials=dens_trials,
        ranges=list(exp.ranges),
    )
    r = run_experiment(exp)
    rep.add("mc_average", r.mc_average, r.mc_std_error, r.trials)
    rep.add("density_average", r.density_average, 0.0, dens_trials)
    rep.add("mixed_volume_average", r.mixed_volume_average)
    for name, gap in r.gaps.items():
        rep.add(f"gap[{name}]", gap)
    rep.add("redraws", r.redraws)


def cmd_verify(args, rep: ExperimentReport):
    profile = "full" if args.full else "quick"
    only = sorted(set(args.only)) if args.only else None
    rep.inputs.update(profile=profile, only=only)
    results = run_verify(profile, args.seed, only, echo=lambda line: print(line, file=sys.stderr, flush=True))
    for r in results:
        rep.add(r.name, r.value if math.isfinite(r.value) else 0.0, r.std_error)
        rep.add(r.name + " passed", float(r.passed))
    rep.passed = all(r.passed for r in results)


COMMANDS = {
    "mixed-volume": cmd_mixed_volume,
    "density": cmd_density,
    "crofton-euclid": cmd_crofton_euclid,
    "crofton-sphere": cmd_crofton_sphere,
    "crofton-product": cmd_crofton_product,
    "bkk": cmd_bkk,
    "verify": cmd_verify,
}


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=positive_int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--output", help="report file (default: standard output)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    seeded = argparse.ArgumentParser(add_help=False, parents=[common])
    seeded.add_argument("--seed", type=int, required=True, help="root seed (mandatory)")

    parser = argparse.ArgumentParser(prog="normdens", description="Mixed-volume densities, Crofton estimators and BKK experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def body_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--bodies", help="JSON list of PSD matrices (inline or file)")
        g.add_argument("--preset", choices=sorted(BODY_PRESETS), default="balls2")
        p.add_argument("--method", choices=METHODS + ("auto",), default="gaussian_mc")
        p.add_argument("--trials", type=positive_int, default=100_000)
        p.add_argument("--directions", type=positive_int, default=720)

    p = sub.add_parser("mixed-volume", parents=[seeded], help="mixed volume of centered ellipsoids")
    body_args(p)

    p = sub.add_parser("density", parents=[seeded], help="d_1, d_m and the product of d_1 on a frame")
    body_args(p)
    p.add_argument("--frame", required=True, help="JSON list of frame vectors (inline or file)")

    p = sub.add_parser("crofton-euclid", parents=[seeded], help="curve length from random hyperplanes")
    p.add_argument("--curve", choices=("segment", "circle", "param"), default="circle")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--space", choices=("R2", "R3"), default="R2")
    p.add_argument("--start", help="segment start point (JSON list)")
    p.add_argument("--end", help="segment end point (JSON list)")
    p.add_argument("--config", help="curve JSON (inline or file); overrides the curve flags")
    p.add_argument("--range", type=float, help="offset range R (default 1.25 max |c(t)|)")
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--resolution", type=positive_int, default=2048)

    p = sub.add_parser("crofton-sphere", parents=[seeded], help="spherical curve length from random great circles")
    p.add_argument("--curve", choices=("great_circle", "small_circle", "param"), default="great_circle")
    p.add_argument("--colatitude", type=float, default=math.pi / 6)
    p.add_argument("--config", help="curve JSON (inline or file)")
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--resolution", type=positive_int, default=2048)

    p = sub.add_parser("crofton-product", parents=[seeded], help="product Crofton check on S2 x S2")
    p.add_argument("--curve1", choices=("great_circle", "small_circle"), default="great_circle")
    p.add_argument("--curve2", choices=("great_circle", "small_circle"), default="great_circle")
    p.add_argument("--colatitude1", type=float, default=math.pi / 6)
    p.add_argument("--colatitude2", type=float, default=math.pi / 6)
    p.add_argument("--config", help="S2xS2 curve JSON with two 'factors'")
    p.add_argument("--trials", type=positive_int, default=100_000)
    p.add_argument("--grid", type=positive_int, default=128)
    p.add_argument("--resolution", type=positive_int, default=2048)

    p = sub.add_parser("bkk", parents=[seeded], help="average number of zeros, three ways")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="space definition JSON (inline or file)")
    g.add_argument("--preset", choices=sorted(SPACE_PRESETS))
    p.add_argument("--trials", type=positive_int)
    p.add_argument("--grid", type=positive_int)
    p.add_argument("--resolution", type=positive_int)
    p.add_argument("--density-trials", type=positive_int)
    p.add_argument("--ranges", help="JSON list of offset ranges")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="reduced trial counts (default)")
    g.add_argument("--full", action="store_true", help="stated trial counts")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"base seed (default {DEFAULT_SEED})")
    p.add_argument("--only", type=int, nargs="+", choices=sorted(CRITERIA), help="criterion numbers to run")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = ExperimentReport(args.command, args.seed)
    t0 = time.perf_counter()
    try:
        set_max_workers(args.threads)
        COMMANDS[args.command](args, rep)
    except (InputError, ValueError, OSError) as exc:
        print(f"normdens {args.command}: error: {exc}", file=sys.stderr)
        return 2
    finally:
        set_max_workers(1)
    rep.runtime_s = float(fmt(time.perf_counter() - t0))
    text = rep.render(args.format)
    try:
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"normdens {args.command}: error: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 1 if rep.passed is False else 0


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
