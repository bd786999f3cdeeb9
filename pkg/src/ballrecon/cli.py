"""Command-line entry point ``ballrecon``.

Usage::

    ballrecon <scenario> [--scene FILE] [--out DIR] [--seed N] [--threads N] [--exact-threshold N]
    ballrecon cover --scene FILE [--deltas ...] [--strategy NAME]
    ballrecon pack --scene FILE [--deltas ...] [--eps ...] [--no-lattice] [--independent]
    ballrecon besicovitch --scene FILE [--zeta-bound N]

``BALLRECON_OUT`` and ``BALLRECON_THREADS`` override the defaults of
``--out`` and ``--threads``. Exit codes: 0 when every verdict passes, 1 on a
verdict failure, 2 on input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import besicovitch as bes
from .covering import CoverStrategy, SolverParams, caratheodory_sweep
from .measures import SignedMeasure
from .metric import BallSet
from .packing import CompactSet, PackingStrategy, outer_regularize, packing_sweep
from .report import RunReport, check_eq, check_le, emit_report
from .scenarios import SCENARIOS, RunContext, run_scenario
from .scene import Scene, SceneError, get, load_scene, parse_open_set

COVER_STRATEGIES = {
    "default": CoverStrategy(),
    "no-lattice": CoverStrategy(lattice=False),
    "no-perturb": CoverStrategy(perturb=False),
    "centred": CoverStrategy(lattice=False, perturb=False),
}


def _env_int(name: str, default: int) -> int:
    val = os.environ.get(name)
    if val is None:
        return default
    try:
        return int(val)
    except ValueError:
        raise SceneError(name, f"environment variable must be an integer, got {val!r}") from None


def _common(p: argparse.ArgumentParser, scene_required: bool = False) -> None:
    p.add_argument("--scene", required=scene_required, help="JSON scene file (built-in example when omitted)")
    p.add_argument("--out", default=None, help="output directory (env BALLRECON_OUT, default ./ballrecon-out)")
    p.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env BALLRECON_THREADS, default 1)")
    p.add_argument("--exact-threshold", type=int, default=None, help="largest packing component solved exactly")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ballrecon", description="Measure reconstruction by coverings and packings of balls.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="<scenario|cover|pack|besicovitch>")
    for name in SCENARIOS:
        _common(sub.add_parser(name, help=f"run the {name} scenario"))
    cov = sub.add_parser("cover", help="Method II covering sweep of the scene target")
    _common(cov, True)
    cov.add_argument("--deltas", type=float, nargs="+", help="decreasing delta schedule")
    cov.add_argument("--strategy", choices=sorted(COVER_STRATEGIES), default="default")
    cov.add_argument("--exact-candidates", type=int, default=20)
    pack = sub.add_parser("pack", help="packing sweep of the scene open set (or outer regularisation of A)")
    _common(pack, True)
    pack.add_argument("--deltas", type=float, nargs="+")
    pack.add_argument("--eps", type=float, nargs="+")
    pack.add_argument("--no-lattice", action="store_true")
    pack.add_argument("--independent", action="store_true",
                      help="generate candidates per delta instead of nesting those of smaller deltas")
    besi = sub.add_parser("besicovitch", help="greedy Besicovitch subfamilies of the scene balls")
    _common(besi, True)
    besi.add_argument("--zeta-bound", type=int, default=None)
    return parser


def _scene(args) -> Scene:
    scene = load_scene(args.scene) if args.scene else Scene(seed=0)
    if args.seed is not None:
        scene.seed = args.seed
    if getattr(args, "deltas", None):
        if any(b >= a for a, b in zip(args.deltas, args.deltas[1:])) or min(args.deltas) <= 0:
            raise SceneError("--deltas", "schedule must be positive and strictly decreasing")
        scene.deltas = tuple(args.deltas)
    if getattr(args, "eps", None):
        if any(b >= a for a, b in zip(args.eps, args.eps[1:])) or min(args.eps) <= 0:
            raise SceneError("--eps", "schedule must be positive and strictly decreasing")
        scene.eps = tuple(args.eps)
    return scene


def _require_measure(scene: Scene) -> SignedMeasure:
    if scene.measure is None:
        raise SceneError("measure", "this command needs a measure in the scene")
    return scene.measure


def run_cover(scene: Scene, args, ctx: RunContext) -> RunReport:
    mu = _require_measure(scene)
    target = np.asarray(get(scene, "target", mu.atom_positions.tolist()), dtype=float)
    if target.ndim != 2 or not len(target):
        raise SceneError("sets.target", "expected a nonempty list of points")
    q = scene.premeasure.build(mu)
    sweep = caratheodory_sweep(target, q, scene.deltas, COVER_STRATEGIES[args.strategy],
                               SolverParams(exact_candidates=args.exact_candidates), ctx.threads)
    rep = RunReport("cover", ("delta", "value", "status", "n_balls"))
    rep.notes.append("delta bounds the ball diameter (radius <= delta/2)")
    for d, r in zip(sweep.deltas, sweep.results):
        rep.add(d, r.value, r.solver_status, len(r.chosen))
    rep.verdicts.append(check_eq("feasible", int(all(r.covers_target for r in sweep.results)), 1, "every delta has a feasible cover"))
    rep.verdicts.append(check_eq("monotone", len(sweep.monotone_violations), 0, "Method II values nondecreasing as delta shrinks"))
    return rep


def run_pack(scene: Scene, args, ctx: RunContext) -> RunReport:
    mu = _require_measure(scene)
    q = scene.premeasure.build(mu)
    st = PackingStrategy(lattice=not args.no_lattice, nested=not args.independent)
    rep = RunReport("pack", ("delta", "eps", "value", "status", "n_balls", "runtime_ms"))
    rep.notes.append("delta bounds the ball radius; runtime_ms is wall-clock and not reproducible")
    if "open" in scene.sets:
        U = parse_open_set(scene.sets["open"], "sets.open")
        sweeps = [("", packing_sweep(U, q, scene.deltas, st, ctx.exact_threshold, ctx.threads))]
    elif "A" in scene.sets:
        spec = scene.sets["A"]
        A = CompactSet(points=[tuple(p) for p in spec.get("points", [])], polylines=spec.get("polylines", []))
        est = outer_regularize(A, q, scene.eps, scene.deltas, st, ctx.exact_threshold, ctx.threads)
        sweeps = list(zip(est.eps, est.sweeps))
    else:
        raise SceneError("sets", "pack needs sets.open or sets.A")
    violations = 0
    for e, sw in sweeps:
        for d, r, t in zip(sw.deltas, sw.results, sw.runtimes_ms):
            rep.add(d, e, r.value, r.solver_status, len(r.chosen), t)
        violations += len(sw.violations)
    rep.verdicts.append(check_eq("monotone", violations, 0, "packing values nonincreasing as delta shrinks"))
    return rep


def run_besicovitch(scene: Scene, args, ctx: RunContext) -> RunReport:
    bound = args.zeta_bound or int(scene.solver.get("zeta_bound", 19))
    spec = scene.sets.get("balls")
    if spec is None:
        raise SceneError("sets.balls", "expected a list of {center, radius}")
    try:
        balls = BallSet(np.array([b["center"] for b in spec], dtype=float), np.array([b["radius"] for b in spec], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError("sets.balls", f"malformed ball list ({exc})") from None
    rep = RunReport("besicovitch", ("ball", "center", "radius", "subfamily"))
    try:
        dec = bes.greedy_subfamilies(bes.BallFamily(balls, balls.centers), bound)
    except bes.SubfamilyBoundExceeded as exc:
        rep.verdicts.append(check_le("subfamily bound", bound + 1, bound, 0, str(exc)))
        return rep
    home = {i: k for k, m in enumerate(dec.subfamilies) for i in m}
    for i in range(len(balls)):
        rep.add(i, " ".join(repr(float(c)) for c in balls.centers[i]), balls.radii[i], home.get(i, -1))
    rep.verdicts.append(check_le("subfamily count", dec.count, bound, 0, f"number of subfamilies <= {bound}"))
    return rep


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = args.threads if args.threads is not None else _env_int("BALLRECON_THREADS", 1)
        out = args.out or os.environ.get("BALLRECON_OUT") or "ballrecon-out"
        scene = _scene(args)
        ctx = RunContext(max(1, threads), args.exact_threshold or scene.exact_threshold)
        t0 = time.perf_counter()
        if args.command == "cover":
            report = run_cover(scene, args, ctx)
        elif args.command == "pack":
            report = run_pack(scene, args, ctx)
        elif args.command == "besicovitch":
            report = run_besicovitch(scene, args, ctx)
        else:
            report = run_scenario(args.command, scene, ctx)
        report.runtimes_ms.setdefault("total", (time.perf_counter() - t0) * 1e3)
    except (SceneError, ValueError) as exc:
        print(f"ballrecon: input error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = emit_report(report, out)
    except OSError as exc:
        print(f"ballrecon: {exc}", file=sys.stderr)
        return 2
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.inequality}  [lhs={v.lhs!r}, rhs={v.rhs!r}]")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
