"""Scene files: JSON descriptions of a space, a measure and the run settings.

Top-level keys: ``space``, ``measure``, ``reference``, ``premeasure``,
``sets``, ``schedules``, ``solver`` and ``seed``. Only ``seed`` is mandatory;
scenarios fill in their own defaults for anything else. Errors carry the
JSON path of the offending field (and the line for syntax errors).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .measures import Lebesgue, ReferenceMeasure, SelfMeasure, SignedMeasure
from .metric import Euclidean, FiniteMetric, MetricSpace, StarGraph
from .opensets import Neighborhood, OpenBall, OpenBox, OpenSet, Union
from .premeasures import Exact, Kernel, Noisy, PremeasureModel

TOP_KEYS = ("space", "measure", "reference", "premeasure", "sets", "schedules", "solver", "seed")
DEFAULT_DELTAS = (0.2, 0.1, 0.05, 0.02, 0.01)
DEFAULT_EPS = (0.1, 0.05, 0.02)


class SceneError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        where = f"line {line}" if line is not None else path
        super().__init__(f"{where}: {message}")


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SceneError(f"{path}.{key}", "missing field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SceneError(f"{path}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _floats(val, path, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        raise SceneError(path, "expected numbers") from None
    if not np.all(np.isfinite(arr)):
        raise SceneError(path, "numbers must be finite")
    if shape is not None and arr.ndim != shape:
        raise SceneError(path, f"expected a {shape}-dimensional array")
    return arr


@dataclass
class PremeasureSpec:
    kind: str = "averaged"
    alpha: float = 0.5
    C: float = 2.0
    weights: tuple = (1.0,)
    seed: int = 0
    extreme: bool = False

    def build(self, mu: SignedMeasure) -> PremeasureModel:
        if self.kind == "exact":
            return Exact(mu)
        if self.kind in ("averaged", "kernel"):
            return Kernel(mu, self.weights if self.kind == "kernel" else (1.0,))
        if self.kind == "noisy":
            return Noisy(mu, self.C, self.seed, self.extreme)
        raise SceneError("premeasure.kind", f"unknown premeasure {self.kind!r}")


@dataclass
class Scene:
    seed: int
    space: MetricSpace = field(default_factory=lambda: Euclidean(2))
    measure: SignedMeasure | None = None
    reference: dict = field(default_factory=dict)
    premeasure: PremeasureSpec = field(default_factory=PremeasureSpec)
    sets: dict = field(default_factory=dict)
    deltas: tuple = DEFAULT_DELTAS
    eps: tuple = DEFAULT_EPS
    solver: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def exact_threshold(self) -> int:
        return int(self.solver.get("exact_threshold", 40))

    def reference_measure(self, mu: SignedMeasure, alpha: float | None = None, kind: str | None = None) -> ReferenceMeasure:
        alpha = self.premeasure.alpha if alpha is None else alpha
        kind = kind or self.reference.get("kind", "lebesgue")
        if kind == "lebesgue":
            return ReferenceMeasure.build(Lebesgue(int(self.reference.get("dim", mu.space.dim))), alpha)
        if kind == "self":
            return ReferenceMeasure.build(SelfMeasure(mu), alpha)
        raise SceneError("reference.kind", f"unknown reference {kind!r}")


def parse_space(spec, path="space") -> MetricSpace:
    kind = _need(spec, "kind", path, str)
    if kind == "euclidean":
        return Euclidean(int(_need(spec, "dim", path, int)))
    if kind == "star":
        return StarGraph(int(_need(spec, "rays", path, int)), float(spec.get("max_arc", math.inf)))
    if kind == "finite":
        return FiniteMetric(_floats(_need(spec, "matrix", path), f"{path}.matrix", 2))
    raise SceneError(f"{path}.kind", f"unknown space {kind!r}")


def parse_measure(spec, space: MetricSpace, path="measure") -> SignedMeasure:
    if not isinstance(spec, dict):
        raise SceneError(path, "expected an object")
    atoms = []
    for i, a in enumerate(spec.get("atoms", [])):
        p = f"{path}.atoms[{i}]"
        if isinstance(a, dict):
            at, w = _need(a, "at", p), _need(a, "weight", p)
        elif isinstance(a, list) and len(a) == 2:
            at, w = a
        else:
            raise SceneError(p, "expected {at, weight} or [coords, weight]")
        atoms.append((tuple(_floats(at, f"{p}.at", 1)), float(_floats(w, f"{p}.weight"))))
    chains = []
    for i, c in enumerate(spec.get("chains", [])):
        p = f"{path}.chains[{i}]"
        verts = _floats(_need(c, "vertices", p), f"{p}.vertices", 2)
        chains.append(([tuple(v) for v in verts], float(c.get("density", 1.0))))
    try:
        return SignedMeasure.from_data(space, atoms=atoms, chains=chains)
    except ValueError as exc:
        raise SceneError(path, str(exc)) from None


def parse_open_set(spec, path="sets.open") -> OpenSet:
    kind = _need(spec, "kind", path, str)
    if kind == "ball":
        return OpenBall(tuple(_floats(_need(spec, "center", path), f"{path}.center", 1)), float(_need(spec, "radius", path)))
    if kind == "box":
        return OpenBox(tuple(_floats(_need(spec, "low", path), f"{path}.low", 1)),
                       tuple(_floats(_need(spec, "high", path), f"{path}.high", 1)))
    if kind == "neighborhood":
        pts = [tuple(p) for p in _floats(spec.get("points", []), f"{path}.points")] if spec.get("points") else ()
        lines = tuple(_floats(pl, f"{path}.polylines[{i}]", 2) for i, pl in enumerate(spec.get("polylines", [])))
        return Neighborhood(float(_need(spec, "eps", path)), tuple(pts), lines)
    if kind == "union":
        return Union(tuple(parse_open_set(p, f"{path}.parts[{i}]") for i, p in enumerate(_need(spec, "parts", path, list))))
    raise SceneError(f"{path}.kind", f"unknown open set {kind!r}")


def _schedule(vals, path) -> tuple:
    arr = _floats(vals, path, 1)
    if len(arr) == 0 or np.any(arr <= 0) or np.any(np.diff(arr) >= 0):
        raise SceneError(path, "schedule must be nonempty, positive and strictly decreasing")
    return tuple(float(v) for v in arr)


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict):
        raise SceneError("$", "scene must be a JSON object")
    unknown = sorted(set(data) - set(TOP_KEYS))
    if unknown:
        raise SceneError(f"$.{unknown[0]}", f"unknown top-level key (allowed: {', '.join(TOP_KEYS)})")
    seed = _need(data, "seed", "$", int)
    space = parse_space(data["space"]) if "space" in data else Euclidean(2)
    mu = parse_measure(data["measure"], space) if "measure" in data else None
    pm = data.get("premeasure", {})
    if not isinstance(pm, dict):
        raise SceneError("premeasure", "expected an object")
    known = PremeasureSpec.__dataclass_fields__
    bad = [k for k in pm if k not in known]
    if bad:
        raise SceneError(f"premeasure.{bad[0]}", "unknown field")
    spec = PremeasureSpec(**{**pm, "weights": tuple(pm.get("weights", (1.0,)))})
    sched = data.get("schedules", {})
    deltas = _schedule(sched["delta"], "schedules.delta") if "delta" in sched else DEFAULT_DELTAS
    eps = _schedule(sched["eps"], "schedules.eps") if "eps" in sched else DEFAULT_EPS
    sets = data.get("sets", {})
    if not isinstance(sets, dict):
        raise SceneError("sets", "expected an object")
    reference = data.get("reference", {})
    if not isinstance(reference, dict):
        raise SceneError("reference", "expected an object")
    return Scene(seed, space, mu, reference, spec, sets, deltas, eps, dict(data.get("solver", {})), data)


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneError(str(path), f"cannot read scene file: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(str(path), f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    return scene_from_dict(data)


def open_set_from(scene: Scene, key: str, default: OpenSet) -> OpenSet:
    spec = scene.sets.get(key)
    return parse_open_set(spec, f"sets.{key}") if spec is not None else default


def get(scene: Scene, key: str, default: Any) -> Any:
    return scene.sets.get(key, default)
