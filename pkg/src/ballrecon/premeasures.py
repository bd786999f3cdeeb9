"""Premeasures on closed balls and sampled certification of their bounds.

The averaged premeasure ``q(B_r(x)) = (1/r) * int_0^r mu(B_s(x)) ds`` and its
kernel-weighted generalisation are evaluated in closed form for atoms. For
polylines the integrand ``s -> mu(B_s(x))`` is piecewise smooth with known
breakpoints (perpendicular foot distances, endpoint distances, kernel steps),
so it is integrated piece by piece with adaptive Gauss-Legendre after the
substitution ``s = a + (b - a) u**2`` that removes the square-root onset at
the left end of a piece.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import SignedMeasure, ball_masses, hahn_split
from .metric import Ball, DomainError

QUAD_TOL = 1e-10
CERT_TOL = 1e-12

_GL_HI = np.polynomial.legendre.leggauss(16)
_GL_LO = np.polynomial.legendre.leggauss(8)


def _gl(f, a: float, b: float, rule) -> float:
    x, w = rule
    mid, half = (a + b) / 2, (b - a) / 2
    return half * float(w @ f(mid + half * x))


def adaptive_gauss(f, a: float, b: float, tol: float, depth: int = 40) -> float:
    """Integrate a smooth vectorised ``f`` on [a, b] to absolute tolerance ``tol``."""
    if b <= a:
        return 0.0
    fine = _gl(f, a, b, _GL_HI)
    coarse = _gl(f, a, b, _GL_LO)
    if abs(fine - coarse) <= tol or depth == 0:
        return fine
    m = (a + b) / 2
    return adaptive_gauss(f, a, m, tol / 2, depth - 1) + adaptive_gauss(f, m, b, tol / 2, depth - 1)


class _ChainGeometry:
    """Per-center segment data for ``s -> sum_j density_j * chord_j(s)``."""

    def __init__(self, mu: SignedMeasure, center: np.ndarray):
        p0, p1, dens = mu.segments
        d = p1 - p0
        self.length = np.linalg.norm(d, axis=1)
        u = d / self.length[:, None]
        w = center[None, :] - p0
        self.t0 = (w * u).sum(axis=1)
        perp = w - self.t0[:, None] * u
        self.h2 = (perp * perp).sum(axis=1)
        self.h = np.sqrt(self.h2)
        self.dens = dens
        self.end0 = np.linalg.norm(w, axis=1)
        self.end1 = np.linalg.norm(center[None, :] - p1, axis=1)

    def mass(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)[:, None]
        half = np.sqrt(np.maximum(s * s - self.h2[None, :], 0.0))
        lo = np.maximum(self.t0[None, :] - half, 0.0)
        hi = np.minimum(self.t0[None, :] + half, self.length[None, :])
        chord = np.where(s * s >= self.h2[None, :], np.maximum(hi - lo, 0.0), 0.0)
        return chord @ self.dens

    def breakpoints(self) -> np.ndarray:
        foot_inside = (self.t0 > 0) & (self.t0 < self.length)
        return np.concatenate([self.h[foot_inside], self.end0, self.end1])


def _kernel_steps(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0:
        raise DomainError("kernel needs at least one step value")
    if np.any(w < 0) or np.any(np.diff(w) > 0):
        raise DomainError("kernel steps must be nonnegative and nonincreasing")
    if not math.isclose(w.mean(), 1.0, rel_tol=0, abs_tol=1e-12):
        raise DomainError("kernel must integrate to 1 over (0, 1)")
    return w


class PremeasureModel:
    """A rule assigning a value to every closed ball of the base measure's space."""

    measure: SignedMeasure

    def evaluate(self, ball: Ball) -> float:
        if not ball.radius > 0:
            raise DomainError("radius must be positive")
        return float(self.values(ball.center.array[None, :], np.array([ball.radius]))[0])

    def values(self, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, centers, radii):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        radii = np.asarray(radii, dtype=float).reshape(-1)
        if np.any(radii <= 0):
            raise DomainError("radius must be positive")
        return centers, radii


@dataclass(frozen=True)
class Exact(PremeasureModel):
    measure: SignedMeasure

    def values(self, centers, radii):
        centers, radii = self._check(centers, radii)
        return ball_masses(self.measure, centers, radii)

    def evaluate(self, ball: Ball) -> float:
        from .measures import ball_mass

        return ball_mass(self.measure, ball)


@dataclass(frozen=True)
class Kernel(PremeasureModel):
    """``(1/r) * int_0^r mu(B_s(x)) * omega(s/r) ds`` with a step kernel ``omega``.

    ``weights`` are the step values on a uniform partition of (0, 1); they
    must be nonincreasing with mean 1. Values may be negative for signed
    base measures.
    """

    measure: SignedMeasure
    weights: tuple = (1.0,)
    tol: float = QUAD_TOL
    _w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        object.__setattr__(self, "_w", _kernel_steps(self.weights))

    def values(self, centers, radii):
        centers, radii = self._check(centers, radii)
        mu = self.measure
        out = np.zeros(len(centers))
        m = len(self._w)
        if len(mu.atoms):
            dist = np.linalg.norm(centers[:, None, :] - mu.atom_positions[None, :, :], axis=2)
            r = radii[:, None]
            acc = np.zeros_like(dist)
            for k, wk in enumerate(self._w):
                top = np.minimum(r, r * (k + 1) / m) if k + 1 < m else r
                bottom = np.maximum(dist, r * k / m) if k else dist
                acc += wk * np.maximum(top - bottom, 0.0)
            out += (acc / r) @ mu.atom_weights
        if len(mu.chains):
            for i, (c, r) in enumerate(zip(centers, radii)):
                out[i] += self._chain_average(c, r)
        return out

    def _chain_average(self, center: np.ndarray, r: float) -> float:
        geo = _ChainGeometry(self.measure, center)
        m = len(self._w)
        cuts = np.concatenate([[0.0, r], geo.breakpoints(), r * np.arange(1, m) / m])
        cuts = np.unique(cuts[(cuts >= 0) & (cuts <= r)])
        pieces = [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]
        tol = self.tol * r / max(len(pieces), 1)
        total = 0.0
        for a, b in pieces:
            wk = self._w[min(int((a + b) / 2 / r * m), m - 1)]
            if wk == 0:
                continue
            span = b - a

            def g(u, a=a, span=span):
                return geo.mass(a + span * u * u) * 2.0 * span * u

            total += wk * adaptive_gauss(g, 0.0, 1.0, tol / max(wk, 1.0))
        return total / r


def Averaged(measure: SignedMeasure, tol: float = QUAD_TOL) -> Kernel:
    """The plain average ``(1/r) * int_0^r mu(B_s(x)) ds`` (kernel identically 1)."""
    return Kernel(measure, (1.0,), tol)


def _unit_hash(center: np.ndarray, radius: float, seed: int) -> float:
    payload = struct.pack(f"<{len(center)}ddq", *map(float, center), float(radius), int(seed))
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") / 2.0**64


@dataclass(frozen=True)
class Noisy(PremeasureModel):
    """Exact ball mass times a deterministic multiplier in ``[1/C, C]``.

    The multiplier is ``C ** (2u - 1)`` for a hash ``u`` of (center, radius,
    seed); with ``extreme`` it snaps to ``1/C`` or ``C``.
    """

    measure: SignedMeasure
    C: float
    seed: int = 0
    extreme: bool = False

    def __post_init__(self):
        if not self.C >= 1:
            raise DomainError("noise bound C must be >= 1")

    def multiplier(self, center: np.ndarray, radius: float) -> float:
        u = _unit_hash(np.asarray(center, float), radius, self.seed)
        if self.extreme:
            return self.C if u >= 0.5 else 1.0 / self.C
        return min(max(self.C ** (2.0 * u - 1.0), 1.0 / self.C), self.C)

    def values(self, centers, radii):
        centers, radii = self._check(centers, radii)
        mass = ball_masses(self.measure, centers, radii)
        mult = np.array([self.multiplier(c, r) for c, r in zip(centers, radii)])
        return mass * mult


@dataclass(frozen=True)
class SignedPart(PremeasureModel):
    """Positive (sign=+1) or negative (sign=-1) part of a signed base premeasure.

    The base is an averaged/kernel premeasure, or ``Exact`` for the covering
    construction's ``(mu(B))_+`` and ``(mu(B))_-``.
    """

    base: PremeasureModel
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if not isinstance(self.base, (Kernel, Exact)):
            raise DomainError("signed parts are taken of exact, averaged or kernel premeasures")

    @property
    def measure(self) -> SignedMeasure:
        return self.base.measure

    def values(self, centers, radii):
        return np.maximum(self.sign * self.base.values(centers, radii), 0.0)


def signed_parts(base: PremeasureModel) -> tuple[SignedPart, SignedPart]:
    return SignedPart(base, 1), SignedPart(base, -1)


# --- certification ----------------------------------------------------------


@dataclass(frozen=True)
class SampleSpec:
    centers: np.ndarray
    radii: tuple

    def grid(self, r0: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
        radii = [r for r in self.radii if r < r0]
        cs = np.repeat(np.atleast_2d(self.centers), len(radii), axis=0)
        rs = np.tile(np.asarray(radii, dtype=float), len(np.atleast_2d(self.centers)))
        return cs, rs


def default_sample_spec(mu: SignedMeasure, n_centers: int = 50, radii=(0.2, 0.1, 0.05, 0.02, 0.01), seed: int = 0) -> SampleSpec:
    """Support points plus seeded random jitter around them."""
    from .measures import support_samples

    rng = np.random.default_rng(seed)
    base = support_samples(mu, n_centers)
    jitter = base[rng.integers(0, len(base), n_centers)] + rng.normal(scale=max(radii), size=(n_centers, base.shape[1]))
    return SampleSpec(np.vstack([base, jitter]), tuple(radii))


@dataclass(frozen=True)
class BoundCertificate:
    alpha: float
    C: float
    r0: float
    worst_lower_margin: float
    worst_upper_margin: float
    n_samples: int
    radii: tuple
    worst_lower_at: tuple = ()
    worst_upper_at: tuple = ()

    @property
    def passed(self) -> bool:
        return self.worst_lower_margin >= -CERT_TOL and self.worst_upper_margin >= -CERT_TOL


def _certificate(lower_slack, upper_slack, cs, rs, alpha, C, r0, radii) -> BoundCertificate:
    if len(rs) == 0:
        return BoundCertificate(alpha, C, r0, math.inf, math.inf, 0, tuple(radii))
    i, j = int(np.argmin(lower_slack)), int(np.argmin(upper_slack))
    return BoundCertificate(
        alpha,
        C,
        r0,
        float(lower_slack[i]),
        float(upper_slack[j]),
        len(rs),
        tuple(radii),
        (tuple(cs[i]), float(rs[i])),
        (tuple(cs[j]), float(rs[j])),
    )


def certify_bounds(q: PremeasureModel, mu: SignedMeasure, alpha: float, C: float, r0: float, sample: SampleSpec) -> BoundCertificate:
    """Check ``mu(B_{alpha r})/C <= q(B_r) <= C mu(B_r)`` on every sampled ball with ``r < r0``."""
    if not mu.is_nonnegative:
        raise DomainError("certify_bounds needs a nonnegative measure; use certify_signed_bounds")
    cs, rs = sample.grid(r0)
    if len(rs) == 0:
        return _certificate([], [], cs, rs, alpha, C, r0, sample.radii)
    qv = q.values(cs, rs)
    lower = qv - ball_masses(mu, cs, alpha * rs) / C
    upper = C * ball_masses(mu, cs, rs) - qv
    return _certificate(lower, upper, cs, rs, alpha, C, r0, sample.radii)


def certify_signed_bounds(q_plus, q_minus, mu: SignedMeasure, alpha: float, C: float, sample: SampleSpec, r0: float = math.inf):
    """Check the signed two-sided conditions for the pair ``(q_plus, q_minus)``:

    ``mu+(B_{alpha r})/C - mu-(B_r) <= q_plus(B_r) <= C mu+(B_r)`` and the
    mirror statement for ``q_minus``.
    """
    plus, minus = hahn_split(mu)
    cs, rs = sample.grid(r0)
    certs = []
    for q, same, other in ((q_plus, plus, minus), (q_minus, minus, plus)):
        if len(rs) == 0:
            certs.append(_certificate([], [], cs, rs, alpha, C, r0, sample.radii))
            continue
        qv = q.values(cs, rs)
        lower = qv - (ball_masses(same, cs, alpha * rs) / C - ball_masses(other, cs, rs))
        upper = C * ball_masses(same, cs, rs) - qv
        certs.append(_certificate(lower, upper, cs, rs, alpha, C, r0, sample.radii))
    return certs[0], certs[1]
