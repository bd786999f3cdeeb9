"""Acceptance criteria: one PASS/FAIL line per criterion with its runtime.

Run ``pytest tests/test_acceptance.py -v`` (the table is printed in the
terminal summary) or ``python3 tests/test_acceptance.py`` for the table alone.
"""

import math
import time

import numpy as np
import pytest

from ballrecon.measures import SignedMeasure
from ballrecon.metric import Euclidean
from ballrecon.opensets import OpenBall, Union
from ballrecon.packing import PackingStrategy, packing_sweep
from ballrecon.premeasures import Noisy
from ballrecon.scenarios import RunContext, run_scenario
from ballrecon.scene import Scene

RESULTS: list[str] = []
DELTAS = (0.2, 0.1, 0.05, 0.02, 0.01)


def _scenario(name, seed=0):
    return run_scenario(name, Scene(seed=seed), RunContext())


def _verdicts(rep, prefix=""):
    return [v for v in rep.verdicts if v.name.startswith(prefix)]


def _all(vs):
    return bool(vs) and all(v.passed for v in vs)


def crit_dirac_covering():
    rep = _scenario("dirac-loss")
    formula, loss = _verdicts(rep, "off-centre")[0], _verdicts(rep, "covering loss")[0]
    return formula.passed and loss.passed, (
        f"max formula error {formula.lhs:.2e} <= 1e-12; cover value at delta=0.02 {loss.lhs:.3e} <= 0.01")


def crit_dirac_packing():
    rep = _scenario("dirac-loss")
    rec, ex = _verdicts(rep, "packing recovery")[0], _verdicts(rep, "packing exact")[0]
    return rec.passed and ex.passed, f"packing limit {rec.lhs!r} vs 1, exact={bool(ex.lhs)}"


def crit_curve_covering():
    rep = _scenario("curve-loss")
    worst = max(abs(v.lhs - v.rhs) for v in _verdicts(rep, "closed-form bound"))
    return rep.passed and len(_verdicts(rep, "value<=2L")) == len(DELTAS), (
        f"{len(rep.verdicts)} checks over {len(DELTAS)} deltas; max |bound - 2 L delta| {worst:.1e}")


def crit_atomic():
    rep = _scenario("atomic-recovery")
    inst = [v for v in rep.verdicts if not v.name.endswith("exact")]
    worst = max(abs(v.lhs - v.rhs) for v in inst)
    return rep.passed and len(inst) == 50, f"{len(inst)} instances, max |estimate - mu(U)| {worst:.1e}"


def crit_sandwich():
    rep = _scenario("sandwich")
    rows = {r[0]: r for r in rep.rows}
    est = rows["A[self]"][3]
    in_self = 0.25 - 1e-9 <= est <= 2.0 + 1e-9
    in_leb = 0.125 - 1e-9 <= rows["A[lebesgue]"][3] <= 2.0 + 1e-9
    return rep.passed and in_self and in_leb and abs(est - 0.5) <= 0.05, (
        f"estimate {est:.6f}; self bounds [{rows['A[self]'][2]:.4g}, {rows['A[self]'][4]:.4g}], "
        f"lebesgue bounds [{rows['A[lebesgue]'][2]:.4g}, {rows['A[lebesgue]'][4]:.4g}]")


def crit_cover_lemma():
    rep = _scenario("cover-exact")
    vals = [v for v in rep.verdicts if not v.name.endswith("exact")]
    worst = min(v.rhs - v.lhs for v in vals)
    return rep.passed, f"{len(vals)} exact covers, min (cover value - mu(target)) {worst:.2e}"


def crit_subadditive():
    rng = np.random.default_rng(7)
    st = PackingStrategy(nested=True)
    worst, n, skipped = -math.inf, 0, 0
    while n < 25:
        pos = rng.uniform(0, 1, (8, 2))
        mu = SignedMeasure.from_data(Euclidean(2), atoms=[(tuple(p), float(w)) for p, w in zip(pos, rng.uniform(0.5, 2, 8))])
        q = Noisy(mu, 2.0, int(rng.integers(1 << 30)))
        U1 = OpenBall(tuple(rng.uniform(0.2, 0.8, 2)), float(rng.uniform(0.2, 0.4)))
        U2 = OpenBall(tuple(rng.uniform(0.2, 0.8, 2)), float(rng.uniform(0.2, 0.4)))
        s1, s2, s12 = (packing_sweep(U, q, DELTAS, st) for U in (U1, U2, Union((U1, U2))))
        if not (s1.all_exact and s2.all_exact and s12.all_exact):
            skipped += 1
            continue
        n += 1
        worst = max(worst, s12.limit - s1.limit - s2.limit)
    # disjoint open sets, positively separated
    pos = np.r_[rng.uniform(0, 0.4, (5, 2)), rng.uniform(0.6, 1.0, (5, 2))]
    mu = SignedMeasure.from_data(Euclidean(2), atoms=[(tuple(p), 1.0 + i / 10) for i, p in enumerate(pos)])
    q = Noisy(mu, 2.0, 11)
    U1, U2 = OpenBall((0.2, 0.2), 0.29), OpenBall((0.8, 0.8), 0.29)
    s1, s2, s12 = (packing_sweep(U, q, DELTAS, st) for U in (U1, U2, Union((U1, U2))))
    gap = abs(s12.limit - s1.limit - s2.limit)
    ok = worst <= 1e-9 and gap <= 1e-12 and s12.all_exact
    return ok, f"25 exact instances ({skipped} heuristic skipped), max excess {worst:.1e}; disjoint gap {gap:.1e}"


def crit_signed():
    rep = _scenario("signed")
    vals = {v.name: v.lhs for v in rep.verdicts}
    return rep.passed, (f"covering ({vals['covering plus']!r}, {vals['covering minus']!r}), "
                        f"packing ({vals['packing plus']!r}, {vals['packing minus']!r}), sandwich on |mu| ok")


def crit_tricot():
    rep = _scenario("tricot-compare")
    gaps = [v.lhs for v in rep.verdicts if not v.name.endswith("exact")]
    return rep.passed and len(gaps) == 20, f"{len(gaps)} instances, max gap {max(gaps):.1e}"


def crit_stability():
    rep = _scenario("stability")
    errs = [r[3] for r in rep.rows]
    return rep.passed and len(errs) == 10, f"{len(errs)} instances, max |hat - mu| {max(errs):.1e}"


def crit_besicovitch():
    rep = _scenario("besicovitch-demo")
    v = {x.name: x for x in rep.verdicts}
    return rep.passed, (f"{int(v['disjointness'].lhs)} violations, {int(v['coverage'].lhs)}/200 centres covered, "
                        f"{int(v['subfamily count'].lhs)} subfamilies <= 19; doubling re-verified")


def crit_probe():
    step = 2 * math.pi / 720
    gap_steps = math.ceil(2 * math.asin(1 / 6) / step)
    oracle = 720 // gap_steps
    rep = _scenario("directional-probe")
    got = int(_verdicts(rep, "R2 circle")[0].lhs)
    stars = [int(v.lhs) for v in _verdicts(rep, "star")]
    return rep.passed and got == oracle == 18 and stars == [5, 10, 25], (
        f"R2 max_card {got} (oracle floor(720/{gap_steps}) = {oracle}); star graphs {stars}")


CRITERIA = [
    (1, "Dirac covering loss", 5, crit_dirac_covering),
    (2, "Dirac packing recovery", 5, crit_dirac_packing),
    (3, "Curve covering loss", 30, crit_curve_covering),
    (4, "Atomic exactness", 60, crit_atomic),
    (5, "Sandwich bounds", 120, crit_sandwich),
    (6, "Covering value dominates the measure", 60, crit_cover_lemma),
    (7, "Sub-additivity on open sets", 120, crit_subadditive),
    (8, "Signed reconstruction", 30, crit_signed),
    (9, "Tricot equivalence", 60, crit_tricot),
    (10, "Stability with exact premeasure", 60, crit_stability),
    (11, "Besicovitch properties", 60, crit_besicovitch),
    (12, "Directional probe", 60, crit_probe),
]


def run_criterion(num, title, budget, fn):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # reported as a failure line, then re-raised by the test
        ok, detail = False, f"error: {exc!r}"
    dt = time.perf_counter() - t0
    ok = ok and dt < budget
    line = f"{'PASS' if ok else 'FAIL'}  [{num:2d}] {title}: {detail} ({dt:.1f} s, budget {budget} s)"
    RESULTS.append(line)
    return ok, line


@pytest.mark.parametrize("num,title,budget,fn", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, budget, fn):
    ok, line = run_criterion(num, title, budget, fn)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
