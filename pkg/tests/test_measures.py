import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballrecon.measures import (
    Lebesgue,
    ReferenceMeasure,
    SelfMeasure,
    SignedMeasure,
    ball_masses,
    gamma_estimate,
    hahn_split,
    segment_chords,
    total_mass,
    total_variation,
)
from ballrecon.metric import DomainError, Euclidean, StarGraph
from ballrecon.opensets import OpenBall, OpenBox

E2 = Euclidean(2)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.01, 3))
def test_chord_matches_sampled_length(cx, cy, r):
    p0, p1 = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    got = segment_chords(p0[None], p1[None], np.array([[cx, cy]]), np.array([r]))[0, 0]
    t = (np.arange(200000) + 0.5) / 200000
    inside = np.hypot(t - cx, cy) <= r
    assert abs(got - inside.mean()) <= 2e-5


def test_ball_masses_atoms_and_chain():
    mu = SignedMeasure.from_data(E2, atoms=[((0.0, 0.0), 2.0), ((1.0, 0.0), -1.0)], chains=[([(0, 1), (2, 1)], 0.5)])
    m = ball_masses(mu, np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]), np.array([0.5, 1.0, 0.5]))
    assert m[0] == 2.0
    assert m[1] == 1.0 + 0.0  # both atoms, chain only tangent at distance 1
    assert math.isclose(m[2], 0.5 * 1.0)


def test_closed_ball_contains_atom_on_boundary():
    mu = SignedMeasure.from_data(E2, atoms=[((1.0, 0.0), 1.0)])
    assert ball_masses(mu, np.zeros((1, 2)), np.array([1.0]))[0] == 1.0


def test_hahn_split_and_variation():
    mu = SignedMeasure.from_data(E2, atoms=[((0, 0), 2.0), ((1, 0), -1.0)], chains=[([(0, 1), (1, 1)], -3.0)])
    plus, minus = hahn_split(mu)
    assert total_mass(plus) == 2.0
    assert math.isclose(total_mass(minus), 4.0)
    assert math.isclose(total_mass(total_variation(mu)), 6.0)
    assert plus.is_nonnegative and minus.is_nonnegative


def test_total_mass_in_region():
    mu = SignedMeasure.from_data(E2, atoms=[((0, 0), 1.0), ((3, 0), 1.0)], chains=[([(-1, 0.5), (1, 0.5)], 1.0)])
    assert math.isclose(total_mass(mu, OpenBall((0.0, 0.0), 1.0)), 1.0 + 2 * math.sqrt(0.75))
    # the atom at the origin sits on the boundary of the open box
    assert math.isclose(total_mass(mu, OpenBox((-0.5, 0.0), (0.5, 1.0))), 1.0)
    assert math.isclose(total_mass(mu, OpenBox((-0.5, -0.1), (0.5, 1.0))), 2.0)


def test_chains_need_euclidean_space():
    with pytest.raises(DomainError):
        SignedMeasure.from_data(StarGraph(3), chains=[([(0, 0.1), (0, 0.2)], 1.0)])


def test_lebesgue_gamma_is_exact_volume_ratio():
    g = gamma_estimate(Lebesgue(3), 0.5)
    assert g.exact and g.gamma == 8.0
    assert math.isclose(Lebesgue(2).ball_measure(1.0), math.pi)


def test_self_measure_gamma_on_a_segment():
    seg = SignedMeasure.from_data(E2, chains=[([(0, 0), (1, 0)], 1.0)])
    ref = ReferenceMeasure.build(SelfMeasure(seg), 0.5)
    assert abs(ref.gamma - 2.0) < 1e-9


def test_self_measure_gamma_for_atoms_is_one():
    mu = SignedMeasure.from_data(E2, atoms=[((0, 0), 1.0), ((1, 1), 3.0)])
    assert ReferenceMeasure.build(SelfMeasure(mu), 0.5).gamma == 1.0
