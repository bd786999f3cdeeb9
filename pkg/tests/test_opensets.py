import math

import numpy as np
from hypothesis import given, strategies as st

from ballrecon.opensets import Neighborhood, OpenBall, OpenBox, Union


def _sampled_fraction(U, p0, p1, n=100001):
    t = np.linspace(0, 1, n)
    pts = p0 + t[:, None] * (p1 - p0)
    return U.contains(pts).mean()


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_neighbourhood_clip_matches_sampling(a, b, c, d):
    U = Neighborhood(0.3, points=((0.5, 0.5),), polylines=(np.array([[-0.5, 0.0], [0.5, 0.2], [0.6, -0.6]]),))
    p0, p1 = np.array([a, b]), np.array([c, d])
    length = np.linalg.norm(p1 - p0)
    if length < 1e-3:
        return
    assert abs(U.clip_length(p0, p1) / length - _sampled_fraction(U, p0, p1)) < 1e-4


def test_ball_and_box_clip_lengths():
    p0, p1 = np.array([-2.0, 0.0]), np.array([2.0, 0.0])
    assert math.isclose(OpenBall((0.0, 0.5), 1.0).clip_length(p0, p1), 2 * math.sqrt(0.75))
    assert math.isclose(OpenBox((-1.0, -1.0), (0.5, 1.0)).clip_length(p0, p1), 1.5)


def test_clearance_values():
    assert np.allclose(OpenBall((0.0, 0.0), 1.0).clearance(np.array([[0.5, 0.0]])), 0.5)
    assert np.allclose(OpenBox((0.0, 0.0), (1.0, 2.0)).clearance(np.array([[0.25, 1.0]])), 0.25)
    nb = Neighborhood(0.2, polylines=(np.array([[0.0, 0.0], [1.0, 0.0]]),))
    assert np.allclose(nb.clearance(np.array([[0.5, 0.05], [1.1, 0.0]])), [0.15, 0.1])


def test_union_containment_is_conservative():
    U = Union((OpenBall((0.0, 0.0), 1.0), OpenBall((1.5, 0.0), 1.0)))
    # a ball straddling both parts is inside the union but is not accepted
    assert U.contains(np.array([[0.75, 0.0]]))[0]
    assert not U.holds_ball(np.array([0.75, 0.0]), 0.5)
    assert U.holds_ball(np.array([0.0, 0.0]), 0.5)
