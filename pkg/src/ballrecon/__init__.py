"""Reconstruct measures from premeasures on balls.

Coverings (Caratheodory's Method II) and packings of disjoint closed balls
applied to exactly evaluable measures made of atoms and polyline chains.
"""

from .covering import caratheodory_sweep, min_cover_value, signed_cover_reconstruct
from .measures import Lebesgue, ReferenceMeasure, SelfMeasure, SignedMeasure, ball_mass, ball_masses
from .metric import Ball, BallSet, Euclidean, FiniteMetric, Point, StarGraph, directional_limited_probe
from .packing import CompactSet, max_packing_value, outer_regularize, packing_sweep
from .premeasures import Averaged, Exact, Kernel, Noisy, SignedPart, certify_bounds, certify_signed_bounds

__version__ = "0.1.0"

__all__ = [
    "Averaged",
    "Ball",
    "BallSet",
    "CompactSet",
    "Euclidean",
    "Exact",
    "FiniteMetric",
    "Kernel",
    "Lebesgue",
    "Noisy",
    "Point",
    "ReferenceMeasure",
    "SelfMeasure",
    "SignedMeasure",
    "SignedPart",
    "StarGraph",
    "ball_mass",
    "ball_masses",
    "caratheodory_sweep",
    "certify_bounds",
    "certify_signed_bounds",
    "directional_limited_probe",
    "max_packing_value",
    "min_cover_value",
    "outer_regularize",
    "packing_sweep",
    "signed_cover_reconstruct",
]
