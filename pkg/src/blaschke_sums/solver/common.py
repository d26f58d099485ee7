"""Helpers shared by the solvers."""
import math
from fractions import Fraction

import numpy as np

from ..circle import Arc, arc_from_point
from ..series import CoefficientSequence


def as_sequence(a) -> CoefficientSequence:
    if isinstance(a, CoefficientSequence):
        return a
    return CoefficientSequence.explicit([complex(v) for v in a])


def windowed(a: CoefficientSequence, M: int = 1, N: int | None = None, scale: complex = 1.0):
    """Coefficient provider n_max -> a_0..a_{n_max}, zero outside [M, N]."""
    def source(n_max):
        arr = a.array(n_max) * scale
        arr[:M] = 0
        if N is not None:
            arr[N + 1:] = 0
        return arr
    return source


def dilated_arc(z, factor: float) -> Arc:
    """factor * I(z), centered like I(z); the full circle for z = 0 or when it wraps."""
    z = complex(z)
    r = abs(z)
    if r == 0 or (1 - r) * factor >= 1:
        return Arc.full()
    base = arc_from_point(z)
    return Arc(base.center_turn, Fraction(factor) * base.length)


def arc_center_length(arc: Arc):
    return float(arc.center_turn), min(float(arc.length), 1.0)


def mass(a: CoefficientSequence, M: int, N: int) -> float:
    if N < M:
        return 0.0
    return float(np.sum(a.modulus(np.arange(M, N + 1))))
