"""Locating a point where a block of the sum points in a given direction."""
import numpy as np

from ..circle import Arc
from ..core import BlaschkeProduct, BoundaryPoint
from ..errors import DegenerateInputError, InvalidInputError
from .chart import Chart
from .common import arc_center_length, as_sequence, windowed


def block_chart(f: BlaschkeProduct, a, M: int, N: int, direction: complex, arc: Arc) -> Chart:
    a = as_sequence(a)
    d = complex(direction)
    if abs(d) == 0:
        raise InvalidInputError("direction must be nonzero")
    center, length = arc_center_length(arc)
    return Chart(f, windowed(a, M, N, np.conj(d / abs(d))), center, length)


def search_block_maximizer(f: BlaschkeProduct, a, z, M: int, N: int, direction: complex,
                           search_arc: Arc, budget: int = 256, shift: float = 0.0):
    """Point of ``search_arc`` maximizing Re(conj(direction) sum_{n=M}^{N} a_n f^n).

    Coarse grid of ``budget`` points plus golden-section refinement of the
    best bracket, carried out level by level in the nested-arc chart.  ``z``
    is the disk point the arc was built from; it is only recorded.
    Returns (BoundaryPoint, achieved value).
    """
    if not (1 <= M <= N):
        raise InvalidInputError("need 1 <= M <= N")
    if budget < 2:
        raise InvalidInputError("budget must be at least 2")
    if search_arc.length <= 0:
        raise DegenerateInputError("empty search arc")
    chart = block_chart(f, a, M, N, direction, search_arc)
    chart.optimize(lambda v: -v.real, N, budget, shift)
    value = chart.partial_sum(N).real
    return chart.witness(), float(value)
