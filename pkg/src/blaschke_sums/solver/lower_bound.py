"""Lower bounds for block sums and the contraction step built on them."""
import math

import numpy as np

from ..core import BlaschkeProduct, interior_orbit
from ..errors import ConstructionStall, ContractionFailure, InvalidInputError
from ..series import partial_sum
from .blocks import build_block_plan
from .chart import Chart
from .common import arc_center_length, as_sequence, dilated_arc, mass, windowed
from .trace import SolverTrace

DEFAULT_T = 20
DEFAULT_T_SHORT = 2


def certify_lower_bound(f: BlaschkeProduct, a, z, M: int, N: int, consts,
                        T: int = DEFAULT_T, T_short: int = DEFAULT_T_SHORT,
                        budget: int = 256, shift: float = 0.0):
    """Point xi in c^-1 I(z) with Re sum_{n=M}^{N} a_n f^n(xi) bounded below by the mass.

    Long blocks are handled in order.  For each, the running real part of
    the sum is maximized over the current arc, and the arc is then shrunk
    so that its image at the block end has measure delta1; the short block
    after it acts as the gap.  Returns (xi, ratio, trace) with
    ratio = Re(sum) / sum |a_n|.
    """
    a = as_sequence(a)
    f.require_solver_contract()
    if not (1 <= M <= N):
        raise InvalidInputError("need 1 <= M <= N")
    zM = abs(interior_orbit(f, complex(z), M)[-1])
    if zM >= consts.epsilon_f:
        raise InvalidInputError(f"|f^M(z)| = {zM:.3g} is not below epsilon_f = {consts.epsilon_f:.3g}")
    total = mass(a, M, N)
    if total == 0:
        raise InvalidInputError("the block has no mass")
    plan = build_block_plan(a, M, N, T, T_short)
    center, length = arc_center_length(dilated_arc(z, 1 / consts.c_f))
    chart = Chart(f, windowed(a, M, N), center, length)
    trace = SolverTrace(f, block_plan=plan)
    trace.blocks = list(plan.long_blocks)
    for j, (b0, b1) in enumerate(plan.long_blocks):
        end = min(b1, N)
        if end < b0:
            continue
        if end < chart.N:
            continue
        chart.optimize(lambda v: -v.real, end, budget, shift, 0.5, consts.delta1)
        if chart.measure < consts.delta1 * (1 - 1e-6):
            raise ConstructionStall(f"arc image at block {j} is below delta1", block=j)
        trace.arcs.append((chart.N, float(chart.ref[chart.N]) + chart.lo, chart.measure))
        trace.partial_sum_log.append((j, chart.partial_sum(), "L"))
    if chart.N < N:
        chart.optimize(lambda v: -v.real, N, budget, shift, 0.5, consts.delta1)
    xi = chart.witness()
    value = partial_sum(f, a, xi, M, N)
    ratio = value.real / total
    threshold = consts.c_f * (1 - T_short / T) / 2
    trace.witness = xi
    trace.orbit = chart.orbit()
    trace.depth = N
    trace.certified = bool(ratio >= threshold)
    trace.diagnostics = {"ratio": ratio, "threshold": threshold, "mass": total,
                         "chart_value": chart.partial_sum(N), "recomputed_value": value}
    return xi, float(ratio), trace


def contraction_step(f: BlaschkeProduct, a, z_star, M: int, N: int, w_residual: complex,
                     consts, budget: int = 256, shift: float = 0.0):
    """Shrink a residual by a block: xi in eta^-1 I(z*) aligning the block with w.

    Returns (xi, w - block(xi)); raises ContractionFailure when the new
    residual is not below |w| - eta_f * sum |a_n|.
    """
    a = as_sequence(a)
    w = complex(w_residual)
    if not (1 <= M <= N):
        raise InvalidInputError("need 1 <= M <= N")
    total = mass(a, M, N)
    eta = consts.eta_f
    zM = abs(interior_orbit(f, complex(z_star), M)[-1])
    if zM > eta * (1 + 1e-12):
        raise InvalidInputError(f"|f^M(z*)| = {zM:.3g} exceeds eta_f = {eta:.3g}")
    if total > eta * abs(w) * (1 + 1e-12):
        raise InvalidInputError("block mass exceeds eta_f |w|")
    arc = dilated_arc(z_star, 1 / eta)
    center, length = arc_center_length(arc)
    if total == 0:
        from ..core import BoundaryPoint
        return BoundaryPoint.from_turn(center), w
    direction = w / abs(w)
    chart = Chart(f, windowed(a, M, N, np.conj(direction)), center, length)
    chart.optimize(lambda v: -v.real, N, budget, shift)
    xi = chart.witness()
    block = partial_sum(f, a, xi, M, N)
    new = w - block
    if abs(new) > abs(w) - eta * total + 1e-12 * max(1.0, abs(w)):
        raise ContractionFailure(
            f"residual {abs(new):.6g} is not below |w| - eta*mass = {abs(w) - eta * total:.6g}")
    return xi, new
