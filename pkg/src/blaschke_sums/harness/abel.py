"""Radial limits against boundary partial sums.

For z = r xi the comparison depth is N(z), the least n >= 1 with
m(f^n(I(z))) >= delta.  The boundary partial sum to depth N(z) and the
interior value F(r xi) then differ by at most C sup |a_n|, where C bounds

    sum_{n <= N} |f^n(xi) - f^n(z)| + sum_{n > N} |f^n(z)|.

``abel_constant`` estimates C on random (xi, r) and the checks test the
given configuration against that envelope.
"""
import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from gmpy2 import mpfr

from .. import _hp
from ..circle import Arc, arc_image
from ..core import BlaschkeProduct, BoundaryPoint, evaluate, expansion_constants, required_precision
from ..errors import InvalidInputError, NonConvergentInputWarning
from ..series import CoefficientSequence, orbit_values, tail_abs_sum
from .suites import lemma40_delta

SWITCH = 1e-4          # leave extended precision once 1 - |w| exceeds this
TAIL_EPS = 1e-17
ORBIT_CAP = 1_000_000
ENVELOPE = 1.25
MAX_SCHEDULE = 1000


def default_radii(j_max: int = 20):
    return [1 - 2.0 ** -j for j in range(1, j_max + 1)]


def sup_abs(a: CoefficientSequence, horizon: int = 100_000) -> float:
    if a.kind in ("power", "harmonic-log", "geometric") and (a.kind != "power" or a.p >= 0):
        return float(a.modulus(np.array([1]))[0])
    if a.kind == "list":
        return float(max((abs(v) for v in a.values), default=0.0))
    return float(np.max(np.abs(a(np.arange(1, horizon + 1)))))


def _g0(f: BlaschkeProduct) -> float:
    """|g(0)| for f = z g."""
    rest = list(f.zeros)
    rest.remove(0j)
    return float(abs(np.prod([-z for z in rest]))) if rest else 1.0


def radial_orbit(f: BlaschkeProduct, xi: BoundaryPoint, h: float):
    """f^n((1 - h) xi) for n = 1..L and a factor bounding the rest.

    The orbit starts in extended precision and drops to double once it is
    SWITCH away from the circle.  With f = z g, Schwarz-Pick gives
    |g(w)| <= q(|w|) = (|w| + |g(0)|) / (1 + |g(0)| |w|), so past the last
    iterate w_L, sum_{n > L} |a_n f^n| <= sup|a| * s q / (1 - q) with s = |w_L|.
    Returns (values, factor).
    """
    if not 0 < h <= 1:
        raise InvalidInputError("radial checks need 0 < 1 - r <= 1")
    f.require_solver_contract()
    g0 = _g0(f)
    bits = max(64, math.ceil(-math.log2(h)) + 80)
    vals = []
    with _hp._ctx(bits + _hp.GUARD):
        hz = _hp.hp_zeros(f.zeros)
        x = xi.with_precision(max(xi.precision_bits, bits))
        w = _hp.unit_from_turn(mpfr(x.numerator) / mpfr(1 << x.precision_bits), bits)
        w = w * (1 - mpfr(h))
        while 1 - abs(w) < SWITCH:
            w = _hp.moebius_product(hz, w)
            vals.append(complex(w))
    w = complex(w)
    while True:
        s = abs(w)
        q = (s + g0) / (1 + g0 * s)
        factor = s * q / (1 - q) if q < 1 else math.inf
        if (factor <= TAIL_EPS and vals) or s == 0.0:
            return np.array(vals, dtype=np.complex128), factor if s else 0.0
        if len(vals) >= ORBIT_CAP:
            return np.array(vals, dtype=np.complex128), factor
        w = evaluate(f, w)
        vals.append(w)


def radial_value(f: BlaschkeProduct, a: CoefficientSequence, xi: BoundaryPoint, h: float,
                 sup: float | None = None):
    """F((1 - h) xi) and a bound on the neglected tail."""
    vals, factor = radial_orbit(f, xi, h)
    coef = a.array(len(vals))
    sup = sup_abs(a) if sup is None else sup
    return complex(np.sum(coef[1:] * vals)), sup * factor


def depth_of(f: BlaschkeProduct, xi: BoundaryPoint, h: float, delta: float) -> int:
    """N(z) for z = (1 - h) xi: least n >= 1 with m(f^n(I(z))) >= delta."""
    if h >= 1:
        return 1
    arc = Arc(xi.turn, Fraction(h), xi.precision_bits)
    kmin = expansion_constants(f).k_min
    if h >= delta:
        return 1
    hi = max(1, math.ceil(math.log(delta / h) / math.log(kmin))) + 1
    while arc_image(f, arc, hi).measure < delta:
        hi *= 2
    lo = 0      # measure at lo is below delta (h < delta)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if arc_image(f, arc, mid).measure >= delta:
            hi = mid
        else:
            lo = mid
    return hi


def _point_bits(f, xi, depth):
    return max(xi.precision_bits, required_precision(f, depth) if f.mono == 0 else depth + 120)


@functools.lru_cache(maxsize=32)
def abel_constant(f: BlaschkeProduct, delta: float | None = None, trials: int = 256,
                  seed: int = 0, max_halvings: int = 40):
    """Empirical envelope C_emp of the two-sided orbit sum, with its log.

    (xi, h) are random: xi uniform, log2(1/h) uniform in [1, max_halvings].
    C_emp is ENVELOPE times the largest value seen.
    """
    delta = lemma40_delta(f) if delta is None else delta
    worst, arg = 0.0, None
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        h = 2.0 ** -rng.uniform(1, max_halvings)
        N = None
        xi = BoundaryPoint.from_turn(float(rng.random()), 64)
        N = depth_of(f, xi, h, delta)
        xi = xi.with_precision(_point_bits(f, xi, N))
        bnd = orbit_values(f, xi, N)[1:]
        vals, factor = radial_orbit(f, xi, h)
        L = max(N, len(vals))
        inner = np.zeros(L, dtype=complex)
        inner[:len(vals)] = vals
        c = float(np.sum(np.abs(bnd - inner[:N])) + np.sum(np.abs(inner[N:])) + factor)
        if c > worst:
            worst, arg = c, {"turn": xi.turn_float, "h": h, "N": N}
    return ENVELOPE * worst, {"trials": trials, "seed": seed, "delta": delta,
                              "max_observed": worst, "worst_case": arg, "envelope": ENVELOPE}


@dataclass
class AbelReport:
    xi: BoundaryPoint
    delta: float
    sup_a: float
    C_emp: float
    rows: list
    converged: bool
    notes: list = field(default_factory=list)

    @property
    def bound(self) -> float:
        return self.C_emp * self.sup_a

    @property
    def max_discrepancy(self) -> float:
        return max((r["discrepancy"] for r in self.rows), default=0.0)

    @property
    def within_bound(self) -> bool:
        return self.max_discrepancy <= self.bound

    def to_json(self) -> dict:
        return {"xi": self.xi.to_json(), "delta": self.delta, "sup_a": self.sup_a,
                "C_emp": self.C_emp, "bound": self.bound,
                "max_discrepancy": self.max_discrepancy, "within_bound": self.within_bound,
                "converged": self.converged, "notes": self.notes,
                "rows": [{k: ([v.real, v.imag] if isinstance(v, complex) else v)
                          for k, v in r.items()} for r in self.rows]}


def _cauchy_ok(f, a, xi, N):
    """Whether S_2N - S_N stays within the declared tail (or shrinks) at xi."""
    if a.abs_summable:
        try:
            return True, tail_abs_sum(a, N).upper
        except InvalidInputError:
            pass
    x = xi.with_precision(_point_bits(f, xi, 4 * N))
    orb = orbit_values(f, x, 4 * N)
    s = np.cumsum(a.array(4 * N) * orb)
    d1, d2 = abs(s[2 * N] - s[N]), abs(s[4 * N] - s[2 * N])
    return d2 <= d1 + 1e-15, d2


def abel_check(f: BlaschkeProduct, a: CoefficientSequence, xi: BoundaryPoint, radii=None,
               delta: float | None = None, C_emp: float | None = None) -> AbelReport:
    """Boundary partial sum at depth N(r xi) against F(r xi), for each radius."""
    f.require_solver_contract()
    radii = default_radii() if radii is None else list(radii)
    if any(not 0 <= r < 1 for r in radii):
        raise InvalidInputError("radii must lie in [0, 1)")
    delta = lemma40_delta(f) if delta is None else delta
    if C_emp is None:
        C_emp = abel_constant(f, delta)[0]
    sup = sup_abs(a)
    hs = [1 - r for r in radii]
    depths = [depth_of(f, xi, h, delta) for h in hs]
    top = max(depths, default=1)
    x = xi.with_precision(_point_bits(f, xi, top))
    sums = np.cumsum(a.array(top) * orbit_values(f, x, top))
    rows = []
    for r, h, N in zip(radii, hs, depths):
        val, tail = radial_value(f, a, x, h, sup)
        b = complex(sums[N])
        rows.append({"r": r, "h": h, "N": N, "boundary_sum": b, "radial_value": val,
                     "discrepancy": abs(b - val), "tail_bound": tail})
    ok, spread = _cauchy_ok(f, a, x, max(top, 8))
    notes = []
    if not ok:
        msg = f"partial sums at xi fail the Cauchy check (last spread {spread:.3g})"
        warnings.warn(msg, NonConvergentInputWarning, stacklevel=2)
        notes.append(msg)
    return AbelReport(xi, delta, sup, C_emp, rows, ok, notes)


def radius_for_depth(f: BlaschkeProduct, xi: BoundaryPoint, N: int, delta: float) -> float:
    """Some h with N((1 - h) xi) = N; a derivative guess, then bisection on log h."""
    x = xi.with_precision(_point_bits(f, xi, N))
    orb = orbit_values(f, x, N)
    dm = [sum((1 - abs(z) ** 2) / abs(w - z) ** 2 for z in f.zeros) for w in orb[:N]]
    logd = np.concatenate([[0.0], np.cumsum(np.log(dm))])
    guess = math.log(delta) - 0.5 * (logd[N] + logd[N - 1])
    lo, hi = guess - 2.0, guess + 2.0     # log h; larger h gives smaller N
    for _ in range(60):
        if depth_of(f, x, min(1.0, math.exp(guess)), delta) == N:
            return min(1.0, math.exp(guess))
        n_lo = depth_of(f, x, math.exp(lo), delta)
        n_hi = depth_of(f, x, min(1.0, math.exp(hi)), delta)
        if n_lo < N:
            lo -= 2.0
            continue
        if n_hi > N:
            hi += 2.0
            continue
        guess = 0.5 * (lo + hi)
        n_mid = depth_of(f, x, min(1.0, math.exp(guess)), delta)
        if n_mid > N:
            lo = guess
        elif n_mid < N:
            hi = guess
    raise InvalidInputError(f"no radius realizes depth {N}")


def hausdorff(A, B) -> float:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.size == 0 or B.size == 0:
        return 0.0 if A.size == B.size else math.inf
    D = np.abs(A[:, None] - B[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass
class ClusterReport:
    depths: list
    hs: list
    boundary_sums: list
    radial_values: list
    hausdorff: float
    matched_max: float
    sup_a: float
    C_emp: float

    @property
    def bound(self) -> float:
        return self.C_emp * self.sup_a

    @property
    def within_bound(self) -> bool:
        return self.hausdorff <= self.bound

    def to_json(self) -> dict:
        return {"depths": self.depths, "h": self.hs,
                "boundary_sums": [[z.real, z.imag] for z in self.boundary_sums],
                "radial_values": [[z.real, z.imag] for z in self.radial_values],
                "hausdorff": self.hausdorff, "matched_max": self.matched_max,
                "sup_a": self.sup_a, "C_emp": self.C_emp, "bound": self.bound,
                "within_bound": self.within_bound}


def radial_cluster_compare(f: BlaschkeProduct, a: CoefficientSequence, xi: BoundaryPoint,
                           depth_schedule, delta: float | None = None,
                           C_emp: float | None = None) -> ClusterReport:
    """Hausdorff distance between {S_N(xi)} and {F(r_N xi)} over the schedule."""
    f.require_solver_contract()
    depths = sorted({int(n) for n in depth_schedule})
    if not depths or depths[0] < 1:
        raise InvalidInputError("depth schedule must hold positive integers")
    if len(depths) > MAX_SCHEDULE:
        raise InvalidInputError(f"schedules are capped at {MAX_SCHEDULE} depths")
    delta = lemma40_delta(f) if delta is None else delta
    if C_emp is None:
        C_emp = abel_constant(f, delta)[0]
    sup = sup_abs(a)
    top = depths[-1]
    x = xi.with_precision(_point_bits(f, xi, top))
    sums = np.cumsum(a.array(top) * orbit_values(f, x, top))
    hs, bs, rs = [], [], []
    for N in depths:
        h = radius_for_depth(f, x, N, delta)
        hs.append(h)
        bs.append(complex(sums[N]))
        rs.append(radial_value(f, a, x, h, sup)[0])
    matched = max(abs(b - v) for b, v in zip(bs, rs))
    return ClusterReport(depths, hs, bs, rs, hausdorff(bs, rs), float(matched), sup, C_emp)
