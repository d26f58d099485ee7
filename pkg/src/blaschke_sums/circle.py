"""Arcs of the unit circle, argument lifts and arc images under iterates."""
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from . import _hp, _kernels
from .core import (DEFAULT_BITS, BlaschkeProduct, BoundaryPoint, expansion_constants, parse_fraction,
                   required_precision)
from .errors import (DegenerateInputError, FullCircleError, InfeasibleError, InvalidInputError,
                     QuadratureError)

MAX_DEPTH = 60


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Arc:
    """Closed arc with center ``center_turn`` and normalized measure ``length``."""
    center_turn: Fraction
    length: Fraction
    precision_bits: int = DEFAULT_BITS

    def __post_init__(self):
        c = _frac(self.center_turn)
        L = _frac(self.length)
        if not (0 < L <= 1):
            raise InvalidInputError(f"arc length must lie in (0, 1], got {float(L)}")
        object.__setattr__(self, "center_turn", c - math.floor(c))
        object.__setattr__(self, "length", L)

    @classmethod
    def from_start(cls, start, length, precision_bits: int = DEFAULT_BITS) -> "Arc":
        start, length = _frac(start), _frac(length)
        return cls(start + length / 2, length, precision_bits)

    @classmethod
    def full(cls) -> "Arc":
        return cls(Fraction(0), Fraction(1))

    @property
    def is_full_circle(self) -> bool:
        return self.length == 1

    @property
    def start(self) -> Fraction:
        """Counterclockwise first endpoint, as an unreduced turn."""
        return self.center_turn - self.length / 2

    @property
    def end(self) -> Fraction:
        return self.center_turn + self.length / 2

    def contains(self, turn) -> bool:
        if self.is_full_circle:
            return True
        off = (_frac(turn) - self.start) % 1
        return off <= self.length

    def offset_of(self, turn) -> Fraction:
        """Position of a turn measured from the start endpoint, in [0, 1)."""
        return (_frac(turn) - self.start) % 1

    def to_json(self) -> dict:
        digits = max(20, math.ceil(self.precision_bits * math.log10(2)))
        return {"center_turn": _decimal(self.center_turn, digits),
                "length": _decimal(self.length, digits),
                "is_full_circle": self.is_full_circle}

    @classmethod
    def from_json(cls, data) -> "Arc":
        try:
            return cls(parse_fraction(str(data["center_turn"])),
                       parse_fraction(str(data["length"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed arc: {exc}") from exc


def _decimal(fr: Fraction, digits: int) -> str:
    scaled = round(fr * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    s = gmpy2.mpz(abs(scaled)).digits(10).rjust(digits + 1, "0")
    head, tail = s[:-digits], s[-digits:].rstrip("0")
    return f"{sign}{head}.{tail or '0'}"


@dataclass(frozen=True)
class ArcImageResult:
    measure: float
    image: Arc
    injective: bool

    def to_json(self) -> dict:
        return {"measure": self.measure, "image": self.image.to_json(),
                "injective": self.injective}


def argument_lift(f: BlaschkeProduct, from_turn, to_turn, accuracy_bits: int = 40) -> float:
    """Image measure with multiplicity of the turn interval [from_turn, to_turn].

    Adaptive quadrature of the Poisson sum to absolute tolerance
    2**-accuracy_bits.
    """
    a, b = float(from_turn), float(to_turn)
    if not (a <= b <= a + 1 + 1e-15):
        raise InvalidInputError("argument_lift needs from_turn <= to_turn <= from_turn + 1")
    val, ok = _kernels.quad_lift(f.zeros_array, a, b, 2.0 ** -accuracy_bits, MAX_DEPTH)
    if not ok:
        raise QuadratureError(
            f"quadrature did not reach 2^-{accuracy_bits} within depth {MAX_DEPTH}")
    return val


def lift(f: BlaschkeProduct, start: float, length: float) -> float:
    """Closed-form lifted measure of [start, start + length] (per-factor angles)."""
    return _kernels.lift(f.zeros_array, f.mono, float(start), float(length))


def arc_from_point(z) -> Arc:
    z = complex(z)
    r = abs(z)
    if r == 0:
        raise DegenerateInputError("I(0) has no center direction")
    if r >= 1:
        raise InvalidInputError("arc_from_point needs |z| < 1")
    center = math.atan2(z.imag, z.real) / (2 * math.pi)
    return Arc(Fraction(center), Fraction(1) - Fraction(r))


def point_from_arc(arc: Arc) -> complex:
    if arc.is_full_circle:
        raise FullCircleError("z(I) is undefined for the full circle")
    a = 2 * math.pi * float(arc.center_turn)
    return (1 - float(arc.length)) * complex(math.cos(a), math.sin(a))


def arc_image(f: BlaschkeProduct, arc: Arc, n: int, accuracy_bits: int = 53) -> ArcImageResult:
    """f^n(arc) with its unclamped lifted measure.

    The start endpoint is iterated exactly in extended precision.  While the
    arc is short its measure comes from the angle between the two image
    endpoints (exact, since the image is below a half turn); otherwise the
    closed-form lift from the start endpoint is used, which stays valid for
    lifted lengths beyond 1 by counting whole windings.
    """
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    d = f.degree
    if arc.is_full_circle:
        measure = float(d) ** n
        return ArcImageResult(measure, Arc.full(), False)
    if n == 0:
        return ArcImageResult(float(arc.length), arc, True)
    ec = expansion_constants(f)
    if f.mono:
        measure = float(arc.length * d ** n)
        start = arc.start * d ** n
        return _result(start, measure, arc.precision_bits)
    bits = max(required_precision(f, n, accuracy_bits), arc.precision_bits)
    # grid fine enough to resolve the arc itself
    bits = max(bits, int(-math.log2(float(arc.length))) + accuracy_bits + 64)
    m = float(arc.length)
    small = 0.5 / ec.k_max
    zeros = f.zeros_array
    with _hp._ctx(bits + _hp.GUARD):
        hz = _hp.hp_zeros(f.zeros)
        two_pi = 2 * gmpy2.const_pi()
        start = arc.start
        wa = _hp.unit_from_turn(gmpy2.mpfr(start.numerator) / start.denominator, bits)
        end = arc.end
        wb = _hp.unit_from_turn(gmpy2.mpfr(end.numerator) / end.denominator, bits)
        for _ in range(n):
            if m >= small:
                ta = math.atan2(complex(wa).imag, complex(wa).real) / (2 * math.pi)
                m = _kernels.lift(zeros, 0, ta, m)
            wa = _hp.moebius_product(hz, wa)
            wa = wa / abs(wa)
            if m < small:
                wb = _hp.moebius_product(hz, wb)
                wb = wb / abs(wb)
                r = complex(wb / wa)
                m = math.atan2(r.imag, r.real) / (2 * math.pi)
        ts = gmpy2.atan2(wa.imag, wa.real) / two_pi
        start_fr = Fraction(_hp.round_turn(ts, bits), 1 << bits)
    return _result(start_fr, m, arc.precision_bits)


def _result(start: Fraction, measure: float, bits: int) -> ArcImageResult:
    if measure >= 1:
        return ArcImageResult(measure, Arc.full(), False)
    L = Fraction(measure)
    return ArcImageResult(measure, Arc.from_start(start, L, bits), True)


def find_subarc_with_image_measure(f: BlaschkeProduct, arc: Arc, n: int, xi,
                                   delta: float, rel_tol: float = 1e-6) -> Arc:
    """Sub-arc J of ``arc`` containing xi with m(f^n(J)) = delta (relative 1e-6).

    J grows symmetrically about xi and is clipped at the ends of ``arc``;
    the half-width is found by bisection in log scale.
    """
    if not (0 < delta < 1):
        raise InfeasibleError("target measure must lie in (0, 1)")
    t = xi.turn if isinstance(xi, BoundaryPoint) else _frac(xi)
    if not arc.contains(t):
        raise InfeasibleError("xi is not in the arc")
    if arc_image(f, arc, n).measure < delta * (1 - rel_tol):
        raise InfeasibleError("the arc's image is too short for the requested measure")
    if arc.is_full_circle:
        lo_room = hi_room = Fraction(1, 2)
        base = t
    else:
        base = arc.start + arc.offset_of(t)
        lo_room, hi_room = base - arc.start, arc.end - base

    def sub(r):
        a = base - min(r, lo_room)
        b = base + min(r, hi_room)
        return Arc.from_start(a, b - a, arc.precision_bits)

    rmax = max(lo_room, hi_room)

    def meas(r):
        return arc_image(f, sub(r), n).measure

    ec = expansion_constants(f)
    # a bracket from the expansion bounds, refined in log2 r
    lo = math.log2(max(delta / (2 * ec.k_max ** n), 1e-300))
    hi = math.log2(float(rmax))
    if meas(Fraction(2.0 ** lo)) > delta:
        lo -= 64
    best = None
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        r = Fraction(2.0 ** mid)
        v = meas(r)
        if abs(v - delta) <= rel_tol * delta:
            best = r
            break
        if v < delta:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            best = Fraction(2.0 ** hi)
            break
    if best is None:
        raise InfeasibleError("bisection failed to match the requested measure")
    if best >= rmax:
        best = rmax
    return sub(best)


def check_full_image_property(f: BlaschkeProduct, eps: float, grid: int = 2048) -> bool:
    """Whether every arc of measure 1/2 - eps is mapped onto the whole circle."""
    return min_half_arc_image(f, eps, grid) >= 1.0


def min_half_arc_image(f: BlaschkeProduct, eps: float, grid: int = 2048) -> float:
    if not (0 < eps < 0.5):
        raise InvalidInputError("eps must lie in (0, 1/2)")
    L = 0.5 - eps
    zeros, mono = f.zeros_array, f.mono
    starts = np.arange(grid) / grid
    vals = np.array([_kernels.lift(zeros, mono, s, L) for s in starts])
    best = float(vals.min())
    h = 1.0 / grid
    for i in np.argsort(vals)[:4]:
        a, b = starts[i] - h, starts[i] + h
        g = (math.sqrt(5) - 1) / 2
        for _ in range(60):
            c, dd = b - g * (b - a), a + g * (b - a)
            if _kernels.lift(zeros, mono, c, L) < _kernels.lift(zeros, mono, dd, L):
                b = dd
            else:
                a = c
        best = min(best, _kernels.lift(zeros, mono, 0.5 * (a + b), L))
    return best
