"""Finite Blaschke products: evaluation, iteration and expansion constants."""
import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from . import _hp, _kernels
from .errors import (DegenerateOrbitError, InvalidInputError, NotExpandingError,
                     PoleProximityError, PrecisionBudgetExceeded)

DEFAULT_BITS = 256
CERTIFIED_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BlaschkeProduct:
    """f(z) = prod (z - z_n) / (1 - conj(z_n) z) with zeros in the open disk."""
    zeros: tuple

    def __init__(self, zeros: Sequence[complex]):
        zs = tuple(complex(z) for z in zeros)
        if not zs:
            raise InvalidInputError("a Blaschke product needs at least one zero")
        for z in zs:
            if not (abs(z) < 1.0) or not math.isfinite(abs(z)):
                raise InvalidInputError(f"zero {z!r} is not in the open unit disk")
        object.__setattr__(self, "zeros", zs)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def zero_at_origin_count(self) -> int:
        return sum(1 for z in self.zeros if z == 0)

    @property
    def fixes_origin(self) -> bool:
        return self.zero_at_origin_count >= 1

    @property
    def mono(self) -> int:
        """Degree if f is the monomial z**d, else 0."""
        return self.degree if self.zero_at_origin_count == self.degree else 0

    @functools.cached_property
    def zeros_array(self) -> np.ndarray:
        return np.array(self.zeros, dtype=np.complex128)

    def require_solver_contract(self):
        """Solvers need f(0) = 0 and degree >= 2."""
        if not self.fixes_origin:
            raise InvalidInputError("f must fix the origin (some zero equal to 0)")
        if self.degree < 2:
            raise NotExpandingError("a degree-1 product fixing 0 is a rotation")

    def to_json(self) -> dict:
        return {"zeros": [{"re": z.real, "im": z.imag} for z in self.zeros]}

    @classmethod
    def from_json(cls, data) -> "BlaschkeProduct":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls([complex(float(z["re"]), float(z["im"])) for z in data["zeros"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed product JSON: {exc}") from exc

    def __repr__(self):
        return f"BlaschkeProduct({list(self.zeros)!r})"


def parse_fraction(x) -> Fraction:
    """Fraction from a number or a decimal/ratio string of any length."""
    if not isinstance(x, str):
        return Fraction(x)
    t = x.strip()
    sign = -1 if t.startswith("-") else 1
    body = t.lstrip("+-")
    if body.replace(".", "", 1).isdigit():
        head, _, tail = body.partition(".")
        num = gmpy2.mpz((head + tail) or "0")
        return sign * Fraction(int(num), 10 ** len(tail))
    return Fraction(t)


@dataclass(frozen=True)
class BoundaryPoint:
    """exp(2 pi i turn) with turn = numerator / 2**precision_bits."""
    numerator: int
    precision_bits: int = DEFAULT_BITS

    def __post_init__(self):
        if self.precision_bits <= 0:
            raise InvalidInputError("precision_bits must be positive")
        object.__setattr__(self, "numerator", int(self.numerator) % (1 << self.precision_bits))

    @classmethod
    def from_turn(cls, turn, precision_bits: int = DEFAULT_BITS) -> "BoundaryPoint":
        """Round a turn (float, Fraction, int or decimal string) to the grid."""
        fr = parse_fraction(turn)
        fr -= math.floor(fr)
        return cls(round(fr * (1 << precision_bits)), precision_bits)

    from_decimal = from_turn

    @property
    def turn(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.precision_bits)

    @property
    def turn_float(self) -> float:
        return self.numerator / float(1 << self.precision_bits) if self.precision_bits < 1000 \
            else float(self.turn)

    def to_complex(self) -> complex:
        return _hp._unit_double(self.turn)

    def to_decimal(self) -> str:
        """Exact decimal expansion of the turn (a dyadic rational terminates)."""
        digits = math.ceil(self.precision_bits * math.log10(2)) + 1
        scaled = self.numerator * 10 ** digits >> self.precision_bits
        s = gmpy2.mpz(scaled).digits(10).rjust(digits, "0").rstrip("0")
        return "0." + (s or "0")

    def with_precision(self, bits: int) -> "BoundaryPoint":
        if bits >= self.precision_bits:
            return BoundaryPoint(self.numerator << (bits - self.precision_bits), bits)
        return BoundaryPoint.from_turn(self.turn, bits)

    def to_json(self) -> dict:
        return {"turn": self.to_decimal(), "precision_bits": self.precision_bits}

    @classmethod
    def from_json(cls, data) -> "BoundaryPoint":
        try:
            return cls.from_turn(str(data["turn"]), int(data["precision_bits"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed boundary point: {exc}") from exc


@dataclass(frozen=True)
class ExpansionConstants:
    k_min: float
    k_max: float
    grid_size: int
    certified_tolerance: float
    argmin_turn: float = 0.0
    argmax_turn: float = 0.0

    def to_json(self) -> dict:
        return {"k_min": self.k_min, "k_max": self.k_max, "grid_size": self.grid_size,
                "certified_tolerance": self.certified_tolerance,
                "argmin_turn": self.argmin_turn, "argmax_turn": self.argmax_turn}


def evaluate(f: BlaschkeProduct, z):
    """f(z) for a complex scalar or array in the closed disk."""
    arr = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise InvalidInputError("evaluate expects points of the closed disk")
    out = np.ones_like(arr)
    for zn in f.zeros:
        den = 1.0 - np.conj(zn) * arr
        if np.any(np.abs(den) < 1e-300):
            raise PoleProximityError("denominator underflow; zeros or input corrupted")
        out = out * (arr - zn) / den
    return complex(out) if out.ndim == 0 else out


def derivative(f: BlaschkeProduct, z):
    """Analytic f'(z) by the product rule: f'/f = sum (1-|a|^2)/((z-a)(1-conj(a) z))."""
    z = complex(z)
    total = 0j
    for i, a in enumerate(f.zeros):
        term = (1 - abs(a) ** 2) / (1 - a.conjugate() * z) ** 2
        for j, b in enumerate(f.zeros):
            if j != i:
                term *= (z - b) / (1 - b.conjugate() * z)
        total += term
    return total


def evaluate_boundary(f: BlaschkeProduct, xi: BoundaryPoint,
                      accuracy_bits: int | None = None) -> BoundaryPoint:
    """Image of a boundary point, rounded to the same turn grid."""
    if accuracy_bits is not None and xi.precision_bits < required_precision(f, 1, accuracy_bits):
        raise PrecisionBudgetExceeded(
            f"{xi.precision_bits} bits cannot deliver {accuracy_bits} bits after one step")
    num = _hp.map_numerator(f.zeros, f.mono, xi.numerator, xi.precision_bits, 1)
    return BoundaryPoint(num, xi.precision_bits)


def iterate(f: BlaschkeProduct, x, n: int, accuracy_bits: int = 53):
    """f^n(x) for a disk point (complex) or a BoundaryPoint."""
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    if isinstance(x, BoundaryPoint):
        need = required_precision(f, n, accuracy_bits)
        if f.mono == 0 and x.precision_bits < need:
            raise PrecisionBudgetExceeded(
                f"iterating {n} times needs {need} bits, point carries {x.precision_bits}")
        num = _hp.map_numerator(f.zeros, f.mono, x.numerator, x.precision_bits, n)
        return BoundaryPoint(num, x.precision_bits)
    return interior_orbit(f, x, n)[-1]


def interior_orbit(f: BlaschkeProduct, z, n: int) -> np.ndarray:
    """z, f(z), ..., f^n(z) in double precision (array input gives rows per step)."""
    w = np.asarray(z, dtype=np.complex128)
    out = np.empty((n + 1,) + w.shape, dtype=np.complex128)
    out[0] = w
    for k in range(1, n + 1):
        w = evaluate(f, w) if w.ndim else np.complex128(evaluate(f, complex(w)))
        out[k] = w
    return out


def derivative_modulus_boundary(f: BlaschkeProduct, xi) -> float:
    """|f'(xi)| on the circle as a sum of Poisson kernels.

    Accepts a BoundaryPoint, a float turn, or a numpy array of turns.
    """
    if isinstance(xi, BoundaryPoint):
        x = xi.to_complex()
    else:
        t = np.asarray(xi, dtype=float)
        x = np.exp(2j * np.pi * t)
    total = 0.0
    for z in f.zeros:
        total = total + (1.0 - abs(z) ** 2) / np.abs(x - z) ** 2
    return float(total) if np.ndim(total) == 0 else total


@functools.lru_cache(maxsize=256)
def _constants_cached(f: BlaschkeProduct, grid_size: int) -> ExpansionConstants:
    t = np.arange(grid_size) / grid_size
    vals = derivative_modulus_boundary(f, t)
    h = 1.0 / grid_size
    best = []
    for sign in (1.0, -1.0):
        idx = np.argsort(sign * vals)[: max(4, f.degree)]
        found = []
        for i in idx:
            x, v = _kernels.golden_dmod(f.zeros_array, t[i] - h, t[i] + h, sign, 1e-12)
            found.append((sign * v, x % 1.0))
        found.append((float(vals[idx[0]]), float(t[idx[0]])))
        best.append(min(found) if sign > 0 else max(found))
    (kmin, tmin), (kmax, tmax) = best
    kmin = min(kmin, float(vals.min()))
    kmax = max(kmax, float(vals.max()))
    return ExpansionConstants(kmin, kmax, grid_size, CERTIFIED_TOLERANCE, tmin, tmax)


def expansion_constants(f: BlaschkeProduct, grid_size: int | None = None) -> ExpansionConstants:
    """K = min |f'| and K1 = max |f'| on the circle."""
    if grid_size is None:
        grid_size = max(4096, 64 * f.degree)
    if grid_size < 4 * f.degree:
        raise InvalidInputError("grid_size must be at least 4 * degree")
    ec = _constants_cached(f, int(grid_size))
    if ec.k_min <= 1.0 + CERTIFIED_TOLERANCE:
        raise NotExpandingError(f"k_min = {ec.k_min!r}: the product is not expanding")
    return ec


def required_precision(f: BlaschkeProduct, n_max: int, target_accuracy_bits: int = 53) -> int:
    """Bits needed so that n_max boundary steps keep target_accuracy_bits."""
    if n_max < 0:
        raise InvalidInputError("n_max must be nonnegative")
    if n_max == 0:
        return target_accuracy_bits + 64
    kmax = expansion_constants(f).k_max
    return math.ceil(n_max * math.log2(kmax) - 1e-9) + target_accuracy_bits + 64


def pseudohyperbolic(z, w) -> float:
    z, w = complex(z), complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise InvalidInputError("pseudohyperbolic distance needs points of the open disk")
    return abs(z - w) / abs(1 - w.conjugate() * z)


def estimate_decay_rate(f: BlaschkeProduct, samples, n_max: int = 60) -> float:
    """Empirical geometric rate a with |f^n(z)| <= C a^n on the given samples.

    Fits log|f^n(z)| against n on the part of each orbit above the underflow
    threshold and returns the largest per-sample rate.  Super-exponential
    orbits (z**2 type) fit a steep slope and give a small rate.
    """
    if n_max < 10:
        raise InvalidInputError("n_max must be at least 10")
    rates = []
    for z in samples:
        z = complex(z)
        if abs(z) >= 1:
            raise InvalidInputError("samples must lie inside the disk")
        orbit = np.abs(interior_orbit(f, z, n_max))
        usable = np.nonzero(orbit > 1e-280)[0]
        if len(usable) == 0 or orbit[0] == 0.0:
            continue
        # contiguous prefix of usable points
        stop = usable[-1] + 1 if np.all(np.diff(usable) == 1) else np.argmin(orbit > 1e-280)
        ns = np.arange(stop)
        if len(ns) < 3:
            raise DegenerateOrbitError(f"orbit of {z} underflows before 3 usable points")
        logs = np.log(orbit[:stop])
        tail = ns[len(ns) // 2:] if len(ns) >= 6 else ns
        slope = np.polyfit(tail, logs[tail], 1)[0]
        rates.append(min(math.exp(slope), 1.0 - 1e-12))
    if not rates:
        raise DegenerateOrbitError("no usable sample orbits")
    return max(max(rates), 1e-300)


def kernels_args(f: BlaschkeProduct):
    """(zeros, mono, kmin, kmax) in the form the numba kernels take."""
    ec = expansion_constants(f)
    return f.zeros_array, f.mono, ec.k_min, ec.k_max


def boundary_orbit_double(f: BlaschkeProduct, turn: float, n: int) -> np.ndarray:
    """Double pseudo-orbit turns at levels 0..n."""
    out = np.empty(n + 1)
    out[0] = turn % 1.0
    if n:
        _kernels.forward(f.zeros_array, f.mono, out[0], out[1:])
    return out


def product_from_args(text: str) -> BlaschkeProduct:
    """Parse '0,0.5,0.3+0.2j' or a JSON object into a product."""
    text = text.strip()
    if text.startswith("{"):
        return BlaschkeProduct.from_json(text)
    try:
        return BlaschkeProduct([complex(p.replace(" ", "")) for p in text.split(",") if p])
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse zeros {text!r}") from exc
