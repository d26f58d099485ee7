"""Coefficient sequences and sums of iterates sum a_n f^n."""
import importlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _hp
from .circle import Arc
from .core import BlaschkeProduct, BoundaryPoint, evaluate, required_precision
from .errors import InvalidInputError, UnboundedTailError

KINDS = ("list", "power", "harmonic-log", "geometric", "plugin")
PHASES = ("real-positive", "alternating", "random")


@dataclass(frozen=True)
class CoefficientSequence:
    """a_n for n >= 1, given by a family, a phase rule and declared flags.

    Moduli: list -> |values[n-1]| (zero past the end), power -> c n^-p,
    harmonic-log -> c / (n log^q(n+1)), geometric -> c r^n, plugin -> a
    user callable ``n -> complex`` imported from "module:function".
    Flags are what the caller asserts about the infinite sequence; they are
    never inferred from the finite data.
    """
    kind: str
    c: float = 1.0
    p: float = 1.0
    q: float = 2.0
    r: float = 0.5
    values: tuple = ()
    phase: str = "real-positive"
    seed: int = 0
    plugin: str = ""
    flags: dict = field(default_factory=dict, compare=False, hash=False)
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown coefficient kind {self.kind!r}")
        if self.phase not in PHASES:
            raise InvalidInputError(f"unknown phase rule {self.phase!r}")
        if self.kind == "geometric" and not (0 <= abs(self.r) < 1 or self.r == 1):
            raise InvalidInputError("geometric ratio must satisfy |r| < 1 (or r = 1)")
        if self.kind == "plugin" and ":" not in self.plugin:
            raise InvalidInputError("plugin must be given as 'module:function'")
        merged = dict(self._default_flags())
        merged.update(self.flags or {})
        object.__setattr__(self, "flags", merged)
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    # families ----------------------------------------------------------
    @classmethod
    def power(cls, p, c=1.0, **kw):
        return cls("power", c=c, p=p, **kw)

    @classmethod
    def explicit(cls, values, **kw):
        return cls("list", values=tuple(values), **kw)

    @classmethod
    def harmonic_log(cls, q, c=1.0, **kw):
        return cls("harmonic-log", c=c, q=q, **kw)

    @classmethod
    def geometric(cls, r, c=1.0, **kw):
        return cls("geometric", c=c, r=r, **kw)

    def _default_flags(self):
        if self.kind == "power":
            return {"tends_to_zero": self.p > 0, "abs_summable": self.p > 1,
                    "slow_decay_eq3": self.p > 0}
        if self.kind == "harmonic-log":
            return {"tends_to_zero": True, "abs_summable": self.q > 1, "slow_decay_eq3": True}
        if self.kind == "geometric":
            return {"tends_to_zero": abs(self.r) < 1, "abs_summable": abs(self.r) < 1,
                    "slow_decay_eq3": False}
        if self.kind == "list":
            return {"tends_to_zero": True, "abs_summable": True, "slow_decay_eq3": False}
        return {"tends_to_zero": False, "abs_summable": False, "slow_decay_eq3": False}

    @property
    def tends_to_zero(self) -> bool:
        return bool(self.flags.get("tends_to_zero"))

    @property
    def abs_summable(self) -> bool:
        return bool(self.flags.get("abs_summable"))

    @property
    def slow_decay_eq3(self) -> bool:
        return bool(self.flags.get("slow_decay_eq3"))

    # values --------------------------------------------------------------
    def modulus(self, n) -> np.ndarray:
        """|a_n| for an integer array n >= 1."""
        n = np.asarray(n, dtype=np.float64)
        if self.kind == "power":
            return self.c * n ** (-self.p)
        if self.kind == "harmonic-log":
            return self.c / (n * np.log(n + 1.0) ** self.q)
        if self.kind == "geometric":
            return self.c * np.abs(self.r) ** n
        return np.abs(self.__call__(n))

    def _phases(self, n: np.ndarray) -> np.ndarray:
        if self.phase == "real-positive":
            return np.ones(n.shape, dtype=np.complex128)
        if self.phase == "alternating":
            return np.where(n.astype(np.int64) % 2 == 1, -1.0, 1.0).astype(np.complex128)
        need = int(n.max()) if n.size else 0
        table = self._cache.get("phases")
        if table is None or table.size <= need:
            size = max(need + 1, 1024, 2 * (0 if table is None else table.size))
            rng = np.random.default_rng(self.seed)
            table = np.exp(2j * np.pi * rng.random(size))
            self._cache["phases"] = table
        return table[n.astype(np.int64)]

    def __call__(self, n):
        n = np.asarray(n)
        scalar = n.ndim == 0
        n = np.atleast_1d(n).astype(np.int64)
        if np.any(n < 1):
            raise InvalidInputError("coefficients are indexed from n = 1")
        if self.kind == "list":
            vals = np.zeros(n.shape, dtype=np.complex128)
            arr = np.array(self.values, dtype=np.complex128)
            inside = n <= arr.size
            vals[inside] = arr[n[inside] - 1]
        elif self.kind == "plugin":
            fn = self._plugin_fn()
            vals = np.array([complex(fn(int(k))) for k in n], dtype=np.complex128)
            return vals[0] if scalar else vals
        else:
            vals = self.modulus(n).astype(np.complex128)
        if self.kind == "geometric" and self.r < 0:
            vals = vals * np.where(n % 2 == 1, -1.0, 1.0)
        vals = vals * self._phases(n)
        return complex(vals[0]) if scalar else vals

    def _plugin_fn(self) -> Callable:
        fn = self._cache.get("plugin")
        if fn is None:
            mod, _, name = self.plugin.partition(":")
            fn = getattr(importlib.import_module(mod), name)
            self._cache["plugin"] = fn
        return fn

    def array(self, n_max: int) -> np.ndarray:
        """a_0..a_{n_max} with a_0 = 0, for indexing by n."""
        out = np.zeros(n_max + 1, dtype=np.complex128)
        if n_max >= 1:
            out[1:] = self(np.arange(1, n_max + 1))
        return out

    # JSON ------------------------------------------------------------------
    def to_json(self) -> dict:
        d = {"kind": self.kind, "phase": self.phase}
        if self.kind in ("power", "harmonic-log", "geometric"):
            d["c"] = self.c
        if self.kind == "power":
            d["p"] = self.p
        if self.kind == "harmonic-log":
            d["q"] = self.q
        if self.kind == "geometric":
            d["r"] = self.r
        if self.kind == "list":
            d["values"] = [v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
                           for v in self.values]
        if self.kind == "plugin":
            d["plugin"] = self.plugin
        if self.phase == "random":
            d["seed"] = self.seed
        d["flags"] = dict(self.flags)
        return d

    @classmethod
    def from_json(cls, data) -> "CoefficientSequence":
        if isinstance(data, str):
            data = json.loads(data)
        data = dict(data)
        try:
            kind = data.pop("kind")
            if kind == "list":
                data["values"] = tuple(complex(v["re"], v.get("im", 0.0)) if isinstance(v, dict)
                                       else complex(v) for v in data.pop("values"))
            return cls(kind, **data)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed coefficient spec: {exc}") from exc


def parse_coefficients(text: str) -> CoefficientSequence:
    """Coefficients from JSON or shorthand: 'power:2', 'geometric:0.5', 'list:1,2,3',
    'harmonic-log:2', optionally followed by '@phase' (e.g. 'power:1@random')."""
    text = text.strip()
    if text.startswith("{"):
        return CoefficientSequence.from_json(text)
    phase = "real-positive"
    if "@" in text:
        text, phase = text.split("@", 1)
    kind, _, arg = text.partition(":")
    try:
        if kind == "power":
            return CoefficientSequence.power(float(arg), phase=phase)
        if kind == "geometric":
            return CoefficientSequence.geometric(float(arg), phase=phase)
        if kind == "harmonic-log":
            return CoefficientSequence.harmonic_log(float(arg), phase=phase)
        if kind == "list":
            return CoefficientSequence.explicit([complex(v) for v in arg.split(",") if v],
                                                phase=phase)
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse coefficients {text!r}") from exc
    raise InvalidInputError(f"cannot parse coefficients {text!r}")


# sums -------------------------------------------------------------------------

def _boundary_units(f: BlaschkeProduct, xi: BoundaryPoint, N: int, accuracy_bits: int):
    if f.mono == 0:
        need = required_precision(f, N, accuracy_bits)
        if xi.precision_bits < need:
            from .errors import PrecisionBudgetExceeded
            raise PrecisionBudgetExceeded(
                f"depth {N} needs {need} bits, point carries {xi.precision_bits}")
    return np.array(_hp.orbit_units(f.zeros, f.mono, xi.numerator, xi.precision_bits, N))


def orbit_values(f: BlaschkeProduct, x, N: int, accuracy_bits: int = 53) -> np.ndarray:
    """f^n(x) for n = 0..N: exact boundary orbit or double interior orbit."""
    if isinstance(x, BoundaryPoint):
        return _boundary_units(f, x, N, accuracy_bits)
    out = np.empty(N + 1, dtype=np.complex128)
    w = complex(x)
    out[0] = w
    for k in range(1, N + 1):
        w = evaluate(f, w)
        out[k] = w
    return out


def partial_sum(f: BlaschkeProduct, a: CoefficientSequence, x, M: int, N: int,
                accuracy_bits: int = 53) -> complex:
    """sum_{n=M}^{N} a_n f^n(x) in a single pass along the orbit."""
    if not (1 <= M <= N):
        raise InvalidInputError("partial_sum needs 1 <= M <= N")
    orb = orbit_values(f, x, N, accuracy_bits)
    coef = a.array(N)
    return complex(np.sum(coef[M:N + 1] * orb[M:N + 1]))


class PartialSumState:
    """Running sum_{n<=upto} a_n f^n(point); advancing reuses the current iterate."""

    def __init__(self, f: BlaschkeProduct, a: CoefficientSequence, point, bits: int | None = None):
        self.f, self.a, self.point = f, a, point
        self.upto = 0
        self.value = 0j
        self._boundary = isinstance(point, BoundaryPoint)
        if self._boundary:
            self._bits = bits or point.precision_bits
            self._ctx = _hp._ctx(self._bits + _hp.GUARD)
            with self._ctx:
                self._hz = _hp.hp_zeros(f.zeros)
                num = point.with_precision(self._bits).numerator
                self._w = _hp.unit_from_turn(_hp.mpfr(num) / _hp.mpfr(1 << self._bits), self._bits)
        else:
            self._w = complex(point)

    def advance(self, steps: int = 1) -> complex:
        coef = self.a.array(self.upto + steps)
        for _ in range(steps):
            n = self.upto + 1
            if self._boundary:
                with self._ctx:
                    self._w = _hp.moebius_product(self._hz, self._w)
                    self._w = self._w / abs(self._w)
                    val = complex(self._w)
            else:
                self._w = evaluate(self.f, self._w)
                val = self._w
            self.value += coef[n] * val
            self.upto = n
        return self.value

    @property
    def orbit_cursor(self):
        """f^upto(point), as a BoundaryPoint for boundary orbits."""
        if not self._boundary:
            return self._w
        with self._ctx:
            t = _hp.turn_of(self._w)
            return BoundaryPoint(_hp.round_turn(t, self._bits), self._bits)


@dataclass(frozen=True)
class TailSum:
    value: float
    remainder_bound: Optional[float]
    remainder_lower: float = 0.0

    @property
    def lower(self) -> float:
        return self.value + self.remainder_lower

    @property
    def upper(self) -> float:
        return self.value + (self.remainder_bound or 0.0)

    @property
    def estimate(self) -> float:
        if self.remainder_bound is None:
            return self.value
        return self.value + 0.5 * (self.remainder_lower + self.remainder_bound)


def _remainder(a: CoefficientSequence, H: int):
    """Bounds (lower, upper) for sum_{k>H} |a_k| when available analytically."""
    if a.kind == "power" and a.p > 1:
        up = a.c * H ** (1 - a.p) / (a.p - 1)
        lo = a.c * (H + 1) ** (1 - a.p) / (a.p - 1)
        return lo, up
    if a.kind == "geometric" and abs(a.r) < 1:
        v = a.c * abs(a.r) ** (H + 1) / (1 - abs(a.r))
        return v, v
    if a.kind == "list":
        return 0.0, 0.0
    if a.kind == "harmonic-log" and a.q > 1:
        # |a_k| <= c / (k log^q k), whose tail integral from H is explicit
        up = a.c / ((a.q - 1) * math.log(H) ** (a.q - 1))
        return 0.0, up
    return None


def tail_abs_sum(a: CoefficientSequence, n: int, horizon: int | None = None) -> TailSum:
    """sum_{n<k<=horizon} |a_k| with an analytic bound on the rest when known."""
    if horizon is None:
        if not a.abs_summable:
            raise UnboundedTailError("tail of a non-summable sequence needs a horizon")
        if a.kind == "list":
            horizon = max(n + 1, len(a.values))
        elif _remainder(a, n + 1) is None:
            raise UnboundedTailError("no analytic remainder for this family; pass a horizon")
        else:
            horizon = n + 100_000
    if horizon <= n:
        raise InvalidInputError("horizon must exceed n")
    k = np.arange(n + 1, horizon + 1)
    val = float(np.sum(a.modulus(k))) if a.kind in ("power", "harmonic-log", "geometric") \
        else float(np.sum(np.abs(a(k))))
    rem = _remainder(a, horizon) if a.abs_summable else None
    if rem is None:
        return TailSum(val, None)
    return TailSum(val, rem[1], rem[0])


@dataclass(frozen=True)
class Eq3Check:
    ratios: list
    last_decade_max: float
    decreasing_trend: bool

    def __iter__(self):
        return iter(self.ratios)


def check_eq3_ratio(a: CoefficientSequence, n_max: int, horizon: int | None = None) -> Eq3Check:
    """|a_n| / sum_{k>n} |a_k| for n = 1..n_max."""
    H = horizon or n_max + 200_000
    k = np.arange(1, H + 1)
    mods = np.abs(a(k)) if a.kind in ("list", "plugin") else a.modulus(k)
    rem = _remainder(a, H) if a.abs_summable else None
    rest = 0.0 if rem is None else 0.5 * (rem[0] + rem[1])
    tails = np.cumsum(mods[::-1])[::-1]       # tails[i] = sum_{k >= i+1}
    out = []
    for n in range(1, n_max + 1):
        t = (tails[n] if n < H else 0.0) + rest
        out.append((n, float(mods[n - 1] / t) if t > 0 else math.inf))
    lo = max(1, n_max - n_max // 10)
    last = [r for n, r in out if n >= lo]
    first = [r for n, r in out[: max(1, n_max // 10)]]
    return Eq3Check(out, max(last), max(last) < max(first))


def weighted_geometric_tail(a: CoefficientSequence, K: float, N: int) -> float:
    """sum_{n<=N} |a_n| K^(n-N)."""
    if K <= 1:
        raise InvalidInputError("K must exceed 1")
    n = np.arange(1, N + 1)
    mods = np.abs(a(n)) if a.kind in ("list", "plugin") else a.modulus(n)
    return float(np.sum(mods * np.power(float(K), (n - N).astype(float))))


def oscillation_on_arc(f: BlaschkeProduct, a: CoefficientSequence, arc: Arc, N: int,
                       samples: int = 33, accuracy_bits: int = 53) -> float:
    """Largest spread |F_N(xi) - F_N(xi')| over evenly spaced points of the arc."""
    if samples < 2:
        raise InvalidInputError("need at least two samples")
    bits = max(required_precision(f, N, accuracy_bits), arc.precision_bits)
    coef = a.array(N)
    if not np.any(coef):
        return 0.0
    sums = []
    for i in range(samples):
        t = arc.start + arc.length * i / (samples - 1)
        xi = BoundaryPoint.from_turn(t, bits)
        orb = orbit_values(f, xi, N, accuracy_bits)
        sums.append(np.sum(coef[1:] * orb[1:]))
    s = np.array(sums)
    return float(np.max(np.abs(s[:, None] - s[None, :])))
