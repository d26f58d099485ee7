"""Randomized property suites for the distortion and expansion estimates.

Each trial draws a product, an arc or point and coefficients from the
hypothesis class of one estimate, evaluates both sides and records the
margin RHS - LHS.  Where an estimate has no explicit constant the suite
records the empirical envelope instead.  Trial t of a run with seed s uses
the generator seeded by (s, t), so reports are reproducible and trials are
independent.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .. import _kernels
from ..core import BlaschkeProduct, evaluate, expansion_constants
from ..errors import UnknownPropertyError

TWO_PI = 2 * math.pi


@dataclass
class PropertyReport:
    property_id: str
    trials: int
    violations: int
    worst_margin: float
    parameters: dict
    seed: int = 0
    tolerance: float = 1e-9
    envelope: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"property_id": self.property_id, "trials": self.trials,
                "violations": self.violations, "worst_margin": _r(self.worst_margin),
                "parameters": _clean(self.parameters), "seed": self.seed,
                "tolerance": self.tolerance, "envelope": _clean(self.envelope)}

    def to_jsonl(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _r(x):
    x = float(x)
    return float(f"{x:.17g}") if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_r(obj.real), _r(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _r(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def random_product(rng) -> BlaschkeProduct:
    """Degree uniform in 2..5, one zero at 0, the others with modulus uniform in [0, 0.9]."""
    d = int(rng.integers(2, 6))
    r = 0.9 * rng.random(d - 1)
    th = TWO_PI * rng.random(d - 1)
    return BlaschkeProduct([0j] + list(r * np.exp(1j * th)))


def _zeros_param(f):
    return [[z.real, z.imag] for z in f.zeros]


def arc_offsets(f, rng, N, delta, extra_points=2):
    """Pseudo-orbit ref[0..N] and lifted offsets of sample points at every level.

    The arc at depth N is [lo, lo + delta] around ref[N]; rows of the result
    are the endpoints followed by ``extra_points`` random points of the arc.
    """
    ec = expansion_constants(f)
    zeros, mono = f.zeros_array, f.mono
    ref = np.empty(N + 1)
    ref[0] = rng.random()
    _kernels.forward(zeros, mono, ref[0], ref[1:])
    lo = -rng.random() * delta
    pts = np.concatenate(([lo, lo + delta], lo + delta * rng.random(extra_points)))
    offs = np.empty((pts.size, N + 1))
    guides = ref[:N].copy()
    for i, p in enumerate(pts):
        offs[i, N] = p
        if N:
            _kernels.chain_offsets(zeros, mono, ec.k_min, ec.k_max, guides, p, offs[i, :N])
    return ref, offs


def _pairs(n):
    return [(0, 1)] + [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) != (0, 1)]


def _unit_diff(ref, oi, oj):
    """f^n(xi) - f^n(xi') from offsets, without cancellation."""
    return 2j * np.sin(np.pi * (oi - oj)) * np.exp(2j * np.pi * (ref + 0.5 * (oi + oj)))


# trials ---------------------------------------------------------------------------

def _lemma21(f, rng, opts):
    K = expansion_constants(f).k_min
    N = int(rng.integers(1, 41))
    delta = 10 ** rng.uniform(-4, math.log10(0.999))
    ref, offs = arc_offsets(f, rng, N, delta)
    k = np.arange(1, N + 1)
    rhs = TWO_PI * delta * K ** (k - N).astype(float)
    lhs = np.zeros(N)
    for i, j in _pairs(len(offs)):
        lhs = np.maximum(lhs, 2 * np.abs(np.sin(np.pi * (offs[i, 1:] - offs[j, 1:]))))
    m = rhs - lhs
    worst = int(np.argmin(m))
    return float(m[worst]), {"N": N, "delta": delta, "K": K, "k": int(k[worst])}, {}


def cor22_constant(K, variant="stated"):
    c = TWO_PI / math.sqrt(K * K - 1)
    return c * K if variant == "corrected" else c


def _cor22(f, rng, opts):
    K = expansion_constants(f).k_min
    N = int(rng.integers(2, 41))
    M = int(rng.integers(1, N))
    delta = 10 ** rng.uniform(-4, math.log10(0.999))
    a = rng.normal(size=N - M + 1) + 1j * rng.normal(size=N - M + 1)
    ref, offs = arc_offsets(f, rng, N, delta)
    c = cor22_constant(K, opts.get("constant", "stated"))
    rhs = c * delta * math.sqrt(float(np.sum(np.abs(a) ** 2)))
    lhs = 0.0
    for i, j in _pairs(len(offs)):
        d = _unit_diff(ref[M:], offs[i, M:], offs[j, M:])
        lhs = max(lhs, abs(np.sum(a * d)))
    return rhs - lhs, {"N": N, "M": M, "delta": delta, "K": K, "c": c, "lhs": lhs,
                       "rhs": rhs}, {"ratio": lhs / rhs}


def _cor23(f, rng, opts):
    K = expansion_constants(f).k_min
    N = int(rng.integers(8, 61))
    delta = rng.uniform(0.05, 0.95)
    p = rng.uniform(0.2, 1.0)
    n = np.arange(1, N + 1)
    a = n ** -p * np.exp(TWO_PI * 1j * rng.random(N))
    ref, offs = arc_offsets(f, rng, N, delta)
    L = N // 2
    bound = TWO_PI * delta * (K ** (L - N + 1) / (K - 1) + (L + 1) ** -p * K / (K - 1))
    lhs = 0.0
    for i, j in _pairs(len(offs)):
        lhs = max(lhs, abs(np.sum(a * _unit_diff(ref[1:], offs[i, 1:], offs[j, 1:]))))
    return bound - lhs, {"N": N, "delta": delta, "p": p, "K": K}, {"oscillation": lhs}


def _lemma24a(f, rng, opts):
    gamma = rng.uniform(0.1, 0.9)
    for _ in range(200):
        r = 1 - 10 ** -rng.uniform(0, 4)
        th = rng.random()
        z = r * complex(math.cos(TWO_PI * th), math.sin(TWO_PI * th))
        if abs(evaluate(f, z)) <= gamma:
            break
    else:
        z = 0.5 * gamma * complex(math.cos(TWO_PI * th), math.sin(TWO_PI * th))
        r = abs(z)
    h = 1 - abs(z)
    c = math.atan2(z.imag, z.real) / TWO_PI
    m = min(_kernels.lift(f.zeros_array, f.mono, c - h / 2, h), 1.0)
    return m, {"gamma": gamma, "z": z}, {"measure": m, "gamma": gamma}


def _lemma24b(f, rng, opts):
    delta = rng.uniform(0.05, 0.95)
    # keep m(I) well above the double resolution near |z| = 1
    cap = int(math.log(1e10 * delta) / math.log(expansion_constants(f).k_max))
    N = int(rng.integers(1, max(1, min(30, cap)) + 1))
    ref, offs = arc_offsets(f, rng, N, delta, 0)
    lo, hi = offs[0, 0], offs[1, 0]
    m0 = hi - lo
    c = ref[0] + 0.5 * (lo + hi)
    z = (1 - m0) * complex(math.cos(TWO_PI * c), math.sin(TWO_PI * c))
    for _ in range(N):
        z = evaluate(f, z)
    g = abs(z)
    return 1 - g, {"N": N, "delta": delta, "m0": m0}, {"gamma": g, "delta": delta}


def _lemma27(f, rng, opts):
    K = rng.uniform(1.1, 5.0)
    p = rng.uniform(1.1, 3.0)
    Ns = (100, 1000, 10000)
    n = np.arange(1, Ns[-1] + 1, dtype=float)
    b = n ** -p
    ratios = []
    for N in Ns:
        S = float(zeta(p, N + 1))
        num = float(np.sum(b[:N] * np.exp((n[:N] - N) * math.log(K))))
        ratios.append(num / S)
    m = min(ratios[0] - ratios[1], ratios[1] - ratios[2])
    return m, {"K": K, "p": p, "ratios": ratios}, {"last_ratio": ratios[-1]}


def lemma40_delta(f) -> float:
    return 0.99 * min(1 / 20, 1 / (10 * expansion_constants(f).k_max))


def n_of_z(f, z, delta, n_max=10_000):
    """Smallest n >= 1 with m(f^n(I(z))) >= delta, and that measure."""
    z = complex(z)
    h = 1 - abs(z)
    s = math.atan2(z.imag, z.real) / TWO_PI - h / 2
    m = h
    zeros, mono = f.zeros_array, f.mono
    for n in range(1, n_max + 1):
        m = _kernels.lift(zeros, mono, s, m)
        s = _kernels.fmap(zeros, mono, s)
        if m >= delta:
            return n, m
    raise ValueError("N(z) not reached")


def _lemma40(f, rng, opts):
    ec = expansion_constants(f)
    delta = lemma40_delta(f)
    # m(I(z)) < delta, so that N(z) is reached by growth (1 - |z| >= delta gives N = 1)
    r = 1 - delta * 10 ** -rng.uniform(0, 5)
    th = rng.random()
    z = r * complex(math.cos(TWO_PI * th), math.sin(TWO_PI * th))
    N, m = n_of_z(f, z, delta)
    h = 1 - r
    zeros, mono = f.zeros_array, f.mono
    zk = np.empty(N, dtype=complex)
    w = z
    for k in range(N):
        w = evaluate(f, w)
        zk[k] = w
    worst = 0.0
    for u in (0.0, 1.0, 0.5, rng.random()):
        t = th - h / 2 + u * h
        orb = np.empty(N)
        _kernels.forward(zeros, mono, t, orb)
        worst = max(worst, float(np.sum(np.abs(np.exp(2j * np.pi * orb) - zk))))
    return delta * ec.k_max - m, {"z": z, "N": N, "delta": delta}, {"C": worst}


def _pommerenke(f, rng, opts):
    r = 1 - 10 ** -rng.uniform(0.3, 3)
    th = rng.random()
    z = r * complex(math.cos(TWO_PI * th), math.sin(TWO_PI * th))
    n = int(rng.integers(1, 61))
    w = z
    for _ in range(n):
        w = evaluate(f, w)
    val = abs(w) * (1 - r) ** 13
    a = val ** (1 / n) if val > 0 else 0.0
    return 1 - a, {"z": z, "n": n}, {"a": a}


_SUITES = {
    "lemma2.1": _lemma21,
    "cor2.2": _cor22,
    "cor2.3": _cor23,
    "lemma2.4a": _lemma24a,
    "lemma2.4b": _lemma24b,
    "lemma2.7": _lemma27,
    "lemma4.0": _lemma40,
    "pommerenke": _pommerenke,
}

# envelope fields: how each per-trial extra is reduced
_REDUCE = {"ratio": max, "oscillation": max, "measure": min, "gamma": max,
           "last_ratio": max, "C": max, "a": max}

PROPERTY_IDS = tuple(_SUITES)


def run_lemma_suite(property_id: str, f_generator=None, trial_count: int = 10_000,
                    seed: int = 0, tolerance: float = 1e-9, **options) -> PropertyReport:
    """Run ``trial_count`` randomized trials of one registered estimate.

    ``f_generator(rng)`` returns the product for a trial (default: random
    degree 2..5 with a zero at 0).  For ``cor2.2`` pass
    ``constant="corrected"`` to use 2 pi K (K^2 - 1)^-1/2.
    """
    if property_id not in _SUITES:
        raise UnknownPropertyError(f"unknown property id {property_id!r}; "
                                   f"known: {', '.join(PROPERTY_IDS)}")
    trial = _SUITES[property_id]
    gen = f_generator or random_product
    violations = 0
    worst = math.inf
    worst_params = {}
    env = {}
    for t in range(trial_count):
        rng = np.random.default_rng([seed, t])
        f = gen(rng)
        margin, params, extra = trial(f, rng, options)
        if margin < -tolerance:
            violations += 1
        if margin < worst:
            worst = margin
            worst_params = dict(params, trial=t, zeros=_zeros_param(f))
        for k, v in extra.items():
            red = _REDUCE.get(k, max)
            env[k] = v if k not in env else red(env[k], v)
    if options:
        worst_params["options"] = dict(options)
    return PropertyReport(property_id, trial_count, violations, worst, worst_params,
                          seed, tolerance, env)
