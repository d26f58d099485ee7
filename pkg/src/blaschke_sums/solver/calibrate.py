"""Empirical stand-ins for the constants whose existence the theory only asserts."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import BlaschkeProduct, evaluate, expansion_constants
from ..errors import CalibrationFailure, NotExpandingError
from .chart import Chart

EPS_CANDIDATES = (0.5, 0.25, 0.1)
EPS_RATIO_FLOOR = 0.05
BLOCK_LENGTH = 40
STARTS = 50
GAMMA_SAMPLES = 200
MAX_GAP = 64


@dataclass(frozen=True)
class ConstantEstimates:
    epsilon_f: float
    c_f: float
    eta_f: float
    gamma0: float
    delta1: float
    T_gap: int
    calibration_log: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def gamma1(self) -> float:
        return 0.5 * (1 + self.gamma0)

    def with_eta(self, f: BlaschkeProduct, eta: float) -> "ConstantEstimates":
        """Same estimates with a smaller eta_f and the gap length recomputed."""
        log = dict(self.calibration_log)
        log["recalibrated_eta"] = eta
        return ConstantEstimates(self.epsilon_f, self.c_f, eta, self.gamma0, self.delta1,
                                 gap_length(f, eta, self.gamma1), log)

    def to_json(self) -> dict:
        return {"epsilon_f": self.epsilon_f, "c_f": self.c_f, "eta_f": self.eta_f,
                "gamma0": self.gamma0, "delta1": self.delta1, "T_gap": self.T_gap,
                "calibration_log": self.calibration_log}

    @classmethod
    def from_json(cls, data) -> "ConstantEstimates":
        return cls(float(data["epsilon_f"]), float(data["c_f"]), float(data["eta_f"]),
                   float(data["gamma0"]), float(data["delta1"]), int(data["T_gap"]),
                   dict(data.get("calibration_log", {})))


def gap_length(f: BlaschkeProduct, eta: float, gamma1: float, angles: int = 4096) -> int:
    """Smallest T with |f^T(z)| <= eta on |z| = gamma1 (hence on the whole disc)."""
    th = 2 * np.pi * np.arange(angles) / angles
    z = gamma1 * np.exp(1j * th)
    for T in range(1, MAX_GAP + 1):
        z = evaluate(f, z)
        if np.max(np.abs(z)) <= eta:
            return T
    raise CalibrationFailure(f"|f^T| stays above {eta} on |z| = {gamma1} for T <= {MAX_GAP}")


def _random_start(f, rng, eps):
    """A disk point near the circle and the first M with |f^M(z)| <= eps."""
    u = rng.uniform(1.0, 4.0)
    th = rng.random()
    z = (1 - 10.0 ** -u) * complex(math.cos(2 * math.pi * th), math.sin(2 * math.pi * th))
    w = z
    for M in range(1, 10_000):
        w = evaluate(f, w)
        if abs(w) <= eps:
            return z, M
    raise CalibrationFailure("interior orbit does not approach 0")


def _block_ratios(f, eps, rng, budget, c_prov, starts=STARTS):
    ratios = []
    for _ in range(starts):
        z, M = _random_start(f, rng, eps)
        phases = np.exp(2j * np.pi * rng.random(BLOCK_LENGTH))
        N = M + BLOCK_LENGTH - 1
        r = abs(z)
        length = min(1.0, (1 - r) / c_prov)
        center = math.atan2(z.imag, z.real) / (2 * math.pi)

        def source(n_max, phases=phases, M=M, N=N):
            arr = np.zeros(n_max + 1, dtype=np.complex128)
            hi = min(N, n_max)
            if hi >= M:
                arr[M:hi + 1] = phases[: hi - M + 1]
            return arr

        chart = Chart(f, source, center, length)
        chart.optimize(lambda v: -v.real, N, budget)
        ratios.append(chart.partial_sum(N).real / BLOCK_LENGTH)
    return np.array(ratios)


def _gamma0(f, rng):
    zero = lambda n: np.zeros(n + 1, dtype=np.complex128)
    vals = []
    for _ in range(GAMMA_SAMPLES):
        chart = Chart(f, zero, rng.random(), 1.0)
        N = int(rng.integers(5, 40))
        chart.commit(0.0, 0, N, 0.5)
        vals.append(chart.interior_modulus(1.0, N))
    return float(np.max(vals)), len(vals)


def _delta0(f, eps, rng, samples=100):
    """min over z of m(f^N(I(z))) at the first N with |f^N(z)| <= eps."""
    zero = lambda n: np.zeros(n + 1, dtype=np.complex128)
    vals = []
    for _ in range(samples):
        z, N = _random_start(f, rng, eps)
        r = abs(z)
        chart = Chart(f, zero, math.atan2(z.imag, z.real) / (2 * math.pi), 1 - r)
        chart.commit(0.0, 0, N, 1e9)
        vals.append(min(chart.measure, 1.0))
    return float(np.min(vals)), len(vals)


_CACHE = {}


def calibrate_constants(f: BlaschkeProduct, budget: int = 128, seed: int = 0) -> ConstantEstimates:
    """Empirical epsilon_f, c_f, eta_f, gamma0, delta1 and T_gap for f.

    Block searches use random 40-term blocks with unit coefficients and
    random phases from 50 random starts near the circle.  Results are cached
    per (f, budget, seed).
    """
    key = (f, budget, seed)
    if key in _CACHE:
        return _CACHE[key]
    try:
        f.require_solver_contract()
    except NotExpandingError as exc:
        raise CalibrationFailure(str(exc)) from exc
    ec = expansion_constants(f)
    if ec.k_min <= 1 + 1e-9:
        raise CalibrationFailure("k_min = 1: the boundary map is not expanding")
    rng = np.random.default_rng(seed)
    c_prov = 0.5
    eps = None
    p10s = {}
    for cand in EPS_CANDIDATES:
        ratios = _block_ratios(f, cand, rng, budget, c_prov)
        p10s[cand] = (float(np.percentile(ratios, 10)), float(ratios.min()))
        if p10s[cand][0] >= EPS_RATIO_FLOOR:
            eps = cand
            break
    if eps is None:
        raise CalibrationFailure(f"block searches stay below ratio {EPS_RATIO_FLOOR}")
    p10, worst = p10s[eps]
    c_f = 0.9 * p10
    eta = 0.9 * min(eps, 2 * c_f / 3)
    gamma0, n_gamma = _gamma0(f, rng)
    gamma1 = 0.5 * (1 + gamma0)
    T_gap = gap_length(f, eta, gamma1)
    delta0, n_delta = _delta0(f, eps, rng)
    delta1 = 0.5 * delta0
    if min(c_f, eta, gamma0, delta1) <= 0 or gamma0 >= 1:
        raise CalibrationFailure("an estimate collapsed")
    log = {
        "seed": seed, "budget": budget,
        "epsilon_f": {"candidates_tried": list(p10s), "p10_ratios": [p10s[c][0] for c in p10s],
                      "starts": STARTS, "block_length": BLOCK_LENGTH},
        "c_f": {"samples": STARTS, "p10": p10, "worst": worst, "margin": 0.9},
        "eta_f": {"rule": "0.9*min(epsilon_f, 2c_f/3)"},
        "gamma0": {"samples": n_gamma, "max": gamma0},
        "T_gap": {"gamma1": gamma1, "angles": 4096},
        "delta1": {"samples": n_delta, "delta0": delta0},
        "k_min": ec.k_min, "k_max": ec.k_max,
    }
    out = ConstantEstimates(eps, c_f, eta, gamma0, delta1, T_gap, log)
    _CACHE[key] = out
    return out
