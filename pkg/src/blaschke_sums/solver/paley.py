"""Reaching a prescribed value with sum a_n f^n(xi) when sum |a_n| diverges."""
import math

import numpy as np

from ..core import BlaschkeProduct
from ..errors import InvalidInputError, StallError
from ..series import CoefficientSequence, partial_sum
from .chart import Chart
from .common import as_sequence, windowed
from .trace import SolverTrace

SAMPLES = 33
STALL_ROUNDS = 10
MAX_GAP_EXTENSION = 64


class _MassTable:
    """Running |a_n| prefix sums, grown on demand."""

    def __init__(self, a: CoefficientSequence, size: int = 4096):
        self.a = a
        self._grow(size)

    def _grow(self, size):
        self.mods = np.concatenate(([0.0], self.a.modulus(np.arange(1, size + 1))))
        self.cum = np.cumsum(self.mods)

    def ensure(self, n):
        if n >= self.mods.size:
            self._grow(max(n + 1, 2 * self.mods.size))

    def sup_from(self, n, window=None):
        """sup_{j >= n} |a_j|, scanned over [n, 4n + 4096] (coefficients tend to 0)."""
        hi = 4 * n + 4096 if window is None else n + window
        self.ensure(hi)
        return float(self.mods[n:hi + 1].max())

    def mass(self, lo, hi):
        if hi < lo:
            return 0.0
        self.ensure(hi)
        return float(self.cum[hi] - self.cum[lo - 1])

    def first_mass_end(self, lo, target):
        """Least n >= lo with sum_{lo..n} |a_j| >= target."""
        while True:
            need = self.cum[lo - 1] + target
            idx = int(np.searchsorted(self.cum, need, side="left"))
            if idx < self.cum.size:
                return max(idx, lo)
            self._grow(2 * self.mods.size)

    def first_above(self, lo, level):
        while True:
            hits = np.nonzero(self.mods[lo:] > level)[0]
            if hits.size:
                return lo + int(hits[0])
            if self.mods.size > 1 << 26:
                raise StallError("no coefficient above the case threshold", None)
            self._grow(2 * self.mods.size)


class _PaleyRun:
    """State of one nested-arc construction: chart, constants and logs."""

    def __init__(self, f, a, consts, budget, center, shift=0.0):
        self.f, self.a, self.consts = f, a, consts
        self.budget, self.shift = budget, shift
        self.chart = Chart(f, windowed(a, 1, None), center, 1.0)
        self.table = _MassTable(a)
        self.trace = SolverTrace(f)
        self.deltas = []
        self.gaps = []
        self.k = 0

    def sample(self, w):
        dB, Bs, vals = self.chart.samples(SAMPLES)
        res = np.abs(vals - w)
        i = int(np.argmin(res))
        return dB, Bs, vals, res, i

    def recenter(self, dB, Bs, vals, i):
        ch = self.chart
        ch.commit(float(dB[i]), Bs, ch.N, max(ch.measure, 1e-300))

    def round(self, w, tol):
        """One inductive step; returns (d_k, alpha_k, done)."""
        ch, eta = self.chart, self.consts.eta_f
        N = ch.N
        dB, Bs, vals, res, i = self.sample(w)
        d, alpha = float(res[i]), float(res.max() - res.min())
        self.trace.residuals.append(d)
        if d <= tol:
            self.recenter(dB, Bs, vals, i)
            self.deltas.append(alpha)
            self.gaps.append(0)
            return d, alpha, True
        T = self.consts.T_gap
        while ch.interior_modulus(1.0, N + T) > eta and T < MAX_GAP_EXTENSION:
            T += 1
        M1 = N + T + 1
        if self.table.sup_from(M1) <= eta * d / 4:
            tag = "I"
            lo = M1
            hi = self.table.first_mass_end(M1, eta * d / 2)
        else:
            tag = "II"
            lo = hi = self.table.first_above(M1, eta * d / 4)
        gap_mass = self.table.mass(N + 1, lo - 1)
        ch.optimize(lambda v: np.abs(v - w), hi, self.budget, self.shift)
        self.trace.arcs.append((ch.N, float(ch.ref[ch.N]) + ch.lo, ch.measure))
        self.trace.blocks.append((lo, hi))
        self.trace.partial_sum_log.append((self.k, ch.partial_sum(), tag))
        self.deltas.append(alpha + gap_mass)
        self.gaps.append(lo - N - 1)
        self.k += 1
        return d, alpha, False

    def finish(self, w):
        ch = self.chart
        dB, Bs, vals, res, i = self.sample(w)
        if res[i] < abs(ch.partial_sum() - w):
            self.recenter(dB, Bs, vals, i)
        t = self.trace
        t.witness = ch.witness()
        t.orbit = ch.orbit()
        t.depth = ch.N
        t.target = complex(w)
        return t


def _check_regime(a):
    if not a.tends_to_zero or a.abs_summable:
        raise InvalidInputError(
            "the target solver needs coefficients tending to 0 with sum |a_n| divergent")


def _diagnostics(run, consts):
    d = np.array(run.trace.residuals)
    delta = np.array(run.deltas)
    if d.size >= 2:
        ratios = (d[1:] - delta[:-1]) / d[:-1]
        gamma_emp = float(max(np.max(ratios), 0.0))
    else:
        gamma_emp = 0.0
    return {"gamma_emp": gamma_emp, "deltas": list(map(float, run.deltas)),
            "gaps": list(map(int, run.gaps)), "eta_f": consts.eta_f, "T_gap": consts.T_gap,
            "schwarz_pick_bound": (consts.gamma0 + (1 - consts.eta_f / 2))
            / (1 + consts.gamma0 * (1 - consts.eta_f / 2))}


def paley_solve(f: BlaschkeProduct, a, w: complex, consts, max_rounds: int = 200,
                tol: float = 1e-3, budget: int = 256, center: float = 0.0,
                shift: float = 0.0) -> SolverTrace:
    """Nested arcs I_k whose sums approach w until the sampled residual d_k <= tol.

    Each round recenters, skips a gap so the interior point z*_k is mapped
    into {|z| <= eta}, and minimizes |F - w| over a block: the minimal block
    with mass eta d_k / 2 when all later coefficients are below eta d_k / 4
    (case I), else the next single coefficient above that level (case II).
    Ten rounds without progress trigger one retry with eta halved, then a
    StallError carrying the trace.
    """
    a = as_sequence(a)
    f.require_solver_contract()
    _check_regime(a)
    w = complex(w)
    run = _PaleyRun(f, a, consts, budget, center, shift)
    best, stale, retried = math.inf, 0, False
    done = False
    for _ in range(max_rounds):
        d, _, done = run.round(w, tol)
        if done:
            break
        if d < best * (1 - 1e-9):
            best, stale = d, 0
        else:
            stale += 1
        if stale >= STALL_ROUNDS:
            if retried:
                run.finish(w)
                raise StallError(f"residual stuck at {best:.3g}", run.trace)
            consts = consts.with_eta(f, consts.eta_f / 2)
            run.consts = consts
            retried, stale = True, 0
    trace = run.finish(w)
    _finalize(trace, f, a, w, tol, run, consts, done)
    return trace


def _finalize(trace, f, a, w, tol, run, consts, done):
    N = trace.depth
    value = partial_sum(f, a, trace.witness, 1, N) if N >= 1 else 0j
    trace.final_residual = abs(value - w)
    trace.certified = bool(done and trace.final_residual <= tol)
    diag = _diagnostics(run, consts)
    diag["chart_residual"] = abs(run.chart.partial_sum() - w)
    diag["recomputed_sum"] = value
    trace.diagnostics = diag


def cluster_follow(f: BlaschkeProduct, a, targets, consts, per_target_tol: float = 1e-2,
                   max_rounds: int = 200, budget: int = 256, center: float = 0.0,
                   lock_measure: float = 1 / 64) -> SolverTrace:
    """One witness whose partial sums visit each target in order.

    After a visit at depth N the arc is shrunk (to ``lock_measure``, halving
    further while the sampled spread exceeds half the tolerance) so that
    every point kept afterwards still has F_N within tolerance of the target.
    """
    targets = [complex(t) for t in targets]
    if not targets:
        raise InvalidInputError("cluster_follow needs at least one target")
    a = as_sequence(a)
    f.require_solver_contract()
    _check_regime(a)
    run = _PaleyRun(f, a, consts, budget, center)
    visits = []
    lock_tol = 0.5 * per_target_tol
    for m, w in enumerate(targets):
        best, stale = math.inf, 0
        for _ in range(max_rounds):
            d, _, done = run.round(w, lock_tol)
            if done:
                break
            if d < best * (1 - 1e-9):
                best, stale = d, 0
            else:
                stale += 1
            if stale >= STALL_ROUNDS:
                run.finish(w)
                run.trace.diagnostics["visits"] = visits
                raise StallError(f"target {m} stuck at residual {best:.3g}", run.trace)
        else:
            run.finish(w)
            run.trace.diagnostics["visits"] = visits
            raise StallError(f"target {m} not reached in {max_rounds} rounds", run.trace)
        ch = run.chart
        ch.clamp(lock_measure)
        for _ in range(60):
            _, _, _, res, _ = run.sample(w)
            if res.max() <= per_target_tol:
                break
            ch.clamp(0.5 * ch.measure)
        visits.append({"target": w, "depth": ch.N, "residual": abs(ch.partial_sum() - w),
                       "lock_measure": ch.measure})
        run.trace.arcs.append((ch.N, float(ch.ref[ch.N]) + ch.lo, ch.measure))
    trace = run.finish(targets[-1])
    trace.target = targets[-1]
    full = [partial_sum(f, a, trace.witness, 1, v["depth"]) for v in visits]
    for v, s in zip(visits, full):
        v["recomputed_residual"] = abs(s - v["target"])
    trace.final_residual = max(v["recomputed_residual"] for v in visits)
    trace.certified = bool(trace.final_residual <= per_target_tol)
    diag = _diagnostics(run, consts)
    diag["visits"] = visits
    trace.diagnostics = diag
    return trace
