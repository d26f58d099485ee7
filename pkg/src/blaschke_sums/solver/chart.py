"""Nested-arc engine shared by the constructive solvers.

A chart holds a reference boundary orbit at levels 0..N (double turns) and
an arc at depth N given as lifted offsets [lo, hi] around the reference
point.  The arc at level 0 is the pullback along the branch through the
reference orbit, so the nested arcs of the constructions never have to be
represented at level 0 while the search is running (they shrink like K^-N).

Candidates are parametrized by their offset from the reference at a base
level B below N, where all candidates of the arc differ by less than
``SEARCH_SPREAD``; offsets are pushed forward with relative accuracy and
beyond N candidates continue as pseudo-orbits, which shadow true orbits
because the boundary map is expanding.  Terms below B are frozen.
"""
import math

import numpy as np

from .. import _hp, _kernels
from ..circle import Arc
from ..core import BlaschkeProduct, BoundaryPoint, evaluate, expansion_constants, \
    required_precision

SEARCH_SPREAD = 1e-7
EXACT_SPREAD = 1e-17
LINEAR_H = 1e-9
GOLDEN = (math.sqrt(5) - 1) / 2


class Chart:
    def __init__(self, f: BlaschkeProduct, coef_source, center: float, length: float,
                 capacity: int = 1024):
        self.f = f
        self.zeros, self.mono = f.zeros_array, f.mono
        ec = expansion_constants(f)
        self.kmin, self.kmax = ec.k_min, ec.k_max
        self.k_eff = float(f.degree) if f.mono else math.sqrt(ec.k_min * ec.k_max)
        self.pmax = max((1 + abs(z)) / (1 - abs(z)) for z in f.zeros)
        lk = math.log(self.kmin)
        self.W = int(math.ceil(math.log(1 / EXACT_SPREAD) / lk)) + 1
        self.Ws = int(math.ceil(math.log(1 / SEARCH_SPREAD) / lk)) + 1
        self._coef_source = coef_source
        self._coef = np.asarray(coef_source(capacity), dtype=np.complex128)
        self.ref = np.zeros(capacity + 1)
        self.cum = np.zeros(capacity + 2)
        self.fsum = np.zeros(capacity + 1, dtype=np.complex128)
        self.ref[0] = float(center) % 1.0
        self.N = 0
        self.lo, self.hi = -0.5 * float(length), 0.5 * float(length)
        self.arcs = []
        self._refresh(0)

    # storage -----------------------------------------------------------------
    def coef(self, n: int) -> np.ndarray:
        if n >= self._coef.size:
            size = max(n + 1, 2 * self._coef.size)
            self._coef = np.asarray(self._coef_source(size - 1), dtype=np.complex128)
        return self._coef

    def _ensure(self, n: int):
        if n + 1 >= self.ref.size:
            size = max(n + 2, 2 * self.ref.size)
            for name in ("ref", "cum", "fsum"):
                old = getattr(self, name)
                new = np.zeros(size + (1 if name == "cum" else 0), dtype=old.dtype)
                new[: old.size] = old
                setattr(self, name, new)

    def _refresh(self, j0: int):
        """Recompute log-derivative and partial-sum prefixes from level j0."""
        N = self.N
        turns = self.ref[j0: N + 1]
        dm = np.empty(turns.size)
        _kernels.dmod_array(self.zeros, turns, dm)
        self.cum[j0 + 1: N + 2] = self.cum[j0] + np.cumsum(np.log(dm))
        a = self.coef(N)
        units = np.exp(2j * np.pi * turns)
        prev = self.fsum[j0 - 1] if j0 > 0 else 0j
        terms = a[j0: N + 1] * units
        if j0 == 0:
            terms[0] = 0.0
        self.fsum[j0: N + 1] = prev + np.cumsum(terms)

    # geometry ----------------------------------------------------------------
    @property
    def measure(self) -> float:
        return self.hi - self.lo

    def base(self, window: int) -> int:
        return max(0, self.N - window)

    def pull(self, offset: float, level: int) -> float:
        """Offset at ``level`` of the point with lifted offset ``offset`` at depth N."""
        if level >= self.N:
            return offset
        buf = np.empty(self.N - level)
        return _kernels.chain(self.zeros, self.mono, self.kmin, self.kmax,
                              self.ref[level: self.N], offset, buf)

    def arc_at(self, level: int):
        return self.pull(self.lo, level), self.pull(self.hi, level)

    def clamp(self, target: float):
        if self.hi - self.lo > target:
            lo = min(max(-0.5 * target, self.lo), self.hi - target)
            self.lo, self.hi = lo, lo + target

    # evaluation ----------------------------------------------------------------
    def evaluate(self, dB, H: int, Bs: int | None = None):
        """Partial sums F_H for candidates with base offsets dB at level Bs."""
        if Bs is None:
            Bs = self.base(self.Ws)
        dB = np.ascontiguousarray(dB, dtype=np.float64)
        a = self.coef(H)
        out = np.empty(dB.size, dtype=np.complex128)
        dN = np.empty(dB.size)
        _kernels.eval_batch(self.zeros, self.mono, self.pmax, self.ref[Bs: self.N + 1], dB,
                            np.ascontiguousarray(a[Bs + 1: H + 1]), out, dN)
        return out + self.fsum[Bs], dN

    def grid(self, count: int, shift: float = 0.0, Bs: int | None = None):
        if Bs is None:
            Bs = self.base(self.Ws)
        loB, hiB = self.arc_at(Bs)
        if count < 2:
            return np.array([0.5 * (loB + hiB)]), Bs
        u = (np.arange(count) + shift) / (count - 1)
        return loB + (hiB - loB) * np.minimum(u, 1.0), Bs

    def samples(self, count: int = 33):
        """F_N at evenly spaced points of the arc (endpoints included) and at the reference."""
        dB, Bs = self.grid(count)
        dB = np.append(dB, 0.0)
        vals, _ = self.evaluate(dB, self.N, Bs)
        return dB, Bs, vals

    def search(self, objective, H: int, budget: int, shift: float = 0.0, refine: int = 40):
        """Grid search plus golden refinement of ``objective(F_H)`` (smaller is better)."""
        dB, Bs = self.grid(budget, shift)
        order = np.argsort(dB)
        dB = dB[order]
        vals, _ = self.evaluate(dB, H, Bs)
        obj = objective(vals)
        i = int(np.argmin(obj))
        best = (float(obj[i]), float(dB[i]), complex(vals[i]))
        ref_val, _ = self.evaluate(np.array([0.0]), H, Bs)
        ref_obj = float(objective(ref_val)[0])
        if ref_obj < best[0]:
            best = (ref_obj, 0.0, complex(ref_val[0]))
        if refine and dB.size > 2:
            a = dB[max(i - 1, 0)]
            b = dB[min(i + 1, dB.size - 1)]
            cand = self._golden(objective, a, b, H, Bs, refine)
            if cand[0] < best[0]:
                best = cand
        return {"objective": best[0], "dB": best[1], "Bs": Bs, "value": best[2]}

    def _golden(self, objective, a, b, H, Bs, iters):
        def ev(x):
            v, _ = self.evaluate(np.array([x]), H, Bs)
            return float(objective(v)[0]), complex(v[0])

        c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
        (fc, vc), (fd, vd) = ev(c), ev(d)
        best = min((fc, c, vc), (fd, d, vd), key=lambda p: p[0])
        for _ in range(iters):
            if fc < fd:
                b, d, fd, vd = d, c, fc, vc
                c = b - GOLDEN * (b - a)
                fc, vc = ev(c)
                if fc < best[0]:
                    best = (fc, c, vc)
            else:
                a, c, fc, vc = c, d, fd, vd
                d = a + GOLDEN * (b - a)
                fd, vd = ev(d)
                if fd < best[0]:
                    best = (fd, d, vd)
        return best

    def optimize(self, objective, horizon: int, budget: int, shift: float = 0.0,
                 stage_target: float = 0.5, final_target: float = 0.5):
        """Staged search of ``objective(F_horizon)`` ending with the arc at depth ``horizon``.

        Each stage looks as many levels ahead as the grid can resolve,
        commits all but the last of them (arc clipped to ``stage_target``)
        and repeats.  The last commit clips to ``final_target``.
        """
        if horizon < self.N:
            raise ValueError("horizon is above the current depth")
        while True:
            N = self.N
            m = max(self.measure, 1e-300)
            ell = max(1, int(math.log(max(budget / (4 * m), 1.0)) / math.log(self.k_eff)))
            H = min(N + ell, horizon)
            r = self.search(objective, H, budget, shift)
            if H >= horizon:
                self.commit(r["dB"], r["Bs"], horizon, final_target)
                return r
            self.commit(r["dB"], r["Bs"], max(N + 1, H - 1), stage_target)

    # commit ------------------------------------------------------------------------
    def commit(self, dB: float, Bs: int, new_depth: int, target: float):
        """Move the reference to the chosen candidate and deepen the arc to new_depth.

        The arc is carried level by level and, whenever its image exceeds
        ``target``, clipped to a sub-arc of that measure around the candidate
        (centered when possible).  The result is nested in the old arc.
        """
        N = self.N
        if new_depth < N:
            raise ValueError("cannot commit to a shallower depth")
        self._ensure(new_depth)
        H = new_depth - Bs
        turns = np.empty(H + 1)
        offs = np.empty(H + 1)
        _kernels.cand_orbit(self.zeros, self.mono, self.pmax, self.ref[Bs: N + 1].copy(),
                            float(dB), H, turns, offs)
        dN = offs[N - Bs]
        B = self.base(self.W)
        low = []
        if B < Bs:
            buf = np.empty(Bs - B)
            _kernels.chain(self.zeros, self.mono, self.kmin, self.kmax,
                           self.ref[B:Bs].copy(), float(dB), buf)
            low = buf
        lo, hi = self.lo - dN, self.hi - dN
        for j in range(N, new_depth):
            t = turns[j - Bs]
            lo = _kernels.lift_signed(self.zeros, self.mono, t, lo)
            hi = _kernels.lift_signed(self.zeros, self.mono, t, hi)
            if hi - lo > target:
                nlo = min(max(-0.5 * target, lo), hi - target)
                lo, hi = nlo, nlo + target
        if B < Bs:
            self.ref[B:Bs] = low
        self.ref[Bs: new_depth + 1] = turns
        self.N = new_depth
        self.lo, self.hi = lo, hi
        self.clamp(target)
        self._refresh(B)
        self.arcs.append((self.N, float(self.ref[self.N]) + self.lo, self.measure))

    def partial_sum(self, n: int | None = None) -> complex:
        """F_n at the reference point (n <= N)."""
        return complex(self.fsum[self.N if n is None else n])

    # interior points -----------------------------------------------------------------
    def interior_modulus(self, scale: float, level: int) -> float:
        """|f^level(z*)| for z* on the ray through the center of I with 1-|z*| = scale m(I).

        The orbit of z* is followed through the first-order boundary expansion
        while 1 - |f^j(z*)| stays below LINEAR_H, then in double precision.
        """
        Bs = self.base(self.Ws)
        loB, hiB = self.arc_at(Bs)
        mid, width = 0.5 * (loB + hiB), hiB - loB
        logh = math.log(scale * width)
        H = max(level, self.N) - Bs
        turns = np.empty(H + 1)
        offs = np.empty(H + 1)
        _kernels.cand_orbit(self.zeros, self.mono, self.pmax, self.ref[Bs: self.N + 1].copy(),
                            mid, H, turns, offs)
        dm = np.empty(turns.size)
        _kernels.dmod_array(self.zeros, turns, dm)
        up = logh + np.concatenate(([0.0], np.cumsum(np.log(dm))))      # levels Bs..Bs+H+1
        down = logh - (self.cum[Bs] - self.cum[: Bs + 1])                 # levels 0..Bs
        logs = np.concatenate((down[:-1], up[: H + 1]))                   # levels 0..Bs+H
        ok = np.nonzero(logs[: level + 1] <= math.log(LINEAR_H))[0]
        j0 = int(ok[-1]) if ok.size else 0
        if j0 >= Bs:
            tc = turns[j0 - Bs]
        else:
            tc = self.ref[j0] + self.pull_between(mid, j0, Bs)
        h = math.exp(logs[j0])
        if h >= 1:
            return 0.0
        z = (1 - h) * complex(math.cos(2 * math.pi * tc), math.sin(2 * math.pi * tc))
        for _ in range(level - j0):
            z = evaluate(self.f, z)
        return abs(z)

    def pull_between(self, offset: float, lo_level: int, hi_level: int) -> float:
        if lo_level >= hi_level:
            return offset
        buf = np.empty(hi_level - lo_level)
        return _kernels.chain(self.zeros, self.mono, self.kmin, self.kmax,
                              self.ref[lo_level:hi_level].copy(), offset, buf)

    # witnesses ----------------------------------------------------------------------
    def orbit(self) -> np.ndarray:
        return self.ref[: self.N + 1].copy()

    def witness(self, accuracy_bits: int = 53) -> BoundaryPoint:
        bits = required_precision(self.f, self.N, accuracy_bits)
        num = _hp.pullback(self.f.zeros, self.mono, self.orbit(), bits, accuracy_bits)
        return BoundaryPoint(num, bits)


def materialize_arc(f: BlaschkeProduct, orbit: np.ndarray, depth: int, start: float,
                    length: float, accuracy_bits: int = 53) -> Arc:
    """Level-0 arc whose depth-``depth`` image is [start, start + length].

    ``orbit`` is a pseudo-orbit through the arc (for instance the final
    witness orbit); it selects the inverse branch.
    """
    ec = expansion_constants(f)
    zeros, mono = f.zeros_array, f.mono
    lk = math.log(ec.k_min)
    W = int(math.ceil(math.log(1 / EXACT_SPREAD) / lk)) + 1
    B = max(0, depth - W)
    bits = required_precision(f, depth, accuracy_bits)
    ends = []
    for e in (start, start + length):
        off = ((e - orbit[depth] + 0.5) % 1.0) - 0.5
        buf = np.empty(depth - B)
        if depth > B:
            _kernels.chain(zeros, mono, ec.k_min, ec.k_max, orbit[B:depth].copy(), off, buf)
        orb = np.concatenate((orbit[:B], buf, [e % 1.0]))
        num = _hp.pullback(f.zeros, mono, orb, bits, accuracy_bits)
        ends.append(num)
    from fractions import Fraction
    a = Fraction(ends[0], 1 << bits)
    L = Fraction((ends[1] - ends[0]) % (1 << bits), 1 << bits)
    if L == 0:
        L = Fraction(1, 1 << bits)
    return Arc.from_start(a, L, bits)
