"""Coverage of a disc by the boundary image of F = sum a_n f^n.

Samples of the circle are evaluated with the truncated sum; a sample marks
the grid cell containing its value.  After a uniform start, adjacent samples
whose values are more than one cell apart are bisected, largest gap first,
in fixed-size batches.  The order of evaluation does not depend on the
budget, so a larger budget evaluates a superset of samples and coverage is
monotone in the budget.
"""
import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .. import _kernels
from ..core import BlaschkeProduct, expansion_constants
from ..errors import InvalidInputError
from ..series import CoefficientSequence, tail_abs_sum

BATCH = 2048
INITIAL = 1024
MIN_GAP = 2.0 ** -50
PILOT_TERMS = 2048
PILOT_BINS = 64


@dataclass
class CoverageGrid:
    disc_center: complex
    disc_radius: float
    resolution: int
    occupancy: np.ndarray
    samples_used: int
    coverage_fraction: float
    budget_exhausted: bool = False
    covered_disc: tuple = (0j, 0.0)
    N_total: int = 0
    tail_bound: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def cell(self) -> float:
        return 2 * self.disc_radius / self.resolution

    def inside_mask(self) -> np.ndarray:
        return disc_mask(self.resolution)

    def to_json(self) -> dict:
        c, r = self.covered_disc
        return {"disc_center": [_r(self.disc_center.real), _r(self.disc_center.imag)],
                "disc_radius": _r(self.disc_radius), "resolution": self.resolution,
                "samples_used": self.samples_used,
                "coverage_fraction": _r(self.coverage_fraction),
                "budget_exhausted": self.budget_exhausted,
                "covered_disc": {"center": [_r(c.real), _r(c.imag)], "radius": _r(r)},
                "N_total": self.N_total, "tail_bound": _r(self.tail_bound),
                "occupied_cells": int(self.occupancy.sum()),
                "cells_in_disc": int(self.inside_mask().sum()),
                "extra": {k: _r(v) if isinstance(v, float) else v for k, v in self.extra.items()}}

    def to_pgm(self) -> bytes:
        """Binary PGM: 255 occupied, 96 empty inside the disc, 0 outside (top row = high Im)."""
        img = np.where(self.inside_mask(), 96, 0).astype(np.uint8)
        img[self.occupancy] = 255
        img = img.T[::-1]
        head = f"P5\n{self.resolution} {self.resolution}\n255\n".encode()
        return head + img.tobytes()

    def write(self, pgm_path, json_path):
        with open(pgm_path, "wb") as fh:
            fh.write(self.to_pgm())
        with open(json_path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)


def _r(x):
    return float(f"{float(x):.17g}")


def disc_mask(res: int) -> np.ndarray:
    """Cells (indexed [x, y]) whose centers lie in the inscribed disc."""
    c = (np.arange(res) + 0.5) / res * 2 - 1
    return c[:, None] ** 2 + c[None, :] ** 2 <= 1.0


def truncated_values(f: BlaschkeProduct, coefs: np.ndarray, turns) -> np.ndarray:
    turns = np.ascontiguousarray(turns, dtype=np.float64)
    out = np.empty(turns.size, dtype=np.complex128)
    _kernels.truncated_sums(f.zeros_array, f.mono, turns, coefs, out)
    return out


def truncation_for(a: CoefficientSequence, bound: float, n_max: int = 1 << 24) -> int:
    """Least N (up to doubling resolution then bisection) with tail bound below ``bound``."""
    n = 64
    while tail_abs_sum(a, n).upper >= bound:
        n *= 2
        if n > n_max:
            raise InvalidInputError("tail does not fall below half a cell within 2^24 terms")
    lo, hi = n // 2, n
    while hi - lo > max(1, lo // 64):
        mid = (lo + hi) // 2
        if tail_abs_sum(a, mid).upper < bound:
            hi = mid
        else:
            lo = mid
    return hi


def pilot_disc(f: BlaschkeProduct, a: CoefficientSequence, samples: int = 1 << 17,
               terms: int = PILOT_TERMS, shrink: float = 0.8):
    """A disc inside the well-populated part of a pilot image.

    Pilot values go on a square histogram.  For each threshold (a fraction
    of the median populated count) the thresholded region gives a candidate
    disc centered at its deepest bin.  Scan cost grows like 1/(rho r^4) for
    radius r and least smoothed density rho in the disc: the cell area
    scales with r^2 and the truncation with 1/r^2.  The candidate
    maximizing rho r^4 wins.
    """
    coefs = a.array(terms)
    vals = truncated_values(f, coefs, (np.arange(samples) + 0.5) / samples)
    lo = np.array([vals.real.min(), vals.imag.min()])
    side = max(vals.real.max() - lo[0], vals.imag.max() - lo[1]) * (1 + 1e-9)
    if side == 0:
        return complex(lo[0], lo[1]), 0.0
    b = side / PILOT_BINS
    H, _, _ = np.histogram2d(vals.real, vals.imag, bins=PILOT_BINS,
                             range=[[lo[0], lo[0] + side], [lo[1], lo[1] + side]])
    smooth = ndimage.uniform_filter(H, 3, mode="constant")
    med = np.median(H[H > 0])
    ii, jj = np.meshgrid(np.arange(PILOT_BINS), np.arange(PILOT_BINS), indexing="ij")
    best = (-1.0, complex(lo[0], lo[1]), 0.0)
    for q in (1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0):
        filled = np.pad(smooth >= q * med, 1)
        dist = ndimage.distance_transform_edt(filled)[1:-1, 1:-1]
        i, j = np.unravel_index(int(np.argmax(dist + 1e-6 * smooth / smooth.max())), H.shape)
        r_bins = shrink * (dist[i, j] - 0.5)
        if r_bins <= 0:
            continue
        inside = (ii - i) ** 2 + (jj - j) ** 2 <= (r_bins + 0.5) ** 2
        score = float(smooth[inside].min()) * r_bins ** 4
        if score > best[0]:
            best = (score, complex(lo[0] + (i + 0.5) * b, lo[1] + (j + 0.5) * b), r_bins * b)
    return best[1], best[2]


def _lipschitz_gap(a_mod, kmax, cell):
    """Arc gap below which the truncated curve moves less than one cell."""
    n = np.arange(1, a_mod.size)
    with np.errstate(divide="ignore"):
        logs = np.log(a_mod[1:]) + n * math.log(kmax)
    top = float(np.max(logs))
    if top == -math.inf:
        return math.inf
    log_l = top + math.log(float(np.sum(np.exp(logs - top)))) + math.log(2 * math.pi)
    return math.exp(math.log(cell) - log_l) if log_l - math.log(cell) < 700 else 0.0


def peano_scan(f: BlaschkeProduct, a: CoefficientSequence, disc=None, resolution: int = 64,
               sample_budget: int = 1 << 16, N_total: int | None = None,
               offset: float = 0.5) -> CoverageGrid:
    """Coverage of ``disc = (center, radius)`` by the image of the circle under F.

    With ``disc=None`` a pilot scan chooses it.  ``N_total`` defaults to the
    least truncation whose tail bound is below half a cell diagonal.
    ``offset`` shifts the initial uniform grid (in grid steps).
    """
    if not (a.abs_summable and a.slow_decay_eq3):
        raise InvalidInputError("coverage scans need abs_summable and slow_decay_eq3 coefficients")
    if resolution < 2 or sample_budget < 2:
        raise InvalidInputError("resolution and sample_budget must be at least 2")
    if disc is None:
        center, radius = pilot_disc(f, a)
    else:
        center, radius = complex(disc[0]), float(disc[1])
    if radius <= 0:
        raise InvalidInputError("disc radius must be positive")
    cell = 2 * radius / resolution
    half_diag = cell * math.sqrt(2) / 2
    if N_total is None:
        N_total = truncation_for(a, half_diag)
    tail = tail_abs_sum(a, N_total).upper
    if tail >= half_diag:
        raise InvalidInputError(
            f"tail bound {tail:.3g} after {N_total} terms is not below half a cell ({half_diag:.3g})")
    coefs = a.array(N_total)
    kmax = float(f.degree) if f.mono else expansion_constants(f).k_max
    min_gap = max(MIN_GAP, _lipschitz_gap(np.abs(coefs), kmax, cell))
    occ = np.zeros((resolution, resolution), dtype=bool)
    x0, y0 = center.real - radius, center.imag - radius

    def mark(vals):
        ix = np.floor((vals.real - x0) / cell).astype(np.int64)
        iy = np.floor((vals.imag - y0) / cell).astype(np.int64)
        ok = (ix >= 0) & (ix < resolution) & (iy >= 0) & (iy < resolution)
        occ[ix[ok], iy[ok]] = True

    g0 = min(INITIAL, sample_budget)
    ts = (np.arange(g0) + offset) / g0
    vals = truncated_values(f, coefs, ts)
    mark(vals)
    used = g0
    heap = []
    for i in range(g0):
        j = (i + 1) % g0
        tl, tr = ts[i], ts[j] + (1.0 if j == 0 else 0.0)
        d = abs(vals[j] - vals[i])
        if d > cell:
            heap.append((-d, tl, tr, vals[i], vals[j]))
    heapq.heapify(heap)
    exhausted = False
    while heap:
        room = sample_budget - used
        if room <= 0:
            exhausted = True
            break
        batch = []
        while heap and len(batch) < BATCH:
            item = heapq.heappop(heap)
            if item[2] - item[1] > min_gap:
                batch.append(item)
        if not batch:
            break
        batch = batch[:room]
        mids = np.array([0.5 * (b[1] + b[2]) for b in batch])
        mv = truncated_values(f, coefs, mids % 1.0)
        mark(mv)
        used += len(batch)
        for (_, tl, tr, vl, vr), tm, vm in zip(batch, mids, mv):
            d1, d2 = abs(vm - vl), abs(vr - vm)
            if d1 > cell:
                heapq.heappush(heap, (-d1, tl, tm, vl, vm))
            if d2 > cell:
                heapq.heappush(heap, (-d2, tm, tr, vm, vr))
    inside = disc_mask(resolution)
    frac = float(occ[inside].sum()) / float(inside.sum())
    covered = largest_covered_disc(occ, center, radius)
    return CoverageGrid(center, radius, resolution, occ, used, frac, exhausted, covered,
                        N_total, tail, {"min_gap": min_gap})


def largest_covered_disc(occ: np.ndarray, center: complex, radius: float):
    """Largest disc of occupied cells: repeated erosion depth via the distance transform."""
    res = occ.shape[0]
    cell = 2 * radius / res
    depth = ndimage.distance_transform_edt(np.pad(occ, 1))[1:-1, 1:-1]
    if depth.max() <= 0:
        return center, 0.0
    i, j = np.unravel_index(int(np.argmax(depth)), depth.shape)
    c = complex(center.real - radius + (i + 0.5) * cell, center.imag - radius + (j + 0.5) * cell)
    return c, float(depth[i, j] - 0.5) * cell
