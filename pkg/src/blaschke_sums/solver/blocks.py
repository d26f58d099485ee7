"""Splitting a coefficient range into long blocks separated by light short blocks."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidGeometryError, InvalidInputError


@dataclass
class BlockPlan:
    """Long and short blocks (inclusive index ranges) partitioning [M, N_padded]."""
    T: int
    T_short: int
    M: int
    N: int
    N_padded: int
    long_blocks: list = field(default_factory=list)
    short_blocks: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"T": self.T, "T_short": self.T_short, "M": self.M, "N": self.N,
                "N_padded": self.N_padded,
                "long_blocks": [list(b) for b in self.long_blocks],
                "short_blocks": [list(b) for b in self.short_blocks]}

    @classmethod
    def from_json(cls, data) -> "BlockPlan":
        return cls(data["T"], data["T_short"], data["M"], data["N"], data["N_padded"],
                   [tuple(b) for b in data["long_blocks"]],
                   [tuple(b) for b in data["short_blocks"]])


def _abs_values(a, M, N_pad):
    """|a_n| for n in [M, N_pad]; array-like input is indexed from M."""
    if hasattr(a, "modulus"):
        vals = np.asarray(a.modulus(np.arange(max(M, 1), N_pad + 1)), dtype=float)
        if M < 1:
            vals = np.concatenate((np.zeros(1 - M), vals))
        return vals
    vals = np.abs(np.asarray(a, dtype=np.complex128))
    out = np.zeros(N_pad - M + 1)
    k = min(vals.size, out.size)
    out[:k] = vals[:k]
    return out


def build_block_plan(a, M: int, N: int, T: int, T_short: int) -> BlockPlan:
    """Weiss-style plan: in every even block G_2k (k >= 1) the aligned T_short
    sub-block of least mass becomes short; the long blocks fill the gaps.

    ``a`` is a CoefficientSequence or an array of coefficients for M, M+1, ...
    The range is padded with zero coefficients to a multiple of T.  Ties go to
    the lowest start.  The trailing long block may have fewer than T indices
    (or be absent) when the range ends inside an even block.
    """
    if T_short <= 0 or T <= 0 or T % T_short:
        raise InvalidGeometryError("T_short must divide T")
    if N < M:
        raise InvalidInputError("empty index range")
    blocks = -(-(N - M + 1) // T)
    N_pad = M + blocks * T - 1
    mods = _abs_values(a, M, N_pad)
    shorts = []
    for k in range(2, blocks, 2):
        g = mods[k * T:(k + 1) * T]
        sub = g.reshape(T // T_short, T_short).sum(axis=1)
        i = int(np.argmin(sub))
        start = M + k * T + i * T_short
        shorts.append((start, start + T_short - 1))
    longs = []
    cursor = M
    for s, e in shorts:
        if s > cursor:
            longs.append((cursor, s - 1))
        cursor = e + 1
    if cursor <= N_pad:
        longs.append((cursor, N_pad))
    return BlockPlan(T, T_short, M, N, N_pad, longs, shorts)


def check_plan(plan: BlockPlan, a) -> dict:
    """Re-verify the short-block mass bound and the long-block mass share."""
    mods = _abs_values(a, plan.M, plan.N_padded)

    def s(lo, hi):
        return float(mods[lo - plan.M: hi - plan.M + 1].sum())

    short_ok = all(
        s(b0, b1) <= plan.T_short / plan.T * s(*_enclosing(plan, b0)) + 1e-12
        for b0, b1 in plan.short_blocks)
    total = s(plan.M, plan.N_padded)
    long_mass = sum(s(*b) for b in plan.long_blocks)
    share_ok = long_mass >= (1 - plan.T_short / plan.T) * total - 1e-12
    covered = sorted(plan.long_blocks + plan.short_blocks)
    partition = covered[0][0] == plan.M and covered[-1][1] == plan.N_padded and all(
        covered[i][1] + 1 == covered[i + 1][0] for i in range(len(covered) - 1))
    return {"short_mass_bound": short_ok, "long_mass_share": share_ok,
            "partition": partition, "long_mass": long_mass, "total_mass": total}


def _enclosing(plan, start):
    k = (start - plan.M) // plan.T
    lo = plan.M + k * plan.T
    return lo, lo + plan.T - 1
