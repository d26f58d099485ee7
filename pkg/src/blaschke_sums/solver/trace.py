"""Records produced by the constructive solvers."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..circle import Arc
from ..core import BlaschkeProduct, BoundaryPoint
from .chart import materialize_arc


@dataclass
class SolverTrace:
    """Nested arcs, residuals and the witness of one construction.

    Arcs are kept as (depth N_k, start turn of f^{N_k}(I_k), its measure);
    ``arc(k)`` turns one into a level-0 Arc through the witness orbit.
    """
    f: BlaschkeProduct
    arcs: list = field(default_factory=list)
    blocks: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    partial_sum_log: list = field(default_factory=list)
    witness: BoundaryPoint | None = None
    certified: bool = False
    target: complex | None = None
    depth: int = 0
    final_residual: float | None = None
    orbit: np.ndarray | None = None
    block_plan: object = None
    diagnostics: dict = field(default_factory=dict)

    def arc(self, k: int, accuracy_bits: int = 53) -> Arc:
        depth, start, length = self.arcs[k]
        return materialize_arc(self.f, self.orbit, depth, start, length, accuracy_bits)

    def summary(self) -> str:
        w = "-" if self.target is None else _cplx(self.target)
        res = "-" if self.final_residual is None else f"{self.final_residual:.3e}"
        wit = "-" if self.witness is None else self.witness.to_decimal()[:32]
        return (f"target={w} rounds={len(self.residuals)} final_residual={res} "
                f"witness={wit}")

    def to_json(self) -> dict:
        digits = 17
        out = {
            "product": self.f.to_json(),
            "target": None if self.target is None else _cplx(self.target),
            "depth": self.depth,
            "certified": self.certified,
            "final_residual": _num(self.final_residual, digits),
            "residuals": [_num(d, digits) for d in self.residuals],
            "blocks": [list(b) for b in self.blocks],
            "arcs": [{"depth": int(n), "image_start": _num(s % 1.0, digits),
                      "image_measure": _num(m, digits)} for n, s, m in self.arcs],
            "partial_sum_log": [
                {"round": int(k), "partial_sum": _cplx(v), "case": tag}
                for k, v, tag in self.partial_sum_log],
            "witness": None if self.witness is None else self.witness.to_json(),
            "diagnostics": _clean(self.diagnostics),
        }
        if self.block_plan is not None:
            out["block_plan"] = self.block_plan.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _num(x, digits=17):
    if x is None:
        return None
    return float(f"{float(x):.{digits}g}")


def _cplx(z) -> str:
    z = complex(z)
    return f"{z.real:.17g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.17g}i"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return _cplx(obj)
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else _num(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
