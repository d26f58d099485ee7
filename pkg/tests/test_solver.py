"""Block plans, calibration and the constructive solvers."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blaschke_sums import BlaschkeProduct, BoundaryPoint
from blaschke_sums.circle import Arc, arc_from_point
from blaschke_sums.errors import InvalidGeometryError, InvalidInputError
from blaschke_sums.series import CoefficientSequence, partial_sum
from blaschke_sums.solver.blocks import BlockPlan, build_block_plan, check_plan
from blaschke_sums.solver.calibrate import calibrate_constants
from blaschke_sums.solver.lower_bound import certify_lower_bound, contraction_step
from blaschke_sums.solver.paley import cluster_follow, paley_solve
from blaschke_sums.solver.search import search_block_maximizer


@pytest.fixture(scope="module")
def consts_z2():
    return calibrate_constants(BlaschkeProduct([0, 0]))


@pytest.fixture(scope="module")
def consts_z2g():
    return calibrate_constants(BlaschkeProduct([0, 0, 0.5]))


# block plans ---------------------------------------------------------------

def test_block_plan_example():
    # [TRIVIAL] 12 unit coefficients, T=4: only G_2 = [9, 12] is even past G_0
    a = np.zeros(12)
    a[:] = 1
    a[9:11] = 0.1                                    # indices 10, 11 are light
    plan = build_block_plan(a, 1, 12, 4, 2)
    assert plan.short_blocks == [(11, 12)] or plan.short_blocks == [(9, 10)]
    a2 = np.ones(12)
    a2[8], a2[9] = 0.0, 0.0                          # indices 9, 10
    plan = build_block_plan(a2, 1, 12, 4, 2)
    assert plan.short_blocks == [(9, 10)]
    assert plan.long_blocks == [(1, 8), (11, 12)]


def test_block_plan_tie_goes_low():
    plan = build_block_plan(np.ones(12), 1, 12, 4, 2)
    assert plan.short_blocks == [(9, 10)]


def test_block_plan_rejects():
    with pytest.raises(InvalidGeometryError):
        build_block_plan(np.ones(10), 1, 10, 5, 2)
    with pytest.raises(InvalidInputError):
        build_block_plan(np.ones(10), 5, 2, 4, 2)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=300), st.sampled_from([(4, 1), (4, 2), (6, 3), (20, 2)]))
def test_block_plan_invariants(vals, ts):
    T, Ts = ts
    plan = build_block_plan(np.array(vals), 1, len(vals), T, Ts)
    chk = check_plan(plan, np.array(vals))
    assert chk["partition"] and chk["short_mass_bound"] and chk["long_mass_share"]
    assert (plan.N_padded - plan.M + 1) % T == 0
    assert BlockPlan.from_json(plan.to_json()) == plan
    assert all(e - s + 1 == Ts for s, e in plan.short_blocks)


# calibration ---------------------------------------------------------------

def test_calibration_sane(consts_z2, consts_z2g):
    for c in (consts_z2, consts_z2g):
        assert 0 < c.epsilon_f < 1 and 0 < c.c_f <= 1 and 0 < c.eta_f < 1
        assert 0 <= c.gamma0 < 1 and c.gamma0 < c.gamma1 < 1
        assert c.T_gap >= 1 and 0 < c.delta1 < 1
    smaller = consts_z2g.with_eta(BlaschkeProduct([0, 0, 0.5]), consts_z2g.eta_f / 2)
    assert smaller.T_gap >= consts_z2g.T_gap


# searches and certificates ------------------------------------------------

def test_search_positive_coefficients(z2):
    # [TRIVIAL] turn 0 is fixed, so every term is 1 there: the maximum is 30
    a = CoefficientSequence.explicit([1] * 30)
    xi, val = search_block_maximizer(z2, a, 0.0, 1, 30, 1, Arc.from_start(Fraction(-1, 8), Fraction(1, 4)))
    assert val == pytest.approx(30, abs=1e-6)
    assert partial_sum(z2, a, xi, 1, 30).real == pytest.approx(30, abs=1e-6)


def test_search_rejects(z2):
    a = CoefficientSequence.power(1)
    with pytest.raises(InvalidInputError):
        search_block_maximizer(z2, a, 0, 1, 10, 1, Arc.full(), budget=1)


def test_certify_ones(z2, consts_z2):
    xi, ratio, trace = certify_lower_bound(z2, CoefficientSequence.explicit([1] * 40), 0.0, 1, 40,
                                           consts_z2)
    assert ratio >= 0.2 and trace.certified
    assert trace.diagnostics["recomputed_value"].real == pytest.approx(ratio * 40)


def test_certify_single_coefficient(z2g, consts_z2g):
    a = CoefficientSequence.explicit([0, 0, 0, 1j])
    xi, ratio, trace = certify_lower_bound(z2g, a, 0.1, 4, 4, consts_z2g)
    assert ratio >= trace.diagnostics["threshold"]
    arc = arc_from_point(0.1)
    # witness lies in the dilated arc around the point
    assert abs(((xi.turn - float(arc.center_turn)) + 0.5) % 1 - 0.5) <= 0.5 * float(arc.length) / consts_z2g.c_f + 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_certify_random_blocks(z2g, consts_z2g, seed):
    a = CoefficientSequence.power(0.5, phase="random", seed=seed)
    xi, ratio, trace = certify_lower_bound(z2g, a, 0.2j, 1, 120, consts_z2g)
    assert trace.certified and ratio >= trace.diagnostics["threshold"]


def test_contraction_examples(z2, consts_z2):
    eta = consts_z2.eta_f
    w = 1.0 + 0j
    a = CoefficientSequence.explicit([0, 0, 0, eta / 2])
    xi, new = contraction_step(z2, a, 0.0, 4, 4, w, consts_z2)
    assert abs(new) <= abs(w) - eta * eta / 2 + 1e-12
    zero = CoefficientSequence.explicit([0, 0])
    _, same = contraction_step(z2, zero, 0.0, 1, 2, w, consts_z2)
    assert same == w                                  # [TRIVIAL]
    with pytest.raises(InvalidInputError):
        contraction_step(z2, CoefficientSequence.explicit([5.0]), 0.0, 1, 1, w, consts_z2)


@given(st.integers(0, 10 ** 6), st.floats(0, 2 * math.pi))
def test_contraction_random_block(seed, th):
    f = BlaschkeProduct([0, 0, 0.5])
    consts = calibrate_constants(f)
    w = 2 * complex(math.cos(th), math.sin(th))
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=8) + 1j * rng.normal(size=8)
    raw *= consts.eta_f * abs(w) / np.abs(raw).sum() * 0.9
    a = CoefficientSequence.explicit(list(raw))
    xi, new = contraction_step(f, a, 0.0, 1, 8, w, consts)
    assert new == pytest.approx(w - partial_sum(f, a, xi, 1, 8), abs=1e-12)
    assert abs(new) <= abs(w) - consts.eta_f * np.abs(raw).sum() + 1e-12


# Paley solver ----------------------------------------------------------------

@pytest.mark.parametrize("w", [0j, -2 + 1j, 0.3 + 0.4j])
def test_paley_reaches_target(z2g, consts_z2g, w):
    a = CoefficientSequence.power(1)
    trace = paley_solve(z2g, a, w, consts_z2g, tol=1e-3)
    assert trace.certified and trace.final_residual <= 1e-3
    # [DERIVED] independent recomputation from the stored witness
    s = partial_sum(z2g, a, trace.witness, 1, trace.depth) if trace.depth else 0j
    assert abs(s - w) <= 1e-3


def test_paley_trace_nested(z2, consts_z2):
    trace = paley_solve(z2, CoefficientSequence.power(1), 0.5 - 0.5j, consts_z2, tol=1e-2)
    t = trace.witness.turn
    lengths = []
    for k in range(len(trace.arcs)):
        arc = trace.arc(k)
        lengths.append(float(arc.length))
        off = (t - float(arc.start)) % 1.0
        assert off <= float(arc.length) * (1 + 1e-6) + 1e-15
    assert all(b <= a * (1 + 1e-9) for a, b in zip(lengths, lengths[1:]))
    assert json_roundtrip(trace)


def json_roundtrip(trace):
    import json
    return json.loads(trace.dumps())["depth"] == trace.depth


def test_cluster_follow(z2, consts_z2):
    # n^-1/2 keeps the depths small; with 1/n each new target costs exponentially more terms
    a = CoefficientSequence.power(0.5)
    targets = [1, 1j, -1, -1j]
    trace = cluster_follow(z2, a, targets, consts_z2, per_target_tol=1e-2)
    visits = trace.diagnostics["visits"]
    assert [v["target"] for v in visits] == [complex(t) for t in targets]
    assert all(v["recomputed_residual"] <= 1e-2 for v in visits)
    depths = [v["depth"] for v in visits]
    assert depths == sorted(depths)


def test_cluster_follow_repeats(z2, consts_z2):
    trace = cluster_follow(z2, CoefficientSequence.power(1), [0.5, 0.5], consts_z2)
    assert trace.certified


def test_cluster_follow_empty(z2, consts_z2):
    with pytest.raises(InvalidInputError):
        cluster_follow(z2, CoefficientSequence.power(1), [], consts_z2)
