"""Coefficient sequences, partial sums and tails."""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blaschke_sums import BlaschkeProduct, BoundaryPoint, evaluate
from blaschke_sums import _kernels
from blaschke_sums.circle import Arc
from blaschke_sums.errors import InvalidInputError, UnboundedTailError
from blaschke_sums.series import (CoefficientSequence, PartialSumState, check_eq3_ratio,
                                  oscillation_on_arc, parse_coefficients, partial_sum,
                                  tail_abs_sum, weighted_geometric_tail)


def test_partial_sum_fixed_point(z2):
    # [TRIVIAL] 1 is fixed by z^2: sum_{n<=60} 2^-n = 1 - 2^-60
    s = partial_sum(z2, CoefficientSequence.geometric(0.5), BoundaryPoint(0, 64), 1, 60)
    assert s.real == pytest.approx(1 - 2.0 ** -60, abs=1e-15) and s.imag == 0


def test_partial_sum_zero_and_range(z2):
    assert partial_sum(z2, CoefficientSequence.explicit([0, 0]), 0.3, 1, 5) == 0
    with pytest.raises(InvalidInputError):
        partial_sum(z2, CoefficientSequence.power(2), 0.3, 3, 2)


@given(st.floats(-0.9, 0.9), st.floats(-0.4, 0.4), st.integers(1, 10), st.integers(0, 15))
def test_partial_sum_interior_brute(x, y, M, extra):
    f = BlaschkeProduct([0, 0, 0.5])
    a = CoefficientSequence.power(1.5)
    z = complex(x, y)
    N = M + extra
    w, want = z, 0j
    for n in range(1, N + 1):                        # [DERIVED] direct loop
        w = evaluate(f, w)
        if n >= M:
            want += n ** -1.5 * w
    assert partial_sum(f, a, z, M, N) == pytest.approx(want, abs=1e-13)


def test_partial_sum_boundary_against_mpmath(z2g):
    # [DERIVED] 300-bit mpmath orbit of exp(2 pi i / 7)
    N = 40
    mpmath.mp.prec = 600
    w = mpmath.expj(2 * mpmath.pi / 7)
    want = mpmath.mpc(0)
    for n in range(1, N + 1):
        w = w * w * (w - 0.5) / (1 - 0.5 * w)
        want += w / n ** 2
    got = partial_sum(z2g, CoefficientSequence.power(2), BoundaryPoint.from_turn(Fraction(1, 7), 400),
                      1, N)
    assert abs(got - complex(want)) < 1e-13


def test_tail_examples():
    t = tail_abs_sum(CoefficientSequence.power(2), 10)
    assert 1 / 11 < t.lower <= t.upper < 1 / 10                       # [TRIVIAL]
    assert t.upper == pytest.approx(float(mpmath.zeta(2, 11)), rel=1e-9)   # [DERIVED] Hurwitz zeta
    assert tail_abs_sum(CoefficientSequence.explicit([1, 1, 1]), 0).upper == 2 + 1
    assert tail_abs_sum(CoefficientSequence.explicit([1, 1, 1]), 1).upper == 2


@given(st.floats(1.1, 4), st.integers(1, 5000))
def test_tail_power_brackets_hurwitz(p, n):
    t = tail_abs_sum(CoefficientSequence.power(p), n)
    exact = float(mpmath.zeta(p, n + 1))
    assert t.lower <= exact * (1 + 1e-10) and exact <= t.upper * (1 + 1e-10)


def test_tail_geometric_exact():
    t = tail_abs_sum(CoefficientSequence.geometric(0.5), 3)
    assert t.lower == pytest.approx(0.125) and t.upper == pytest.approx(0.125)


def test_tail_unbounded():
    with pytest.raises(UnboundedTailError):
        tail_abs_sum(CoefficientSequence.power(1), 10)
    t = tail_abs_sum(CoefficientSequence.power(1), 10, horizon=20)
    assert t.remainder_bound is None
    assert t.value == pytest.approx(sum(1 / k for k in range(11, 21)))


def test_eq3_ratio():
    # [DERIVED] for n^-p the ratio behaves like (p-1)/n
    chk = check_eq3_ratio(CoefficientSequence.power(2), 100)
    n, r = chk.ratios[-1]
    assert n == 100 and r == pytest.approx(1 / 100, rel=0.02)
    assert chk.decreasing_trend
    g = check_eq3_ratio(CoefficientSequence.geometric(0.5), 30)
    assert all(r == pytest.approx(1.0) for _, r in g)                 # [TRIVIAL]
    assert not g.decreasing_trend


def test_weighted_geometric_tail():
    a = CoefficientSequence.explicit([1, 1, 1])
    assert weighted_geometric_tail(a, 2, 3) == pytest.approx(1.75)      # [TRIVIAL]
    assert weighted_geometric_tail(CoefficientSequence.power(2), 2, 10) == pytest.approx(
        sum(n ** -2 * 2.0 ** (n - 10) for n in range(1, 11)))
    with pytest.raises(InvalidInputError):
        weighted_geometric_tail(a, 1, 3)


def test_oscillation_examples(z2):
    a = CoefficientSequence.explicit([1])
    arc = Arc.from_start(0, Fraction(1, 10))
    # [TRIVIAL] f(I) spans 0.2 turns; its endpoints are the farthest apart
    assert oscillation_on_arc(z2, a, arc, 1, samples=3) == pytest.approx(2 * math.sin(0.2 * math.pi))
    assert oscillation_on_arc(z2, CoefficientSequence.explicit([0, 0]), arc, 2) == 0


def test_state_matches_partial_sum(z2g):
    a = CoefficientSequence.power(1, phase="random", seed=3)
    xi = BoundaryPoint.from_turn(Fraction(2, 9), 300)
    st_ = PartialSumState(z2g, a, xi)
    st_.advance(10)
    v = st_.advance(15)
    assert v == pytest.approx(partial_sum(z2g, a, xi, 1, 25), abs=1e-14)
    z = 0.2 + 0.1j
    s2 = PartialSumState(z2g, a, z)
    assert s2.advance(12) == pytest.approx(partial_sum(z2g, a, z, 1, 12), abs=1e-15)


def test_parse_coefficients():
    assert parse_coefficients("power:2") == CoefficientSequence.power(2.0)
    a = parse_coefficients("list:1,2j")
    assert list(a.array(2)[1:]) == [1, 2j]
    assert parse_coefficients("geometric:0.25@random").phase == "random"
    with pytest.raises(InvalidInputError):
        parse_coefficients("bogus:1")
    b = CoefficientSequence.harmonic_log(3, phase="alternating")
    assert CoefficientSequence.from_json(b.to_json()) == b


def test_truncated_kernel_square():
    # [DERIVED] short sums agree with the exact orbit before chaos separates them
    t = np.array([0.1, 0.3, 1 / 7, 0.61803])
    coefs = CoefficientSequence.power(1).array(30)
    out = np.empty(4, dtype=complex)
    _kernels.truncated_sums(np.zeros(2, complex), 2, t, coefs, out)
    z2 = BlaschkeProduct([0, 0])
    for ti, v in zip(t, out):
        want = partial_sum(z2, CoefficientSequence.power(1), BoundaryPoint.from_turn(ti, 200), 1, 30)
        assert abs(v - want) < 1e-6


def test_truncated_kernel_general(z2g):
    t = np.array([0.1, 0.45, 0.77])
    coefs = CoefficientSequence.power(2).array(15)
    out = np.empty(3, dtype=complex)
    _kernels.truncated_sums(z2g.zeros_array, z2g.mono, t, coefs, out)
    for ti, v in zip(t, out):
        want = partial_sum(z2g, CoefficientSequence.power(2), BoundaryPoint.from_turn(ti, 200), 1, 15)
        assert abs(v - want) < 1e-6


def _doubling_sums(coefs, n_max, points, rng):
    # [DERIVED] doubling shifts the binary expansion: the n-th turn is read
    # from binary digits n+1 .. n+53 of the starting turn
    bits = rng.integers(0, 2, size=(points, n_max + 53))
    windows = np.lib.stride_tricks.sliding_window_view(bits, 53, axis=1)[:, :n_max + 1]
    turns = windows @ (2.0 ** -np.arange(1, 54))
    return np.cumsum(coefs * np.exp(2j * np.pi * turns), axis=1)


def test_convergence_dichotomy_diagnostics():
    # For z^2 the iterates are orthogonal, so E|S_4000 - S_2000|^2 = sum_{2000<n<=4000} |a_n|^2.
    # With a_n = 1/n that is 2.5e-4: increments of size ~0.016, so a uniform 1e-2 cutoff
    # is not met at most points (see the decisions ledger).
    rng = np.random.default_rng(0)
    a = CoefficientSequence.power(1).array(4000)
    s = _doubling_sums(a, 4000, 200, rng)
    inc = np.abs(s[:, 4000] - s[:, 2000])
    want = float(np.sum(np.abs(a[2001:]) ** 2))
    assert np.mean(inc ** 2) == pytest.approx(want, rel=0.3)
    assert inc.max() < 6 * math.sqrt(want)
    # n^-1/2: second moments follow the harmonic numbers and keep growing (recorded only)
    b = CoefficientSequence.power(0.5).array(4000)
    s2 = _doubling_sums(b, 4000, 200, np.random.default_rng(1))
    m2k, m4k = np.mean(np.abs(s2[:, 2000]) ** 2), np.mean(np.abs(s2[:, 4000]) ** 2)
    print(f"n^-1/2 second moments: depth 2000 {m2k:.3f}, depth 4000 {m4k:.3f}")
