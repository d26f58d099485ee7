"""Products, boundary points and the derivative identity.

Oracle tags: [TRIVIAL] direct arithmetic, [DERIVED] independent oracle
(mpmath / integer arithmetic), [PAPER] values checked against the source.
"""
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blaschke_sums import (BlaschkeProduct, BoundaryPoint, derivative_modulus_boundary,
                           estimate_decay_rate, evaluate, evaluate_boundary, expansion_constants,
                           iterate, pseudohyperbolic, required_precision)
from blaschke_sums.core import derivative, parse_fraction
from blaschke_sums.errors import (InvalidInputError, NotExpandingError, PrecisionBudgetExceeded)

zero_st = st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                    st.floats(0, 0.9), st.floats(0, 2 * math.pi))
product_st = st.lists(zero_st, min_size=1, max_size=4).map(lambda zs: BlaschkeProduct([0j] + zs))


# evaluate --------------------------------------------------------------------

def test_evaluate_examples():
    f = BlaschkeProduct([0, 0.5])
    assert evaluate(f, 0) == 0                                # [TRIVIAL]
    assert evaluate(f, 1) == pytest.approx(1, abs=1e-15)      # [TRIVIAL] 0.5/0.5
    assert evaluate(BlaschkeProduct([0, 0]), 0.3j) == pytest.approx(-0.09)  # [TRIVIAL]


def test_rejects_zero_outside_disk():
    with pytest.raises(InvalidInputError):
        BlaschkeProduct([0, 1.0])
    with pytest.raises(InvalidInputError):
        BlaschkeProduct([])
    with pytest.raises(InvalidInputError):
        evaluate(BlaschkeProduct([0]), 1.5)


def test_solver_contract():
    with pytest.raises(InvalidInputError):
        BlaschkeProduct([0.5, 0.2]).require_solver_contract()
    with pytest.raises(NotExpandingError):
        BlaschkeProduct([0]).require_solver_contract()


@given(product_st, st.floats(0, 1, exclude_max=True))
def test_modulus_one_on_circle(f, t):
    assert abs(evaluate(f, np.exp(2j * np.pi * t))) == pytest.approx(1, abs=1e-12)


@given(product_st, st.floats(0, 0.999), st.floats(0, 2 * math.pi))
def test_schwarz_monotone(f, r, th):
    # f(0) = 0: interior orbits never grow
    w = r * complex(math.cos(th), math.sin(th))
    for _ in range(30):
        nxt = evaluate(f, w)
        assert abs(nxt) <= abs(w) * (1 + 1e-12)
        w = nxt


# boundary points ----------------------------------------------------------------

def test_evaluate_boundary_examples():
    z2 = BlaschkeProduct([0, 0])
    img = evaluate_boundary(z2, BoundaryPoint.from_turn(Fraction(1, 10), 80))
    assert abs(img.turn - Fraction(2, 10)) <= Fraction(1, 2 ** 79)   # [TRIVIAL] doubling
    assert evaluate_boundary(z2, BoundaryPoint.from_turn(0.75, 80)).turn == Fraction(1, 2)
    f = BlaschkeProduct([0, 0.5])
    assert evaluate_boundary(f, BoundaryPoint(0, 128)).turn == 0    # [TRIVIAL] f(1) = 1


@given(product_st, st.floats(0, 1, exclude_max=True))
def test_boundary_consistency(f, t):
    xi = BoundaryPoint.from_turn(t, 200)
    img = evaluate_boundary(f, xi)
    w = evaluate(f, xi.to_complex())
    assert abs(img.to_complex() - w) < 1e-12


@given(st.integers(0, 2 ** 80 - 1), st.integers(0, 60))
def test_doubling_oracle_exact(num, n):
    # [DERIVED] integer arithmetic: f^n(xi) = 2^n turn mod 1 exactly on the grid
    z2 = BlaschkeProduct([0, 0])
    xi = BoundaryPoint(num, 80)
    assert iterate(z2, xi, n).numerator == (num << n) % (1 << 80)


def test_iterate_examples():
    z2 = BlaschkeProduct([0, 0])
    t = BoundaryPoint.from_turn(Fraction(3, 7), 100)
    assert iterate(z2, t, 10).numerator == (t.numerator * 1024) % (1 << 100)   # [TRIVIAL]
    assert iterate(z2, 0.5, 3) == pytest.approx(0.00390625)                   # [TRIVIAL]
    assert iterate(BlaschkeProduct([0, 0.3, 0.2j]), 0, 17) == 0               # [TRIVIAL]


def test_iterate_general_matches_mpmath(z2g):
    # [DERIVED] mpmath at 400 digits as an independent orbit oracle
    xi = BoundaryPoint.from_turn(Fraction(1, 3), 400)
    out = iterate(z2g, xi, 20)
    with mpmath.workdps(140):
        w = mpmath.expjpi(2 * mpmath.mpf(xi.numerator) / mpmath.mpf(2) ** 400)
        for _ in range(20):
            w = w * w * (w - mpmath.mpf("0.5")) / (1 - mpmath.mpf("0.5") * w)
        t = mpmath.arg(w) / (2 * mpmath.pi) % 1
        got = mpmath.mpf(out.numerator) / mpmath.mpf(2) ** 400
        assert abs(got - t) < mpmath.mpf(10) ** -30


def test_iterate_precision_guard(z2g):
    with pytest.raises(PrecisionBudgetExceeded):
        iterate(z2g, BoundaryPoint.from_turn(0.1, 64), 30)


@given(st.integers(0, 2 ** 100 - 1))
def test_decimal_roundtrip(num):
    xi = BoundaryPoint(num, 100)
    assert BoundaryPoint.from_json(xi.to_json()) == xi


def test_long_decimal_parses():
    xi = BoundaryPoint((1 << 20000) // 3, 20001)
    assert BoundaryPoint.from_json(xi.to_json()) == xi
    assert parse_fraction("-0.25") == Fraction(-1, 4)
    assert parse_fraction("3/8") == Fraction(3, 8)


# derivative identity -------------------------------------------------------------

def test_derivative_modulus_examples():
    assert derivative_modulus_boundary(BlaschkeProduct([0, 0]), 0.37) == pytest.approx(2)
    f = BlaschkeProduct([0, 0.5])
    assert derivative_modulus_boundary(f, 0.5) == pytest.approx(4 / 3)    # [TRIVIAL]
    assert derivative_modulus_boundary(f, 0.0) == pytest.approx(4)        # [TRIVIAL]


@given(product_st, st.floats(0, 1, exclude_max=True))
def test_poisson_identity(f, t):
    # [DERIVED] product-rule derivative as the independent side
    xi = np.exp(2j * np.pi * t)
    lhs = abs(derivative(f, xi))
    rhs = derivative_modulus_boundary(f, t)
    assert abs(lhs - rhs) <= 1e-10 * rhs


def test_derivative_against_mpmath_diff():
    # [DERIVED] numerical differentiation of the boundary map in mpmath
    zs = [0, 0.4 + 0.3j, -0.6j]
    f = BlaschkeProduct(zs)
    for t in (0.05, 0.41, 0.77):
        def F(x):
            z = mpmath.expjpi(2 * x)
            out = mpmath.mpc(1)
            for a in zs:
                out *= (z - a) / (1 - mpmath.conj(a) * z)
            return out
        with mpmath.workdps(40):
            d = abs(mpmath.diff(F, t)) / (2 * mpmath.pi)
        assert float(d) == pytest.approx(derivative_modulus_boundary(f, t), rel=1e-12)


# expansion constants -------------------------------------------------------------

def test_expansion_constants_examples(z2, z2g):
    ec = expansion_constants(z2)
    assert ec.k_min == pytest.approx(2) and ec.k_max == pytest.approx(2)   # [TRIVIAL]
    ec = expansion_constants(z2g)
    # [DERIVED] dense-grid oracle: 2 + P(0.5, xi) is extremal at xi = -1 and xi = 1
    t = np.linspace(0, 1, 200001)
    dense = derivative_modulus_boundary(z2g, t)
    assert ec.k_min == pytest.approx(7 / 3, abs=1e-10)
    assert ec.k_max == pytest.approx(5, abs=1e-10)
    assert dense.min() >= ec.k_min - 1e-9 and dense.max() <= ec.k_max + 1e-9


@given(product_st)
def test_expanding_when_fixing_origin(f):
    if f.degree >= 2:
        assert expansion_constants(f).k_min > 1


def test_rotation_not_expanding():
    with pytest.raises(NotExpandingError):
        expansion_constants(BlaschkeProduct([0]))
    with pytest.raises(InvalidInputError):
        expansion_constants(BlaschkeProduct([0, 0]), grid_size=4)


def test_required_precision_examples(z2, z2g):
    assert required_precision(z2, 100, 53) == 217     # [TRIVIAL]
    assert required_precision(z2, 0, 53) == 117       # [TRIVIAL]
    assert required_precision(z2g, 50, 53) == 234     # [DERIVED] ceil(50 log2 5) + 117


# pseudohyperbolic and decay --------------------------------------------------------

def test_pseudohyperbolic_examples():
    assert pseudohyperbolic(0, 0.3 + 0.4j) == pytest.approx(0.5)
    assert pseudohyperbolic(0.2j, 0.2j) == 0
    assert pseudohyperbolic(0.5, -0.5) == pytest.approx(0.8)


@given(zero_st, zero_st)
def test_pseudohyperbolic_symmetric(z, w):
    assert pseudohyperbolic(z, w) == pytest.approx(pseudohyperbolic(w, z), abs=1e-14)
    assert 0 <= pseudohyperbolic(z, w) < 1


def test_decay_rate(z2):
    assert estimate_decay_rate(z2, [0.5]) <= 0.5
    # the fixed point 0 is excluded from the fit
    assert estimate_decay_rate(z2, [0.0, 0.5]) <= 0.5
    a = estimate_decay_rate(BlaschkeProduct([0, 0.5]), [0.9])
    assert 0 < a < 1
    with pytest.raises(InvalidInputError):
        estimate_decay_rate(z2, [1.2])
