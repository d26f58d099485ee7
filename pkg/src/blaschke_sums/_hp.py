"""Extended-precision boundary arithmetic on top of gmpy2.

Boundary points are integer numerators of a turn over ``2**bits``.  Forward
orbits are iterated as unit complex numbers (no arctangents needed until the
end); inverse branches are solved by complex Newton steps with a precision
ramp.
"""
import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr, mpz

GUARD = 32


def _ctx(prec):
    return gmpy2.context(gmpy2.get_context(), precision=int(prec))


def hp_zeros(zeros):
    return [mpc(complex(z)) for z in zeros]


def unit_from_turn(turn, prec):
    """exp(2 pi i turn) for an mpfr/int-ratio turn, at the active precision."""
    a = 2 * gmpy2.const_pi() * turn
    s, c = gmpy2.sin_cos(a)
    return mpc(c, s)


def moebius_product(hz, w):
    out = mpc(1)
    for z in hz:
        out = out * (w - z) / (1 - z.conjugate() * w)
    return out


def dmod(hz, w):
    s = mpfr(0)
    for z in hz:
        s += (1 - gmpy2.norm(z)) / gmpy2.norm(w - z)
    return s


def turn_of(w):
    t = gmpy2.atan2(w.imag, w.real) / (2 * gmpy2.const_pi())
    if t < 0:
        t += 1
    return t


def round_turn(t, bits):
    """Nearest numerator over 2**bits, reduced mod 2**bits."""
    n = int(mpz(gmpy2.rint(t * (mpz(1) << bits))))
    return n % (1 << bits)


def map_numerator(zeros, mono, num, bits, n):
    """Numerator of f^n(xi) for xi = num / 2**bits, computed at bits + GUARD."""
    mod = 1 << bits
    if mono > 0:
        return (num * pow(mono, n, mod)) % mod
    if n == 0:
        return num % mod
    with _ctx(bits + GUARD):
        hz = hp_zeros(zeros)
        w = unit_from_turn(mpfr(num) / mpfr(mod), bits + GUARD)
        for _ in range(n):
            w = moebius_product(hz, w)
            w = w / abs(w)
        return round_turn(turn_of(w), bits)


def orbit_units(zeros, mono, num, bits, n):
    """Double-precision values of f^k(xi), k = 0..n, from an exact orbit."""
    mod = 1 << bits
    out = []
    if mono > 0:
        x = num % mod
        for _ in range(n + 1):
            out.append(_unit_double(Fraction(x, mod)))
            x = (x * mono) % mod
        return out
    with _ctx(bits + GUARD):
        hz = hp_zeros(zeros)
        w = unit_from_turn(mpfr(num) / mpfr(mod), bits + GUARD)
        out.append(complex(w))
        for _ in range(n):
            w = moebius_product(hz, w)
            w = w / abs(w)
            out.append(complex(w))
    return out


def _unit_double(fr):
    # reduce the exact rational before rounding to double
    a = 2.0 * math.pi * float(fr - math.floor(fr))
    return complex(math.cos(a), math.sin(a))


def _f_df(hz, u):
    fu = mpc(1)
    acc = mpc(0)
    for z in hz:
        den = 1 - z.conjugate() * u
        num = u - z
        fu = fu * num / den
        acc += (1 - gmpy2.norm(z)) / (num * den)
    return fu, fu * acc


def pullback(zeros, mono, orbit, bits, accuracy_bits):
    """Exact orbit shadowing a double pseudo-orbit ``orbit[0..M]``.

    Starts from ``orbit[M]`` and solves each inverse branch by complex Newton
    from the pseudo-orbit value, doubling the working precision per step up
    to what the expansion from that level to M requires.  Returns the level-0
    numerator over ``2**bits``.
    """
    M = len(orbit) - 1
    mod = 1 << bits
    if mono > 0:
        x = Fraction(float(orbit[M]))
        for j in range(M - 1, -1, -1):
            k = round(mono * float(orbit[j]) - float(x))
            x = (x + k) / mono
        x -= math.floor(x)
        return int(round(x * mod)) % mod
    hz = hp_zeros(zeros)
    # expansion (bits) accumulated from level j up to M along the orbit
    logs = [0.0] * (M + 1)
    for j in range(M - 1, -1, -1):
        w = complex(math.cos(2 * math.pi * orbit[j]), math.sin(2 * math.pi * orbit[j]))
        dm = sum((1 - abs(z) ** 2) / abs(w - z) ** 2 for z in zeros)
        logs[j] = logs[j + 1] + math.log2(dm)
    top = int(logs[0]) + accuracy_bits + 64
    with _ctx(top + GUARD):
        Y = unit_from_turn(mpfr(float(orbit[M])), top)
    for j in range(M - 1, -1, -1):
        need = int(logs[j]) + accuracy_bits + 64
        a = 2 * math.pi * float(orbit[j])
        u = mpc(complex(math.cos(a), math.sin(a)))
        cur = 40
        extra = 2
        for _ in range(200):
            cur = min(2 * cur, need)
            with _ctx(cur + GUARD):
                fu, dfu = _f_df(hz, u)
                step = (fu - Y) / dfu
                u = u - step
                u = u / abs(u)
            if cur == need:
                extra -= 1
                if extra == 0:
                    break
        else:
            raise ArithmeticError("inverse branch did not converge")
        Y = u
    with _ctx(bits + GUARD):
        return round_turn(turn_of(mpc(Y)), bits)
