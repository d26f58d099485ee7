"""Double-precision numba kernels for boundary dynamics.

Points of the circle are handled as turns ``t`` in [0, 1), the point being
``exp(2*pi*i*t)``.  ``mono > 0`` flags the monomial ``z**mono`` (all zeros at
the origin), whose boundary map is multiplication of the turn.

Forward orbits computed here are pseudo-orbits: every step commits a rounding
error of a few ulp.  Because the boundary map is uniformly expanding, such a
pseudo-orbit stays within ``eps * K / (K - 1)`` of a true orbit at every level,
so sums evaluated along it are sums at a genuine boundary point.  Backward
steps (``pull_one``/``chain``) follow contracting inverse branches and are
stable.
"""
import math

import numpy as np
from numba import njit

TAU = 2.0 * math.pi


@njit(cache=True)
def unit(t):
    a = TAU * t
    return complex(math.cos(a), math.sin(a))


@njit(cache=True)
def turn_of(w):
    t = math.atan2(w.imag, w.real) / TAU
    if t < 0.0:
        t += 1.0
    if t >= 1.0:
        t -= 1.0
    return t


@njit(cache=True)
def fmap(zeros, mono, t):
    if mono > 0:
        return (t * mono) % 1.0
    x = unit(t)
    w = 1.0 + 0.0j
    for z in zeros:
        w *= (x - z) / (1.0 - z.conjugate() * x)
    return turn_of(w)


@njit(cache=True)
def dmod(zeros, t):
    """|f'| at the boundary point with turn t (sum of Poisson kernels)."""
    x = unit(t)
    s = 0.0
    for z in zeros:
        d = x - z
        s += (1.0 - (z.real * z.real + z.imag * z.imag)) / (d.real * d.real + d.imag * d.imag)
    return s


@njit(cache=True)
def _factor_turn(z, t):
    x = unit(t)
    w = (x - z) / (1.0 - z.conjugate() * x)
    return math.atan2(w.imag, w.real) / TAU


@njit(cache=True)
def lift(zeros, mono, t0, length):
    """Lifted image measure of the arc [t0, t0 + length], length >= 0.

    Each Moebius factor is a circle bijection, so its lifted increment over a
    piece short enough that the increment stays below 1/2 is recovered exactly
    by wrapping the angle difference.  Pieces are sized from the factor's
    maximal Poisson kernel.
    """
    if mono > 0:
        return mono * length
    whole = math.floor(length)
    frac = length - whole
    total = zeros.size * whole
    if frac == 0.0:
        return total
    for z in zeros:
        r = abs(z)
        pmax = (1.0 + r) / (1.0 - r)
        m = int(math.ceil(frac * pmax / 0.4))
        if m < 1:
            m = 1
        h = frac / m
        a = _factor_turn(z, t0)
        for i in range(1, m + 1):
            if i == m:
                b = _factor_turn(z, t0 + frac)
            else:
                b = _factor_turn(z, t0 + i * h)
            d = b - a
            d -= math.floor(d + 0.5)
            total += d
            a = b
    return total


@njit(cache=True)
def lift_signed(zeros, mono, t0, delta):
    if delta >= 0.0:
        return lift(zeros, mono, t0, delta)
    return -lift(zeros, mono, t0 + delta, -delta)


@njit(cache=True)
def pull_one(zeros, mono, kmin, kmax, g, delta):
    """Offset x such that the lift from g to g + x equals delta.

    This is the inverse branch of the boundary map through g.  Safeguarded
    Newton: the lift has slope in [kmin, kmax], which brackets the root.
    """
    if mono > 0:
        return delta / mono
    if delta == 0.0:
        return 0.0
    a = delta / kmax
    b = delta / kmin
    lo = min(a, b)
    hi = max(a, b)
    lo -= abs(lo) * 1e-7
    hi += abs(hi) * 1e-7
    x = delta / dmod(zeros, g)
    if x <= lo or x >= hi:
        x = 0.5 * (lo + hi)
    for _ in range(80):
        val = lift_signed(zeros, mono, g, x) - delta
        if val > 0.0:
            hi = x
        elif val < 0.0:
            lo = x
        else:
            return x
        step = val / dmod(zeros, g + x)
        xn = x - step
        if xn <= lo or xn >= hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-17 or hi - lo <= 1e-17:
            return xn
        x = xn
    return x


@njit(cache=True)
def chain(zeros, mono, kmin, kmax, guides, delta_top, out):
    """Pull an offset back through the levels whose reference turns are ``guides``.

    ``guides[j]`` is the reference orbit at level L0 + j; ``delta_top`` is the
    candidate's lifted offset from the reference at level L0 + len(guides).
    Writes the candidate's turns at levels L0 .. L0 + len - 1 into ``out`` and
    returns the offset remaining at level L0.
    """
    delta = delta_top
    for j in range(guides.size - 1, -1, -1):
        x = pull_one(zeros, mono, kmin, kmax, guides[j], delta)
        out[j] = (guides[j] + x) % 1.0
        delta = x
    return delta


@njit(cache=True)
def forward(zeros, mono, t, out):
    for j in range(out.size):
        t = fmap(zeros, mono, t)
        out[j] = t
    return t


@njit(cache=True)
def chart_sums(zeros, mono, kmin, kmax, guides, coef_win, base, deltas, coef_fwd, out):
    """Sums of a_n f^n over window + forward levels for a batch of candidates.

    Candidate i sits at turn ``base + deltas[i]`` at the chart depth; levels
    below come from ``chain``, levels above from forward iteration.
    ``coef_win`` covers the window levels and the chart depth (len(guides)+1),
    ``coef_fwd`` the forward levels.
    """
    W = guides.size
    buf = np.empty(W)
    for i in range(deltas.size):
        d = deltas[i]
        chain(zeros, mono, kmin, kmax, guides, d, buf)
        s = 0.0 + 0.0j
        for j in range(W):
            c = coef_win[j]
            if c != 0.0:
                s += c * unit(buf[j])
        t = (base + d) % 1.0
        if coef_win[W] != 0.0:
            s += coef_win[W] * unit(t)
        for j in range(coef_fwd.size):
            t = fmap(zeros, mono, t)
            c = coef_fwd[j]
            if c != 0.0:
                s += c * unit(t)
        out[i] = s


@njit(cache=True)
def log_derivative_window(zeros, mono, kmin, kmax, guides, deltas, out):
    """Sum over window levels of log|f'| along each candidate's backward chain."""
    W = guides.size
    buf = np.empty(W)
    for i in range(deltas.size):
        chain(zeros, mono, kmin, kmax, guides, deltas[i], buf)
        s = 0.0
        for j in range(W):
            s += math.log(dmod(zeros, buf[j]))
        out[i] = s


@njit(cache=True)
def _splitmix(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15))
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return z


SUM_BLOCK = 32


@njit(cache=True, fastmath=True)
def truncated_sums(zeros, mono, t0s, coefs, out):
    """sum_{n>=1} coefs[n] f^n(xi) for xi = exp(2 pi i t0s[i]), along double pseudo-orbits.

    Orbits are carried as unit complex numbers split into real and imaginary
    arrays, a block of samples at a time, so the inner loop vectorizes.
    Rounding acts as a pseudo-orbit perturbation of a few ulp, which the
    expanding map shadows by a true orbit; one Newton step per iterate keeps
    |w| = 1.
    """
    if mono == 2:
        _square_sums(t0s, coefs, out)
        return
    B = SUM_BLOCK
    zr = zeros.real.copy()
    zi = zeros.imag.copy()
    nz = zeros.size
    wr = np.empty(B)
    wi = np.empty(B)
    sr = np.empty(B)
    si = np.empty(B)
    for b0 in range(0, t0s.size, B):
        m = min(B, t0s.size - b0)
        for i in range(B):
            a = 2.0 * math.pi * t0s[b0 + min(i, m - 1)]
            wr[i] = math.cos(a)
            wi[i] = math.sin(a)
            sr[i] = 0.0
            si[i] = 0.0
        for n in range(1, coefs.size):
            cr = coefs[n].real
            ci = coefs[n].imag
            for i in range(B):
                x = wr[i]
                y = wi[i]
                if mono > 0:
                    u, v = x, y
                    for _ in range(mono - 1):
                        u, v = u * x - v * y, u * y + v * x
                else:
                    u, v = 1.0, 0.0
                    for k in range(nz):
                        # (w - z) / (1 - conj(z) w)
                        pr, pi_ = x - zr[k], y - zi[k]
                        qr = 1.0 - (zr[k] * x + zi[k] * y)
                        qi = -(zr[k] * y - zi[k] * x)
                        den = qr * qr + qi * qi
                        fr = (pr * qr + pi_ * qi) / den
                        fi = (pi_ * qr - pr * qi) / den
                        u, v = u * fr - v * fi, u * fi + v * fr
                r = 1.5 - 0.5 * (u * u + v * v)
                u *= r
                v *= r
                wr[i] = u
                wi[i] = v
                sr[i] += cr * u - ci * v
                si[i] += cr * v + ci * u
        for i in range(m):
            out[b0 + i] = complex(sr[i], si[i])


@njit(cache=True, fastmath=True)
def _square_sums(t0s, coefs, out):
    # z^2 specialization of truncated_sums; branch-free so it vectorizes
    B = 2 * SUM_BLOCK
    wr = np.empty(B)
    wi = np.empty(B)
    sr = np.empty(B)
    si = np.empty(B)
    for b0 in range(0, t0s.size, B):
        m = min(B, t0s.size - b0)
        for i in range(B):
            a = 2.0 * math.pi * t0s[b0 + min(i, m - 1)]
            wr[i] = math.cos(a)
            wi[i] = math.sin(a)
            sr[i] = 0.0
            si[i] = 0.0
        for n in range(1, coefs.size):
            cr = coefs[n].real
            ci = coefs[n].imag
            for i in range(B):
                x = wr[i]
                y = wi[i]
                u = x * x - y * y
                v = 2.0 * x * y
                r = 1.5 - 0.5 * (u * u + v * v)
                u *= r
                v *= r
                wr[i] = u
                wi[i] = v
                sr[i] += cr * u - ci * v
                si[i] += cr * v + ci * u
        for i in range(m):
            out[b0 + i] = complex(sr[i], si[i])


@njit(cache=True)
def _simpson(zeros, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = dmod(zeros, m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


@njit(cache=True)
def quad_lift(zeros, a, b, tol, max_depth):
    """Adaptive Simpson integral of |f'| over the turn interval [a, b].

    Richardson-corrected panel sums; returns (value, converged).  A panel that
    hits ``max_depth`` without meeting its share of the tolerance marks the
    result as not converged.
    """
    if b <= a:
        return 0.0, True
    fa = dmod(zeros, a)
    fb = dmod(zeros, b)
    m, fm, whole = _simpson(zeros, a, fa, b, fb)
    # explicit stack: a, fa, m, fm, b, fb, whole, tol, depth
    cap = 4 * max_depth + 8
    st = np.empty((cap, 9))
    st[0] = (a, fa, m, fm, b, fb, whole, tol, 0.0)
    top = 1
    total = 0.0
    ok = True
    while top > 0:
        top -= 1
        a, fa, m, fm, b, fb, whole, eps, depth = st[top]
        lm, flm, left = _simpson(zeros, a, fa, m, fm)
        rm, frm, right = _simpson(zeros, m, fm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps or depth >= max_depth or b - a < 1e-300:
            if abs(delta) > 15.0 * eps:
                ok = False
            total += left + right + delta / 15.0
        else:
            if top + 2 > cap:
                return total, False
            st[top] = (a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1)
            st[top + 1] = (m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1)
            top += 2
    return total, ok


_GL_X = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GL_W = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])


@njit(cache=True)
def fwd_offset(zeros, mono, pmax, t, delta):
    """Lifted offset at the next level of the point t + delta (offset from t).

    Tiny offsets use 3-point Gauss-Legendre on |f'|, which keeps full relative
    accuracy; larger ones use the closed-form lift.
    """
    if mono > 0:
        return mono * delta
    if abs(delta) * pmax < 1e-3:
        h = 0.5 * delta
        s = 0.0
        for i in range(3):
            s += _GL_W[i] * dmod(zeros, t + h * (1.0 + _GL_X[i]))
        return h * s
    return lift_signed(zeros, mono, t, delta)


@njit(cache=True)
def eval_batch(zeros, mono, pmax, ref, dB, coef, out_sum, out_dN):
    """Partial sums for candidates given as offsets from ref[0] at the base level.

    ``ref`` holds the reference orbit at levels B..N; ``coef[j]`` multiplies
    level B + 1 + j, and ``coef`` may reach past N, where candidates continue
    by forward iteration.  Writes sum over levels B+1..B+len(coef) and the
    offset reached at level N.
    """
    W = ref.size - 1
    H = coef.size
    for i in range(dB.size):
        d = dB[i]
        s = 0.0 + 0.0j
        for j in range(min(W, H)):
            d = fwd_offset(zeros, mono, pmax, ref[j], d)
            c = coef[j]
            if c != 0.0:
                s += c * unit(ref[j + 1] + d)
        out_dN[i] = d
        if H > W:
            t = (ref[W] + d) % 1.0
            for j in range(W, H):
                t = fmap(zeros, mono, t)
                c = coef[j]
                if c != 0.0:
                    s += c * unit(t)
        out_sum[i] = s


@njit(cache=True)
def cand_orbit(zeros, mono, pmax, ref, d0, H, out_turn, out_off):
    """Turns of one candidate at levels B..B+H (offsets kept up to level N)."""
    W = ref.size - 1
    d = d0
    out_turn[0] = (ref[0] + d) % 1.0
    out_off[0] = d
    for j in range(min(W, H)):
        d = fwd_offset(zeros, mono, pmax, ref[j], d)
        out_off[j + 1] = d
        out_turn[j + 1] = (ref[j + 1] + d) % 1.0
    t = out_turn[min(W, H)]
    for j in range(W, H):
        t = fmap(zeros, mono, t)
        out_turn[j + 1] = t
        out_off[j + 1] = 0.0


@njit(cache=True)
def dmod_array(zeros, turns, out):
    for i in range(turns.size):
        out[i] = dmod(zeros, turns[i])


@njit(cache=True)
def chain_offsets(zeros, mono, kmin, kmax, guides, delta_top, out):
    """Like ``chain`` but stores the lifted offsets from the guides at each level."""
    delta = delta_top
    for j in range(guides.size - 1, -1, -1):
        delta = pull_one(zeros, mono, kmin, kmax, guides[j], delta)
        out[j] = delta
    return delta


@njit(cache=True)
def golden_dmod(zeros, a, b, sign, tol):
    """Golden-section minimum of sign * |f'| on the turn interval [a, b]."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * dmod(zeros, c), sign * dmod(zeros, d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sign * dmod(zeros, c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sign * dmod(zeros, d)
    x = 0.5 * (a + b)
    return x, sign * dmod(zeros, x)
