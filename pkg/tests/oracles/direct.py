"""Slow, independent reference implementations used to freeze expected values.

Nothing here imports twistsum: sums are added term by term in mpmath, inverses
come from pow(x, -1, n), primes from trial division, and cyclotomic
polynomials from schoolbook long division.
"""
from __future__ import annotations

import math

import mpmath

mpmath.mp.prec = 120


def e(num, den):
    return mpmath.expjpi(mpmath.mpf(2 * num) / den)


def units(n):
    return [x for x in range(n) if math.gcd(x, n) == 1] if n > 1 else [0]


def kloosterman(a, b, c):
    if c == 1:
        return mpmath.mpc(1)
    return mpmath.fsum(e(a * x + b * pow(x, -1, c), c) for x in units(c))


def birch(a, b, c, full=False):
    xs = range(c) if full else units(c)
    return mpmath.fsum(e(a * x**3 + b * x, c) for x in xs)


def legendre(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def jacobi(m, n):
    out = 1
    for p, k in factor(n):
        out *= legendre(m, p) ** k
    return out


def salie(a, b, c):
    if c == 1:
        return mpmath.mpc(1)
    return mpmath.fsum(jacobi(x, c) * e(a * x + b * pow(x, -1, c), c) for x in units(c))


def poly_sum(g, h, c, full=True, h_inverse=False, twist=False):
    def ev(coeffs, x):
        return sum(co * x**i for i, co in enumerate(coeffs))

    xs = range(c) if full else units(c)
    tot = []
    for x in xs:
        hx = ev(h, pow(x, -1, c)) if h_inverse else ev(h, x)
        w = jacobi(x, c) if twist else 1
        tot.append(w * e(ev(g, x) + hx, c))
    return mpmath.fsum(tot)


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def primes(X):
    return [n for n in range(2, X + 1) if is_prime(n)]


def factor(n):
    out, d = [], 2
    while d * d <= n:
        k = 0
        while n % d == 0:
            n //= d
            k += 1
        if k:
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def cyclotomic(m):
    """Coefficients of Phi_m, constant term first, by dividing x^m - 1 by Phi_d, d | m, d < m."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _divide(num, cyclotomic(d))
    return num


def _divide(num, den):
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        q[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    assert not any(num), "inexact division"
    return q
