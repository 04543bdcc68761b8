"""Small integer helpers: inverses, Jacobi symbols, factorization."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


class NoInverseError(ValueError):
    pass


def mod_inverse(a: int, n: int) -> int:
    """Inverse of a modulo n, in [0, n)."""
    if n < 1:
        raise ValueError("modulus must be positive")
    if n == 1:
        return 0
    if math.gcd(a, n) != 1:
        raise NoInverseError(f"{a} has no inverse mod {n}")
    return pow(a, -1, n)


def batch_inverse(values, n: int) -> list[int]:
    """Montgomery batched inversion: prefix products plus a single inverse."""
    vals = [v % n for v in values]
    if not vals:
        return []
    prefix = [1] * len(vals)
    acc = 1
    for i, v in enumerate(vals):
        prefix[i] = acc
        acc = acc * v % n
    inv = mod_inverse(acc, n)
    out = [0] * len(vals)
    for i in range(len(vals) - 1, -1, -1):
        out[i] = inv * prefix[i] % n
        inv = inv * vals[i] % n
    return out


def jacobi_symbol(m: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs a positive odd lower argument")
    m %= n
    result = 1
    while m:
        while m % 2 == 0:
            m //= 2
            if n % 8 in (3, 5):
                result = -result
        m, n = n, m
        if m % 4 == 3 and n % 4 == 3:
            result = -result
        m %= n
    return result if n == 1 else 0


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial division; fine for the sizes handled here."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r -= r // p
    return r


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


@lru_cache(maxsize=64)
def unit_table(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units of Z/c and their inverses (int64 arrays).

    For composite c the units come in increasing order; for prime c they come
    in primitive-root order g^0, g^1, ...  Sums over units never depend on order.
    """
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    if is_prime(c) and c < 1 << 31:
        units, inv = _prime_units(c)
    else:
        xs = np.arange(c, dtype=np.int64)
        units = xs[np.gcd(xs, c) == 1]
        inv = np.array(batch_inverse(units.tolist(), c), dtype=np.int64)
    units.setflags(write=False)
    inv.setflags(write=False)
    return units, inv


def powmod_array(base: np.ndarray, e: int, n: int) -> np.ndarray:
    """Elementwise base**e mod n; n must stay below 2**31 so products fit in int64."""
    if n >= 1 << 31:
        return np.array([pow(int(b), e, n) for b in base], dtype=object)
    result = np.ones_like(base, dtype=np.int64)
    b = np.asarray(base, dtype=np.int64) % n
    while e:
        if e & 1:
            result = result * b % n
        b = b * b % n
        e >>= 1
    return result


def legendre_array(x: np.ndarray, p: int) -> np.ndarray:
    """(x/p) for every entry, via Euler's criterion. p an odd prime."""
    r = powmod_array(np.asarray(x, dtype=np.int64) % p, (p - 1) // 2, p)
    out = np.where(r == 1, 1, np.where(r == 0, 0, -1))
    return out.astype(np.int64)


def jacobi_array(x: np.ndarray, n: int) -> np.ndarray:
    """(x/n) for an odd n, as a product of Legendre symbols over its factors."""
    out = np.ones(len(x), dtype=np.int64)
    for p, e in factorize(n):
        if e % 2:
            out *= legendre_array(x, p)
        else:
            out *= (np.asarray(x) % p != 0).astype(np.int64)
    return out


def primitive_root(p: int) -> int:
    if p == 2:
        return 1
    qs = [q for q, _ in factorize(p - 1)]
    g = 2
    while any(pow(g, (p - 1) // q, p) == 1 for q in qs):
        g += 1
    return g


def _prime_units(p: int) -> tuple[np.ndarray, np.ndarray]:
    """(g^k, g^-k) for k = 0..p-2, built blockwise so the work is vectorized."""
    n = p - 1
    g = primitive_root(p)
    block = max(1, math.isqrt(n))
    small = np.empty(block, dtype=np.int64)
    acc = 1
    for j in range(block):
        small[j] = acc
        acc = acc * g % p
    step = acc  # g^block
    nrows = -(-n // block)
    heads = np.empty(nrows, dtype=np.int64)
    acc = 1
    for i in range(nrows):
        heads[i] = acc
        acc = acc * step % p
    pw = (heads[:, None] * small[None, :] % p).ravel()[:n]
    inv = np.empty(n, dtype=np.int64)
    inv[0] = pw[0]
    inv[1:] = pw[:0:-1]
    return pw, inv
