"""Primes, square-free k-almost primes and the related counting functions."""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class FactoredInteger:
    n: int
    prime_factors: tuple  # ((p, e), ...) sorted by p

    def __post_init__(self):
        if math.prod(p**e for p, e in self.prime_factors) != self.n:
            raise ValueError("factorization does not multiply out")

    @classmethod
    def from_primes(cls, primes) -> "FactoredInteger":
        ps = tuple(sorted(primes))
        return cls(math.prod(ps), tuple((p, 1) for p in ps))

    @property
    def primes(self) -> tuple:
        return tuple(p for p, _ in self.prime_factors)

    @property
    def omega(self) -> int:
        return len(self.prime_factors)

    @property
    def squarefree(self) -> bool:
        return all(e == 1 for _, e in self.prime_factors)

    @property
    def mu(self) -> int:
        if not self.squarefree:
            return 0
        return -1 if self.omega % 2 else 1

    @property
    def largest_prime(self) -> int:
        return self.prime_factors[-1][0] if self.prime_factors else 1


def _check_cap(X: int, cap: int):
    if X > cap:
        raise ValueError(f"X={X} exceeds the configured sieve cap {cap}")


@lru_cache(maxsize=8)
def _prime_array(X: int) -> np.ndarray:
    if X < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(X + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(X) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    out = np.flatnonzero(flags).astype(np.int64)
    out.setflags(write=False)
    return out


def primes_up_to(X: int, cap: int = DEFAULT_CAP) -> list[int]:
    if X < 1:
        raise ValueError("X must be positive")
    _check_cap(X, cap)
    return _prime_array(int(X)).tolist()


def prime_pi(X) -> int:
    """pi(X) for real X >= 0."""
    n = math.floor(X)
    if n < 2:
        return 0
    return len(_prime_array(n))


def primorial(k: int) -> int:
    """L_k, the product of the first k-1 primes."""
    if k < 2:
        raise ValueError("k must be at least 2")
    out, found, p = 1, 0, 2
    while found < k - 1:
        if all(p % q for q in range(2, math.isqrt(p) + 1)):
            out *= p
            found += 1
        p += 1
    return out


@lru_cache(maxsize=4)
def spf_table(X: int) -> np.ndarray:
    """Smallest prime factor for 0..X."""
    spf = np.zeros(X + 1, dtype=np.int64)
    for p in _prime_array(X).tolist():
        if p * p > X:
            break
        block = spf[p * p::p]
        block[block == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf.setflags(write=False)
    return spf


def factor(n: int, spf: np.ndarray | None = None) -> FactoredInteger:
    if n < 1:
        raise ValueError("n must be positive")
    facs = []
    if spf is not None and n < len(spf):
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            facs.append((p, e))
        return FactoredInteger(math.prod(p**e for p, e in facs), tuple(facs))
    m, d = n, 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            facs.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        facs.append((m, 1))
    return FactoredInteger(n, tuple(facs))


def largest_prime_factor(n: int) -> int:
    return factor(n).largest_prime


def iter_squarefree_factored(X: int, k: int, y: int | None = None, primes=None):
    """Yield prime tuples p1 < ... < pk with product <= X and pk <= y, in lexicographic order."""
    if k < 1 or X < 1:
        return
    y = X if y is None else min(y, X)
    ps = primes if primes is not None else primes_up_to(max(2, min(X, y)))
    ps = ps[:bisect.bisect_right(ps, y)]

    def rec(start, remaining, bound, prefix):
        if remaining == 1:
            hi = bisect.bisect_right(ps, bound)
            for i in range(start, hi):
                yield prefix + (ps[i],)
            return
        for i in range(start, len(ps)):
            p = ps[i]
            # need p * (remaining-1 larger primes) <= bound; p^remaining is a cheap lower bound
            if p ** remaining > bound:
                break
            yield from rec(i + 1, remaining - 1, bound // p, prefix + (p,))

    yield from rec(0, k, X, ())


def squarefree_k_almost(X: int, k: int, cap: int = DEFAULT_CAP) -> list[int]:
    _check_cap(X, cap)
    return sorted(math.prod(t) for t in iter_squarefree_factored(X, k))


def squarefree_k_almost_smooth(X: int, k: int, y: int, cap: int = DEFAULT_CAP) -> list[int]:
    _check_cap(X, cap)
    return sorted(math.prod(t) for t in iter_squarefree_factored(X, k, y))


def pi_k(X: int, k: int) -> int:
    return sum(1 for _ in iter_squarefree_factored(X, k))


def squarefree_count(X: int) -> int:
    """#{n <= X : mu(n)^2 = 1} via sum of mu(d) floor(X/d^2)."""
    total = 0
    r = math.isqrt(X)
    spf = spf_table(max(r, 1))
    for d in range(1, r + 1):
        mu = factor(d, spf).mu
        if mu:
            total += mu * (X // (d * d))
    return total


ZETA2 = math.pi**2 / 6


def squarefree_density_interval(X: int) -> tuple[float, float]:
    s = 3 * math.sqrt(X)
    return X / ZETA2 - s, X / ZETA2 + s


def hardy_ramanujan_bound(X: float, k: int, C1: float, C2: float) -> float:
    if X < 3:
        raise ValueError("X must be at least 3")
    if C1 <= 0 or C2 <= 0:
        raise ValueError("constants must be positive")
    ll = math.log(math.log(X))
    return C1 * X * (ll + C2) ** (k - 1) / (math.factorial(k - 1) * math.log(X))


def pi_k_uniform_bound(X: float, C: float) -> float:
    """C (X / log X) e^{-sqrt(log X)}: the large-k bound used for the last Sigma part."""
    lx = math.log(X)
    return C * X / lx * math.exp(-math.sqrt(lx))


def pi_k_table_csv(X: int, kmax: int, C1: float = 1.0, C2: float = 1.0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["X", "k", "pi_k", "hardy_ramanujan_bound"])
    for k in range(1, kmax + 1):
        w.writerow([X, k, pi_k(X, k), f"{hardy_ramanujan_bound(X, k, C1, C2):.6f}"])
    return buf.getvalue()


def enumeration_csv(X: int, k: int, y: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "P+(n)", "omega(n)"])
    rows = sorted((math.prod(t), t[-1], len(t)) for t in iter_squarefree_factored(X, k, y))
    w.writerows(rows)
    return buf.getvalue()
