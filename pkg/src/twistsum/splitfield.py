"""Pure tensors in Q(zeta_q1) (x) ... (x) Q(zeta_qr) for distinct primes q_i.

For square-free n the field Q(zeta_n) is the tensor product of the prime
cyclotomic fields, so an element that factors over primes (as every
Kloosterman sum at square-free modulus does) can be stored as a rational
scalar times one normalized vector per prime.  Two nonzero pure tensors are
equal iff the scalars agree and the normalized factors agree axis by axis.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

from .arith import is_prime
from .cyclotomic import CycElem, _absmax, _as_array, reduce_group_ring

_SAFE = 1 << 62


def _normalize_axis(vec: np.ndarray):
    """Split vec into (integer content with sign, primitive vector with positive lead)."""
    nz = np.flatnonzero(vec)
    if len(nz) == 0:
        return 0, None
    if vec.dtype == object:
        g = reduce(math.gcd, (int(x) for x in vec[nz]))
    else:
        g = int(np.gcd.reduce(np.abs(vec[nz])))
    if int(vec[nz[0]]) < 0:
        g = -g
    prim = vec // g
    return g, _as_array(prim)


class SplitElem:
    __slots__ = ("scalar", "axes")

    def __init__(self, scalar=1, axes: dict | None = None):
        self.scalar = Fraction(scalar)
        self.axes = {} if axes is None or self.scalar == 0 else dict(axes)

    # constructors -------------------------------------------------------------
    @classmethod
    def from_prime_vector(cls, q: int, vec, scalar=1) -> "SplitElem":
        """scalar * (sum vec[i] z_q^i) for reduced integer coordinates of length q-1."""
        v = _as_array(vec)
        if q == 2:
            return cls(Fraction(scalar) * int(v[0]))
        g, prim = _normalize_axis(v)
        if g == 0:
            return cls(0)
        if len(prim) == 1 or not prim[1:].any():
            return cls(Fraction(scalar) * g * int(prim[0]))
        return cls(Fraction(scalar) * g, {q: prim})

    @classmethod
    def from_histogram(cls, q: int, hist, scalar=1) -> "SplitElem":
        """Element sum_j hist[j] z_q^j at prime q."""
        h = _as_array(hist)
        if q == 2:
            return cls(Fraction(scalar) * int(h[0] - h[1]))
        return cls.from_prime_vector(q, h[:q - 1] - h[q - 1], scalar)

    @classmethod
    def from_cycelem(cls, c: CycElem) -> "SplitElem":
        m = c.conductor
        nums = list(c.numerators)
        den = c.denominator
        if m in (1, 2):
            return cls(Fraction(nums[0], den))
        if is_prime(m):
            return cls.from_prime_vector(m, nums, Fraction(1, den))
        if m % 2 == 0 and is_prime(m // 2) and m // 2 > 2:
            p = m // 2
            hist = np.zeros(p, dtype=object)
            half = (p + 1) // 2
            for j, x in enumerate(nums):
                hist[(j * half) % p] += -x if j % 2 else x
            return cls.from_histogram(p, hist, Fraction(1, den))
        raise ValueError("conductor is not prime (or twice a prime); not a pure prime tensor")

    # algebra -------------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.scalar == 0

    def is_rational(self):
        return None if self.axes else self.scalar

    @property
    def conductor(self) -> int:
        return math.prod(self.axes) if self.axes else 1

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SplitElem(self.scalar * other, self.axes)
        if not isinstance(other, SplitElem):
            return NotImplemented
        scalar = self.scalar * other.scalar
        if scalar == 0:
            return SplitElem(0)
        axes = dict(self.axes)
        for q, w in other.axes.items():
            if q not in axes:
                axes[q] = w
                continue
            v = axes.pop(q)
            if _absmax(v) * _absmax(w) * len(v) >= _SAFE or v.dtype == object or w.dtype == object:
                conv = np.convolve(v.astype(object), w.astype(object))
            else:
                conv = np.convolve(v, w)
            part = SplitElem.from_prime_vector(q, reduce_group_ring(q, conv))
            scalar *= part.scalar
            if scalar == 0:
                return SplitElem(0)
            axes.update(part.axes)
        return SplitElem(scalar, axes)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Fraction(other)
        if other == 0:
            raise ZeroDivisionError("division by zero")
        return SplitElem(self.scalar / other, self.axes)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.axes and self.scalar == other
        if not isinstance(other, SplitElem):
            return NotImplemented
        if self.scalar != other.scalar or self.axes.keys() != other.axes.keys():
            return False
        return all(np.array_equal(v, other.axes[q]) for q, v in self.axes.items())

    def __hash__(self):
        return hash((self.scalar, tuple(sorted(self.axes))))

    def __repr__(self):
        return f"SplitElem({self.scalar}, axes={sorted(self.axes)})"

    # conversions ---------------------------------------------------------------
    def to_cycelem(self) -> CycElem:
        out = CycElem.rational(self.scalar)
        for q, v in sorted(self.axes.items()):
            out = out * CycElem._raw(q, [int(x) for x in v], 1)
        return out

    def to_complex(self):
        """Float value and an a-priori error bound."""
        val = complex(float(self.scalar))
        rel = 0.0
        for q, v in self.axes.items():
            c, s = _trig(q)
            vf = v.astype(np.float64)
            x = complex(float(vf @ c[:q - 1]), float(vf @ s[:q - 1]))
            l1 = float(np.abs(vf).sum())
            err = (1e-15 + q * 1.2e-16) * l1
            rel += err / max(abs(x), 1e-300)
            val *= x
        rel += 1e-15 * (len(self.axes) + 1)
        return val, abs(val) * rel


@lru_cache(maxsize=64)
def _trig(q: int):
    ang = 2 * np.pi * np.arange(q) / q
    c, s = np.cos(ang), np.sin(ang)
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


def kloosterman_split(a: int, b: int, primes) -> SplitElem:
    """S(a,b;n) for square-free n = prod(primes) as a pure tensor.

    Uses S(a,b;n) = prod_q S(a u_q, b u_q; q) with u_q the inverse of n/q mod q.
    """
    from .expsums import kloosterman_histogram

    primes = sorted(primes)
    n = math.prod(primes)
    out = SplitElem(1)
    for q in primes:
        u = pow(n // q, -1, q) if q > 1 else 0
        out = out * SplitElem.from_histogram(q, kloosterman_histogram(a * u, b * u, q))
    return out
