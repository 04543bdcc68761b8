"""Exact arithmetic in cyclotomic fields Q(zeta_m).

Elements are stored in the reduced power basis 1, z, ..., z^(phi(m)-1)
modulo the m-th cyclotomic polynomial, as integer numerators over one
positive common denominator.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

import mpmath
import numpy as np

from .arith import euler_phi, factorize, is_prime

_INT64_SAFE = 1 << 62
# Above this conductor the dense reduction matrix gets too large; fall back to long division.
_MATRIX_LIMIT = 2400


class InvalidEmbeddingError(ValueError):
    pass


class NotAnAutomorphismError(ValueError):
    pass


class UnsupportedConductorError(ValueError):
    pass


@dataclass(frozen=True)
class CycPoly:
    m: int
    coeffs: tuple  # low degree first, monic

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    q = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c == 0:
            continue
        if c % lead:
            raise ArithmeticError("inexact polynomial division")
        c //= lead
        q[i - dn] = c
        for j, d in enumerate(den):
            num[i - dn + j] -= c * d
    if any(num[:dn]):
        raise ArithmeticError("inexact polynomial division")
    return q


_poly_lock = threading.Lock()


def _cyclo_fast(m: int):
    """Phi_m as a product/quotient of (x^d - 1) factors in int64; None if magnitudes grow."""
    ups, downs = [], []
    for d in range(1, m + 1):
        if m % d == 0:
            mu = _mobius(m // d)
            if mu == 1:
                ups.append(d)
            elif mu == -1:
                downs.append(d)
    poly = np.ones(1, dtype=np.int64)
    for d in ups:
        nxt = np.zeros(len(poly) + d, dtype=np.int64)
        nxt[d:] += poly
        nxt[:len(poly)] -= poly
        poly = nxt
        if np.abs(poly).max() >= 1 << 40:
            return None
    for d in downs:
        # poly = q * (x^d - 1)  =>  q[i] = q[i-d] - poly[i]
        n = len(poly) - d
        q = np.zeros(n, dtype=np.int64)
        for r in range(min(d, n)):
            q[r::d] = -np.cumsum(poly[r:n:d])
        recon = np.zeros(len(poly), dtype=np.int64)
        recon[d:] += q
        recon[:n] -= q
        if not np.array_equal(recon, poly):
            return None
        poly = q
    if poly[-1] != 1:
        return None
    return tuple(int(v) for v in poly)


@lru_cache(maxsize=None)
def _cyclo_coeffs(m: int) -> tuple:
    fast = _cyclo_fast(m) if m > 2 else None
    if fast is not None:
        return fast
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _poly_divexact(num, list(_cyclo_coeffs(d)))
    return tuple(num)


def cyclotomic_poly(m: int) -> CycPoly:
    if m < 1:
        raise ValueError("m must be positive")
    # lru_cache fills are idempotent; the lock only keeps the recursion single-filled.
    with _poly_lock:
        coeffs = _cyclo_coeffs(m)
    return CycPoly(m, coeffs)


def _as_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
    if arr.dtype == object:
        if len(arr) == 0 or max(abs(int(v)) for v in arr) < _INT64_SAFE:
            return arr.astype(np.int64)
        return arr
    return arr.astype(np.int64, copy=False)


def _absmax(arr: np.ndarray) -> int:
    if len(arr) == 0:
        return 0
    if arr.dtype == object:
        return max(abs(int(v)) for v in arr)
    return int(np.abs(arr).max())


@lru_cache(maxsize=16)
def _reduction_matrix(m: int) -> np.ndarray:
    """Rows are x^j mod Phi_m for j = phi(m), ..., m-1."""
    phi = euler_phi(m)
    fast = _reduction_matrix_int64(m, phi)
    if fast is not None:
        fast.setflags(write=False)
        return fast
    poly = np.array(_cyclo_coeffs(m), dtype=object)
    rows = []
    cur = -poly[:phi].copy()  # x^phi mod Phi
    for _ in range(phi, m):
        rows.append(cur)
        lead = cur[-1]
        nxt = np.empty(phi, dtype=object)
        nxt[0] = 0
        nxt[1:] = cur[:-1]
        if lead:
            nxt = nxt - lead * poly[:phi]
        cur = nxt
    if not rows:
        mat = np.zeros((0, phi), dtype=np.int64)
    else:
        mat = np.vstack(rows)
        if max(abs(int(v)) for v in mat.ravel()) < (1 << 31):
            mat = mat.astype(np.int64)
    mat.setflags(write=False)
    return mat


def _reduction_matrix_int64(m: int, phi: int):
    poly = np.array(_cyclo_coeffs(m), dtype=np.int64)
    low = poly[:phi]
    pmax = int(np.abs(low).max())
    mat = np.zeros((m - phi, phi), dtype=np.int64)
    if m == phi:
        return mat
    cur = -low
    bound = pmax
    for i in range(m - phi):
        mat[i] = cur
        lead = int(cur[-1])
        nxt = np.empty(phi, dtype=np.int64)
        nxt[0] = 0
        nxt[1:] = cur[:-1]
        if lead:
            bound += abs(lead) * pmax
            if bound >= 1 << 31:
                return None
            nxt -= lead * low
        cur = nxt
    return mat


def _long_reduce(m: int, vec: np.ndarray) -> np.ndarray:
    phi = euler_phi(m)
    poly = np.array(_cyclo_coeffs(m), dtype=object)
    work = vec.astype(object).copy()
    for j in range(len(work) - 1, phi - 1, -1):
        c = work[j]
        if c:
            work[j - phi:j + 1] -= c * poly
    return _as_array(work[:phi])


def reduce_group_ring(m: int, vec) -> np.ndarray:
    """Map an integer vector on z^0..z^(L-1) (any L) to reduced coordinates mod Phi_m."""
    phi = euler_phi(m)
    v = _as_array(vec)
    if len(v) > m:
        folded = np.zeros(m, dtype=v.dtype)
        for start in range(0, len(v), m):
            chunk = v[start:start + m]
            folded[:len(chunk)] += chunk
        v = _as_array(folded)
    if len(v) <= phi:
        out = np.zeros(phi, dtype=v.dtype)
        out[:len(v)] = v
        return out
    if is_prime(m):
        # z^(p-1) = -(1 + z + ... + z^(p-2))
        return _as_array(v[:phi] - v[phi])
    if m > _MATRIX_LIMIT:
        return _long_reduce(m, v)
    mat = _reduction_matrix(m)
    head, tail = v[:phi], v[phi:]
    tail_rows = mat[:len(tail)]
    bound = _absmax(tail) * (_absmax(tail_rows) if tail_rows.size else 0) * len(tail) + _absmax(head)
    if v.dtype != object and mat.dtype != object and bound < _INT64_SAFE:
        return head + tail @ tail_rows
    return _as_array(head.astype(object) + tail.astype(object) @ tail_rows.astype(object))


def _mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


class CycElem:
    """Immutable element of Q(zeta_m) in reduced form."""

    __slots__ = ("conductor", "_nums", "_den")

    def __init__(self, conductor: int, coeffs):
        if conductor < 1:
            raise ValueError("conductor must be positive")
        phi = euler_phi(conductor)
        fr = [Fraction(c) for c in coeffs]
        if len(fr) != phi:
            raise ValueError(f"expected {phi} coefficients, got {len(fr)}")
        den = reduce(lambda x, y: x * y // math.gcd(x, y), (f.denominator for f in fr), 1)
        nums = [int(f.numerator * (den // f.denominator)) for f in fr]
        self._set(conductor, nums, den)

    def _set(self, conductor, nums, den):
        if den < 0:
            nums, den = [-x for x in nums], -den
        g = reduce(math.gcd, nums, den)
        if g > 1:
            nums = [x // g for x in nums]
            den //= g
        if not any(nums):
            den = 1
        object.__setattr__(self, "conductor", conductor)
        object.__setattr__(self, "_nums", tuple(nums))
        object.__setattr__(self, "_den", den)

    def __setattr__(self, name, value):
        raise AttributeError("CycElem is immutable")

    @classmethod
    def _raw(cls, conductor: int, nums, den: int = 1) -> "CycElem":
        obj = cls.__new__(cls)
        obj._set(conductor, [int(x) for x in nums], int(den))
        return obj

    @classmethod
    def from_group_ring(cls, m: int, vec, den: int = 1) -> "CycElem":
        """Element sum vec[j] z_m^j / den for an integer vector of any length."""
        return cls._raw(m, reduce_group_ring(m, vec).tolist(), den)

    @classmethod
    def rational(cls, q, conductor: int = 1) -> "CycElem":
        q = Fraction(q)
        phi = euler_phi(conductor)
        return cls._raw(conductor, [q.numerator] + [0] * (phi - 1), q.denominator)

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(x, self._den) for x in self._nums)

    @property
    def numerators(self) -> tuple:
        return self._nums

    @property
    def denominator(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return not any(self._nums)

    def __bool__(self):
        return not self.is_zero()

    # arithmetic -----------------------------------------------------------
    def _unify(self, other) -> tuple["CycElem", "CycElem"]:
        if not isinstance(other, CycElem):
            other = CycElem.rational(other, self.conductor)
        if other.conductor == self.conductor:
            return self, other
        m = math.lcm(self.conductor, other.conductor)
        return self.embed(m), other.embed(m)

    def __add__(self, other):
        try:
            a, b = self._unify(other)
        except TypeError:
            return NotImplemented
        den = a._den * b._den // math.gcd(a._den, b._den)
        fa, fb = den // a._den, den // b._den
        nums = [x * fa + y * fb for x, y in zip(a._nums, b._nums)]
        return CycElem._raw(a.conductor, nums, den)

    __radd__ = __add__

    def __neg__(self):
        return CycElem._raw(self.conductor, [-x for x in self._nums], self._den)

    def __sub__(self, other):
        try:
            a, b = self._unify(other)
        except TypeError:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CycElem._raw(self.conductor, [x * q.numerator for x in self._nums], self._den * q.denominator)
        if not isinstance(other, CycElem):
            return NotImplemented
        a, b = self._unify(other)
        m = a.conductor
        va, vb = _as_array(list(a._nums)), _as_array(list(b._nums))
        bound = _absmax(va) * _absmax(vb) * len(va)
        if va.dtype == object or vb.dtype == object or bound >= _INT64_SAFE:
            conv = np.convolve(va.astype(object), vb.astype(object))
        else:
            conv = np.convolve(va, vb)
        return CycElem.from_group_ring(m, conv, a._den * b._den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, CycElem):
            if other.is_rational() is None:
                raise TypeError("only division by rationals is supported; see rational_ratio")
            other = other.is_rational()
        q = Fraction(other)
        if q == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1 / q)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = CycElem.rational(1, self.conductor)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            r = self.is_rational()
            return r is not None and r == other
        if not isinstance(other, CycElem):
            return NotImplemented
        a, b = self._unify(other)
        return a._nums == b._nums and a._den == b._den

    def __hash__(self):
        # normalized trace is invariant under embedding, so equal elements hash alike
        m = self.conductor
        phi = len(self._nums)
        tr = 0
        for i, x in enumerate(self._nums):
            if x:
                g = m // math.gcd(m, i)
                tr += x * _mobius(g) * (phi // euler_phi(g))
        return hash(Fraction(tr, phi * self._den))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if i == 0 else f"{c}*z{self.conductor}^{i}")
        return f"CycElem({' + '.join(terms) or '0'})"

    # field operations -------------------------------------------------------
    def embed(self, m2: int) -> "CycElem":
        m = self.conductor
        if m2 % m:
            raise InvalidEmbeddingError(f"conductor {m} does not divide {m2}")
        if m2 == m:
            return self
        step = m2 // m
        vec = np.zeros(m2, dtype=object)
        vec[::step][:len(self._nums)] = self._nums
        return CycElem.from_group_ring(m2, vec, self._den)

    def galois(self, u: int) -> "CycElem":
        m = self.conductor
        if math.gcd(u, m) != 1:
            raise NotAnAutomorphismError(f"gcd({u}, {m}) != 1")
        vec = np.zeros(m, dtype=object)
        for i, x in enumerate(self._nums):
            vec[(u * i) % m] += x
        return CycElem.from_group_ring(m, vec, self._den)

    def is_rational(self):
        if any(self._nums[1:]):
            return None
        return Fraction(self._nums[0], self._den)

    def to_complex(self, precision_bits: int = 53):
        if precision_bits < 53:
            raise ValueError("precision_bits must be at least 53")
        m = self.conductor
        maxc = max((abs(x) for x in self._nums), default=0)
        guard = max(1, (len(self._nums) * max(maxc, 1)).bit_length()) + 10
        with mpmath.workprec(precision_bits + guard):
            re = mpmath.mpf(0)
            im = mpmath.mpf(0)
            for i, x in enumerate(self._nums):
                if x:
                    arg = mpmath.mpf(2 * i) / m
                    re += x * mpmath.cospi(arg)
                    im += x * mpmath.sinpi(arg)
            val = mpmath.mpc(re, im) / self._den
        return val

    def error_bound(self, precision_bits: int) -> float:
        """Documented a-priori bound on |to_complex(bits) - exact value|."""
        maxc = max((abs(Fraction(x, self._den)) for x in self._nums), default=Fraction(0))
        scale = len(self._nums) * max(maxc, Fraction(1))
        return 2.0 ** (-precision_bits + math.ceil(math.log2(scale)) if scale > 1 else -precision_bits)

    def to_json(self) -> dict:
        return {
            "conductor": self.conductor,
            "coeffs": [[str(c.numerator), str(c.denominator)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CycElem":
        return cls(int(data["conductor"]), [Fraction(int(n), int(d)) for n, d in data["coeffs"]])


# functional API ---------------------------------------------------------------

def root_power(m: int, j: int) -> CycElem:
    if m < 1:
        raise ValueError("m must be positive")
    vec = np.zeros(m, dtype=np.int64)
    vec[j % m] = 1
    return CycElem.from_group_ring(m, vec)


def cyc_arith(a: CycElem, b: CycElem, op: str) -> CycElem:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def embed(a: CycElem, m2: int) -> CycElem:
    return a.embed(m2)


def galois_apply(a: CycElem, u: int) -> CycElem:
    return a.galois(u)


def is_rational(a: CycElem):
    return a.is_rational()


def rational_ratio(a: CycElem, b: CycElem):
    """r with a = r*b if it exists, else None."""
    if b.is_zero():
        raise ZeroDivisionError("ratio by zero element")
    a, b = a._unify(b)
    j = next(i for i, x in enumerate(b._nums) if x)
    r = Fraction(a._nums[j] * b._den, a._den * b._nums[j])
    # a*den_a... compare a.nums/a.den == r * b.nums/b.den coefficientwise
    lhs_scale = b._den * r.denominator
    rhs_scale = a._den
    for x, y in zip(a._nums, b._nums):
        if x * lhs_scale != y * r.numerator * rhs_scale:
            return None
    return r


def to_complex(a: CycElem, precision_bits: int = 53):
    return a.to_complex(precision_bits)


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def lambda_divide_once(vec: np.ndarray, p: int):
    """If lambda = z-1 divides the integer element vec (reduced, length p-1), return vec/lambda."""
    if vec.dtype != object and _absmax(vec) * (p + 1) >= _INT64_SAFE:
        vec = vec.astype(object)
    r = int(vec.sum()) if vec.dtype != object else sum(int(x) for x in vec)
    if r % p:
        return None
    # subtract (r/p)*Phi_p so the representative vanishes at 1, then divide by (x - 1)
    full = np.concatenate([vec, np.zeros(1, dtype=vec.dtype)]) - (r // p)
    if full.dtype != object and _absmax(full) * (p + 1) >= _INT64_SAFE:
        full = full.astype(object)
    q = -np.cumsum(full)[:-1]
    return _as_array(q)


def lambda_valuation(a: CycElem, p: int, detail: bool = False):
    """Valuation of a at lambda = zeta_p - 1.

    Integer numerators are divided repeatedly; a denominator contributes
    (p-1)*v_p(den) separately.  With detail=True returns the pair
    (numerator valuation, denominator valuation); otherwise their difference.
    Zero has valuation math.inf.
    """
    if a.conductor == 1 and p > 1:
        a = a.embed(p)
    if a.conductor != p or not is_prime(p):
        raise UnsupportedConductorError("lambda valuation needs prime conductor p")
    den_v = (p - 1) * _vp(a._den, p)
    if a.is_zero():
        return (math.inf, den_v) if detail else math.inf
    vec = _as_array(list(a._nums))
    v = 0
    while True:
        nxt = lambda_divide_once(vec, p)
        if nxt is None:
            break
        vec = nxt
        v += 1
    return (v, den_v) if detail else v - den_v


def lambda_valuation_batch(mat: np.ndarray, p: int, limit: int | None = None) -> np.ndarray:
    """Valuations of each row (integer reduced coordinates in Z[zeta_p]).

    Rows that are zero get a large sentinel (limit or 10**9). Stops at limit if given.
    """
    cur = np.array(mat, dtype=np.int64 if mat.dtype != object else object)
    n = cur.shape[0]
    out = np.zeros(n, dtype=np.int64)
    zero = ~cur.any(axis=1)
    sentinel = limit if limit is not None else 10**9
    out[zero] = sentinel
    active = ~zero
    steps = 0
    while active.any():
        if limit is not None and steps >= limit:
            break
        if cur.dtype != object and _absmax(cur.ravel()) * (p + 1) >= _INT64_SAFE:
            cur = cur.astype(object)
        rows = cur[active]
        r = rows.sum(axis=1)
        ok = (r % p) == 0
        idx = np.flatnonzero(active)
        stop = idx[~ok]
        active[stop] = False
        go = idx[ok]
        if len(go) == 0:
            break
        sub = cur[go]
        rr = (sub.sum(axis=1) // p)
        full = np.concatenate([sub, np.zeros((len(go), 1), dtype=sub.dtype)], axis=1) - rr[:, None]
        if cur.dtype != object and _absmax(full.ravel()) * (p + 1) >= _INT64_SAFE:
            cur = cur.astype(object)
            full = full.astype(object)
        q = -np.cumsum(full, axis=1)[:, :-1]
        cur[go] = q
        out[go] += 1
        steps += 1
    return out
