"""Kloosterman, Birch, Salie and generic exponential sums.

Every sum is reduced to a phase histogram: an integer vector h of length c
with value sum_j h[j] e(j/c).  The exact backend reduces h modulo Phi_c,
the numeric backend dots h against a cos/sin table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .arith import NoInverseError, is_prime, jacobi_array, jacobi_symbol, mod_inverse, unit_table
from .cyclotomic import CycElem

__all__ = [
    "SumSpec", "SumValue", "kloosterman", "kl", "birch", "salie", "generic_sum",
    "kloosterman_crt", "jacobi_symbol", "mod_inverse", "phase_histogram", "numeric_from_histogram",
    "numeric_batch",
    "NoInverseError", "UnsupportedModulusError",
]

FAMILIES = ("kloosterman", "birch", "salie", "generic")
DEFAULT_BITS = 100


class UnsupportedModulusError(ValueError):
    pass


@dataclass(frozen=True)
class SumSpec:
    family: str
    a: int
    b: int
    c: int
    g: tuple = ()
    h: tuple = ()
    variant: str = "unit-range"
    twist: str = "none"
    birch_range: str = "unit-range"
    # unit-range generic sums evaluate h at the inverse of x, full-range at x itself
    h_at_inverse: bool | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.c < 1:
            raise ValueError("modulus must be positive")
        if self.family == "generic" and (not self.g or not self.h):
            raise ValueError("generic sums need both polynomials")
        if self.variant not in ("unit-range", "full-range") or self.birch_range not in ("unit-range", "full-range"):
            raise ValueError("range must be unit-range or full-range")
        if self.twist not in ("none", "jacobi"):
            raise ValueError("twist must be none or jacobi")

    def with_params(self, a: int, b: int, c: int | None = None) -> "SumSpec":
        return SumSpec(self.family, a, b, self.c if c is None else c, self.g, self.h,
                       self.variant, self.twist, self.birch_range, self.h_at_inverse)

    def to_json(self) -> dict:
        d = {"family": self.family, "a": self.a, "b": self.b, "c": self.c}
        if self.family == "birch":
            d["range"] = self.birch_range
        if self.family == "generic":
            d.update(g=list(self.g), h=list(self.h), variant=self.variant, twist=self.twist,
                     h_at_inverse=self._h_inv())
        return d

    def _h_inv(self) -> bool:
        if self.h_at_inverse is None:
            return self.variant == "unit-range"
        return self.h_at_inverse


@dataclass(frozen=True)
class SumValue:
    spec: SumSpec
    exact: CycElem | None = None
    numeric: object = None  # mpmath.mpc
    precision_bits: int | None = None
    error_bound: float | None = None

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def complex(self) -> complex:
        if self.exact is not None:
            return complex(self.exact.to_complex(53))
        return complex(self.numeric)

    def to_json(self, precision_bits: int = DEFAULT_BITS) -> dict:
        out = {"spec": self.spec.to_json()}
        if self.exact is not None:
            out["exact"] = self.exact.to_json()
            val = self.exact.to_complex(precision_bits)
            bits, err = precision_bits, self.exact.error_bound(precision_bits)
        else:
            out["exact"] = None
            val, bits, err = self.numeric, self.precision_bits, self.error_bound
        digits = max(15, int(bits * 0.30103))
        out["numeric"] = {
            "re": mpmath.nstr(val.real, digits, min_fixed=-math.inf, max_fixed=math.inf),
            "im": mpmath.nstr(val.imag, digits, min_fixed=-math.inf, max_fixed=math.inf),
            "precision_bits": bits,
            "error_bound": float(err),
        }
        return out


# histogram kernels ------------------------------------------------------------

def _poly_mod(coeffs, x: np.ndarray, c: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for coef in reversed(coeffs):
        acc = (acc * x + (coef % c)) % c
    return acc


def phase_histogram(c: int, phases: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    phases = np.asarray(phases, dtype=np.int64) % c
    if weights is None:
        return np.bincount(phases, minlength=c).astype(np.int64)
    pos = np.bincount(phases[weights > 0], minlength=c)
    neg = np.bincount(phases[weights < 0], minlength=c)
    return (pos - neg).astype(np.int64)


def _units_and_inverses(c: int):
    return unit_table(c)


def kloosterman_histogram(a: int, b: int, c: int) -> np.ndarray:
    """Read-only histogram of the phases a x + b x^-1 mod c; cached per residue class."""
    return _kloosterman_histogram(a % c if c > 1 else 0, b % c if c > 1 else 0, c)


@lru_cache(maxsize=32)
def _kloosterman_histogram(a: int, b: int, c: int) -> np.ndarray:
    if c == 1:
        h = np.ones(1, dtype=np.int64)
    else:
        x, xinv = _units_and_inverses(c)
        h = phase_histogram(c, (a * x + b * xinv) % c)
    h.setflags(write=False)
    return h


def birch_histogram(a: int, b: int, c: int, rng: str = "unit-range") -> np.ndarray:
    if c == 1:
        return np.ones(1, dtype=np.int64)
    if rng == "unit-range":
        x, _ = _units_and_inverses(c)
    else:
        x = np.arange(c, dtype=np.int64)
    cube = (x * x % c) * x % c
    return phase_histogram(c, ((a % c) * cube + (b % c) * x) % c)


def salie_histogram(a: int, b: int, c: int) -> np.ndarray:
    if c % 2 == 0:
        raise UnsupportedModulusError("Salie sums are implemented for odd moduli only")
    if c == 1:
        return np.ones(1, dtype=np.int64)
    x, xinv = _units_and_inverses(c)
    w = jacobi_array(x, c)
    return phase_histogram(c, ((a % c) * x + (b % c) * xinv) % c, w)


def generic_histogram(spec: SumSpec, a: int | None = None, b: int | None = None, c: int | None = None) -> np.ndarray:
    a = spec.a if a is None else a
    b = spec.b if b is None else b
    c = spec.c if c is None else c
    if spec.twist == "jacobi" and c % 2 == 0:
        raise UnsupportedModulusError("Jacobi twist needs an odd modulus")
    if c == 1:
        return np.ones(1, dtype=np.int64)
    if spec.variant == "unit-range":
        x, xinv = _units_and_inverses(c)
        hx = xinv if spec._h_inv() else x
    else:
        x = np.arange(c, dtype=np.int64)
        hx = x
    ph = ((a % c) * _poly_mod(spec.g, x, c) + (b % c) * _poly_mod(spec.h, hx, c)) % c
    w = jacobi_array(x, c) if spec.twist == "jacobi" else None
    return phase_histogram(c, ph, w)


def spec_histogram(spec: SumSpec, a: int | None = None, b: int | None = None, c: int | None = None) -> np.ndarray:
    a = spec.a if a is None else a
    b = spec.b if b is None else b
    c = spec.c if c is None else c
    if spec.family == "kloosterman":
        return kloosterman_histogram(a, b, c)
    if spec.family == "birch":
        return birch_histogram(a, b, c, spec.birch_range)
    if spec.family == "salie":
        return salie_histogram(a, b, c)
    return generic_histogram(spec, a, b, c)


# numeric evaluation -----------------------------------------------------------

_LIMB = 24


@lru_cache(maxsize=32)
def _fixed_tables(c: int, frac_bits: int):
    """cos/sin(2 pi j/c) * 2^F rounded, offset by 2^F and split into 24-bit limbs."""
    nlimbs = (frac_bits + 2) // _LIMB + 1
    out = []
    with mpmath.workprec(frac_bits + 20):
        scale = mpmath.mpf(2) ** frac_bits
        for fn in (mpmath.cospi, mpmath.sinpi):
            vals = [int(mpmath.nint(fn(mpmath.mpf(2 * j) / c) * scale)) + (1 << frac_bits) for j in range(c)]
            limbs = np.zeros((c, nlimbs), dtype=np.int64)
            mask = (1 << _LIMB) - 1
            for j, v in enumerate(vals):
                for k in range(nlimbs):
                    limbs[j, k] = (v >> (_LIMB * k)) & mask
            limbs.setflags(write=False)
            out.append(limbs)
    return out[0], out[1], nlimbs


def _combine(limb_sums, nlimbs) -> int:
    return sum(int(limb_sums[k]) << (_LIMB * k) for k in range(nlimbs))


def numeric_from_histogram(hist: np.ndarray, c: int, precision_bits: int = DEFAULT_BITS):
    """Return (mpc value, rigorous error bound) for sum_j hist[j] e(j/c)."""
    hist = np.asarray(hist, dtype=np.int64)
    l1 = int(np.abs(hist).sum())
    if c == 1:
        return mpmath.mpc(int(hist[0]), 0), 0.0
    if precision_bits <= 53:
        ang = 2 * np.pi * np.arange(c) / c
        re = float(hist @ np.cos(ang))
        im = float(hist @ np.sin(ang))
        err = (1e-15 + c * 1.2e-16) * max(l1, 1)
        return mpmath.mpc(re, im), err
    frac = precision_bits + max(l1, 1).bit_length() + 4
    if c * max(l1, 1) >= 1 << (62 - _LIMB):
        # fall back to mpmath summation for very heavy histograms
        with mpmath.workprec(frac + 10):
            val = mpmath.mpc(0)
            for j in np.flatnonzero(hist):
                val += int(hist[j]) * mpmath.expjpi(mpmath.mpf(2 * int(j)) / c)
        return val, l1 * 2.0 ** (-frac)
    ctab, stab, nl = _fixed_tables(c, frac)
    tot = int(hist.sum())
    re_int = _combine(hist @ ctab, nl) - (tot << frac)
    im_int = _combine(hist @ stab, nl) - (tot << frac)
    with mpmath.workprec(frac + 64):
        scale = mpmath.mpf(2) ** (-frac)
        val = mpmath.mpc(mpmath.mpf(re_int) * scale, mpmath.mpf(im_int) * scale)
    # each table entry is within 1/2 ulp of 2^-F
    return val, l1 * 2.0 ** (-frac)


def numeric_batch(hists: np.ndarray, c: int, precision_bits: int = DEFAULT_BITS) -> list:
    """numeric_from_histogram for every row of a matrix of histograms at one modulus."""
    hists = np.asarray(hists, dtype=np.int64)
    l1max = int(np.abs(hists).sum(axis=1).max()) if len(hists) else 0
    if c == 1 or precision_bits <= 53 or c * max(l1max, 1) >= 1 << (62 - _LIMB):
        return [numeric_from_histogram(h, c, precision_bits) for h in hists]
    frac = precision_bits + max(l1max, 1).bit_length() + 4
    ctab, stab, nl = _fixed_tables(c, frac)
    re_l, im_l = hists @ ctab, hists @ stab
    tots = hists.sum(axis=1)
    out = []
    with mpmath.workprec(frac + 64):
        scale = mpmath.mpf(2) ** (-frac)
        for i in range(len(hists)):
            tot = int(tots[i]) << frac
            re_int = _combine(re_l[i], nl) - tot
            im_int = _combine(im_l[i], nl) - tot
            l1 = int(np.abs(hists[i]).sum())
            out.append((mpmath.mpc(mpmath.mpf(re_int) * scale, mpmath.mpf(im_int) * scale), l1 * 2.0 ** (-frac)))
    return out


def _finish(spec: SumSpec, hist: np.ndarray, backend: str, precision_bits: int) -> SumValue:
    if backend == "exact":
        return SumValue(spec, exact=CycElem.from_group_ring(spec.c, hist))
    if backend == "numeric":
        val, err = numeric_from_histogram(hist, spec.c, precision_bits)
        return SumValue(spec, numeric=val, precision_bits=precision_bits, error_bound=err)
    raise ValueError(f"unknown backend {backend!r}")


# public evaluators -------------------------------------------------------------

def kloosterman(a: int, b: int, c: int, backend: str = "exact", precision_bits: int = DEFAULT_BITS) -> SumValue:
    spec = SumSpec("kloosterman", a, b, c)
    return _finish(spec, kloosterman_histogram(a, b, c), backend, precision_bits)


def kl(a: int, p: int, backend: str = "exact", precision_bits: int = DEFAULT_BITS) -> SumValue:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return kloosterman(a, 1, p, backend, precision_bits)


def birch(a: int, b: int, c: int, range: str = "unit-range", backend: str = "exact",
          precision_bits: int = DEFAULT_BITS) -> SumValue:
    spec = SumSpec("birch", a, b, c, birch_range=range)
    return _finish(spec, birch_histogram(a, b, c, range), backend, precision_bits)


def salie(a: int, b: int, c: int, backend: str = "exact", precision_bits: int = DEFAULT_BITS) -> SumValue:
    spec = SumSpec("salie", a, b, c)
    return _finish(spec, salie_histogram(a, b, c), backend, precision_bits)


def generic_sum(spec: SumSpec, backend: str = "exact", precision_bits: int = DEFAULT_BITS) -> SumValue:
    return _finish(spec, spec_histogram(spec), backend, precision_bits)


def evaluate(spec: SumSpec, backend: str = "exact", precision_bits: int = DEFAULT_BITS) -> SumValue:
    return _finish(spec, spec_histogram(spec), backend, precision_bits)


def _check_coprime(factors):
    for i, m in enumerate(factors):
        if m < 1:
            raise ValueError("factors must be positive")
        for n in factors[i + 1:]:
            if math.gcd(m, n) != 1:
                raise ValueError(f"factors {m} and {n} are not coprime")


def kloosterman_crt(a: int, b: int, factors, backend: str = "exact",
                    precision_bits: int = DEFAULT_BITS) -> SumValue:
    """S(a,b; prod factors) by repeated twisted multiplicativity."""
    factors = [int(f) for f in factors]
    if not factors:
        raise ValueError("need at least one factor")
    _check_coprime(factors)
    c = math.prod(factors)
    spec = SumSpec("kloosterman", a, b, c)
    if backend == "exact":
        return SumValue(spec, exact=_crt_exact(a, b, factors))
    val, err = _crt_numeric(a, b, factors, precision_bits)
    return SumValue(spec, numeric=val, precision_bits=precision_bits, error_bound=err)


def _crt_exact(a, b, factors) -> CycElem:
    m = factors[0]
    if len(factors) == 1:
        return CycElem.from_group_ring(m, kloosterman_histogram(a, b, m))
    n = math.prod(factors[1:])
    nbar = mod_inverse(n, m) if m > 1 else 0
    mbar = mod_inverse(m, n) if n > 1 else 0
    left = CycElem.from_group_ring(m, kloosterman_histogram(a * nbar, b * nbar, m))
    right = _crt_exact(a * mbar, b * mbar, factors[1:])
    return left * right


def _crt_numeric(a, b, factors, bits):
    m = factors[0]
    if len(factors) == 1:
        return numeric_from_histogram(kloosterman_histogram(a, b, m), m, bits)
    n = math.prod(factors[1:])
    nbar = mod_inverse(n, m) if m > 1 else 0
    mbar = mod_inverse(m, n) if n > 1 else 0
    x, ex = numeric_from_histogram(kloosterman_histogram(a * nbar, b * nbar, m), m, bits)
    with mpmath.workprec(bits + 20):
        y, ey = _crt_numeric(a * mbar, b * mbar, factors[1:], bits)
        val = x * y
        err = float(abs(x)) * ey + float(abs(y)) * ex + ex * ey + float(abs(val)) * 2.0 ** (-bits)
    return val, err
