"""Finite-range checks of the kloostermanian properties for sum families.

A family E(u, v; c) is kloostermanian at (a, b) when it is twisted
multiplicative, never vanishes at square-free moduli, and E(a,b;p)/E(at,bt;p)
is rational only for t = +-1.  Everything here checks those properties up to
a bound and labels the result as finite evidence.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from .arith import factorize, is_prime, is_squarefree, jacobi_symbol
from .cyclotomic import CycElem, lambda_valuation
from .expsums import SumSpec, spec_histogram
from .sieve import primes_up_to
from .splitfield import _normalize_axis

EVIDENCE = "finite evidence, not proof"


# handles and verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class FamilyHandle:
    """E(a t, b t; n) for one family at fixed (a, b)."""
    family: str
    a: int
    b: int
    g: tuple = ()
    h: tuple = ()
    variant: str = "unit-range"
    twist: str = "none"
    hist_fn: Callable | None = None  # override, e.g. a deliberately broken evaluator

    def spec(self, u: int, v: int, c: int) -> SumSpec:
        if self.family == "birch":
            return SumSpec("birch", u, v, c, birch_range=self.variant)
        return SumSpec(self.family, u, v, c, self.g, self.h, self.variant, self.twist)

    def hist(self, u: int, v: int, c: int) -> np.ndarray:
        if self.hist_fn is not None:
            return np.asarray(self.hist_fn(u, v, c))
        return spec_histogram(self.spec(u, v, c))

    def value(self, t: int, c: int) -> CycElem:
        return CycElem.from_group_ring(c, self.hist(self.a * t, self.b * t, c))

    def supports(self, c: int) -> bool:
        # Jacobi-weighted sums are only defined here at odd moduli
        return not (c % 2 == 0 and (self.family == "salie" or self.twist == "jacobi"))

    def describe(self) -> dict:
        d = {"family": self.family, "a": self.a, "b": self.b, "variant": self.variant}
        if self.family == "generic":
            d.update(g=list(self.g), h=list(self.h), twist=self.twist)
        if self.hist_fn is not None:
            d["evaluator"] = "custom"
        return d


@dataclass
class GoodPrimeSet:
    description: str
    predicate: Callable[[int], bool]
    bound: int = 0
    members: list = field(default_factory=list)

    def __post_init__(self):
        if self.bound >= 2 and not self.members:
            self.members = [p for p in primes_up_to(self.bound) if self.predicate(p)]

    def __contains__(self, p: int) -> bool:
        return self.predicate(p)

    def excluded(self, bound: int) -> list:
        return [p for p in primes_up_to(bound) if not self.predicate(p)] if bound >= 2 else []


@dataclass
class Verdict:
    property: str
    status: str  # pass | fail | inapplicable | error
    bound: int | None = None
    checked: int = 0
    witnesses: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    label: str = EVIDENCE

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return asdict(self)


def _finish(name, failures, bound, checked, notes=None, max_witnesses=20) -> Verdict:
    failures = sorted(failures, key=lambda w: tuple(w.get(k, 0) for k in ("p", "n", "m", "t")))
    return Verdict(name, "fail" if failures else "pass", bound, checked, failures[:max_witnesses],
                   dict(notes or {}, failures=len(failures)))


# vectors in Z[zeta_p] ---------------------------------------------------------------

def _reduced(hist: np.ndarray, p: int) -> np.ndarray:
    """Coordinates in the basis 1, z, ..., z^(p-2) of Z[zeta_p]."""
    h = np.asarray(hist, dtype=np.int64)
    return h[:p - 1] - h[p - 1]


def _vanishes(hist: np.ndarray) -> bool:
    """At prime modulus a group-ring element is zero in Q(zeta_p) iff it is constant."""
    return bool((hist == hist[0]).all())


def _proportional(u: np.ndarray, v: np.ndarray) -> bool:
    _, nu = _normalize_axis(u)
    _, nv = _normalize_axis(v)
    if nu is None or nv is None:
        return False
    return np.array_equal(nu, nv)


def _squarefree_upto(bound: int, odd: bool = False) -> list:
    return [n for n in range(2, bound + 1) if is_squarefree(n) and (not odd or n % 2)]


# the three properties -----------------------------------------------------------

def check_t_multiplicative(h: FamilyHandle, bound: int, t_values=(1, 2, 3, -1)) -> Verdict:
    """Periodicity in t, membership in Q(zeta_n) and twisted multiplicativity for mn <= bound."""
    if bound < 2:
        raise ValueError("bound must be at least 2")
    fails, checked = [], 0
    mods = [n for n in _squarefree_upto(bound) if h.supports(n)]
    cache: dict = {}

    def val(u, v, c):
        key = (u % c, v % c, c)
        if key not in cache:
            cache[key] = CycElem.from_group_ring(c, h.hist(u, v, c))
        return cache[key]

    for n in mods:
        for t in t_values:
            checked += 1
            e1 = val(h.a * t, h.b * t, n)
            e2 = CycElem.from_group_ring(n, h.hist(h.a * (t + n), h.b * (t + n), n))
            if e1 != e2:
                fails.append({"kind": "periodicity", "n": n, "t": t})
            if n % e1.conductor:
                fails.append({"kind": "field", "n": n, "t": t, "conductor": e1.conductor})
    for m in mods:
        for n in mods:
            if m >= n or m * n > bound or math.gcd(m, n) != 1 or not h.supports(m * n):
                continue
            nb, mb = pow(n, -1, m), pow(m, -1, n)
            for t in t_values:
                checked += 1
                lhs = val(h.a * t, h.b * t, m * n)
                rhs = val(h.a * t * nb, h.b * t * nb, m) * val(h.a * t * mb, h.b * t * mb, n)
                if lhs != rhs:
                    fails.append({"kind": "twisted-multiplicativity", "m": m, "n": n, "t": t})
    return _finish("t-multiplicative", fails, bound, checked, {"t_values": list(t_values)})


def _prime_list(primes_up_to_: int, good_set: GoodPrimeSet | None, h: FamilyHandle) -> list:
    ps = primes_up_to(primes_up_to_) if primes_up_to_ >= 2 else []
    return [p for p in ps if h.supports(p) and (good_set is None or p in good_set)]


def check_nonvanishing(h: FamilyHandle, primes_up_to_: int, good_set: GoodPrimeSet | None = None) -> Verdict:
    fails, checked = [], 0
    for p in _prime_list(primes_up_to_, good_set, h):
        for t in range(1, p):
            checked += 1
            if _vanishes(h.hist(h.a * t, h.b * t, p)):
                fails.append({"p": p, "t": t})
    notes = {"good_set": good_set.description} if good_set else {}
    return _finish("non-vanishing", fails, primes_up_to_, checked, notes)


def check_irrational(h: FamilyHandle, primes_up_to_: int, good_set: GoodPrimeSet | None = None) -> Verdict:
    """Both directions: rational ratio at t = +-1 and irrational ratio otherwise."""
    fails, converse, skipped, checked = [], [], [], 0
    s = abs(h.a) + abs(h.b)
    for p in _prime_list(primes_up_to_, good_set, h):
        if p <= s:
            continue
        base = _reduced(h.hist(h.a, h.b, p), p)
        if not base.any():
            skipped.append({"p": p, "t": 1, "reason": "E(a,b;p) = 0"})
            continue
        for t in range(1, p):
            other = _reduced(h.hist(h.a * t, h.b * t, p), p)
            if not other.any():
                skipped.append({"p": p, "t": t, "reason": "E(at,bt;p) = 0"})
                continue
            checked += 1
            rational = _proportional(base, other)
            plus_minus = t in (1, p - 1)
            if rational and not plus_minus:
                fails.append({"p": p, "t": t, "kind": "rational ratio at t != +-1"})
            elif plus_minus and not rational:
                converse.append({"p": p, "t": t, "kind": "irrational ratio at t = +-1"})
    v = _finish("irrational", fails, primes_up_to_, checked,
                {"converse_failures": converse[:20], "converse_failure_count": len(converse),
                 "skipped_zero_values": skipped[:20], "skipped_count": len(skipped)})
    return v


def check_kloostermanian(h: FamilyHandle, prime_bound: int, mult_bound: int | None = None,
                         good_set: GoodPrimeSet | None = None) -> dict:
    mult_bound = mult_bound if mult_bound is not None else min(prime_bound, 200)
    verdicts = [check_t_multiplicative(h, mult_bound), check_nonvanishing(h, prime_bound, good_set),
                check_irrational(h, prime_bound, good_set)]
    return {"family": h.describe(), "prime_bound": prime_bound, "mult_bound": mult_bound,
            "good_set": good_set.description if good_set else None,
            "properties": {v.property: v.to_json() for v in verdicts},
            "pass": all(v.passed for v in verdicts), "label": EVIDENCE}


# Birch classification ------------------------------------------------------------

def birch_condition(a: int, b: int, trace: bool = False):
    """The two classification conditions, clause by clause and read literally.

    The prime quantifier only bites at p = 3 and at primes dividing a or b.
    """
    steps = [{"clause": "a != 0", "holds": a != 0}]
    if a != 0:
        steps.append({"clause": "p = 3 => 3 | (a+b)", "p": 3, "holds": (a + b) % 3 == 0})
        primes = sorted({p for p, _ in factorize(abs(a))} | ({p for p, _ in factorize(abs(b))} if b else set()))
        for p in primes:
            if a % p == 0:
                steps.append({"clause": "p | a => p | b", "p": p, "holds": b % p == 0})
            if p % 3 == 2 and b % p == 0:
                steps.append({"clause": "p = 2 mod 3 and p | b => p | a", "p": p, "holds": a % p == 0})
        if b == 0:
            steps.append({"clause": "p = 2 mod 3 and p | b => p | a", "p": "every p = 2 mod 3",
                          "holds": False, "note": "b = 0 is divisible by every prime"})
    ok = all(s["holds"] for s in steps)
    return (ok, steps) if trace else ok


def _birch_excluded(a: int, b: int, p: int) -> bool:
    if p == 3 and math.gcd(3, a + b) == 1:
        return True
    if a % p == 0 and b % p != 0:
        return True
    return p % 3 == 2 and b % p == 0 and a % p != 0


def birch_good_primes(a: int, b: int, bound: int = 0) -> GoodPrimeSet:
    if a * b == 0:
        raise ValueError("ab = 0: the Birch sum is multiplicative in c, so no good prime set exists")
    return GoodPrimeSet(f"birch good primes for (a,b)=({a},{b})",
                        lambda p: is_prime(p) and not _birch_excluded(a, b, p), bound)


def birch_vanishing_scan(a: int, b: int, bound: int, variant: str) -> list:
    """Primes p <= bound with B(at,bt;p) = 0 for some t coprime to p."""
    h = FamilyHandle("birch", a, b, variant=variant)
    out = []
    for p in primes_up_to(bound):
        ts = [t for t in range(1, p) if _vanishes(h.hist(a * t, b * t, p))]
        if ts:
            out.append({"p": p, "t": ts[:5]})
    return out


def classify_birch(a: int, b: int, prime_bound: int = 60, mult_bound: int = 100) -> dict:
    """Three-property scans on both ranges plus the literal clause trace.

    The unit-range family is the default sum; the full-range one is the sum the
    classification is stated for, and its vanishing primes are what the
    clauses describe.
    """
    cond, steps = birch_condition(a, b, trace=True)
    out = {"a": a, "b": b, "condition": cond, "clause_trace": steps,
           "clause_witnesses": [s for s in steps if not s["holds"]], "variants": {}, "label": EVIDENCE}
    for variant in ("unit-range", "full-range"):
        h = FamilyHandle("birch", a, b, variant=variant)
        out["variants"][variant] = check_kloostermanian(h, prime_bound, mult_bound)
    out["pass"] = out["variants"]["unit-range"]["pass"]
    return out


# Salie classification -------------------------------------------------------------

def salie_condition(a: int, b: int) -> bool:
    n = a * b
    return n > 0 and math.isqrt(n) ** 2 == n


def salie_good_primes(a: int, b: int, bound: int = 0) -> GoodPrimeSet:
    def pred(p):
        if not is_prime(p) or p == 2:
            return False
        return jacobi_symbol(a * b, p) in (0, 1)

    return GoodPrimeSet(f"salie good primes for (a,b)=({a},{b})", pred, bound)


def salie_bad_prime_scan(a: int, b: int, bound: int = 200) -> list:
    """Odd primes p <= bound with (ab/p) = -1 at which the Salie sum actually vanishes."""
    h = FamilyHandle("salie", a, b)
    out = []
    for p in primes_up_to(bound):
        if p == 2 or jacobi_symbol(a * b, p) != -1:
            continue
        if _vanishes(h.hist(a, b, p)):
            out.append(p)
    return out


# Livne congruences ----------------------------------------------------------------

def _lambda_power(p: int, l: int, scale: int) -> CycElem:
    vec = [0] * p
    for i in range(l + 1):
        vec[i % p] += scale * math.comb(l, i) * (-1) ** (l - i)
    return CycElem.from_group_ring(p, vec)


def livne_congruence_check(a: int, b: int, t: int, p: int, variant: str = "full-range") -> Verdict:
    """B(at,bt;p) against the displayed leading term -lambda^l (at)^l (p = 1 mod 3)
    or -l lambda^l (at)^(l-1) (p = 2 mod 3), l = floor((p+1)/3).

    Besides the displayed congruence the verdict records the leading coefficient
    the sum actually has, so the two can be compared.
    """
    name = f"livne p={p} t={t}"
    ok_case = math.gcd(p, a * b) == 1 or (p % 3 == 1 and b % p == 0 and a % p != 0)
    if p < 7 or not is_prime(p) or t % p == 0 or not ok_case:
        return Verdict(name, "inapplicable", p, 0, [], {"reason": "hypotheses of the congruence not met"})
    l = (p + 1) // 3
    at, bt = a * t, b * t
    B = FamilyHandle("birch", a, b, variant=variant).value(t, p)
    if p % 3 == 1:
        displayed = -(at**l)
        actual = -(at**l) * pow(math.factorial(l), -1, p)
    else:
        displayed = -l * at ** (l - 1)
        actual = -l * at ** (l - 1) * bt * pow(math.factorial(l), -1, p)
    v_B = lambda_valuation(B, p)
    v_disp = lambda_valuation(B - _lambda_power(p, l, displayed), p)
    v_act = lambda_valuation(B - _lambda_power(p, l, actual % p), p)
    notes = {"variant": variant, "l": l, "v_B": v_B, "v_B_equals_l": v_B == l, "nonzero": not B.is_zero(),
             "displayed_coefficient": displayed % p, "displayed_holds": v_disp >= l + 1,
             "v_difference_displayed": v_disp, "derived_coefficient": actual % p,
             "derived_holds": v_act >= l + 1, "v_difference_derived": v_act}
    ok = notes["displayed_holds"] and notes["v_B_equals_l"]
    return Verdict(name, "pass" if ok else "fail", p, 1, [] if ok else [{"p": p, "t": t, "v_B": v_B,
                                                                        "v_difference": v_disp}], notes)


def livne_suite(a: int = 1, b: int = 1, p_range=(7, 100), ts=(1, 2), variants=("full-range", "unit-range")) -> dict:
    rows = {}
    for variant in variants:
        vs = [livne_congruence_check(a, b, t, p, variant)
              for p in primes_up_to(p_range[1]) if p >= p_range[0] for t in ts]
        applicable = [v for v in vs if v.status != "inapplicable"]
        rows[variant] = {
            "checked": len(applicable),
            "displayed_pass": sum(v.notes["displayed_holds"] and v.notes["v_B_equals_l"] for v in applicable),
            "derived_pass": sum(v.notes["derived_holds"] and v.notes["v_B_equals_l"] for v in applicable),
            "valuation_is_l": sum(v.notes["v_B_equals_l"] for v in applicable),
            "nonzero": sum(v.notes["nonzero"] for v in applicable),
            "first_failures": [v.to_json() for v in applicable if not v.passed][:5],
        }
    return {"a": a, "b": b, "p_range": list(p_range), "t": list(ts), "variants": rows}


# conjecture probe -------------------------------------------------------------------

def _degree(coeffs) -> int:
    nz = [i for i, c in enumerate(coeffs) if c]
    return nz[-1] if nz else -1


def conjecture_probe(g, h, variant: str = "unit-range", twist: str = "none", box: int = 3,
                     prime_bound: int = 60, mult_bound: int = 60) -> dict:
    """Scan (a,b) in a box and run the three checkers on A(a g, b h; c)."""
    g, h = tuple(g), tuple(h)
    dg, dh = _degree(g), _degree(h)
    warnings = []
    if min(dg, dh) < 1:
        warnings.append("degree condition min(deg g, deg h) >= 1 violated")
    if variant == "full-range" and max(dg, dh) < 3:
        warnings.append("full-range degree condition max(deg g, deg h) >= 3 violated")
    rows = []
    for a, b in product(range(-box, box + 1), repeat=2):
        if a * b == 0:
            continue
        fh = FamilyHandle("generic", a, b, g, h, variant, twist)
        res = check_kloostermanian(fh, prime_bound, mult_bound)
        wit = {k: v["witnesses"][:1] for k, v in res["properties"].items() if v["status"] != "pass"}
        rows.append({"a": a, "b": b, "pass": res["pass"], "witnesses": wit})
    return {"g": list(g), "h": list(h), "variant": variant, "twist": twist, "box": box,
            "prime_bound": prime_bound, "mult_bound": mult_bound, "warnings": warnings,
            "candidates": [[r["a"], r["b"]] for r in rows if r["pass"]], "pairs": rows, "label": EVIDENCE}
