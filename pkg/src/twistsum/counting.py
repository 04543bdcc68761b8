"""Matched sets R_k(X) = {n in Pi_k(X) : S(a,b;n) = eta_k f(n)} and their bounds.

Integers are processed cell by cell, grouped by their largest prime factor P.
For square-free n the Kloosterman sum factors as
    S(a,b;n) = prod_{q | n} S(a u_q, b u_q; q),   u_q = inverse of n/q mod q,
and S(a u, b u; q) is the Galois conjugate of S(a,b;q) by u, so each factor
is an index permutation of one base histogram per prime.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cyclotomic import CycElem
from .expsums import kloosterman_histogram
from .multfun import Approx, MultFunSpec, as_approx, as_exact, eval_squarefree, multiply
from .sieve import (ZETA2, factor, iter_squarefree_factored, pi_k, prime_pi, primes_up_to,
                    primorial, squarefree_count)
from .splitfield import SplitElem, _trig

SEPARATION = 2.0**-60
DEFAULT_CAP_M = 10**4


@dataclass
class MatchQuery:
    a: int
    b: int
    f: MultFunSpec
    X: int
    k: int | str = 2
    equality_mode: str = "exact"  # or "numeric"
    cap_M: int = DEFAULT_CAP_M
    constant_C: float = 1.0
    exceptional_scan: int | None = None  # prime bound for the P0 scan; default X

    def __post_init__(self):
        if self.a == 0 or self.b == 0:
            raise ValueError("a and b must be nonzero (ab = 0 makes S(a,b;c) multiplicative)")
        if self.X < 1:
            raise ValueError("X must be positive")
        if self.k != "all" and (not isinstance(self.k, int) or self.k < 1):
            raise ValueError("k must be a positive integer or 'all'")
        if self.equality_mode not in ("exact", "numeric"):
            raise ValueError("equality_mode must be exact or numeric")

    def echo(self) -> dict:
        return {"a": self.a, "b": self.b, "X": self.X, "k": self.k, "mode": self.equality_mode,
                "f": self.f.kind, "f_description": _jsonable(self.f.description),
                "eta": [_value_str(e) for e in self.f.eta_values], "cap_M": self.cap_M,
                "constant_C": self.constant_C,
                "exceptional_scan": self.exceptional_scan if self.exceptional_scan is not None else self.X}


@dataclass
class CountReport:
    query: dict
    matched: list
    r_k: int
    partition: dict
    sigma: dict
    bounds: dict
    verdicts: dict
    undecided: list
    exceptional_primes: list
    p_f: int | None
    unresolved: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["partition"] = {str(p): v for p, v in sorted(self.partition.items())}
        return _jsonable(d)


def _value_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, SplitElem) and v.is_rational() is not None:
        return str(v.is_rational())
    return repr(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# equality engine ----------------------------------------------------------------

class Matcher:
    """Decides S(a,b;n) = eta * f(n) for square-free n given as a prime tuple."""

    def __init__(self, a: int, b: int, f: MultFunSpec, mode: str = "exact", cap_M: int = DEFAULT_CAP_M):
        self.a, self.b, self.f, self.mode, self.cap_M = a, b, f, mode, cap_M
        self._small: dict[int, np.ndarray] = {}
        self._big: tuple[int, np.ndarray] | None = None
        self.escalated = 0

    def base_hist(self, q: int) -> np.ndarray:
        if q in self._small:
            return self._small[q]
        if self._big is not None and self._big[0] == q:
            return self._big[1]
        h = kloosterman_histogram(self.a, self.b, q)
        if q <= 1000:
            self._small[q] = h
        else:
            self._big = (q, h)
        return h

    def factor_hist(self, q: int, cofactor: int) -> np.ndarray:
        """Histogram of S(a u, b u; q) with u the inverse of cofactor mod q."""
        h = self.base_hist(q)
        if cofactor % q == 1:
            return h
        idx = (np.arange(q, dtype=np.int64) * (cofactor % q)) % q
        return h[idx]

    def lhs_exact(self, primes) -> SplitElem:
        n = math.prod(primes)
        out = SplitElem(1)
        for q in primes:
            out = out * SplitElem.from_histogram(q, self.factor_hist(q, n // q))
        return out

    def lhs_numeric(self, primes) -> Approx:
        n = math.prod(primes)
        val = complex(1.0)
        rel = 0.0
        for q in primes:
            g = self.factor_hist(q, n // q).astype(np.float64)
            c, s = _trig(q)
            x = complex(float(g @ c), float(g @ s))
            l1 = float(np.abs(g).sum())
            rel += (1e-15 + q * 1.2e-16) * l1 / max(abs(x), 1e-300)
            val *= x
        rel += 1e-15 * (len(primes) + 1)
        return Approx(val, 2 * abs(val) * rel)

    def rhs(self, primes, eta):
        vals = [self.f.at_prime(p) for p in primes]
        return multiply([eta] + vals) if primes else multiply([eta])

    def decide(self, primes, eta) -> tuple[bool | None, bool]:
        """(equal?, escalated?).  None means the comparison could not be resolved."""
        rhs = self.rhs(primes, eta)
        escalated = False
        if self.mode == "numeric":
            lhs_n = self.lhs_numeric(primes)
            rhs_n = as_approx(rhs)
            diff = abs(lhs_n.value - rhs_n.value)
            band = max(SEPARATION * max(1.0, abs(rhs_n.value)), lhs_n.err + rhs_n.err)
            if diff > band:
                return False, False
            escalated = True
            self.escalated += 1
        return self._exact(primes, rhs), escalated

    def _exact(self, primes, rhs):
        ex = as_exact(rhs)
        if ex is None:
            lhs_n = self.lhs_numeric(primes)
            diff = abs(lhs_n.value - rhs.value)
            if diff > max(SEPARATION, lhs_n.err + rhs.err):
                return False
            return None
        if isinstance(ex, SplitElem):
            if ex.is_zero():
                return False  # Kloosterman sums at square-free moduli never vanish
            # pure tensors agree only if every normalized axis agrees; try the largest prime first
            P = max(primes) if primes else 1
            if P > 2:
                top = SplitElem.from_histogram(P, self.factor_hist(P, math.prod(primes) // P))
                mine, theirs = top.axes.get(P), ex.axes.get(P)
                if (mine is None) != (theirs is None) or (mine is not None and not np.array_equal(mine, theirs)):
                    return False
            return self.lhs_exact(primes) == ex
        lhs = self.lhs_exact(primes)
        m = math.lcm(math.prod(primes), ex.conductor)
        if m > self.cap_M:
            return None
        return lhs.to_cycelem() == ex

    def prime_matches(self, p: int) -> bool | None:
        return self._exact((p,), self.rhs((p,), self.f.eta(1)))


# bound formulas --------------------------------------------------------------------

def thm1_bound(a, b, k, X) -> float:
    return prime_pi(X / primorial(k)) + 7 * (abs(a) + abs(b) + math.sqrt(k)) * X ** (1 - 1 / (2 * k))


def thm1_intermediate(k, X) -> float:
    return prime_pi(X / primorial(k)) + (5 + (math.sqrt(2) + 5) * math.sqrt(k)) * X ** (1 - 1 / (2 * k))


def thm2_bound(a, b, X, C=1.0) -> float:
    beta = 14 + 2 * C
    return prime_pi(X) + (10 * abs(a) + 10 * abs(b) + beta) * X * math.exp(-math.sqrt(math.log(X)))


def thm3_bound(a, b, k, X, p_f=None) -> float:
    binom = math.comb(p_f, k) if p_f else 0
    return (abs(a) + abs(b) + 2 * k) * X ** (k / (k + 1)) + binom


def _root_floor(X: int, num: int, den: int) -> int:
    """Largest integer y with y^den <= X^num."""
    target = X**num
    y = int(round(X ** (num / den)))
    while y > 0 and y**den > target:
        y -= 1
    while (y + 1) ** den <= target:
        y += 1
    return y


def sigma_part(p: int, X: int, k: int, L: int) -> int:
    """Which of the four largest-prime ranges p falls in (1..4), 0 if beyond X/L_k."""
    if p ** (k + 1) <= X:
        return 1
    if p**k <= X:
        return 2
    if p**3 <= X * X:
        return 3
    if p * L <= X:
        return 4
    return 0


# main computations ------------------------------------------------------------

def _scan_exceptional(matcher: Matcher, bound: int, known: dict) -> tuple[list, list]:
    """P0 = primes p <= bound with S(a,b;p) != eta_1 f(p); plus unresolved primes."""
    exc, unresolved = [], []
    for p in primes_up_to(max(bound, 1)) if bound >= 2 else []:
        ok = known.get(p)
        if ok is None:
            ok = matcher.prime_matches(p)
        if ok is None:
            unresolved.append(p)
        elif not ok:
            exc.append(p)
    return exc, unresolved


def _cells(X: int, k: int, primes: list):
    """Yield (P, cofactor prime tuples) for every prime P that is the largest factor of some n in Pi_k(X)."""
    L = primorial(k) if k >= 2 else 1
    for P in primes:
        if P * L > X:
            break
        if k == 1:
            yield P, [()]
            continue
        members = list(iter_squarefree_factored(X // P, k - 1, P - 1, primes))
        if members:
            yield P, members


def compute_matches(q: MatchQuery) -> CountReport:
    if q.k == "all":
        return compute_matches_squarefree(q)
    k, X, a, b = q.k, q.X, q.a, q.b
    L = primorial(k) if k >= 2 else 1
    primes = primes_up_to(max(X, 2))
    matcher = Matcher(a, b, q.f, q.equality_mode, q.cap_M)
    eta = q.f.eta(k)
    matched, partition, undecided, unresolved = [], {}, [], []
    sigma = {"sigma1": 0, "sigma2": 0, "sigma3": 0, "sigma4": 0}
    prime_status = {}
    for P, members in _cells(X, k, primes):
        cell = []
        for t in members:
            ps = t + (P,)
            ok, esc = matcher.decide(ps, eta)
            n = math.prod(ps)
            if esc:
                undecided.append(n)
            if ok is None:
                unresolved.append(n)
            elif ok:
                cell.append(n // P)
        if q.exceptional_scan is None or q.exceptional_scan >= P:
            prime_status[P] = matcher.prime_matches(P)
        if cell:
            partition[P] = sorted(cell)
            matched.extend(c * P for c in cell)
            if k >= 2:
                sigma[f"sigma{sigma_part(P, X, k, L)}"] += len(cell)
    matched.sort()
    scan = X if q.exceptional_scan is None else q.exceptional_scan
    exc, exc_unres = _scan_exceptional(matcher, scan, prime_status)
    p_f = max(exc) if exc else None
    report = CountReport(
        query=q.echo(), matched=matched, r_k=len(matched), partition=partition, sigma=sigma,
        bounds={}, verdicts={}, undecided=sorted(undecided), exceptional_primes=exc, p_f=p_f,
        unresolved=sorted(unresolved) + [f"prime:{p}" for p in exc_unres],
    )
    report.extra["pi_k"] = pi_k(X, k)
    report.extra["escalations"] = matcher.escalated
    if k >= 2:
        _fill_fixed_k_bounds(report, a, b, k, X, L)
        _fill_thm3(report, a, b, k, X, scan)
    return report


def _fill_fixed_k_bounds(report: CountReport, a, b, k, X, L):
    r = report.r_k
    b1 = thm1_bound(a, b, k, X)
    b1i = thm1_intermediate(k, X)
    report.bounds["thm1"] = b1
    report.bounds["thm1_intermediate"] = b1i
    report.bounds["sharpness_lower"] = prime_pi(X / L) - k + 1
    report.verdicts["thm1"] = r <= b1
    report.verdicts["thm1_intermediate"] = r <= b1i
    s = a_plus_b = abs(a) + abs(b)
    x13 = _root_floor(X, 1, k + 1)
    x1k = _root_floor(X, 1, k)
    x23 = _root_floor(X, 2, 3)
    lemmas = {
        "sigma1": {"bound": prime_pi(x13) ** k, "hypothesis": True},
        "sigma2": {"bound": prime_pi(x1k) + math.sqrt(2 * k) * prime_pi(x1k) ** (k - 0.5),
                   "hypothesis": X > s ** (k + 1)},
        "sigma3": {"bound": prime_pi(x23) + 5 * math.sqrt(k) * X ** (1 - 1 / (2 * k)),
                   "hypothesis": X > s**k},
        "sigma4": {"bound": prime_pi(X // L) + 2 * pi_k(math.floor(X ** (1 / 3) + 1e-9), k - 1) ** 2,
                   "hypothesis": X > a_plus_b**2},
    }
    for name, d in lemmas.items():
        d["value"] = report.sigma[name]
        d["holds"] = d["value"] <= d["bound"] if d["hypothesis"] else None
    report.extra["sigma_lemmas"] = lemmas
    report.extra["boundaries"] = {"X^(1/(k+1))": x13, "X^(1/k)": x1k, "X^(2/3)": x23, "X/L_k": X // L}
    total = sum(report.sigma.values())
    report.verdicts["partition_identity"] = total == r and sum(len(v) for v in report.partition.values()) == r
    report.verdicts["cells_within_X_over_L"] = all(p * L <= X for p in report.partition)


def _fill_thm3(report: CountReport, a, b, k, X, scan):
    exc = report.exceptional_primes
    p_f = report.p_f
    report.bounds["thm3"] = thm3_bound(a, b, k, X, p_f)
    report.verdicts["thm3"] = report.r_k <= report.bounds["thm3"]
    big = [p for p in exc if p * p > scan]
    if scan < 2:
        report.extra["thm3_hypothesis"] = "not-scanned"
        report.verdicts["thm3"] = None
    elif big:
        report.extra["thm3_hypothesis"] = "not-evidenced"
        report.warnings.append(
            f"thm3 hypothesis (S(a,b;p) = eta_1 f(p) for all but finitely many p) is not evidenced: "
            f"{len(exc)} exceptional primes up to {scan}, {len(big)} of them above sqrt({scan}); "
            "the thm3 bound is inapplicable")
        report.verdicts["thm3"] = None
    else:
        report.extra["thm3_hypothesis"] = "holds-in-range"


def _squarefree_cells(X: int, primes: list):
    for P in primes:
        if P > X:
            break
        members = [()]
        j = 1
        while True:
            part = list(iter_squarefree_factored(X // P, j, P - 1, primes))
            if not part:
                break
            members.extend(part)
            j += 1
        yield P, members


def compute_matches_squarefree(q: MatchQuery) -> CountReport:
    X, a, b = q.X, q.a, q.b
    primes = primes_up_to(max(X, 2))
    matcher = Matcher(a, b, q.f, q.equality_mode, q.cap_M)
    matched, undecided, unresolved = [], [], []
    partition = {}
    per_omega = defaultdict(int)
    per_k_partition = defaultdict(lambda: defaultdict(list))
    prime_status = {}
    for P, members in _squarefree_cells(X, primes):
        for t in members:
            ps = t + (P,)
            w = len(ps)
            ok, esc = matcher.decide(ps, q.f.eta(w))
            n = math.prod(ps)
            if esc:
                undecided.append(n)
            if w == 1:
                prime_status[P] = ok
            if ok is None:
                unresolved.append(n)
            elif ok:
                matched.append(n)
                per_omega[w] += 1
                if w >= 2:
                    per_k_partition[w][P].append(n // P)
    matched.sort()
    for w, cells in per_k_partition.items():
        for P, cell in cells.items():
            partition.setdefault(P, []).extend(cell)
    partition = {P: sorted(v) for P, v in partition.items()}
    exc = sorted(p for p, ok in prime_status.items() if ok is False)
    r1 = per_omega.get(1, 0)
    r = sum(v for w, v in per_omega.items() if w >= 2)
    report = CountReport(
        query=q.echo(), matched=matched, r_k=len(matched), partition=partition,
        sigma={}, bounds={}, verdicts={}, undecided=sorted(undecided),
        exceptional_primes=exc, p_f=max(exc) if exc else None, unresolved=sorted(unresolved),
    )
    one_matches = (SplitElem(1) == as_exact(multiply([q.f.eta(1)])))
    report.extra.update({
        "r1": r1, "r": r, "per_omega": dict(sorted(per_omega.items())),
        "n_equals_1": {"S(a,b;1)": "1", "f(1)": "1", "equals_eta1_f(1)": one_matches,
                       "included_in_matched": False},
        "excess_composites": r,
        "pi_X": prime_pi(X),
        "squarefree_count": squarefree_count(X),
        "X_over_zeta2": X / ZETA2,
        "escalations": matcher.escalated,
    })
    _fill_squarefree_bounds(report, q, per_k_partition)
    return report


def _fill_squarefree_bounds(report: CountReport, q: MatchQuery, per_k_partition):
    X, a, b, C = q.X, q.a, q.b, q.constant_C
    s = abs(a) + abs(b)
    n_match = report.extra["r1"] + report.extra["r"]
    b2 = thm2_bound(a, b, X, C)
    report.bounds["thm2"] = b2
    report.bounds["beta"] = 14 + 2 * C
    report.verdicts["thm2"] = n_match <= b2
    report.verdicts["thm2_conditional_on_C"] = True
    if q.f.kind == "sharpness-squarefree":
        report.verdicts["sharpness_primes"] = report.extra["r1"] == prime_pi(X)
    if X >= 3:
        ex = X * math.exp(-math.sqrt(math.log(X)))
        nonmatch = report.extra["squarefree_count"] - 1 - n_match  # n = 1 is reported separately
        lo = X / ZETA2 - prime_pi(X) - (10 * s + 14 + 2 * C + 6) * ex
        hi = X / ZETA2 + 3 * math.sqrt(X)
        report.bounds["nonmatched_interval"] = [lo, hi]
        report.extra["nonmatched"] = nonmatch
        report.verdicts["nonmatched_interval"] = lo <= nonmatch <= hi
        # the four-part split over k
        lx = math.log(X)
        kmid = math.sqrt(lx) / 3
        x23 = _root_floor(X, 2, 3)
        exc = set(report.exceptional_primes)
        parts = {"sigma1": 0, "sigma2": 0, "sigma3": 0, "sigma4": 0}
        for w, cells in per_k_partition.items():
            L = primorial(w)
            for P, cell in cells.items():
                if w > kmid:
                    parts["sigma4"] += len(cell)
                elif P <= x23:
                    parts["sigma1"] += len(cell)
                elif P * L <= X:
                    parts["sigma2" if P in exc else "sigma3"] += len(cell)
        report.sigma = parts
        pi0_half = sum(1 for p in exc if 2 * p <= X)
        report.extra["sigma_propositions"] = {
            "k_range_small": [2, kmid],
            "sigma1": {"value": parts["sigma1"], "bound": 10 * s * ex},
            "sigma2": {"value": parts["sigma2"], "bound": pi0_half + 2 / 9 * X ** (2 / 3) * lx,
                       "hypothesis": X > s**2},
            "sigma3": {"value": parts["sigma3"], "bound": X ** (1 / 3) / 3 * math.sqrt(lx)},
            "sigma4": {"value": parts["sigma4"], "bound": C * X / math.log(2) * math.exp(-math.sqrt(lx)),
                       "conditional_on_C": True},
        }


def theorem_bounds(q: MatchQuery, which: str, p_f: int | None = None) -> dict:
    X, a, b = q.X, q.a, q.b
    if which == "thm1":
        k = q.k
        return {"thm1": thm1_bound(a, b, k, X), "thm1_intermediate": thm1_intermediate(k, X),
                "pi_X_over_L": prime_pi(X / primorial(k))}
    if which == "thm2":
        return {"thm2": thm2_bound(a, b, X, q.constant_C), "beta": 14 + 2 * q.constant_C,
                "conditional_on_C": True}
    if which == "thm3":
        return {"thm3": thm3_bound(a, b, q.k, X, p_f), "p_f": p_f,
                "binomial_term": math.comb(p_f, q.k) if p_f else 0}
    raise ValueError(f"unknown theorem {which!r}")


def sweep_csv(a, b, f, k, Xs, mode="exact") -> str:
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["X", "k", "r_k", "thm1_bound", "thm1_verdict"])
    for X in Xs:
        rep = compute_matches(MatchQuery(a, b, f, X, k, mode, exceptional_scan=0))
        w.writerow([X, k, rep.r_k, f"{rep.bounds['thm1']:.6f}", rep.verdicts["thm1"]])
    return buf.getvalue()


# lemma verification on data -------------------------------------------------------

@dataclass
class LemmaVerdict:
    name: str
    status: str  # pass | fail | hypothesis-failure
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return _jsonable(asdict(self))


def _membership(matcher: Matcher, f: MultFunSpec, p: int, u: int, X: int) -> bool:
    """u in R^p(X) = union over k >= 2 of R_k^p(X)."""
    if u < 2 or p * u > X:
        return False
    fu = factor(u)
    if not fu.squarefree or fu.largest_prime >= p:
        return False
    ps = fu.primes + (p,)
    ok, _ = matcher.decide(ps, f.eta(len(ps)))
    return bool(ok)


def verify_divisor_lemma(u: int, v: int | None, primes, a: int, b: int, f: MultFunSpec, X: int,
                         partition: dict | None = None, r1_primes=None) -> LemmaVerdict:
    """pq | u^2 - v^2 for distinct u, v in the R^p cells; with v=None the R_1 variant pq | u^2 - 1.

    Membership is read from `partition` (and `r1_primes`) when supplied, otherwise
    recomputed from f.
    """
    primes = list(primes)
    name = "divisor" if v is not None else "divisor_R1"
    if len(set(primes)) != len(primes) or len(primes) < 2:
        return LemmaVerdict(name, "hypothesis-failure", {"reason": "need at least two distinct primes"})
    if v is not None and u == v:
        return LemmaVerdict(name, "hypothesis-failure", {"reason": "u = v"})
    prod = math.prod(primes)
    if math.gcd(prod, a * b) != 1:
        return LemmaVerdict(name, "hypothesis-failure", {"reason": "primes not coprime to ab"})
    matcher = Matcher(a, b, f)
    if partition is not None:
        def member(p, w):
            return w in partition.get(p, ())
    else:
        def member(p, w):
            return _membership(matcher, f, p, w, X)
    for p in primes:
        if not member(p, u) or (v is not None and not member(p, v)):
            return LemmaVerdict(name, "hypothesis-failure", {"reason": f"membership fails at p={p}"})
        in_r1 = p in r1_primes if r1_primes is not None else matcher.prime_matches(p)
        if v is None and not in_r1:
            return LemmaVerdict(name, "hypothesis-failure", {"reason": f"{p} is not in R_1"})
    target = u * u - (v * v if v is not None else 1)
    ok = target % prod == 0
    return LemmaVerdict(name, "pass" if ok else "fail", {"u": u, "v": v, "primes": primes, "value": target})


def divisor_scan(report: CountReport, a: int, b: int, r1_primes: set | None = None) -> dict:
    """Check the divisor lemmas on every co-occurring pair in the partition data."""
    cells = report.partition
    where = defaultdict(list)
    for p, cell in cells.items():
        for u in cell:
            where[u].append(p)
    pair_cells = defaultdict(list)
    for p, cell in cells.items():
        for u, v in combinations(cell, 2):
            pair_cells[(u, v)].append(p)
    ab = a * b
    checked = violations = 0
    witnesses = []
    for (u, v), ps in pair_cells.items():
        ps = [p for p in ps if math.gcd(p, ab) == 1]
        if len(ps) < 2:
            continue
        for p, q in combinations(ps, 2):
            checked += 1
            if (u * u - v * v) % (p * q):
                violations += 1
                witnesses.append([u, v, p, q])
    r1_checked = r1_viol = 0
    if r1_primes is not None:
        for u, ps in where.items():
            ps = [p for p in ps if p in r1_primes and math.gcd(p, ab) == 1]
            for p, q in combinations(ps, 2):
                r1_checked += 1
                if (u * u - 1) % (p * q):
                    r1_viol += 1
                    witnesses.append([u, 1, p, q])
    return {"pairs_checked": checked, "violations": violations,
            "r1_checked": r1_checked, "r1_violations": r1_viol, "witnesses": witnesses[:20]}


def _cooccurrence_max(cells: dict, chosen) -> tuple[int, int, list]:
    """Largest number of chosen cells sharing one pair of distinct elements, and one element."""
    pair = defaultdict(int)
    single = defaultdict(int)
    for p in chosen:
        cell = cells.get(p, [])
        for u in cell:
            single[u] += 1
        for u, v in combinations(cell, 2):
            pair[(u, v)] += 1
    best_pair = max(pair.values(), default=0)
    best_single = max(single.values(), default=0)
    witness = [list(k) for k, c in pair.items() if c == best_pair][:1] if best_pair else []
    return best_pair, best_single, witness


def verify_intersection_bounds(report: CountReport, a: int, b: int, k: int, X: int,
                               r1_primes: set | None = None) -> list[LemmaVerdict]:
    """The three largest-prime-range intersection bounds and their R_1 versions.

    |intersection of s cells| <= 1 for every choice of s cells is equivalent to:
    no pair of distinct elements lies in s common cells.  '= 0' is equivalent to:
    no element lies in s of the cells.
    """
    cells = report.partition
    L = primorial(k)
    s = abs(a) + abs(b)
    x13, x1k, x23 = _root_floor(X, 1, k + 1), _root_floor(X, 1, k), _root_floor(X, 2, 3)
    ranges = [
        ("(X^(2/3), X/L_k]", lambda p: x23 < p and p * L <= X, 2, 2),
        ("(X^(1/k), X^(2/3)]", lambda p: x1k < p <= x23, 2 * k - 2, k),
        ("(X^(1/(k+1)), X^(1/k)]", lambda p: x13 < p <= x1k, 2 * k, k + 1),
    ]
    out = []
    for label, pred, fold, t in ranges:
        chosen = sorted(p for p in cells if pred(p))
        hyp = X > s**t
        best_pair, _, wit = _cooccurrence_max(cells, chosen)
        status = "pass" if best_pair < fold else ("fail" if hyp else "hypothesis-failure")
        out.append(LemmaVerdict(f"intersection {label}", status,
                                {"fold": fold, "t": t, "hypothesis": hyp, "cells": len(chosen),
                                 "max_pair_cooccurrence": best_pair, "witness": wit}))
        if r1_primes is not None:
            chosen1 = [p for p in chosen if p in r1_primes]
            _, best_single, _ = _cooccurrence_max(cells, chosen1)
            status = "pass" if best_single < fold else ("fail" if hyp else "hypothesis-failure")
            out.append(LemmaVerdict(f"intersection-R1 {label}", status,
                                    {"fold": fold, "t": t, "hypothesis": hyp, "cells": len(chosen1),
                                     "max_element_multiplicity": best_single}))
    return out


def r1_primes_from(report: CountReport, X: int) -> set:
    exc = set(report.exceptional_primes)
    return {p for p in primes_up_to(max(X, 2)) if p not in exc}
