"""The named lemma suites: exhaustive finite checks of the algebraic facts used
in the counting arguments, each returning a machine-readable verdict."""
from __future__ import annotations

from types import SimpleNamespace

import mpmath
import numpy as np

from . import combinatorics, counting, kclass
from .arith import factorize, is_squarefree, jacobi_symbol, unit_table
from .cyclotomic import CycElem, lambda_valuation_batch, root_power
from .expsums import kloosterman, kloosterman_crt, kloosterman_histogram, numeric_batch, numeric_from_histogram, salie_histogram
from .multfun import sharpness_k, sharpness_squarefree
from .sieve import primes_up_to

SUITE_NAMES = ("congruence", "twisted-mult", "nonvanishing", "galois", "distinct", "irrational",
               "divisor", "intersection", "extremal", "salie-formula", "livne", "weil")

DEFAULTS = {
    "congruence": {"prime_bound": 200},
    "twisted-mult": {"bound": 2000, "pairs": [[a, b] for a in (1, 2, 3) for b in (1, 2, 3)], "family_bound": 200},
    "nonvanishing": {"n_bound": 500, "pairs": [[1, 1], [1, 2], [2, 1], [2, 2]], "prime_bound": 200},
    "galois": {"prime_bound": 100},
    "distinct": {"prime_bound": 100},
    "irrational": {"prime_bound": 100},
    "divisor": {"X": 2000, "k": 2, "pairs": [[1, 1], [2, 3]]},
    "intersection": {"X": 2000, "k": 2, "pairs": [[1, 1], [2, 3]]},
    "extremal": {"seed": 0, "trials": 100000, "cross_checks": 1000},
    "salie-formula": {"prime_bound": 500, "exact_bound": 60, "box": 3, "class_box": 5, "scan_bound": 200,
                      "precision_bits": 100},
    "livne": {"a": 1, "b": 1, "p_min": 7, "p_max": 100, "t": [1, 2]},
    "weil": {"prime_bound": 1000, "precision_bits": 100, "samples": 4, "seed": 0},
}


def _result(name, ok, config, summary, witnesses=()):
    return {"suite": name, "pass": bool(ok), "config": config, "summary": summary,
            "witnesses": list(witnesses)[:20]}


def _pair_histograms(p: int, a: int) -> np.ndarray:
    """Row b holds the phase histogram of S(a, b; p), b = 0..p-1."""
    x, xinv = unit_table(p)
    bs = np.arange(p, dtype=np.int64)
    phases = (a * x[None, :] + bs[:, None] * xinv[None, :]) % p
    flat = (bs[:, None] * p + phases).ravel()
    return np.bincount(flat, minlength=p * p).reshape(p, p)


def _kl_rows(p: int) -> np.ndarray:
    """Row c holds the histogram of Kl(c, p) = S(c, 1; p), c = 0..p-1."""
    x, xinv = unit_table(p)
    cs = np.arange(p, dtype=np.int64)
    phases = (cs[:, None] * x[None, :] + xinv[None, :]) % p
    flat = (cs[:, None] * p + phases).ravel()
    return np.bincount(flat, minlength=p * p).reshape(p, p)


def _reduced_rows(h: np.ndarray, p: int) -> np.ndarray:
    return h[:, :p - 1] - h[:, p - 1:p]


def _row_classes(rows: np.ndarray) -> list:
    """Label each integer row by its primitive representative up to sign; zero rows get None."""
    out = []
    for r in rows:
        nz = np.flatnonzero(r)
        if len(nz) == 0:
            out.append(None)
            continue
        g = int(np.gcd.reduce(np.abs(r[nz])))
        if r[nz[0]] < 0:
            g = -g
        out.append((r // g).tobytes())
    return out


# suites -------------------------------------------------------------------------------

def suite_congruence(prime_bound=200):
    fails, checked = [], 0
    for p in primes_up_to(prime_bound):
        for a in range(p):
            h = _pair_histograms(p, a)
            h[:, 0] += 1  # S + 1
            v = lambda_valuation_batch(_reduced_rows(h, p), p, limit=1)
            bad = np.flatnonzero(v < 1)
            checked += p
            fails.extend({"p": p, "a": a, "b": int(b)} for b in bad)
    return _result("congruence", not fails, {"prime_bound": prime_bound},
                   {"checked": checked, "failures": len(fails)}, fails)


def suite_twisted_mult(bound=2000, pairs=None, family_bound=200):
    pairs = pairs or DEFAULTS["twisted-mult"]["pairs"]
    fails, checked = [], 0
    for c in range(1, bound + 1):
        fac = factorize(c) if c > 1 else []
        if any(e > 1 for _, e in fac):
            continue
        ps = [p for p, _ in fac] or [1]
        for a, b in pairs:
            checked += 1
            if kloosterman_crt(a, b, ps).exact != kloosterman(a, b, c).exact:
                fails.append({"c": c, "a": a, "b": b})
    fam = kclass.check_t_multiplicative(kclass.FamilyHandle("kloosterman", 1, 1), family_bound)
    ok = not fails and fam.passed
    return _result("twisted-mult", ok, {"bound": bound, "pairs": pairs, "family_bound": family_bound},
                   {"crt_checked": checked, "crt_failures": len(fails), "family_check": fam.to_json()}, fails)


def suite_nonvanishing(n_bound=500, pairs=None, prime_bound=200):
    pairs = pairs or DEFAULTS["nonvanishing"]["pairs"]
    fails, checked = [], 0
    for n in range(1, n_bound + 1):
        if not is_squarefree(n):
            continue
        for a, b in pairs:
            checked += 1
            if kloosterman(a, b, n).exact.is_zero():
                fails.append({"n": n, "a": a, "b": b})
    prime_checks = [kclass.check_nonvanishing(kclass.FamilyHandle("kloosterman", a, b), prime_bound)
                    for a, b in pairs]
    ok = not fails and all(v.passed for v in prime_checks)
    return _result("nonvanishing", ok, {"n_bound": n_bound, "pairs": pairs, "prime_bound": prime_bound},
                   {"checked": checked, "failures": len(fails),
                    "prime_twists": [v.to_json() for v in prime_checks]}, fails)


def suite_galois(prime_bound=100):
    fails, checked = [], 0
    for p in primes_up_to(prime_bound):
        kl_vals = {c: CycElem.from_group_ring(p, h) for c, h in enumerate(_kl_rows(p)) if c}
        for a in range(1, p):
            lhs = CycElem.rational(0)
            for u in range(1, p):
                lhs = lhs + kl_vals[a].galois(u)
            rhs = CycElem.rational(0)
            for u in range(1, p):
                rhs = rhs + kl_vals[a * u * u % p]
            checked += 1
            if lhs != rhs:
                fails.append({"p": p, "a": a})
    return _result("galois", not fails, {"prime_bound": prime_bound},
                   {"checked": checked, "failures": len(fails)}, fails)


def suite_distinct(prime_bound=100):
    fails, checked = [], 0
    for p in primes_up_to(prime_bound):
        if p == 2:
            continue
        rows = _reduced_rows(_kl_rows(p)[1:], p)
        seen: dict = {}
        for a, r in enumerate(rows, start=1):
            key = r.tobytes()
            if key in seen:
                fails.append({"p": p, "a": seen[key], "b": a})
            seen.setdefault(key, a)
        checked += p - 1
    return _result("distinct", not fails, {"prime_bound": prime_bound},
                   {"values_checked": checked, "collisions": len(fails)}, fails)


def suite_irrational(prime_bound=100):
    """All a, b, t in F_p^*.  S(a,b;p) and Kl(ab,p) share one histogram (substitute
    x -> b x); that identity is checked for every pair, after which the ratio test
    for (a,b,t) compares the classes of Kl(ab) and Kl(ab t^2)."""
    fails, identity_fails, checked = [], [], 0
    for p in primes_up_to(prime_bound):
        kl = _kl_rows(p)
        for a in range(1, p):
            h = _pair_histograms(p, a)
            for b in range(1, p):
                if not np.array_equal(h[b], kl[a * b % p]):
                    identity_fails.append({"p": p, "a": a, "b": b})
        classes = _row_classes(_reduced_rows(kl, p))
        for c in range(1, p):
            for t in range(1, p):
                rational = classes[c] is not None and classes[c] == classes[c * t * t % p]
                pm = t % p in (1, p - 1)
                if rational != pm:
                    # every (a, b) with ab = c shares this outcome
                    fails.append({"p": p, "ab": c, "t": t, "rational": rational})
            checked += (p - 1) ** 2
    ok = not fails and not identity_fails
    return _result("irrational", ok, {"prime_bound": prime_bound},
                   {"triples_checked": checked, "failures": len(fails),
                    "pair_identity_failures": len(identity_fails)}, fails + identity_fails)


def _constructions(a, b, k):
    return {"sharpness_k": sharpness_k(a, b, 1, k), "sharpness_squarefree": sharpness_squarefree(a, b)}


def _report_and_r1(a, b, f, X, k):
    rep = counting.compute_matches(counting.MatchQuery(a, b, f, X, k))
    return rep, counting.r1_primes_from(rep, X)


def suite_divisor(X=2000, k=2, pairs=None):
    pairs = pairs or DEFAULTS["divisor"]["pairs"]
    rows, witnesses, ok = [], [], True
    for a, b in pairs:
        for name, f in _constructions(a, b, k).items():
            rep, r1 = _report_and_r1(a, b, f, X, k)
            scan = counting.divisor_scan(rep, a, b, r1)
            bad = scan["violations"] + scan["r1_violations"]
            ok &= bad == 0
            witnesses.extend(scan["witnesses"])
            rows.append({"a": a, "b": b, "f": name, "r_k": rep.r_k, **{k2: v for k2, v in scan.items()
                                                                        if k2 != "witnesses"}})
    return _result("divisor", ok, {"X": X, "k": k, "pairs": pairs}, {"runs": rows}, witnesses)


def suite_intersection(X=2000, k=2, pairs=None):
    """The three range bounds and their R_1 versions, for every X' <= X."""
    pairs = pairs or DEFAULTS["intersection"]["pairs"]
    rows, witnesses, ok = [], [], True
    for a, b in pairs:
        for name, f in _constructions(a, b, k).items():
            rep, r1 = _report_and_r1(a, b, f, X, k)
            status = {"pass": 0, "fail": 0, "hypothesis-failure": 0}
            for Xp in range(1, X + 1):
                part = {p: [u for u in cell if p * u <= Xp] for p, cell in rep.partition.items()}
                part = {p: c for p, c in part.items() if c}
                view = SimpleNamespace(partition=part)
                r1p = {p for p in r1 if p <= Xp}
                for v in counting.verify_intersection_bounds(view, a, b, k, Xp, r1p):
                    status[v.status] += 1
                    if v.status == "fail":
                        ok = False
                        witnesses.append({"a": a, "b": b, "f": name, "X": Xp, **v.to_json()})
            rows.append({"a": a, "b": b, "f": name, "checks": status})
    return _result("intersection", ok, {"X": X, "k": k, "pairs": pairs}, {"runs": rows}, witnesses)


def suite_extremal(seed=0, trials=100000, cross_checks=1000):
    res = combinatorics.run_trials(seed, trials, cross_checks)
    return _result("extremal", res["pass"], {"seed": seed, "trials": trials, "cross_checks": cross_checks},
                   {k: v for k, v in res.items() if k not in ("counterexamples", "disagreement_witnesses")},
                   res["counterexamples"] + res["disagreement_witnesses"])


def _gauss_hist(a: int, p: int) -> np.ndarray:
    y = np.arange(p, dtype=np.int64)
    return np.bincount(a * y * y % p, minlength=p)


def _sqrt_mod(n: int, p: int) -> int:
    n %= p
    return next(x for x in range(1, p) if x * x % p == n)


def suite_salie_formula(prime_bound=500, exact_bound=60, box=3, class_box=5, scan_bound=200,
                        precision_bits=100):
    pairs = [(a, b) for a in range(-box, box + 1) for b in range(-box, box + 1) if a * b]
    tol = mpmath.mpf(2) ** -60
    formula_fail, vanish_fail, exact_fail = [], [], []
    formula_checked = exact_checked = vanish_checked = degenerate = 0
    for p in primes_up_to(prime_bound):
        if p == 2:
            continue
        for a, b in pairs:
            hist = salie_histogram(a, b, p)
            chi = jacobi_symbol(a * b, p)
            vanishes = bool((hist == hist[0]).all())
            if a % p == 0 and b % p == 0:
                # the bare character sum over units: zero for a reason unrelated to (ab/p)
                degenerate += 1
                continue
            vanish_checked += 1
            if vanishes != (chi == -1):
                vanish_fail.append({"p": p, "a": a, "b": b, "symbol": chi, "vanishes": vanishes})
            if chi != 1:
                continue
            x = _sqrt_mod(a * b, p)
            val, err = numeric_from_histogram(hist, p, precision_bits)
            g, gerr = numeric_from_histogram(_gauss_hist(a, p), p, precision_bits)
            with mpmath.workprec(precision_bits + 20):
                two_cos = 2 * mpmath.cospi(mpmath.mpf(4 * x) / p)
                diff = abs(val - two_cos * g)
            formula_checked += 1
            if diff > tol + err + 2 * gerr:
                formula_fail.append({"p": p, "a": a, "b": b, "diff": mpmath.nstr(diff, 5)})
            if p <= exact_bound:
                exact_checked += 1
                cos_elem = root_power(p, 2 * x) + root_power(p, (-2 * x) % p)
                if CycElem.from_group_ring(p, hist) != cos_elem * CycElem.from_group_ring(p, _gauss_hist(a, p)):
                    exact_fail.append({"p": p, "a": a, "b": b})
    class_rows, class_fail = [], []
    for a in range(-class_box, class_box + 1):
        for b in range(-class_box, class_box + 1):
            if a * b == 0:
                continue
            cond = kclass.salie_condition(a, b)
            bad = kclass.salie_bad_prime_scan(a, b, scan_bound)
            agree = cond == (not bad)
            class_rows.append({"a": a, "b": b, "square": cond, "first_vanishing_prime": bad[0] if bad else None})
            if not agree:
                class_fail.append({"a": a, "b": b, "square": cond, "vanishing_primes": bad[:5]})
    ok = not (formula_fail or vanish_fail or exact_fail or class_fail)
    summary = {"formula_checked": formula_checked, "formula_failures": len(formula_fail),
               "exact_checked": exact_checked, "exact_failures": len(exact_fail),
               "vanishing_checked": vanish_checked, "vanishing_failures": len(vanish_fail),
               "skipped_p_divides_a_and_b": degenerate,
               "classification_pairs": len(class_rows), "classification_failures": len(class_fail)}
    cfg = {"prime_bound": prime_bound, "exact_bound": exact_bound, "box": box, "class_box": class_box,
           "scan_bound": scan_bound, "precision_bits": precision_bits}
    return _result("salie-formula", ok, cfg, summary, formula_fail + exact_fail + vanish_fail + class_fail)


def suite_livne(a=1, b=1, p_min=7, p_max=100, t=(1, 2)):
    res = kclass.livne_suite(a, b, (p_min, p_max), tuple(t))
    full = res["variants"]["full-range"]
    ok = full["displayed_pass"] == full["checked"]
    summary = {"variants": {k: {kk: vv for kk, vv in v.items() if kk != "first_failures"}
                            for k, v in res["variants"].items()},
               "derived_form_holds_everywhere": full["derived_pass"] == full["checked"],
               "valuation_exactly_l_everywhere": full["valuation_is_l"] == full["checked"],
               "nonzero_everywhere": full["nonzero"] == full["checked"]}
    return _result("livne", ok, {"a": a, "b": b, "p_min": p_min, "p_max": p_max, "t": list(t)},
                   summary, full["first_failures"])


def suite_weil(prime_bound=1000, precision_bits=100, samples=4, seed=0):
    """|S(a,b;p)| <= 2 sqrt(p) + 1e-9 for all 1 <= a, b < p.  Since S(a,b;p) = Kl(ab,p)
    (same histogram), the values Kl(c,p), c in F_p^*, cover every pair."""
    fails, checked, worst = [], 0, mpmath.mpf(0)
    rng = np.random.default_rng(seed)
    identity_fails = []
    for p in primes_up_to(prime_bound):
        kl = None
        for a, b in rng.integers(1, p, size=(samples, 2)) if p > 2 else [(1, 1)]:
            a, b = int(a), int(b)
            h = kloosterman_histogram(a, b, p)
            if kl is None:
                kl = _kl_rows(p)
            if not np.array_equal(h, kl[a * b % p]):
                identity_fails.append({"p": p, "a": a, "b": b})
    with mpmath.workprec(precision_bits + 20):
        slack = mpmath.mpf("1e-9")
        for p in primes_up_to(prime_bound):
            rows = _kl_rows(p)[1:]
            bound = 2 * mpmath.sqrt(p) + slack
            for c, (val, err) in enumerate(numeric_batch(rows, p, precision_bits), start=1):
                mag = abs(val)
                checked += 1
                worst = max(worst, mag / (2 * mpmath.sqrt(p)))
                if mag + err > bound:
                    fails.append({"p": p, "ab": c, "value": mpmath.nstr(mag, 15)})
    pairs = sum((p - 1) ** 2 for p in primes_up_to(prime_bound))
    cfg = {"prime_bound": prime_bound, "precision_bits": precision_bits, "samples": samples, "seed": seed}
    return _result("weil", not fails and not identity_fails, cfg,
                   {"values_checked": checked, "pairs_covered": pairs,
                    "max_ratio_to_2sqrtp": mpmath.nstr(worst, 12),
                    "sampled_pair_identity_checks": samples * len(primes_up_to(prime_bound)),
                    "pair_identity_failures": len(identity_fails)}, fails + identity_fails)


SUITES = {
    "congruence": suite_congruence, "twisted-mult": suite_twisted_mult, "nonvanishing": suite_nonvanishing,
    "galois": suite_galois, "distinct": suite_distinct, "irrational": suite_irrational,
    "divisor": suite_divisor, "intersection": suite_intersection, "extremal": suite_extremal,
    "salie-formula": suite_salie_formula, "livne": suite_livne, "weil": suite_weil,
}


def run_suite(name: str, **overrides) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    cfg = dict(DEFAULTS[name])
    cfg.update({k: v for k, v in overrides.items() if v is not None and k in cfg})
    return SUITES[name](**cfg)
