import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import direct
from twistsum.counting import (CountReport, MatchQuery, compute_matches, divisor_scan, r1_primes_from, sigma_part,
                               sweep_csv, theorem_bounds, thm1_bound, verify_divisor_lemma,
                               verify_intersection_bounds)
from twistsum.multfun import MultFunSpec, constant_one, random_table, sharpness_k, sharpness_squarefree
from twistsum.splitfield import SplitElem

SEP = 1e-12


def squarefree_with_omega(X, k):
    out = []
    for n in range(2, X + 1):
        fac = direct.factor(n)
        if all(e == 1 for _, e in fac) and len(fac) == k:
            out.append(n)
    return out


def brute_matches(X, k, lhs, rhs):
    """n in Pi_k(X) with lhs(n) = rhs(n), numerically with a separation guard."""
    found = []
    for n in squarefree_with_omega(X, k):
        d = abs(lhs(n) - rhs(n))
        assert d < 1e-25 or d > SEP, f"too close to call at n={n}"
        if d < 1e-25:
            found.append(n)
    return found


def oracle_random_value(seed, p, height=3):
    rng = random.Random(f"{seed}:{p}")
    num = rng.choice([x for x in range(-height, height + 1) if x])
    return Fraction(num, rng.randint(1, height))


# brute-force comparisons --------------------------------------------------------------

@pytest.mark.parametrize("a,b,k,X", [(1, 1, 2, 200), (2, 3, 2, 150), (1, 2, 3, 300)])
def test_sharpness_k_matches_brute_force(a, b, k, X):
    L = math.prod(direct.primes(30)[:k - 1])
    small = [p for p, _ in direct.factor(L)]

    def rhs(n):
        return math.prod((direct.kloosterman(a, b, L * p) if p not in small else 1)
                         for p, _ in direct.factor(n))

    rep = compute_matches(MatchQuery(a, b, sharpness_k(a, b, 1, k), X, k))
    assert rep.matched == brute_matches(X, k, lambda n: direct.kloosterman(a, b, n), rhs)
    assert rep.r_k == len(rep.matched)


@pytest.mark.parametrize("seed", [0, 1])
def test_random_table_matches_brute_force(seed):
    f = random_table(seed)
    X, k = 400, 2

    def rhs(n):
        return math.prod(float(oracle_random_value(seed, p)) for p, _ in direct.factor(n))

    rep = compute_matches(MatchQuery(1, 1, f, X, k))
    assert rep.matched == brute_matches(X, k, lambda n: direct.kloosterman(1, 1, n), rhs)


def test_constant_one_with_eta():
    X = 300
    rep = compute_matches(MatchQuery(1, 1, constant_one(-1), X, 2))
    assert rep.matched == brute_matches(X, 2, lambda n: direct.kloosterman(1, 1, n), lambda n: -1)


# documented examples ------------------------------------------------------------------

def test_sharpness_k_example_at_100():
    rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, 2), 100, 2))
    assert rep.r_k >= 14
    assert {2 * p for p in direct.primes(50) if p > 2} <= set(rep.matched)
    assert rep.r_k >= rep.bounds["sharpness_lower"]
    assert rep.verdicts["thm1"] and rep.verdicts["partition_identity"]


def test_small_X_gives_empty_set():
    for X in range(1, 6):
        rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, 2), X, 2))
        assert rep.matched == [] and rep.r_k == 0


def test_zero_coefficient_rejected():
    with pytest.raises(ValueError):
        MatchQuery(0, 1, constant_one(), 100, 2)
    with pytest.raises(ValueError):
        MatchQuery(1, 0, constant_one(), 100, 2)


def test_squarefree_sharpness_at_1000():
    rep = compute_matches(MatchQuery(1, 1, sharpness_squarefree(1, 1), 1000, "all"))
    primes = direct.primes(1000)
    assert len(primes) == 168
    assert set(primes) <= set(rep.matched)
    assert rep.extra["r1"] == 168
    composites = [n for n in rep.matched if n not in set(primes)]
    assert composites == [6, 30, 42, 105, 595, 858, 870, 930]  # frozen from oracles/brute_excess.py
    assert rep.verdicts["sharpness_primes"] and rep.verdicts["thm2"]


def test_one_is_reported_separately():
    rep = compute_matches(MatchQuery(1, 1, sharpness_squarefree(1, 1), 1, "all"))
    assert rep.matched == []
    assert rep.extra["n_equals_1"]["equals_eta1_f(1)"] is True
    assert rep.extra["n_equals_1"]["included_in_matched"] is False


def test_theorem_bounds_examples():
    q = MatchQuery(1, 1, constant_one(), 10**4, 2)
    got = theorem_bounds(q, "thm1")["thm1"]
    assert got == pytest.approx(669 + 7 * (2 + math.sqrt(2)) * 1000)
    t3 = theorem_bounds(q, "thm3")
    assert t3["p_f"] is None and t3["binomial_term"] == 0
    assert theorem_bounds(q, "thm3", p_f=7)["binomial_term"] == 21
    q2 = MatchQuery(1, 1, constant_one(), 3, "all")
    t2 = theorem_bounds(q2, "thm2")
    assert t2["beta"] == 16 and t2["conditional_on_C"] is True
    with pytest.raises(ValueError):
        theorem_bounds(q, "thm9")


def test_thm1_is_increasing_in_X():
    vals = [thm1_bound(1, 1, 2, X) for X in (10, 100, 1000, 10**4)]
    assert vals == sorted(vals)


def test_sigma_part_ranges():
    X, k, L = 10**4, 2, 2
    assert sigma_part(19, X, k, L) == 1
    assert sigma_part(97, X, k, L) == 2
    assert sigma_part(101, X, k, L) == 3
    assert sigma_part(467, X, k, L) == 4
    assert sigma_part(4999, X, k, L) == 4
    assert sigma_part(5003, X, k, L) == 0


def test_thm3_warning_when_hypothesis_not_evidenced():
    rep = compute_matches(MatchQuery(1, 1, random_table(3), 500, 2))
    assert rep.extra["thm3_hypothesis"] == "not-evidenced"
    assert rep.verdicts["thm3"] is None
    assert any("thm3" in w for w in rep.warnings)


def test_thm3_not_scanned():
    rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, 2), 200, 2, exceptional_scan=0))
    assert rep.extra["thm3_hypothesis"] == "not-scanned" and rep.verdicts["thm3"] is None


def test_thm3_holds_for_squarefree_sharpness():
    rep = compute_matches(MatchQuery(1, 1, sharpness_squarefree(1, 1), 2000, 3))
    assert rep.exceptional_primes == [] and rep.p_f is None
    assert rep.extra["thm3_hypothesis"] == "holds-in-range" and rep.verdicts["thm3"] is True


def test_zero_prime_values():
    f = MultFunSpec("table", lambda p: SplitElem(0) if p == 5 else SplitElem(1))
    rep = compute_matches(MatchQuery(1, 1, f, 300, 2))
    # S(1,1;n) is never 0 for square-free n, so nothing divisible by 5 can match
    assert all(n % 5 for n in rep.matched)
    assert 5 in rep.exceptional_primes


def test_exact_and_numeric_modes_agree():
    for f in (sharpness_k(1, 1, 1, 2), random_table(1), constant_one()):
        ex = compute_matches(MatchQuery(1, 1, f, 600, 2))
        nu = compute_matches(MatchQuery(1, 1, f, 600, 2, "numeric"))
        assert ex.matched == nu.matched
        assert set(nu.undecided) <= set(range(601))


def test_report_json_is_plain():
    import json
    rep = compute_matches(MatchQuery(2, 3, sharpness_k(2, 3, 1, 2), 150, 2))
    d = rep.to_json()
    json.dumps(d)
    assert all(isinstance(k, str) for k in d["partition"])
    assert isinstance(rep, CountReport)


def test_sweep_csv():
    lines = sweep_csv(1, 1, sharpness_k(1, 1, 1, 2), 2, [50, 100]).strip().splitlines()
    assert lines[0] == "X,k,r_k,thm1_bound,thm1_verdict"
    assert len(lines) == 3 and lines[2].startswith("100,2,")


# structural invariants -------------------------------------------------------------------

@settings(max_examples=12, deadline=None)
@given(st.integers(6, 800), st.sampled_from([2, 3]), st.sampled_from([(1, 1), (2, 3), (1, 2)]))
def test_partition_identity_and_cells(X, k, ab):
    a, b = ab
    rep = compute_matches(MatchQuery(a, b, sharpness_k(a, b, 1, k), X, k))
    L = math.prod(direct.primes(30)[:k - 1])
    assert sum(rep.sigma.values()) == rep.r_k
    assert sum(len(c) for c in rep.partition.values()) == rep.r_k
    for p, cell in rep.partition.items():
        assert p * L <= X
        for u in cell:
            fac = direct.factor(u)
            assert len(fac) == k - 1 and all(e == 1 and q < p for q, e in fac)
            assert u * p <= X and u * p in rep.matched


@settings(max_examples=8, deadline=None)
@given(st.integers(30, 600))
def test_matched_count_is_monotone_in_X(X):
    f = sharpness_k(1, 1, 1, 2)
    small = compute_matches(MatchQuery(1, 1, f, X, 2, exceptional_scan=0))
    big = compute_matches(MatchQuery(1, 1, f, X + 50, 2, exceptional_scan=0))
    assert set(small.matched) <= set(big.matched)


# lemma checks ------------------------------------------------------------------------------

def test_divisor_lemma_rejects_equal_elements():
    v = verify_divisor_lemma(6, 6, [5, 7], 1, 1, constant_one(), 100)
    assert v.status == "hypothesis-failure"


def test_divisor_lemma_synthetic_membership():
    # u = 11, v = 4: 11 = 4 mod 7 and 11 = -4 mod 5, so 35 | 121 - 16
    part = {5: [4, 11], 7: [4, 11]}
    ok = verify_divisor_lemma(11, 4, [5, 7], 1, 1, constant_one(), 10**3, partition=part)
    assert ok.status == "pass" and ok.detail["value"] == 105
    bad = verify_divisor_lemma(11, 3, [5, 7], 1, 1, constant_one(), 10**3, partition={5: [3, 11], 7: [3, 11]})
    assert bad.status == "fail"
    r1 = verify_divisor_lemma(29, None, [5, 7], 1, 1, constant_one(), 10**3,
                              partition={5: [29], 7: [29]}, r1_primes={5, 7})
    assert r1.status == "pass"  # 29^2 - 1 = 840
    miss = verify_divisor_lemma(29, None, [5, 7], 1, 1, constant_one(), 10**3,
                                partition={5: [29], 7: [29]}, r1_primes={5})
    assert miss.status == "hypothesis-failure"
    assert verify_divisor_lemma(4, 11, [5], 1, 1, constant_one(), 10**3, partition=part).status == \
        "hypothesis-failure"
    assert verify_divisor_lemma(4, 11, [5, 7], 5, 1, constant_one(), 10**3, partition=part).status == \
        "hypothesis-failure"


def test_divisor_lemma_membership_from_data():
    assert verify_divisor_lemma(2, 3, [5, 7], 1, 1, sharpness_k(1, 1, 1, 2), 100).status == "hypothesis-failure"


def test_intersection_bounds_on_data():
    X, k = 500, 2
    rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, k), X, k))
    r1 = r1_primes_from(rep, X)
    verdicts = verify_intersection_bounds(rep, 1, 1, k, X, r1)
    assert len(verdicts) == 6
    assert all(v.status == "pass" for v in verdicts)
    scan = divisor_scan(rep, 1, 1, r1)
    assert scan["violations"] == 0 and scan["r1_violations"] == 0


def test_intersection_bounds_vacuous_on_empty_data():
    rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, 2), 5, 2))
    verdicts = verify_intersection_bounds(rep, 1, 1, 2, 5)
    assert all(v.status == "pass" and v.detail["cells"] == 0 for v in verdicts)


def test_intersection_detects_corrupted_data():
    X, k = 10**4, 2
    rep = compute_matches(MatchQuery(1, 1, sharpness_k(1, 1, 1, k), X, k, exceptional_scan=0))
    big = [p for p in rep.partition if p > 464 and p * 2 <= X][:3]
    assert len(big) == 3
    for p in big:
        rep.partition[p] = sorted(set(rep.partition[p]) | {2, 3})
    verdicts = verify_intersection_bounds(rep, 1, 1, k, X)
    assert verdicts[0].status == "fail"
    assert divisor_scan(rep, 1, 1)["violations"] > 0
