import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import direct
from twistsum.expsums import kloosterman_histogram
from twistsum.kclass import (EVIDENCE, FamilyHandle, birch_condition, birch_good_primes, birch_vanishing_scan,
                             check_irrational, check_kloostermanian, check_nonvanishing, check_t_multiplicative,
                             classify_birch, conjecture_probe, livne_congruence_check, livne_suite,
                             salie_bad_prime_scan, salie_condition, salie_good_primes)

nonzero = st.integers(-6, 6).filter(bool)


# Kloosterman ----------------------------------------------------------------------------

@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 3)])
def test_kloosterman_is_kloostermanian_to_200(a, b):
    res = check_kloostermanian(FamilyHandle("kloosterman", a, b), 200, 200)
    assert res["pass"], res
    assert res["label"] == EVIDENCE
    irr = res["properties"]["irrational"]
    assert irr["notes"]["converse_failure_count"] == 0


def test_birch_unit_range_t_multiplicative():
    v = check_t_multiplicative(FamilyHandle("birch", 1, 1), 100)
    assert v.passed and v.checked > 100


def test_corrupted_evaluator_is_caught():
    def broken(u, v, c):
        # Fermat-style inverse x^(c-2): right at primes, wrong at composite c
        # (a shift x^-1 + 1 would not do: it multiplies by e(v/c), which is itself twisted multiplicative)
        hist = np.zeros(c, dtype=np.int64)
        for x in range(1, c):
            if math.gcd(x, c) == 1:
                hist[(u * x + v * pow(x, max(c - 2, 0), c)) % c] += 1
        return hist

    v = check_t_multiplicative(FamilyHandle("kloosterman", 1, 1, hist_fn=broken), 40)
    assert v.status == "fail"
    w = v.witnesses[0]
    assert {"m", "n", "t"} <= set(w)


def test_handle_hist_matches_direct_sum():
    h = FamilyHandle("kloosterman", 2, 3)
    hist = h.hist(2 * 5, 3 * 5, 21)
    val = mpmath.fsum(int(c) * direct.e(j, 21) for j, c in enumerate(hist))
    assert abs(val - direct.kloosterman(10, 15, 21)) < 1e-25
    assert np.array_equal(hist, kloosterman_histogram(10, 15, 21))


# Salie ----------------------------------------------------------------------------------

def test_salie_nonvanishing_examples():
    bad = check_nonvanishing(FamilyHandle("salie", 1, 2), 5)
    assert bad.status == "fail"
    assert {"p": 5, "t": 1} in bad.witnesses
    assert check_nonvanishing(FamilyHandle("salie", 1, 1), 200).passed


def test_salie_irrational_on_good_primes():
    v = check_irrational(FamilyHandle("salie", 1, 1), 60)
    assert v.passed and v.notes["converse_failure_count"] == 0


def test_salie_condition_examples():
    assert salie_condition(2, 8)
    assert not salie_condition(1, 2)
    assert not salie_condition(1, 0)
    assert salie_condition(-1, -4) and not salie_condition(-1, 4)
    good = salie_good_primes(1, 2, 60)
    assert 5 not in good and 7 in good and 2 not in good
    assert good.members == [p for p in direct.primes(60) if p > 2 and direct.legendre(2, p) in (0, 1)]


@settings(max_examples=25, deadline=None)
@given(nonzero, nonzero)
def test_salie_condition_matches_bad_prime_scan(a, b):
    assert salie_condition(a, b) == (salie_bad_prime_scan(a, b, 200) == [])


# Birch ------------------------------------------------------------------------------------

def test_birch_condition_examples():
    assert birch_condition(1, 2) is False
    ok, trace = birch_condition(1, 2, trace=True)
    failing = [s for s in trace if not s["holds"]]
    assert failing == [{"clause": "p = 2 mod 3 and p | b => p | a", "p": 2, "holds": False}]
    assert birch_condition(0, 1) is False
    assert birch_condition(2, 4) is True
    ok, trace = birch_condition(1, 1, trace=True)
    assert not ok and [s["p"] for s in trace if not s["holds"]] == [3]


def test_birch_good_prime_examples():
    g = birch_good_primes(1, 1)
    assert 3 not in g and 5 in g and 97 in g
    assert 2 not in birch_good_primes(1, 2)
    assert 7 in birch_good_primes(2, 5)
    with pytest.raises(ValueError):
        birch_good_primes(1, 0)


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 4)])
def test_birch_condition_matches_vanishing_scan(a, b):
    vanish = [r["p"] for r in birch_vanishing_scan(a, b, 100, "full-range")]
    assert birch_condition(a, b) == (vanish == [])
    assert vanish == birch_good_primes(a, b).excluded(100)


@settings(max_examples=20, deadline=None)
@given(nonzero, nonzero)
def test_birch_excluded_primes_are_the_full_range_zeros(a, b):
    vanish = [r["p"] for r in birch_vanishing_scan(a, b, 40, "full-range")]
    assert vanish == birch_good_primes(a, b).excluded(40)
    assert birch_condition(a, b) == (vanish == [])


def test_classify_birch_reports_both_ranges():
    rep = classify_birch(1, 2, prime_bound=30, mult_bound=40)
    assert rep["pass"] is True  # the unit-range sum
    assert rep["condition"] is False and rep["clause_witnesses"][0]["p"] == 2
    full = rep["variants"]["full-range"]["properties"]["non-vanishing"]
    assert full["status"] == "fail" and full["witnesses"][0]["p"] == 2


def test_birch_irrational_on_unit_range():
    assert check_irrational(FamilyHandle("birch", 1, 1), 60).passed


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 3), (-1, 4)])
def test_good_set_soundness(a, b):
    bh = FamilyHandle("birch", a, b, variant="full-range")
    bg = birch_good_primes(a, b)
    assert check_nonvanishing(bh, 60, bg).passed
    sh = FamilyHandle("salie", a, b)
    sg = salie_good_primes(a, b)
    assert check_nonvanishing(sh, 60, sg).passed
    assert check_irrational(sh, 60, sg).passed


# Livne --------------------------------------------------------------------------------------

def test_livne_examples():
    v7 = livne_congruence_check(1, 1, 1, 7)
    assert v7.notes["l"] == 2 and v7.notes["v_B_equals_l"] and v7.notes["nonzero"]
    v11 = livne_congruence_check(1, 1, 1, 11)
    assert v11.notes["l"] == 4 and v11.notes["displayed_coefficient"] == (-4) % 11
    assert v11.notes["derived_holds"] and v11.notes["v_B_equals_l"]
    assert livne_congruence_check(1, 1, 7, 7).status == "inapplicable"
    assert livne_congruence_check(1, 1, 1, 5).status == "inapplicable"


def test_livne_leading_term_and_nonvanishing():
    out = livne_suite(1, 1, (7, 60), (1, 2), ("full-range",))["variants"]["full-range"]
    assert out["checked"] == out["valuation_is_l"] == out["nonzero"] == out["derived_pass"]
    assert out["displayed_pass"] < out["checked"]


# conjecture probe ---------------------------------------------------------------------------

def test_probe_kloosterman_case():
    rep = conjecture_probe((0, 1), (0, 1), box=2, prime_bound=23, mult_bound=30)
    assert len(rep["candidates"]) == 16 and rep["warnings"] == []
    assert rep["label"] == EVIDENCE


def test_probe_salie_type_failure():
    rep = conjecture_probe((0, 0, 1), (0, 0, 1), twist="jacobi", box=1, prime_bound=23, mult_bound=15)
    assert rep["warnings"] == []
    assert any(not r["pass"] for r in rep["pairs"])


def test_probe_degree_warning():
    rep = conjecture_probe((1,), (0, 1), box=1, prime_bound=11, mult_bound=10)
    assert rep["warnings"]
