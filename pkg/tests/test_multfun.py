import json
import random
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twistsum.cyclotomic import root_power
from twistsum.expsums import kloosterman
from twistsum.multfun import (Approx, MultFunSpec, NonSquarefreeError, constant_one, eval_squarefree, load_multfun,
                              multfun_from_dict, multfun_to_dict, random_table, save_multfun, sharpness_k,
                              sharpness_squarefree)
from twistsum.sieve import factor, primes_up_to, primorial
from twistsum.splitfield import SplitElem


def to_cyc(v):
    return v.to_cycelem() if isinstance(v, SplitElem) else v


def test_eval_examples():
    f = constant_one()
    assert eval_squarefree(f, 1) == SplitElem(1)
    assert eval_squarefree(f, 30) == SplitElem(1)
    i = root_power(4, 1)
    g = MultFunSpec("table", lambda p: {2: i, 3: Fraction(2)}.get(p, Fraction(1)))
    assert to_cyc(g(6)) == 2 * i
    with pytest.raises(NonSquarefreeError):
        f(12)


def test_eta_sequence_repeats_last_entry():
    f = constant_one(["2", "3"])
    assert (f.eta(1), f.eta(2), f.eta(7)) == (2, 3, 3)
    with pytest.raises(ValueError):
        f.eta(0)
    with pytest.raises(ValueError):
        constant_one(0)


def test_sharpness_k_examples():
    f = sharpness_k(1, 1, 1, 2)
    assert f(2) == SplitElem(1)
    assert to_cyc(f(3)) == kloosterman(1, 1, 6).exact
    g = sharpness_k(1, 1, 1, 4)
    assert all(g(p) == SplitElem(1) for p in (2, 3, 5))
    with pytest.raises(ValueError):
        sharpness_k(1, 1, 0, 2)
    with pytest.raises(ValueError):
        sharpness_k(0, 1, 1, 2)


@pytest.mark.parametrize("a,b,eta,k", [(1, 1, 1, 2), (1, 1, 1, 3), (2, 3, 1, 2)])
def test_sharpness_k_guarantee(a, b, eta, k):
    f = sharpness_k(a, b, eta, k)
    L = primorial(k)
    for p in primes_up_to(1000):
        if L % p == 0:
            continue
        assert kloosterman(a, b, p * L).exact == eta * to_cyc(f(p * L)), p


def test_sharpness_squarefree_guarantee():
    for a, b in [(1, 1), (2, 3)]:
        f = sharpness_squarefree(a, b)
        assert f(1) == SplitElem(1)
        for p in primes_up_to(1000):
            assert to_cyc(f(p)) == kloosterman(a, b, p).exact
    f = sharpness_squarefree(1, 1, "3")
    assert to_cyc(f(6)) == kloosterman(1, 1, 2).exact * kloosterman(1, 1, 3).exact * Fraction(1, 9)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 1000), st.integers(1, 1000), st.integers(0, 10))
def test_multiplicativity(m, n, seed):
    fm, fn = factor(m), factor(n)
    if not (fm.squarefree and fn.squarefree) or set(fm.primes) & set(fn.primes):
        return
    for f in (random_table(seed), sharpness_squarefree(1, 2)):
        assert f(m * n) == f(m) * f(n)


def test_numeric_values_propagate_error():
    f = MultFunSpec("table", lambda p: 1.5 + 0.5j)
    v = f(2 * 3 * 5)
    assert isinstance(v, Approx)
    assert abs(v.value - (1.5 + 0.5j) ** 3) <= v.err + 1e-15


def test_load_examples(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"2": "1", "default": "kl_ratio"}))
    f = load_multfun(p)
    assert f(2) == SplitElem(1)
    assert to_cyc(f(3)) == kloosterman(1, 1, 3).exact
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eta": "0", "default": "one"}))
    with pytest.raises(ValueError):
        load_multfun(bad)
    with pytest.raises(Exception):
        multfun_from_dict({"default": "nonsense"})
    with pytest.raises(ValueError):
        multfun_from_dict({"primes": {"4": "1"}, "default": "one"})


def test_expr_rule_and_complex_values():
    f = multfun_from_dict({"default": "expr:kloosterman,1,1,1/2", "primes": {"7": {"re": 0.5, "im": 1}}})
    assert to_cyc(f(5)) == kloosterman(1, 1, 5).exact * Fraction(1, 2)
    assert f(7).value == 0.5 + 1j


@pytest.mark.parametrize("make", [lambda: sharpness_squarefree(1, 2, "2"), lambda: constant_one(),
                                  lambda: random_table(5)])
def test_save_load_round_trip(tmp_path, make):
    f = make()
    path = tmp_path / "f.json"
    save_multfun(f, path, materialize_up_to=1000)
    g = load_multfun(path)
    for n in range(1, 1001):
        if factor(n).squarefree:
            assert f(n) == g(n), n
    assert multfun_to_dict(g)["default"] in ("one", "kl_match")


def test_cache_is_safe_under_concurrent_fill():
    calls = []

    def value(p):
        calls.append(p)
        return SplitElem.from_histogram(p, [random.Random(p).randint(0, 3) for _ in range(p)])

    f = MultFunSpec("table", value, cache_size=8)
    ref = {p: value(p) for p in primes_up_to(200)}
    out = {}

    def work(seed):
        rng = random.Random(seed)
        for p in rng.sample(primes_up_to(200), 40):
            out.setdefault(p, []).append(f.at_prime(p))

    threads = [threading.Thread(target=work, args=(s,)) for s in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(v == ref[p] for p, vs in out.items() for v in vs)
    assert len(f._cache) <= 8
