import math
import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from twistsum.combinatorics import (BOUND_HOLDS, COUNTEREXAMPLE, HYPOTHESIS_FAILS, SetSystem, check_hypothesis,
                                    check_lemma, double_count_holds, extremal_bound, random_system,
                                    random_valid_system, run_trials, within_bound)


def test_extremal_bound_examples():
    assert extremal_bound(5, 10, 1) == 5
    assert extremal_bound(3, 4, 2) == pytest.approx(3 + 4 * math.sqrt(3))
    assert extremal_bound(3, 4, 2) == pytest.approx(9.928, abs=1e-3)
    assert extremal_bound(1, 7, 3) == pytest.approx(1 + 7 * math.sqrt(2))
    with pytest.raises(ValueError):
        extremal_bound(-1, 3, 2)


def test_within_bound_is_exact_at_the_edge():
    # 4 + 3 sqrt(4) = 10 exactly; floats play no part in the comparison
    assert within_bound(10, 4, 3, 2)
    assert not within_bound(11, 4, 3, 2)
    assert within_bound(3, 4, 0, 2)


def test_hypothesis_examples():
    disjoint = SetSystem(9, ({0, 1, 2}, {3, 4}, {5, 6, 7, 8}), 2)
    assert check_hypothesis(disjoint) and check_hypothesis(disjoint, "enumeration")
    for t in (1, 2, 3, 4):
        copies = SetSystem(5, tuple({1, 3} for _ in range(t)), t)
        assert not check_hypothesis(copies)
        assert not check_hypothesis(copies, "enumeration")
        assert check_lemma(copies) == HYPOTHESIS_FAILS
    with pytest.raises(ValueError):
        check_hypothesis(disjoint, "magic")


def test_set_system_validation():
    with pytest.raises(ValueError):
        SetSystem(3, ({0, 3},), 2)
    with pytest.raises(ValueError):
        SetSystem(3, (), 0)
    s = SetSystem(4, ({0, 1}, {2}), 3)
    assert SetSystem.from_json(s.to_json()) == s


def test_empty_family_holds():
    assert check_lemma(SetSystem(6, (), 2)) == BOUND_HOLDS
    assert check_lemma(SetSystem(0, (), 1)) == BOUND_HOLDS


def test_projective_plane_is_tight_for_double_count():
    # Fano plane: 7 lines, each pair of points on exactly one line
    lines = [{0, 1, 2}, {0, 3, 4}, {0, 5, 6}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}]
    fano = SetSystem(7, tuple(lines), 2)
    assert check_lemma(fano) == BOUND_HOLDS
    assert sum(math.comb(len(s), 2) for s in fano.subsets) == math.comb(7, 2)


def test_pigeonhole_corollary():
    rng = random.Random(7)
    for _ in range(300):
        N = rng.randint(2, 9)
        pairs = list(combinations(range(N), 2))
        # any family of sets of size >= 2 with pairwise intersections <= 1 is a t=2 system
        subs, used = [], set()
        for _ in range(rng.randint(0, 40)):
            s = set(rng.sample(range(N), rng.randint(2, N)))
            ps = set(combinations(sorted(s), 2))
            if ps & used:
                continue
            used |= ps
            subs.append(s)
        sys = SetSystem(N, tuple(subs), 2)
        assert check_hypothesis(sys)
        assert sys.m <= len(pairs)


def test_run_trials_small():
    out = run_trials(0, 2000, 200)
    assert out["pass"] and out["verdicts"][COUNTEREXAMPLE] == 0
    assert out["checker_agreement"] == 200
    assert run_trials(0, 300, 50) == run_trials(0, 300, 50)


# properties ------------------------------------------------------------------------------

seeds = st.integers(0, 2**32)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_valid_systems_obey_both_inequalities(seed):
    sys = random_valid_system(random.Random(seed))
    assert check_hypothesis(sys)
    E = sum(len(s) for s in sys.subsets)
    assert within_bound(E, sys.m, sys.ground_size, sys.t)
    assert E <= extremal_bound(sys.m, sys.ground_size, sys.t) + 1e-9
    assert double_count_holds(sys)
    assert check_lemma(sys) == BOUND_HOLDS


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_checkers_agree(seed):
    rng = random.Random(seed)
    sys = random_system(rng) if seed % 2 else random_valid_system(rng)
    assert check_hypothesis(sys, "enumeration") == check_hypothesis(sys, "pair-degree")


@settings(max_examples=200, deadline=None)
@given(seeds, st.data())
def test_hypothesis_is_monotone_under_removal(seed, data):
    sys = random_system(random.Random(seed), max_m=10)
    if not sys.subsets or not check_hypothesis(sys):
        return
    i = data.draw(st.integers(0, sys.m - 1))
    smaller = SetSystem(sys.ground_size, sys.subsets[:i] + sys.subsets[i + 1:], sys.t)
    assert check_hypothesis(smaller)
