"""Set systems whose t-wise intersections have at most one element.

If every t of the subsets S_1..S_m of an N-set share at most one point, then
sum |S_i| <= m + N sqrt(m(t-1)).  Everything here is decided in integers.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations

HYPOTHESIS_FAILS = "hypothesis_fails"
BOUND_HOLDS = "bound_holds"
COUNTEREXAMPLE = "COUNTEREXAMPLE"


@dataclass(frozen=True)
class SetSystem:
    ground_size: int
    subsets: tuple
    t: int = 2

    def __post_init__(self):
        if self.ground_size < 0:
            raise ValueError("ground size must be nonnegative")
        if self.t < 1:
            raise ValueError("t must be at least 1")
        subs = tuple(frozenset(s) for s in self.subsets)
        for s in subs:
            if any(not (0 <= x < self.ground_size) for x in s):
                raise ValueError("subset leaves the ground set")
        object.__setattr__(self, "subsets", subs)

    @property
    def m(self) -> int:
        return len(self.subsets)

    def to_json(self) -> dict:
        return {"N": self.ground_size, "t": self.t, "subsets": [sorted(s) for s in self.subsets]}

    @classmethod
    def from_json(cls, d: dict) -> "SetSystem":
        return cls(int(d["N"]), tuple(d["subsets"]), int(d.get("t", 2)))


def extremal_bound(m: int, N: int, t: int) -> float:
    if m < 0 or N < 0 or t < 1:
        raise ValueError("need m, N >= 0 and t >= 1")
    return m + N * math.sqrt(m * (t - 1))


def within_bound(E: int, m: int, N: int, t: int) -> bool:
    """E <= m + N sqrt(m(t-1)), decided without floating point."""
    return E <= m or (E - m) ** 2 <= N * N * m * (t - 1)


def hypothesis_by_enumeration(sys: SetSystem) -> bool:
    """Every t distinct subsets share at most one element (direct enumeration)."""
    if sys.m < sys.t:
        return True
    if sys.t == 1:
        return all(len(s) <= 1 for s in sys.subsets)
    for group in combinations(sys.subsets, sys.t):
        common = group[0].intersection(*group[1:])
        if len(common) > 1:
            return False
    return True


def hypothesis_by_pair_degree(sys: SetSystem) -> bool:
    """Every 2-element subset of the ground set lies in at most t-1 of the S_i."""
    if sys.t == 1:
        return all(len(s) <= 1 for s in sys.subsets)
    deg: dict = {}
    for s in sys.subsets:
        for pair in combinations(sorted(s), 2):
            d = deg.get(pair, 0) + 1
            if d > sys.t - 1:
                return False
            deg[pair] = d
    return True


def check_hypothesis(sys: SetSystem, method: str = "pair-degree") -> bool:
    if method == "enumeration":
        return hypothesis_by_enumeration(sys)
    if method == "pair-degree":
        return hypothesis_by_pair_degree(sys)
    raise ValueError(f"unknown method {method!r}")


def double_count_holds(sys: SetSystem) -> bool:
    lhs = sum(math.comb(len(s), 2) for s in sys.subsets)
    return lhs <= (sys.t - 1) * math.comb(sys.ground_size, 2)


def check_lemma(sys: SetSystem) -> str:
    if not hypothesis_by_pair_degree(sys):
        return HYPOTHESIS_FAILS
    E = sum(len(s) for s in sys.subsets)
    if within_bound(E, sys.m, sys.ground_size, sys.t) and double_count_holds(sys):
        return BOUND_HOLDS
    return COUNTEREXAMPLE


def random_system(rng: random.Random, max_N: int = 30, max_m: int = 20, max_t: int = 4,
                  density: float | None = None) -> SetSystem:
    N = rng.randint(1, max_N)
    m = rng.randint(0, max_m)
    t = rng.randint(1, max_t)
    dens = rng.random() * 0.5 if density is None else density
    subs = tuple(frozenset(x for x in range(N) if rng.random() < dens) for _ in range(m))
    return SetSystem(N, subs, t)


def random_valid_system(rng: random.Random, max_N: int = 30, max_m: int = 20, max_t: int = 4) -> SetSystem:
    """A random system built greedily so the hypothesis holds: points are only added
    when no pair would exceed degree t-1."""
    N = rng.randint(1, max_N)
    m = rng.randint(0, max_m)
    t = rng.randint(1, max_t)
    target = rng.random()
    deg: dict = {}
    subs = []
    for _ in range(m):
        s: list = []
        for x in rng.sample(range(N), N):
            if rng.random() >= target:
                continue
            if t == 1:
                if not s:
                    s.append(x)
                continue
            if all(deg.get((min(x, y), max(x, y)), 0) < t - 1 for y in s):
                s.append(x)
        for y, z in combinations(sorted(s), 2):
            deg[(y, z)] = deg.get((y, z), 0) + 1
        subs.append(frozenset(s))
    return SetSystem(N, tuple(subs), t)


def run_trials(seed: int, trials: int, cross_checks: int = 1000) -> dict:
    """Seeded property run over hypothesis-satisfying systems (each must obey both
    inequalities), plus agreement of the two checkers on a mixed sample."""
    rng = random.Random(seed)
    counts = {HYPOTHESIS_FAILS: 0, BOUND_HOLDS: 0, COUNTEREXAMPLE: 0}
    counterexamples = []
    for _ in range(trials):
        sys = random_valid_system(rng)
        v = check_lemma(sys)
        counts[v] += 1
        if v == COUNTEREXAMPLE and len(counterexamples) < 5:
            counterexamples.append(sys.to_json())
    agree = disagree = 0
    witnesses = []
    rng2 = random.Random(seed + 1)
    for i in range(cross_checks):
        sys = random_valid_system(rng2) if i % 2 == 0 else random_system(rng2)
        if hypothesis_by_enumeration(sys) == hypothesis_by_pair_degree(sys):
            agree += 1
        else:
            disagree += 1
            if len(witnesses) < 5:
                witnesses.append(sys.to_json())
    return {"seed": seed, "trials": trials, "verdicts": counts, "counterexamples": counterexamples,
            "cross_checks": cross_checks, "checker_agreement": agree, "checker_disagreement": disagree,
            "disagreement_witnesses": witnesses,
            "pass": counts[COUNTEREXAMPLE] == 0 and counts[HYPOTHESIS_FAILS] == 0 and disagree == 0}
