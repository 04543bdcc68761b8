"""Multiplicative functions given by their values at primes.

Values are exact (SplitElem, or CycElem when the conductor is not a prime)
or numeric (Approx).  Only square-free arguments are supported.
"""
from __future__ import annotations

import json
import random
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import jsonschema

from .arith import is_prime
from .cyclotomic import CycElem
from .expsums import birch_histogram, kloosterman_histogram, salie_histogram
from .sieve import FactoredInteger, factor, primorial
from .splitfield import SplitElem, kloosterman_split


class NonSquarefreeError(ValueError):
    pass


@dataclass(frozen=True)
class Approx:
    """A complex number known up to an absolute error."""
    value: complex
    err: float = 0.0

    def __mul__(self, other):
        other = as_approx(other)
        v = self.value * other.value
        err = abs(self.value) * other.err + abs(other.value) * self.err + self.err * other.err
        return Approx(v, err + abs(v) * 2.3e-16)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.value == 0 and self.err == 0


def as_approx(v) -> Approx:
    if isinstance(v, Approx):
        return v
    if isinstance(v, SplitElem):
        val, err = v.to_complex()
        return Approx(val, err)
    if isinstance(v, CycElem):
        return Approx(complex(v.to_complex(60)), v.error_bound(60))
    if isinstance(v, (int, Fraction)):
        return Approx(complex(float(v)), abs(float(v)) * 1.2e-16)
    return Approx(complex(v), 0.0)


def as_exact(v):
    """Normalize an exact value to SplitElem when possible, else CycElem; None if numeric."""
    if isinstance(v, SplitElem):
        return v
    if isinstance(v, (int, Fraction)):
        return SplitElem(v)
    if isinstance(v, CycElem):
        try:
            return SplitElem.from_cycelem(v)
        except ValueError:
            return v
    return None


def multiply(values):
    """Product with exact arithmetic when every factor is exact."""
    exact = [as_exact(v) for v in values]
    if all(e is not None for e in exact):
        if all(isinstance(e, SplitElem) for e in exact):
            out = SplitElem(1)
            for e in exact:
                out = out * e
            return out
        out = CycElem.rational(1)
        for e in exact:
            out = out * (e.to_cycelem() if isinstance(e, SplitElem) else e)
        return out
    out = Approx(1.0)
    for v in values:
        out = out * as_approx(v)
    return out


def is_zero_value(v) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == 0
    return v.is_zero()


class _LRU:
    """Bounded memo.  Values are deterministic, so concurrent fills of the
    same key are benign: whichever write lands last stores an equal value."""

    def __init__(self, maxsize: int = 512):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get_or_compute(self, key, fn):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        val = fn()  # computed outside the lock
        with self._lock:
            self._data[key] = val
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return val

    def __len__(self):
        return len(self._data)


@dataclass
class MultFunSpec:
    kind: str  # table | sharpness-k | sharpness-squarefree | file
    prime_value_fn: Callable[[int], object]
    eta_values: tuple = (Fraction(1),)
    description: dict = field(default_factory=dict)
    cache_size: int = 512

    def __post_init__(self):
        if not self.eta_values:
            raise ValueError("eta sequence is empty")
        for e in self.eta_values:
            if is_zero_value(e):
                raise ValueError("eta values must be nonzero")
        self._cache = _LRU(self.cache_size)

    def eta(self, k: int = 1):
        """eta_k; sequences shorter than k repeat their last entry."""
        if k < 1:
            raise ValueError("eta is indexed from 1")
        return self.eta_values[min(k, len(self.eta_values)) - 1]

    def at_prime(self, p: int):
        return self._cache.get_or_compute(p, lambda: self.prime_value_fn(p))

    def __call__(self, n) -> object:
        return eval_squarefree(self, n)


def eval_squarefree(f: MultFunSpec, n) -> object:
    if not isinstance(n, FactoredInteger):
        n = factor(int(n))
    if not n.squarefree:
        raise NonSquarefreeError(f"{n.n} is not square-free")
    if n.n == 1:
        return SplitElem(1)
    return multiply([f.at_prime(p) for p in n.primes])


def _parse_eta(eta):
    if isinstance(eta, (list, tuple)):
        return tuple(_parse_value(e) for e in eta)
    return (_parse_value(eta),)


def _exact_div(value: SplitElem, eta):
    ex = as_exact(eta)
    if isinstance(ex, SplitElem) and ex.is_rational() is not None:
        return value / ex.is_rational()
    return Approx(as_approx(value).value / as_approx(eta).value, as_approx(value).err / abs(as_approx(eta).value))


def constant_one(eta=1) -> MultFunSpec:
    return MultFunSpec("table", lambda p: SplitElem(1), _parse_eta(eta),
                       {"default": "one", "primes": {}})


def sharpness_squarefree(a: int, b: int, eta=1) -> MultFunSpec:
    """f(p) = S(a,b;p)/eta for every prime p."""
    if a * b == 0:
        raise ValueError("need ab != 0")
    etas = _parse_eta(eta)
    if any(is_zero_value(e) for e in etas):
        raise ValueError("eta must be nonzero")

    def value(p):
        return _exact_div(SplitElem.from_histogram(p, kloosterman_histogram(a, b, p)), etas[0])

    return MultFunSpec("sharpness-squarefree", value, etas,
                       {"default": "kl_match", "a": a, "b": b, "primes": {}})


def sharpness_k(a: int, b: int, eta=1, k: int = 2) -> MultFunSpec:
    """f(p)=1 for p | L_k and f(p) = S(a,b;p L_k)/eta otherwise."""
    if a * b == 0:
        raise ValueError("need ab != 0")
    if k < 2:
        raise ValueError("k must be at least 2")
    etas = _parse_eta(eta)
    if any(is_zero_value(e) for e in etas):
        raise ValueError("eta must be nonzero")
    L = primorial(k)
    small = [q for q, _ in factor(L).prime_factors]

    def value(p):
        if L % p == 0:
            return SplitElem(1)
        return _exact_div(kloosterman_split(a, b, small + [p]), etas[0])

    return MultFunSpec("sharpness-k", value, etas,
                       {"a": a, "b": b, "k": k, "L_k": L})


def random_table(seed: int, eta=1, height: int = 3) -> MultFunSpec:
    """Seeded rational prime values with numerators and denominators in [-height, height]."""

    def value(p):
        rng = random.Random(f"{seed}:{p}")
        num = rng.choice([x for x in range(-height, height + 1) if x])
        den = rng.randint(1, height)
        return SplitElem(Fraction(num, den))

    return MultFunSpec("table", value, _parse_eta(eta),
                       {"default": f"random:{seed}:{height}", "primes": {}})


# JSON files -------------------------------------------------------------------

_VALUE_SCHEMA = {
    "oneOf": [
        {"type": "string", "pattern": r"^-?\d+(/\d+)?$"},
        {"type": "integer"},
        {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+$"}, "minItems": 2, "maxItems": 2},
        {"type": "object", "required": ["re", "im"],
         "properties": {"re": {"type": ["number", "string"]}, "im": {"type": ["number", "string"]}}},
        {"type": "object", "required": ["conductor", "coeffs"],
         "properties": {"conductor": {"type": "integer", "minimum": 1},
                        "coeffs": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}}}},
    ]
}

MULTFUN_SCHEMA = {
    "type": "object",
    "required": ["default"],
    "properties": {
        # a top-level list is always read as the sequence eta_1, eta_2, ...
        "eta": {"anyOf": [_VALUE_SCHEMA, {"type": "array", "items": _VALUE_SCHEMA, "minItems": 1}]},
        "primes": {"type": "object", "patternProperties": {r"^\d+$": _VALUE_SCHEMA}, "additionalProperties": False},
        "default": {"type": "string", "pattern": r"^(one|kl_match|kl_ratio|expr:.+)$"},
        "a": {"type": "integer"},
        "b": {"type": "integer"},
    },
    "patternProperties": {r"^\d+$": _VALUE_SCHEMA},
    "additionalProperties": False,
}


def _parse_value(v):
    if isinstance(v, bool):
        raise ValueError("boolean is not a value")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)):
        return Fraction(int(v[0]), int(v[1]))
    if isinstance(v, dict) and "conductor" in v:
        return CycElem.from_json(v)
    if isinstance(v, dict):
        return complex(float(v["re"]), float(v["im"]))
    if isinstance(v, (Fraction, SplitElem, CycElem, complex, Approx)):
        return v
    raise ValueError(f"cannot parse value {v!r}")


def _value_json(v):
    if isinstance(v, SplitElem):
        r = v.is_rational()
        v = r if r is not None else v.to_cycelem()
    if isinstance(v, Fraction):
        return [str(v.numerator), str(v.denominator)]
    if isinstance(v, int):
        return [str(v), "1"]
    if isinstance(v, CycElem):
        r = v.is_rational()
        return [str(r.numerator), str(r.denominator)] if r is not None else v.to_json()
    if isinstance(v, Approx):
        v = v.value
    return {"re": repr(float(complex(v).real)), "im": repr(float(complex(v).imag))}


def _default_rule(rule: str, a: int, b: int, etas):
    if rule == "one":
        return lambda p: SplitElem(1)
    if rule in ("kl_match", "kl_ratio"):
        base = sharpness_squarefree(a, b, etas)
        return base.prime_value_fn
    if rule.startswith("expr:"):
        parts = [s.strip() for s in rule[5:].split(",")]
        if len(parts) != 4:
            raise ValueError("expr rule needs family,a,b,scale")
        fam, ea, eb, scale = parts[0], int(parts[1]), int(parts[2]), Fraction(parts[3])
        hist_fn = {"kloosterman": kloosterman_histogram, "birch": birch_histogram, "salie": salie_histogram}.get(fam)
        if hist_fn is None:
            raise ValueError(f"unknown family {fam!r} in expr rule")

        def value(p):
            if fam == "salie" and p == 2:
                raise ValueError("Salie values at p=2 are not defined here")
            return SplitElem.from_histogram(p, hist_fn(ea, eb, p), scale)

        return value
    raise ValueError(f"unknown default rule {rule!r}")


def multfun_from_dict(data: dict, a: int = 1, b: int = 1) -> MultFunSpec:
    jsonschema.validate(data, MULTFUN_SCHEMA)
    a = data.get("a", a)
    b = data.get("b", b)
    etas = _parse_eta(data.get("eta", "1"))
    if any(is_zero_value(e) for e in etas):
        raise ValueError("eta must be nonzero")
    table = {}
    for key, val in list(data.get("primes", {}).items()) + [(k, v) for k, v in data.items() if k.isdigit()]:
        p = int(key)
        if not is_prime(p):
            raise ValueError(f"table key {p} is not prime")
        table[p] = _parse_value(val)
    fallback = _default_rule(data["default"], a, b, etas)

    def value(p):
        if p in table:
            v = table[p]
            return as_exact(v) if as_exact(v) is not None else v
        return fallback(p)

    desc = {"default": data["default"], "a": a, "b": b,
            "primes": {str(p): _value_json(v) for p, v in sorted(table.items())}}
    return MultFunSpec("file", value, etas, desc)


def load_multfun(path, a: int = 1, b: int = 1) -> MultFunSpec:
    with open(path) as fh:
        data = json.load(fh)
    return multfun_from_dict(data, a, b)


def multfun_to_dict(f: MultFunSpec, materialize_up_to: int = 0) -> dict:
    """Serializable form.  Prime values up to the given bound are written explicitly,
    which is how constructions without a named default rule are saved."""
    from .sieve import primes_up_to

    eta = [_value_json(e) for e in f.eta_values]
    out = {"eta": eta}
    default = f.description.get("default")
    primes = dict(f.description.get("primes", {}))
    if default is None or default.startswith("random:"):
        if materialize_up_to < 2:
            raise ValueError("this function has no named default rule; pass materialize_up_to")
        default = "one"
        primes = {str(p): _value_json(f.at_prime(p)) for p in primes_up_to(materialize_up_to)}
    out["default"] = default
    out["primes"] = primes
    if "a" in f.description:
        out["a"] = f.description["a"]
        out["b"] = f.description["b"]
    return out


def save_multfun(f: MultFunSpec, path, materialize_up_to: int = 0) -> None:
    with open(path, "w") as fh:
        json.dump(multfun_to_dict(f, materialize_up_to), fh, indent=1, sort_keys=True)
