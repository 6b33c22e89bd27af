"""Commutative semirings and tagged weight arithmetic.

Every quantitative value in the package is a ``Weight``: a carrier element
tagged with the semiring it lives in.  Mixing weights from two different
semirings is a hard error, never a silent coercion.  The registry is closed:
boolean, natural, integer, tropical, arctic, and modular z<k> for k >= 2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


class SemiringError(ValueError):
    pass


class SemiringMismatch(SemiringError):
    pass


class WeightSyntaxError(SemiringError):
    pass


class Semiring:
    """Base class; instances are stateless and compared by id."""

    id: str
    carrier: str
    zero: object
    one: object
    zero_sum_free: bool
    finite: bool
    zero_divisor_free: bool

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def parse_value(self, text: str):
        raise NotImplementedError

    def format_value(self, v) -> str:
        return str(v)

    def elements(self):
        raise SemiringError(f"semiring {self.id} is infinite")

    def sample(self):
        """Deterministic sample of carrier values for law checking."""
        return self.elements()

    def weight(self, v) -> "Weight":
        return Weight(self, v)

    def parse(self, text: str) -> "Weight":
        return Weight(self, self.parse_value(text))

    @property
    def zero_weight(self) -> "Weight":
        return Weight(self, self.zero)

    @property
    def one_weight(self) -> "Weight":
        return Weight(self, self.one)

    def __eq__(self, other):
        return isinstance(other, Semiring) and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        return f"<semiring {self.id}>"


def _parse_uint(text: str, what: str):
    if not re.fullmatch(r"[0-9]+", text):
        raise WeightSyntaxError(f"invalid {what} weight literal: {text!r}")
    return int(text)


class BooleanSemiring(Semiring):
    id = "boolean"
    carrier = "{0, 1} with or/and"
    zero = 0
    one = 1
    zero_sum_free = True
    finite = True
    zero_divisor_free = True

    def add(self, a, b):
        return a | b

    def mul(self, a, b):
        return a & b

    def parse_value(self, text):
        if text not in ("0", "1"):
            raise WeightSyntaxError(f"invalid boolean weight literal: {text!r}")
        return int(text)

    def elements(self):
        return [0, 1]


class NaturalSemiring(Semiring):
    id = "natural"
    carrier = "N with + and *"
    zero = 0
    one = 1
    zero_sum_free = True
    finite = False
    zero_divisor_free = True

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def parse_value(self, text):
        return _parse_uint(text, "natural")

    def sample(self):
        return [0, 1, 2, 3, 5, 7, 32, 1024, 2**40]


class IntegerSemiring(Semiring):
    id = "integer"
    carrier = "Z with + and *"
    zero = 0
    one = 1
    zero_sum_free = False
    finite = False
    zero_divisor_free = True

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def parse_value(self, text):
        if not re.fullmatch(r"[+-]?[0-9]+", text):
            raise WeightSyntaxError(f"invalid integer weight literal: {text!r}")
        return int(text)

    def sample(self):
        return [0, 1, -1, 2, -3, 7, -10, 64, -(2**30)]


class TropicalSemiring(Semiring):
    """min/plus over N plus infinity; inf is the additive zero."""

    id = "tropical"
    carrier = "N + {inf} with min and +"
    zero = math.inf
    one = 0
    zero_sum_free = True
    finite = False
    zero_divisor_free = True

    def add(self, a, b):
        return min(a, b)

    def mul(self, a, b):
        if a == math.inf or b == math.inf:
            return math.inf
        return a + b

    def parse_value(self, text):
        if text == "inf":
            return math.inf
        return _parse_uint(text, "tropical")

    def format_value(self, v):
        return "inf" if v == math.inf else str(v)

    def sample(self):
        return [math.inf, 0, 1, 2, 3, 5, 10, 100]


class ArcticSemiring(Semiring):
    """max/plus over N plus minus-infinity; -inf is the additive zero."""

    id = "arctic"
    carrier = "N + {-inf} with max and +"
    zero = -math.inf
    one = 0
    zero_sum_free = True
    finite = False
    zero_divisor_free = True

    def add(self, a, b):
        return max(a, b)

    def mul(self, a, b):
        if a == -math.inf or b == -math.inf:
            return -math.inf
        return a + b

    def parse_value(self, text):
        if text == "-inf":
            return -math.inf
        return _parse_uint(text, "arctic")

    def format_value(self, v):
        return "-inf" if v == -math.inf else str(v)

    def sample(self):
        return [-math.inf, 0, 1, 2, 3, 5, 10, 100]


def _is_prime(k: int) -> bool:
    if k < 2:
        return False
    d = 2
    while d * d <= k:
        if k % d == 0:
            return False
        d += 1
    return True


class ModularSemiring(Semiring):
    """Integers modulo k; has zero divisors whenever k is composite."""

    zero = 0
    one = 1
    zero_sum_free = False
    finite = True

    def __init__(self, k: int):
        if k < 2:
            raise SemiringError(f"modulus must be at least 2, got {k}")
        self.k = k
        self.id = f"z{k}"
        self.carrier = f"Z/{k}Z"
        self.zero_divisor_free = _is_prime(k)

    def add(self, a, b):
        return (a + b) % self.k

    def mul(self, a, b):
        return (a * b) % self.k

    def parse_value(self, text):
        v = _parse_uint(text, self.id)
        if v >= self.k:
            raise WeightSyntaxError(
                f"residue {text} out of range for {self.id} (expected 0..{self.k - 1})"
            )
        return v

    def elements(self):
        return list(range(self.k))


@dataclass(frozen=True, slots=True)
class Weight:
    """A carrier value tagged with its semiring."""

    semiring: Semiring
    value: object

    def _check(self, other: "Weight"):
        if self.semiring != other.semiring:
            raise SemiringMismatch(
                f"cannot combine {self.semiring.id} and {other.semiring.id} weights"
            )

    def __add__(self, other: "Weight") -> "Weight":
        self._check(other)
        return Weight(self.semiring, self.semiring.add(self.value, other.value))

    def __mul__(self, other: "Weight") -> "Weight":
        self._check(other)
        return Weight(self.semiring, self.semiring.mul(self.value, other.value))

    @property
    def is_zero(self) -> bool:
        return self.value == self.semiring.zero

    @property
    def is_one(self) -> bool:
        return self.value == self.semiring.one

    def __str__(self):
        return self.semiring.format_value(self.value)

    def __repr__(self):
        return f"Weight({self.semiring.id}, {self})"


_MODULAR_ID = re.compile(r"z([0-9]+)\Z")
_CACHE: dict[str, Semiring] = {}


def get_semiring(name: str) -> Semiring:
    """Look up a semiring by id: boolean, natural, integer, tropical, arctic, z<k>."""
    key = name.strip().lower()
    if key not in _CACHE:
        if key == "boolean":
            _CACHE[key] = BooleanSemiring()
        elif key == "natural":
            _CACHE[key] = NaturalSemiring()
        elif key == "integer":
            _CACHE[key] = IntegerSemiring()
        elif key == "tropical":
            _CACHE[key] = TropicalSemiring()
        elif key == "arctic":
            _CACHE[key] = ArcticSemiring()
        else:
            m = _MODULAR_ID.fullmatch(key)
            if not m:
                raise SemiringError(f"unknown semiring: {name!r}")
            _CACHE[key] = ModularSemiring(int(m.group(1)))
    return _CACHE[key]


def parse_weight(semiring, text: str) -> Weight:
    """Parse a weight literal in the given semiring (id string or instance)."""
    sr = get_semiring(semiring) if isinstance(semiring, str) else semiring
    return sr.parse(text)


def power_index_period(w: Weight) -> tuple[int, int]:
    """Smallest (index, period) with w^(index+period) = w^index, powers from w^0 = one.

    Only defined over finite semirings, where the power sequence must cycle.
    """
    sr = w.semiring
    if not sr.finite:
        raise SemiringError(f"power index/period needs a finite semiring, got {sr.id}")
    seen: dict = {}
    v = sr.one
    e = 0
    while v not in seen:
        seen[v] = e
        v = sr.mul(v, w.value)
        e += 1
    first = seen[v]
    return first, e - first
