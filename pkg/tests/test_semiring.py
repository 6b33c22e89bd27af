import math
from itertools import product

import pytest
from hypothesis import given, strategies as st

from treehom import (
    SemiringError,
    SemiringMismatch,
    Weight,
    get_semiring,
    parse_weight,
    power_index_period,
)

ALL_IDS = ["boolean", "natural", "integer", "tropical", "arctic", "z6", "z5"]


def sample_values(sr, limit=6):
    vals = list(sr.elements()) if sr.finite else list(sr.sample())
    assert len(vals) >= 2
    return vals[:limit] if len(vals) > limit else vals


@pytest.mark.parametrize("sr_id", ALL_IDS)
def test_semiring_axioms(sr_id):
    # Exhaustive on finite carriers, a sampled grid of >= 100 triples otherwise.
    sr = get_semiring(sr_id)
    vals = list(sr.elements()) if sr.finite else list(sr.sample())
    if not sr.finite:
        assert len(vals) ** 3 >= 100
    for a, b in product(vals, repeat=2):
        assert sr.add(a, b) == sr.add(b, a)
        assert sr.mul(a, b) == sr.mul(b, a)
    for a, b, c in product(vals, repeat=3):
        assert sr.add(sr.add(a, b), c) == sr.add(a, sr.add(b, c))
        assert sr.mul(sr.mul(a, b), c) == sr.mul(a, sr.mul(b, c))
        assert sr.mul(a, sr.add(b, c)) == sr.add(sr.mul(a, b), sr.mul(a, c))
    for a in vals:
        assert sr.add(a, sr.zero) == a
        assert sr.mul(a, sr.one) == a
        assert sr.mul(a, sr.zero) == sr.zero


@pytest.mark.parametrize("sr_id,expected", [
    ("boolean", True),
    ("natural", True),
    ("tropical", True),
    ("arctic", True),
    ("integer", False),
    ("z6", False),
])
def test_zero_sum_free_flags(sr_id, expected):
    assert get_semiring(sr_id).zero_sum_free is expected


@pytest.mark.parametrize("sr_id,expected", [
    ("boolean", True),
    ("natural", True),
    ("integer", True),
    ("tropical", True),
    ("arctic", True),
    ("z5", True),
    ("z6", False),
    ("z4", False),
    ("z7", True),
])
def test_zero_divisor_flags(sr_id, expected):
    assert get_semiring(sr_id).zero_divisor_free is expected


def test_zero_sum_free_flag_matches_carrier():
    # On every finite semiring the flag must agree with brute force.
    for sr_id in ("boolean", "z4", "z5", "z6", "z7"):
        sr = get_semiring(sr_id)
        vals = list(sr.elements())
        has_zero_sum = any(
            sr.add(a, b) == sr.zero and (a != sr.zero or b != sr.zero)
            for a, b in product(vals, repeat=2)
        )
        assert sr.zero_sum_free is (not has_zero_sum)


def test_zero_divisor_flag_matches_carrier():
    for sr_id in ("boolean", "z4", "z5", "z6", "z7"):
        sr = get_semiring(sr_id)
        vals = [v for v in sr.elements() if v != sr.zero]
        has_divisor = any(sr.mul(a, b) == sr.zero for a, b in product(vals, repeat=2))
        assert sr.zero_divisor_free is (not has_divisor)


def test_tropical_arithmetic():
    sr = get_semiring("tropical")
    assert sr.add(3, 5) == 3
    assert sr.mul(3, 5) == 8
    assert sr.zero == math.inf
    assert sr.one == 0
    assert sr.mul(2, math.inf) == math.inf


def test_arctic_arithmetic():
    sr = get_semiring("arctic")
    assert sr.add(3, 5) == 5
    assert sr.mul(3, 5) == 8
    assert sr.zero == -math.inf
    assert sr.mul(2, -math.inf) == -math.inf


def test_modular_arithmetic():
    sr = get_semiring("z6")
    assert sr.add(2, 4) == 0
    assert sr.mul(2, 3) == 0
    assert sr.mul(4, 5) == 2


def test_natural_addition_identity():
    sr = get_semiring("natural")
    assert sr.add(0, 7) == 7


@given(st.integers(min_value=-50, max_value=50), st.integers(min_value=-50, max_value=50),
       st.integers(min_value=-50, max_value=50))
def test_integer_distributivity(a, b, c):
    sr = get_semiring("integer")
    assert sr.mul(a, sr.add(b, c)) == sr.add(sr.mul(a, b), sr.mul(a, c))


@given(st.integers(min_value=0, max_value=60), st.integers(min_value=0, max_value=60),
       st.integers(min_value=0, max_value=60))
def test_tropical_distributivity(a, b, c):
    sr = get_semiring("tropical")
    assert sr.mul(a, sr.add(b, c)) == sr.add(sr.mul(a, b), sr.mul(a, c))


def test_weight_arithmetic_and_mismatch():
    nat = get_semiring("natural")
    trop = get_semiring("tropical")
    assert (nat.weight(2) + nat.weight(3)).value == 5
    assert (nat.weight(2) * nat.weight(3)).value == 6
    with pytest.raises(SemiringMismatch):
        nat.weight(2) + trop.weight(3)
    with pytest.raises(SemiringMismatch):
        nat.weight(2) * trop.weight(3)


def test_weight_flags():
    trop = get_semiring("tropical")
    assert trop.weight(math.inf).is_zero
    assert trop.weight(0).is_one
    assert not trop.weight(1).is_one


def test_parse_and_format_round_trip():
    cases = [
        ("tropical", "inf", math.inf),
        ("tropical", "4", 4),
        ("arctic", "-inf", -math.inf),
        ("integer", "-3", -3),
        ("natural", "12", 12),
        ("boolean", "1", 1),
        ("z6", "5", 5),
    ]
    for sr_id, text, value in cases:
        w = parse_weight(sr_id, text)
        assert w.value == value
        assert str(w) == text
        assert parse_weight(sr_id, str(w)) == w


def test_parse_rejects_bad_literals():
    with pytest.raises(SemiringError):
        parse_weight("natural", "-1")
    with pytest.raises(SemiringError):
        parse_weight("boolean", "2")
    with pytest.raises(SemiringError):
        parse_weight("z6", "6")
    with pytest.raises(SemiringError):
        parse_weight("tropical", "x")


def test_get_semiring_registry():
    assert get_semiring("natural") is get_semiring("natural")
    assert get_semiring("z6").k == 6
    with pytest.raises(SemiringError):
        get_semiring("z1")
    with pytest.raises(SemiringError):
        get_semiring("fancy")


def test_power_index_period_frozen_values():
    z6 = get_semiring("z6")
    assert power_index_period(z6.weight(2)) == (1, 2)
    assert power_index_period(z6.weight(1)) == (0, 1)
    assert power_index_period(z6.weight(3)) == (1, 1)
    boolean = get_semiring("boolean")
    assert power_index_period(boolean.weight(0)) == (1, 1)
    assert power_index_period(boolean.weight(1)) == (0, 1)


def test_power_index_period_definition():
    # (i, p) really is the least lasso of the power sequence.
    for sr_id in ("boolean", "z4", "z5", "z6", "z7", "z8"):
        sr = get_semiring(sr_id)
        for v in sr.elements():
            i, p = power_index_period(sr.weight(v))
            powers = [sr.one]
            for _ in range(i + 2 * p + 2):
                powers.append(sr.mul(powers[-1], v))
            assert powers[i + p] == powers[i]
            assert all(powers[j + q] != powers[j]
                       for j in range(i + 1) for q in range(1, p + 1)
                       if (j, q) != (i, p))


def test_power_index_period_rejects_infinite():
    with pytest.raises(SemiringError):
        power_index_period(get_semiring("natural").weight(2))


def test_weight_is_hashable_and_frozen():
    w = get_semiring("natural").weight(3)
    assert hash(w) == hash(Weight(get_semiring("natural"), 3))
    with pytest.raises(AttributeError):
        w.value = 4
