# tests/test_utils.py
from fractions import Fraction
from math import log, sqrt

import numpy as np
import pytest

from src.utils import (
    ceil_log2,
    floor_log2,
    floor_sqrt,
    jsonable,
    ln_lower,
    ln_upper,
    log2_bounds,
    solve_increasing,
    to_fraction,
)


@pytest.mark.parametrize(
    "value, expected",
    [
        (3, Fraction(3)),
        ("3/8", Fraction(3, 8)),
        (" 0.25 ", Fraction(1, 4)),
        (0.1, Fraction(1, 10)),
        ([5, 20], Fraction(1, 4)),
        (np.int64(7), Fraction(7)),
        (Fraction(2, 3), Fraction(2, 3)),
    ],
)
def test_to_fraction_accepts_user_rationals(value, expected):
    assert to_fraction(value) == expected


def test_to_fraction_rejects_bad_input():
    with pytest.raises(TypeError):
        to_fraction(True)
    with pytest.raises(TypeError):
        to_fraction({"num": 1})
    with pytest.raises(ValueError):
        to_fraction("three eighths")
    with pytest.raises(ZeroDivisionError):
        to_fraction([1, 0])


def test_jsonable_converts_nested_values():
    data = {"a": Fraction(1, 3), "b": (np.int64(2), [Fraction(4)]), 5: None, "c": np.array([1, 2])}
    assert jsonable(data) == {"a": [1, 3], "b": [2, [[4, 1]]], "5": None, "c": [1, 2]}


def test_jsonable_rejects_unknown_types():
    with pytest.raises(TypeError):
        jsonable(object())


@pytest.mark.parametrize(
    "x, floor, ceil",
    [
        (Fraction(1), 0, 0),
        (Fraction(8), 3, 3),
        (Fraction(9), 3, 4),
        (Fraction(1, 4), -2, -2),
        (Fraction(1, 3), -2, -1),
        (Fraction(7, 2), 1, 2),
    ],
)
def test_floor_and_ceil_log2(x, floor, ceil):
    assert floor_log2(x) == floor
    assert ceil_log2(x) == ceil


def test_log2_helpers_reject_non_positive():
    with pytest.raises(ValueError):
        floor_log2(Fraction(0))
    with pytest.raises(ValueError):
        log2_bounds(Fraction(-1), 4)


@pytest.mark.parametrize("x", [Fraction(3), Fraction(10), Fraction(1, 7), Fraction(5, 3), Fraction(1000)])
def test_log2_bounds_enclose_the_true_value(x):
    lower, upper = log2_bounds(x, 8)
    true = log(float(x), 2)
    assert float(lower) <= true + 1e-12
    assert true <= float(upper) + 1e-12
    assert upper - lower <= Fraction(1, 2**8)


def test_log2_bounds_are_exact_on_powers_of_two():
    assert log2_bounds(Fraction(16), 8) == (Fraction(4), Fraction(4))
    assert log2_bounds(Fraction(1, 8), 8) == (Fraction(-3), Fraction(-3))


@pytest.mark.parametrize("x", [Fraction(2), Fraction(3), Fraction(1, 5), Fraction(100)])
def test_ln_bounds_bracket_natural_log(x):
    assert float(ln_lower(x, 8)) <= log(float(x)) <= float(ln_upper(x, 8))


def test_floor_sqrt_is_a_lower_grid_point():
    for x in [Fraction(2), Fraction(1, 3), Fraction(9, 4), Fraction(0)]:
        r = floor_sqrt(x, 8)
        assert r * r <= x
        assert (r + Fraction(1, 2**8)) ** 2 > x
    assert floor_sqrt(Fraction(9, 4), 8) == Fraction(3, 2)
    with pytest.raises(ValueError):
        floor_sqrt(Fraction(-1), 8)


def test_solve_increasing_finds_largest_grid_point():
    # L^2 <= 2 on the 2^-8 grid starting at 1
    L = solve_increasing(lambda v: v * v, Fraction(2), 8)
    assert L * L <= 2
    assert (L + Fraction(1, 256)) ** 2 > 2
    assert abs(float(L) - sqrt(2)) < 1 / 256


def test_solve_increasing_returns_start_when_target_is_below():
    assert solve_increasing(lambda v: v, Fraction(1, 2), 8, start=Fraction(1)) == Fraction(1)
