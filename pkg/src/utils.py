# utils.py
from fractions import Fraction
from math import isqrt
from typing import Any, Callable, Tuple

import numpy as np

from src.constants import LN2_LOWER, LN2_UPPER


def to_fraction(value: Any) -> Fraction:
    """
    Coerce a user-facing rational into a Fraction.

    Accepts ints, Fractions, strings such as "3/8" or "0.25", and [num, den] pairs
    (the JSON encoding used in traces). Floats go through their decimal repr, so
    0.1 becomes 1/10 rather than the binary expansion.

    Raises:
    - TypeError: for bools and unsupported types
    - ValueError: for malformed strings or zero denominators
    """
    if isinstance(value, bool):
        raise TypeError("Booleans are not rationals.")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if isinstance(num, bool) or isinstance(den, bool):
            raise TypeError("Booleans are not rationals.")
        return Fraction(int(num), int(den))
    raise TypeError(f"Cannot interpret {value!r} as a rational.")


def fraction_to_json(value: Fraction) -> list:
    value = Fraction(value)
    return [value.numerator, value.denominator]


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions, numpy scalars and tuples into JSON-safe values."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return fraction_to_json(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    raise TypeError(f"Value {obj!r} of type {type(obj).__name__} is not serializable.")


def floor_log2(x: Fraction) -> int:
    """Largest integer d with 2^d <= x, for x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("floor_log2 needs a positive argument.")
    d = x.numerator.bit_length() - x.denominator.bit_length()
    # 2^(d-1) < x < 2^(d+1)
    if _pow2(d) <= x:
        return d
    return d - 1


def ceil_log2(x: Fraction) -> int:
    """Smallest integer d with 2^d >= x, for x > 0."""
    d = floor_log2(x)
    return d if _pow2(d) == Fraction(x) else d + 1


def _pow2(d: int) -> Fraction:
    return Fraction(2**d) if d >= 0 else Fraction(1, 2 ** (-d))


def log2_bounds(x: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    """
    Enclose log2(x) between two multiples of 2^-bits.

    The lower end is k / 2^bits with k the largest integer such that
    2^k <= x^(2^bits); this is an exact integer comparison, so the enclosure is
    rigorous. The upper end is (k + 1) / 2^bits, tightened to k / 2^bits when x
    is an exact power.

    Parameters:
    - x (Fraction): positive argument
    - bits (int): number of fractional bits

    Returns:
    - (Fraction, Fraction): lower and upper bound
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log2_bounds needs a positive argument.")
    if bits < 0:
        raise ValueError("bits must be non-negative.")
    power = 2**bits
    p = x.numerator**power
    q = x.denominator**power
    k = p.bit_length() - q.bit_length()
    if not _pow2_times_leq(k, q, p):
        k -= 1
    lower = Fraction(k, power)
    exact = _pow2_times_eq(k, q, p)
    upper = lower if exact else Fraction(k + 1, power)
    return lower, upper


def _pow2_times_leq(k: int, q: int, p: int) -> bool:
    # 2^k * q <= p
    return (q << k) <= p if k >= 0 else q <= (p << (-k))


def _pow2_times_eq(k: int, q: int, p: int) -> bool:
    return (q << k) == p if k >= 0 else q == (p << (-k))


def ln_lower(x: Fraction, bits: int) -> Fraction:
    lo, _ = log2_bounds(x, bits)
    return lo * (LN2_LOWER if lo >= 0 else LN2_UPPER)


def ln_upper(x: Fraction, bits: int) -> Fraction:
    _, hi = log2_bounds(x, bits)
    return hi * (LN2_UPPER if hi >= 0 else LN2_LOWER)


def floor_sqrt(x: Fraction, bits: int) -> Fraction:
    """
    Largest multiple of 2^-bits that is <= sqrt(x).

    Returns:
    - Fraction: isqrt(floor(x * 4^bits)) / 2^bits
    """
    x = Fraction(x)
    if x < 0:
        raise ValueError("floor_sqrt needs a non-negative argument.")
    scaled = (x.numerator * 4**bits) // x.denominator
    return Fraction(isqrt(scaled), 2**bits)


def solve_increasing(
    fn: Callable[[Fraction], Fraction],
    target: Fraction,
    bits: int,
    start: Fraction = Fraction(1),
    verbose: bool = False,
) -> Fraction:
    """
    Largest grid point L = start + j / 2^bits with fn(L) <= target, for fn non-decreasing
    on [start, oo). Returns start when fn(start) > target.

    Parameters:
    - fn: monotone map evaluated on rationals (callers pass an upper bound of the true map
      so the returned point never overshoots the true solution)
    - target (Fraction): right-hand side (callers pass a lower bound)
    - bits (int): fractional bits of the grid
    - start (Fraction): left end of the search interval

    Returns:
    - Fraction: the grid point
    """
    scale = 2**bits
    if fn(start) > target:
        return start
    hi = 1
    while fn(start + Fraction(hi, scale)) <= target:
        hi *= 2
    lo = hi // 2 if hi > 1 else 0
    # fn(start + lo/scale) <= target < fn(start + hi/scale)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fn(start + Fraction(mid, scale)) <= target:
            lo = mid
        else:
            hi = mid
    result = start + Fraction(lo, scale)
    if verbose:
        print(f"[solve_increasing] target={target} -> {result} ({float(result):.6f})")
    return result
