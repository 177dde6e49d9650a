"""
Exact Fourier analysis on Z_2^m and Z_4^n.

Functions and spectra are stored as integer numerator arrays over one common positive
denominator, which is what indicator transforms naturally produce (denominators 2^m
and 4^n). The butterflies run on numpy int64 arrays while the magnitudes allow it and
on object arrays of Python ints otherwise, so every identity is an exact equality.
"""
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.constants import INT64_SAFE_BOUND
from src.group_core import Z2Set, Z4Set, format_z2, format_z4, two
from src.utils import fraction_to_json


def _exact(values, growth: int) -> np.ndarray:
    """Integer array that can absorb a further factor `growth` without overflow."""
    arr = np.asarray(values)
    if arr.dtype == bool:
        arr = arr.astype(np.int64)
    if arr.dtype != object and np.issubdtype(arr.dtype, np.integer):
        peak = int(np.abs(arr).max(initial=0))
        if peak * growth < INT64_SAFE_BOUND:
            return arr.astype(np.int64)
    out = np.empty(arr.shape, dtype=object)
    out.flat[:] = [int(v) for v in arr.flat]
    return out


def fwht(values, axis: int = -1) -> np.ndarray:
    """
    Unnormalized Walsh-Hadamard butterfly along one axis, Sylvester ordering:
    out[g] = sum_x values[x] * (-1)^popcount(g & x).
    """
    arr = np.asarray(values)
    size = arr.shape[axis]
    if size & (size - 1):
        raise ValueError(f"Transform length {size} is not a power of two.")
    work = _exact(np.moveaxis(arr, axis, -1), size).copy()
    lead = work.shape[:-1]
    h = 1
    while h < size:
        v = work.reshape(lead + (size // (2 * h), 2, h))
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] = a + b
        v[..., 1, :] = a - b
        work = v.reshape(lead + (size,))
        h *= 2
    return np.moveaxis(work, -1, axis)


def _dimension_of(length: int, base: int) -> int:
    m = 0
    while base**m < length:
        m += 1
    if base**m != length:
        raise ValueError(f"Length {length} is not a power of {base}.")
    return m


class RealFn2:
    """A rational-valued function on Z_2^m as numerators over a common denominator."""

    def __init__(self, ambient_m: int, numerators, denominator: int = 1):
        nums = _exact(numerators, 1)
        if nums.ndim != 1 or len(nums) != 2**ambient_m:
            raise ValueError(f"A function on Z_2^{ambient_m} needs {2**ambient_m} values.")
        if int(denominator) <= 0:
            raise ValueError("Denominator must be positive.")
        self.ambient_m = int(ambient_m)
        self.numerators = nums
        self.denominator = int(denominator)

    @classmethod
    def from_values(cls, m: int, values: Iterable) -> "RealFn2":
        fracs = [Fraction(v) for v in values]
        den = lcm(*(f.denominator for f in fracs)) if fracs else 1
        return cls(m, [f.numerator * (den // f.denominator) for f in fracs], den)

    @classmethod
    def indicator(cls, B: Z2Set) -> "RealFn2":
        return cls(B.ambient_m, B.mask.astype(np.int64), 1)

    @classmethod
    def constant(cls, m: int, value) -> "RealFn2":
        value = Fraction(value)
        return cls(m, [value.numerator] * 2**m, value.denominator)

    def value(self, x: int) -> Fraction:
        return Fraction(int(self.numerators[x]), self.denominator)

    def values(self) -> List[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.numerators]

    def mean(self) -> Fraction:
        return Fraction(int(sum(int(v) for v in self.numerators)), self.denominator * 2**self.ambient_m)

    def mean_square(self) -> Fraction:
        total = sum(int(v) * int(v) for v in self.numerators)
        return Fraction(total, self.denominator**2 * 2**self.ambient_m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealFn2) or other.ambient_m != self.ambient_m:
            return False
        return all(
            int(a) * other.denominator == int(b) * self.denominator
            for a, b in zip(self.numerators, other.numerators)
        )

    def __repr__(self) -> str:
        return f"RealFn2(m={self.ambient_m}, denominator={self.denominator})"


class Spectrum2:
    """coeff(g) = E_x f(x) (-1)^{g.x}, as numerators over a common denominator."""

    def __init__(self, ambient_m: int, numerators, denominator: int):
        self.ambient_m = int(ambient_m)
        self.numerators = _exact(numerators, 1)
        self.denominator = int(denominator)

    def coeff(self, gamma: int) -> Fraction:
        return Fraction(int(self.numerators[gamma]), self.denominator)

    def coeffs(self) -> List[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.numerators]

    def parseval_sum(self) -> Fraction:
        total = sum(int(v) * int(v) for v in self.numerators)
        return Fraction(total, self.denominator**2)

    def to_json_dict(self) -> Dict[str, list]:
        return {format_z2(g, self.ambient_m): fraction_to_json(c) for g, c in enumerate(self.coeffs())}


def wht(f: RealFn2) -> Spectrum2:
    return Spectrum2(f.ambient_m, fwht(f.numerators), f.denominator * 2**f.ambient_m)


def inverse_wht(s: Spectrum2) -> RealFn2:
    # f(x) = sum_g coeff(g) (-1)^{g.x}
    return RealFn2(s.ambient_m, fwht(s.numerators), s.denominator)


def convolve2(f: RealFn2, g: RealFn2) -> RealFn2:
    """(f * g)(x) = E_y f(y) g(x - y), through the product of the two spectra."""
    if f.ambient_m != g.ambient_m:
        raise ValueError(f"Cannot convolve functions on Z_2^{f.ambient_m} and Z_2^{g.ambient_m}.")
    sf, sg = wht(f), wht(g)
    peak = max((abs(int(v)) for v in sg.numerators), default=0)
    product = _exact(sf.numerators, peak + 1) * sg.numerators
    return inverse_wht(Spectrum2(f.ambient_m, product, sf.denominator * sg.denominator))


def sup_nontrivial(s: Spectrum2) -> Tuple[int, Fraction]:
    """Largest |coeff(g)| over g != 0; ties go to the least character."""
    if s.ambient_m < 1:
        raise ValueError("Z_2^0 has no nontrivial characters.")
    nums = [abs(int(v)) for v in s.numerators]
    gamma = max(range(1, len(nums)), key=lambda g: (nums[g], -g))
    return gamma, Fraction(nums[gamma], s.denominator)


def indicator_transform(B: Z2Set) -> np.ndarray:
    """Unnormalized transform of 1_B; coefficient g is 2^m * \\hat 1_B(g)."""
    return fwht(B.mask.astype(np.int64))


# ---------------------------------------------------------------------------
# Z_4^n
# ---------------------------------------------------------------------------

def _rotate(re, im, k: int):
    """(re + i im) * i^{-k}"""
    k %= 4
    if k == 0:
        return re, im
    if k == 1:
        return im, -re
    if k == 2:
        return -re, -im
    return -im, re


def _dft4_axis(re: np.ndarray, im: np.ndarray, axis: int):
    out_re, out_im = [], []
    for k in range(4):
        acc_re, acc_im = 0, 0
        for j in range(4):
            r, s = _rotate(np.take(re, j, axis=axis), np.take(im, j, axis=axis), j * k)
            acc_re = acc_re + r
            acc_im = acc_im + s
        out_re.append(acc_re)
        out_im.append(acc_im)
    return np.stack(out_re, axis=axis), np.stack(out_im, axis=axis)


class Spectrum4:
    """
    Fourier coefficients of a function on Z_4^n against the characters x -> i^{r.x}:
    coeff(r) = E_x f(x) i^{-r.x} = (re[r] + i im[r]) / denominator.
    """

    def __init__(self, ambient_n: int, re, im, denominator: int):
        self.ambient_n = int(ambient_n)
        self.re = _exact(re, 1)
        self.im = _exact(im, 1)
        self.denominator = int(denominator)

    def coeff(self, r: int) -> Tuple[Fraction, Fraction]:
        return (
            Fraction(int(self.re[r]), self.denominator),
            Fraction(int(self.im[r]), self.denominator),
        )

    def sq_modulus_numerators(self) -> List[int]:
        return [int(a) * int(a) + int(b) * int(b) for a, b in zip(self.re, self.im)]

    def sq_modulus(self, r: int) -> Fraction:
        a, b = int(self.re[r]), int(self.im[r])
        return Fraction(a * a + b * b, self.denominator**2)

    def parseval_sum(self) -> Fraction:
        return Fraction(sum(self.sq_modulus_numerators()), self.denominator**2)

    def sup_nontrivial(self) -> Tuple[int, Fraction]:
        """Character r != 0 maximizing |coeff(r)|^2 (least r on ties), and that square."""
        if self.ambient_n < 1:
            raise ValueError("Z_4^0 has no nontrivial characters.")
        sq = self.sq_modulus_numerators()
        r = max(range(1, len(sq)), key=lambda g: (sq[g], -g))
        return r, Fraction(sq[r], self.denominator**2)

    def doubled_index(self) -> np.ndarray:
        return two(np.arange(4**self.ambient_n, dtype=np.int64), self.ambient_n)

    def to_json_dict(self) -> Dict[str, list]:
        out = {}
        for r in range(4**self.ambient_n):
            re, im = self.coeff(r)
            out[format_z4(r, self.ambient_n)] = [fraction_to_json(re), fraction_to_json(im)]
        return out


def dft4_values(values: Sequence[int], n: int) -> Spectrum4:
    """Transform of an integer-valued function on Z_4^n given in index order."""
    re = _exact(values, 4**n).reshape((4,) * n) if n else _exact(values, 1)
    im = np.zeros_like(re)
    for axis in range(n):
        re, im = _dft4_axis(re, im, axis)
    return Spectrum4(n, np.ravel(re), np.ravel(im), 4**n)


def dft4(A: Z4Set) -> Spectrum4:
    """\\hat 1_A(r) = 4^{-n} sum_{x in A} i^{-r.x}, one radix-4 pass per coordinate."""
    return dft4_values(A.mask.astype(np.int64), A.ambient_n)
