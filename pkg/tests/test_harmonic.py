# tests/test_harmonic.py
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import hadamard

from src.group_core import Z2Set, Z4Set, neg4, subgroup_from_character
from src.harmonic import (
    RealFn2,
    Spectrum2,
    convolve2,
    dft4,
    fwht,
    inverse_wht,
    sup_nontrivial,
    wht,
)
from tests.utils import dft4_direct, random_z4_set, wht_direct


def random_rational_fn(m, seed):
    rng = np.random.default_rng(seed)
    return RealFn2(m, rng.integers(-20, 21, size=2**m).tolist(), int(rng.integers(1, 9)))


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_fwht_matches_hadamard_matrix(m):
    rng = np.random.default_rng(m)
    values = rng.integers(-50, 51, size=2**m)
    expected = hadamard(2**m, dtype=np.int64) @ values
    assert fwht(values).tolist() == expected.tolist()


def test_fwht_matches_direct_sum():
    values = [3, 0, -1, 2, 5, 5, 0, 1]
    assert fwht(values).tolist() == wht_direct(values, 3)


def test_fwht_switches_to_python_ints_for_large_values():
    values = np.array([2**61] * 4, dtype=np.int64)
    out = fwht(values)
    assert [int(v) for v in out] == [2**63, 0, 0, 0]


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        fwht([1, 2, 3])


def test_wht_examples():
    m = 4
    s = wht(RealFn2.constant(m, 1))
    assert s.coeff(0) == 1
    assert all(c == 0 for c in s.coeffs()[1:])

    point = wht(RealFn2.indicator(Z2Set(m, [0])))
    assert point.coeffs() == [Fraction(1, 16)] * 16

    gamma0 = 0b0110
    H = subgroup_from_character(gamma0, m)
    s = wht(RealFn2.indicator(Z2Set(m, H.members().tolist())))
    for g, c in enumerate(s.coeffs()):
        expected = Fraction(1, 2) if g in (0, gamma0) else 0
        assert c == expected, f"coefficient at {g:04b} is {c}, expected {expected}"


@pytest.mark.parametrize("seed", range(20))
def test_parseval_and_inversion(seed):
    m = 1 + seed % 8
    f = random_rational_fn(m, seed)
    s = wht(f)
    assert s.parseval_sum() == f.mean_square()
    assert inverse_wht(s) == f


@pytest.mark.parametrize("seed", range(10))
def test_convolution_matches_direct_sum(seed):
    m = 3
    f, g = random_rational_fn(m, seed), random_rational_fn(m, seed + 100)
    direct = [
        sum((f.value(y) * g.value(x ^ y) for y in range(2**m)), Fraction(0)) / 2**m
        for x in range(2**m)
    ]
    assert convolve2(f, g).values() == direct
    product = [a * b for a, b in zip(wht(f).coeffs(), wht(g).coeffs())]
    assert wht(convolve2(f, g)).coeffs() == product


def test_convolution_identities():
    m = 3
    f = random_rational_fn(m, 7)
    delta = RealFn2(m, [2**m] + [0] * (2**m - 1))
    assert convolve2(f, delta) == f

    H = subgroup_from_character(0b101, m)
    indicator = RealFn2.indicator(Z2Set(m, H.members().tolist()))
    measure = RealFn2(m, [2 if x in H else 0 for x in range(2**m)])
    assert convolve2(indicator, measure) == indicator

    with pytest.raises(ValueError):
        convolve2(f, RealFn2.constant(2, 1))


def test_sup_nontrivial_examples():
    assert sup_nontrivial(wht(RealFn2.constant(3, 1))) == (1, Fraction(0))

    H = subgroup_from_character(0b011, 3)
    s = wht(RealFn2.indicator(Z2Set(3, H.members().tolist())))
    assert sup_nontrivial(s) == (0b011, Fraction(1, 2))

    tied = Spectrum2(2, [4, -1, 1, 1], 4)
    assert sup_nontrivial(tied) == (1, Fraction(1, 4))

    with pytest.raises(ValueError):
        sup_nontrivial(Spectrum2(0, [1], 1))


def test_realfn_rejects_bad_shapes():
    with pytest.raises(ValueError):
        RealFn2(2, [1, 2, 3])
    with pytest.raises(ValueError):
        RealFn2(1, [1, 2], 0)
    assert RealFn2.from_values(1, [Fraction(1, 2), Fraction(1, 3)]).values() == [Fraction(1, 2), Fraction(1, 3)]


def test_dft4_examples():
    s = dft4(Z4Set.full(2))
    assert s.coeff(0) == (1, 0)
    assert all(s.coeff(r) == (0, 0) for r in range(1, 16))

    point = dft4(Z4Set(1, [0]))
    assert [point.coeff(r) for r in range(4)] == [(Fraction(1, 4), 0)] * 4

    # 1_{{1}}^(1) = i^{-1} / 4
    assert dft4(Z4Set(1, [1])).coeff(1) == (0, Fraction(-1, 4))


@pytest.mark.parametrize("seed", range(15))
def test_dft4_matches_direct_sum(seed):
    n = 1 + seed % 3
    A = random_z4_set(n, 1 + seed % (4**n), seed)
    s = dft4(A)
    re, im = dft4_direct(A)
    assert [int(v) for v in s.re] == re
    assert [int(v) for v in s.im] == im
    assert s.denominator == 4**n


@pytest.mark.parametrize("seed", range(10))
def test_dft4_parseval_and_conjugate_symmetry(seed):
    n = 2
    A = random_z4_set(n, 3 + seed, seed)
    s = dft4(A)
    assert s.parseval_sum() == A.density
    for r in range(4**n):
        re, im = s.coeff(r)
        assert s.coeff(neg4(r, n)) == (re, -im)


def test_dft4_sup_nontrivial_ties_go_to_least_character():
    s = dft4(Z4Set(1, [0]))
    assert s.sup_nontrivial() == (1, Fraction(1, 16))
