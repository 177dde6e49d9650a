# tests/test_counting.py
from fractions import Fraction

import pytest

from src.counting import (
    LambdaReport,
    diagnostics,
    energy,
    family_raw_count_quadruple,
    family_raw_count_wht,
    free_via_fibres,
    has_proper_progression,
    ker2_pair_count,
    lambda_family,
    lambda_fourier,
    lambda_naive,
    lambda_report,
    lev_positivity,
    trivial_count,
    trivial_count_enumerated,
    trivial_progression_count,
    trivial_triple_count,
)
from src.exceptions import CapExceededError, InternalConsistencyError
from src.group_core import Family, Z2Set, Z4Set, fibre_decompose, subgroup_from_character
from tests.utils import (
    family_quadruples,
    progression_pairs,
    proper_progression_exists,
    random_family,
    random_z2_set,
    random_z4_set,
)


def assert_reports_agree(A):
    naive = lambda_naive(A)
    fourier = lambda_fourier(A)
    fibre = lambda_family(fibre_decompose(A))
    assert naive.raw_count == fourier.raw_count == fibre.raw_count, (
        f"raw counts differ on {A}: naive {naive.raw_count}, fourier {fourier.raw_count}, fibre {fibre.raw_count}"
    )
    assert naive.lambda_value == fourier.lambda_value == fibre.lambda_value
    return naive


@pytest.mark.parametrize("n", [1, 2, 3])
def test_full_group_has_lambda_one(n):
    assert assert_reports_agree(Z4Set.full(n)).lambda_value == 1


def test_single_point():
    report = lambda_naive(Z4Set(1, [0]))
    assert report.raw_count == 1
    assert report.lambda_value == Fraction(1, 16)


def test_empty_set():
    assert lambda_fourier(Z4Set(2, [])).lambda_value == 0
    assert lambda_naive(Z4Set(2, [])).raw_count == 0
    assert lambda_family(Family.empty(2)).lambda_value == 0


def test_a0_has_only_trivial_progressions(a0_set):
    report = assert_reports_agree(a0_set)
    assert report.raw_count == 64
    assert report.raw_count == trivial_progression_count(a0_set)
    assert report.lambda_value == Fraction(1, 64)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(50))
def test_triple_count_agreement(n, seed):
    size = 1 + seed % (4**n)
    assert_reports_agree(random_z4_set(n, size, seed))


@pytest.mark.parametrize("seed", range(10))
def test_naive_count_matches_digit_enumeration(seed):
    A = random_z4_set(2, 2 + seed, seed)
    assert lambda_naive(A).raw_count == progression_pairs(A)


def test_family_counts_agree_with_four_loops():
    for seed in range(10):
        F = random_family(3, p=0.4, seed=seed)
        expected = family_quadruples(F)
        assert family_raw_count_quadruple(F) == expected
        assert family_raw_count_wht(F) == expected


def test_full_family_has_lambda_one():
    assert lambda_family(Family.full(3)).lambda_value == 1


def test_lambda_report_validation():
    with pytest.raises(ValueError):
        LambdaReport(Fraction(0), 0, 1, "guess")
    with pytest.raises(InternalConsistencyError):
        LambdaReport(Fraction(1, 2), 3, 4, "naive")
    with pytest.raises(ValueError):
        lambda_report(Z4Set(1, [0]), "guess")
    assert lambda_report(Z4Set(1, [0]), "fibre").to_dict()["raw_count"] == 1


def test_naive_count_cap():
    with pytest.raises(CapExceededError):
        lambda_naive(Z4Set(2, [0]), cap=1)


@pytest.mark.parametrize("n, expected", [(1, 8), (2, 64), (3, 512), (4, 4096)])
def test_trivial_count(n, expected):
    assert trivial_count(n) == expected


@pytest.mark.parametrize("n", [1, 2, 3])
def test_trivial_count_enumerations(n):
    assert trivial_count_enumerated(n) == 8**n
    # x = y forces z = x, so the degenerate triples are exactly those with 2(y - x) = 0
    assert trivial_triple_count(n) == 8**n


def test_trivial_count_enumeration_cap():
    with pytest.raises(CapExceededError):
        trivial_count_enumerated(4)


def test_has_proper_progression_examples(a0_set):
    assert has_proper_progression(Z4Set(1, [0, 1, 2])) == (0, 1)
    assert has_proper_progression(Z4Set(1, [0, 1])) is None
    assert has_proper_progression(a0_set) is None


@pytest.mark.parametrize("seed", range(20))
def test_freeness_checks_agree(seed):
    n = 1 + seed % 2
    A = random_z4_set(n, 1 + seed % (2 * n + 2), seed)
    expected = proper_progression_exists(A)
    assert (has_proper_progression(A) is not None) == expected
    assert free_via_fibres(fibre_decompose(A)) == (not expected)


def test_cauchy_schwarz_floor():
    for seed in range(20):
        A = random_z4_set(2, 3 + seed % 10, seed)
        raw = lambda_naive(A).raw_count
        assert trivial_progression_count(A) == ker2_pair_count(A)
        assert raw >= ker2_pair_count(A)
        if has_proper_progression(A) is None:
            assert raw == trivial_progression_count(A)


def test_energy_examples():
    assert energy(Z2Set.full(3)) == 1
    assert energy(Z2Set(3, [])) == 0
    H = subgroup_from_character(0b0110, 4)
    assert energy(Z2Set(4, H.members().tolist())) == Fraction(1, 8)


@pytest.mark.parametrize("seed", range(10))
def test_energy_matches_quadruple_count(seed):
    B = random_z2_set(3, 0.5, seed)
    members = B.members
    quadruples = sum(1 for a in members for b in members for c in members for d in members if a ^ b == c ^ d)
    assert energy(B) == Fraction(quadruples, 2**9)


def test_diagnostics_examples():
    constant = Family(2, [[0, 1]] * 4)
    d = diagnostics(constant)
    assert d.alpha == Fraction(1, 2)
    assert d.K == 1
    assert d.sup_f_hat == 0

    # f = delta 1_S with sigma = 1/4
    flat = Family.from_mapping(3, {0: [0, 1], 5: [2, 3]})
    assert diagnostics(flat).K == 4

    with pytest.raises(ValueError):
        diagnostics(Family.empty(2))


@pytest.mark.parametrize("seed", range(5))
def test_diagnostics_matches_direct_sums(seed):
    F = random_family(3, p=0.3, seed=seed)
    f = [Fraction(s.size, 8) for s in F.fibres]
    alpha = sum(f) / 8
    K = sum(v * v for v in f) / 8 / alpha**2
    d = diagnostics(F)
    assert d.alpha == alpha
    assert d.K == K
    coefficient = abs(sum(v * (-1) ** bin(d.witness & h).count("1") for h, v in enumerate(f)) / 8)
    assert coefficient == d.sup_f_hat


@pytest.mark.parametrize("seed", range(100))
def test_lev_positivity(seed):
    n = 1 + seed % 3
    A = random_z4_set(n, 1 + seed % (4**n), seed)
    report = lev_positivity(A)
    assert report.holds, f"Lev positivity fails: {report.lhs} < {report.rhs}"
