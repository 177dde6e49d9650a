import json
from fractions import Fraction

import numpy as np
import pytest

from src.counting import lambda_family
from src.event_logger import EventLogger, canonical_json
from src.exceptions import CertificateError
from src.group_core import Family, Z2Set, subgroup_from_character
from src.harmonic import RealFn2, wht
from src.increment import (
    FamilySummary,
    IncrementCertificate,
    LargeL2Floor,
    compose_chain,
    density_fn_increment,
    dyadic_select,
    fibre_increment,
    flat_profile,
    large_l2_drive,
    large_l2_step,
    large_l2_step_bound,
    linf_increment,
    mean_fibre_coefficients,
)
from tests.utils import coset_average, family_quadruples, random_family


def random_unit_fn(m, seed):
    rng = np.random.default_rng(seed)
    denominator = int(rng.integers(1, 9))
    return RealFn2(m, rng.integers(0, denominator + 1, size=2**m).tolist(), denominator)


def random_flat_family(m, seed):
    """f = delta 1_S with each fibre an initial segment of H."""
    rng = np.random.default_rng(seed)
    support = np.flatnonzero(rng.random(2**m) < 0.5).tolist() or [0]
    size = int(rng.integers(1, 2**m + 1))
    return Family.from_mapping(m, {h: range(size) for h in support})


@pytest.mark.parametrize("seed", range(200))
def test_linf_increment_is_the_larger_coset_average(seed):
    m = 1 + seed % 6
    f = random_unit_fn(m, seed)
    gamma = 1 + seed % (2**m - 1)
    result = linf_increment(f, gamma)

    H = subgroup_from_character(gamma, m)
    inside = H.members()
    outside = inside ^ (gamma & -gamma)
    values = f.values()
    assert result.new_density == max(coset_average(values, inside), coset_average(values, outside))
    assert result.gain == abs(wht(f).coeff(gamma))
    assert result.subgroup == H


def test_linf_increment_rejects_bad_input():
    f = RealFn2(2, [0, 1, 1, 0])
    with pytest.raises(ValueError):
        linf_increment(f, 0)
    with pytest.raises(ValueError):
        linf_increment(f, 4)
    with pytest.raises(ValueError):
        linf_increment(RealFn2(1, [2, 0]), 1)


@pytest.mark.parametrize("step", [fibre_increment, density_fn_increment])
@pytest.mark.parametrize("seed", range(100))
def test_family_increments_verify(step, seed):
    m = 2 + seed % 3
    F = random_family(m, p=0.4, seed=seed)
    gamma = 1 + (7 * seed) % (2**m - 1)
    new_family, certificate = step(F, gamma)

    certificate.verify(F, new_family)
    assert new_family.ambient_m == m - 1
    assert new_family.density >= F.density + certificate.claimed_gain
    assert certificate.after.raw_count == family_quadruples(new_family)
    assert certificate.before.raw_count >= certificate.after.raw_count


@pytest.mark.parametrize("seed", range(5))
def test_fibre_increment_gain_is_the_mean_fibre_coefficient(seed):
    F = random_family(3, p=0.5, seed=seed)
    coefficients = mean_fibre_coefficients(F)
    for gamma in range(1, 8):
        _, certificate = fibre_increment(F, gamma)
        assert certificate.claimed_gain == coefficients[gamma]


def test_density_fn_increment_gain_is_the_density_coefficient():
    F = random_family(3, p=0.5, seed=11)
    spectrum = wht(RealFn2(3, F.sizes, F.group_order))
    for gamma in range(1, 8):
        _, certificate = density_fn_increment(F, gamma)
        assert certificate.claimed_gain == abs(spectrum.coeff(gamma))


def test_fibres_equal_to_the_subgroup_become_full():
    m, gamma = 3, 0b011
    H = subgroup_from_character(gamma, m)
    F = Family(m, [H.members().tolist()] * 2**m)
    new_family, certificate = fibre_increment(F, gamma)
    assert new_family == Family.full(m - 1)
    assert certificate.claimed_gain == Fraction(1, 2)


def test_empty_family_gains_nothing():
    new_family, certificate = fibre_increment(Family.empty(2), 1)
    assert new_family.density == 0
    assert certificate.claimed_gain == 0
    certificate.verify(Family.empty(2), new_family)


def test_verify_rejects_a_family_that_does_not_match():
    F = random_family(3, p=0.5, seed=2)
    new_family, certificate = fibre_increment(F, 0b101)
    with pytest.raises(CertificateError):
        certificate.verify(F, Family.full(2))


def test_certificate_round_trip_and_tamper():
    F = random_family(3, p=0.5, seed=3)
    new_family, certificate = density_fn_increment(F, 0b110)
    data = json.loads(canonical_json(certificate.to_dict()))
    restored = IncrementCertificate.from_dict(data)
    assert canonical_json(restored.to_dict()) == canonical_json(certificate.to_dict())
    restored.verify(F, new_family)

    data["after"]["raw_count"] += 1
    with pytest.raises(CertificateError):
        IncrementCertificate.from_dict(data).verify(F, new_family)
    with pytest.raises(CertificateError):
        IncrementCertificate.from_dict({"kind": "linf"})


def test_compose_chain():
    F = random_family(4, p=0.5, seed=5)
    F1, c1 = fibre_increment(F, 0b1001)
    F2, c2 = density_fn_increment(F1, 0b011)
    bound = compose_chain([c1, c2], FamilySummary.of(F))
    assert bound.codimension == 2
    assert bound.links == 2
    assert bound.holds
    assert bound.lift(Fraction(1)) == Fraction(1, 256)

    with pytest.raises(CertificateError):
        compose_chain([c1, c1])
    with pytest.raises(CertificateError):
        compose_chain([c2], FamilySummary.of(F))
    with pytest.raises(ValueError):
        compose_chain([])
    assert compose_chain([], FamilySummary.of(F)).links == 0


def test_flat_profile():
    F = Family.from_mapping(3, {0: [0, 1], 6: [3, 4]})
    delta, S = flat_profile(F)
    assert delta == Fraction(1, 4)
    assert S == Z2Set(3, [0, 6])
    with pytest.raises(ValueError):
        flat_profile(Family.from_mapping(3, {0: [0], 1: [0, 1]}))


def test_large_l2_step_floor_branch_on_the_whole_group():
    outcome = large_l2_step(Family.full(3))
    assert isinstance(outcome, LargeL2Floor)
    assert outcome.lambda_floor == 1
    assert outcome.bound == Fraction(1, 2)


@pytest.mark.parametrize("seed", range(20))
def test_large_l2_drive_stays_within_its_bound(seed):
    m = 2 + seed % 4
    F = random_flat_family(m, seed)
    drive = large_l2_drive(F)
    delta, S = flat_profile(F)
    assert drive.steps <= large_l2_step_bound(delta, S.density)
    assert drive.chain.holds
    assert drive.chain.codimension == drive.steps
    assert 0 < drive.certified_floor <= lambda_family(F).lambda_value
    assert drive.terminal.lambda_floor >= drive.terminal.bound


def test_large_l2_drive_logs_its_steps():
    event_logger = EventLogger("start")
    drive = large_l2_drive(random_flat_family(4, 1), event_logger=event_logger)
    branches = event_logger.branches()
    assert branches[-1] == "large_l2_floor"
    assert branches.count("large_l2_increment") == drive.steps


def test_dyadic_select_single_level():
    F = Family.from_mapping(3, {0: [0, 1], 3: [2, 5], 5: [1, 7]})
    selection = dyadic_select(F)
    assert selection.K == Fraction(8, 3)
    assert selection.q == 3
    assert selection.level == 1
    assert selection.delta == Fraction(1, 4)
    assert selection.members == Z2Set(3, [0, 3, 5])
    assert selection.subfamily == F
    assert selection.averaging_holds
    assert selection.certificate.kind == "dyadic_trim"


def test_dyadic_select_warns_on_small_K():
    event_logger = EventLogger("start")
    selection = dyadic_select(Family.full(2), event_logger=event_logger)
    assert selection.K == 1
    assert "dyadic_warning" in event_logger.branches()
    assert selection.level == 0
    assert all(fibre.size == 2 for fibre in selection.subfamily.fibres)


@pytest.mark.parametrize("seed", range(6))
def test_dyadic_select_on_random_families(seed):
    F = random_family(3, p=0.3 + 0.1 * (seed % 3), seed=seed)
    selection = dyadic_select(F)
    assert selection.averaging_holds
    assert selection.certificate.after.raw_count <= selection.certificate.before.raw_count
    for h, fibre in enumerate(selection.subfamily.fibres):
        assert set(fibre.members) <= set(F.fibre(h).members)


def test_dyadic_select_rejects_bad_input():
    with pytest.raises(ValueError):
        dyadic_select(Family.empty(2))
    with pytest.raises(ValueError):
        dyadic_select(Family.full(2), q=0)
