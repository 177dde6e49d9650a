# tests/test_group_core.py
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from src.exceptions import CapExceededError, SetFileError
from src.group_core import (
    Family,
    Subgroup2,
    Z2Set,
    Z4Set,
    add4,
    digits4,
    dot2,
    enumerate_subgroups,
    fibre_decompose,
    format_family,
    format_set,
    from_digits4,
    halved_part,
    join_parts,
    neg4,
    parity_part,
    parse_family_text,
    parse_set_text,
    read_input_file,
    section_t,
    subgroup_from_character,
    two,
)
from tests.utils import add_digits, random_family, random_z4_set


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bit_arithmetic_matches_digit_arithmetic(n):
    xs = np.arange(4**n, dtype=np.int64)
    for y in range(4**n):
        sums = add4(xs, y, n)
        for x in range(4**n):
            assert int(sums[x]) == add_digits(x, y, n)
        assert add4(y, neg4(y, n), n) == 0
        assert two(y, n) == add_digits(y, y, n)


def test_section_t_examples():
    assert section_t(0, 3) == 0
    assert section_t(from_digits4((2, 0, 2)), 3) == from_digits4((1, 0, 1))
    with pytest.raises(ValueError):
        section_t(from_digits4((1, 0, 0)), 3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_section_t_inverts_doubling_on_the_image(n):
    for bits in product((0, 2), repeat=n):
        y = from_digits4(bits)
        assert two(section_t(y, n), n) == y


@pytest.mark.parametrize("n", [1, 2, 3])
def test_parity_and_halved_parts_split_every_element(n):
    for x in range(4**n):
        h, a = parity_part(x, n), halved_part(x, n)
        assert join_parts(h, a, n) == x
        assert tuple(d % 2 for d in digits4(x, n)) == tuple((h >> (n - 1 - k)) & 1 for k in range(n))


def test_fibre_decompose_examples():
    F = fibre_decompose(Z4Set(1, [0]))
    assert F.fibre(0).members == (0,)
    assert not F.fibre(1)
    assert F.density_values() == [Fraction(1, 2), Fraction(0)]

    full = fibre_decompose(Z4Set.full(2))
    assert all(fibre == Z2Set.full(2) for fibre in full.fibres)
    assert full.density == 1


def test_fibre_decompose_of_a0(a0_family):
    assert a0_family.total == 16
    assert [int(s) for s in a0_family.sizes] == [4, 4, 4, 0, 4, 0, 0, 0]
    assert a0_family.fibre(0).members == (0b000, 0b011, 0b101, 0b110)


@pytest.mark.parametrize("seed", range(10))
def test_fibre_decompose_round_trip(seed):
    A = random_z4_set(3, 20, seed)
    F = fibre_decompose(A)
    assert F.total == A.size
    assert F.to_z4set() == A


def test_set_invariants():
    A = Z4Set(2, [5, 1, 3])
    assert A.members == (1, 3, 5)
    assert A.density == Fraction(3, 16)
    assert 3 in A and 4 not in A
    with pytest.raises(ValueError):
        Z4Set(1, [0, 0])
    with pytest.raises(ValueError):
        Z4Set(1, [4])
    with pytest.raises(ValueError):
        Family(2, [[0]])


def test_subgroup_from_character():
    H = subgroup_from_character(1, 1)
    assert list(H.members()) == [0]
    assert H.index == 2

    gamma = 0b110
    H = subgroup_from_character(gamma, 3)
    assert H.size == 4
    assert H.annihilator == (gamma,)
    for x in range(8):
        assert (x in H) == (dot2(gamma, x) == 0), f"membership of {x:03b} disagrees with gamma.x"
    with pytest.raises(ValueError):
        subgroup_from_character(0, 3)


@pytest.mark.parametrize("gamma", range(1, 16))
def test_character_kernel_and_its_coset_partition_the_group(gamma):
    H = subgroup_from_character(gamma, 4)
    x0 = gamma & -gamma
    assert x0 not in H
    inside = set(H.members().tolist())
    outside = {x ^ x0 for x in inside}
    assert inside.isdisjoint(outside)
    assert inside | outside == set(range(16))


@pytest.mark.parametrize("m, expected", [(0, 1), (1, 2), (2, 5), (3, 16), (4, 67)])
def test_enumerate_subgroups_counts(m, expected):
    subgroups = enumerate_subgroups(m)
    assert len(subgroups) == expected
    assert len(set(subgroups)) == expected
    keys = [H.sort_key() for H in subgroups]
    assert keys == sorted(keys)


def test_enumerate_subgroups_matches_closed_subsets():
    # every subset of Z_2^3 containing 0 and closed under addition
    closed = set()
    for mask in range(1, 2**8):
        members = [x for x in range(8) if (mask >> x) & 1]
        if 0 in members and all((a ^ b) in members for a in members for b in members):
            closed.add(tuple(members))
    found = {tuple(sorted(H.members().tolist())) for H in enumerate_subgroups(3)}
    assert found == closed


def test_enumerate_subgroups_respects_cap():
    with pytest.raises(CapExceededError):
        enumerate_subgroups(6)
    assert len(enumerate_subgroups(2, cap=2)) == 5


def test_subgroup_coordinates_preserve_order():
    H = Subgroup2.from_basis(4, [0b1010, 0b0110])
    members = sorted(H.members().tolist())
    coords = [H.coordinates(x) for x in members]
    assert coords == list(range(H.size))
    assert all(H.embed(c) == x for c, x in zip(coords, members))
    with pytest.raises(ValueError):
        H.coordinates(0b0001)


def test_coset_representatives_and_restrict():
    H = subgroup_from_character(0b100, 3)
    reps = H.coset_representatives()
    assert sorted(reps.values()) == [0, 0b100]
    B = Z2Set(3, [0b001, 0b101, 0b110])
    assert H.restrict(B, 0b100).members == (H.coordinates(0b001), H.coordinates(0b010))
    assert H.restrict(B).members == (H.coordinates(0b001),)


def test_subgroup_to_dict_and_back():
    H = Subgroup2.from_annihilator(4, [0b1100, 0b0011])
    assert Subgroup2.from_dict(H.to_dict()) == H
    with pytest.raises(ValueError):
        Subgroup2(2, [0b11], [0b01])


def test_set_file_round_trip():
    A = Z4Set.from_digits(3, [(0, 1, 2), (3, 3, 0)])
    assert parse_set_text(format_set(A)) == A
    B = Z2Set(4, [1, 7, 12])
    assert parse_set_text(format_set(B)) == B
    text = "# comment\nz4 n=2\n\n01\n# another\n32\n"
    assert parse_set_text(text) == Z4Set.from_digits(2, [(0, 1), (3, 2)])


@pytest.mark.parametrize(
    "text",
    [
        "",
        "z3 n=2\n00\n",
        "z4 n=two\n",
        "z4 n=2\n012\n",
        "z4 n=2\n04\n",
        "z4 n=2\n01\n01\n",
        "z2 m=2\n12\n",
    ],
)
def test_set_file_errors(text):
    with pytest.raises(SetFileError):
        parse_set_text(text)


def test_family_file_round_trip(tmp_path):
    F = random_family(3, seed=4)
    assert parse_family_text(format_family(F)) == F
    path = tmp_path / "fam.txt"
    path.write_text(format_family(F), encoding="utf-8")
    assert read_input_file(str(path)) == F


@pytest.mark.parametrize(
    "text",
    [
        "z4 n=1\n",
        "family m=2\n01 10\n",
        "family m=2\n01: 10 10\n",
        "family m=2\n01: 10\n01: 11\n",
        "family m=2\n011: 10\n",
    ],
)
def test_family_file_errors(text):
    with pytest.raises(SetFileError):
        parse_family_text(text)


def test_family_to_dict_and_back():
    F = random_family(2, seed=1)
    assert Family.from_dict(F.to_dict()) == F
